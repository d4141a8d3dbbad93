//! Eliminating the key-split coordinates from a region's inequality system.

use mawc::catalog;
use mawc::prob::assemble_joint;
use mawc::region::{mi_bundle, project_polytope, region_system, scheme1_closed_form, RegionId};

fn main() -> mawc::Result<()> {
    let channel = catalog::example1_channel(0.6)?;
    let aux = catalog::example1_scheme1_aux(&channel)?;
    let bundle = mi_bundle(&assemble_joint(&channel, &aux)?)?;

    let system = region_system(&bundle, RegionId::R11);
    for row in &system.constraints {
        println!("{}", row.label);
    }
    let eliminated = project_polytope(&system, ["R1", "R2"])?;
    let closed = scheme1_closed_form(&bundle);
    println!("eliminated  {:?}", eliminated.vertices);
    println!("closed form {:?}", closed.vertices);
    println!("hausdorff   {:.2e}", eliminated.hausdorff(&closed));
    Ok(())
}
