//! Secrecy rate regions of one channel, searched over auxiliary laws.

use mawc::catalog;
use mawc::region::{achievable_region, RegionId, SearchConfig};

fn main() -> mawc::Result<()> {
    let channel = catalog::example1_channel(0.9)?;
    let mut search = SearchConfig { random_samples: 300, seed: 7, ..Default::default() };
    search.fixed.push(catalog::example1_scheme1_aux(&channel)?.to_spec());

    for id in [RegionId::R11, RegionId::R3, RegionId::R21, RegionId::NoSecrecy] {
        let found = achievable_region(&channel, id, &search)?;
        println!("{id} over {} candidates ({:?}):", found.candidates, found.polygon.axes);
        for v in &found.polygon.vertices {
            println!("    ({:.4}, {:.4})", v[0], v[1]);
        }
    }
    Ok(())
}
