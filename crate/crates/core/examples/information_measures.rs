//! Joint law of a state-dependent channel and a few of its information terms.

use mawc::catalog;
use mawc::prob::assemble_joint;
use mawc::region::mi_bundle;

fn main() -> mawc::Result<()> {
    let channel = catalog::example1_channel(0.75)?;
    let aux = catalog::example1_scheme1_aux(&channel)?;
    let joint = assemble_joint(&channel, &aux)?;

    let names: Vec<_> = joint.vars().iter().map(|a| format!("{}:{}", a.name, a.size)).collect();
    println!("variables  {}", names.join(" "));
    println!("H(S)           = {:.6}", joint.entropy(&["S"], &[])?);
    println!("I(X1;Y|X2,S)   = {:.6}", joint.mutual_information(&["X1"], &["Y"], &["X2", "S"])?);
    println!("I(X1,X2;Z)     = {:.6}", joint.mutual_information(&["X1", "X2"], &["Z"], &[])?);

    let b = mi_bundle(&joint)?;
    println!("I(U1;Y|V,U,U2) = {:.6}", b.u1_y_vuu2);
    println!("I(V;Y)         = {:.6}", b.v_y);
    println!("key budget     = {:.6}", b.key_budget());
    Ok(())
}
