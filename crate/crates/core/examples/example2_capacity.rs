//! Capacity region of a degraded channel with degraded message sets, from
//! the closed form and from a search over input laws.

use mawc::catalog;
use mawc::region::{
    alpha_grid, example2_capacity, example2_constraints, theorem3_capacity, DegradednessMode, SearchConfig,
};

fn main() -> mawc::Result<()> {
    let (q, p) = (0.25, 0.1);
    let grid = alpha_grid(0.05)?;
    for &a in &grid {
        let b = example2_constraints(q, p, a)?;
        println!("alpha {a:.2}  R1 <= {:.4}  R0 + R1 <= {:.4}", b.r1(), b.sum());
    }

    let channel = catalog::example2_channel(q, p)?;
    let fixed = grid
        .iter()
        .map(|&a| catalog::example2_capacity_aux(&channel, a).map(|x| x.to_spec()))
        .collect::<mawc::Result<_>>()?;
    let searched = theorem3_capacity(&channel, &SearchConfig::fixed_only(fixed), DegradednessMode::Verify)?;
    let formula = example2_capacity(q, p, &grid)?;
    println!("degraded: {}", searched.degraded);
    println!("distance to closed form: {:.2e}", searched.polygon.swap_axes().hausdorff(&formula));
    Ok(())
}
