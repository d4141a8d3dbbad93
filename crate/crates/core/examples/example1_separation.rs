//! Key-assisted coding beats every Shannon-strategy code on a channel whose
//! state picks the sender the legitimate receiver hears.

use mawc::catalog;
use mawc::prob::binary_entropy;
use mawc::region::{achievable_region, shannon_strategy_bound, RegionId, SearchConfig};

fn main() -> mawc::Result<()> {
    println!("{:>5} {:>10} {:>10} {:>10}", "p", "scheme 1", "contains", "strategies");
    for p in [0.6, 0.75, 0.9] {
        let channel = catalog::example1_channel(p)?;
        let aux = catalog::example1_scheme1_aux(&channel)?;
        let region = achievable_region(&channel, RegionId::R11, &SearchConfig::fixed_only(vec![aux.to_spec()]))?;
        let point = (1.0 - p).min(1.0 - binary_entropy(p)?);
        let bound = shannon_strategy_bound(&channel, 2, 1e-2)?;
        println!("{p:>5} {point:>10.5} {:>10} {bound:>10.5}", region.polygon.contains([point, 0.0], 1e-6));
    }
    Ok(())
}
