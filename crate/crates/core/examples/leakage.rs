//! Eavesdropper leakage of a tiny code: exact enumeration against the
//! plug-in estimate, and the one-time pad on its own.

use mawc::catalog;
use mawc::sim::{estimate_leakage, one_time_pad_leakage, LeakageConfig, LeakageMode, SimConfig};

fn main() -> mawc::Result<()> {
    let mut cfg = SimConfig::regression(2, 4)?;
    cfg.mu = None;
    for noise in [0.1, 0.5] {
        cfg.channel = catalog::regression_channel(0.1, noise)?.to_spec();
        let plan = cfg.plan()?;
        let exact = estimate_leakage(&plan, LeakageConfig { mode: LeakageMode::Exact, trials: 0, budget: 1 << 32 })?;
        let plug = estimate_leakage(&plan, LeakageConfig { mode: LeakageMode::PlugIn, trials: 200_000, budget: 0 })?;
        println!(
            "noise {noise}: exact {:.4} bits, plug-in {:.4} bits over {} symbols",
            exact.bits, plug.bits, exact.symbols
        );
    }
    println!("uniform pad: {}", one_time_pad_leakage(&[0.25; 4])?);
    println!("skewed pad:  {:.4}", one_time_pad_leakage(&[0.7, 0.1, 0.1, 0.1])?);
    Ok(())
}
