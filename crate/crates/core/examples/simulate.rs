//! Block-Markov simulation on the binary regression channel at two block
//! lengths, compared on shared seeds.

use mawc::sim::{estimate_error, paired_sign_test, run_trials, SimConfig};

fn main() -> mawc::Result<()> {
    let trials = 200;
    let mut errors = Vec::new();
    for n in [12, 24] {
        let cfg = SimConfig::regression(n, 0)?;
        let plan = cfg.plan()?;
        println!("n = {n}: last block {}, book sizes {:?}", plan.n_last, plan.sizes);
        errors.push(run_trials(&plan, trials)?.iter().map(|o| o.error).collect::<Vec<_>>());
    }
    let cmp = paired_sign_test(&errors[0], &errors[1]);
    println!("errors {} -> {}, one-sided p = {:.3e}", cmp.errors_a, cmp.errors_b, cmp.p_value);

    let report = estimate_error(&SimConfig::regression(24, 1)?, 50)?;
    println!("{}", serde_json::to_string_pretty(&report.failures).unwrap());
    Ok(())
}
