use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::codebook::Codebooks;
use super::config::{BookSizes, LeakageConfig, LeakageMode, RateVector, SimConfig, SimPlan};
use super::keys::{KeyMappingReport, PartitionReport};
use super::scheme::{
    draw_messages, draw_states, run_trial, select_codewords, transmit, BlockMessages, FailureCause, SchemeTests,
    TrialOutcome, TrialSeeds,
};
use crate::error::{Error, Result};
use crate::prob::{entropy_of, NORM_TOL};

/// Trial counts per failure cause; each failed trial has one cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FailureCounts {
    pub wz_encode: u64,
    pub last_block: u64,
    pub v_decode: u64,
    pub tuple_decode: u64,
    pub key_mismatch: u64,
}

impl FailureCounts {
    fn add(&mut self, cause: FailureCause) {
        *match cause {
            FailureCause::WzEncode => &mut self.wz_encode,
            FailureCause::LastBlock => &mut self.last_block,
            FailureCause::VDecode => &mut self.v_decode,
            FailureCause::TupleDecode => &mut self.tuple_decode,
            FailureCause::KeyMismatch => &mut self.key_mismatch,
        } += 1;
    }

    pub fn total(&self) -> u64 {
        self.wz_encode + self.last_block + self.v_decode + self.tuple_decode + self.key_mismatch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyBookReport {
    pub block: usize,
    pub partition: PartitionReport,
    pub mapping: KeyMappingReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub mode: LeakageMode,
    /// `I(M1, M2; Z)` over all blocks, in bits.
    pub bits: f64,
    pub per_symbol: f64,
    pub symbols: usize,
    /// Sample count of the plug-in estimate.
    pub trials: Option<u64>,
    pub note: String,
}

/// Output of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: u64,
    pub errors: u64,
    pub p_error: f64,
    pub failures: FailureCounts,
    pub n: usize,
    pub blocks: usize,
    pub n_last: usize,
    pub mu: f64,
    pub tau: f64,
    pub delta: f64,
    pub seed: u64,
    pub rates: RateVector,
    pub sizes: BookSizes,
    /// Key codebooks of the first trial's code.
    pub key_books: Vec<KeyBookReport>,
    pub leakage: Option<LeakageReport>,
}

/// Runs `trials` independent realisations; codebooks are redrawn per trial.
pub fn run_trials(plan: &SimPlan, trials: u64) -> Result<Vec<TrialOutcome>> {
    let tests = SchemeTests::new(plan)?;
    (0..trials).into_par_iter().map(|t| run_trial(plan, &tests, TrialSeeds::derive(plan.seed, t), None)).collect()
}

pub fn summarize(plan: &SimPlan, outcomes: &[TrialOutcome], leakage: Option<LeakageReport>) -> Result<SimReport> {
    let mut failures = FailureCounts::default();
    outcomes.iter().filter_map(|o| o.cause).for_each(|c| failures.add(c));
    let trials = outcomes.len() as u64;
    let errors = outcomes.iter().filter(|o| o.error).count() as u64;
    let books = Codebooks::generate(plan, TrialSeeds::derive(plan.seed, 0).codebook)?;
    let key_books = (2..=plan.blocks + 1)
        .map(|b| {
            let k = books.key_book(b);
            KeyBookReport { block: b, partition: k.partition, mapping: k.mapping }
        })
        .collect();
    Ok(SimReport {
        trials,
        errors,
        p_error: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
        failures,
        n: plan.n,
        blocks: plan.blocks,
        n_last: plan.n_last,
        mu: plan.mu,
        tau: plan.tau,
        delta: plan.delta,
        seed: plan.seed,
        rates: plan.rates,
        sizes: plan.sizes,
        key_books,
        leakage,
    })
}

/// Error estimate over `trials` seeded trials, plus the configured leakage
/// estimate if any.
pub fn estimate_error(config: &SimConfig, trials: u64) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let plan = config.plan()?;
    let outcomes = run_trials(&plan, trials)?;
    let leakage = config.leakage.map(|l| estimate_leakage(&plan, l)).transpose()?;
    summarize(&plan, &outcomes, leakage)
}

/// One-sided paired comparison of two error indicators on shared seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedComparison {
    pub trials: u64,
    pub errors_a: u64,
    pub errors_b: u64,
    /// Trials where only `a` failed.
    pub only_a: u64,
    pub only_b: u64,
    /// Exact sign-test p-value for "b fails less often than a".
    pub p_value: f64,
}

pub fn paired_sign_test(a: &[bool], b: &[bool]) -> PairedComparison {
    let count = |f: &dyn Fn(bool, bool) -> bool| a.iter().zip(b).filter(|&(&x, &y)| f(x, y)).count() as u64;
    let only_a = count(&|x, y| x && !y);
    let only_b = count(&|x, y| !x && y);
    let discordant = only_a + only_b;
    PairedComparison {
        trials: a.len().min(b.len()) as u64,
        errors_a: count(&|x, _| x),
        errors_b: count(&|_, y| y),
        only_a,
        only_b,
        p_value: binomial_upper_tail(discordant, only_a),
    }
}

/// `Pr{Bin(n, 1/2) >= k}`.
fn binomial_upper_tail(n: u64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_choose = 0.0;
    let mut total = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            total += (ln_choose + ln_half_n).exp();
        }
    }
    total.min(1.0)
}

const PLUG_IN_NOTE: &str =
    "plug-in estimate with Miller-Madow correction; biased when the joint support is not well sampled";
const EXACT_NOTE: &str = "exact enumeration for the fixed codebooks of trial 0";

/// Leakage estimate for the fixed codebooks of trial 0.
pub fn estimate_leakage(plan: &SimPlan, cfg: LeakageConfig) -> Result<LeakageReport> {
    let books = Codebooks::generate(plan, TrialSeeds::derive(plan.seed, 0).codebook)?;
    let tests = SchemeTests::new(plan)?;
    let (bits, trials, note) = match cfg.mode {
        LeakageMode::Exact => (exact_leakage(plan, &books, &tests, cfg.budget)?, None, EXACT_NOTE),
        LeakageMode::PlugIn => (plug_in_leakage(plan, &books, &tests, cfg.trials)?, Some(cfg.trials), PLUG_IN_NOTE),
    };
    let symbols = plan.total_length();
    Ok(LeakageReport {
        mode: cfg.mode,
        bits,
        per_symbol: bits / symbols as f64,
        symbols,
        trials,
        note: note.to_string(),
    })
}

/// Mixed-radix digits of `idx`, least significant last.
fn digits(mut idx: u64, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (o, &r) in out.iter_mut().zip(radices).rev() {
        *o = (idx % r as u64) as usize;
        idx /= r as u64;
    }
    out
}

fn message_radices(plan: &SimPlan) -> Vec<usize> {
    let z = &plan.sizes;
    (2..=plan.blocks).flat_map(|_| [z.m10, z.m11, z.m20, z.m21]).collect()
}

fn messages_from(d: &[usize]) -> Vec<BlockMessages> {
    d.chunks(4).map(|c| BlockMessages { m10: c[0], m11: c[1], m20: c[2], m21: c[3] }).collect()
}

fn message_index(ms: &[BlockMessages], plan: &SimPlan) -> u64 {
    let r = message_radices(plan);
    let d: Vec<usize> = ms.iter().flat_map(|m| [m.m10, m.m11, m.m20, m.m21]).collect();
    d.iter().zip(&r).fold(0u64, |acc, (&x, &k)| acc * k as u64 + x as u64)
}

/// `I(M; Z)` by enumerating messages, states and local randomness; the
/// input and channel noise are summed out symbolwise.
fn exact_leakage(plan: &SimPlan, books: &Codebooks, tests: &SchemeTests, budget: u64) -> Result<f64> {
    let c = plan.channel.sizes();
    let total = plan.total_length();
    let m_radices = message_radices(plan);
    let n_msgs: u64 = m_radices.iter().map(|&r| r as u64).product();
    let locals = (plan.sizes.l1 * plan.sizes.l2) as u64;
    let n_local = locals.checked_pow(plan.blocks as u32);
    let n_states = (c.s as u64).checked_pow(total as u32);
    let n_z = (c.z as u64).checked_pow(total as u32);
    let work =
        [Some(n_msgs), n_local, n_states, n_z].into_iter().try_fold(1u64, |acc, x| x.and_then(|x| acc.checked_mul(x)));
    match work {
        Some(w) if w <= budget => {}
        _ => {
            return Err(Error::Resource(format!(
                "exact leakage needs more than {budget} enumerated terms; use plug-in mode"
            )))
        }
    }
    let (n_local, n_states, n_z) = (n_local.unwrap_or(0), n_states.unwrap_or(0), n_z.unwrap_or(0) as usize);

    // P(z | x1, x2, s)
    let z_law = |x1: usize, x2: usize, s: usize| -> Vec<f64> {
        let slice = plan.channel.output_slice(x1, x2, s);
        (0..c.z).map(|z| (0..c.y).map(|y| slice[y * c.z + z]).sum()).collect()
    };
    let p_s = plan.channel.state_dist();
    let state_radix = vec![c.s; total];
    let local_radix: Vec<usize> = (0..plan.blocks).flat_map(|_| [plan.sizes.l1, plan.sizes.l2]).collect();

    let per_message: Vec<Vec<f64>> = (0..n_msgs)
        .into_par_iter()
        .map(|mi| -> Result<Vec<f64>> {
            let msgs = messages_from(&digits(mi, &m_radices));
            let mut pz = vec![0.0; n_z];
            for si in 0..n_states {
                let s_all = digits(si, &state_radix);
                let ps: f64 = s_all.iter().map(|&s| p_s[s]).product();
                if ps == 0.0 {
                    continue;
                }
                let blocks: Vec<&[usize]> = {
                    let mut out = Vec::new();
                    let mut off = 0;
                    for b in 1..=plan.blocks + 1 {
                        let len = plan.block_len(b);
                        out.push(&s_all[off..off + len]);
                        off += len;
                    }
                    out
                };
                for li in 0..n_local {
                    let ld = digits(li, &local_radix);
                    // symbolwise law of z, concatenated over blocks
                    let mut laws: Vec<Vec<f64>> = Vec::with_capacity(total);
                    for b in 1..=plan.blocks + 1 {
                        let m = if (2..=plan.blocks).contains(&b) { msgs[b - 2] } else { BlockMessages::default() };
                        let local = if b <= plan.blocks { (ld[2 * (b - 1)], ld[2 * (b - 1) + 1]) } else { (0, 0) };
                        let prev = (b > 1).then(|| blocks[b - 2]);
                        let ch = select_codewords(plan, books, tests, b, m, prev, local)?;
                        let u = books.u_word(b, ch.m0);
                        let u1 = books.u1_word(b, ch.m0, ch.codewords.0);
                        let u2 = books.u2_word(b, ch.m0, ch.codewords.1);
                        for (i, &s) in blocks[b - 1].iter().enumerate() {
                            let mut q = vec![0.0; c.z];
                            for x1 in 0..c.x1 {
                                let p1 = plan.aux.p_x1(u[i], u1[i], s, x1);
                                if p1 == 0.0 {
                                    continue;
                                }
                                for x2 in 0..c.x2 {
                                    let p2 = plan.aux.p_x2(u[i], u2[i], s, x2);
                                    if p2 == 0.0 {
                                        continue;
                                    }
                                    for (qz, w) in q.iter_mut().zip(z_law(x1, x2, s)) {
                                        *qz += p1 * p2 * w;
                                    }
                                }
                            }
                            laws.push(q);
                        }
                    }
                    let weight = ps / n_local as f64;
                    let mut prod = vec![weight];
                    for q in &laws {
                        prod = prod.iter().flat_map(|&p| q.iter().map(move |&w| p * w)).collect();
                    }
                    pz.iter_mut().zip(&prod).for_each(|(acc, p)| *acc += p);
                }
            }
            Ok(pz)
        })
        .collect::<Result<_>>()?;

    if per_message.iter().all(|pz| pz == &per_message[0]) {
        return Ok(0.0);
    }
    let mut marginal = vec![0.0; n_z];
    for pz in &per_message {
        marginal.iter_mut().zip(pz).for_each(|(m, p)| *m += p / n_msgs as f64);
    }
    let h_cond: f64 = per_message.iter().map(|pz| entropy_of(pz)).sum::<f64>() / n_msgs as f64;
    Ok((entropy_of(&marginal) - h_cond).max(0.0))
}

/// Miller-Madow corrected entropy of a count table.
fn miller_madow<K>(counts: &HashMap<K, u64>, total: u64) -> f64 {
    let t = total as f64;
    let h: f64 = counts.values().map(|&c| c as f64 / t).map(|p| -p * p.log2()).sum();
    h + (counts.len() as f64 - 1.0) / (2.0 * t * std::f64::consts::LN_2)
}

fn plug_in_leakage(plan: &SimPlan, books: &Codebooks, tests: &SchemeTests, trials: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("plug-in leakage needs at least one trial"));
    }
    let samples: Vec<(u64, Vec<usize>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seeds = TrialSeeds::derive(plan.seed ^ 0x5EED_1EA4, t);
            let msgs = draw_messages(plan, &mut ChaCha8Rng::seed_from_u64(seeds.messages));
            let states = draw_states(plan, &mut ChaCha8Rng::seed_from_u64(seeds.state));
            let tr = transmit(
                plan,
                books,
                tests,
                &msgs,
                &states,
                &mut ChaCha8Rng::seed_from_u64(seeds.encoder),
                &mut ChaCha8Rng::seed_from_u64(seeds.channel),
            )?;
            let z: Vec<usize> = tr.into_iter().flat_map(|b| b.z).collect();
            Ok((message_index(&msgs, plan), z))
        })
        .collect::<Result<_>>()?;
    let (mut cm, mut cz, mut cmz) = (HashMap::new(), HashMap::new(), HashMap::new());
    for (m, z) in &samples {
        *cm.entry(*m).or_insert(0u64) += 1;
        *cz.entry(z.clone()).or_insert(0u64) += 1;
        *cmz.entry((*m, z.clone())).or_insert(0u64) += 1;
    }
    Ok(miller_madow(&cm, trials) + miller_madow(&cz, trials) - miller_madow(&cmz, trials))
}

/// `I(M; M + K mod q)` for uniform `M` and key law `key`. The ciphertext
/// is uniform whatever the key law, so this is `log q - H(K)`.
pub fn one_time_pad_leakage(key: &[f64]) -> Result<f64> {
    let total: f64 = key.iter().sum();
    if key.is_empty() || key.iter().any(|&k| !(k >= 0.0)) || (total - 1.0).abs() > NORM_TOL {
        return Err(Error::invalid("key law must be a probability vector"));
    }
    if key.iter().all(|&k| k == key[0]) {
        return Ok(0.0);
    }
    let q = key.len() as f64;
    Ok(key.iter().filter(|&&k| k > 0.0).map(|&k| k * (q * k / total).log2()).sum::<f64>().max(0.0))
}
