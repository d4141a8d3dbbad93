use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::prob::{assemble_joint, AuxChain, AuxSpec, ChannelModel, ChannelSpec, LabeledJointPmf};
use crate::region::{mi_bundle, MiBundle};

/// Default cap on stored plus regenerated codeword symbols per trial.
pub const DEFAULT_SYMBOL_BUDGET: usize = 1 << 24;

/// Message-layer rates chosen by the user; the key and auxiliary rates are
/// derived from the channel and auxiliary chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageRates {
    pub r1_tilde: f64,
    pub r10: f64,
    pub r11: f64,
    pub r2_tilde: f64,
    pub r20: f64,
    pub r21: f64,
}

impl MessageRates {
    pub fn zero() -> Self {
        MessageRates { r1_tilde: 0.0, r10: 0.0, r11: 0.0, r2_tilde: 0.0, r20: 0.0, r21: 0.0 }
    }

    /// Rates a fraction `margin` below the bounds read off `b`.
    ///
    /// Codebook rates sit below the decoding bounds, public parts below the
    /// resolvability slack, and the key-protected parts below the secret-key
    /// budget, which goes to sender 1 first. The key budget is also capped
    /// by the sub-codebook rate `I(V;Y) - tau`.
    pub fn below_bounds(b: &MiBundle, margin: f64, tau: f64) -> Self {
        let keep = 1.0 - margin;
        let pos = |x: f64| x.max(0.0);
        let mut r1 = keep * pos(b.u1_y_vuu2);
        let mut r2 = keep * pos(b.u2_y_vuu1);
        let sum_cap = keep * pos(b.u1u2_y_vu);
        if r1 + r2 > sum_cap && r1 + r2 > 0.0 {
            let scale = sum_cap / (r1 + r2);
            r1 *= scale;
            r2 *= scale;
        }
        let mut r10 = keep * pos(r1 - b.u1_z_su);
        let mut r20 = keep * pos(r2 - b.u2_z_su);
        let joint_slack = r1 + r2 - b.u1u2_z_su;
        if r10 + r20 > keep * pos(joint_slack) && r10 + r20 > 0.0 {
            let scale = keep * pos(joint_slack) / (r10 + r20);
            r10 *= scale;
            r20 *= scale;
        }
        let key = keep * pos((b.v_y - b.v_z).min(b.v_y - tau));
        let r11 = key.min(r1 - r10).max(0.0);
        let r21 = (key - r11).min(r2 - r20).max(0.0);
        MessageRates { r1_tilde: r1, r10, r11, r2_tilde: r2, r20, r21 }
    }
}

/// Which leakage estimator to run alongside the error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakageMode {
    Exact,
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageConfig {
    pub mode: LeakageMode,
    /// Plug-in sample count.
    #[serde(default = "default_leakage_trials")]
    pub trials: u64,
    /// Cap on enumerated realisations in exact mode.
    #[serde(default = "default_exact_budget")]
    pub budget: u64,
}

fn default_leakage_trials() -> u64 {
    100_000
}

fn default_exact_budget() -> u64 {
    1 << 30
}

fn default_budget() -> usize {
    DEFAULT_SYMBOL_BUDGET
}

/// JSON input of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub channel: ChannelSpec,
    pub aux: AuxSpec,
    /// Channel uses per block.
    pub n: usize,
    /// Number of message blocks; `blocks + 1` blocks are sent.
    pub blocks: usize,
    pub rates: MessageRates,
    pub tau: f64,
    pub delta: f64,
    /// Lower bound on `I(U1,U2;Y)`; the exact value when absent.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub symbol_budget: usize,
    #[serde(default)]
    pub leakage: Option<LeakageConfig>,
}

/// Every rate of the scheme, user-chosen and derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateVector {
    pub r1_tilde: f64,
    pub r2_tilde: f64,
    pub r10: f64,
    pub r11: f64,
    pub r20: f64,
    pub r21: f64,
    pub r1_prime: f64,
    pub r2_prime: f64,
    pub r0: f64,
    pub r_k: f64,
    pub r_k0: f64,
    pub r_k1: f64,
}

/// Codebook and index-set cardinalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BookSizes {
    /// `ceil(2^{n R_K})` before truncation.
    pub key_raw: usize,
    /// Key codewords kept, a multiple of `k0`.
    pub key: usize,
    pub k0: usize,
    /// Codewords per sub-codebook.
    pub sub: usize,
    /// `m11 * m21`
    pub k1: usize,
    pub m0: usize,
    pub m10: usize,
    pub m11: usize,
    pub m20: usize,
    pub m21: usize,
    pub l1: usize,
    pub l2: usize,
}

impl BookSizes {
    pub fn u1_book(&self) -> usize {
        self.m10 * self.m11 * self.l1
    }
    pub fn u2_book(&self) -> usize {
        self.m20 * self.m21 * self.l2
    }
}

/// Validated configuration with every derived quantity resolved.
#[derive(Debug, Clone)]
pub struct SimPlan {
    pub n: usize,
    pub blocks: usize,
    pub n_last: usize,
    pub mu: f64,
    pub tau: f64,
    pub delta: f64,
    pub seed: u64,
    pub rates: RateVector,
    pub sizes: BookSizes,
    pub bundle: MiBundle,
    pub channel: ChannelModel,
    pub aux: AuxChain,
    pub joint: LabeledJointPmf,
    pub symbol_budget: usize,
}

/// `ceil(2^{n rate})`, at least 1.
pub fn book_size(n: usize, rate: f64) -> Result<usize> {
    let bits = n as f64 * rate;
    if !bits.is_finite() {
        return Err(Error::invalid(format!("rate {rate} is not finite")));
    }
    if bits > 40.0 {
        return Err(Error::Resource(format!("codebook of 2^{bits:.2} entries")));
    }
    // absorb floating noise on exact powers of two
    Ok((bits.exp2() - 1e-9).ceil().max(1.0) as usize)
}

impl SimConfig {
    /// Binary regression instance with `B = 2`.
    ///
    /// `S ~ Bern(0.1)`, a sparse description `V = S and Bern(0.05)`, uniform
    /// independent inputs, message rates 25% below the bundle bounds with no
    /// key-protected part, and a last block stretched by `mu = 0.03 I(U1,U2;Y)`.
    pub fn regression(n: usize, seed: u64) -> Result<Self> {
        let channel = catalog::regression_channel(0.1, 0.3)?;
        let aux = catalog::regression_aux(&channel, 0.05, 0.5)?;
        let bundle = mi_bundle(&assemble_joint(&channel, &aux)?)?;
        let tau = 0.004;
        let mut rates = MessageRates::below_bounds(&bundle, 0.25, tau);
        rates.r11 = 0.0;
        rates.r21 = 0.0;
        Ok(SimConfig {
            channel: channel.to_spec(),
            aux: aux.to_spec(),
            n,
            blocks: 2,
            rates,
            tau,
            delta: 1.0,
            mu: Some(0.03 * bundle.u1u2_y),
            seed,
            symbol_budget: DEFAULT_SYMBOL_BUDGET,
            leakage: None,
        })
    }

    pub fn plan(&self) -> Result<SimPlan> {
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be positive, got {x}")))
            }
        };
        positive(self.tau, "tau")?;
        positive(self.delta, "delta")?;
        if self.n == 0 || self.blocks == 0 {
            return Err(Error::invalid("n and blocks must be at least 1"));
        }
        let r = self.rates;
        for (x, what) in [
            (r.r1_tilde, "r1_tilde"),
            (r.r10, "r10"),
            (r.r11, "r11"),
            (r.r2_tilde, "r2_tilde"),
            (r.r20, "r20"),
            (r.r21, "r21"),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::invalid(format!("{what} must be a non-negative rate, got {x}")));
            }
        }
        let r1_prime = r.r1_tilde - r.r10 - r.r11;
        let r2_prime = r.r2_tilde - r.r20 - r.r21;
        if r1_prime < -1e-12 || r2_prime < -1e-12 {
            return Err(Error::invalid("message sub-rates exceed the codebook rate"));
        }
        let (r1_prime, r2_prime) = (r1_prime.max(0.0), r2_prime.max(0.0));

        let channel = ChannelModel::try_from(&self.channel)?;
        let aux = self.aux.build(channel.sizes())?;
        let joint = assemble_joint(&channel, &aux)?;
        let bundle = mi_bundle(&joint)?;
        let mu = self.mu.unwrap_or(bundle.u1u2_y);
        if !(mu > 0.0) {
            return Err(Error::Precondition(format!("I(U1,U2;Y) lower bound {mu} must be positive")));
        }
        if bundle.v_y <= self.tau {
            return Err(Error::Precondition(format!("I(V;Y) = {:.6} must exceed tau = {}", bundle.v_y, self.tau)));
        }
        let r_k = bundle.v_s + self.tau;
        let r_k0 = bundle.v_s - bundle.v_y + 2.0 * self.tau;
        let r0 = bundle.v_s - bundle.v_y + 3.0 * self.tau;
        let rates = RateVector {
            r1_tilde: r.r1_tilde,
            r2_tilde: r.r2_tilde,
            r10: r.r10,
            r11: r.r11,
            r20: r.r20,
            r21: r.r21,
            r1_prime,
            r2_prime,
            r0,
            r_k,
            r_k0,
            r_k1: r.r11 + r.r21,
        };
        let n = self.n;
        let n_last = ((n as f64 * r0 / mu) - 1e-9).ceil().max(1.0) as usize;

        let key_raw = book_size(n, r_k)?;
        let k0 = book_size(n, r_k0)?;
        if k0 > key_raw {
            return Err(Error::Precondition(format!(
                "{key_raw} key codewords cannot fill {k0} sub-codebooks; I(V;Y) must exceed tau"
            )));
        }
        let (m11, m21) = (book_size(n, r.r11)?, book_size(n, r.r21)?);
        let sizes = BookSizes {
            key_raw,
            key: key_raw / k0 * k0,
            k0,
            sub: key_raw / k0,
            k1: m11 * m21,
            m0: book_size(n, r0)?,
            m10: book_size(n, r.r10)?,
            m11,
            m20: book_size(n, r.r20)?,
            m21,
            l1: book_size(n, r1_prime)?,
            l2: book_size(n, r2_prime)?,
        };
        if sizes.k1 > sizes.sub {
            return Err(Error::invalid(format!(
                "{} keys cannot be extracted from sub-codebooks of {} codewords",
                sizes.k1, sizes.sub
            )));
        }
        if sizes.k0 > sizes.m0 {
            return Err(Error::Internal("fewer auxiliary codewords than sub-codebooks".into()));
        }

        let blocks = self.blocks;
        let stored = blocks * sizes.key * n + blocks * sizes.m0 * n + sizes.m0 * n_last;
        let regenerated = sizes.k0 * (sizes.u1_book() + sizes.u2_book()) * n.max(n_last);
        let budget = self.symbol_budget;
        if stored > budget || regenerated > budget {
            return Err(Error::Resource(format!(
                "codebooks need {stored} stored and {regenerated} regenerated symbols per block, budget {budget}"
            )));
        }

        Ok(SimPlan {
            n,
            blocks,
            n_last,
            mu,
            tau: self.tau,
            delta: self.delta,
            seed: self.seed,
            rates,
            sizes,
            bundle,
            channel,
            aux,
            joint,
            symbol_budget: budget,
        })
    }
}

impl SimPlan {
    pub fn total_length(&self) -> usize {
        self.n * self.blocks + self.n_last
    }

    /// Length of block `b`, counted from 1.
    pub fn block_len(&self, b: usize) -> usize {
        if b <= self.blocks {
            self.n
        } else {
            self.n_last
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn regression_config(n: usize) -> SimConfig {
        SimConfig::regression(n, 1).unwrap()
    }

    #[test]
    fn book_sizes_round_up() {
        assert_eq!(book_size(12, 0.25).unwrap(), 8);
        assert_eq!(book_size(12, 0.0).unwrap(), 1);
        assert_eq!(book_size(3, 0.5).unwrap(), 3);
        assert!(matches!(book_size(100, 0.5), Err(Error::Resource(_))));
    }

    #[test]
    fn derived_rates_follow_the_bundle() {
        let mut cfg = regression_config(8);
        let p = cfg.plan().unwrap();
        let b = p.bundle;
        let tau = cfg.tau;
        assert!((p.rates.r_k - b.v_s - tau).abs() < 1e-12);
        assert!((p.rates.r_k0 - (b.v_s - b.v_y + 2.0 * tau)).abs() < 1e-12);
        assert!((p.rates.r0 - (b.v_s - b.v_y + 3.0 * tau)).abs() < 1e-12);
        assert_eq!(p.n_last, (8.0 * p.rates.r0 / cfg.mu.unwrap() - 1e-9).ceil() as usize);
        cfg.mu = None;
        let exact = cfg.plan().unwrap();
        assert_eq!(exact.n_last, (8.0 * exact.rates.r0 / b.u1u2_y - 1e-9).ceil() as usize);
        assert_eq!(p.sizes.key % p.sizes.k0, 0);
        assert_eq!(p.sizes.sub * p.sizes.k0, p.sizes.key);
    }

    #[test]
    fn sub_rates_must_fit() {
        let mut cfg = regression_config(8);
        cfg.rates = MessageRates { r1_tilde: 0.1, r10: 0.1, r11: 0.1, ..MessageRates::zero() };
        assert!(matches!(cfg.plan(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tau_must_stay_below_the_key_information() {
        let mut cfg = regression_config(12);
        cfg.tau = 0.005;
        assert!(matches!(cfg.plan(), Err(Error::Precondition(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let mut cfg = regression_config(8);
        cfg.symbol_budget = 10;
        assert!(matches!(cfg.plan(), Err(Error::Resource(_))));
    }

    #[test]
    fn below_bounds_is_consistent() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        for _ in 0..50 {
            let b = crate::region::testutil::random_bundle(&mut rng);
            let r = MessageRates::below_bounds(&b, 0.25, 0.05);
            assert!(r.r1_tilde - r.r10 - r.r11 >= -1e-12);
            assert!(r.r2_tilde - r.r20 - r.r21 >= -1e-12);
            assert!(r.r1_tilde <= 0.75 * b.u1_y_vuu2.max(0.0) + 1e-12);
            assert!(r.r11 + r.r21 <= 0.75 * (b.v_y - b.v_z).max(0.0) + 1e-12);
            assert!([r.r10, r.r11, r.r20, r.r21].iter().all(|&x| x >= 0.0));
        }
    }
}
