use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::polygon::{RatePoint, RatePolygon};
use super::search::{candidates, SearchConfig};
use super::system::RegionId;
use crate::error::{Error, Result};
use crate::prob::{
    assemble_joint, binary_convolution, binary_entropy, entropy_of, AuxChain, AuxSizes, ChannelModel, ChannelSizes,
    LabeledJointPmf,
};

/// Enumeration budget of [`shannon_strategy_bound`].
pub const SHANNON_BUDGET: usize = 50_000_000;

/// Number of points of the simplex lattice with `k` entries and resolution `r`.
fn lattice_size(k: usize, r: usize) -> Option<usize> {
    // C(r + k - 1, k - 1), built incrementally so every step is exact
    (1..k).try_fold(1usize, |acc, i| acc.checked_mul(r + i).map(|v| v / i))
}

fn mixed_radix(radix: usize, len: usize) -> Option<usize> {
    (0..len).try_fold(1usize, |acc, _| acc.checked_mul(radix))
}

/// Best `I(U1; Y | U2)` reachable with deterministic Shannon strategies
/// `x1(u1, s)`, `x2(u2, s)` and independent `U1`, `U2`.
///
/// `I(U1; Y | U2)` is linear in `P_U2`, so the maximum over `P_U2` sits at a
/// point mass and sender 2 reduces to a single map `s -> x2`. `P_U1` is
/// scanned over the simplex lattice with resolution `round(1 / step)`.
pub fn shannon_strategy_bound(channel: &ChannelModel, u1_size: usize, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Domain(format!("grid step {step} is not in (0, 1]")));
    }
    if u1_size == 0 {
        return Err(Error::invalid("U1 needs at least one symbol"));
    }
    let c = channel.sizes();
    let r = (1.0 / step).round() as usize;
    let lattice_len = lattice_size(u1_size, r);
    let x1_maps = mixed_radix(c.x1, u1_size * c.s);
    let x2_maps = mixed_radix(c.x2, c.s);
    let total = x1_maps
        .zip(x2_maps)
        .and_then(|(a, b)| a.checked_mul(b))
        .and_then(|t| lattice_len.and_then(|l| t.checked_mul(l)));
    let (x1_maps, x2_maps) = match (total, x1_maps, x2_maps) {
        (Some(t), Some(a), Some(b)) if t <= SHANNON_BUDGET => (a, b),
        _ => return Err(Error::Resource(format!("Shannon-strategy enumeration exceeds {SHANNON_BUDGET} evaluations"))),
    };
    let lattice = super::search::simplex_lattice(u1_size, r);
    let digit = |mut code: usize, radix: usize, i: usize| {
        for _ in 0..i {
            code /= radix;
        }
        code % radix
    };
    let best = (0..x1_maps * x2_maps)
        .into_par_iter()
        .map(|k| {
            let (m1, m2) = (k / x2_maps, k % x2_maps);
            // rows[u1][y] = P(y | u1) under the two maps
            let mut rows = vec![vec![0.0; c.y]; u1_size];
            for (u1, row) in rows.iter_mut().enumerate() {
                for s in 0..c.s {
                    let x1 = digit(m1, c.x1, u1 * c.s + s);
                    let x2 = digit(m2, c.x2, s);
                    let ps = channel.p_s(s);
                    let out = channel.output_slice(x1, x2, s);
                    for (y, acc) in row.iter_mut().enumerate() {
                        *acc += ps * out[y * c.z..(y + 1) * c.z].iter().sum::<f64>();
                    }
                }
            }
            let row_h: Vec<f64> = rows.iter().map(|r| entropy_of(r)).collect();
            let mut best = 0.0f64;
            let mut mix = vec![0.0; c.y];
            for w in &lattice {
                mix.iter_mut().for_each(|v| *v = 0.0);
                let mut cond = 0.0;
                for (u1, &pu) in w.iter().enumerate() {
                    if pu == 0.0 {
                        continue;
                    }
                    cond += pu * row_h[u1];
                    for (m, r) in mix.iter_mut().zip(&rows[u1]) {
                        *m += pu * r;
                    }
                }
                best = best.max(entropy_of(&mix) - cond);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.max(0.0))
}

/// The four `alpha`-indexed bounds of the Example 2 capacity region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example2Bounds {
    pub alpha: f64,
    /// `h(alpha) + h(q) - h(p * alpha) + h(p)`
    pub r1_secret: f64,
    /// `h(alpha)`
    pub r1_plain: f64,
    /// `1 + h(q) - h(alpha * p) + h(p)`
    pub sum_secret: f64,
    /// `1`
    pub sum_plain: f64,
}

impl Example2Bounds {
    pub fn r1(&self) -> f64 {
        self.r1_secret.min(self.r1_plain)
    }
    pub fn sum(&self) -> f64 {
        self.sum_secret.min(self.sum_plain)
    }
}

fn check_half(name: &str, v: f64) -> Result<()> {
    if (0.0..=0.5).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} is not in [0, 1/2]")))
    }
}

pub fn example2_constraints(q: f64, p: f64, alpha: f64) -> Result<Example2Bounds> {
    check_half("q", q)?;
    check_half("p", p)?;
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} is not in [1/2, 1]")));
    }
    let (ha, hq, hp) = (binary_entropy(alpha)?, binary_entropy(q)?, binary_entropy(p)?);
    let hap = binary_entropy(binary_convolution(alpha, p)?)?;
    Ok(Example2Bounds {
        alpha,
        r1_secret: ha + hq - hap + hp,
        r1_plain: ha,
        sum_secret: 1.0 + hq - hap + hp,
        sum_plain: 1.0,
    })
}

/// Union over `alpha_grid` of `{R1 <= a(alpha), R1 + R2 <= c(alpha)}`, hulled,
/// on axes `(R1, R2)`.
pub fn example2_capacity(q: f64, p: f64, alpha_grid: &[f64]) -> Result<RatePolygon> {
    check_half("q", q)?;
    check_half("p", p)?;
    if alpha_grid.is_empty() {
        return Err(Error::invalid("empty alpha grid"));
    }
    let mut pts: Vec<RatePoint> = Vec::new();
    for &a in alpha_grid {
        let b = example2_constraints(q, p, a)?;
        pts.extend(box_with_sum(b.r1(), b.sum()));
    }
    Ok(RatePolygon::hull_of(["R1", "R2"], &pts))
}

/// Vertices of `{x, y >= 0, x <= a, x + y <= c}`.
fn box_with_sum(a: f64, c: f64) -> Vec<RatePoint> {
    if a < 0.0 || c < 0.0 {
        return Vec::new();
    }
    let a = a.min(c);
    vec![[0.0, 0.0], [a, 0.0], [a, c - a], [0.0, c]]
}

/// `alpha` grid `{1/2, 1/2 + step, ..., 1}`.
pub fn alpha_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::Domain(format!("alpha step {step} is not in (0, 1/2]")));
    }
    let n = (0.5 / step).round() as usize;
    Ok((0..=n).map(|i| (0.5 + i as f64 * 0.5 / n as f64).min(1.0)).collect())
}

/// How the degradedness precondition of the capacity formula is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradednessMode {
    /// Check physical degradedness and fail if it does not hold.
    #[default]
    Verify,
    /// Check and record a warning, but proceed.
    Warn,
    /// Trust the caller.
    Assert,
}

/// True when `Z` is independent of `(X1, X2, S)` given `Y`, i.e. the kernel
/// factors as `P(y | x1, x2, s) P(z | y)`.
pub fn is_physically_degraded(channel: &ChannelModel, tol: f64) -> bool {
    let c = channel.sizes();
    let mut z_given_y: Vec<Option<Vec<f64>>> = vec![None; c.y];
    for x1 in 0..c.x1 {
        for x2 in 0..c.x2 {
            for s in 0..c.s {
                let out = channel.output_slice(x1, x2, s);
                for y in 0..c.y {
                    let row = &out[y * c.z..(y + 1) * c.z];
                    let py: f64 = row.iter().sum();
                    if py <= tol {
                        continue;
                    }
                    let cond: Vec<f64> = row.iter().map(|v| v / py).collect();
                    match &z_given_y[y] {
                        None => z_given_y[y] = Some(cond),
                        Some(prev) => {
                            if prev.iter().zip(&cond).any(|(a, b)| (a - b).abs() > tol) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// Information terms of the degraded-message-set capacity formula for one
/// input law `P_U P_{X1|U,S} P_{X2|U}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityTerms {
    /// `I(X1; Y | U, X2, S)`
    pub x1_y: f64,
    /// `I(X1; Z | U, X2, S)`
    pub x1_z: f64,
    /// `H(S | Z, U, X2)`
    pub h_s_z: f64,
    /// `I(X1, X2; Y | S)`
    pub x1x2_y: f64,
}

impl CapacityTerms {
    pub fn r1(&self) -> f64 {
        (self.x1_y - self.x1_z + self.h_s_z).min(self.x1_y)
    }
    pub fn sum(&self) -> f64 {
        (self.x1x2_y - self.x1_z + self.h_s_z).min(self.x1x2_y)
    }

    /// Region `{R1 <= r1, R0 + R1 <= sum}` on axes `(R0, R1)`.
    pub fn polygon(&self) -> RatePolygon {
        let pts: Vec<RatePoint> = box_with_sum(self.r1(), self.sum()).into_iter().map(|[a, b]| [b, a]).collect();
        RatePolygon::hull_of(["R0", "R1"], &pts)
    }
}

fn is_capacity_family(aux: &AuxChain) -> bool {
    let s = aux.sizes();
    if s.v != 1 || s.u1 != 1 || s.u2 != 1 {
        return false;
    }
    let x2 = aux.x2_given_uu2s();
    let ss = x2.given()[2].size;
    (0..x2.given_len()).all(|g| {
        let base = g - g % ss;
        x2.slice(g).iter().zip(x2.slice(base)).all(|(a, b)| (a - b).abs() <= 1e-12)
    })
}

/// Evaluates the capacity terms for an auxiliary chain of the form
/// `P_U P_{X1|U,S} P_{X2|U}` (trivial `V`, `U1`, `U2`, and `X2` not
/// depending on `S`).
pub fn capacity_terms(channel: &ChannelModel, aux: &AuxChain) -> Result<CapacityTerms> {
    if !is_capacity_family(aux) {
        return Err(Error::invalid("capacity input law needs trivial V, U1, U2 and X2 independent of S"));
    }
    terms_from_joint(&assemble_joint(channel, aux)?)
}

fn terms_from_joint(j: &LabeledJointPmf) -> Result<CapacityTerms> {
    Ok(CapacityTerms {
        x1_y: j.mutual_information(&["X1"], &["Y"], &["U", "X2", "S"])?,
        x1_z: j.mutual_information(&["X1"], &["Z"], &["U", "X2", "S"])?,
        h_s_z: j.entropy(&["S"], &["Z", "U", "X2"])?,
        x1x2_y: j.mutual_information(&["X1", "X2"], &["Y"], &["S"])?,
    })
}

/// Capacity region of the degraded channel with degraded message sets, on
/// axes `(R0, R1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRegion {
    pub polygon: RatePolygon,
    pub degraded: bool,
    pub warnings: Vec<String>,
    pub candidates: usize,
}

/// Union over input laws `P_U P_{X1|U,S} P_{X2|U}` of the two-constraint
/// capacity system, hulled.
///
/// Fixed candidates in `search` must already have that form. Random
/// candidates use `|U|` from `search.aux_sizes` (default 2).
pub fn theorem3_capacity(
    channel: &ChannelModel,
    search: &SearchConfig,
    mode: DegradednessMode,
) -> Result<CapacityRegion> {
    let degraded = is_physically_degraded(channel, 1e-12);
    let mut warnings = Vec::new();
    if !degraded {
        let msg = "eavesdropper output is not a physically degraded version of the main output".to_string();
        match mode {
            DegradednessMode::Verify => return Err(Error::Precondition(msg)),
            DegradednessMode::Warn => warnings.push(msg),
            DegradednessMode::Assert => {}
        }
    }
    let c = channel.sizes();
    let u = search.aux_sizes.map_or(2, |s| s.u);
    let sizes = AuxSizes { v: 1, u, u1: 1, u2: 1 };
    let search = SearchConfig { aux_sizes: Some(sizes), ..search.clone() };
    let cands = candidates(c, RegionId::D3, &search)?;
    let polys: Vec<RatePolygon> = cands
        .par_iter()
        .map(|(_, make)| {
            let aux = restrict_x2(c, make()?)?;
            Ok(capacity_terms(channel, &aux)?.polygon())
        })
        .collect::<Result<_>>()?;
    Ok(CapacityRegion {
        polygon: RatePolygon::union_hull(["R0", "R1"], &polys),
        degraded,
        warnings,
        candidates: cands.len(),
    })
}

/// Replaces `P_{X2|U,S}` by its `s = 0` slice so that `X2` ignores the state.
fn restrict_x2(c: ChannelSizes, aux: AuxChain) -> Result<AuxChain> {
    if is_capacity_family(&aux) {
        return Ok(aux);
    }
    let s = aux.sizes();
    let x2 = aux.x2_given_uu2s();
    let mut w = Vec::with_capacity(x2.weights().len());
    for g in 0..x2.given_len() {
        w.extend_from_slice(x2.slice(g - g % c.s));
    }
    let cond = |p: &crate::prob::ConditionalPmf| p.weights().to_vec();
    AuxChain::new(
        c,
        s,
        cond(aux.v_given_s()),
        cond(aux.p_u()),
        cond(aux.u1_given_u()),
        cond(aux.u2_given_u()),
        cond(aux.x1_given_uu1s()),
        w,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::prob::h2 as h;

    #[test]
    fn shannon_bound_cases() {
        let sizes = ChannelSizes { x1: 2, x2: 2, s: 2, y: 2, z: 1 };
        let ignores_x1 = ChannelModel::deterministic(sizes, vec![0.5, 0.5], |_, x2, s| (x2 ^ s, 0)).unwrap();
        assert!(shannon_strategy_bound(&ignores_x1, 2, 0.01).unwrap() < 1e-12);
        let clean = ChannelModel::deterministic(sizes, vec![0.5, 0.5], |x1, _, _| (x1, 0)).unwrap();
        assert!((shannon_strategy_bound(&clean, 2, 0.01).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(shannon_strategy_bound(&clean, 2, 1e-9), Err(Error::Resource(_))));
    }

    #[test]
    fn example2_formula_cases() {
        let g = alpha_grid(0.01).unwrap();
        let zero = example2_capacity(0.0, 0.0, &g).unwrap();
        assert!(zero.vertices.iter().all(|v| v[0].abs() < 1e-12));
        assert!(zero.contains([0.0, 1.0], 1e-12));
        let b = example2_constraints(0.25, 0.1, 1.0).unwrap();
        assert_eq!(b.r1(), 0.0);
        let b = example2_constraints(0.25, 0.1, 0.5).unwrap();
        let want = (h(0.25) + h(0.1)).min(1.0);
        assert!((b.r1() - want).abs() < 1e-15);
        assert!(example2_constraints(0.6, 0.1, 0.5).is_err());
    }

    #[test]
    fn physical_degradedness() {
        assert!(is_physically_degraded(&catalog::example2_channel(0.25, 0.1).unwrap(), 1e-12));
        assert!(!is_physically_degraded(&catalog::example1_channel(0.3).unwrap(), 1e-12));
        let r = theorem3_capacity(
            &catalog::example1_channel(0.3).unwrap(),
            &SearchConfig { random_samples: 4, ..Default::default() },
            DegradednessMode::Verify,
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_eavesdropper_leaves_main_term() {
        let sizes = ChannelSizes { x1: 2, x2: 2, s: 2, y: 2, z: 1 };
        let ch = ChannelModel::from_fn(sizes, vec![0.3, 0.7], |x1, x2, s, y, _| {
            let clean = x1 ^ (x2 & s);
            if y == clean {
                0.9
            } else {
                0.1
            }
        })
        .unwrap();
        for i in 0..10 {
            let aux = super::super::search::random_aux(sizes, AuxSizes { v: 1, u: 2, u1: 1, u2: 1 }, 1, i).unwrap();
            let aux = restrict_x2(sizes, aux).unwrap();
            let t = capacity_terms(&ch, &aux).unwrap();
            assert!(t.x1_z.abs() < 1e-12);
            assert!((t.r1() - t.x1_y).abs() < 1e-12);
        }
    }

    #[test]
    fn example2_matches_capacity_terms() {
        let (q, p) = (0.25, 0.1);
        let ch = catalog::example2_channel(q, p).unwrap();
        for &a in &alpha_grid(0.05).unwrap() {
            let aux = catalog::example2_capacity_aux(&ch, a).unwrap();
            let t = capacity_terms(&ch, &aux).unwrap();
            let b = example2_constraints(q, p, a).unwrap();
            assert!((t.r1() - b.r1()).abs() < 1e-9, "alpha {a}");
            assert!((t.sum() - b.sum()).abs() < 1e-9, "alpha {a}");
        }
        let grid = alpha_grid(0.01).unwrap();
        let fixed = grid.iter().map(|&a| catalog::example2_capacity_aux(&ch, a).unwrap().to_spec()).collect();
        let search = SearchConfig::fixed_only(fixed);
        let cap = theorem3_capacity(&ch, &search, DegradednessMode::Verify).unwrap();
        let formula = example2_capacity(q, p, &grid).unwrap();
        assert!(cap.polygon.swap_axes().hausdorff(&formula) < 1e-6);
    }
}
