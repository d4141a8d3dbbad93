use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for normalisation checks on constructed distributions.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for derived identities (chain rule, clamping of mutual information).
pub const DERIVED_TOL: f64 = 1e-10;
/// Largest dense tensor we are willing to build.
pub const MAX_TENSOR_LEN: usize = 10_000_000;

/// A named finite alphabet `{0, .., size - 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub name: String,
    pub size: usize,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("alphabet size must be at least 1"));
        }
        Ok(Alphabet { name: name.into(), size })
    }
}

pub(crate) fn tensor_len(sizes: impl IntoIterator<Item = usize>) -> Result<usize> {
    let mut len = 1usize;
    for s in sizes {
        len = len
            .checked_mul(s)
            .filter(|&l| l <= MAX_TENSOR_LEN)
            .ok_or_else(|| Error::Resource(format!("tensor exceeds {MAX_TENSOR_LEN} entries")))?;
    }
    Ok(len)
}

/// Dense joint probability tensor over an ordered list of named variables.
///
/// Storage is row-major: the last variable varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledJointPmf {
    vars: Vec<Alphabet>,
    weights: Vec<f64>,
}

impl LabeledJointPmf {
    pub fn new(vars: Vec<Alphabet>, weights: Vec<f64>) -> Result<Self> {
        for (i, a) in vars.iter().enumerate() {
            if a.size == 0 {
                return Err(Error::invalid(format!("variable {} has empty alphabet", a.name)));
            }
            if vars[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid(format!("duplicate variable name {}", a.name)));
            }
        }
        let len = tensor_len(vars.iter().map(|a| a.size))?;
        if weights.len() != len {
            return Err(Error::invalid(format!("weight tensor has {} entries, shape requires {len}", weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(LabeledJointPmf { vars, weights })
    }

    /// Builds a joint by evaluating `f` at every multi-index.
    pub fn from_fn(vars: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let sizes: Vec<usize> = vars.iter().map(|a| a.size).collect();
        let len = tensor_len(sizes.iter().copied())?;
        let mut weights = Vec::with_capacity(len);
        let mut idx = vec![0usize; sizes.len()];
        for _ in 0..len {
            weights.push(f(&idx));
            increment(&mut idx, &sizes);
        }
        Self::new(vars, weights)
    }

    pub fn vars(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.vars.iter().map(|a| a.size).collect()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars.iter().position(|a| a.name == name).ok_or_else(|| Error::invalid(format!("unknown variable {name}")))
    }

    /// Bit mask (over variable positions) of a set of names.
    pub fn mask_of(&self, names: &[&str]) -> Result<u64> {
        if self.vars.len() > 64 {
            return Err(Error::Resource("more than 64 variables".into()));
        }
        let mut mask = 0u64;
        for n in names {
            let bit = 1u64 << self.var_index(n)?;
            if mask & bit != 0 {
                return Err(Error::invalid(format!("variable {n} listed twice")));
            }
            mask |= bit;
        }
        Ok(mask)
    }

    /// Probability of a full assignment (one value per variable, in order).
    pub fn prob(&self, values: &[usize]) -> f64 {
        let mut flat = 0;
        for (v, a) in values.iter().zip(&self.vars) {
            flat = flat * a.size + v;
        }
        self.weights[flat]
    }

    /// Marginal on the variables in `keep`; the result lists them in the
    /// order they appear in `self`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<LabeledJointPmf> {
        let mask = self.mask_of(keep)?;
        let (vars, weights) = self.marginal_by_mask(mask);
        Ok(LabeledJointPmf { vars, weights })
    }

    pub(crate) fn marginal_by_mask(&self, mask: u64) -> (Vec<Alphabet>, Vec<f64>) {
        let sizes = self.sizes();
        let kept: Vec<usize> = (0..sizes.len()).filter(|i| mask >> i & 1 == 1).collect();
        let vars: Vec<Alphabet> = kept.iter().map(|&i| self.vars[i].clone()).collect();
        let out_len: usize = kept.iter().map(|&i| sizes[i]).product();
        // Output stride of each input variable; zero when it is summed out.
        let mut out_stride = vec![0usize; sizes.len()];
        let mut acc = 1;
        for &i in kept.iter().rev() {
            out_stride[i] = acc;
            acc *= sizes[i];
        }
        let mut out = vec![0.0; out_len];
        let mut idx = vec![0usize; sizes.len()];
        let mut o = 0usize;
        for &w in &self.weights {
            out[o] += w;
            // odometer increment, tracking the output offset
            for d in (0..sizes.len()).rev() {
                idx[d] += 1;
                o += out_stride[d];
                if idx[d] < sizes[d] {
                    break;
                }
                o -= out_stride[d] * sizes[d];
                idx[d] = 0;
            }
        }
        (vars, out)
    }

    pub(crate) fn entropy_mask(&self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let (_, w) = self.marginal_by_mask(mask);
        entropy_of(&w)
    }

    /// `H(vars | given)` in bits.
    pub fn entropy(&self, vars: &[&str], given: &[&str]) -> Result<f64> {
        let a = self.mask_of(vars)?;
        let c = self.mask_of(given)?;
        if a & c != 0 {
            return Err(Error::invalid("entropy: vars and given overlap"));
        }
        clamp(self.entropy_mask(a | c) - self.entropy_mask(c), "conditional entropy")
    }

    /// `I(a; b | given)` in bits, clamped at zero.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        let ma = self.mask_of(a)?;
        let mb = self.mask_of(b)?;
        let mc = self.mask_of(given)?;
        if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
            return Err(Error::invalid("mutual information: variable sets overlap"));
        }
        self.mi_mask(ma, mb, mc)
    }

    pub(crate) fn mi_mask(&self, a: u64, b: u64, c: u64) -> Result<f64> {
        let v =
            self.entropy_mask(a | c) + self.entropy_mask(b | c) - self.entropy_mask(a | b | c) - self.entropy_mask(c);
        clamp(v, "mutual information")
    }
}

fn clamp(v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -DERIVED_TOL {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!("{what} evaluated to {v}")))
    }
}

/// Shannon entropy (bits) of a weight vector, with `0 log 0 = 0`.
pub fn entropy_of(weights: &[f64]) -> f64 {
    weights.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub(crate) fn increment(idx: &mut [usize], sizes: &[usize]) {
    for d in (0..sizes.len()).rev() {
        idx[d] += 1;
        if idx[d] < sizes[d] {
            return;
        }
        idx[d] = 0;
    }
}

/// A conditional distribution `P(targets | given)`.
///
/// Weights are laid out as `[given..., targets...]` row-major, so the slice
/// for a fixed flat conditioning index `g` is
/// `weights[g * target_len .. (g + 1) * target_len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPmf {
    targets: Vec<Alphabet>,
    given: Vec<Alphabet>,
    weights: Vec<f64>,
    target_len: usize,
}

impl ConditionalPmf {
    pub fn new(targets: Vec<Alphabet>, given: Vec<Alphabet>, weights: Vec<f64>) -> Result<Self> {
        let target_len = tensor_len(targets.iter().map(|a| a.size))?;
        let given_len = tensor_len(given.iter().map(|a| a.size))?;
        tensor_len([target_len, given_len])?;
        if weights.len() != target_len * given_len {
            return Err(Error::invalid(format!(
                "conditional weights have {} entries, shape requires {}",
                weights.len(),
                target_len * given_len
            )));
        }
        for (g, slice) in weights.chunks(target_len).enumerate() {
            if slice.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::invalid(format!("negative or non-finite weight in slice {g}")));
            }
            let s: f64 = slice.iter().sum();
            if (s - 1.0).abs() > NORM_TOL {
                return Err(Error::invalid(format!("conditional slice {g} sums to {s}")));
            }
        }
        Ok(ConditionalPmf { targets, given, weights, target_len })
    }

    /// An unconditional PMF stored as a conditional with no parents.
    pub fn marginal(target: Alphabet, weights: Vec<f64>) -> Result<Self> {
        Self::new(vec![target], Vec::new(), weights)
    }

    /// `P(target = f(given))`: a deterministic map.
    pub fn deterministic(target: Alphabet, given: Vec<Alphabet>, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let sizes: Vec<usize> = given.iter().map(|a| a.size).collect();
        let given_len = tensor_len(sizes.iter().copied())?;
        let mut weights = vec![0.0; given_len * target.size];
        let mut idx = vec![0usize; sizes.len()];
        for g in 0..given_len {
            let t = f(&idx);
            if t >= target.size {
                return Err(Error::invalid(format!("map value {t} outside alphabet {}", target.name)));
            }
            weights[g * target.size + t] = 1.0;
            increment(&mut idx, &sizes);
        }
        Self::new(vec![target], given, weights)
    }

    pub fn targets(&self) -> &[Alphabet] {
        &self.targets
    }

    pub fn given(&self) -> &[Alphabet] {
        &self.given
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn given_len(&self) -> usize {
        self.weights.len() / self.target_len
    }

    /// The distribution over targets for flat conditioning index `g`.
    pub fn slice(&self, g: usize) -> &[f64] {
        &self.weights[g * self.target_len..(g + 1) * self.target_len]
    }

    #[inline]
    pub fn get(&self, g: usize, t: usize) -> f64 {
        self.weights[g * self.target_len + t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(names: &[&str], w: Vec<f64>) -> LabeledJointPmf {
        let vars = names.iter().map(|n| Alphabet::new(*n, 2).unwrap()).collect();
        LabeledJointPmf::new(vars, w).unwrap()
    }

    #[test]
    fn marginal_of_product_measure() {
        let px = [0.3, 0.7];
        let py = [0.6, 0.4];
        let j = LabeledJointPmf::from_fn(vec![Alphabet::new("X", 2).unwrap(), Alphabet::new("Y", 2).unwrap()], |i| {
            px[i[0]] * py[i[1]]
        })
        .unwrap();
        let m = j.marginalize(&["X"]).unwrap();
        assert!((m.weights()[0] - 0.3).abs() < 1e-15);
        assert!((m.weights()[1] - 0.7).abs() < 1e-15);
        let m = j.marginalize(&["Y"]).unwrap();
        assert!((m.weights()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn marginal_over_all_is_identity() {
        let j = bits(&["A", "B"], vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(j.marginalize(&["A", "B"]).unwrap(), j);
        // order of `keep` does not matter
        assert_eq!(j.marginalize(&["B", "A"]).unwrap(), j);
    }

    #[test]
    fn uniform_square_marginal() {
        let j = bits(&["A", "B"], vec![0.25; 4]);
        assert_eq!(j.marginalize(&["B"]).unwrap().weights(), &[0.5, 0.5]);
    }

    #[test]
    fn unknown_variable_is_rejected() {
        let j = bits(&["A", "B"], vec![0.25; 4]);
        assert!(matches!(j.marginalize(&["C"]), Err(Error::InvalidArgument(_))));
        assert!(matches!(j.entropy(&["C"], &[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rejects_bad_tensors() {
        let a = || vec![Alphabet::new("A", 2).unwrap()];
        assert!(LabeledJointPmf::new(a(), vec![0.5]).is_err());
        assert!(LabeledJointPmf::new(a(), vec![0.6, 0.6]).is_err());
        assert!(LabeledJointPmf::new(a(), vec![1.5, -0.5]).is_err());
        assert!(Alphabet::new("A", 0).is_err());
        let dup = vec![Alphabet::new("A", 1).unwrap(), Alphabet::new("A", 1).unwrap()];
        assert!(LabeledJointPmf::new(dup, vec![1.0]).is_err());
    }

    #[test]
    fn entropy_trivial_values() {
        let j = bits(&["A"], vec![0.5, 0.5]);
        assert!((j.entropy(&["A"], &[]).unwrap() - 1.0).abs() < 1e-15);
        let j = bits(&["A"], vec![0.0, 1.0]);
        assert_eq!(j.entropy(&["A"], &[]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_of_bernoulli_matches_formula() {
        // Oracle: the closed form evaluated directly.
        let p: f64 = 0.11;
        let oracle = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let j = bits(&["A"], vec![p, 1.0 - p]);
        assert!((j.entropy(&["A"], &[]).unwrap() - oracle).abs() < 1e-14);
        assert!((oracle - 0.499_915_958_164_528_6).abs() < 1e-12);
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let j = bits(&["A", "B"], vec![0.25; 4]);
        assert!(j.entropy(&["A"], &["A"]).is_err());
        assert!(j.mutual_information(&["A"], &["A"], &[]).is_err());
        assert!(j.mutual_information(&["A"], &["B"], &["B"]).is_err());
    }

    #[test]
    fn mutual_information_trivial_values() {
        let j = bits(&["X", "Y"], vec![0.25; 4]);
        assert_eq!(j.mutual_information(&["X"], &["Y"], &[]).unwrap(), 0.0);
        let j = bits(&["X", "Y"], vec![0.5, 0.0, 0.0, 0.5]);
        assert!((j.mutual_information(&["X"], &["Y"], &[]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bsc_mutual_information() {
        let e: f64 = 0.11;
        let h = -e * e.log2() - (1.0 - e) * (1.0 - e).log2();
        let j = bits(&["X", "Y"], vec![0.5 * (1.0 - e), 0.5 * e, 0.5 * e, 0.5 * (1.0 - e)]);
        let mi = j.mutual_information(&["X"], &["Y"], &[]).unwrap();
        assert!((mi - (1.0 - h)).abs() < 1e-14);
    }

    #[test]
    fn conditional_slices_must_normalise() {
        let t = || vec![Alphabet::new("Y", 2).unwrap()];
        let g = || vec![Alphabet::new("X", 2).unwrap()];
        assert!(ConditionalPmf::new(t(), g(), vec![0.5, 0.5, 0.2, 0.8]).is_ok());
        assert!(ConditionalPmf::new(t(), g(), vec![0.5, 0.5, 0.2, 0.7]).is_err());
        let d = ConditionalPmf::deterministic(Alphabet::new("Y", 2).unwrap(), g(), |i| 1 - i[0]).unwrap();
        assert_eq!(d.weights(), &[0.0, 1.0, 1.0, 0.0]);
    }

    fn three_bits() -> impl Strategy<Value = LabeledJointPmf> {
        prop::collection::vec(0.0f64..1.0, 8).prop_filter_map("all-zero weights", |w| {
            let total: f64 = w.iter().sum();
            (total > 1e-3).then(|| bits(&["A", "B", "C"], w.iter().map(|x| x / total).collect()))
        })
    }

    proptest! {
        #[test]
        fn information_identities(j in three_bits()) {
            let mi = j.mutual_information(&["A"], &["B"], &["C"]).unwrap();
            prop_assert!(mi >= 0.0);
            prop_assert!((mi - j.mutual_information(&["B"], &["A"], &["C"]).unwrap()).abs() < 1e-12);
            let joint = j.entropy(&["A", "B"], &[]).unwrap();
            let chain = j.entropy(&["A"], &[]).unwrap() + j.entropy(&["B"], &["A"]).unwrap();
            prop_assert!((joint - chain).abs() < 1e-12);
            let split = j.mutual_information(&["A"], &["C"], &[]).unwrap() + mi;
            prop_assert!((j.mutual_information(&["A"], &["B", "C"], &[]).unwrap() - split).abs() < 1e-12);
            prop_assert!(j.entropy(&["A"], &["B", "C"]).unwrap() <= j.entropy(&["A"], &[]).unwrap() + 1e-12);
        }
    }
}
