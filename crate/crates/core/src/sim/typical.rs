use crate::error::{Error, Result};
use crate::prob::LabeledJointPmf;

/// Strong typicality test against a fixed reference law.
///
/// A tuple of sequences is typical when every joint symbol `a` has
/// empirical frequency within `delta * P(a)` of `P(a)`, and symbols with
/// `P(a) = 0` never occur.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    sizes: Vec<usize>,
    probs: Vec<f64>,
    delta: f64,
}

impl TypicalityTest {
    pub fn new(reference: &LabeledJointPmf, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::invalid(format!("typicality slack {delta} must be positive")));
        }
        Ok(TypicalityTest { sizes: reference.sizes(), probs: reference.weights().to_vec(), delta })
    }

    /// Reference law of the named variables, marginalised from `joint`.
    /// Sequences must then be passed in the joint's variable order.
    pub fn from_joint(joint: &LabeledJointPmf, vars: &[&str], delta: f64) -> Result<Self> {
        Self::new(&joint.marginalize(vars)?, delta)
    }

    pub fn arity(&self) -> usize {
        self.sizes.len()
    }

    /// Checks `seqs[k][i]`, the `i`-th symbol of the `k`-th variable.
    pub fn check(&self, seqs: &[&[usize]]) -> Result<bool> {
        if seqs.len() != self.sizes.len() {
            return Err(Error::invalid(format!("expected {} sequences, got {}", self.sizes.len(), seqs.len())));
        }
        let n = seqs.first().map_or(0, |s| s.len());
        if seqs.iter().any(|s| s.len() != n) {
            return Err(Error::invalid("sequences have different lengths"));
        }
        for (s, &k) in seqs.iter().zip(&self.sizes) {
            if s.iter().any(|&v| v >= k) {
                return Err(Error::invalid("sequence symbol outside its alphabet"));
            }
        }
        Ok(self.check_unchecked(seqs, n))
    }

    pub(crate) fn check_unchecked(&self, seqs: &[&[usize]], n: usize) -> bool {
        if n == 0 {
            return true;
        }
        let mut counts = vec![0u32; self.probs.len()];
        for i in 0..n {
            let mut idx = 0;
            for (s, &k) in seqs.iter().zip(&self.sizes) {
                idx = idx * k + s[i];
            }
            if self.probs[idx] == 0.0 {
                return false;
            }
            counts[idx] += 1;
        }
        let nf = n as f64;
        counts.iter().zip(&self.probs).all(|(&c, &p)| (c as f64 / nf - p).abs() <= self.delta * p + 1e-12)
    }
}

/// One-shot form of [`TypicalityTest::check`].
pub fn typical_set_test(seqs: &[&[usize]], reference: &LabeledJointPmf, delta: f64) -> Result<bool> {
    TypicalityTest::new(reference, delta)?.check(seqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bit(p: f64) -> LabeledJointPmf {
        LabeledJointPmf::new(vec![Alphabet::new("X", 2).unwrap()], vec![1.0 - p, p]).unwrap()
    }

    #[test]
    fn point_mass_accepts_constant() {
        let r = bit(0.0);
        for d in [1e-6, 0.1, 5.0] {
            assert!(typical_set_test(&[&[0; 30]], &r, d).unwrap());
        }
        assert!(!typical_set_test(&[&[0, 1, 0]], &r, 5.0).unwrap());
    }

    #[test]
    fn constant_is_not_typical_for_fair_bit() {
        assert!(!typical_set_test(&[&[1; 20]], &bit(0.5), 0.1).unwrap());
    }

    #[test]
    fn iid_samples_are_typical() {
        // Monte Carlo estimate of Pr{typical} for n = 2000 i.i.d. draws.
        let (p, n, draws) = (0.3, 2000, 10_000);
        let test = TypicalityTest::new(&bit(p), 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seq = vec![0usize; n];
        let mut hits = 0;
        for _ in 0..draws {
            seq.iter_mut().for_each(|x| *x = usize::from(rng.random::<f64>() < p));
            hits += usize::from(test.check(&[&seq]).unwrap());
        }
        assert!(hits as f64 / draws as f64 >= 0.99, "{hits}");
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let j =
            LabeledJointPmf::new(vec![Alphabet::new("A", 2).unwrap(), Alphabet::new("B", 2).unwrap()], vec![0.25; 4])
                .unwrap();
        assert!(typical_set_test(&[&[0, 1], &[0]], &j, 0.1).is_err());
        assert!(typical_set_test(&[&[0, 1]], &j, 0.1).is_err());
    }
}
