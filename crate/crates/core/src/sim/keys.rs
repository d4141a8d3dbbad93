use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Distance of a key map from uniform, with the input uniform on its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyMappingReport {
    pub domain: usize,
    pub keys: usize,
    /// `sum_k |Pr{kappa(T) = k} - 1/keys|`
    pub deviation: f64,
}

/// Uniformly random function `kappa: [0, domain) -> [0, keys)`.
pub fn build_key_mapping(domain: usize, keys: usize, seed: u64) -> Result<(Vec<usize>, KeyMappingReport)> {
    if keys == 0 || domain == 0 {
        return Err(Error::invalid("key mapping needs a non-empty domain and key set"));
    }
    if keys > domain {
        return Err(Error::invalid(format!("{keys} keys cannot be extracted from {domain} indices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map: Vec<usize> = (0..domain).map(|_| rng.random_range(0..keys)).collect();
    let report = mapping_report(&map, keys);
    Ok((map, report))
}

pub fn mapping_report(map: &[usize], keys: usize) -> KeyMappingReport {
    let counts = bin_counts(map, keys);
    let n = map.len() as f64;
    let deviation = counts.iter().map(|&c| (c as f64 / n - 1.0 / keys as f64).abs()).sum();
    KeyMappingReport { domain: map.len(), keys, deviation }
}

fn bin_counts(map: &[usize], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    map.iter().for_each(|&b| counts[b] += 1);
    counts
}

/// Outcome of [`equalize_partition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionReport {
    pub moved: usize,
    /// Deviation of the input partition from uniform.
    pub deviation: f64,
    /// `deviation / 3`
    pub epsilon: f64,
    /// `H(K0 | g(V))` with `V` uniform on the codebook.
    pub conditional_entropy: f64,
    /// `4 sqrt(epsilon) log2(bins)`
    pub bound: f64,
}

/// Moves the fewest elements needed to make all `bins` cells equal.
///
/// Overfull bins give up their highest-indexed members to underfull bins in
/// ascending order, so the result is deterministic.
pub fn equalize_partition(g: &[usize], bins: usize) -> Result<(Vec<usize>, PartitionReport)> {
    if bins == 0 || !g.len().is_multiple_of(bins) {
        return Err(Error::Precondition(format!(
            "codebook of size {} is not divisible into {bins} equal bins",
            g.len()
        )));
    }
    if let Some(&b) = g.iter().find(|&&b| b >= bins) {
        return Err(Error::invalid(format!("bin label {b} out of range")));
    }
    let target = g.len() / bins;
    let mut counts = bin_counts(g, bins);
    let mut out = g.to_vec();
    let mut receivers = (0..bins).filter(|&b| counts[b] < target).collect::<Vec<_>>().into_iter();
    let mut current = receivers.next();
    let mut moved = 0;
    for i in (0..out.len()).rev() {
        let b = out[i];
        if counts[b] <= target {
            continue;
        }
        let Some(r) = current else { break };
        out[i] = r;
        counts[b] -= 1;
        counts[r] += 1;
        moved += 1;
        if counts[r] == target {
            current = receivers.next();
        }
    }
    debug_assert!(counts.iter().all(|&c| c == target));

    let deviation = mapping_report(g, bins).deviation;
    let epsilon = deviation / 3.0;
    let report = PartitionReport {
        moved,
        deviation,
        epsilon,
        conditional_entropy: conditional_entropy(&out, g, bins),
        bound: 4.0 * epsilon.sqrt() * (bins as f64).log2(),
    };
    Ok((out, report))
}

/// `H(A | B)` in bits for paired labels drawn uniformly by position.
fn conditional_entropy(a: &[usize], b: &[usize], bins: usize) -> f64 {
    let mut joint = vec![0usize; bins * bins];
    for (&x, &y) in a.iter().zip(b) {
        joint[y * bins + x] += 1;
    }
    let n = a.len() as f64;
    let mut h = 0.0;
    for row in joint.chunks(bins) {
        let total: usize = row.iter().sum();
        for &c in row.iter().filter(|&&c| c > 0) {
            h -= c as f64 / n * (c as f64 / total as f64).log2();
        }
    }
    h.max(0.0)
}

/// Splits a combined key index into the two senders' pads, low part first.
pub fn split_key(k1: usize, m11: usize) -> (usize, usize) {
    (k1 % m11, k1 / m11)
}

pub fn encrypt(m: usize, k: usize, modulus: usize) -> usize {
    (m + k) % modulus
}

pub fn decrypt(c: usize, k: usize, modulus: usize) -> usize {
    (c + modulus - k % modulus) % modulus
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mapping_rejects_too_many_keys() {
        assert!(build_key_mapping(3, 4, 0).is_err());
        assert!(build_key_mapping(4, 4, 0).is_ok());
    }

    #[test]
    fn identity_partition_reports_nothing() {
        let g: Vec<usize> = (0..12).map(|i| i % 4).collect();
        let (out, r) = equalize_partition(&g, 4).unwrap();
        assert_eq!(out, g);
        assert_eq!(r.moved, 0);
        assert_eq!(r.conditional_entropy, 0.0);
    }

    #[test]
    fn divisibility_is_a_precondition() {
        assert!(matches!(equalize_partition(&[0, 1, 0], 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn conditional_entropy_oracle() {
        // g puts everything in bin 0; half must move to bin 1.
        let (out, r) = equalize_partition(&[0; 4], 2).unwrap();
        assert_eq!(out, vec![0, 0, 1, 1]);
        assert_eq!(r.moved, 2);
        assert!((r.conditional_entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ciphertext_is_close_to_uniform_for_fixed_message() {
        // Pr{c} = Pr{kappa(T) = c - m}, so its distance from uniform is half
        // the mapping deviation.
        let (map, rep) = build_key_mapping(256, 4, 11).unwrap();
        let m = 3;
        let mut pc = [0.0; 4];
        map.iter().for_each(|&k| pc[encrypt(m, k, 4)] += 1.0 / 256.0);
        let tv: f64 = pc.iter().map(|p| (p - 0.25f64).abs()).sum::<f64>() / 2.0;
        assert!((tv - rep.deviation / 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn equalized_bins_are_equal(labels in prop::collection::vec(0usize..5, 1..40), bins in 1usize..6) {
            let len = labels.len() / bins * bins;
            prop_assume!(len > 0);
            let g: Vec<usize> = labels[..len].iter().map(|&b| b % bins).collect();
            let (out, r) = equalize_partition(&g, bins).unwrap();
            let counts = bin_counts(&out, bins);
            prop_assert!(counts.iter().all(|&c| c == len / bins));
            let differ = out.iter().zip(&g).filter(|(a, b)| a != b).count();
            prop_assert_eq!(differ, r.moved);
            // the minimal number of moves is the total excess
            let excess: usize = bin_counts(&g, bins).iter().map(|&c| c.saturating_sub(len / bins)).sum();
            prop_assert_eq!(r.moved, excess);
            prop_assert!(r.conditional_entropy <= r.bound + 1e-12);
        }

        #[test]
        fn pad_round_trips(m in 0usize..97, k in 0usize..1000) {
            prop_assert_eq!(decrypt(encrypt(m, k, 97), k, 97), m);
        }
    }
}
