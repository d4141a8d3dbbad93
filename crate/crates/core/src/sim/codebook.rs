use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{BookSizes, SimPlan};
use super::keys::{build_key_mapping, equalize_partition, KeyMappingReport, PartitionReport};
use crate::error::Result;
use crate::prob::ConditionalPmf;

/// Inverse-CDF draw from `pmf` driven by one 32-bit word.
pub(crate) fn symbol_from_word(word: u32, pmf: &[f64]) -> usize {
    let x = (f64::from(word) + 0.5) / 4_294_967_296.0;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in pmf.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if x < acc {
                return i;
            }
        }
    }
    last
}

/// Codeword `index` of an i.i.d. source; each symbol consumes one word of
/// the ChaCha stream, so any codeword is reachable without the others.
fn draw_word<'a>(seed: u64, stream: u64, index: usize, len: usize, law: impl Fn(usize) -> &'a [f64]) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(index as u128 * len as u128);
    (0..len).map(|i| symbol_from_word(rng.next_u32(), law(i))).collect()
}

#[derive(Clone, Copy)]
enum Stream {
    KeyWords = 0,
    Aux = 1,
    Partition = 2,
    KeyMap = 3,
    U1 = 4,
    U2 = 5,
}

fn stream_id(block: usize, kind: Stream) -> u64 {
    (block as u64) << 4 | kind as u64
}

fn book_stream(block: usize, kind: Stream, m0: usize) -> u64 {
    stream_id(block, kind) << 32 | m0 as u64
}

/// Wyner-Ziv codebook for one block, split into equal sub-codebooks with a
/// key map on the within-sub-codebook index.
#[derive(Debug, Clone)]
pub struct KeyCodebook {
    n: usize,
    words: Vec<usize>,
    bin: Vec<usize>,
    slot: Vec<usize>,
    members: Vec<Vec<usize>>,
    kappa: Vec<usize>,
    pub partition: PartitionReport,
    pub mapping: KeyMappingReport,
}

impl KeyCodebook {
    fn generate(seed: u64, block: usize, n: usize, p_v: &[f64], sizes: &BookSizes) -> Result<Self> {
        let words: Vec<usize> =
            (0..sizes.key).flat_map(|j| draw_word(seed, stream_id(block, Stream::KeyWords), j, n, |_| p_v)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(block, Stream::Partition));
        let g: Vec<usize> = (0..sizes.key).map(|_| rng.random_range(0..sizes.k0)).collect();
        let (bin, partition) = equalize_partition(&g, sizes.k0)?;
        let mut members = vec![Vec::with_capacity(sizes.sub); sizes.k0];
        let mut slot = vec![0; sizes.key];
        for (j, &b) in bin.iter().enumerate() {
            slot[j] = members[b].len();
            members[b].push(j);
        }
        rng.set_stream(stream_id(block, Stream::KeyMap));
        let (kappa, mapping) = build_key_mapping(sizes.sub, sizes.k1, rng.next_u64())?;
        Ok(KeyCodebook { n, words, bin, slot, members, kappa, partition, mapping })
    }

    pub fn len(&self) -> usize {
        self.bin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin.is_empty()
    }

    pub fn word(&self, j: usize) -> &[usize] {
        &self.words[j * self.n..(j + 1) * self.n]
    }

    /// `(k0, t)`: sub-codebook and position within it.
    pub fn indices(&self, j: usize) -> (usize, usize) {
        (self.bin[j], self.slot[j])
    }

    /// Global indices of sub-codebook `k0`, ascending.
    pub fn sub_codebook(&self, k0: usize) -> &[usize] {
        &self.members[k0]
    }

    pub fn key(&self, t: usize) -> usize {
        self.kappa[t]
    }
}

/// Packs `(public, cipher, local)` into a flat message-codebook index.
pub fn pack_index(public: usize, cipher: usize, local: usize, ciphers: usize, locals: usize) -> usize {
    (public * ciphers + cipher) * locals + local
}

pub fn unpack_index(idx: usize, ciphers: usize, locals: usize) -> (usize, usize, usize) {
    (idx / locals / ciphers, idx / locals % ciphers, idx % locals)
}

/// All codebooks of one code realisation. Key and cloud-centre books are
/// stored; satellite books are regenerated on demand.
#[derive(Debug, Clone)]
pub struct Codebooks {
    seed: u64,
    n: usize,
    n_last: usize,
    blocks: usize,
    pub sizes: BookSizes,
    key: Vec<KeyCodebook>,
    aux: Vec<Vec<usize>>,
    u1_given_u: ConditionalPmf,
    u2_given_u: ConditionalPmf,
}

impl Codebooks {
    pub fn generate(plan: &SimPlan, seed: u64) -> Result<Self> {
        let sizes = plan.sizes;
        let p_v = plan.aux.p_v(plan.channel.state_dist());
        let key = (2..=plan.blocks + 1)
            .map(|b| KeyCodebook::generate(seed, b, plan.n, &p_v, &sizes))
            .collect::<Result<Vec<_>>>()?;
        let p_u = plan.aux.p_u().slice(0);
        let aux = (1..=plan.blocks + 1)
            .map(|b| {
                let len = plan.block_len(b);
                (0..sizes.m0).flat_map(|m| draw_word(seed, stream_id(b, Stream::Aux), m, len, |_| p_u)).collect()
            })
            .collect();
        Ok(Codebooks {
            seed,
            n: plan.n,
            n_last: plan.n_last,
            blocks: plan.blocks,
            sizes,
            key,
            aux,
            u1_given_u: plan.aux.u1_given_u().clone(),
            u2_given_u: plan.aux.u2_given_u().clone(),
        })
    }

    fn len(&self, b: usize) -> usize {
        if b <= self.blocks {
            self.n
        } else {
            self.n_last
        }
    }

    /// Key codebook used in block `b`, describing the state of block `b - 1`.
    pub fn key_book(&self, b: usize) -> &KeyCodebook {
        &self.key[b - 2]
    }

    pub fn u_word(&self, b: usize, m0: usize) -> &[usize] {
        let len = self.len(b);
        &self.aux[b - 1][m0 * len..(m0 + 1) * len]
    }

    pub fn u1_word(&self, b: usize, m0: usize, idx: usize) -> Vec<usize> {
        let u = self.u_word(b, m0);
        draw_word(self.seed, book_stream(b, Stream::U1, m0), idx, u.len(), |i| self.u1_given_u.slice(u[i]))
    }

    pub fn u2_word(&self, b: usize, m0: usize, idx: usize) -> Vec<usize> {
        let u = self.u_word(b, m0);
        draw_word(self.seed, book_stream(b, Stream::U2, m0), idx, u.len(), |i| self.u2_given_u.slice(u[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::tests::regression_config;

    #[test]
    fn inverse_cdf_respects_support() {
        assert_eq!(symbol_from_word(0, &[0.0, 1.0]), 1);
        assert_eq!(symbol_from_word(u32::MAX, &[0.3, 0.7, 0.0]), 1);
        assert_eq!(symbol_from_word(0, &[0.3, 0.7]), 0);
    }

    #[test]
    fn random_access_matches_sequential() {
        let p = [0.2, 0.5, 0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        rng.set_stream(4);
        let seq: Vec<usize> = (0..30).map(|_| symbol_from_word(rng.next_u32(), &p)).collect();
        assert_eq!(draw_word(9, 4, 2, 10, |_| &p[..]), seq[20..30]);
    }

    #[test]
    fn deterministic_and_exactly_partitioned() {
        let plan = regression_config(12).plan().unwrap();
        let a = Codebooks::generate(&plan, 3).unwrap();
        let b = Codebooks::generate(&plan, 3).unwrap();
        assert_eq!(a.u1_word(2, 1, 0), b.u1_word(2, 1, 0));
        for blk in 2..=plan.blocks + 1 {
            let (ka, kb) = (a.key_book(blk), b.key_book(blk));
            assert_eq!(ka.words, kb.words);
            assert_eq!(ka.len(), plan.sizes.key);
            for k0 in 0..plan.sizes.k0 {
                assert_eq!(ka.sub_codebook(k0).len(), plan.sizes.sub);
                for (t, &j) in ka.sub_codebook(k0).iter().enumerate() {
                    assert_eq!(ka.indices(j), (k0, t));
                }
            }
        }
        assert_eq!(a.u_word(plan.blocks + 1, 0).len(), plan.n_last);
        assert_eq!(a.u1_word(plan.blocks + 1, 0, 0).len(), plan.n_last);
    }

    #[test]
    fn key_codewords_follow_p_v() {
        // Per-codeword frequency check against P_V with relative slack 0.5.
        let p_v = [0.9, 0.1];
        let words = 500;
        let good = (0..words)
            .filter(|&j| {
                let w = draw_word(1, 0, j, 200, |_| &p_v[..]);
                let f1 = w.iter().sum::<usize>() as f64 / 200.0;
                (f1 - 0.1).abs() <= 0.5 * 0.1
            })
            .count();
        assert!(good as f64 / words as f64 >= 0.9, "{good}");
    }

    #[test]
    fn index_packing_tiles_the_book() {
        let (c, l) = (3, 4);
        let mut seen = vec![false; 2 * c * l];
        for p in 0..2 {
            for ci in 0..c {
                for li in 0..l {
                    let i = pack_index(p, ci, li, c, l);
                    assert!(!seen[i]);
                    seen[i] = true;
                    assert_eq!(unpack_index(i, c, l), (p, ci, li));
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
