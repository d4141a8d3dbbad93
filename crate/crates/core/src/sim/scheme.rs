use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::codebook::{pack_index, symbol_from_word, unpack_index, Codebooks, KeyCodebook};
use super::config::SimPlan;
use super::keys::{decrypt, encrypt, split_key};
use super::typical::TypicalityTest;
use crate::error::{Error, Result};
use crate::prob::{var::*, ChannelModel};

/// Message indices of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BlockMessages {
    pub m10: usize,
    pub m11: usize,
    pub m20: usize,
    pub m21: usize,
}

/// Everything the encoders chose and the channel produced in one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTranscript {
    pub block: usize,
    pub s: Vec<usize>,
    /// `(k0, t)` found by the Wyner-Ziv search; `None` on failure.
    pub wz: Option<(usize, usize)>,
    pub key: (usize, usize),
    pub cipher: (usize, usize),
    pub messages: BlockMessages,
    pub m0: usize,
    pub local: (usize, usize),
    pub codewords: (usize, usize),
    pub x1: Vec<usize>,
    pub x2: Vec<usize>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureCause {
    WzEncode,
    LastBlock,
    VDecode,
    TupleDecode,
    KeyMismatch,
}

impl FailureCause {
    pub const ALL: [FailureCause; 5] = [
        FailureCause::WzEncode,
        FailureCause::LastBlock,
        FailureCause::VDecode,
        FailureCause::TupleDecode,
        FailureCause::KeyMismatch,
    ];
}

/// Reference laws of every joint-typicality test the scheme runs.
#[derive(Debug, Clone)]
pub struct SchemeTests {
    pub sv: TypicalityTest,
    pub vy: TypicalityTest,
    pub vuy: TypicalityTest,
    pub vuu1y: TypicalityTest,
    pub vuu2y: TypicalityTest,
    pub vuu1u2y: TypicalityTest,
    pub uu1u2y: TypicalityTest,
}

impl SchemeTests {
    pub fn new(plan: &SimPlan) -> Result<Self> {
        let t = |vars: &[&str]| TypicalityTest::from_joint(&plan.joint, vars, plan.delta);
        Ok(SchemeTests {
            sv: t(&[S, V])?,
            vy: t(&[V, Y])?,
            vuy: t(&[V, U, Y])?,
            vuu1y: t(&[V, U, U1, Y])?,
            vuu2y: t(&[V, U, U2, Y])?,
            vuu1u2y: t(&[V, U, U1, U2, Y])?,
            uu1u2y: t(&[U, U1, U2, Y])?,
        })
    }
}

/// Smallest-index codeword jointly typical with `s`, as `(k0, t)`.
pub fn wyner_ziv_encode(s: &[usize], book: &KeyCodebook, sv: &TypicalityTest) -> Option<(usize, usize)> {
    (0..book.len()).find(|&j| sv.check_unchecked(&[s, book.word(j)], s.len())).map(|j| book.indices(j))
}

/// Index choices of one block before any input symbol is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockChoice {
    pub wz: Option<(usize, usize)>,
    pub m0: usize,
    pub key: (usize, usize),
    pub cipher: (usize, usize),
    pub messages: BlockMessages,
    pub local: (usize, usize),
    pub codewords: (usize, usize),
}

/// Wyner-Ziv search, key extraction, padding and codeword indexing for
/// block `b` with the given local indices.
pub fn select_codewords(
    plan: &SimPlan,
    books: &Codebooks,
    tests: &SchemeTests,
    b: usize,
    messages: BlockMessages,
    prev_state: Option<&[usize]>,
    local: (usize, usize),
) -> Result<BlockChoice> {
    let z = &plan.sizes;
    let last = plan.blocks + 1;
    if b == 0 || b > last {
        return Err(Error::invalid(format!("block {b} outside 1..={last}")));
    }
    let messages = if (2..=plan.blocks).contains(&b) { messages } else { BlockMessages::default() };
    if messages.m10 >= z.m10 || messages.m11 >= z.m11 || messages.m20 >= z.m20 || messages.m21 >= z.m21 {
        return Err(Error::invalid("message index out of range"));
    }
    let local = if b == last { (0, 0) } else { local };
    if local.0 >= z.l1 || local.1 >= z.l2 {
        return Err(Error::invalid("local randomness index out of range"));
    }
    let (wz, m0, key) = if b == 1 {
        (None, 0, (0, 0))
    } else {
        let prev = prev_state.ok_or_else(|| Error::invalid("missing previous block state"))?;
        if prev.len() != plan.n {
            return Err(Error::invalid("previous state length differs from n"));
        }
        let book = books.key_book(b);
        let wz = wyner_ziv_encode(prev, book, &tests.sv);
        let (k0, t) = wz.unwrap_or((0, 0));
        (wz, k0, split_key(book.key(t), z.m11))
    };
    let cipher =
        if b == last { (0, 0) } else { (encrypt(messages.m11, key.0, z.m11), encrypt(messages.m21, key.1, z.m21)) };
    let codewords = (
        pack_index(messages.m10, cipher.0, local.0, z.m11, z.l1),
        pack_index(messages.m20, cipher.1, local.1, z.m21, z.l2),
    );
    Ok(BlockChoice { wz, m0, key, cipher, messages, local, codewords })
}

/// Encodes block `b` (counted from 1). `prev_state` is the state of block
/// `b - 1` and is ignored in block 1.
///
/// Local indices are drawn before the inputs, and each input symbol uses a
/// fixed number of generator words, so `x_i` never depends on later states.
#[allow(clippy::too_many_arguments)]
pub fn encode_block(
    plan: &SimPlan,
    books: &Codebooks,
    tests: &SchemeTests,
    b: usize,
    messages: BlockMessages,
    state: &[usize],
    prev_state: Option<&[usize]>,
    rng: &mut impl RngCore,
) -> Result<BlockTranscript> {
    if state.len() != plan.block_len(b) {
        return Err(Error::invalid("state length differs from block length"));
    }
    let local = (rng.random_range(0..plan.sizes.l1), rng.random_range(0..plan.sizes.l2));
    let c = select_codewords(plan, books, tests, b, messages, prev_state, local)?;
    let u = books.u_word(b, c.m0);
    let u1 = books.u1_word(b, c.m0, c.codewords.0);
    let u2 = books.u2_word(b, c.m0, c.codewords.1);
    let x1_law = plan.aux.x1_given_uu1s();
    let x2_law = plan.aux.x2_given_uu2s();
    let (ns, a) = (plan.channel.sizes().s, plan.aux.sizes());
    let (mut x1, mut x2) = (Vec::with_capacity(u.len()), Vec::with_capacity(u.len()));
    for i in 0..u.len() {
        let (w1, w2) = (rng.next_u32(), rng.next_u32());
        x1.push(symbol_from_word(w1, x1_law.slice((u[i] * a.u1 + u1[i]) * ns + state[i])));
        x2.push(symbol_from_word(w2, x2_law.slice((u[i] * a.u2 + u2[i]) * ns + state[i])));
    }
    Ok(BlockTranscript {
        block: b,
        s: state.to_vec(),
        wz: c.wz,
        key: c.key,
        cipher: c.cipher,
        messages: c.messages,
        m0: c.m0,
        local: c.local,
        codewords: c.codewords,
        x1,
        x2,
        y: Vec::new(),
        z: Vec::new(),
    })
}

/// Memoryless channel use, one generator word per symbol.
pub fn channel_transmit(
    x1: &[usize],
    x2: &[usize],
    s: &[usize],
    channel: &ChannelModel,
    rng: &mut impl RngCore,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if x1.len() != s.len() || x2.len() != s.len() {
        return Err(Error::invalid("input and state sequences have different lengths"));
    }
    let c = channel.sizes();
    let (mut y, mut z) = (Vec::with_capacity(s.len()), Vec::with_capacity(s.len()));
    for i in 0..s.len() {
        if x1[i] >= c.x1 || x2[i] >= c.x2 || s[i] >= c.s {
            return Err(Error::invalid("channel input outside its alphabet"));
        }
        let yz = symbol_from_word(rng.next_u32(), channel.output_slice(x1[i], x2[i], s[i]));
        y.push(yz / c.z);
        z.push(yz % c.z);
    }
    Ok((y, z))
}

/// Decoder output: messages of blocks `2..=B` and the key-codebook indices
/// `(k0, t)` recovered for blocks `2..=B+1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub messages: Vec<Option<BlockMessages>>,
    pub key_indices: Vec<Option<(usize, usize)>>,
    pub failure: Option<(usize, FailureCause)>,
}

/// Exactly one item, or the number seen (0 or 2).
fn unique<T>(mut it: impl Iterator<Item = T>) -> std::result::Result<T, usize> {
    match (it.next(), it.next()) {
        (Some(x), None) => Ok(x),
        (None, _) => Err(0),
        _ => Err(2),
    }
}

/// Backward joint-typicality decoding of blocks `B+1, B, ..., 1`.
pub fn backward_decode(
    plan: &SimPlan,
    books: &Codebooks,
    tests: &SchemeTests,
    ys: &[Vec<usize>],
) -> Result<DecodeOutcome> {
    let (big_b, z) = (plan.blocks, &plan.sizes);
    if ys.len() != big_b + 1 || ys.iter().enumerate().any(|(i, y)| y.len() != plan.block_len(i + 1)) {
        return Err(Error::invalid("channel outputs do not match the block structure"));
    }
    let mut out =
        DecodeOutcome { messages: vec![None; big_b.saturating_sub(1)], key_indices: vec![None; big_b], failure: None };

    let last = big_b + 1;
    let y = &ys[last - 1];
    let found = unique((0..z.k0).filter(|&k0| {
        let (u, u1, u2) = (books.u_word(last, k0), books.u1_word(last, k0, 0), books.u2_word(last, k0, 0));
        tests.uu1u2y.check_unchecked(&[u, &u1, &u2, y], y.len())
    }));
    let Ok(mut k0_next) = found else {
        out.failure = Some((last, FailureCause::LastBlock));
        return Ok(out);
    };
    // ciphertexts of block b + 1, decrypted once its key is known
    let mut pending: Option<(usize, usize, usize, usize)> = None;

    for b in (1..=big_b).rev() {
        let y = &ys[b - 1];
        let n = y.len();
        let book = books.key_book(b + 1);
        let found = unique(
            book.sub_codebook(k0_next).iter().copied().filter(|&j| tests.vy.check_unchecked(&[book.word(j), y], n)),
        );
        let Ok(j) = found else {
            out.failure = Some((b, FailureCause::VDecode));
            return Ok(out);
        };
        let (_, t) = book.indices(j);
        out.key_indices[b - 1] = Some((k0_next, t));
        let (k11, k21) = split_key(book.key(t), z.m11);
        if let Some((m10, c11, m20, c21)) = pending.take() {
            out.messages[b - 1] =
                Some(BlockMessages { m10, m11: decrypt(c11, k11, z.m11), m20, m21: decrypt(c21, k21, z.m21) });
        }
        if b == 1 {
            break;
        }

        let v = book.word(j);
        let mut hits = Vec::new();
        'search: for k0 in 0..z.k0 {
            let u = books.u_word(b, k0);
            if !tests.vuy.check_unchecked(&[v, u, y], n) {
                continue;
            }
            let side =
                |draw: &dyn Fn(usize) -> Vec<usize>, size: usize, test: &TypicalityTest| -> Vec<(usize, Vec<usize>)> {
                    (0..size).map(|i| (i, draw(i))).filter(|(_, w)| test.check_unchecked(&[v, u, w, y], n)).collect()
                };
            let ones = side(&|i| books.u1_word(b, k0, i), z.u1_book(), &tests.vuu1y);
            if ones.is_empty() {
                continue;
            }
            let twos = side(&|i| books.u2_word(b, k0, i), z.u2_book(), &tests.vuu2y);
            for (i1, w1) in &ones {
                for (i2, w2) in &twos {
                    if tests.vuu1u2y.check_unchecked(&[v, u, w1, w2, y], n) {
                        hits.push((k0, *i1, *i2));
                        if hits.len() > 1 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let [(k0, i1, i2)] = hits[..] else {
            out.failure = Some((b, FailureCause::TupleDecode));
            return Ok(out);
        };
        let (m10, c11, _) = unpack_index(i1, z.m11, z.l1);
        let (m20, c21, _) = unpack_index(i2, z.m21, z.l2);
        pending = Some((m10, c11, m20, c21));
        k0_next = k0;
    }
    Ok(out)
}

/// Independent generator seeds of one trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialSeeds {
    pub codebook: u64,
    pub messages: u64,
    pub state: u64,
    pub encoder: u64,
    pub channel: u64,
}

impl TrialSeeds {
    pub fn derive(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        TrialSeeds {
            codebook: rng.next_u64(),
            messages: rng.next_u64(),
            state: rng.next_u64(),
            encoder: rng.next_u64(),
            channel: rng.next_u64(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub error: bool,
    pub cause: Option<FailureCause>,
    pub transcripts: Vec<BlockTranscript>,
    pub decoded: DecodeOutcome,
}

pub fn draw_messages(plan: &SimPlan, rng: &mut impl Rng) -> Vec<BlockMessages> {
    let z = &plan.sizes;
    (2..=plan.blocks)
        .map(|_| BlockMessages {
            m10: rng.random_range(0..z.m10),
            m11: rng.random_range(0..z.m11),
            m20: rng.random_range(0..z.m20),
            m21: rng.random_range(0..z.m21),
        })
        .collect()
}

pub fn draw_states(plan: &SimPlan, rng: &mut impl RngCore) -> Vec<Vec<usize>> {
    let p_s = plan.channel.state_dist();
    (1..=plan.blocks + 1)
        .map(|b| (0..plan.block_len(b)).map(|_| symbol_from_word(rng.next_u32(), p_s)).collect())
        .collect()
}

/// Sends all `B + 1` blocks.
pub fn transmit(
    plan: &SimPlan,
    books: &Codebooks,
    tests: &SchemeTests,
    messages: &[BlockMessages],
    states: &[Vec<usize>],
    encoder_rng: &mut impl RngCore,
    channel_rng: &mut impl RngCore,
) -> Result<Vec<BlockTranscript>> {
    let mut out = Vec::with_capacity(plan.blocks + 1);
    for b in 1..=plan.blocks + 1 {
        let m = if (2..=plan.blocks).contains(&b) { messages[b - 2] } else { BlockMessages::default() };
        let prev = (b > 1).then(|| states[b - 2].as_slice());
        let mut tr = encode_block(plan, books, tests, b, m, &states[b - 1], prev, encoder_rng)?;
        (tr.y, tr.z) = channel_transmit(&tr.x1, &tr.x2, &tr.s, &plan.channel, channel_rng)?;
        out.push(tr);
    }
    Ok(out)
}

/// One independent realisation of codebooks, messages, states and noise.
pub fn run_trial(
    plan: &SimPlan,
    tests: &SchemeTests,
    seeds: TrialSeeds,
    books: Option<&Codebooks>,
) -> Result<TrialOutcome> {
    let owned;
    let books = match books {
        Some(b) => b,
        None => {
            owned = Codebooks::generate(plan, seeds.codebook)?;
            &owned
        }
    };
    let messages = draw_messages(plan, &mut ChaCha8Rng::seed_from_u64(seeds.messages));
    let states = draw_states(plan, &mut ChaCha8Rng::seed_from_u64(seeds.state));
    let transcripts = transmit(
        plan,
        books,
        tests,
        &messages,
        &states,
        &mut ChaCha8Rng::seed_from_u64(seeds.encoder),
        &mut ChaCha8Rng::seed_from_u64(seeds.channel),
    )?;
    let ys: Vec<Vec<usize>> = transcripts.iter().map(|t| t.y.clone()).collect();
    let decoded = backward_decode(plan, books, tests, &ys)?;

    let wrong = decoded.messages.iter().zip(&messages).any(|(d, m)| d.as_ref() != Some(m));
    let cause = if transcripts.iter().any(|t| t.block > 1 && t.wz.is_none()) {
        Some(FailureCause::WzEncode)
    } else if let Some((_, c)) = decoded.failure {
        Some(c)
    } else if wrong {
        let keys_differ = transcripts[1..].iter().zip(&decoded.key_indices).any(|(t, d)| t.wz != *d);
        Some(if keys_differ { FailureCause::KeyMismatch } else { FailureCause::TupleDecode })
    } else {
        None
    };
    Ok(TrialOutcome { error: cause.is_some(), cause, transcripts, decoded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::sim::config::tests::regression_config;
    use crate::sim::{MessageRates, SimConfig};

    fn setup(cfg: &SimConfig) -> (SimPlan, SchemeTests, Codebooks) {
        let plan = cfg.plan().unwrap();
        let tests = SchemeTests::new(&plan).unwrap();
        let books = Codebooks::generate(&plan, 5).unwrap();
        (plan, tests, books)
    }

    #[test]
    fn example1_channel_is_reproduced_symbolwise() {
        let ch = catalog::example1_channel(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x1, x2, s) = (vec![0, 1, 0, 1], vec![1, 1, 0, 0], vec![0, 1, 1, 0]);
        let (y, z) = channel_transmit(&x1, &x2, &s, &ch, &mut rng).unwrap();
        assert_eq!(y, vec![0, 1, 0, 1]);
        assert_eq!(z, x2);
        assert!(channel_transmit(&x1, &x2, &s[..3], &ch, &mut rng).is_err());
        assert!(channel_transmit(&[2], &[0], &[0], &ch, &mut rng).is_err());
    }

    #[test]
    fn output_law_matches_kernel() {
        let ch = catalog::regression_channel(0.5, 0.3).unwrap();
        let n = 100_000;
        let (x1, x2, s) = (vec![1; n], vec![0; n], vec![0; n]);
        let (y, z) = channel_transmit(&x1, &x2, &s, &ch, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(y.iter().all(|&v| v == 1));
        // z = x1 xor x2 xor N, so Pr{z = 0} = 0.3
        let p = 0.3;
        let f = z.iter().filter(|&&v| v == 0).count() as f64 / n as f64;
        assert!((f - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn wyner_ziv_finds_the_state_itself() {
        let ch = catalog::regression_channel(0.1, 0.3).unwrap();
        let mut cfg = regression_config(8);
        cfg.aux = catalog::regression_aux(&ch, 1.0, 0.5).unwrap().to_spec();
        cfg.tau = 0.05;
        cfg.mu = None;
        let (_, tests, books) = setup(&cfg);
        let book = books.key_book(2);
        let j = (0..book.len()).find(|&j| tests.sv.check(&[book.word(j), book.word(j)]).unwrap()).unwrap();
        let s = book.word(j).to_vec();
        let (k0, t) = wyner_ziv_encode(&s, book, &tests.sv).unwrap();
        let first = book.sub_codebook(k0)[t];
        assert!(first <= j);
        assert_eq!(book.word(first), &s[..]);
    }

    #[test]
    fn accepted_descriptions_are_typical() {
        let (plan, tests, books) = setup(&regression_config(12));
        let sv = plan.joint.marginalize(&[S, V]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let book = books.key_book(2);
        for _ in 0..50 {
            let s = &draw_states(&plan, &mut rng)[0];
            if let Some((k0, t)) = wyner_ziv_encode(s, book, &tests.sv) {
                let v = book.word(book.sub_codebook(k0)[t]);
                assert!(crate::sim::typical_set_test(&[s, v], &sv, plan.delta).unwrap());
            }
        }
    }

    #[test]
    fn off_support_description_is_rejected() {
        let (plan, tests, _) = setup(&regression_config(12));
        // a description with ones where the state is zero is off the support
        let s = vec![0; plan.n];
        let v = vec![1; plan.n];
        assert!(!tests.sv.check(&[&s, &v]).unwrap());
    }

    #[test]
    fn encoder_is_causal_and_pads_correctly() {
        let (plan, tests, books) = setup(&regression_config(12));
        let mut srng = ChaCha8Rng::seed_from_u64(8);
        let states = draw_states(&plan, &mut srng);
        let msgs = draw_messages(&plan, &mut srng);
        let run = |st: &[Vec<usize>]| {
            encode_block(&plan, &books, &tests, 2, msgs[0], &st[1], Some(&st[0]), &mut ChaCha8Rng::seed_from_u64(9))
                .unwrap()
        };
        let base = run(&states);
        let z = &plan.sizes;
        assert_eq!(decrypt(base.cipher.0, base.key.0, z.m11), base.messages.m11);
        assert_eq!(decrypt(base.cipher.1, base.key.1, z.m21), base.messages.m21);
        for i in 0..plan.n {
            let mut st = states.clone();
            st[1][i] ^= 1;
            let other = run(&st);
            assert_eq!(other.x1[..i], base.x1[..i]);
            assert_eq!(other.x2[..i], base.x2[..i]);
        }
    }

    #[test]
    fn deterministic_encoder_maps_symbolwise() {
        let (plan, tests, books) = setup(&regression_config(12));
        let states = draw_states(&plan, &mut ChaCha8Rng::seed_from_u64(1));
        let tr = encode_block(
            &plan,
            &books,
            &tests,
            1,
            BlockMessages::default(),
            &states[0],
            None,
            &mut ChaCha8Rng::seed_from_u64(2),
        )
        .unwrap();
        // X1 = U1 and X2 = U2
        assert_eq!(tr.x1, books.u1_word(1, tr.m0, tr.codewords.0));
        assert_eq!(tr.x2, books.u2_word(1, tr.m0, tr.codewords.1));
    }

    #[test]
    fn clean_decodes_return_the_sent_messages() {
        let plan = regression_config(12).plan().unwrap();
        let tests = SchemeTests::new(&plan).unwrap();
        let mut clean = 0;
        for t in 0..60 {
            let o = run_trial(&plan, &tests, TrialSeeds::derive(1, t), None).unwrap();
            if o.cause.is_none() {
                clean += 1;
                let sent: Vec<_> = o.transcripts[1..plan.blocks].iter().map(|tr| Some(tr.messages)).collect();
                assert_eq!(o.decoded.messages, sent);
                assert!(!o.error);
            }
        }
        assert!(clean > 0);
    }

    #[test]
    fn corrupted_output_is_a_recorded_failure() {
        let (plan, tests, books) = setup(&regression_config(12));
        // Y = 0 everywhere rules out every state one, which is atypical.
        let ys: Vec<Vec<usize>> = (1..=plan.blocks + 1).map(|b| vec![0; plan.block_len(b)]).collect();
        let out = backward_decode(&plan, &books, &tests, &ys).unwrap();
        assert!(out.failure.is_some());
        assert!(out.messages.iter().all(|m| m.is_none()));
    }

    #[test]
    fn rates_far_above_capacity_fail() {
        let mut cfg = regression_config(12);
        cfg.rates = MessageRates { r1_tilde: 0.9, r10: 0.9, r11: 0.0, r2_tilde: 0.9, r20: 0.9, r21: 0.0 };
        cfg.symbol_budget = 1 << 28;
        let plan = cfg.plan().unwrap();
        let tests = SchemeTests::new(&plan).unwrap();
        let errors =
            (0..10).filter(|&t| run_trial(&plan, &tests, TrialSeeds::derive(2, t), None).unwrap().error).count();
        assert_eq!(errors, 10);
    }
}
