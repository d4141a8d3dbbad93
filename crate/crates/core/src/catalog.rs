//! Channels and auxiliary assignments used by the worked examples.

use crate::error::{Error, Result};
use crate::prob::{binary_convolution, AuxChain, AuxSizes, ChannelModel, ChannelSizes};

fn bern(p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} is not in [0, 1]")));
    }
    Ok(vec![1.0 - p, p])
}

const BINARY: ChannelSizes = ChannelSizes { x1: 2, x2: 2, s: 2, y: 2, z: 2 };

/// `Y = X1` if `S = 0`, `Y = X2` if `S = 1`; `Z = X2`; `Pr{S = 1} = p`.
pub fn example1_channel(p: f64) -> Result<ChannelModel> {
    ChannelModel::deterministic(BINARY, bern(p)?, |x1, x2, s| (if s == 0 { x1 } else { x2 }, x2))
}

/// `Y = X1 xor X2 xor S`; `Z = X2`; `Pr{S = 1} = p`.
pub fn example1b_channel(p: f64) -> Result<ChannelModel> {
    ChannelModel::deterministic(BINARY, bern(p)?, |x1, x2, s| (x1 ^ x2 ^ s, x2))
}

/// State-reproducing channel: `Y = (Y1, Y2) = ((X1 & X2) xor S, X1 & X2)`,
/// `Z = Y2 xor N`, `S ~ Bern(q)`, `N ~ Bern(p)`.
///
/// `Y` is encoded as `2 * y1 + y2`.
pub fn example2_channel(q: f64, p: f64) -> Result<ChannelModel> {
    let noise = bern(p)?;
    let sizes = ChannelSizes { x1: 2, x2: 2, s: 2, y: 4, z: 2 };
    ChannelModel::from_fn(sizes, bern(q)?, |x1, x2, s, y, z| {
        let y2 = x1 & x2;
        let y1 = y2 ^ s;
        if y != 2 * y1 + y2 {
            0.0
        } else {
            noise[z ^ y2]
        }
    })
}

/// Scheme-1 assignment for the first channel of Example 1:
/// `V = S`, `U2` constant, `X1 = U1`, `X2 = U`, with `U, U1` uniform.
pub fn example1_scheme1_aux(channel: &ChannelModel) -> Result<AuxChain> {
    let c = channel.sizes();
    if c != BINARY {
        return Err(Error::invalid("example 1 assignment needs binary alphabets"));
    }
    AuxChain::with_maps(
        c,
        AuxSizes { v: 2, u: 2, u1: 2, u2: 1 },
        vec![1.0, 0.0, 0.0, 1.0],
        vec![0.5, 0.5],
        vec![0.5; 4],
        vec![1.0; 2],
        |_, u1, _| u1,
        |u, _, _| u,
    )
}

/// Scheme-2 assignment for the second channel of Example 1:
/// `X1 = U1`, `X2 = U2`, both uniform; `U` and `V` constant.
pub fn example1b_scheme2_aux(channel: &ChannelModel) -> Result<AuxChain> {
    let c = channel.sizes();
    AuxChain::with_maps(
        c,
        AuxSizes { v: 1, u: 1, u1: c.x1, u2: c.x2 },
        vec![1.0; c.s],
        vec![1.0],
        vec![1.0 / c.x1 as f64; c.x1],
        vec![1.0 / c.x2 as f64; c.x2],
        |_, u1, _| u1,
        |_, u2, _| u2,
    )
}

/// `X2 = 1` deterministically, `X1 = U xor U1 xor (S if with_state)`, `U` uniform,
/// `U1 ~ Bern(beta)`; `U2` and `V` constant. This realises the input law of
/// the capacity-achieving direct part of Example 2.
pub fn example2_aux(channel: &ChannelModel, beta: f64, with_state: bool) -> Result<AuxChain> {
    let c = channel.sizes();
    AuxChain::with_maps(
        c,
        AuxSizes { v: 1, u: 2, u1: 2, u2: 1 },
        vec![1.0; c.s],
        vec![0.5, 0.5],
        [bern(beta)?, bern(beta)?].concat(),
        vec![1.0; 2],
        move |u, u1, s| u ^ u1 ^ if with_state { s } else { 0 },
        |_, _, _| 1,
    )
}

/// Input law `P_U P_{X1|U,S} P_{X2|U}` with `U` uniform, `X1 = U xor X''`,
/// `X'' ~ Bern(alpha)` independent of everything, and `X2 = 1`.
pub fn example2_capacity_aux(channel: &ChannelModel, alpha: f64) -> Result<AuxChain> {
    let c = channel.sizes();
    let flip = bern(alpha)?;
    let mut x1 = Vec::with_capacity(2 * c.s * 2);
    for u in 0..2 {
        for _ in 0..c.s {
            x1.extend((0..2).map(|x| flip[x ^ u]));
        }
    }
    let x2 = [0.0, 1.0].repeat(2 * c.s);
    AuxChain::new(
        c,
        AuxSizes { v: 1, u: 2, u1: 1, u2: 1 },
        vec![1.0; c.s],
        vec![0.5, 0.5],
        vec![1.0; 2],
        vec![1.0; 2],
        x1,
        x2,
    )
}

/// Solves `q * beta = alpha` for `beta`; `None` when no `beta` in `[0, 1]` exists.
pub fn example2_beta(q: f64, alpha: f64) -> Option<f64> {
    if (1.0 - 2.0 * q).abs() < 1e-15 {
        return None;
    }
    let beta = (alpha - q) / (1.0 - 2.0 * q);
    let ok = (-1e-12..=1.0 + 1e-12).contains(&beta)
        && binary_convolution(q, beta.clamp(0.0, 1.0)).map(|a| (a - alpha).abs() < 1e-12).unwrap_or(false);
    ok.then(|| beta.clamp(0.0, 1.0))
}

/// Binary test channel for the simulator: `Y = S or (X1 xor X2)`,
/// `Z = X1 xor X2 xor N`, `S ~ Bern(q)`, `N ~ Bern(p)`.
///
/// A one in the state forces `Y = 1`, so `Y = 0` rules out both `S = 1`
/// and `X1 != X2`. The eavesdropper never sees the state.
pub fn regression_channel(q: f64, p: f64) -> Result<ChannelModel> {
    let noise = bern(p)?;
    ChannelModel::from_fn(BINARY, bern(q)?, |x1, x2, s, y, z| if y != s | (x1 ^ x2) { 0.0 } else { noise[z ^ x1 ^ x2] })
}

/// `V = S and B` with `B ~ Bern(beta)`, `U` constant, `X1 = U1 ~ Bern(theta)`,
/// `X2 = U2 ~ Bern(theta)`.
pub fn regression_aux(channel: &ChannelModel, beta: f64, theta: f64) -> Result<AuxChain> {
    let c = channel.sizes();
    if c != BINARY {
        return Err(Error::invalid("regression assignment needs binary alphabets"));
    }
    let keep = bern(beta)?;
    AuxChain::with_maps(
        c,
        AuxSizes { v: 2, u: 1, u1: 2, u2: 2 },
        vec![1.0, 0.0, keep[0], keep[1]],
        vec![1.0],
        bern(theta)?,
        bern(theta)?,
        |_, u1, _| u1,
        |_, u2, _| u2,
    )
}
