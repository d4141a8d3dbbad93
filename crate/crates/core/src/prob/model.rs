use serde::{Deserialize, Serialize};

use super::joint::{tensor_len, Alphabet, ConditionalPmf, LabeledJointPmf};
use crate::error::{Error, Result};

/// Canonical variable names of the assembled joint distribution.
pub mod var {
    pub const S: &str = "S";
    pub const V: &str = "V";
    pub const U: &str = "U";
    pub const U1: &str = "U1";
    pub const U2: &str = "U2";
    pub const X1: &str = "X1";
    pub const X2: &str = "X2";
    pub const Y: &str = "Y";
    pub const Z: &str = "Z";

    /// Order of the variables in [`assemble_joint`](super::assemble_joint) output.
    pub const ALL: [&str; 9] = [S, V, U, U1, U2, X1, X2, Y, Z];
}

/// Cardinalities of the channel alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSizes {
    pub x1: usize,
    pub x2: usize,
    pub s: usize,
    pub y: usize,
    pub z: usize,
}

/// Cardinalities of the auxiliary alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSizes {
    pub v: usize,
    pub u: usize,
    pub u1: usize,
    pub u2: usize,
}

impl AuxSizes {
    pub fn trivial() -> Self {
        AuxSizes { v: 1, u: 1, u1: 1, u2: 1 }
    }
}

fn alpha(name: &str, size: usize) -> Result<Alphabet> {
    Alphabet::new(name, size)
}

/// State distribution plus the memoryless kernel `W(y, z | x1, x2, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    sizes: ChannelSizes,
    state: ConditionalPmf,
    kernel: ConditionalPmf,
}

impl ChannelModel {
    /// `kernel` is flat, indexed `[x1][x2][s][y][z]`.
    pub fn new(sizes: ChannelSizes, state_dist: Vec<f64>, kernel: Vec<f64>) -> Result<Self> {
        let state = ConditionalPmf::marginal(alpha(var::S, sizes.s)?, state_dist)?;
        let kernel = ConditionalPmf::new(
            vec![alpha(var::Y, sizes.y)?, alpha(var::Z, sizes.z)?],
            vec![alpha(var::X1, sizes.x1)?, alpha(var::X2, sizes.x2)?, alpha(var::S, sizes.s)?],
            kernel,
        )?;
        Ok(ChannelModel { sizes, state, kernel })
    }

    pub fn from_fn(
        sizes: ChannelSizes,
        state_dist: Vec<f64>,
        f: impl Fn(usize, usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let len = tensor_len([sizes.x1, sizes.x2, sizes.s, sizes.y, sizes.z])?;
        let mut k = Vec::with_capacity(len);
        for x1 in 0..sizes.x1 {
            for x2 in 0..sizes.x2 {
                for s in 0..sizes.s {
                    for y in 0..sizes.y {
                        for z in 0..sizes.z {
                            k.push(f(x1, x2, s, y, z));
                        }
                    }
                }
            }
        }
        Self::new(sizes, state_dist, k)
    }

    /// Channel whose outputs are a deterministic function of the inputs and state.
    pub fn deterministic(
        sizes: ChannelSizes,
        state_dist: Vec<f64>,
        f: impl Fn(usize, usize, usize) -> (usize, usize),
    ) -> Result<Self> {
        Self::from_fn(sizes, state_dist, |x1, x2, s, y, z| if f(x1, x2, s) == (y, z) { 1.0 } else { 0.0 })
    }

    pub fn sizes(&self) -> ChannelSizes {
        self.sizes
    }

    pub fn state_dist(&self) -> &[f64] {
        self.state.weights()
    }

    #[inline]
    pub fn p_s(&self, s: usize) -> f64 {
        self.state.weights()[s]
    }

    #[inline]
    fn input_index(&self, x1: usize, x2: usize, s: usize) -> usize {
        (x1 * self.sizes.x2 + x2) * self.sizes.s + s
    }

    /// `W(y, z | x1, x2, s)`.
    #[inline]
    pub fn w(&self, x1: usize, x2: usize, s: usize, y: usize, z: usize) -> f64 {
        self.kernel.get(self.input_index(x1, x2, s), y * self.sizes.z + z)
    }

    /// Joint output law for one input triple, flat over `(y, z)`.
    pub fn output_slice(&self, x1: usize, x2: usize, s: usize) -> &[f64] {
        self.kernel.slice(self.input_index(x1, x2, s))
    }

    pub fn kernel(&self) -> &ConditionalPmf {
        &self.kernel
    }

    pub fn to_spec(&self) -> ChannelSpec {
        let c = self.sizes;
        let kernel = (0..c.x1)
            .map(|x1| {
                (0..c.x2)
                    .map(|x2| {
                        (0..c.s)
                            .map(|s| (0..c.y).map(|y| (0..c.z).map(|z| self.w(x1, x2, s, y, z)).collect()).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ChannelSpec { alphabets: c, state_dist: self.state_dist().to_vec(), kernel }
    }
}

/// The auxiliary factorisation
/// `P(v|s) P(u) P(u1|u) P(u2|u) P(x1|u,u1,s) P(x2|u,u2,s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxChain {
    sizes: AuxSizes,
    s_size: usize,
    x_sizes: (usize, usize),
    v_given_s: ConditionalPmf,
    u: ConditionalPmf,
    u1_given_u: ConditionalPmf,
    u2_given_u: ConditionalPmf,
    x1_given_uu1s: ConditionalPmf,
    x2_given_uu2s: ConditionalPmf,
}

impl AuxChain {
    /// All arguments are flat row-major tensors: `v_given_s[s][v]`, `u[u]`,
    /// `u1_given_u[u][u1]`, `u2_given_u[u][u2]`, `x1[u][u1][s][x1]`,
    /// `x2[u][u2][s][x2]`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        channel: ChannelSizes,
        sizes: AuxSizes,
        v_given_s: Vec<f64>,
        u: Vec<f64>,
        u1_given_u: Vec<f64>,
        u2_given_u: Vec<f64>,
        x1: Vec<f64>,
        x2: Vec<f64>,
    ) -> Result<Self> {
        let a = |n: &str, s: usize| alpha(n, s);
        Ok(AuxChain {
            sizes,
            s_size: channel.s,
            x_sizes: (channel.x1, channel.x2),
            v_given_s: ConditionalPmf::new(vec![a(var::V, sizes.v)?], vec![a(var::S, channel.s)?], v_given_s)?,
            u: ConditionalPmf::marginal(a(var::U, sizes.u)?, u)?,
            u1_given_u: ConditionalPmf::new(vec![a(var::U1, sizes.u1)?], vec![a(var::U, sizes.u)?], u1_given_u)?,
            u2_given_u: ConditionalPmf::new(vec![a(var::U2, sizes.u2)?], vec![a(var::U, sizes.u)?], u2_given_u)?,
            x1_given_uu1s: ConditionalPmf::new(
                vec![a(var::X1, channel.x1)?],
                vec![a(var::U, sizes.u)?, a(var::U1, sizes.u1)?, a(var::S, channel.s)?],
                x1,
            )?,
            x2_given_uu2s: ConditionalPmf::new(
                vec![a(var::X2, channel.x2)?],
                vec![a(var::U, sizes.u)?, a(var::U2, sizes.u2)?, a(var::S, channel.s)?],
                x2,
            )?,
        })
    }

    /// Auxiliary chain with deterministic encoders `x1(u, u1, s)` and `x2(u, u2, s)`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_maps(
        channel: ChannelSizes,
        sizes: AuxSizes,
        v_given_s: Vec<f64>,
        u: Vec<f64>,
        u1_given_u: Vec<f64>,
        u2_given_u: Vec<f64>,
        x1: impl Fn(usize, usize, usize) -> usize,
        x2: impl Fn(usize, usize, usize) -> usize,
    ) -> Result<Self> {
        let map = |n1: usize, xn: usize, f: &dyn Fn(usize, usize, usize) -> usize| -> Result<Vec<f64>> {
            let mut w = vec![0.0; sizes.u * n1 * channel.s * xn];
            for u in 0..sizes.u {
                for a in 0..n1 {
                    for s in 0..channel.s {
                        let x = f(u, a, s);
                        if x >= xn {
                            return Err(Error::invalid(format!("encoder output {x} out of range")));
                        }
                        w[((u * n1 + a) * channel.s + s) * xn + x] = 1.0;
                    }
                }
            }
            Ok(w)
        };
        let w1 = map(sizes.u1, channel.x1, &x1)?;
        let w2 = map(sizes.u2, channel.x2, &x2)?;
        Self::new(channel, sizes, v_given_s, u, u1_given_u, u2_given_u, w1, w2)
    }

    /// Singleton auxiliaries; the inputs depend on the current state only.
    /// `x1_given_s[s][x1]`, `x2_given_s[s][x2]`.
    pub fn degenerate(channel: ChannelSizes, x1_given_s: Vec<f64>, x2_given_s: Vec<f64>) -> Result<Self> {
        Self::new(
            channel,
            AuxSizes::trivial(),
            vec![1.0; channel.s],
            vec![1.0],
            vec![1.0],
            vec![1.0],
            x1_given_s,
            x2_given_s,
        )
    }

    pub fn sizes(&self) -> AuxSizes {
        self.sizes
    }

    pub fn v_given_s(&self) -> &ConditionalPmf {
        &self.v_given_s
    }
    pub fn p_u(&self) -> &ConditionalPmf {
        &self.u
    }
    pub fn u1_given_u(&self) -> &ConditionalPmf {
        &self.u1_given_u
    }
    pub fn u2_given_u(&self) -> &ConditionalPmf {
        &self.u2_given_u
    }
    pub fn x1_given_uu1s(&self) -> &ConditionalPmf {
        &self.x1_given_uu1s
    }
    pub fn x2_given_uu2s(&self) -> &ConditionalPmf {
        &self.x2_given_uu2s
    }

    /// `P(x1 | u, u1, s)`.
    #[inline]
    pub fn p_x1(&self, u: usize, u1: usize, s: usize, x1: usize) -> f64 {
        self.x1_given_uu1s.get((u * self.sizes.u1 + u1) * self.s_size + s, x1)
    }

    /// `P(x2 | u, u2, s)`.
    #[inline]
    pub fn p_x2(&self, u: usize, u2: usize, s: usize, x2: usize) -> f64 {
        self.x2_given_uu2s.get((u * self.sizes.u2 + u2) * self.s_size + s, x2)
    }

    /// Marginal `P_V(v) = sum_s P_S(s) P(v|s)`.
    pub fn p_v(&self, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.sizes.v];
        for (s, ps) in state.iter().enumerate() {
            for (v, o) in out.iter_mut().enumerate() {
                *o += ps * self.v_given_s.get(s, v);
            }
        }
        out
    }

    fn check_against(&self, c: ChannelSizes) -> Result<()> {
        if self.s_size != c.s || self.x_sizes != (c.x1, c.x2) {
            return Err(Error::invalid(format!(
                "auxiliary chain built for |S|={}, |X1|={}, |X2|={} but channel has |S|={}, |X1|={}, |X2|={}",
                self.s_size, self.x_sizes.0, self.x_sizes.1, c.s, c.x1, c.x2
            )));
        }
        Ok(())
    }

    pub fn to_spec(&self) -> AuxSpec {
        let a = self.sizes;
        let (nx1, nx2) = self.x_sizes;
        let ns = self.s_size;
        let rows = |c: &ConditionalPmf| -> Vec<Vec<f64>> { (0..c.given_len()).map(|g| c.slice(g).to_vec()).collect() };
        let enc = |n: usize, nx: usize, f: &dyn Fn(usize, usize, usize, usize) -> f64| {
            (0..a.u)
                .map(|u| (0..n).map(|b| (0..ns).map(|s| (0..nx).map(|x| f(u, b, s, x)).collect()).collect()).collect())
                .collect()
        };
        AuxSpec {
            v_given_s: rows(&self.v_given_s),
            u: self.u.weights().to_vec(),
            u1_given_u: rows(&self.u1_given_u),
            u2_given_u: rows(&self.u2_given_u),
            x1_given_u_u1_s: enc(a.u1, nx1, &|u, b, s, x| self.p_x1(u, b, s, x)),
            x2_given_u_u2_s: enc(a.u2, nx2, &|u, b, s, x| self.p_x2(u, b, s, x)),
        }
    }
}

/// Joint law of `(S, V, U, U1, U2, X1, X2, Y, Z)` in that order.
pub fn assemble_joint(channel: &ChannelModel, aux: &AuxChain) -> Result<LabeledJointPmf> {
    aux.check_against(channel.sizes())?;
    let c = channel.sizes();
    let a = aux.sizes();
    let dims = [c.s, a.v, a.u, a.u1, a.u2, c.x1, c.x2, c.y, c.z];
    let len = tensor_len(dims)?;
    let yz = c.y * c.z;
    let mut w = Vec::with_capacity(len);
    for s in 0..c.s {
        let ps = channel.p_s(s);
        for v in 0..a.v {
            let psv = ps * aux.v_given_s.get(s, v);
            for u in 0..a.u {
                let pu = psv * aux.u.weights()[u];
                for u1 in 0..a.u1 {
                    let pu1 = pu * aux.u1_given_u.get(u, u1);
                    for u2 in 0..a.u2 {
                        let pu2 = pu1 * aux.u2_given_u.get(u, u2);
                        for x1 in 0..c.x1 {
                            let px1 = pu2 * aux.p_x1(u, u1, s, x1);
                            for x2 in 0..c.x2 {
                                let px2 = px1 * aux.p_x2(u, u2, s, x2);
                                let out = channel.output_slice(x1, x2, s);
                                debug_assert_eq!(out.len(), yz);
                                w.extend(out.iter().map(|k| px2 * k));
                            }
                        }
                    }
                }
            }
        }
    }
    let vars = var::ALL.iter().zip(dims).map(|(n, d)| alpha(n, d)).collect::<Result<Vec<_>>>()?;
    // The product of normalised factors can drift from 1 by a few ulps per entry.
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Internal(format!("assembled joint sums to {total}")));
    }
    LabeledJointPmf::new(vars, w)
}

/// JSON form of a [`ChannelModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub alphabets: ChannelSizes,
    pub state_dist: Vec<f64>,
    /// Indexed `[x1][x2][s][y][z]`.
    pub kernel: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

fn flatten_checked<T, F>(what: &str, rows: &[T], expect: usize, f: F) -> Result<()>
where
    F: FnMut(&T) -> Result<()>,
{
    if rows.len() != expect {
        return Err(Error::invalid(format!("{what}: expected {expect} entries, found {}", rows.len())));
    }
    rows.iter().try_for_each(f)
}

impl TryFrom<&ChannelSpec> for ChannelModel {
    type Error = Error;

    fn try_from(spec: &ChannelSpec) -> Result<Self> {
        let c = spec.alphabets;
        let mut flat = Vec::new();
        flatten_checked("kernel[x1]", &spec.kernel, c.x1, |a| {
            flatten_checked("kernel[x1][x2]", a, c.x2, |b| {
                flatten_checked("kernel[x1][x2][s]", b, c.s, |d| {
                    flatten_checked("kernel[x1][x2][s][y]", d, c.y, |e| {
                        if e.len() != c.z {
                            return Err(Error::invalid("kernel[x1][x2][s][y]: wrong |Z|"));
                        }
                        flat.extend_from_slice(e);
                        Ok(())
                    })
                })
            })
        })?;
        if spec.state_dist.len() != c.s {
            return Err(Error::invalid("state_dist length differs from alphabets.s"));
        }
        ChannelModel::new(c, spec.state_dist.clone(), flat)
    }
}

/// JSON form of an [`AuxChain`]; auxiliary cardinalities are implied by the
/// array shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxSpec {
    /// `[s][v]`
    pub v_given_s: Vec<Vec<f64>>,
    /// `[u]`
    pub u: Vec<f64>,
    /// `[u][u1]`
    pub u1_given_u: Vec<Vec<f64>>,
    /// `[u][u2]`
    pub u2_given_u: Vec<Vec<f64>>,
    /// `[u][u1][s][x1]`
    pub x1_given_u_u1_s: Vec<Vec<Vec<Vec<f64>>>>,
    /// `[u][u2][s][x2]`
    pub x2_given_u_u2_s: Vec<Vec<Vec<Vec<f64>>>>,
}

impl AuxSpec {
    pub fn build(&self, channel: ChannelSizes) -> Result<AuxChain> {
        let width = |rows: &[Vec<f64>], what: &str| -> Result<usize> {
            rows.first().map(|r| r.len()).filter(|&n| n > 0).ok_or_else(|| Error::invalid(format!("{what} is empty")))
        };
        let sizes = AuxSizes {
            v: width(&self.v_given_s, "v_given_s")?,
            u: self.u.len(),
            u1: width(&self.u1_given_u, "u1_given_u")?,
            u2: width(&self.u2_given_u, "u2_given_u")?,
        };
        let flat2 = |rows: &[Vec<f64>], n: usize, m: usize, what: &str| -> Result<Vec<f64>> {
            let mut out = Vec::new();
            flatten_checked(what, rows, n, |r| {
                if r.len() != m {
                    return Err(Error::invalid(format!("{what}: ragged row")));
                }
                out.extend_from_slice(r);
                Ok(())
            })?;
            Ok(out)
        };
        let flat4 = |t: &[Vec<Vec<Vec<f64>>>], nb: usize, nx: usize, what: &str| -> Result<Vec<f64>> {
            let mut out = Vec::new();
            flatten_checked(what, t, sizes.u, |a| {
                flatten_checked(what, a, nb, |b| {
                    flatten_checked(what, b, channel.s, |d| {
                        if d.len() != nx {
                            return Err(Error::invalid(format!("{what}: wrong input alphabet size")));
                        }
                        out.extend_from_slice(d);
                        Ok(())
                    })
                })
            })?;
            Ok(out)
        };
        AuxChain::new(
            channel,
            sizes,
            flat2(&self.v_given_s, channel.s, sizes.v, "v_given_s")?,
            self.u.clone(),
            flat2(&self.u1_given_u, sizes.u, sizes.u1, "u1_given_u")?,
            flat2(&self.u2_given_u, sizes.u, sizes.u2, "u2_given_u")?,
            flat4(&self.x1_given_u_u1_s, sizes.u1, channel.x1, "x1_given_u_u1_s")?,
            flat4(&self.x2_given_u_u2_s, sizes.u2, channel.x2, "x2_given_u_u2_s")?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::prob::binary_entropy;

    #[test]
    fn degenerate_aux_reduces_to_state_dependent_inputs() {
        let ch = catalog::example1_channel(0.3).unwrap();
        let px1 = vec![0.2, 0.8, 0.6, 0.4];
        let px2 = vec![1.0, 0.0, 0.5, 0.5];
        let aux = AuxChain::degenerate(ch.sizes(), px1.clone(), px2.clone()).unwrap();
        let j = assemble_joint(&ch, &aux).unwrap();
        let m = j.marginalize(&["S", "X1", "X2", "Y", "Z"]).unwrap();
        let mut idx = 0;
        for s in 0..2 {
            for x1 in 0..2 {
                for x2 in 0..2 {
                    for y in 0..2 {
                        for z in 0..2 {
                            let want = ch.p_s(s) * px1[s * 2 + x1] * px2[s * 2 + x2] * ch.w(x1, x2, s, y, z);
                            assert!((m.weights()[idx] - want).abs() < 1e-15);
                            idx += 1;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn example1_assignment_terms() {
        for p in [0.2, 0.6, 0.9] {
            let ch = catalog::example1_channel(p).unwrap();
            let aux = catalog::example1_scheme1_aux(&ch).unwrap();
            let j = assemble_joint(&ch, &aux).unwrap();
            let a = j.mutual_information(&["U1"], &["Y"], &["V", "U", "U2"]).unwrap();
            assert!((a - (1.0 - p)).abs() < 1e-12, "I(U1;Y|V,U,U2) = {a}");
            let b = j.mutual_information(&["V", "U", "U1", "U2"], &["Y"], &[]).unwrap()
                - j.mutual_information(&["V"], &["S"], &[]).unwrap();
            assert!((b - (1.0 - binary_entropy(p).unwrap())).abs() < 1e-12);
        }
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let ch = catalog::example1_channel(0.3).unwrap();
        let other = ChannelSizes { s: 3, ..ch.sizes() };
        let aux = AuxChain::degenerate(other, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
            .unwrap();
        assert!(matches!(assemble_joint(&ch, &aux), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn channel_spec_round_trip() {
        let ch = catalog::example2_channel(0.25, 0.1).unwrap();
        let spec = ch.to_spec();
        let back = ChannelModel::try_from(&spec).unwrap();
        assert_eq!(back, ch);
        let aux = catalog::example1_scheme1_aux(&catalog::example1_channel(0.4).unwrap()).unwrap();
        let back = aux.to_spec().build(catalog::example1_channel(0.4).unwrap().sizes()).unwrap();
        assert_eq!(back, aux);
    }

    #[test]
    fn malformed_channel_spec_is_rejected() {
        let mut spec = catalog::example1_channel(0.3).unwrap().to_spec();
        spec.kernel[0][1].pop();
        assert!(ChannelModel::try_from(&spec).is_err());
        let mut spec = catalog::example1_channel(0.3).unwrap().to_spec();
        spec.state_dist = vec![0.5, 0.6];
        assert!(ChannelModel::try_from(&spec).is_err());
    }
}
