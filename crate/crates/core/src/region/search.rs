use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::{mi_bundle, MiBundle};
use super::polygon::{RatePoint, RatePolygon};
use super::project::{project_polytope, scheme1_closed_form};
use super::system::{region_system, RegionId};
use crate::error::{Error, Result};
use crate::prob::{assemble_joint, AuxChain, AuxSizes, AuxSpec, ChannelModel, ChannelSizes};

/// How auxiliary distributions are explored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Auxiliary cardinalities; `None` means `|V| = |S|` and binary `U`, `U1`, `U2`.
    pub aux_sizes: Option<AuxSizes>,
    /// Lattice resolution per probability simplex (0 disables the grid).
    /// Grid encoders are deterministic maps.
    pub grid: usize,
    /// Number of seeded Dirichlet samples.
    pub random_samples: usize,
    pub seed: u64,
    /// Upper bound on the number of candidates evaluated.
    pub max_candidates: usize,
    /// Explicit auxiliary chains always included in the union.
    pub fixed: Vec<AuxSpec>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            aux_sizes: None,
            grid: 0,
            random_samples: 2000,
            seed: 0,
            max_candidates: 1_000_000,
            fixed: Vec::new(),
        }
    }
}

impl SearchConfig {
    /// Only the given chains.
    pub fn fixed_only(fixed: Vec<AuxSpec>) -> Self {
        SearchConfig { random_samples: 0, fixed, ..Default::default() }
    }

    /// Cardinalities actually searched for `region` on `channel`.
    pub fn sizes_for(&self, channel: ChannelSizes, region: RegionId) -> AuxSizes {
        let mut sizes = self.aux_sizes.unwrap_or(AuxSizes { v: channel.s, u: 2, u1: 2, u2: 2 });
        if region.drops_v() {
            sizes.v = 1;
        }
        if region.is_scheme2() {
            sizes.u = 1;
        }
        sizes
    }
}

/// Where a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum CandidateSource {
    Baseline,
    Fixed(usize),
    Grid(usize),
    Random(usize),
}

/// A polygon vertex with the auxiliary chain that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexOrigin {
    pub vertex: RatePoint,
    pub source: CandidateSource,
    pub aux: AuxSpec,
}

/// Result of a region search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSearch {
    pub region: RegionId,
    pub polygon: RatePolygon,
    pub origins: Vec<VertexOrigin>,
    pub candidates: usize,
}

/// Normalised vector of `k` independent unit exponentials, i.e. a flat
/// Dirichlet draw.
pub(crate) fn dirichlet(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn dirichlet_rows(rng: &mut impl Rng, rows: usize, k: usize) -> Vec<f64> {
    (0..rows).flat_map(|_| dirichlet(rng, k)).collect()
}

fn one_hot_rows(rng: &mut impl Rng, rows: usize, k: usize) -> Vec<f64> {
    let mut w = vec![0.0; rows * k];
    for r in 0..rows {
        w[r * k + rng.random_range(0..k)] = 1.0;
    }
    w
}

/// Per-index generator so that sample sets grow by extension.
fn candidate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Random auxiliary chain: flat Dirichlet factors, with deterministic
/// encoders on every other index.
pub fn random_aux(channel: ChannelSizes, sizes: AuxSizes, seed: u64, index: usize) -> Result<AuxChain> {
    let mut rng = candidate_rng(seed, index);
    let v = dirichlet_rows(&mut rng, channel.s, sizes.v);
    let u = dirichlet(&mut rng, sizes.u);
    let u1 = dirichlet_rows(&mut rng, sizes.u, sizes.u1);
    let u2 = dirichlet_rows(&mut rng, sizes.u, sizes.u2);
    let (x1, x2) = if index.is_multiple_of(2) {
        (
            dirichlet_rows(&mut rng, sizes.u * sizes.u1 * channel.s, channel.x1),
            dirichlet_rows(&mut rng, sizes.u * sizes.u2 * channel.s, channel.x2),
        )
    } else {
        (
            one_hot_rows(&mut rng, sizes.u * sizes.u1 * channel.s, channel.x1),
            one_hot_rows(&mut rng, sizes.u * sizes.u2 * channel.s, channel.x2),
        )
    };
    AuxChain::new(channel, sizes, v, u, u1, u2, x1, x2)
}

/// Points of the probability simplex with `k` entries in multiples of `1/r`.
pub(crate) fn simplex_lattice(k: usize, r: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / r as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k - 1, left - c, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, r, r, &mut Vec::new(), &mut out);
    out
}

/// Mixed-radix enumeration of the deterministic-encoder grid.
struct Grid {
    channel: ChannelSizes,
    sizes: AuxSizes,
    v_pts: Vec<Vec<f64>>,
    u_pts: Vec<Vec<f64>>,
    u1_pts: Vec<Vec<f64>>,
    u2_pts: Vec<Vec<f64>>,
    radices: Vec<usize>,
}

impl Grid {
    fn new(channel: ChannelSizes, sizes: AuxSizes, r: usize, budget: usize) -> Result<Self> {
        let v_pts = simplex_lattice(sizes.v, r);
        let u_pts = simplex_lattice(sizes.u, r);
        let u1_pts = simplex_lattice(sizes.u1, r);
        let u2_pts = simplex_lattice(sizes.u2, r);
        let mut radices = Vec::new();
        radices.extend(std::iter::repeat_n(v_pts.len(), channel.s));
        radices.push(u_pts.len());
        radices.extend(std::iter::repeat_n(u1_pts.len(), sizes.u));
        radices.extend(std::iter::repeat_n(u2_pts.len(), sizes.u));
        radices.extend(std::iter::repeat_n(channel.x1, sizes.u * sizes.u1 * channel.s));
        radices.extend(std::iter::repeat_n(channel.x2, sizes.u * sizes.u2 * channel.s));
        let total = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r).filter(|&t| t <= budget));
        if total.is_none() {
            return Err(Error::Resource(format!("grid of resolution {r} exceeds the candidate budget of {budget}")));
        }
        Ok(Grid { channel, sizes, v_pts, u_pts, u1_pts, u2_pts, radices })
    }

    fn len(&self) -> usize {
        self.radices.iter().product()
    }

    fn get(&self, mut index: usize) -> Result<AuxChain> {
        let mut digits = Vec::with_capacity(self.radices.len());
        for &r in self.radices.iter().rev() {
            digits.push(index % r);
            index /= r;
        }
        digits.reverse();
        let mut it = digits.into_iter();
        let (c, s) = (self.channel, self.sizes);
        let mut take =
            |n: usize, pts: &[Vec<f64>]| -> Vec<f64> { (0..n).flat_map(|_| pts[it.next().unwrap()].clone()).collect() };
        let v = take(c.s, &self.v_pts);
        let u = take(1, &self.u_pts);
        let u1 = take(s.u, &self.u1_pts);
        let u2 = take(s.u, &self.u2_pts);
        let mut hot = |rows: usize, k: usize| -> Vec<f64> {
            let mut w = vec![0.0; rows * k];
            for r in 0..rows {
                w[r * k + it.next().unwrap()] = 1.0;
            }
            w
        };
        let x1 = hot(s.u * s.u1 * c.s, c.x1);
        let x2 = hot(s.u * s.u2 * c.s, c.x2);
        AuxChain::new(c, s, v, u, u1, u2, x1, x2)
    }
}

/// Projected polygon of one region family for a fixed auxiliary chain.
pub fn region_polygon(channel: &ChannelModel, aux: &AuxChain, region: RegionId) -> Result<RatePolygon> {
    let bundle = mi_bundle(&assemble_joint(channel, aux)?)?;
    bundle_polygon(&bundle, region)
}

/// Projected polygon of one region family for a fixed bundle.
pub fn bundle_polygon(bundle: &MiBundle, region: RegionId) -> Result<RatePolygon> {
    if region == RegionId::R11 {
        return Ok(scheme1_closed_form(bundle));
    }
    project_polytope(&region_system(bundle, region), region.axes())
}

fn baseline(channel: ChannelSizes, sizes: AuxSizes) -> Result<AuxChain> {
    let mut x1 = vec![0.0; sizes.u * sizes.u1 * channel.s * channel.x1];
    x1.iter_mut().step_by(channel.x1).for_each(|v| *v = 1.0);
    let mut x2 = vec![0.0; sizes.u * sizes.u2 * channel.s * channel.x2];
    x2.iter_mut().step_by(channel.x2).for_each(|v| *v = 1.0);
    let point = |k: usize| {
        let mut w = vec![0.0; k];
        w[0] = 1.0;
        w
    };
    AuxChain::new(
        channel,
        sizes,
        (0..channel.s).flat_map(|_| point(sizes.v)).collect(),
        point(sizes.u),
        (0..sizes.u).flat_map(|_| point(sizes.u1)).collect(),
        (0..sizes.u).flat_map(|_| point(sizes.u2)).collect(),
        x1,
        x2,
    )
}

type MakeAux = Box<dyn Fn() -> Result<AuxChain> + Send + Sync>;

/// Enumerates every candidate of a search, in a fixed order.
pub(crate) fn candidates(
    channel: ChannelSizes,
    region: RegionId,
    search: &SearchConfig,
) -> Result<Vec<(CandidateSource, MakeAux)>> {
    let sizes = search.sizes_for(channel, region);
    let grid = if search.grid > 0 {
        Some(std::sync::Arc::new(Grid::new(channel, sizes, search.grid, search.max_candidates)?))
    } else {
        None
    };
    let total = 1 + search.fixed.len() + grid.as_ref().map_or(0, |g| g.len()) + search.random_samples;
    if total > search.max_candidates {
        return Err(Error::Resource(format!("{total} candidates exceed the budget of {}", search.max_candidates)));
    }
    let mut out: Vec<(CandidateSource, MakeAux)> = Vec::with_capacity(total);
    out.push((CandidateSource::Baseline, Box::new(move || baseline(channel, sizes))));
    for (i, spec) in search.fixed.iter().enumerate() {
        let spec = spec.clone();
        out.push((CandidateSource::Fixed(i), Box::new(move || spec.build(channel))));
    }
    if let Some(g) = grid {
        for i in 0..g.len() {
            let g = g.clone();
            out.push((CandidateSource::Grid(i), Box::new(move || g.get(i))));
        }
    }
    let seed = search.seed;
    for i in 0..search.random_samples {
        out.push((CandidateSource::Random(i), Box::new(move || random_aux(channel, sizes, seed, i))));
    }
    Ok(out)
}

/// Convex hull of the union, over searched auxiliary chains, of the
/// projected region polygons.
pub fn achievable_region(channel: &ChannelModel, region: RegionId, search: &SearchConfig) -> Result<RegionSearch> {
    let cands = candidates(channel.sizes(), region, search)?;
    let polys: Vec<(CandidateSource, RatePolygon)> = cands
        .par_iter()
        .map(|(src, make)| {
            let aux = make()?;
            Ok((*src, region_polygon(channel, &aux, region)?))
        })
        .collect::<Result<_>>()?;
    let polygon = RatePolygon::union_hull(region.axes(), polys.iter().map(|(_, p)| p));
    let mut origins = Vec::with_capacity(polygon.vertices.len());
    for &v in &polygon.vertices {
        let hit = polys.iter().position(|(_, p)| p.vertices.contains(&v));
        if let Some(i) = hit {
            let src = polys[i].0;
            let aux = (cands[i].1)()?.to_spec();
            origins.push(VertexOrigin { vertex: v, source: src, aux });
        }
    }
    Ok(RegionSearch { region, polygon, origins, candidates: cands.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::prob::{binary_entropy, ChannelSizes};

    fn small() -> SearchConfig {
        SearchConfig { random_samples: 64, seed: 9, ..Default::default() }
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(simplex_lattice(2, 4).len(), 5);
        assert_eq!(simplex_lattice(3, 4).len(), 15);
        assert!(simplex_lattice(3, 3).iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn useless_channel_gives_origin() {
        let sizes = ChannelSizes { x1: 2, x2: 2, s: 2, y: 2, z: 2 };
        let ch = ChannelModel::deterministic(sizes, vec![0.5, 0.5], |_, _, _| (0, 0)).unwrap();
        let r = achievable_region(&ch, RegionId::R11, &small()).unwrap();
        assert_eq!(r.polygon.vertices, vec![[0.0, 0.0]]);
    }

    #[test]
    fn example1_fixed_assignment_reaches_point() {
        for p in [0.6, 0.75, 0.9] {
            let ch = catalog::example1_channel(p).unwrap();
            let aux = catalog::example1_scheme1_aux(&ch).unwrap().to_spec();
            let r = achievable_region(&ch, RegionId::R11, &SearchConfig::fixed_only(vec![aux])).unwrap();
            let target = (1.0 - p).min(1.0 - binary_entropy(p).unwrap());
            assert!(r.polygon.contains([target, 0.0], 1e-9), "p = {p}");
            assert!(r.origins.iter().any(|o| o.source == CandidateSource::Fixed(0)));
        }
    }

    #[test]
    fn example1b_scheme2_reaches_point() {
        let p = 0.1;
        let ch = catalog::example1b_channel(p).unwrap();
        let aux = catalog::example1b_scheme2_aux(&ch).unwrap().to_spec();
        let search = SearchConfig::fixed_only(vec![aux]);
        let hp = binary_entropy(p).unwrap();
        let found = [RegionId::R21, RegionId::R22, RegionId::R23]
            .iter()
            .any(|&id| achievable_region(&ch, id, &search).unwrap().polygon.contains([0.0, hp], 1e-9));
        assert!(found);
    }

    #[test]
    fn deterministic_and_nested() {
        let ch = catalog::example1_channel(0.3).unwrap();
        let a = achievable_region(&ch, RegionId::R12, &small()).unwrap();
        let b = achievable_region(&ch, RegionId::R12, &small()).unwrap();
        assert_eq!(a, b);
        let big = SearchConfig { random_samples: 128, ..small() };
        let c = achievable_region(&ch, RegionId::R12, &big).unwrap();
        assert!(c.polygon.contains_polygon(&a.polygon, 1e-9));
    }

    #[test]
    fn grid_budget_is_enforced() {
        let ch = catalog::example1_channel(0.3).unwrap();
        let s = SearchConfig { grid: 4, max_candidates: 1000, ..small() };
        assert!(matches!(achievable_region(&ch, RegionId::R11, &s), Err(Error::Resource(_))));
        let s = SearchConfig { grid: 1, random_samples: 0, aux_sizes: Some(AuxSizes::trivial()), ..small() };
        let r = achievable_region(&ch, RegionId::R3, &s).unwrap();
        assert_eq!(r.candidates, 1 + 16);
    }
}
