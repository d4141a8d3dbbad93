use std::collections::HashMap;

use super::bundle::MiBundle;
use super::polygon::{RatePoint, RatePolygon};
use super::system::LinearConstraintSystem;
use crate::error::{Error, Result};

/// Feasibility slack used when enumerating vertices.
pub const FEAS_TOL: f64 = 1e-10;
/// Outer box used to detect unbounded projections.
const BOX: f64 = 1e4;
/// Row budget for Fourier–Motzkin elimination.
const MAX_ROWS: usize = 200_000;

/// A half-plane `a[0] x + a[1] y <= b` in the kept coordinates.
pub type PlaneRow = ([f64; 2], f64);

#[derive(Clone)]
struct Row {
    a: Vec<f64>,
    b: f64,
}

fn normalized(mut r: Row) -> Option<Row> {
    let m = r.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return None;
    }
    r.a.iter_mut().for_each(|v| *v /= m);
    r.b /= m;
    Some(r)
}

fn dedupe(rows: Vec<Row>) -> Vec<Row> {
    let mut best: HashMap<Vec<i64>, Row> = HashMap::new();
    for r in rows {
        let key: Vec<i64> = r.a.iter().map(|v| (v * 1e9).round() as i64).collect();
        match best.get(&key) {
            Some(old) if old.b <= r.b => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    let mut out: Vec<Row> = best.into_values().collect();
    out.sort_by(|x, y| {
        x.a.iter().zip(&y.a).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(x.b.total_cmp(&y.b))
    });
    out
}

/// Eliminates every coordinate except `keep` by Fourier–Motzkin.
///
/// Returns `None` when the system is infeasible. Strict rows are closed.
pub fn eliminate_to_plane(system: &LinearConstraintSystem, keep: [&str; 2]) -> Result<Option<Vec<PlaneRow>>> {
    let kx = system.index(keep[0]).ok_or_else(|| Error::InvalidArgument(format!("unknown coordinate {}", keep[0])))?;
    let ky = system.index(keep[1]).ok_or_else(|| Error::InvalidArgument(format!("unknown coordinate {}", keep[1])))?;
    let mut rows: Vec<Row> = Vec::new();
    for c in &system.constraints {
        let r = Row { a: c.coeffs.clone(), b: c.rhs };
        match normalized(r.clone()) {
            Some(r) => rows.push(r),
            None if r.b < -FEAS_TOL => return Ok(None),
            None => {}
        }
    }
    let mut rows = dedupe(rows);
    for j in 0..system.coords.len() {
        if j == kx || j == ky {
            continue;
        }
        let (mut pos, mut neg, mut next) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.a[j] > 0.0 {
                pos.push(r);
            } else if r.a[j] < 0.0 {
                neg.push(r);
            } else {
                next.push(r);
            }
        }
        if next.len() + pos.len() * neg.len() > MAX_ROWS {
            return Err(Error::Resource(format!(
                "projection needs more than {MAX_ROWS} rows while eliminating {}",
                system.coords[j]
            )));
        }
        for p in &pos {
            for q in &neg {
                let (sp, sq) = (-q.a[j], p.a[j]);
                let mut a: Vec<f64> = p.a.iter().zip(&q.a).map(|(x, y)| sp * x + sq * y).collect();
                a[j] = 0.0;
                let r = Row { a, b: sp * p.b + sq * q.b };
                match normalized(r.clone()) {
                    Some(r) => next.push(r),
                    None if r.b < -FEAS_TOL => return Ok(None),
                    None => {}
                }
            }
        }
        rows = dedupe(next);
    }
    Ok(Some(rows.into_iter().map(|r| ([r.a[kx], r.a[ky]], r.b)).collect()))
}

/// Polygon cut out of `[0, bound]^2` by `rows`; vertices whose coordinates
/// sit within `FEAS_TOL` below zero are snapped to zero.
pub fn clip_to_box(axes: [&str; 2], rows: &[PlaneRow], bound: f64) -> RatePolygon {
    let mut all: Vec<PlaneRow> = rows.to_vec();
    all.push(([-1.0, 0.0], 0.0));
    all.push(([0.0, -1.0], 0.0));
    all.push(([1.0, 0.0], bound));
    all.push(([0.0, 1.0], bound));
    let mut pts: Vec<RatePoint> = Vec::new();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let ((a, b), (c, d)) = (all[i], all[j]);
            let det = a[0] * c[1] - a[1] * c[0];
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (b * c[1] - a[1] * d) / det;
            let y = (a[0] * d - b * c[0]) / det;
            let ok = all.iter().all(|(n, o)| n[0] * x + n[1] * y <= o + FEAS_TOL * (1.0 + o.abs()));
            if ok {
                let snap = |v: f64| if v < 0.0 && v > -FEAS_TOL { 0.0 } else { v };
                pts.push([snap(x), snap(y)]);
            }
        }
    }
    RatePolygon::hull_of(axes, &pts)
}

/// Closure of the projection of a constraint system onto `keep`.
///
/// The empty set comes back as a polygon with no vertices; a projection
/// that reaches the outer box is reported as an internal error.
pub fn project_polytope(system: &LinearConstraintSystem, keep: [&str; 2]) -> Result<RatePolygon> {
    let poly = project_polytope_within(system, keep, BOX)?;
    if poly.vertices.iter().flatten().any(|&v| v >= BOX * (1.0 - 1e-9)) {
        return Err(Error::Internal(format!("projection onto {keep:?} is unbounded")));
    }
    Ok(poly)
}

/// Like [`project_polytope`] but clips to `[0, bound]^2` instead of failing
/// on unbounded directions.
pub fn project_polytope_within(system: &LinearConstraintSystem, keep: [&str; 2], bound: f64) -> Result<RatePolygon> {
    match eliminate_to_plane(system, keep)? {
        None => Ok(RatePolygon::empty(keep)),
        Some(rows) => Ok(clip_to_box(keep, &rows, bound)),
    }
}

/// Projection of the R11 family in closed form.
pub fn scheme1_closed_form(b: &MiBundle) -> RatePolygon {
    let axes = ["R1", "R2"];
    let k = b.key_budget();
    if k < -FEAS_TOL {
        return RatePolygon::empty(axes);
    }
    let k = k.max(0.0);
    let (a1, a2, rs) = (b.u1_y_vuu2, b.u2_y_vuu1, b.r_sum());
    let (g1, g2) = (a1 - b.u1_z_su, a2 - b.u2_z_su);
    let rows = [
        ([1.0, 0.0], a1.min(g1 + k)),
        ([0.0, 1.0], a2.min(g2 + k)),
        ([1.0, 1.0], rs.min(rs - b.u1u2_z_su + k).min(g1 + g2 + k)),
    ];
    if rows.iter().any(|r| r.1 < -FEAS_TOL) {
        return RatePolygon::empty(axes);
    }
    clip_to_box(axes, &rows, BOX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::system::{region_system, RegionId};
    use crate::region::testutil::random_bundle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_bound_clips_to_quadrant() {
        let mut s = LinearConstraintSystem::nonnegative(&["R1", "R2"]);
        s.push(&[("R1", 1.0)], 0.5, "R1 <= c");
        let p = project_polytope_within(&s, ["R1", "R2"], 2.0).unwrap();
        assert_eq!(p.vertices, vec![[0.0, 0.0], [0.5, 0.0], [0.5, 2.0], [0.0, 2.0]]);
        assert!(matches!(project_polytope(&s, ["R1", "R2"]), Err(Error::Internal(_))));
    }

    #[test]
    fn fourier_motzkin_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let b = random_bundle(&mut rng);
            let fm = project_polytope(&region_system(&b, RegionId::R11), ["R1", "R2"]).unwrap();
            let cf = scheme1_closed_form(&b);
            assert_eq!(fm.is_empty(), cf.is_empty(), "{b:?}");
            assert!(fm.hausdorff(&cf) < 1e-9, "{:?} vs {:?}", fm.vertices, cf.vertices);
        }
    }

    #[test]
    fn zero_key_gives_plain_wiretap_bounds() {
        let b = MiBundle {
            u1_y_vuu2: 0.6,
            u2_y_vuu1: 0.5,
            u1u2_y_vu: 0.9,
            vuu1u2_y: 0.9,
            u1_z_su: 0.1,
            u2_z_su: 0.2,
            u1u2_z_su: 0.25,
            ..Default::default()
        };
        let p = scheme1_closed_form(&b);
        let want = clip_to_box(["R1", "R2"], &[([1.0, 0.0], 0.5), ([0.0, 1.0], 0.3), ([1.0, 1.0], 0.65)], BOX);
        assert!(p.hausdorff(&want) < 1e-12);
    }

    #[test]
    fn infeasible_key_budget_is_empty() {
        let b = MiBundle { v_uz: 0.2, ..Default::default() };
        assert!(scheme1_closed_form(&b).is_empty());
        assert!(project_polytope(&region_system(&b, RegionId::R11), ["R1", "R2"]).unwrap().is_empty());
    }

    #[test]
    fn scheme2_projection_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let b = random_bundle(&mut rng);
            for id in [RegionId::R21, RegionId::R22, RegionId::R23, RegionId::R12, RegionId::R13] {
                let sys = region_system(&b, id);
                let p = project_polytope(&sys, ["R1", "R2"]).unwrap();
                for v in &p.vertices {
                    assert!(v[0] >= 0.0 && v[1] >= 0.0);
                }
            }
        }
    }
}
