use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in a rate plane, `[first axis, second axis]`.
pub type RatePoint = [f64; 2];

/// Supporting half-plane `normal · x <= offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl HalfPlane {
    pub fn slack(&self, p: RatePoint) -> f64 {
        self.offset - (self.normal[0] * p[0] + self.normal[1] * p[1])
    }
}

/// Convex polygon in a rate plane.
///
/// Vertices run counterclockwise from the lexicographically smallest one.
/// Zero vertices means the empty set; one or two vertices are the
/// degenerate point and segment cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePolygon {
    pub axes: [String; 2],
    pub vertices: Vec<RatePoint>,
    pub half_planes: Vec<HalfPlane>,
}

const HULL_EPS: f64 = 1e-13;

fn cross(o: RatePoint, a: RatePoint, b: RatePoint) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn lex(a: &RatePoint, b: &RatePoint) -> std::cmp::Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

fn dist(a: RatePoint, b: RatePoint) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segment_distance(p: RatePoint, a: RatePoint, b: RatePoint) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

/// Smallest convex polygon containing `points`, on axes `R1`, `R2`.
pub fn convex_hull_2d(points: &[RatePoint]) -> Result<RatePolygon> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("convex hull of an empty point set".into()));
    }
    Ok(RatePolygon::hull_of(["R1", "R2"], points))
}

impl RatePolygon {
    pub fn empty(axes: [&str; 2]) -> Self {
        RatePolygon { axes: axes.map(String::from), vertices: Vec::new(), half_planes: Vec::new() }
    }

    /// Hull of `points` on the given axes; empty input gives the empty polygon.
    pub fn hull_of(axes: [&str; 2], points: &[RatePoint]) -> Self {
        let mut pts: Vec<RatePoint> = points.iter().copied().filter(|p| p.iter().all(|v| v.is_finite())).collect();
        pts.sort_by(lex);
        pts.dedup();
        let vertices = if pts.len() <= 1 {
            pts
        } else {
            let scale = pts.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            let eps = HULL_EPS * scale * scale;
            let mut hull: Vec<RatePoint> = Vec::with_capacity(2 * pts.len());
            for pass in 0..2 {
                let start = hull.len();
                let iter: Box<dyn Iterator<Item = &RatePoint>> =
                    if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
                for &p in iter {
                    while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
                        hull.pop();
                    }
                    hull.push(p);
                }
                hull.pop();
            }
            let tiny = 1e-12 * scale;
            let mut out: Vec<RatePoint> = Vec::with_capacity(hull.len());
            for p in hull {
                if out.last().is_none_or(|q| dist(*q, p) > tiny) {
                    out.push(p);
                }
            }
            while out.len() > 1 && dist(out[0], *out.last().unwrap()) <= tiny {
                out.pop();
            }
            out
        };
        let mut poly = RatePolygon { axes: axes.map(String::from), vertices, half_planes: Vec::new() };
        poly.half_planes = poly.supporting_half_planes();
        poly
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn supporting_half_planes(&self) -> Vec<HalfPlane> {
        let v = &self.vertices;
        let mut out = Vec::new();
        let plane = |p: RatePoint, q: RatePoint| {
            let normal = [q[1] - p[1], p[0] - q[0]];
            HalfPlane { normal, offset: normal[0] * p[0] + normal[1] * p[1] }
        };
        match v.len() {
            0 => {}
            1 => {
                let [x, y] = v[0];
                out.push(HalfPlane { normal: [1.0, 0.0], offset: x });
                out.push(HalfPlane { normal: [-1.0, 0.0], offset: -x });
                out.push(HalfPlane { normal: [0.0, 1.0], offset: y });
                out.push(HalfPlane { normal: [0.0, -1.0], offset: -y });
            }
            2 => {
                let (a, b) = (v[0], v[1]);
                out.push(plane(a, b));
                out.push(plane(b, a));
                let d = [b[0] - a[0], b[1] - a[1]];
                out.push(HalfPlane { normal: d, offset: d[0] * b[0] + d[1] * b[1] });
                out.push(HalfPlane { normal: [-d[0], -d[1]], offset: -(d[0] * a[0] + d[1] * a[1]) });
            }
            n => {
                for i in 0..n {
                    out.push(plane(v[i], v[(i + 1) % n]));
                }
            }
        }
        out
    }

    /// Euclidean distance from `p` to the polygon (0 inside).
    pub fn distance(&self, p: RatePoint) -> f64 {
        let v = &self.vertices;
        match v.len() {
            0 => f64::INFINITY,
            1 => dist(p, v[0]),
            2 => segment_distance(p, v[0], v[1]),
            n => {
                let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..n).map(|i| segment_distance(p, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn contains(&self, p: RatePoint, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// True when every vertex of `other` lies within `tol` of `self`.
    pub fn contains_polygon(&self, other: &RatePolygon, tol: f64) -> bool {
        other.vertices.iter().all(|&v| self.contains(v, tol))
    }

    /// Hausdorff distance; attained at vertices since both sets are convex.
    pub fn hausdorff(&self, other: &RatePolygon) -> f64 {
        if self.is_empty() && other.is_empty() {
            return 0.0;
        }
        let one = |a: &RatePolygon, b: &RatePolygon| a.vertices.iter().map(|&v| b.distance(v)).fold(0.0, f64::max);
        one(self, other).max(one(other, self))
    }

    /// Same set with the two axes exchanged.
    pub fn swap_axes(&self) -> RatePolygon {
        let pts: Vec<RatePoint> = self.vertices.iter().map(|p| [p[1], p[0]]).collect();
        RatePolygon::hull_of([self.axes[1].as_str(), self.axes[0].as_str()], &pts)
    }

    /// Hull of the union of several polygons on the same axes.
    pub fn union_hull<'a>(axes: [&str; 2], polys: impl IntoIterator<Item = &'a RatePolygon>) -> RatePolygon {
        let pts: Vec<RatePoint> = polys.into_iter().flat_map(|p| p.vertices.iter().copied()).collect();
        RatePolygon::hull_of(axes, &pts)
    }

    /// Largest value of the second axis at the given first-axis value, if any.
    pub fn max_second_at(&self, first: f64) -> Option<f64> {
        let v = &self.vertices;
        let mut best: Option<f64> = None;
        let mut consider = |y: f64| best = Some(best.map_or(y, |b: f64| b.max(y)));
        for (i, &a) in v.iter().enumerate() {
            let b = v[(i + 1) % v.len()];
            if (a[0] - first).abs() <= 1e-12 {
                consider(a[1]);
            }
            if (a[0] - first) * (b[0] - first) < 0.0 {
                let t = (first - a[0]) / (b[0] - a[0]);
                consider(a[1] + t * (b[1] - a[1]));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    /// Brute-force hull: `(i, j)` is an edge when every other point is on
    /// its left or on the closed segment.
    fn brute_force_vertices(pts: &[RatePoint]) -> BTreeSet<(u64, u64)> {
        let mut out = BTreeSet::new();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let (a, b) = (pts[i], pts[j]);
                let ok = pts.iter().all(|&p| {
                    let c = cross(a, b, p);
                    c > 0.0 || (c == 0.0 && segment_distance(p, a, b) == 0.0)
                });
                if ok {
                    out.insert((a[0].to_bits(), a[1].to_bits()));
                    out.insert((b[0].to_bits(), b[1].to_bits()));
                }
            }
        }
        out
    }

    #[test]
    fn hull_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<RatePoint> = (0..1000).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let hull = convex_hull_2d(&pts).unwrap();
        let got: BTreeSet<_> = hull.vertices.iter().map(|p| (p[0].to_bits(), p[1].to_bits())).collect();
        assert_eq!(got, brute_force_vertices(&pts));
        let start = hull.vertices[0];
        assert!(pts.iter().all(|p| lex(&start, p) != std::cmp::Ordering::Greater));
        for p in &pts {
            assert!(hull.half_planes.iter().all(|h| h.slack(*p) >= -1e-12));
        }
    }

    #[test]
    fn square_with_interior_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.2, 0.7], [0.5, 0.0]];
        let hull = convex_hull_2d(&pts).unwrap();
        assert_eq!(hull.vertices, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn degenerate_hulls() {
        let one = convex_hull_2d(&[[0.3, 0.4]]).unwrap();
        assert_eq!(one.vertices, vec![[0.3, 0.4]]);
        assert!(one.contains([0.3, 0.4], 0.0));
        let seg = convex_hull_2d(&[[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]]).unwrap();
        assert_eq!(seg.vertices.len(), 2);
        assert!((seg.distance([1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(convex_hull_2d(&[]).is_err());
    }

    #[test]
    fn hausdorff_and_swap() {
        let a = convex_hull_2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let b = convex_hull_2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!((a.hausdorff(&b) - 1.0).abs() < 1e-15);
        assert_eq!(a.hausdorff(&a), 0.0);
        let s = b.swap_axes();
        assert!(s.contains([2.0, 0.0], 1e-15));
        assert_eq!(s.axes, ["R2".to_string(), "R1".to_string()]);
        assert_eq!(b.max_second_at(0.0), Some(2.0));
        assert!((b.max_second_at(0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hull_contains_inputs_and_is_convex(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..60)) {
            let pts: Vec<RatePoint> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let hull = convex_hull_2d(&pts).unwrap();
            for p in &pts {
                prop_assert!(hull.contains(*p, 1e-9));
            }
            let v = &hull.vertices;
            if v.len() >= 3 {
                for i in 0..v.len() {
                    prop_assert!(cross(v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]) > 0.0);
                }
            }
        }
    }
}
