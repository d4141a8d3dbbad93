use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bundle::MiBundle;
use crate::error::Error;

/// One half-space `coeffs · x <= rhs` (or `<` when `strict`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub strict: bool,
    pub label: String,
}

/// A list of half-spaces over named coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraintSystem {
    pub coords: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl LinearConstraintSystem {
    /// Starts a system whose coordinates are all constrained to be nonnegative.
    pub fn nonnegative(coords: &[&str]) -> Self {
        let mut sys =
            LinearConstraintSystem { coords: coords.iter().map(|c| c.to_string()).collect(), constraints: Vec::new() };
        for c in coords {
            sys.push(&[(c, -1.0)], 0.0, &format!("{c} >= 0"));
        }
        sys
    }

    pub fn index(&self, coord: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == coord)
    }

    /// Adds `sum(terms) <= rhs`.
    ///
    /// # Panics
    /// Panics on an unknown coordinate name; systems are built from fixed
    /// coordinate lists inside this crate.
    pub fn push(&mut self, terms: &[(&str, f64)], rhs: f64, label: &str) {
        self.push_inner(terms, rhs, false, label);
    }

    pub fn push_strict(&mut self, terms: &[(&str, f64)], rhs: f64, label: &str) {
        self.push_inner(terms, rhs, true, label);
    }

    fn push_inner(&mut self, terms: &[(&str, f64)], rhs: f64, strict: bool, label: &str) {
        let mut coeffs = vec![0.0; self.coords.len()];
        for (name, a) in terms {
            let i = self.index(name).unwrap_or_else(|| panic!("unknown coordinate {name}"));
            coeffs[i] += a;
        }
        self.constraints.push(Constraint { coeffs, rhs, strict, label: label.to_string() });
    }

    /// True when `point` satisfies every constraint within `tol` (strict rows
    /// are read as closed).
    pub fn satisfied_by(&self, point: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| {
            let lhs: f64 = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
            lhs <= c.rhs + tol
        })
    }
}

/// Every region family the engine can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionId {
    R11,
    R12,
    R13,
    R21,
    R22,
    R23,
    R3,
    D11,
    D12,
    D21,
    D22,
    D3,
    /// Scheme-1 rate bounds with every eavesdropper term dropped.
    NoSecrecy,
}

impl RegionId {
    pub const ALL: [RegionId; 13] = [
        RegionId::R11,
        RegionId::R12,
        RegionId::R13,
        RegionId::R21,
        RegionId::R22,
        RegionId::R23,
        RegionId::R3,
        RegionId::D11,
        RegionId::D12,
        RegionId::D21,
        RegionId::D22,
        RegionId::D3,
        RegionId::NoSecrecy,
    ];

    /// Degraded-message-set regions live in the `(R0, R1)` plane.
    pub fn is_degraded(self) -> bool {
        matches!(self, RegionId::D11 | RegionId::D12 | RegionId::D21 | RegionId::D22 | RegionId::D3)
    }

    /// Scheme-2 families carry no `V` or `U`.
    pub fn is_scheme2(self) -> bool {
        matches!(self, RegionId::R21 | RegionId::R22 | RegionId::R23)
    }

    /// Families whose joint has no `V` (the key description is absent).
    pub fn drops_v(self) -> bool {
        self.is_scheme2() || matches!(self, RegionId::D21 | RegionId::D22)
    }

    /// The two rate axes the region is reported on.
    pub fn axes(self) -> [&'static str; 2] {
        if self.is_degraded() {
            ["R0", "R1"]
        } else {
            ["R1", "R2"]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionId::R11 => "R11",
            RegionId::R12 => "R12",
            RegionId::R13 => "R13",
            RegionId::R21 => "R21",
            RegionId::R22 => "R22",
            RegionId::R23 => "R23",
            RegionId::R3 => "R3",
            RegionId::D11 => "D11",
            RegionId::D12 => "D12",
            RegionId::D21 => "D21",
            RegionId::D22 => "D22",
            RegionId::D3 => "D3",
            RegionId::NoSecrecy => "NoSecrecy",
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        RegionId::ALL
            .iter()
            .copied()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown region id {s:?}")))
    }
}

/// Emits the inequality list of one region family for a fixed bundle.
///
/// `min{a, b}` bounds become two rows. Split-rate coordinates are named
/// `R11`, `R12`, `R21`, `R22`.
pub fn region_system(b: &MiBundle, which: RegionId) -> LinearConstraintSystem {
    let a1 = b.u1_y_vuu2;
    let a2 = b.u2_y_vuu1;
    let rs = b.r_sum();
    match which {
        RegionId::R11 => {
            let mut s = LinearConstraintSystem::nonnegative(&["R1", "R2", "R11", "R21"]);
            s.push(&[("R1", 1.0), ("R11", -1.0)], a1 - b.u1_z_su, "R1 <= A1 - E1 + R11");
            s.push(&[("R1", 1.0)], a1, "R1 <= A1");
            s.push(&[("R2", 1.0), ("R21", -1.0)], a2 - b.u2_z_su, "R2 <= A2 - E2 + R21");
            s.push(&[("R2", 1.0)], a2, "R2 <= A2");
            s.push(&[("R1", 1.0), ("R2", 1.0)], rs, "R1 + R2 <= Rsum");
            s.push(
                &[("R1", 1.0), ("R2", 1.0), ("R11", -1.0), ("R21", -1.0)],
                rs - b.u1u2_z_su,
                "R1 + R2 <= Rsum - E12 + R11 + R21",
            );
            s.push(&[("R11", 1.0), ("R21", 1.0)], b.key_budget(), "R11 + R21 <= K");
            s
        }
        RegionId::R12 => {
            let e2 = b.u2_z_suu1;
            let mut s = LinearConstraintSystem::nonnegative(&["R1", "R2", "R11", "R21"]);
            s.push(&[("R1", 1.0)], a1, "R1 <= A1");
            s.push(&[("R1", 1.0), ("R11", -1.0)], 0.0, "R1 <= R11");
            s.push(&[("R2", 1.0), ("R21", -1.0)], a2 - e2, "R2 <= A2 - E2 + R21");
            s.push(&[("R2", 1.0)], a2, "R2 <= A2");
            s.push(&[("R1", 1.0), ("R2", 1.0)], rs, "R1 + R2 <= Rsum");
            s.push(&[("R1", 1.0), ("R2", 1.0), ("R21", -1.0)], rs - e2, "R1 + R2 <= Rsum - E2 + R21");
            s.push(
                &[("R1", 1.0), ("R2", 1.0), ("R11", -1.0), ("R21", -1.0)],
                a2 - e2,
                "R1 + R2 <= A2 - E2 + R11 + R21",
            );
            s.push(&[("R11", 1.0), ("R21", 1.0)], b.v_y - b.v_zuu1, "R11 + R21 <= K");
            s
        }
        RegionId::R13 => {
            let e1 = b.u1_z_suu2;
            let mut s = LinearConstraintSystem::nonnegative(&["R1", "R2", "R11", "R21"]);
            s.push(&[("R1", 1.0), ("R11", -1.0)], a1 - e1, "R1 <= A1 - E1 + R11");
            s.push(&[("R1", 1.0)], a1, "R1 <= A1");
            s.push(&[("R2", 1.0)], a2, "R2 <= A2");
            s.push(&[("R2", 1.0), ("R21", -1.0)], 0.0, "R2 <= R21");
            s.push(&[("R1", 1.0), ("R2", 1.0)], rs, "R1 + R2 <= Rsum");
            s.push(&[("R1", 1.0), ("R2", 1.0), ("R11", -1.0)], rs - e1, "R1 + R2 <= Rsum - E1 + R11");
            s.push(
                &[("R1", 1.0), ("R2", 1.0), ("R11", -1.0), ("R21", -1.0)],
                a1 - e1,
                "R1 + R2 <= A1 - E1 + R11 + R21",
            );
            s.push(&[("R11", 1.0), ("R21", 1.0)], b.v_y - b.v_zuu2, "R11 + R21 <= K");
            s
        }
        RegionId::R3 => {
            let mut s = LinearConstraintSystem::nonnegative(&["R1", "R2"]);
            s.push(&[("R1", 1.0)], a1 - b.u1_z_u, "R1 <= A1 - E1");
            s.push(&[("R1", 1.0)], a1, "R1 <= A1");
            s.push(&[("R2", 1.0)], a2 - b.u2_z_u, "R2 <= A2 - E2");
            s.push(&[("R2", 1.0)], a2, "R2 <= A2");
            s.push(&[("R1", 1.0), ("R2", 1.0)], rs - b.u1u2_z_u, "R1 + R2 <= Rsum - E12");
            s.push(&[("R1", 1.0), ("R2", 1.0)], rs, "R1 + R2 <= Rsum");
            s
        }
        RegionId::R21 | RegionId::R22 | RegionId::R23 => scheme2_system(b, which),
        RegionId::D11 | RegionId::D12 | RegionId::D3 => {
            let d1 = b.u1_y_vuu2;
            let f = b.vuu1u2_y - b.v_s;
            let mut s = LinearConstraintSystem::nonnegative(&["R0", "R1"]);
            match which {
                RegionId::D11 => {
                    let (e, k) = (b.u1_z_suu2, b.r_sk());
                    s.push(&[("R1", 1.0)], d1 - e + k, "R1 <= D1 - E + Rsk");
                    s.push(&[("R1", 1.0)], d1, "R1 <= D1");
                    s.push(&[("R0", 1.0), ("R1", 1.0)], f - e + k, "R0 + R1 <= F - E + Rsk");
                    s.push(&[("R0", 1.0), ("R1", 1.0)], f, "R0 + R1 <= F");
                }
                RegionId::D12 => {
                    s.push(&[("R1", 1.0)], b.r_sk(), "R1 <= Rsk");
                    s.push(&[("R1", 1.0)], d1, "R1 <= D1");
                    s.push(&[("R0", 1.0), ("R1", 1.0)], f, "R0 + R1 <= F");
                }
                _ => {
                    let e = b.u1_z_uu2;
                    s.push(&[("R1", 1.0)], d1 - e, "R1 <= D1 - E");
                    s.push(&[("R1", 1.0)], d1, "R1 <= D1");
                    s.push(&[("R0", 1.0), ("R1", 1.0)], f - e, "R0 + R1 <= F - E");
                    s.push(&[("R0", 1.0), ("R1", 1.0)], f, "R0 + R1 <= F");
                }
            }
            s
        }
        RegionId::D21 | RegionId::D22 => {
            let g = b.u1_y_uu2;
            let q = b.uu1u2_y;
            let hy = b.h_s_uu1u2y;
            let hz = b.h_s_zuu2;
            let e = b.u1_z_suu2;
            let mut s = LinearConstraintSystem::nonnegative(&["R0", "R1"]);
            if which == RegionId::D21 {
                s.push(&[("R1", 1.0)], g - e - hy + hz, "R1 <= G - E - Hy + Hz");
                s.push(&[("R1", 1.0)], g - hy, "R1 <= G - Hy");
                s.push(&[("R0", 1.0), ("R1", 1.0)], q - e - hy + hz, "R0 + R1 <= Q - E - Hy + Hz");
                s.push(&[("R0", 1.0), ("R1", 1.0)], q - hy, "R0 + R1 <= Q - Hy");
            } else {
                s.push(&[("R1", 1.0)], hz - hy, "R1 <= Hz - Hy");
                s.push(&[("R1", 1.0)], g - hy, "R1 <= G - Hy");
                s.push(&[("R0", 1.0), ("R1", 1.0)], q - hy, "R0 + R1 <= Q - Hy");
            }
            s
        }
        RegionId::NoSecrecy => {
            let mut s = LinearConstraintSystem::nonnegative(&["R1", "R2"]);
            s.push(&[("R1", 1.0)], a1, "R1 <= A1");
            s.push(&[("R2", 1.0)], a2, "R2 <= A2");
            s.push(&[("R1", 1.0), ("R2", 1.0)], rs, "R1 + R2 <= Rsum");
            s
        }
    }
}

fn scheme2_system(b: &MiBundle, which: RegionId) -> LinearConstraintSystem {
    let c1 = b.u1_y_u2;
    let c2 = b.u2_y_u1;
    let c12 = b.u1u2_y;
    let hy = b.h_s_yu1u2;
    let mut s = LinearConstraintSystem::nonnegative(&["R1", "R2", "R11", "R12", "R21", "R22"]);
    match which {
        RegionId::R21 => {
            s.push(&[("R1", 1.0), ("R11", -1.0)], c1 - b.u1_z_s, "R1 <= C1 - E1 + R11");
            s.push(&[("R2", 1.0), ("R21", -1.0)], c2 - b.u2_z_s, "R2 <= C2 - E2 + R21");
            s.push(&[("R1", 1.0), ("R2", 1.0)], c12 - b.u1u2_z_s + b.h_s_z - hy, "R1 + R2 <= C12 - E12 + Hz - Hy");
        }
        RegionId::R22 => {
            let e2 = b.u2_z_su1;
            s.push(&[("R1", 1.0), ("R11", -1.0)], 0.0, "R1 <= R11");
            s.push(&[("R2", 1.0), ("R21", -1.0)], c2 - e2, "R2 <= C2 - E2 + R21");
            s.push(&[("R1", 1.0), ("R2", 1.0)], c2 - e2 + b.h_s_zu1 - hy, "R1 + R2 <= C2 - E2 + Hz1 - Hy");
        }
        _ => {
            let e1 = b.u1_z_su2;
            s.push(&[("R1", 1.0), ("R11", -1.0)], c1 - e1, "R1 <= C1 - E1 + R11");
            s.push(&[("R2", 1.0), ("R21", -1.0)], 0.0, "R2 <= R21");
            s.push(&[("R1", 1.0), ("R2", 1.0)], c1 - e1 + b.h_s_zu2 - hy, "R1 + R2 <= C1 - E1 + Hz2 - Hy");
        }
    }
    s.push(&[("R1", 1.0), ("R12", 1.0)], c1, "R1 <= C1 - R12");
    s.push(&[("R2", 1.0), ("R22", 1.0)], c2, "R2 <= C2 - R22");
    s.push(&[("R1", 1.0), ("R2", 1.0)], c12 - hy, "R1 + R2 <= C12 - Hy");
    s.push_strict(&[("R11", 1.0), ("R12", 1.0), ("R21", 1.0), ("R22", 1.0)], b.h_s_z, "R11 + R12 + R21 + R22 < H(S|Z)");
    s.push_strict(&[("R12", -1.0), ("R22", -1.0)], -hy, "R12 + R22 > H(S|Y,U1,U2)");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_system_has_matching_widths() {
        let b = MiBundle::default();
        for id in RegionId::ALL {
            let s = region_system(&b, id);
            assert!(s.constraints.iter().all(|c| c.coeffs.len() == s.coords.len()), "{id}");
            assert_eq!(&s.coords[..2].iter().map(String::as_str).collect::<Vec<_>>()[..], &id.axes()[..]);
        }
    }

    #[test]
    fn zero_bundle_pins_r11_to_origin() {
        let s = region_system(&MiBundle::default(), RegionId::R11);
        assert!(s.satisfied_by(&[0.0, 0.0, 0.0, 0.0], 0.0));
        assert!(!s.satisfied_by(&[1e-6, 0.0, 0.0, 0.0], 0.0));
        assert!(!s.satisfied_by(&[0.0, 1e-6, 0.0, 0.0], 0.0));
    }

    #[test]
    fn r21_has_strict_four_split_bound() {
        let b = MiBundle { h_s_z: 0.7, ..Default::default() };
        let s = region_system(&b, RegionId::R21);
        let row = s.constraints.iter().find(|c| c.strict && c.rhs == 0.7).expect("strict H(S|Z) row");
        assert_eq!(row.coeffs, vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn d12_matches_display() {
        let b = MiBundle { v_y: 0.8, v_zuu2: 0.3, u1_y_vuu2: 0.4, vuu1u2_y: 1.5, v_s: 0.6, ..Default::default() };
        let s = region_system(&b, RegionId::D12);
        let rows: Vec<_> = s.constraints.iter().skip(2).map(|c| (c.coeffs.clone(), c.rhs)).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], (vec![0.0, 1.0], 0.5));
        assert_eq!(rows[1], (vec![0.0, 1.0], 0.4));
        assert_eq!(rows[2].0, vec![1.0, 1.0]);
        assert!((rows[2].1 - 0.9).abs() < 1e-15);
    }

    #[test]
    fn region_ids_parse() {
        assert_eq!("r22".parse::<RegionId>().unwrap(), RegionId::R22);
        assert_eq!("NoSecrecy".parse::<RegionId>().unwrap(), RegionId::NoSecrecy);
        assert!("R9".parse::<RegionId>().is_err());
    }
}
