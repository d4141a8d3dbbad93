use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prob::{var, LabeledJointPmf};

/// Every information term used by the region inequality systems, in bits.
///
/// Field names spell the term: `u1_y_vuu2` is `I(U1; Y | V, U, U2)`,
/// `h_s_zu1` is `H(S | Z, U1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MiBundle {
    // scheme 1
    pub u1_y_vuu2: f64,
    pub u2_y_vuu1: f64,
    pub u1u2_y_vu: f64,
    /// `I(V, U, U1, U2; Y)`
    pub vuu1u2_y: f64,
    pub v_s: f64,
    pub v_y: f64,
    pub v_z: f64,
    pub v_uz: f64,
    pub v_zuu1: f64,
    pub v_zuu2: f64,
    pub u1_z_su: f64,
    pub u2_z_su: f64,
    pub u1u2_z_su: f64,
    pub u2_z_suu1: f64,
    pub u1_z_suu2: f64,
    // wiretap-only counterparts with the state removed from the conditioning
    pub u1_z_u: f64,
    pub u2_z_u: f64,
    pub u1u2_z_u: f64,
    pub u2_z_uu1: f64,
    pub u1_z_uu2: f64,
    // scheme 2
    pub u1_y_u2: f64,
    pub u2_y_u1: f64,
    pub u1u2_y: f64,
    pub u1_z_s: f64,
    pub u2_z_s: f64,
    pub u1u2_z_s: f64,
    pub u2_z_su1: f64,
    pub u1_z_su2: f64,
    pub h_s_z: f64,
    pub h_s_zu1: f64,
    pub h_s_zu2: f64,
    pub h_s_yu1u2: f64,
    // degraded message sets
    pub u1_y_uu2: f64,
    /// `I(U, U1, U2; Y)`
    pub uu1u2_y: f64,
    pub h_s_uu1u2y: f64,
    pub h_s_zuu2: f64,
}

impl MiBundle {
    /// `min{ I(U1,U2;Y|V,U), I(V,U,U1,U2;Y) - I(V;S) }`.
    pub fn r_sum(&self) -> f64 {
        self.u1u2_y_vu.min(self.vuu1u2_y - self.v_s)
    }

    /// Secret-key rate of the degraded-message-set regions, `I(V;Y) - I(V;Z,U,U2)`.
    pub fn r_sk(&self) -> f64 {
        self.v_y - self.v_zuu2
    }

    /// Key budget of region R11, `I(V;Y) - I(V;U,Z)`.
    pub fn key_budget(&self) -> f64 {
        self.v_y - self.v_uz
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    fn values(&self) -> Vec<f64> {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_object().cloned())
            .map(|m| m.values().filter_map(|v| v.as_f64()).collect())
            .unwrap_or_default()
    }
}

/// Evaluates every bundle term on a joint over the nine canonical variables.
pub fn mi_bundle(joint: &LabeledJointPmf) -> Result<MiBundle> {
    use var::*;
    let m = |names: &[&str]| joint.mask_of(names);
    let (s, v, u, u1, u2, y, z) = (m(&[S])?, m(&[V])?, m(&[U])?, m(&[U1])?, m(&[U2])?, m(&[Y])?, m(&[Z])?);
    let mi = |a: u64, b: u64, c: u64| joint.mi_mask(a, b, c);
    let h = |a: u64, c: u64| -> Result<f64> {
        let v = joint.entropy_mask(a | c) - joint.entropy_mask(c);
        Ok(v.max(0.0))
    };
    Ok(MiBundle {
        u1_y_vuu2: mi(u1, y, v | u | u2)?,
        u2_y_vuu1: mi(u2, y, v | u | u1)?,
        u1u2_y_vu: mi(u1 | u2, y, v | u)?,
        vuu1u2_y: mi(v | u | u1 | u2, y, 0)?,
        v_s: mi(v, s, 0)?,
        v_y: mi(v, y, 0)?,
        v_z: mi(v, z, 0)?,
        v_uz: mi(v, u | z, 0)?,
        v_zuu1: mi(v, z | u | u1, 0)?,
        v_zuu2: mi(v, z | u | u2, 0)?,
        u1_z_su: mi(u1, z, s | u)?,
        u2_z_su: mi(u2, z, s | u)?,
        u1u2_z_su: mi(u1 | u2, z, s | u)?,
        u2_z_suu1: mi(u2, z, s | u | u1)?,
        u1_z_suu2: mi(u1, z, s | u | u2)?,
        u1_z_u: mi(u1, z, u)?,
        u2_z_u: mi(u2, z, u)?,
        u1u2_z_u: mi(u1 | u2, z, u)?,
        u2_z_uu1: mi(u2, z, u | u1)?,
        u1_z_uu2: mi(u1, z, u | u2)?,
        u1_y_u2: mi(u1, y, u2)?,
        u2_y_u1: mi(u2, y, u1)?,
        u1u2_y: mi(u1 | u2, y, 0)?,
        u1_z_s: mi(u1, z, s)?,
        u2_z_s: mi(u2, z, s)?,
        u1u2_z_s: mi(u1 | u2, z, s)?,
        u2_z_su1: mi(u2, z, s | u1)?,
        u1_z_su2: mi(u1, z, s | u2)?,
        h_s_z: h(s, z)?,
        h_s_zu1: h(s, z | u1)?,
        h_s_zu2: h(s, z | u2)?,
        h_s_yu1u2: h(s, y | u1 | u2)?,
        u1_y_uu2: mi(u1, y, u | u2)?,
        uu1u2_y: mi(u | u1 | u2, y, 0)?,
        h_s_uu1u2y: h(s, u | u1 | u2 | y)?,
        h_s_zuu2: h(s, z | u | u2)?,
    })
}
