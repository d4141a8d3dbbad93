use rand::Rng;

use super::bundle::MiBundle;
use super::search::{dirichlet, random_aux};
use crate::prob::{AuxChain, AuxSizes, ChannelModel, ChannelSizes};

/// Small random channel with a random auxiliary chain.
pub(crate) fn random_instance(rng: &mut impl Rng) -> (ChannelModel, AuxChain) {
    let sizes = ChannelSizes { x1: 2, x2: 2, s: 2, y: rng.random_range(2..=3), z: 2 };
    let ch = random_channel(rng, sizes);
    let aux = random_aux(sizes, AuxSizes { v: 2, u: 2, u1: 2, u2: 2 }, rng.random(), rng.random_range(0..64)).unwrap();
    (ch, aux)
}

pub(crate) fn random_channel(rng: &mut impl Rng, sizes: ChannelSizes) -> ChannelModel {
    let rows = sizes.x1 * sizes.x2 * sizes.s;
    let kernel: Vec<f64> = (0..rows).flat_map(|_| dirichlet(rng, sizes.y * sizes.z)).collect();
    ChannelModel::new(sizes, dirichlet(rng, sizes.s), kernel).unwrap()
}

/// Bundle with independent entries in `[0, 1)`; the key budget is negative
/// in roughly one case out of six.
pub(crate) fn random_bundle(rng: &mut impl Rng) -> MiBundle {
    let mut b = MiBundle::default();
    let mut next = || rng.random::<f64>();
    macro_rules! fill {
        ($($f:ident),*) => { $( b.$f = next(); )* };
    }
    fill!(
        u1_y_vuu2, u2_y_vuu1, u1u2_y_vu, vuu1u2_y, v_s, v_y, v_z, v_zuu1, v_zuu2, u1_z_su, u2_z_su, u1u2_z_su,
        u2_z_suu1, u1_z_suu2, u1_z_u, u2_z_u, u1u2_z_u, u2_z_uu1, u1_z_uu2, u1_y_u2, u2_y_u1, u1u2_y, u1_z_s, u2_z_s,
        u1u2_z_s, u2_z_su1, u1_z_su2, h_s_z, h_s_zu1, h_s_zu2, h_s_yu1u2, u1_y_uu2, uu1u2_y, h_s_uu1u2y, h_s_zuu2
    );
    b.vuu1u2_y += 1.0;
    b.u1u2_y_vu += 0.5;
    b.u1u2_y += 0.5;
    b.h_s_z += 0.5;
    b.v_uz = b.v_y * next() * 1.2;
    b
}
