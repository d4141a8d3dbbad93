//! Finite-alphabet probability arithmetic and information measures.

mod joint;
mod measures;
mod model;

pub use joint::{entropy_of, Alphabet, ConditionalPmf, LabeledJointPmf, DERIVED_TOL, MAX_TENSOR_LEN, NORM_TOL};
#[cfg(test)]
pub(crate) use measures::h2;
pub use measures::{binary_convolution, binary_entropy};
pub use model::{assemble_joint, var, AuxChain, AuxSizes, AuxSpec, ChannelModel, ChannelSizes, ChannelSpec};
