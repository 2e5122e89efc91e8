//! Photon-number projection of the split two-mode Gaussian state.

mod distribution;
mod element;
mod moments;
mod vars;

pub use distribution::{
    arm_marginal, joint_pnr_distribution, joint_pnr_distribution_with, state_digest, JointPnrDistribution,
    NEGATIVE_TOLERANCE,
};
pub use element::{
    f_moment, fock_matrix_element, fock_matrix_element_with, ElementEstimate, FockConfig, FockContext, FockEvaluator,
    ABSOLUTE_ERROR_FLOOR,
};
pub use moments::MomentContext;
pub use vars::{abstracted_vars, AbstractedVars};
