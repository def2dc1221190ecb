//! Closed-form objectives, competitive-ratio bounds and the numeric
//! pipeline behind the generic lower bound.

mod bounds;
mod phi;
pub mod quadrature;

pub use bounds::{
    closed_form_objective, lower_bound, smoothness_constants, sum_pairwise_min, upper_bound,
    BoundQuery, BoundValue, LowerBoundKind, ObjectiveKind, ScaleConstants, UpperBoundKind,
};
pub use phi::{alpha_phi, g_phi, inf_g_numeric, inf_g_phi, Phi, PhiFamily, HORIZON};
