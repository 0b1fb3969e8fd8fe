//! Convergence machinery: absolute probability sequences for row-stochastic
//! products, mass vectors for column-stochastic products, window contraction
//! constants, the perturbed comparison system, and per-step numeric checks of
//! its inequalities along real runs.

pub mod aps;
pub mod constants;
pub mod system;
pub mod traces;

pub use aps::{
    approx_phi, approx_phi_with, column_spread, compute_v, consensus_decay, measured_weight_floor,
    overlap, PhiApprox,
};
pub use constants::ContractionConstants;
pub use system::{PerturbationSystem, StationaryPair};
pub use traces::{
    distance_contraction_check, inequality_system_check, multistep_contraction_check,
    overlap_bounds_check, trace_t, tracker_norm_bound_check, BoundReport, ContractionReport,
    MixSide, TkTrace,
};
