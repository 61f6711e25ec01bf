//! Three-layer audiovisual localization network that approximates Bayesian
//! causal inference, with reconstruction-driven recalibration of auditory
//! input weights and a reference causal-inference observer to compare
//! against.
//!
//! Layers: input units ([`input`]) feed unisensory and multisensory pooling
//! populations ([`pooling`]), which project back to a reconstruction layer
//! that is decoded into location estimates ([`network`]).

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal;
pub mod error;
pub mod fitting;
pub mod grid;
pub mod input;
pub mod network;
pub mod pooling;
pub mod protocols;
pub mod readout;
pub mod recalibration;

pub use causal::{
    ci_disparity_sweep, ci_mean_estimates, ci_single, CIParams, CausalInferenceResult, EstimateRule, McEstimate,
    SweepPoint,
};
pub use error::{ModelError, Result};
pub use fitting::{
    c_from_gains, fit_c_plane, fit_logit_curve, fit_mu, fit_mu_to_oracle, mu_from_pcommon, FitResult, MuLattice,
    PlaneFit, SweepSpec,
};
pub use grid::{Activity, NetworkParams, SpatialGrid};
pub use input::{InputActivity, StimulusEvent};
pub use network::{Network, NetworkOutput, ReconstructionActivity};
pub use pooling::{PoolingActivity, PoolingWeights};
pub use readout::{profile_peak_and_width, LikelihoodSummary, FWHM_PER_SD};
pub use recalibration::{run_schedule, AdaptationState, ErrorScope, ScheduleRun, Trial, TrialRecord, TrialSchedule};
