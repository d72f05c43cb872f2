//! Channel learning and energy beamforming for multi-antenna wireless power
//! transfer using only RSSI feedback.
//!
//! The transmitter sweeps a two-antenna codebook `b_n = sqrt(P/2) [1, e^{j theta_n}]`
//! over equally spaced training phases, the receiver reports the received
//! signal strength of each, and the transmitter recovers the relative channel
//! phase in closed form. For more than two antennas every antenna is paired
//! with antenna 1 in turn. The crate also provides the Cramer-Rao machinery
//! that justifies the phase set and a planner for the training length.
//!
//! Modules:
//! - [`model`]: channels, received energy, equal-gain beamforming
//! - [`codebook`]: training phases, Fisher information, CRLB / MCRLB
//! - [`feedback`]: noisy RSSI and the pairwise training schedule
//! - [`estimator`]: ML phase estimation and ambiguity resolution
//! - [`planner`]: harvested-energy model and optimal `N`
//! - [`replay`]: CSV traces for offline estimation
//! - [`rng`]: counter-based random streams

pub mod codebook;
pub mod error;
pub mod estimator;
pub mod feedback;
pub mod model;
pub mod planner;
pub mod replay;
pub mod rng;

pub use codebook::{
    crlb_phi, delta_ijk, fim, make_codebook, make_theta, mcrlb, mcrlb_sum, random_theta, Codebook,
    FimMatrix, PhaseSet,
};
pub use error::{Error, Result};
pub use estimator::{
    estimate_all_phases, estimate_ml, estimate_noiseless_n3, estimate_phase, exhaustive_baseline,
    ls_objective, resolve_ambiguity, CandidatePair, EstimateSet, PhaseEstimate,
};
pub use feedback::{
    run_training, simulate_rssi, training_overhead, NoiseModel, RssiRecord, TrainingSchedule,
    TrainingTable,
};
pub use model::{
    derive_pair_params, egt_beam_vector, received_energy, sample_channel, uniform_phase,
    wrap_angle, BeamVector, ChannelModel, ChannelVector, PairParams, SystemParams,
};
pub use planner::{
    e_total, n_star, n_star_brute, omega_params, rwpb_approx, NStar, TimingParams, WpbParams,
};
pub use rng::{StreamFactory, StreamKey, TrialStreams};
