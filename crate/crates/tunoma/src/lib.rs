//! Two-user OFDM-NOMA link-level simulator.
//!
//! The pipeline, frame by frame: superpose two users' Gray-mapped symbol
//! streams at their allocated powers over flat Rayleigh channels, recover
//! per-user soft symbols by successive interference cancellation, classify
//! each user's modulation blindly with per-hypothesis soft-margin RBF SVMs,
//! estimate SINR from the margin statistics without touching any decoder,
//! and feed both estimates into a CQI-table link-adaptation and power-control
//! rule that sets next frame's modulation, coding rate, and transmit power.
//!
//! Modules:
//! - [`phy`]: constellations, Rayleigh/AWGN channel, NOMA superposition, SIC.
//! - [`svm`]: from-scratch SMO solver for the soft-margin kernel SVM dual,
//!   one-vs-rest multiclass wrapper, and an exhaustive small-QP oracle.
//! - [`amc`]: blind per-frame modulation classification over scheme
//!   hypotheses.
//! - [`sinr`]: decode-free SINR estimation from the per-hypothesis fits.
//! - [`cqi`]: the 15-level CQI lookup table.
//! - [`link`]: coding-rate computation and the three-situation link
//!   adaptation / power control decision rule.
//! - [`capacity`]: user rate bounds, sum capacity, and baseline comparison
//!   summaries.
//! - [`sim`]: closed-loop and Monte Carlo experiment drivers plus CSV output.

pub mod amc;
pub mod capacity;
pub mod config;
pub mod cqi;
pub mod link;
pub mod phy;
pub mod sim;
pub mod sinr;
pub mod svm;
pub mod util;

pub use amc::{classify, AmcHypothesisFit, AmcParams, AmcResult};
pub use capacity::{sum_capacity, user_rates, CapacityReport, PowerLedger};
pub use config::SimConfig;
pub use cqi::{CqiLevel, CqiTable};
pub use link::{coding_rate, min_power_for_level, update_power, LinkDecision, Situation};
pub use phy::{
    modulate, sic_detect, superpose_tu_noma, ChannelRealization, Constellation, NomaFrame, Scheme,
};
pub use sinr::{estimate_sinr, extract_error_signal, ErrorSignal, SinrEstimate, SinrMode};
pub use svm::{rbf_kernel, train_binary, train_multiclass, KernelParams, SmoSettings, SvmModel};
