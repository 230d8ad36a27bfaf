//! Experiment drivers: the frame-by-frame closed loop, the AMC success-rate
//! sweep, the common-random-numbers baseline comparison, CSV rendering, and
//! the self-test suite.

mod amc_sweep;
mod closed_loop;
mod compare;
mod records;
mod selftest;

pub use amc_sweep::{run_amc_sweep, sweep_csv, SweepCell};
pub use closed_loop::{
    run_closed_loop, run_controller_loop, ClosedLoopOutput, Controller, FrameRecord,
    UserFrameRecord,
};
pub use compare::{run_baseline_comparison, CompareOutput};
pub use records::closed_loop_csv;
pub use selftest::{run_selftest, SelfTestLine, GOLDEN_DECISIONS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Phy(#[from] crate::phy::PhyError),
    #[error(transparent)]
    Svm(#[from] crate::svm::SvmError),
    #[error(transparent)]
    Amc(#[from] crate::amc::AmcError),
    #[error(transparent)]
    Sinr(#[from] crate::sinr::SinrError),
    #[error(transparent)]
    Link(#[from] crate::link::LinkError),
    #[error(transparent)]
    Capacity(#[from] crate::capacity::CapacityError),
    #[error("common-random-numbers discipline broken: {0}")]
    CommonRandomNumbers(String),
}
