//! From-scratch soft-margin kernel SVM.
//!
//! The dual problem
//!
//! ```text
//! max  sum a_n - 1/2 sum_nm a_n a_m y_n y_m k(x_n, x_m)
//! s.t. sum a_n y_n = 0,  0 <= a_n <= c
//! ```
//!
//! is solved by sequential minimal optimization with maximal-violating-pair
//! working-set selection. The RBF kernel uses the `exp(-||x-x'||^2 / width)`
//! parameterization. A one-vs-rest wrapper provides multiclass decisions, and
//! [`oracle`] holds an exhaustive active-set QP solver used as an independent
//! reference on small instances.

mod kernel;
mod model;
mod multiclass;
pub mod oracle;
mod smo;

pub use kernel::{rbf_kernel, KernelMatrix, KernelParams, PairwiseDistances};
pub use model::SvmModel;
pub use multiclass::{train_multiclass, train_multiclass_shared, MulticlassSvm};
pub use smo::{train_binary, train_binary_shared, SmoSettings, TrainedBinary};

use thiserror::Error;

/// Feature vector: the I/Q coordinates of one received symbol.
pub type Feature = [f64; 2];

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("feature dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("kernel width and regularization must be > 0")]
    BadParams,
    #[error("training set needs at least 2 examples, got {0}")]
    TooFewExamples(usize),
    #[error("labels must be -1 or +1")]
    BadLabel,
    #[error("binary training needs both classes present")]
    SingleClass,
    #[error("examples/labels length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("multiclass training needs >= 2 classes, each non-empty")]
    TooFewClasses,
    #[error("solver did not reach KKT gap {tolerance} in {iterations} iterations (gap {gap})")]
    NotConverged {
        /// Best iterate, usable despite the failed tolerance.
        best: Box<TrainedBinary>,
        gap: f64,
        tolerance: f64,
        iterations: usize,
    },
    #[error("model dump malformed: {0}")]
    BadDump(String),
}
