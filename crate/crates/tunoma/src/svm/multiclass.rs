//! One-vs-rest multiclass wrapper over the binary solver.

use super::kernel::{KernelMatrix, KernelParams};
use super::smo::{train_binary_shared, SmoSettings, TrainedBinary};
use super::{Feature, SvmError};

/// One binary model per class, class vs rest; prediction is the argmax of the
/// per-class scores with ties broken toward the lowest class id.
#[derive(Debug, Clone)]
pub struct MulticlassSvm {
    classes: Vec<usize>,
    binaries: Vec<TrainedBinary>,
    fully_converged: bool,
}

impl MulticlassSvm {
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn binaries(&self) -> &[TrainedBinary] {
        &self.binaries
    }

    pub fn binary_for(&self, class: usize) -> Option<&TrainedBinary> {
        self.classes
            .iter()
            .position(|&c| c == class)
            .map(|i| &self.binaries[i])
    }

    /// Whether every one-vs-rest subproblem met the KKT tolerance.
    pub fn fully_converged(&self) -> bool {
        self.fully_converged
    }

    /// Total support vectors across the one-vs-rest models.
    pub fn support_vector_count(&self) -> usize {
        self.binaries
            .iter()
            .map(|b| b.model.support_vector_count())
            .sum()
    }

    /// Predicted class id and the winning score.
    pub fn predict(&self, x: Feature) -> (usize, f64) {
        let mut best_class = self.classes[0];
        let mut best_score = f64::NEG_INFINITY;
        for (i, b) in self.binaries.iter().enumerate() {
            let s = b.model.score(x);
            if s > best_score {
                best_score = s;
                best_class = self.classes[i];
            }
        }
        (best_class, best_score)
    }
}

/// Train one-vs-rest models with a shared precomputed kernel matrix.
///
/// Subproblems that miss the KKT tolerance contribute their best iterate and
/// clear `fully_converged`; hard input errors still fail the whole fit.
pub fn train_multiclass_shared(
    kernel: &KernelMatrix,
    features: &[Feature],
    class_labels: &[usize],
    params: &KernelParams,
    settings: &SmoSettings,
) -> Result<MulticlassSvm, SvmError> {
    if features.len() != class_labels.len() {
        return Err(SvmError::LengthMismatch(features.len(), class_labels.len()));
    }
    let mut classes: Vec<usize> = class_labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SvmError::TooFewClasses);
    }
    let mut binaries = Vec::with_capacity(classes.len());
    let mut fully_converged = true;
    let mut labels = vec![0.0f64; features.len()];
    for &class in &classes {
        for (t, &cl) in class_labels.iter().enumerate() {
            labels[t] = if cl == class { 1.0 } else { -1.0 };
        }
        match train_binary_shared(kernel, features, &labels, params, settings) {
            Ok(tb) => binaries.push(tb),
            Err(SvmError::NotConverged { best, .. }) => {
                fully_converged = false;
                binaries.push(*best);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MulticlassSvm {
        classes,
        binaries,
        fully_converged,
    })
}

/// Train one-vs-rest models, computing the kernel matrix internally.
pub fn train_multiclass(
    features: &[Feature],
    class_labels: &[usize],
    params: &KernelParams,
    settings: &SmoSettings,
) -> Result<MulticlassSvm, SvmError> {
    let kernel = KernelMatrix::from_features(features, params.kernel_width);
    train_multiclass_shared(&kernel, features, class_labels, params, settings)
}
