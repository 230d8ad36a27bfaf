//! Sequential minimal optimization for the soft-margin dual.
//!
//! Working-set selection picks the maximal violating pair; the stopping rule
//! is the KKT gap m(a) - M(a) <= tolerance. Each iteration updates two
//! multipliers analytically along the equality constraint and refreshes the
//! cached gradient in O(n).

use serde::{Deserialize, Serialize};

use super::kernel::{KernelMatrix, KernelParams};
use super::model::SvmModel;
use super::{Feature, SvmError};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoSettings {
    /// Stop when the maximal-violating-pair KKT gap falls below this.
    pub kkt_tolerance: f64,
    /// Hard iteration cap; exceeding it yields `SvmError::NotConverged`
    /// carrying the best iterate.
    pub max_iterations: usize,
}

impl Default for SmoSettings {
    fn default() -> Self {
        SmoSettings {
            kkt_tolerance: 1e-3,
            max_iterations: 100_000,
        }
    }
}

/// A trained binary model plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct TrainedBinary {
    pub model: SvmModel,
    pub iterations: usize,
    pub kkt_gap: f64,
    /// Value of the dual objective at the returned iterate.
    pub dual_objective: f64,
    /// Functional margin y_n * f(x_n) of every training example.
    pub margins: Vec<f64>,
}

/// Train a binary soft-margin SVM; kernel matrix computed internally.
pub fn train_binary(
    features: &[Feature],
    labels: &[f64],
    params: &KernelParams,
    settings: &SmoSettings,
) -> Result<TrainedBinary, SvmError> {
    let kernel = KernelMatrix::from_features(features, params.kernel_width);
    train_binary_shared(&kernel, features, labels, params, settings)
}

/// Train a binary SVM against a precomputed kernel matrix (shared across the
/// one-vs-rest problems of a multiclass fit).
pub fn train_binary_shared(
    kernel: &KernelMatrix,
    features: &[Feature],
    labels: &[f64],
    params: &KernelParams,
    settings: &SmoSettings,
) -> Result<TrainedBinary, SvmError> {
    let n = features.len();
    if n < 2 {
        return Err(SvmError::TooFewExamples(n));
    }
    if labels.len() != n {
        return Err(SvmError::LengthMismatch(n, labels.len()));
    }
    if kernel.len() != n {
        return Err(SvmError::LengthMismatch(kernel.len(), n));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(SvmError::BadLabel);
    }
    if labels.iter().all(|&y| y == labels[0]) {
        return Err(SvmError::SingleClass);
    }
    KernelParams::new(params.kernel_width, params.regularization)?;

    let c = params.regularization;
    let mut alpha = vec![0.0f64; n];
    // gradient of 1/2 a'Qa - sum(a); all alpha start at 0
    let mut grad = vec![-1.0f64; n];

    let mut iterations = 0usize;
    let mut gap = f64::INFINITY;
    while iterations < settings.max_iterations {
        // maximal violating pair over I_up / I_low
        let mut i = usize::MAX;
        let mut m_val = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let yg = -labels[t] * grad[t];
            let in_up = (labels[t] > 0.0 && alpha[t] < c) || (labels[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (labels[t] > 0.0 && alpha[t] > 0.0) || (labels[t] < 0.0 && alpha[t] < c);
            if in_up && yg > m_val {
                m_val = yg;
                i = t;
            }
            if in_low && yg < m_low {
                m_low = yg;
                j = t;
            }
        }
        gap = m_val - m_low;
        if gap <= settings.kkt_tolerance || i == usize::MAX || j == usize::MAX {
            break;
        }

        let ki = kernel.row(i);
        let kj = kernel.row(j);
        let eta = (ki[i] + kj[j] - 2.0 * ki[j]).max(1e-12);
        let mut step = gap / eta;
        // box limits along the feasible direction (d_i = y_i, d_j = -y_j)
        let up_i = if labels[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let up_j = if labels[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        step = step.min(up_i).min(up_j);

        alpha[i] += labels[i] * step;
        alpha[j] -= labels[j] * step;
        // numeric guard against drift outside the box
        alpha[i] = alpha[i].clamp(0.0, c);
        alpha[j] = alpha[j].clamp(0.0, c);

        for t in 0..n {
            grad[t] += step * labels[t] * (ki[t] - kj[t]);
        }
        iterations += 1;
    }

    let outcome = finish(features, labels, params, &alpha, &grad, iterations, gap);
    if gap > settings.kkt_tolerance {
        return Err(SvmError::NotConverged {
            best: Box::new(outcome),
            gap,
            tolerance: settings.kkt_tolerance,
            iterations,
        });
    }
    Ok(outcome)
}

fn finish(
    features: &[Feature],
    labels: &[f64],
    params: &KernelParams,
    alpha: &[f64],
    grad: &[f64],
    iterations: usize,
    gap: f64,
) -> TrainedBinary {
    let n = features.len();
    let c = params.regularization;
    let free_band = c * 1e-9;

    // bias: mean of -y_s * grad_s over free support vectors, else the
    // violating-pair midpoint
    let mut w0_sum = 0.0;
    let mut w0_count = 0usize;
    for t in 0..n {
        if alpha[t] > free_band && alpha[t] < c - free_band {
            w0_sum += -labels[t] * grad[t];
            w0_count += 1;
        }
    }
    let bias = if w0_count > 0 {
        w0_sum / w0_count as f64
    } else {
        let mut m_val = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let yg = -labels[t] * grad[t];
            let in_up = (labels[t] > 0.0 && alpha[t] < c) || (labels[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (labels[t] > 0.0 && alpha[t] > 0.0) || (labels[t] < 0.0 && alpha[t] < c);
            if in_up {
                m_val = m_val.max(yg);
            }
            if in_low {
                m_low = m_low.min(yg);
            }
        }
        if m_val.is_finite() && m_low.is_finite() {
            0.5 * (m_val + m_low)
        } else {
            0.0
        }
    };

    // margins y_t f(x_t) = (grad_t + 1) + y_t w0, dual objective from the
    // cached gradient: W = sum a - 1/2 a'Qa = sum_t a_t (1 - grad_t) / 2
    let margins: Vec<f64> = (0..n).map(|t| grad[t] + 1.0 + labels[t] * bias).collect();
    let dual_objective: f64 = (0..n).map(|t| alpha[t] * (1.0 - grad[t]) / 2.0).sum();

    let threshold = c * 1e-12;
    let mut support_vectors = Vec::new();
    let mut multipliers = Vec::new();
    let mut sv_labels = Vec::new();
    for t in 0..n {
        if alpha[t] > threshold {
            support_vectors.push(features[t]);
            multipliers.push(alpha[t]);
            sv_labels.push(labels[t]);
        }
    }

    TrainedBinary {
        model: SvmModel::new(support_vectors, multipliers, sv_labels, bias, *params),
        iterations,
        kkt_gap: gap,
        dual_objective,
        margins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> SmoSettings {
        SmoSettings::default()
    }

    #[test]
    fn symmetric_two_point_problem() {
        let feats: Vec<Feature> = vec![[0.0, 0.0], [1.0, 1.0]];
        let labels = vec![-1.0, 1.0];
        let params = KernelParams::new(1.0, 1e6).unwrap();
        let out = train_binary(&feats, &labels, &params, &settings()).unwrap();
        assert_eq!(out.model.support_vector_count(), 2);
        let a = out.model.multipliers();
        assert!((a[0] - a[1]).abs() < 1e-6, "alphas {a:?}");
        // decision boundary midway: score at the midpoint ~ 0
        let (score, _) = out.model.decide([0.5, 0.5]);
        assert!(score.abs() < 1e-6, "midpoint score {score}");
        // free SVs sit on the margin
        for (t, m) in out.margins.iter().enumerate() {
            assert!((m - 1.0).abs() < 1e-3, "margin[{t}] = {m}");
        }
    }

    #[test]
    fn separable_blobs_zero_training_errors() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut feats: Vec<Feature> = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..10 {
            feats.push([
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            ]);
            labels.push(-1.0);
            feats.push([
                3.0 + rng.random_range(-0.3..0.3),
                3.0 + rng.random_range(-0.3..0.3),
            ]);
            labels.push(1.0);
        }
        let params = KernelParams::new(2.0, 1e3).unwrap();
        let out = train_binary(&feats, &labels, &params, &settings()).unwrap();
        for (f, y) in feats.iter().zip(&labels) {
            let (_, label) = out.model.decide(*f);
            assert_eq!(label, *y);
        }
    }

    #[test]
    fn xor_layout_correctly_classified() {
        let feats: Vec<Feature> = vec![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let labels = vec![1.0, 1.0, -1.0, -1.0];
        let params = KernelParams::new(0.5, 10.0).unwrap();
        let out = train_binary(&feats, &labels, &params, &settings()).unwrap();
        for (f, y) in feats.iter().zip(&labels) {
            let (_, label) = out.model.decide(*f);
            assert_eq!(label, *y, "at {f:?}");
        }
    }

    #[test]
    fn single_class_rejected() {
        let feats: Vec<Feature> = vec![[0.0, 0.0], [1.0, 1.0]];
        assert!(matches!(
            train_binary(
                &feats,
                &[1.0, 1.0],
                &KernelParams::new(1.0, 1.0).unwrap(),
                &settings()
            ),
            Err(SvmError::SingleClass)
        ));
    }

    #[test]
    fn non_convergence_carries_best_iterate() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let feats: Vec<Feature> = (0..40)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let labels: Vec<f64> = (0..40)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let params = KernelParams::new(1.0, 10.0).unwrap();
        let tight = SmoSettings {
            kkt_tolerance: 1e-12,
            max_iterations: 3,
        };
        match train_binary(&feats, &labels, &params, &tight) {
            Err(SvmError::NotConverged { best, gap, .. }) => {
                assert!(gap > 1e-12);
                assert_eq!(best.margins.len(), 40);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn dual_feasibility_and_kkt_complementarity() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..20 {
            let n = rng.random_range(4..30);
            let feats: Vec<Feature> = (0..n)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let mut labels: Vec<f64> = (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            labels[0] = 1.0;
            labels[1] = -1.0;
            let c = [1.0, 10.0, 100.0][case % 3];
            let params = KernelParams::new(0.7, c).unwrap();
            let out = train_binary(&feats, &labels, &params, &settings()).unwrap();
            // feasibility on the stored multipliers
            let mut sum_ay = 0.0;
            for (a, y) in out.model.multipliers().iter().zip(out.model.sv_labels()) {
                assert!(*a >= -1e-9 && *a <= c + 1e-9);
                sum_ay += a * y;
            }
            assert!(sum_ay.abs() <= 1e-6 * c, "sum alpha*y = {sum_ay}");
            // complementarity at tolerance scale; margins are per training point
            let tol = 2e-3;
            let mut sv_iter = 0usize;
            for t in 0..n {
                let m = out.margins[t];
                // recover alpha of point t (0 if not a support vector)
                let a = out
                    .model
                    .support_vectors()
                    .iter()
                    .zip(out.model.multipliers())
                    .filter(|(sv, _)| **sv == feats[t])
                    .map(|(_, a)| *a)
                    .next()
                    .unwrap_or(0.0);
                if a < 1e-12 {
                    assert!(m >= 1.0 - tol, "a=0 margin {m}");
                } else if a > c - 1e-9 {
                    assert!(m <= 1.0 + tol, "a=c margin {m}");
                } else {
                    assert!((m - 1.0).abs() <= tol, "free margin {m}");
                    sv_iter += 1;
                }
            }
            let _ = sv_iter;
        }
    }

    #[test]
    fn deterministic_training() {
        let feats: Vec<Feature> = vec![[0.0, 0.1], [1.0, 0.9], [0.2, 0.8], [0.9, 0.2]];
        let labels = vec![1.0, 1.0, -1.0, -1.0];
        let params = KernelParams::new(0.5, 10.0).unwrap();
        let a = train_binary(&feats, &labels, &params, &settings()).unwrap();
        let b = train_binary(&feats, &labels, &params, &settings()).unwrap();
        assert_eq!(a.model.dump(), b.model.dump());
        assert_eq!(a.dual_objective.to_bits(), b.dual_objective.to_bits());
    }
}
