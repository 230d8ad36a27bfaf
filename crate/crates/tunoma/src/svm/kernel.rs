//! RBF kernel, its parameters, and precomputed kernel matrices.

use serde::{Deserialize, Serialize};

use super::{Feature, SvmError};

/// Kernel width and box regularization for the soft-margin dual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Divisor inside the RBF exponent: k = exp(-||x-x'||^2 / kernel_width).
    pub kernel_width: f64,
    /// Upper box bound c on the dual multipliers.
    pub regularization: f64,
}

impl KernelParams {
    pub fn new(kernel_width: f64, regularization: f64) -> Result<Self, SvmError> {
        if kernel_width > 0.0 && regularization > 0.0 {
            Ok(KernelParams {
                kernel_width,
                regularization,
            })
        } else {
            Err(SvmError::BadParams)
        }
    }

    /// Scale-robust default width: twice the median pairwise squared distance
    /// of the training set (subsampled for large sets).
    pub fn median_heuristic_width(features: &[Feature]) -> f64 {
        let stride = (features.len() / 256).max(1);
        let sub: Vec<&Feature> = features.iter().step_by(stride).collect();
        let mut d2: Vec<f64> = Vec::with_capacity(sub.len() * (sub.len() - 1) / 2);
        for i in 0..sub.len() {
            for j in (i + 1)..sub.len() {
                let dx = sub[i][0] - sub[j][0];
                let dy = sub[i][1] - sub[j][1];
                let d = dx * dx + dy * dy;
                if d > 0.0 {
                    d2.push(d);
                }
            }
        }
        if d2.is_empty() {
            return 1.0;
        }
        d2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        2.0 * d2[d2.len() / 2]
    }
}

/// RBF kernel between two feature slices. Value is in (0, 1].
pub fn rbf_kernel(a: &[f64], b: &[f64], params: &KernelParams) -> Result<f64, SvmError> {
    if a.len() != b.len() {
        return Err(SvmError::DimensionMismatch(a.len(), b.len()));
    }
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((-d2 / params.kernel_width).exp())
}

#[inline]
pub(crate) fn rbf2(a: Feature, b: Feature, width: f64) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (-(dx * dx + dy * dy) / width).exp()
}

/// Full matrix of pairwise squared distances, shared across kernel widths.
pub struct PairwiseDistances {
    n: usize,
    d2: Vec<f64>,
}

impl PairwiseDistances {
    pub fn new(features: &[Feature]) -> Self {
        let n = features.len();
        let mut d2 = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = features[i][0] - features[j][0];
                let dy = features[i][1] - features[j][1];
                let v = dx * dx + dy * dy;
                d2[i * n + j] = v;
                d2[j * n + i] = v;
            }
        }
        PairwiseDistances { n, d2 }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Precomputed RBF kernel matrix, reusable across the one-vs-rest binary
/// problems of one training set.
pub struct KernelMatrix {
    n: usize,
    k: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_distances(d: &PairwiseDistances, width: f64) -> Self {
        let k = d.d2.iter().map(|&v| (-v / width).exp()).collect();
        KernelMatrix { n: d.n, k }
    }

    pub fn from_features(features: &[Feature], width: f64) -> Self {
        Self::from_distances(&PairwiseDistances::new(features), width)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.k[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }
}
