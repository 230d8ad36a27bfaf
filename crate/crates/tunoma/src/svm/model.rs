//! Trained binary model: the dual expansion over support vectors.

use super::kernel::{rbf2, KernelParams};
use super::{Feature, SvmError};

/// Immutable trained soft-margin model. The decision function is
/// `f(x) = w0 + sum_n a_n y_n k(sv_n, x)` over stored support vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    support_vectors: Vec<Feature>,
    multipliers: Vec<f64>,
    sv_labels: Vec<f64>,
    bias: f64,
    params: KernelParams,
}

impl SvmModel {
    pub(crate) fn new(
        support_vectors: Vec<Feature>,
        multipliers: Vec<f64>,
        sv_labels: Vec<f64>,
        bias: f64,
        params: KernelParams,
    ) -> Self {
        debug_assert_eq!(support_vectors.len(), multipliers.len());
        debug_assert_eq!(support_vectors.len(), sv_labels.len());
        SvmModel {
            support_vectors,
            multipliers,
            sv_labels,
            bias,
            params,
        }
    }

    pub fn support_vectors(&self) -> &[Feature] {
        &self.support_vectors
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn sv_labels(&self) -> &[f64] {
        &self.sv_labels
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }

    /// Decision function value at `x`.
    pub fn score(&self, x: Feature) -> f64 {
        let mut s = self.bias;
        for i in 0..self.support_vectors.len() {
            s += self.multipliers[i]
                * self.sv_labels[i]
                * rbf2(self.support_vectors[i], x, self.params.kernel_width);
        }
        s
    }

    /// (score, label). A score of exactly 0 maps to +1.
    pub fn decide(&self, x: Feature) -> (f64, f64) {
        let s = self.score(x);
        (s, if s >= 0.0 { 1.0 } else { -1.0 })
    }

    /// Flat text dump: one header line `w0 gamma c`, then one line per
    /// support vector `x0 x1 alpha y`. Round-trips through [`SvmModel::parse`].
    pub fn dump(&self) -> String {
        let mut out = format!(
            "{:.17e} {:.17e} {:.17e}\n",
            self.bias, self.params.kernel_width, self.params.regularization
        );
        for i in 0..self.support_vectors.len() {
            out.push_str(&format!(
                "{:.17e} {:.17e} {:.17e} {}\n",
                self.support_vectors[i][0],
                self.support_vectors[i][1],
                self.multipliers[i],
                if self.sv_labels[i] > 0.0 { 1 } else { -1 },
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SvmError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| SvmError::BadDump("empty dump".into()))?;
        let h: Vec<f64> = head
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| SvmError::BadDump(e.to_string()))?;
        if h.len() != 3 {
            return Err(SvmError::BadDump("header needs w0 gamma c".into()));
        }
        let params = KernelParams::new(h[1], h[2])?;
        let mut support_vectors = Vec::new();
        let mut multipliers = Vec::new();
        let mut sv_labels = Vec::new();
        for line in lines {
            let t: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| SvmError::BadDump(e.to_string()))?;
            if t.len() != 4 {
                return Err(SvmError::BadDump("sv line needs x0 x1 alpha y".into()));
            }
            if t[3] != 1.0 && t[3] != -1.0 {
                return Err(SvmError::BadLabel);
            }
            support_vectors.push([t[0], t[1]]);
            multipliers.push(t[2]);
            sv_labels.push(t[3]);
        }
        if support_vectors.is_empty() {
            return Err(SvmError::BadDump("model without support vectors".into()));
        }
        Ok(SvmModel::new(
            support_vectors,
            multipliers,
            sv_labels,
            h[0],
            params,
        ))
    }
}
