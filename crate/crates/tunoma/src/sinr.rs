//! Decode-free SINR estimation from the hypothesis fit's margin statistics.
//!
//! The error signal collects the received symbols that violate the SVM
//! margin under the chosen hypothesis. Three estimator modes turn symbol
//! deviations into an SINR:
//!
//! - `Corrected` (default): mean squared nearest-point deviation over the
//!   whole block, de-biased through the constellation's analytic
//!   clipped-Gaussian deviation curve (nearest-point quantization understates
//!   the noise once the noise is comparable to the point spacing, and
//!   unit-power normalization shrinks the signal relative to the reference
//!   grid; both effects are invertible for a known constellation).
//! - `Deviation`: the violators' nearest-point deviation power spread over
//!   the frame.
//! - `Literal13`: the violators' raw symbol power spread over the frame.
//!
//! Estimates are capped at +40 dB (above every CQI band) so a violator-free
//! frame maps harmlessly to the top level. This module never touches bits or
//! code words; its only inputs are post-SIC symbols and the SVM fit.

use num_complex::Complex64;
use statrs::function::erf::erf;
use thiserror::Error;

use crate::amc::AmcHypothesisFit;
use crate::cqi::CqiTable;
use crate::phy::{Constellation, Scheme};

/// Estimates never exceed this (dB).
pub const SINR_CAP_DB: f64 = 40.0;
/// Estimates never fall below this (dB); the CQI floor is -6.7 dB.
pub const SINR_FLOOR_DB: f64 = -12.0;

#[derive(Debug, Error)]
pub enum SinrError {
    #[error("empty symbol block")]
    EmptyBlock,
}

/// Margin-violating received symbols of one frame.
#[derive(Debug, Clone)]
pub struct ErrorSignal {
    /// The violating symbols, in the fit's normalized domain.
    pub entries: Vec<Complex64>,
    /// Total symbols in the frame the entries were drawn from.
    pub source_count: usize,
}

/// Estimator mode; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrMode {
    #[default]
    Corrected,
    Deviation,
    Literal13,
}

/// SINR estimate with its power decomposition and CQI level.
#[derive(Debug, Clone, Copy)]
pub struct SinrEstimate {
    pub sinr_db: f64,
    /// Signal power attributed by the estimator (block units).
    pub signal_power: f64,
    /// Error power attributed by the estimator (block units);
    /// sinr_db = 10 log10(signal_power / error_power) exactly.
    pub error_power: f64,
    /// CQI level whose band contains `sinr_db`.
    pub level_index: usize,
}

/// Collect the symbols whose own-class functional margin falls below the
/// fit's violation threshold. Symbols at margin >= threshold contribute
/// nothing. A fit without a trained model (empty pseudo-class) marks every
/// symbol as violating, matching its violation rate of 1.
pub fn extract_error_signal(fit: &AmcHypothesisFit) -> ErrorSignal {
    let entries = if fit.margins.is_empty() {
        fit.normalized.clone()
    } else {
        fit.normalized
            .iter()
            .zip(&fit.margins)
            .filter(|(_, &m)| m < fit.margin_threshold)
            .map(|(s, _)| *s)
            .collect()
    };
    ErrorSignal {
        entries,
        source_count: fit.normalized.len(),
    }
}

/// Estimate the SINR of a (normalized) block under `scheme`.
pub fn estimate_sinr(
    block: &[Complex64],
    err: &ErrorSignal,
    scheme: Scheme,
    mode: SinrMode,
    table: &CqiTable,
) -> Result<SinrEstimate, SinrError> {
    if block.is_empty() {
        return Err(SinrError::EmptyBlock);
    }
    let n = block.len() as f64;
    let signal_power: f64 = block.iter().map(|s| s.norm_sqr()).sum::<f64>() / n;
    let constellation = Constellation::for_scheme(scheme);

    let (sinr_db, signal_power, error_power) = match mode {
        SinrMode::Literal13 => {
            let e2: f64 = err.entries.iter().map(|s| s.norm_sqr()).sum::<f64>() / n;
            ratio_estimate(signal_power, e2)
        }
        SinrMode::Deviation => {
            let e2: f64 = err
                .entries
                .iter()
                .map(|s| constellation.nearest(*s).1)
                .sum::<f64>()
                / n;
            ratio_estimate(signal_power, e2)
        }
        SinrMode::Corrected => {
            // deviations measured on the unit-power rescaled block so the
            // clipped-Gaussian model applies regardless of input scaling
            let scale = 1.0 / signal_power.sqrt();
            let m: f64 = block
                .iter()
                .map(|s| constellation.nearest(s * scale).1)
                .sum::<f64>()
                / n;
            let sinr_db = declip_sinr_db(m, scheme);
            let rho = 10f64.powf(sinr_db / 10.0);
            (
                sinr_db,
                signal_power * rho / (1.0 + rho),
                signal_power / (1.0 + rho),
            )
        }
    };

    Ok(SinrEstimate {
        sinr_db,
        signal_power,
        error_power,
        level_index: table.level_for_sinr(sinr_db),
    })
}

fn ratio_estimate(signal_power: f64, error_power: f64) -> (f64, f64, f64) {
    if error_power <= 0.0 {
        // cap: attribute the implied residual so the ratio identity holds
        let e = signal_power / 10f64.powf(SINR_CAP_DB / 10.0);
        return (SINR_CAP_DB, signal_power, e);
    }
    let db = 10.0 * (signal_power / error_power).log10();
    if db > SINR_CAP_DB {
        let e = signal_power / 10f64.powf(SINR_CAP_DB / 10.0);
        (SINR_CAP_DB, signal_power, e)
    } else {
        (db, signal_power, error_power)
    }
}

/// Map an SINR to its CQI level (half-open bands, floor/ceiling convention).
pub fn map_to_level(sinr_db: f64, table: &CqiTable) -> usize {
    table.level_for_sinr(sinr_db)
}

// ---------------------------------------------------------------------------
// Clipped-Gaussian deviation model
// ---------------------------------------------------------------------------

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Expected mean squared nearest-point deviation of a unit-power block of
/// `scheme` at linear SNR `rho`: the transmitted grid shrinks by
/// lambda = sqrt(rho/(1+rho)) under unit-power normalization while per-axis
/// noise has variance 1/(2(1+rho)); deviations are measured against the
/// unshrunk reference grid with nearest-point (Voronoi) quantization.
pub fn expected_dev_power(rho: f64, scheme: Scheme) -> f64 {
    let levels = Constellation::for_scheme(scheme).axis_levels();
    let k = levels.len();
    let lambda = (rho / (1.0 + rho)).sqrt();
    let s = (1.0 / (2.0 * (1.0 + rho))).sqrt();

    let mut total = 0.0;
    for &mu0 in levels {
        let mu = lambda * mu0;
        for (j, &aj) in levels.iter().enumerate() {
            let lower = if j == 0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (levels[j - 1] + aj)
            };
            let upper = if j == k - 1 {
                f64::INFINITY
            } else {
                0.5 * (aj + levels[j + 1])
            };
            let a = if lower.is_finite() {
                (lower - mu) / s
            } else {
                f64::NEG_INFINITY
            };
            let b = if upper.is_finite() {
                (upper - mu) / s
            } else {
                f64::INFINITY
            };
            let (pa, pb) = (
                if a.is_finite() { phi(a) } else { 0.0 },
                if b.is_finite() { phi(b) } else { 0.0 },
            );
            let (ca, cb) = (
                if a.is_finite() { cdf(a) } else { 0.0 },
                if b.is_finite() { cdf(b) } else { 1.0 },
            );
            let dp = cb - ca;
            if dp <= 0.0 {
                continue;
            }
            let apa = if a.is_finite() { a * pa } else { 0.0 };
            let bpb = if b.is_finite() { b * pb } else { 0.0 };
            let t2 = s * s * (dp - (bpb - apa));
            let t1 = s * (pa - pb);
            let d = mu - aj;
            total += t2 + 2.0 * d * t1 + d * d * dp;
        }
    }
    2.0 * total / k as f64
}

/// Invert [`expected_dev_power`] by bisection over [SINR_FLOOR_DB, SINR_CAP_DB].
pub fn declip_sinr_db(measured_dev_power: f64, scheme: Scheme) -> f64 {
    if measured_dev_power <= 0.0 {
        return SINR_CAP_DB;
    }
    let (mut lo, mut hi) = (SINR_FLOOR_DB, SINR_CAP_DB);
    if measured_dev_power >= expected_dev_power(10f64.powf(lo / 10.0), scheme) {
        return lo;
    }
    if measured_dev_power <= expected_dev_power(10f64.powf(hi / 10.0), scheme) {
        return hi;
    }
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if expected_dev_power(10f64.powf(mid / 10.0), scheme) > measured_dev_power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
