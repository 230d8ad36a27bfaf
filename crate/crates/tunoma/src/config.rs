//! Simulation configuration: defaults, JSON and key=value parsing, and the
//! fidelity switches that select the literal equation forms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amc::AmcParams;
use crate::link::PowerConfig;
use crate::phy::Scheme;
use crate::sinr::SinrMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Literal-equation switches for fidelity experiments.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FidelitySwitches {
    /// Error entries are the violators' raw symbols.
    pub literal13: bool,
    /// Power update adds the raw error power and freezes "no change" cells.
    pub literal16: bool,
    /// Weak-user rate uses the printed interference denominator.
    pub literal19: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Symbols per frame.
    pub frame_symbols: usize,
    /// Monte Carlo trials per sweep cell.
    pub trials: usize,
    /// SNR grid for the AMC sweep (dB).
    pub snr_sweep_db: Vec<f64>,
    /// Candidate schemes the blind classifier considers.
    pub candidates: Vec<Scheme>,
    /// True schemes swept by `amc-sweep`; defaults to the candidates.
    pub sweep_schemes: Option<Vec<Scheme>>,
    /// SVM / classifier parameters.
    pub amc: AmcParams,
    /// Initial NOMA power split [p1, p2] of the unit budget.
    pub noma_powers: [f64; 2],
    /// Per-user transmit power clamps.
    pub power_floor: f64,
    pub power_max: f64,
    /// Closed-loop operating SNR: noise variance is 10^(-snr_db/10) against
    /// the unit power budget.
    pub snr_db: f64,
    /// Closed-loop / comparison frame count.
    pub frames: usize,
    /// Modulation each user starts with before the first decision.
    pub initial_schemes: [Scheme; 2],
    /// SINR estimator mode: "corrected" (default) or "deviation";
    /// `fidelity.literal13` overrides to the literal form.
    pub sinr_mode: String,
    pub fidelity: FidelitySwitches,
    /// Master seed; every stream derives from it.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            frame_symbols: 1000,
            trials: 500,
            snr_sweep_db: (-6..=14).step_by(2).map(f64::from).collect(),
            candidates: Scheme::ALL.to_vec(),
            sweep_schemes: None,
            amc: AmcParams::default(),
            noma_powers: [0.8, 0.2],
            power_floor: 1e-4,
            power_max: 1.0,
            snr_db: 15.0,
            frames: 1000,
            initial_schemes: [Scheme::Qpsk, Scheme::Qpsk],
            sinr_mode: "corrected".to_string(),
            fidelity: FidelitySwitches::default(),
            seed: 0x7ab1e,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials < 1 {
            return Err(ConfigError::Invalid("trials must be >= 1".into()));
        }
        if self.frame_symbols < 64 {
            return Err(ConfigError::Invalid("frame_symbols must be >= 64".into()));
        }
        if self.noma_powers.iter().any(|&p| p <= 0.0) {
            return Err(ConfigError::Invalid("noma_powers must be > 0".into()));
        }
        if self.noma_powers[0] + self.noma_powers[1] > 1.0 + 1e-12 {
            return Err(ConfigError::Invalid(
                "noma_powers must fit the unit power budget".into(),
            ));
        }
        if self.power_floor <= 0.0 || self.power_floor >= self.power_max {
            return Err(ConfigError::Invalid(
                "need 0 < power_floor < power_max".into(),
            ));
        }
        if self.candidates.is_empty() {
            return Err(ConfigError::Invalid("candidates must be non-empty".into()));
        }
        if !matches!(self.sinr_mode.as_str(), "corrected" | "deviation") {
            return Err(ConfigError::Invalid(format!(
                "unknown sinr_mode '{}'",
                self.sinr_mode
            )));
        }
        Ok(())
    }

    /// Effective estimator mode after the fidelity switch.
    pub fn effective_sinr_mode(&self) -> SinrMode {
        if self.fidelity.literal13 {
            SinrMode::Literal13
        } else if self.sinr_mode == "deviation" {
            SinrMode::Deviation
        } else {
            SinrMode::Corrected
        }
    }

    pub fn power_config(&self) -> PowerConfig {
        PowerConfig {
            p_floor: self.power_floor,
            p_max: self.power_max,
            literal16: self.fidelity.literal16,
        }
    }

    pub fn sweep_schemes(&self) -> Vec<Scheme> {
        self.sweep_schemes
            .clone()
            .unwrap_or_else(|| self.candidates.clone())
    }

    /// Noise variance implied by the closed-loop operating SNR.
    pub fn noise_variance(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    /// Parse a config file: JSON when it starts with '{', otherwise flat
    /// `key = value` lines (nested fields via dots, e.g. `amc.tie_delta`).
    pub fn from_text(text: &str) -> Result<SimConfig, ConfigError> {
        let trimmed = text.trim_start();
        let cfg: SimConfig = if trimmed.starts_with('{') {
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?
        } else {
            let mut root = serde_json::Map::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    ConfigError::Parse(format!("line {}: expected key = value", lineno + 1))
                })?;
                insert_dotted(&mut root, key.trim(), parse_scalar(value.trim()));
            }
            serde_json::from_value(serde_json::Value::Object(root))
                .map_err(|e| ConfigError::Parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Expand an `lo:hi:step` sweep expression into a grid.
    pub fn parse_sweep(expr: &str) -> Result<Vec<f64>, ConfigError> {
        let parts: Vec<&str> = expr.split(':').collect();
        if parts.len() != 3 {
            return Err(ConfigError::Parse(format!(
                "sweep '{expr}' must be lo:hi:step"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError::Parse(format!("bad number in sweep '{expr}'")))
            })
            .collect::<Result<_, _>>()?;
        let (lo, hi, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || hi < lo {
            return Err(ConfigError::Parse(format!("degenerate sweep '{expr}'")));
        }
        let mut out = Vec::new();
        let mut v = lo;
        while v <= hi + 1e-9 {
            out.push(v);
            v += step;
        }
        Ok(out)
    }
}

fn parse_scalar(raw: &str) -> serde_json::Value {
    use serde_json::Value;
    if raw.starts_with('[') || raw.starts_with('{') || raw.starts_with('"') {
        if let Ok(v) = serde_json::from_str(raw) {
            return v;
        }
    }
    match raw {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    if let Ok(i) = raw.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return Value::from(f);
    }
    // bare comma lists become arrays of scalars
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|p| parse_scalar(p.trim())).collect());
    }
    Value::String(raw.to_string())
}

fn insert_dotted(root: &mut serde_json::Map<String, serde_json::Value>, key: &str, value: serde_json::Value) {
    match key.split_once('.') {
        None => {
            root.insert(key.to_string(), value);
        }
        Some((head, rest)) => {
            let entry = root
                .entry(head.to_string())
                .or_insert_with(|| serde_json::Value::Object(serde_json::Map::new()));
            if let serde_json::Value::Object(map) = entry {
                insert_dotted(map, rest, value);
            }
        }
    }
}
