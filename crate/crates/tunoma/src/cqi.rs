//! The 15-level CQI lookup table binding SINR bands to modulation and
//! spectral efficiency. Levels 1-6 are QPSK, 7-9 16QAM, 10-15 64QAM; bands
//! are half-open `[min, max)` and tile (-6.7, +inf).

use std::fmt::Write as _;
use std::sync::OnceLock;

use thiserror::Error;

use crate::phy::Scheme;
use crate::util::fmt6;

#[derive(Debug, Error)]
pub enum CqiError {
    #[error("table must have 15 rows, got {0}")]
    RowCount(usize),
    #[error("row {0}: index out of order")]
    IndexOrder(usize),
    #[error("row {0}: SINR bands do not tile (gap or overlap)")]
    BandTiling(usize),
    #[error("row {0}: scheme does not match its level band")]
    SchemeBand(usize),
    #[error("row {0}: bits/symbol inconsistent with scheme")]
    BitsMismatch(usize),
    #[error("row {0}: spectral efficiency not increasing")]
    EfficiencyOrder(usize),
    #[error("csv parse error on line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// One row of the lookup table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqiLevel {
    /// 1-based level index.
    pub index: usize,
    pub scheme: Scheme,
    pub bits_per_symbol: u32,
    pub sinr_min_db: f64,
    /// +inf for the open-ended last row.
    pub sinr_max_db: f64,
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone)]
pub struct CqiTable {
    rows: Vec<CqiLevel>,
}

const BUILTIN: [(usize, Scheme, u32, f64, f64, f64); 15] = [
    (1, Scheme::Qpsk, 2, -6.7, -4.7, 0.1523),
    (2, Scheme::Qpsk, 2, -4.7, -2.3, 0.2344),
    (3, Scheme::Qpsk, 2, -2.3, 0.2, 0.3770),
    (4, Scheme::Qpsk, 2, 0.2, 2.4, 0.6016),
    (5, Scheme::Qpsk, 2, 2.4, 4.3, 0.8770),
    (6, Scheme::Qpsk, 2, 4.3, 5.9, 1.1758),
    (7, Scheme::Qam16, 4, 5.9, 8.1, 1.4766),
    (8, Scheme::Qam16, 4, 8.1, 10.3, 1.9141),
    (9, Scheme::Qam16, 4, 10.3, 11.7, 2.4063),
    (10, Scheme::Qam64, 6, 11.7, 14.1, 2.7305),
    (11, Scheme::Qam64, 6, 14.1, 16.3, 3.3223),
    (12, Scheme::Qam64, 6, 16.3, 18.7, 3.9023),
    (13, Scheme::Qam64, 6, 18.7, 21.0, 4.5234),
    // row 14's 4.1152 is printed this way in the source table even though it
    // breaks efficiency monotonicity; kept verbatim
    (14, Scheme::Qam64, 6, 21.0, 22.7, 4.1152),
    (15, Scheme::Qam64, 6, 22.7, f64::INFINITY, 5.5547),
];

impl CqiTable {
    /// The compiled-in table.
    pub fn builtin() -> &'static CqiTable {
        static T: OnceLock<CqiTable> = OnceLock::new();
        T.get_or_init(|| {
            let rows = BUILTIN
                .iter()
                .map(|&(index, scheme, bits, lo, hi, eff)| CqiLevel {
                    index,
                    scheme,
                    bits_per_symbol: bits,
                    sinr_min_db: lo,
                    sinr_max_db: hi,
                    spectral_efficiency: eff,
                })
                .collect();
            let t = CqiTable { rows };
            t.validate().expect("builtin table is well-formed");
            t
        })
    }

    fn validate(&self) -> Result<(), CqiError> {
        if self.rows.len() != 15 {
            return Err(CqiError::RowCount(self.rows.len()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let idx = i + 1;
            if row.index != idx {
                return Err(CqiError::IndexOrder(idx));
            }
            let expected_scheme = match idx {
                1..=6 => Scheme::Qpsk,
                7..=9 => Scheme::Qam16,
                _ => Scheme::Qam64,
            };
            if row.scheme != expected_scheme {
                return Err(CqiError::SchemeBand(idx));
            }
            if row.bits_per_symbol as usize != row.scheme.bits_per_symbol() {
                return Err(CqiError::BitsMismatch(idx));
            }
            if i > 0 && (row.sinr_min_db - self.rows[i - 1].sinr_max_db).abs() > 1e-9 {
                return Err(CqiError::BandTiling(idx));
            }
            if !(row.sinr_min_db < row.sinr_max_db) {
                return Err(CqiError::BandTiling(idx));
            }
            // rows 14 and 15 straddle the table's known monotonicity exception
            if i > 0
                && idx != 14
                && idx != 15
                && row.spectral_efficiency <= self.rows[i - 1].spectral_efficiency
            {
                return Err(CqiError::EfficiencyOrder(idx));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> &[CqiLevel] {
        &self.rows
    }

    /// Row by 1-based level index.
    pub fn row(&self, index: usize) -> &CqiLevel {
        &self.rows[index - 1]
    }

    /// Lowest level index of a scheme's band (1, 7, or 10).
    pub fn band_floor(scheme: Scheme) -> usize {
        match scheme {
            Scheme::Qpsk => 1,
            Scheme::Qam16 => 7,
            Scheme::Qam64 => 10,
        }
    }

    /// Highest level index of a scheme's band (6, 9, or 15).
    pub fn band_ceil(scheme: Scheme) -> usize {
        match scheme {
            Scheme::Qpsk => 6,
            Scheme::Qam16 => 9,
            Scheme::Qam64 => 15,
        }
    }

    /// Level whose half-open band contains `sinr_db`; values below the first
    /// band floor to level 1.
    pub fn level_for_sinr(&self, sinr_db: f64) -> usize {
        if sinr_db < self.rows[0].sinr_min_db {
            return 1;
        }
        for row in &self.rows {
            if sinr_db >= row.sinr_min_db && sinr_db < row.sinr_max_db {
                return row.index;
            }
        }
        15
    }

    /// CSV dump: `index,scheme,bits,sinr_min_db,sinr_max_db,eff`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,scheme,bits,sinr_min_db,sinr_max_db,eff\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.index,
                r.scheme,
                r.bits_per_symbol,
                fmt6(r.sinr_min_db),
                fmt6(r.sinr_max_db),
                fmt6(r.spectral_efficiency)
            );
        }
        out
    }

    /// Parse the [`CqiTable::to_csv`] format and validate.
    pub fn from_csv(text: &str) -> Result<CqiTable, CqiError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
                continue;
            }
            let err = |reason: &str| CqiError::Csv {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(err("expected 6 columns"));
            }
            let parse_db = |s: &str| -> Result<f64, CqiError> {
                if s.eq_ignore_ascii_case("inf") {
                    Ok(f64::INFINITY)
                } else {
                    s.parse().map_err(|_| err("bad float"))
                }
            };
            rows.push(CqiLevel {
                index: f[0].parse().map_err(|_| err("bad index"))?,
                scheme: f[1].parse().map_err(|_| err("bad scheme"))?,
                bits_per_symbol: f[2].parse().map_err(|_| err("bad bits"))?,
                sinr_min_db: parse_db(f[3])?,
                sinr_max_db: parse_db(f[4])?,
                spectral_efficiency: f[5].parse().map_err(|_| err("bad efficiency"))?,
            });
        }
        let t = CqiTable { rows };
        t.validate()?;
        Ok(t)
    }
}
