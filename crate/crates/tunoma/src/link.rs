//! Link adaptation and power control: coding rate from the CQI table, the
//! per-level minimum power, and the three-situation decision rule.
//!
//! The rule keys on the band of the recognized modulation (levels 1-6 QPSK,
//! 7-9 16QAM, 10-15 64QAM) versus the estimated-SINR level `i_s`:
//! coordinated (same band) keeps the modulation; a lower `i_s` keeps the
//! modulation but forces the band floor level, buying power to compensate
//! attenuation instead of dropping order; a higher `i_s` raises the
//! modulation order to the `i_s` level without extra power. The effective
//! level is always `max(i_s, band floor of the recognized scheme)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cqi::CqiTable;
use crate::phy::Scheme;
use crate::sinr::SinrEstimate;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("channel gain must be > 0 (singular channel)")]
    SingularChannel,
    #[error("level index {0} outside 1..=15")]
    BadLevel(usize),
}

/// Relation between the recognized modulation's band and the SINR level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Situation {
    /// i_s inside the recognized band: keep everything, track the channel.
    Coordinated,
    /// i_s below the band: attenuated channel, raise power to the band floor.
    LessSinr,
    /// i_s above the band: headroom, raise the modulation order instead.
    MoreSinr,
}

impl std::fmt::Display for Situation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Situation::Coordinated => "coordinated",
            Situation::LessSinr => "less-sinr",
            Situation::MoreSinr => "more-sinr",
        })
    }
}

/// Next-frame assignment for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDecision {
    pub scheme: Scheme,
    /// Coding rate = spectral efficiency of `level_used` / bits per symbol.
    pub coding_rate: f64,
    /// Transmit power after clamping (linear).
    pub tx_power: f64,
    pub level_used: usize,
    pub situation: Situation,
    /// True when the power hit a clamp bound.
    pub clamped: bool,
}

/// Power-control configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerConfig {
    pub p_floor: f64,
    pub p_max: f64,
    /// Literal power rule: add the raw error power instead of the
    /// channel-referenced error power, and freeze the power on the
    /// "no change" cells instead of re-tracking the channel.
    pub literal16: bool,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            p_floor: 1e-4,
            p_max: 1.0,
            literal16: false,
        }
    }
}

/// Receiver-side channel knowledge for one user.
#[derive(Debug, Clone, Copy)]
pub struct ChannelState {
    /// Linear power gain |h|^2.
    pub gain: f64,
    /// Interference-plus-noise power seen by this user's detector.
    pub interference_plus_noise: f64,
}

/// Coding rate of `level` when transmitting with `scheme`.
pub fn coding_rate(table: &CqiTable, level: usize, scheme: Scheme) -> f64 {
    table.row(level).spectral_efficiency / scheme.bits_per_symbol() as f64
}

/// Smallest transmit power whose received SINR reaches the level's floor
/// under the measured channel.
pub fn min_power_for_level(
    table: &CqiTable,
    level: usize,
    channel_gain: f64,
    interference_plus_noise: f64,
) -> Result<f64, LinkError> {
    if !(1..=15).contains(&level) {
        return Err(LinkError::BadLevel(level));
    }
    if channel_gain <= 0.0 {
        return Err(LinkError::SingularChannel);
    }
    let floor_linear = 10f64.powf(table.row(level).sinr_min_db / 10.0);
    Ok(floor_linear * interference_plus_noise / channel_gain)
}

/// Level-minimum power plus the error-power term, clamped to the configured
/// bounds. Returns (power, clamped).
pub fn update_power(
    table: &CqiTable,
    level: usize,
    channel: ChannelState,
    error_power: f64,
    cfg: &PowerConfig,
) -> Result<(f64, bool), LinkError> {
    let p_min = min_power_for_level(table, level, channel.gain, channel.interference_plus_noise)?;
    let bump = if cfg.literal16 {
        error_power
    } else {
        // error power is measured at the receiver; refer it back through the
        // channel so the sum stays in transmit-power units
        error_power / channel.gain
    };
    let raw = p_min + bump;
    let p = raw.clamp(cfg.p_floor, cfg.p_max);
    Ok((p, p != raw))
}

/// The three-situation decision rule over (recognized scheme, SINR level).
pub fn decide(
    table: &CqiTable,
    recognized: Scheme,
    sinr: &SinrEstimate,
    channel: ChannelState,
    previous_power: f64,
    cfg: &PowerConfig,
) -> Result<LinkDecision, LinkError> {
    let i_s = sinr.level_index;
    if !(1..=15).contains(&i_s) {
        return Err(LinkError::BadLevel(i_s));
    }
    let floor = CqiTable::band_floor(recognized);
    let ceil = CqiTable::band_ceil(recognized);
    let situation = if i_s < floor {
        Situation::LessSinr
    } else if i_s > ceil {
        Situation::MoreSinr
    } else {
        Situation::Coordinated
    };
    let level_used = i_s.max(floor);
    let scheme = table.row(level_used).scheme;
    let rate = coding_rate(table, level_used, scheme);

    // literal mode freezes power on the cells whose power column reads
    // "no change": every QPSK row, and 16QAM with i_s >= 7
    let freeze = cfg.literal16
        && match recognized {
            Scheme::Qpsk => true,
            Scheme::Qam16 => i_s >= 7,
            Scheme::Qam64 => false,
        };
    let (tx_power, clamped) = if freeze {
        (previous_power.clamp(cfg.p_floor, cfg.p_max), false)
    } else {
        update_power(table, level_used, channel, sinr.error_power, cfg)?
    };

    Ok(LinkDecision {
        scheme,
        coding_rate: rate,
        tx_power,
        level_used,
        situation,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqi::CqiTable;

    fn t() -> &'static CqiTable {
        CqiTable::builtin()
    }

    fn est(level: usize, error_power: f64) -> SinrEstimate {
        SinrEstimate {
            sinr_db: t().row(level).sinr_min_db + 0.01,
            signal_power: 1.0,
            error_power,
            level_index: level,
        }
    }

    fn state(gain: f64, ipn: f64) -> ChannelState {
        ChannelState {
            gain,
            interference_plus_noise: ipn,
        }
    }

    #[test]
    fn coding_rate_table_values() {
        assert_eq!(coding_rate(t(), 8, Scheme::Qam16), 0.478525);
        assert_eq!(coding_rate(t(), 1, Scheme::Qpsk), 0.07615);
        assert!((coding_rate(t(), 15, Scheme::Qam64) - 0.925_783_333_333_333_3).abs() < 1e-15);
    }

    #[test]
    fn min_power_identity_and_linearity() {
        // a 0 dB floor with unit channel and unit I+N needs unit power
        // (row 4's floor is 0.2 dB, so scale off the exact formula instead)
        let p = min_power_for_level(t(), 7, 0.5, 0.1).unwrap();
        let expected = 10f64.powf(0.59) * 0.1 / 0.5;
        assert!((p - expected).abs() < 1e-12);
        assert!((p - 0.778_279_410_038_922_8).abs() < 1e-9);
        // doubling I+N doubles p_min
        let p2 = min_power_for_level(t(), 7, 0.5, 0.2).unwrap();
        assert!((p2 - 2.0 * p).abs() < 1e-12);
    }

    #[test]
    fn singular_channel_rejected() {
        assert!(matches!(
            min_power_for_level(t(), 7, 0.0, 0.1),
            Err(LinkError::SingularChannel)
        ));
    }

    #[test]
    fn update_power_adds_error_term() {
        let cfg = PowerConfig {
            p_max: 10.0,
            ..PowerConfig::default()
        };
        let ch = state(0.5, 0.1);
        let (p0, c0) = update_power(t(), 7, ch, 0.0, &cfg).unwrap();
        let p_min = min_power_for_level(t(), 7, 0.5, 0.1).unwrap();
        assert!((p0 - p_min).abs() < 1e-12);
        assert!(!c0);
        // channel-referenced: 0.05 / 0.5 = 0.1 on top
        let (p1, _) = update_power(t(), 7, ch, 0.05, &cfg).unwrap();
        assert!((p1 - (p_min + 0.1)).abs() < 1e-12);
        // literal form adds the raw error power
        let lit = PowerConfig {
            p_max: 10.0,
            literal16: true,
            ..PowerConfig::default()
        };
        let (p2, _) = update_power(t(), 7, ch, 0.05, &lit).unwrap();
        assert!((p2 - (p_min + 0.05)).abs() < 1e-12);
    }

    #[test]
    fn power_clamps_and_flags() {
        let cfg = PowerConfig::default(); // p_max = 1.0
        let (p, clamped) = update_power(t(), 15, state(0.1, 0.5), 0.0, &cfg).unwrap();
        assert_eq!(p, 1.0);
        assert!(clamped);
    }

    #[test]
    fn qpsk_with_high_sinr_upgrades_order() {
        let d = decide(
            t(),
            Scheme::Qpsk,
            &est(8, 0.0),
            state(1.0, 0.01),
            0.5,
            &PowerConfig::default(),
        )
        .unwrap();
        assert_eq!(d.scheme, Scheme::Qam16);
        assert_eq!(d.level_used, 8);
        assert_eq!(d.coding_rate, 0.478525);
        assert_eq!(d.situation, Situation::MoreSinr);
    }

    #[test]
    fn qam16_with_low_sinr_forces_band_floor() {
        let d = decide(
            t(),
            Scheme::Qam16,
            &est(4, 0.0),
            state(1.0, 0.01),
            0.5,
            &PowerConfig::default(),
        )
        .unwrap();
        assert_eq!(d.scheme, Scheme::Qam16);
        assert_eq!(d.level_used, 7);
        assert!((d.coding_rate - 1.4766 / 4.0).abs() < 1e-12);
        assert_eq!(d.situation, Situation::LessSinr);
        let p_min = min_power_for_level(t(), 7, 1.0, 0.01).unwrap();
        assert!((d.tx_power - p_min).abs() < 1e-12);
    }

    #[test]
    fn qam64_coordinated_tracks_level() {
        let d = decide(
            t(),
            Scheme::Qam64,
            &est(12, 0.0),
            state(1.0, 0.001),
            0.5,
            &PowerConfig::default(),
        )
        .unwrap();
        assert_eq!(d.scheme, Scheme::Qam64);
        assert_eq!(d.level_used, 12);
        assert!((d.coding_rate - 3.9023 / 6.0).abs() < 1e-12);
        assert_eq!(d.situation, Situation::Coordinated);
    }

    #[test]
    fn modulation_order_never_decreases() {
        for recognized in Scheme::ALL {
            for i_s in 1..=15 {
                let d = decide(
                    t(),
                    recognized,
                    &est(i_s, 0.0),
                    state(1.0, 0.01),
                    0.3,
                    &PowerConfig::default(),
                )
                .unwrap();
                assert!(
                    d.scheme >= recognized,
                    "{recognized} at i_s={i_s} decided {}",
                    d.scheme
                );
                assert_eq!(d.level_used, i_s.max(CqiTable::band_floor(recognized)));
            }
        }
    }

    #[test]
    fn literal16_freezes_no_change_cells() {
        let cfg = PowerConfig {
            literal16: true,
            ..PowerConfig::default()
        };
        let prev = 0.123;
        // QPSK rows freeze
        let d = decide(t(), Scheme::Qpsk, &est(3, 0.5), state(1.0, 0.01), prev, &cfg).unwrap();
        assert_eq!(d.tx_power, prev);
        // 16QAM below band recomputes (increase cell)
        let d2 = decide(t(), Scheme::Qam16, &est(2, 0.0), state(1.0, 0.01), prev, &cfg).unwrap();
        assert_ne!(d2.tx_power, prev);
    }
}
