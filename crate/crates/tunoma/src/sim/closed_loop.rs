//! The frame-by-frame closed loop: generate, superpose, SIC, classify,
//! estimate, decide, and apply decisions with a one-frame delay.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amc::classify;
use crate::capacity::{user_rates, PowerLedger};
use crate::config::SimConfig;
use crate::cqi::CqiTable;
use crate::link::{coding_rate, decide, ChannelState, PowerConfig, Situation};
use crate::phy::{
    modulate, sic_detect, sic_order, superpose_tu_noma, ChannelRealization, Scheme,
};
use crate::sinr::{estimate_sinr, extract_error_signal};
use crate::util::derive_seed;

use super::SimError;

/// Which link-adaptation policy drives the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Controller {
    /// Blind classification + margin SINR + the three-situation rule.
    Proposed,
    /// Genie CQI from the true SINR each frame, constant transmit powers.
    FixedLte,
    /// Uniformly random CQI level each frame, powered at that level's
    /// minimum.
    RandomCqi,
}

impl Controller {
    pub fn name(self) -> &'static str {
        match self {
            Controller::Proposed => "proposed",
            Controller::FixedLte => "fixed-lte",
            Controller::RandomCqi => "random",
        }
    }
}

/// Everything observed about one user in one frame.
#[derive(Debug, Clone)]
pub struct UserFrameRecord {
    pub true_scheme: Scheme,
    /// Blind classification result (proposed controller only).
    pub recognized: Option<Scheme>,
    pub amc_success: Option<bool>,
    /// SINR driving the decision: estimated for the proposed controller,
    /// genie for the baselines.
    pub sinr_db: f64,
    pub true_sinr_db: f64,
    /// CQI level of `sinr_db`.
    pub level: usize,
    /// Next-frame modulation decided this frame.
    pub decision_scheme: Scheme,
    pub coding_rate: f64,
    /// Power used in this frame.
    pub tx_power: f64,
    /// Power assigned for the next frame.
    pub next_power: f64,
    pub situation: Option<Situation>,
    pub clamped: bool,
    pub converged: bool,
    /// Information-theoretic rate bound of this frame's transmission (genie
    /// SINRs through the two-user interference structure).
    pub rate_bound: f64,
    /// MCS goodput: the used level's spectral efficiency when the true SINR
    /// meets that level's floor, else 0.
    pub goodput: f64,
    pub channel_gain: f64,
}

#[derive(Debug, Clone)]
pub struct FrameRecord {
    pub frame: usize,
    pub users: [UserFrameRecord; 2],
}

#[derive(Debug, Clone)]
pub struct ClosedLoopOutput {
    pub controller: Controller,
    pub records: Vec<FrameRecord>,
    pub ledger: PowerLedger,
    /// Per-frame summed goodput.
    pub goodput: Vec<f64>,
    /// Per-frame summed rate bound.
    pub rate_bound: Vec<f64>,
}

// seed stream tags
const TAG_BITS: u64 = 0x01;
const TAG_CHANNEL: u64 = 0x02;
const TAG_NOISE: u64 = 0x03;
const TAG_RANDOM_LEVEL: u64 = 0x04;

#[derive(Clone, Copy)]
struct UserState {
    scheme: Scheme,
    level: usize,
    coding_rate: f64,
    power: f64,
}

/// Run the proposed closed loop.
pub fn run_closed_loop(cfg: &SimConfig) -> Result<ClosedLoopOutput, SimError> {
    run_controller_loop(cfg, Controller::Proposed)
}

/// Run the closed loop under a specific controller. Frame generation draws
/// from controller-independent seed streams so different controllers see
/// identical bits, channels, and noise (common random numbers).
pub fn run_controller_loop(
    cfg: &SimConfig,
    controller: Controller,
) -> Result<ClosedLoopOutput, SimError> {
    cfg.validate()?;
    let table = CqiTable::builtin();
    let sigma2 = cfg.noise_variance();
    let power_cfg: PowerConfig = cfg.power_config();
    let mode = cfg.effective_sinr_mode();

    let mut state: [UserState; 2] = [0, 1].map(|u| {
        let scheme = cfg.initial_schemes[u];
        let level = CqiTable::band_floor(scheme);
        UserState {
            scheme,
            level,
            coding_rate: coding_rate(table, level, scheme),
            power: cfg.noma_powers[u],
        }
    });

    let mut records = Vec::with_capacity(cfg.frames);
    let mut ledger = PowerLedger::new();
    let mut goodput_series = Vec::with_capacity(cfg.frames);
    let mut bound_series = Vec::with_capacity(cfg.frames);

    for frame in 0..cfg.frames {
        // --- generate (controller-independent streams) ---
        let mut blocks: Vec<Vec<Complex64>> = Vec::with_capacity(2);
        for u in 0..2 {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, TAG_BITS + 10 * u as u64, frame as u64));
            let bits: Vec<u8> = (0..cfg.frame_symbols * state[u].scheme.bits_per_symbol())
                .map(|_| rng.random_range(0..=1u8))
                .collect();
            blocks.push(modulate(&bits, state[u].scheme)?);
        }
        let channels: Vec<ChannelRealization> = (0..2)
            .map(|u| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    cfg.seed,
                    TAG_CHANNEL + 10 * u as u64,
                    frame as u64,
                ));
                ChannelRealization::draw(&mut rng, sigma2)
            })
            .collect();
        let powers = [state[0].power, state[1].power];
        let mut noise_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, TAG_NOISE, frame as u64));
        let frame_data = superpose_tu_noma(
            &blocks,
            &powers,
            &channels,
            &[state[0].scheme, state[1].scheme],
            &mut noise_rng,
        )?;
        let order = sic_order(&frame_data);
        let soft = sic_detect(&frame_data, &order)?;

        // --- receiver-side knowledge ---
        let gains = [channels[0].gain(), channels[1].gain()];
        let first = order[0];
        let second = order[1];
        let ipn = {
            let mut v = [0.0; 2];
            v[first] = gains[second] * powers[second] + sigma2;
            v[second] = sigma2;
            v
        };
        let true_sinr_lin = [
            gains[0] * powers[0] / ipn[0],
            gains[1] * powers[1] / ipn[1],
        ];
        let true_sinr_db = true_sinr_lin.map(|s| 10.0 * s.log10());

        // --- per-user control ---
        let controlled: Vec<(UserState, UserFrameRecord)> = match controller {
            Controller::Proposed => {
                let results: Vec<_> = {
                    let run = |u: usize| -> Result<_, SimError> {
                        let amc = classify(&soft[u], &cfg.candidates, &cfg.amc)?;
                        let fit = amc.chosen_fit();
                        let err = extract_error_signal(fit);
                        let est =
                            estimate_sinr(&fit.normalized, &err, amc.chosen, mode, table)?;
                        Ok((amc.chosen, fit.converged, est))
                    };
                    let (a, b) = rayon::join(|| run(0), || run(1));
                    vec![a?, b?]
                };
                (0..2)
                    .map(|u| {
                        let (recognized, converged, est) = results[u].clone();
                        let channel_state = ChannelState {
                            gain: gains[u],
                            interference_plus_noise: ipn[u],
                        };
                        let (next, situation, clamped) = if converged {
                            let d = decide(
                                table,
                                recognized,
                                &est,
                                channel_state,
                                state[u].power,
                                &power_cfg,
                            )?;
                            (
                                UserState {
                                    scheme: d.scheme,
                                    level: d.level_used,
                                    coding_rate: d.coding_rate,
                                    power: d.tx_power,
                                },
                                Some(d.situation),
                                d.clamped,
                            )
                        } else {
                            // solver flagged: retain the previous decision
                            (state[u], None, false)
                        };
                        Ok((
                            next,
                            UserFrameRecord {
                                true_scheme: state[u].scheme,
                                recognized: Some(recognized),
                                amc_success: Some(recognized == state[u].scheme),
                                sinr_db: est.sinr_db,
                                true_sinr_db: true_sinr_db[u],
                                level: est.level_index,
                                decision_scheme: next.scheme,
                                coding_rate: next.coding_rate,
                                tx_power: powers[u],
                                next_power: next.power,
                                situation,
                                clamped,
                                converged,
                                rate_bound: 0.0,
                                goodput: 0.0,
                                channel_gain: gains[u],
                            },
                        ))
                    })
                    .collect::<Result<Vec<_>, SimError>>()?
            }
            Controller::FixedLte => (0..2)
                .map(|u| {
                    let level = table.level_for_sinr(true_sinr_db[u]);
                    let scheme = table.row(level).scheme;
                    let next = UserState {
                        scheme,
                        level,
                        coding_rate: coding_rate(table, level, scheme),
                        power: cfg.noma_powers[u], // fixed power policy
                    };
                    Ok((
                        next,
                        UserFrameRecord {
                            true_scheme: state[u].scheme,
                            recognized: None,
                            amc_success: None,
                            sinr_db: true_sinr_db[u],
                            true_sinr_db: true_sinr_db[u],
                            level,
                            decision_scheme: scheme,
                            coding_rate: next.coding_rate,
                            tx_power: powers[u],
                            next_power: next.power,
                            situation: None,
                            clamped: false,
                            converged: true,
                            rate_bound: 0.0,
                            goodput: 0.0,
                            channel_gain: gains[u],
                        },
                    ))
                })
                .collect::<Result<Vec<_>, SimError>>()?,
            Controller::RandomCqi => (0..2)
                .map(|u| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        cfg.seed,
                        TAG_RANDOM_LEVEL + 10 * u as u64,
                        frame as u64,
                    ));
                    let level = rng.random_range(1..=15usize);
                    let scheme = table.row(level).scheme;
                    let channel_state = ChannelState {
                        gain: gains[u],
                        interference_plus_noise: ipn[u],
                    };
                    let (p, clamped) = crate::link::update_power(
                        table,
                        level,
                        channel_state,
                        0.0,
                        &power_cfg,
                    )?;
                    let next = UserState {
                        scheme,
                        level,
                        coding_rate: coding_rate(table, level, scheme),
                        power: p,
                    };
                    Ok((
                        next,
                        UserFrameRecord {
                            true_scheme: state[u].scheme,
                            recognized: None,
                            amc_success: None,
                            sinr_db: true_sinr_db[u],
                            true_sinr_db: true_sinr_db[u],
                            level,
                            decision_scheme: scheme,
                            coding_rate: next.coding_rate,
                            tx_power: powers[u],
                            next_power: p,
                            situation: None,
                            clamped,
                            converged: true,
                            rate_bound: 0.0,
                            goodput: 0.0,
                            channel_gain: gains[u],
                        },
                    ))
                })
                .collect::<Result<Vec<_>, SimError>>()?,
        };

        let (next_states, mut recs): (Vec<UserState>, Vec<UserFrameRecord>) =
            controlled.into_iter().unzip();

        // --- this frame's achieved capacity under the transmission in use ---
        let (r_first, r_second) = user_rates(
            true_sinr_lin[first],
            true_sinr_lin[second],
            gains[first],
            gains[second],
            powers[first],
            powers[second],
            1.0,
            1.0,
            cfg.fidelity.literal19,
        )?;
        recs[first].rate_bound = r_first;
        recs[second].rate_bound = r_second;
        for u in 0..2 {
            let row = table.row(state[u].level);
            recs[u].goodput = if true_sinr_db[u] >= row.sinr_min_db {
                row.spectral_efficiency
            } else {
                0.0
            };
        }

        let any_clamped = recs.iter().any(|r| r.clamped);
        ledger.push(powers, any_clamped);
        goodput_series.push(recs[0].goodput + recs[1].goodput);
        bound_series.push(recs[0].rate_bound + recs[1].rate_bound);
        records.push(FrameRecord {
            frame,
            users: [recs[0].clone(), recs[1].clone()],
        });

        // decisions from frame t drive frame t+1
        state = [next_states[0], next_states[1]];
    }

    Ok(ClosedLoopOutput {
        controller,
        records,
        ledger,
        goodput: goodput_series,
        rate_bound: bound_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> SimConfig {
        SimConfig {
            frames: 6,
            frame_symbols: 300,
            snr_db: 18.0,
            amc: crate::amc::AmcParams {
                ref_snr_lo: -8.0,
                ref_snr_hi: 28.0,
                ref_snr_step: 4.0,
                ref_reps: 1,
                ..Default::default()
            },
            candidates: vec![Scheme::Qpsk, Scheme::Qam16],
            ..SimConfig::default()
        }
    }

    #[test]
    fn loop_runs_and_records_every_frame() {
        let cfg = quick_cfg();
        let out = run_closed_loop(&cfg).unwrap();
        assert_eq!(out.records.len(), 6);
        assert_eq!(out.ledger.frames(), 6);
        for r in &out.records {
            for u in &r.users {
                assert!(u.tx_power > 0.0 && u.tx_power <= cfg.power_max);
                assert!(u.sinr_db.is_finite());
                assert!(u.goodput >= 0.0);
            }
        }
    }

    #[test]
    fn identical_seeds_identical_records() {
        let cfg = quick_cfg();
        let a = run_closed_loop(&cfg).unwrap();
        let b = run_closed_loop(&cfg).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            for u in 0..2 {
                assert_eq!(x.users[u].sinr_db.to_bits(), y.users[u].sinr_db.to_bits());
                assert_eq!(x.users[u].next_power.to_bits(), y.users[u].next_power.to_bits());
                assert_eq!(x.users[u].decision_scheme, y.users[u].decision_scheme);
            }
        }
    }

    #[test]
    fn modulation_order_never_drops_below_recognized() {
        let cfg = quick_cfg();
        let out = run_closed_loop(&cfg).unwrap();
        for r in &out.records {
            for u in &r.users {
                if let Some(m) = u.recognized {
                    assert!(u.decision_scheme >= m);
                }
            }
        }
    }

    #[test]
    fn baselines_share_random_streams() {
        let cfg = quick_cfg();
        let a = run_controller_loop(&cfg, Controller::FixedLte).unwrap();
        let b = run_controller_loop(&cfg, Controller::RandomCqi).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            for u in 0..2 {
                assert_eq!(
                    x.users[u].channel_gain.to_bits(),
                    y.users[u].channel_gain.to_bits()
                );
            }
        }
    }
}
