//! Baseline comparison under common random numbers.

use crate::capacity::{compare_baselines, ComparisonStream, SchemeSummary};
use crate::config::SimConfig;

use super::closed_loop::{run_controller_loop, ClosedLoopOutput, Controller};
use super::SimError;

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub summaries: Vec<SchemeSummary>,
    pub proposed: ClosedLoopOutput,
    pub fixed: ClosedLoopOutput,
    pub random: ClosedLoopOutput,
}

/// Run proposed / fixed-LTE-style / random over identical bits, channels,
/// and noise, and summarize total power and mean achieved sum rate.
pub fn run_baseline_comparison(cfg: &SimConfig) -> Result<CompareOutput, SimError> {
    let proposed = run_controller_loop(cfg, Controller::Proposed)?;
    let fixed = run_controller_loop(cfg, Controller::FixedLte)?;
    let random = run_controller_loop(cfg, Controller::RandomCqi)?;

    // seed bookkeeping: every stream must have seen identical channels
    for f in 0..cfg.frames {
        for u in 0..2 {
            let a = proposed.records[f].users[u].channel_gain.to_bits();
            let b = fixed.records[f].users[u].channel_gain.to_bits();
            let c = random.records[f].users[u].channel_gain.to_bits();
            if a != b || a != c {
                return Err(SimError::CommonRandomNumbers(format!(
                    "channel gain diverged at frame {f}, user {u}"
                )));
            }
        }
    }

    let streams: Vec<ComparisonStream> = [&proposed, &fixed, &random]
        .iter()
        .map(|out| ComparisonStream {
            name: out.controller.name().to_string(),
            ledger: out.ledger.clone(),
            capacity: out.goodput.clone(),
        })
        .collect();
    let summaries = compare_baselines(&streams)?;
    Ok(CompareOutput {
        summaries,
        proposed,
        fixed,
        random,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::Scheme;

    #[test]
    fn comparison_runs_on_tiny_config() {
        let cfg = SimConfig {
            frames: 5,
            frame_symbols: 300,
            snr_db: 18.0,
            candidates: vec![Scheme::Qpsk, Scheme::Qam16],
            amc: crate::amc::AmcParams {
                ref_snr_lo: -8.0,
                ref_snr_hi: 28.0,
                ref_snr_step: 4.0,
                ref_reps: 1,
                ..Default::default()
            },
            ..SimConfig::default()
        };
        let out = run_baseline_comparison(&cfg).unwrap();
        assert_eq!(out.summaries.len(), 3);
        for s in &out.summaries {
            assert_eq!(s.frames, 5);
            assert!(s.total_power > 0.0);
        }
        assert_eq!(out.summaries[0].name, "proposed");
        assert_eq!(out.summaries[1].name, "fixed-lte");
        assert_eq!(out.summaries[2].name, "random");
    }
}
