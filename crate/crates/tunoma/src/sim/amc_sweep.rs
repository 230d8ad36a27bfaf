//! Open-loop modulation-classification success-rate sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amc::{classify, ReferenceTable};
use crate::config::SimConfig;
use crate::phy::{awgn_block, random_symbols, Scheme};
use crate::util::{derive_seed, fmt6, wilson_ci};

use super::SimError;

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const TAG_SWEEP: u64 = 0x20;

/// For every (true scheme, SNR) cell, classify `trials` independent frames
/// and report the success fraction with its 95% interval.
pub fn run_amc_sweep(cfg: &SimConfig) -> Result<Vec<SweepCell>, SimError> {
    cfg.validate()?;
    let mut candidates = cfg.candidates.clone();
    candidates.sort_unstable();
    candidates.dedup();
    // build the reference table once before fanning out
    ReferenceTable::get_or_build(cfg.frame_symbols, &candidates, &cfg.amc);

    let cells: Vec<(Scheme, f64)> = cfg
        .sweep_schemes()
        .iter()
        .flat_map(|&s| cfg.snr_sweep_db.iter().map(move |&snr| (s, snr)))
        .collect();

    let results: Vec<SweepCell> = cells
        .par_iter()
        .enumerate()
        .map(|(cell_idx, &(scheme, snr_db))| {
            let sigma2 = 10f64.powf(-snr_db / 10.0);
            let successes: usize = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = derive_seed(
                        cfg.seed,
                        TAG_SWEEP + cell_idx as u64,
                        trial as u64,
                    );
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let (_, mut block) = random_symbols(scheme, cfg.frame_symbols, &mut rng);
                    for (b, w) in block
                        .iter_mut()
                        .zip(awgn_block(&mut rng, cfg.frame_symbols, sigma2))
                    {
                        *b += w;
                    }
                    let r = classify(&block, &cfg.candidates, &cfg.amc)
                        .expect("sweep frames are non-empty");
                    usize::from(r.chosen == scheme)
                })
                .sum();
            let rate = successes as f64 / cfg.trials as f64;
            let (ci_low, ci_high) = wilson_ci(successes as u64, cfg.trials as u64);
            SweepCell {
                scheme,
                snr_db,
                trials: cfg.trials,
                successes,
                rate,
                ci_low,
                ci_high,
            }
        })
        .collect();
    Ok(results)
}

/// CSV rendering: `scheme,snr_db,trials,successes,rate,ci_lo,ci_hi`.
pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("scheme,snr_db,trials,successes,rate,ci_lo,ci_hi\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.scheme,
            fmt6(c.snr_db),
            c.trials,
            c.successes,
            fmt6(c.rate),
            fmt6(c.ci_low),
            fmt6(c.ci_high)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_sweep_runs_and_is_deterministic() {
        let cfg = SimConfig {
            trials: 4,
            frame_symbols: 300,
            snr_sweep_db: vec![12.0],
            candidates: vec![Scheme::Qpsk, Scheme::Qam16],
            sweep_schemes: Some(vec![Scheme::Qpsk]),
            amc: crate::amc::AmcParams {
                ref_snr_lo: -8.0,
                ref_snr_hi: 28.0,
                ref_snr_step: 4.0,
                ref_reps: 1,
                ..Default::default()
            },
            ..SimConfig::default()
        };
        let a = run_amc_sweep(&cfg).unwrap();
        let b = run_amc_sweep(&cfg).unwrap();
        assert_eq!(sweep_csv(&a), sweep_csv(&b));
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].trials, 4);
        // clean QPSK at 12 dB against {QPSK,16QAM} should classify reliably
        assert!(a[0].rate >= 0.75, "rate {}", a[0].rate);
    }
}
