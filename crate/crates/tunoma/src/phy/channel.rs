//! Flat Rayleigh fading coefficients and circular complex AWGN.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// One user's channel state for one frame.
#[derive(Debug, Clone, Copy)]
pub struct ChannelRealization {
    /// Flat Rayleigh fading coefficient, E[|h|^2] = 1.
    pub h: Complex64,
    /// Receiver noise variance per complex sample.
    pub noise_variance: f64,
}

impl ChannelRealization {
    pub fn draw<R: Rng>(rng: &mut R, noise_variance: f64) -> Self {
        ChannelRealization {
            h: rayleigh_coefficient(rng),
            noise_variance,
        }
    }

    /// Linear power gain |h|^2.
    pub fn gain(&self) -> f64 {
        self.h.norm_sqr()
    }
}

/// CN(0, 1) coefficient: independent N(0, 1/2) real and imaginary parts.
pub fn rayleigh_coefficient<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / 2.0_f64.sqrt()
}

/// A block of i.i.d. CN(0, variance) noise samples.
pub fn awgn_block<R: Rng>(rng: &mut R, n: usize, variance: f64) -> Vec<Complex64> {
    let s = (variance / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rayleigh_mean_power_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| rayleigh_coefficient(&mut rng).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn awgn_empirical_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let block = awgn_block(&mut rng, 10_000, 0.1);
        let p: f64 = block.iter().map(|z| z.norm_sqr()).sum::<f64>() / 10_000.0;
        assert!((p - 0.1).abs() < 0.005, "noise power {p}");
    }

    #[test]
    fn deterministic_given_seed() {
        let a = awgn_block(&mut ChaCha8Rng::seed_from_u64(3), 16, 1.0);
        let b = awgn_block(&mut ChaCha8Rng::seed_from_u64(3), 16, 1.0);
        assert_eq!(a, b);
    }
}
