//! Modulation schemes and their unit-average-power, Gray-mapped
//! constellations.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PhyError;

/// Modulation scheme. Ordering follows modulation order (QPSK lowest).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Scheme {
    Qpsk,
    Qam16,
    Qam64,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Qpsk, Scheme::Qam16, Scheme::Qam64];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Scheme::Qpsk => 2,
            Scheme::Qam16 => 4,
            Scheme::Qam64 => 6,
        }
    }

    /// Number of constellation points.
    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Qpsk => "QPSK",
            Scheme::Qam16 => "16QAM",
            Scheme::Qam64 => "64QAM",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "QPSK" | "4QAM" => Ok(Scheme::Qpsk),
            "16QAM" | "QAM16" => Ok(Scheme::Qam16),
            "64QAM" | "QAM64" => Ok(Scheme::Qam64),
            other => Err(format!("unknown modulation scheme '{other}'")),
        }
    }
}

/// A square constellation with unit mean symbol energy.
///
/// Point `m` carries the bit pattern `m` (MSB-first: the first half of the
/// bits Gray-codes the in-phase level, the second half the quadrature level).
#[derive(Debug, Clone)]
pub struct Constellation {
    scheme: Scheme,
    points: Vec<Complex64>,
    axis_levels: Vec<f64>,
    min_distance_sq: f64,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl Constellation {
    pub fn new(scheme: Scheme) -> Self {
        let bits = scheme.bits_per_symbol();
        let half = bits / 2;
        let levels_n = 1usize << half;
        // PAM levels -(L-1), ..., -1, 1, ..., (L-1); square QAM mean energy
        // is 2*(L^2-1)/3, normalized to 1.
        let norm = (2.0 * ((levels_n * levels_n - 1) as f64) / 3.0).sqrt();
        let amp = |idx: usize| ((2 * idx) as f64 - (levels_n - 1) as f64) / norm;
        let mut points = Vec::with_capacity(1 << bits);
        for m in 0..(1usize << bits) {
            let gi = m >> half;
            let gq = m & (levels_n - 1);
            points.push(Complex64::new(
                amp(gray_decode(gi)),
                amp(gray_decode(gq)),
            ));
        }
        let axis_levels: Vec<f64> = (0..levels_n).map(amp).collect();
        let min_distance_sq = (axis_levels[1] - axis_levels[0]).powi(2);
        Constellation {
            scheme,
            points,
            axis_levels,
            min_distance_sq,
        }
    }

    /// Shared immutable instance per scheme.
    pub fn for_scheme(scheme: Scheme) -> &'static Constellation {
        static CACHE: OnceLock<[Constellation; 3]> = OnceLock::new();
        let all = CACHE.get_or_init(|| {
            [
                Constellation::new(Scheme::Qpsk),
                Constellation::new(Scheme::Qam16),
                Constellation::new(Scheme::Qam64),
            ]
        });
        match scheme {
            Scheme::Qpsk => &all[0],
            Scheme::Qam16 => &all[1],
            Scheme::Qam64 => &all[2],
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.scheme.bits_per_symbol()
    }

    /// Per-axis PAM amplitude levels, ascending.
    pub fn axis_levels(&self) -> &[f64] {
        &self.axis_levels
    }

    /// Squared distance between closest constellation points.
    pub fn min_distance_sq(&self) -> f64 {
        self.min_distance_sq
    }

    /// Index of the nearest point and the squared Euclidean distance to it.
    /// Ties break toward the lowest point index.
    pub fn nearest(&self, s: Complex64) -> (usize, f64) {
        let mut best = 0usize;
        let mut best_d2 = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d2 = (s - p).norm_sqr();
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        (best, best_d2)
    }
}

/// Map a bit stream onto Gray-coded symbols of `scheme`.
pub fn modulate(bits: &[u8], scheme: Scheme) -> Result<Vec<Complex64>, PhyError> {
    let bps = scheme.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(PhyError::BitLength {
            len: bits.len(),
            bits_per_symbol: bps,
        });
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(PhyError::NotABit);
    }
    let c = Constellation::for_scheme(scheme);
    Ok(bits
        .chunks_exact(bps)
        .map(|chunk| {
            let idx = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            c.points()[idx]
        })
        .collect())
}

/// Draw `n` uniform random symbols of `scheme`; returns (indices, symbols).
pub fn random_symbols<R: Rng>(scheme: Scheme, n: usize, rng: &mut R) -> (Vec<usize>, Vec<Complex64>) {
    let c = Constellation::for_scheme(scheme);
    let m = c.points().len();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
    let syms = idx.iter().map(|&i| c.points()[i]).collect();
    (idx, syms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_energy_and_distinct_points() {
        for scheme in Scheme::ALL {
            let c = Constellation::new(scheme);
            assert_eq!(c.points().len(), scheme.order());
            let energy: f64 =
                c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.points().len() as f64;
            assert!((energy - 1.0).abs() < 1e-12, "{scheme}: energy {energy}");
            for i in 0..c.points().len() {
                for j in (i + 1)..c.points().len() {
                    assert!((c.points()[i] - c.points()[j]).norm_sqr() > 1e-12);
                }
            }
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        // along each axis, adjacent levels differ by exactly one bit
        for scheme in Scheme::ALL {
            let c = Constellation::new(scheme);
            let half = scheme.bits_per_symbol() / 2;
            let ln = 1usize << half;
            for axis in 0..ln - 1 {
                // find the gray codes whose decoded level indices are adjacent
                let g1 = (0..ln).find(|&g| gray_decode(g) == axis).unwrap();
                let g2 = (0..ln).find(|&g| gray_decode(g) == axis + 1).unwrap();
                assert_eq!((g1 ^ g2).count_ones(), 1);
            }
        }
    }

    #[test]
    fn qpsk_constant_modulus() {
        let syms = modulate(&[0, 0, 0, 1, 1, 1, 1, 0], Scheme::Qpsk).unwrap();
        assert_eq!(syms.len(), 4);
        for s in &syms {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        // all four distinct
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!((syms[i] - syms[j]).norm_sqr() > 1e-12);
            }
        }
    }

    #[test]
    fn empty_bitstream_is_empty_block() {
        assert!(modulate(&[], Scheme::Qam64).unwrap().is_empty());
    }

    #[test]
    fn bad_length_rejected() {
        assert!(matches!(
            modulate(&[0, 1, 1], Scheme::Qpsk),
            Err(PhyError::BitLength { .. })
        ));
    }

    #[test]
    fn random_qam64_block_mean_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let bits: Vec<u8> = (0..6000).map(|_| rng.random_range(0..=1) as u8).collect();
        let syms = modulate(&bits, Scheme::Qam64).unwrap();
        assert_eq!(syms.len(), 1000);
        let energy: f64 = syms.iter().map(|s| s.norm_sqr()).sum::<f64>() / 1000.0;
        assert!((energy - 1.0).abs() < 0.05, "mean energy {energy}");
    }

    #[test]
    fn nearest_recovers_clean_symbols() {
        let c = Constellation::for_scheme(Scheme::Qam64);
        for (i, p) in c.points().iter().enumerate() {
            let (j, d2) = c.nearest(*p);
            assert_eq!(i, j);
            assert!(d2 < 1e-20);
        }
    }

    #[test]
    fn nearest_tie_breaks_low_index() {
        let c = Constellation::for_scheme(Scheme::Qpsk);
        let (idx, _) = c.nearest(Complex64::new(0.0, 0.0));
        assert_eq!(idx, 0);
    }
}
