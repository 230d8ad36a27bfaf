//! Small shared helpers: deterministic seed derivation, float formatting for
//! CSV output, and confidence intervals.

/// SplitMix64 step, used to derive independent RNG seeds from a master seed.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed, a stream tag, and an index.
///
/// Used so that parallel trials, sweep cells, and per-frame draws each own an
/// independent deterministic stream regardless of scheduling order.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(tag)).wrapping_add(index))
}

/// Format a float with 6 significant digits, `%g`-style (trailing zeros
/// trimmed, scientific notation outside [1e-4, 1e6)).
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{:.5e}", x);
        // trim trailing zeros in the mantissa: 1.50000e7 -> 1.5e7
        match s.split_once('e') {
            Some((m, e)) if m.contains('.') => {
                format!("{}e{}", m.trim_end_matches('0').trim_end_matches('.'), e)
            }
            _ => s,
        }
    }
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - half) / denom).max(0.0),
        ((center + half) / denom).min(1.0),
    )
}

/// Sample mean and normal-approximation 95% confidence interval.
pub fn mean_ci(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, mean, mean);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let half = 1.959_963_984_540_054 * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt6_sig_digits() {
        assert_eq!(fmt6(0.478525), "0.478525");
        assert_eq!(fmt6(1.9141), "1.9141");
        assert_eq!(fmt6(-6.7), "-6.7");
        assert_eq!(fmt6(0.0), "0");
        assert_eq!(fmt6(1.0), "1");
        assert_eq!(fmt6(0.925783333333), "0.925783");
        assert_eq!(fmt6(123456.7), "123457");
        assert_eq!(fmt6(f64::INFINITY), "inf");
        assert_eq!(fmt6(1.5e7), "1.5e7");
        assert_eq!(fmt6(2.5e-7), "2.5e-7");
    }

    #[test]
    fn derive_seed_streams_differ() {
        let a = derive_seed(7, 1, 0);
        let b = derive_seed(7, 1, 1);
        let c = derive_seed(7, 2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 1, 0));
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_ci(495, 500);
        assert!(lo > 0.95 && hi <= 1.0 && lo < hi);
        let (lo, hi) = wilson_ci(0, 10);
        assert!(lo == 0.0 && hi > 0.0);
    }

    #[test]
    fn mean_ci_contains_mean() {
        let (m, lo, hi) = mean_ci(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-12);
        assert!(lo < m && m < hi);
    }
}
