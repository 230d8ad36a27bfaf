//! Two-user power-domain NOMA: superposition at the transmitter side and
//! successive interference cancellation at the receiver.

use num_complex::Complex64;
use rand::Rng;

use super::channel::{awgn_block, ChannelRealization};
use super::constellation::{Constellation, Scheme};
use super::PhyError;

/// One generated NOMA frame with its ground truth.
#[derive(Debug, Clone)]
pub struct NomaFrame {
    /// Received stream: sum over users of h_n * sqrt(p_n) * s_n[k] + noise.
    pub superposed: Vec<Complex64>,
    /// Clean per-user transmitted symbol blocks.
    pub tx_symbols: Vec<Vec<Complex64>>,
    /// Per-user allocated transmit powers (linear).
    pub tx_powers: Vec<f64>,
    /// Per-user channel realizations (shared receiver noise variance).
    pub channels: Vec<ChannelRealization>,
    /// Ground-truth modulation per user, for scoring.
    pub true_modulations: Vec<Scheme>,
}

impl NomaFrame {
    pub fn frame_symbols(&self) -> usize {
        self.superposed.len()
    }
}

/// Superpose two users' symbol blocks with amplitude sqrt(p_n) over their
/// channels and add CN(0, sigma^2) noise.
pub fn superpose_tu_noma<R: Rng>(
    user_blocks: &[Vec<Complex64>],
    tx_powers: &[f64],
    channels: &[ChannelRealization],
    schemes: &[Scheme],
    rng: &mut R,
) -> Result<NomaFrame, PhyError> {
    if user_blocks.len() != 2 || tx_powers.len() != 2 || channels.len() != 2 || schemes.len() != 2
    {
        return Err(PhyError::UserCount(user_blocks.len()));
    }
    let n = user_blocks[0].len();
    if user_blocks[1].len() != n {
        return Err(PhyError::BlockLength);
    }
    if tx_powers.iter().any(|&p| p <= 0.0) {
        return Err(PhyError::NonPositivePower);
    }
    if (channels[0].noise_variance - channels[1].noise_variance).abs() > 1e-12 {
        return Err(PhyError::NoiseVarianceMismatch);
    }
    let sigma2 = channels[0].noise_variance;
    let mut superposed = if sigma2 > 0.0 {
        awgn_block(rng, n, sigma2)
    } else {
        vec![Complex64::new(0.0, 0.0); n]
    };
    for u in 0..2 {
        let amp = channels[u].h * tx_powers[u].sqrt();
        for (k, s) in user_blocks[u].iter().enumerate() {
            superposed[k] += amp * s;
        }
    }
    Ok(NomaFrame {
        superposed,
        tx_symbols: user_blocks.to_vec(),
        tx_powers: tx_powers.to_vec(),
        channels: channels.to_vec(),
        true_modulations: schemes.to_vec(),
    })
}

/// User indices sorted by descending received power |h_n|^2 * p_n.
pub fn sic_order(frame: &NomaFrame) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..frame.tx_powers.len()).collect();
    idx.sort_by(|&a, &b| {
        let pa = frame.channels[a].gain() * frame.tx_powers[a];
        let pb = frame.channels[b].gain() * frame.tx_powers[b];
        pb.partial_cmp(&pa).unwrap_or(std::cmp::Ordering::Equal)
    });
    idx
}

/// Successive interference cancellation with perfect CSI.
///
/// Users are visited in `order` (descending received power). Each stage
/// equalizes the residual by 1/(h sqrt(p)), slices against the user's own
/// constellation, and subtracts the remodulated contribution. Returns the
/// equalized soft symbol blocks indexed by user (not by decode order); these
/// are the streams handed to the classifier stage, before any hard decision.
pub fn sic_detect(frame: &NomaFrame, order: &[usize]) -> Result<Vec<Vec<Complex64>>, PhyError> {
    let users = frame.tx_powers.len();
    let mut seen = vec![false; users];
    for &u in order {
        if u >= users || seen[u] {
            return Err(PhyError::SicOrder);
        }
        seen[u] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(PhyError::SicOrder);
    }
    for w in order.windows(2) {
        let pa = frame.channels[w[0]].gain() * frame.tx_powers[w[0]];
        let pb = frame.channels[w[1]].gain() * frame.tx_powers[w[1]];
        if pa < pb {
            return Err(PhyError::SicOrder);
        }
    }

    let n = frame.frame_symbols();
    let mut residual = frame.superposed.clone();
    let mut soft: Vec<Vec<Complex64>> = vec![Vec::new(); users];
    for (stage, &u) in order.iter().enumerate() {
        let amp = frame.channels[u].h * frame.tx_powers[u].sqrt();
        let equalized: Vec<Complex64> = residual.iter().map(|r| r / amp).collect();
        if stage + 1 < users {
            let c = Constellation::for_scheme(frame.true_modulations[u]);
            for k in 0..n {
                let (idx, _) = c.nearest(equalized[k]);
                residual[k] -= amp * c.points()[idx];
            }
        }
        soft[u] = equalized;
    }
    Ok(soft)
}
