//! Physical-layer building blocks: Gray-mapped unit-energy constellations,
//! flat Rayleigh fading and AWGN, two-user NOMA superposition, and the SIC
//! detector that recovers per-user soft symbol streams.

mod channel;
mod constellation;
mod noma;

pub use channel::{awgn_block, rayleigh_coefficient, ChannelRealization};
pub use constellation::{modulate, random_symbols, Constellation, Scheme};
pub use noma::{sic_detect, sic_order, superpose_tu_noma, NomaFrame};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhyError {
    #[error("bit stream length {len} is not divisible by {bits_per_symbol} bits/symbol")]
    BitLength { len: usize, bits_per_symbol: usize },
    #[error("bit stream contains a value other than 0 or 1")]
    NotABit,
    #[error("expected exactly two users, got {0}")]
    UserCount(usize),
    #[error("user symbol blocks have mismatched lengths")]
    BlockLength,
    #[error("transmit powers must be > 0")]
    NonPositivePower,
    #[error("users must share one receiver noise variance")]
    NoiseVarianceMismatch,
    #[error("SIC order must visit each user once, sorted by descending received power")]
    SicOrder,
}
