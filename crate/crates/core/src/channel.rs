//! Rayleigh fading realizations, complex Gaussian noise and SNR calibration.
//!
//! Randomness comes from ChaCha20 streams: one 64-bit seed selects the key
//! and the stream id selects an independent keystream, so every trial of a
//! sweep owns its own reproducible generator regardless of thread schedule.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, StcError};

/// Average transmit energy per channel use (two antennas, unit-energy symbols).
pub const SYMBOL_ENERGY: f64 = 2.0;

/// Time-variation model for the two slots of a codeword.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// `h[2] = h[1]`.
    Quasistatic,
    /// `h[1]` and `h[2]` independent.
    Rapid,
    /// `h[2] = ρ·h[1] + √(1−ρ²)·w`.
    Markov(f64),
}

impl ChannelModel {
    pub fn validate(self) -> Result<Self> {
        match self {
            ChannelModel::Markov(rho) if !(0.0..=1.0).contains(&rho) => {
                Err(StcError::CorrelationOutOfRange(rho))
            }
            m => Ok(m),
        }
    }

    /// Whether the realization is guaranteed constant across both slots.
    pub fn is_static(self) -> bool {
        matches!(self, ChannelModel::Quasistatic) || self == ChannelModel::Markov(1.0)
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Quasistatic => f.write_str("quasistatic"),
            ChannelModel::Rapid => f.write_str("rapid"),
            ChannelModel::Markov(rho) => write!(f, "markov-{rho}"),
        }
    }
}

impl FromStr for ChannelModel {
    type Err = String;

    /// Accepts `quasistatic`, `rapid`, `markov-<rho>` or `markov:<rho>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "quasistatic" => Ok(ChannelModel::Quasistatic),
            "rapid" => Ok(ChannelModel::Rapid),
            _ => {
                let rho = s
                    .strip_prefix("markov-")
                    .or_else(|| s.strip_prefix("markov:"))
                    .ok_or_else(|| format!("unknown channel model '{s}'"))?;
                let rho: f64 = rho
                    .parse()
                    .map_err(|_| format!("bad Gauss-Markov correlation '{rho}'"))?;
                ChannelModel::Markov(rho)
                    .validate()
                    .map_err(|e| e.to_string())
            }
        }
    }
}

/// The eight coefficients `h_{i,j}[k]` of one codeword block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// `coefficients[i][j][k]`: transmit `i`, receive `j`, slot `k`, zero-based.
    pub coefficients: [[[Complex64; 2]; 2]; 2],
    model: ChannelModel,
}

impl ChannelRealization {
    pub fn new(coefficients: [[[Complex64; 2]; 2]; 2], model: ChannelModel) -> Self {
        Self {
            coefficients,
            model,
        }
    }

    /// Constant channel; `h[i][j]` is used for both slots.
    pub fn quasistatic(h: [[Complex64; 2]; 2]) -> Self {
        let mut coefficients = [[[Complex64::new(0.0, 0.0); 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                coefficients[i][j] = [h[i][j]; 2];
            }
        }
        Self::new(coefficients, ChannelModel::Quasistatic)
    }

    #[inline]
    pub fn coefficient(&self, tx: usize, rx: usize, slot: usize) -> Complex64 {
        self.coefficients[tx][rx][slot]
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients.iter().flatten().flatten().all(|v| v.is_finite())
    }
}

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Zero-mean circularly symmetric complex Gaussian with `E|g|² = 1`.
pub fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws one realization.
///
/// Every model consumes the same eight Gaussians (first slot, then the
/// innovation), so `markov(1)` reproduces `quasistatic` and `markov(0)`
/// reproduces `rapid` draw for draw.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, model: ChannelModel) -> Result<ChannelRealization> {
    let model = model.validate()?;
    let mut first = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut innovation = first;
    for row in first.iter_mut() {
        for v in row.iter_mut() {
            *v = standard_complex_gaussian(rng);
        }
    }
    for row in innovation.iter_mut() {
        for v in row.iter_mut() {
            *v = standard_complex_gaussian(rng);
        }
    }
    let mut coefficients = [[[Complex64::new(0.0, 0.0); 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let h1 = first[i][j];
            let h2 = match model {
                ChannelModel::Quasistatic => h1,
                ChannelModel::Rapid => innovation[i][j],
                ChannelModel::Markov(rho) => h1 * rho + innovation[i][j] * (1.0 - rho * rho).sqrt(),
            };
            coefficients[i][j] = [h1, h2];
        }
    }
    Ok(ChannelRealization::new(coefficients, model))
}

/// Noise variance `N₀ = E_s / 10^(snr/10)` with `E_s = 2`.
pub fn snr_to_n0(snr_db: f64) -> f64 {
    SYMBOL_ENERGY / 10f64.powf(snr_db / 10.0)
}

/// Four i.i.d. noise samples with `E|n|² = n0`, in stacking order.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, n0: f64) -> [Complex64; 4] {
    debug_assert!(n0 >= 0.0);
    let amp = n0.sqrt();
    let mut n = [Complex64::new(0.0, 0.0); 4];
    for v in n.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(re * amp, im * amp) * std::f64::consts::FRAC_1_SQRT_2;
    }
    n
}
