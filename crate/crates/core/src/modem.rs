//! 16QAM mapping, pilot construction and cyclic prefix handling.
//!
//! # 16QAM labeling
//!
//! A 4-bit label `b3 b2 b1 b0` (first bit of the stream is `b3`) maps to
//! `(I + jQ) / sqrt(10)` where `b3 b2` selects `I` and `b1 b0` selects `Q`:
//!
//! | bits | level |
//! |------|-------|
//! | 00   | -3    |
//! | 01   | -1    |
//! | 11   | +1    |
//! | 10   | +3    |

use num_complex::Complex;

use crate::config::LinkConfig;
use crate::error::{Error, Result};
use crate::numerics::{ComplexVector, IndexSet};
use crate::scalar::Real;

/// Payload bits, one `u8` in `{0, 1}` per bit.
pub type BitVector = Vec<u8>;

/// Gray-coded 16QAM amplitude per two-bit pair.
const GRAY_LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

/// 16 points indexed by their 4-bit label.
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation<T> {
    points: [Complex<T>; 16],
}

impl<T: Real> QamConstellation<T> {
    /// Unit-energy Gray-labelled 16QAM.
    pub fn qam16() -> Self {
        let s = 1.0 / 10f64.sqrt();
        let points = std::array::from_fn(|label| {
            let i = GRAY_LEVELS[label >> 2];
            let q = GRAY_LEVELS[label & 3];
            Complex::new(T::of(i * s), T::of(q * s))
        });
        Self { points }
    }

    /// The same labeling with every point multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            points: self.points.map(|p| p * factor),
        }
    }

    #[inline]
    pub fn point(&self, label: u8) -> Complex<T> {
        self.points[label as usize]
    }

    pub fn points(&self) -> &[Complex<T>; 16] {
        &self.points
    }

    pub fn mean_energy(&self) -> T {
        self.points.iter().map(|p| p.norm_sqr()).sum::<T>() / T::of(16.0)
    }

    /// Nearest point, ties resolved toward the smaller label.
    pub fn decide(&self, z: Complex<T>) -> u8 {
        let mut best = 0u8;
        let mut best_d = (z - self.points[0]).norm_sqr();
        for (label, p) in self.points.iter().enumerate().skip(1) {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label as u8;
            }
        }
        best
    }
}

/// Packs 4 bits (MSB first) into a label.
#[inline]
pub fn bits_to_label(bits: &[u8]) -> u8 {
    (bits[0] << 3) | (bits[1] << 2) | (bits[2] << 1) | bits[3]
}

#[inline]
pub fn label_to_bits(label: u8) -> [u8; 4] {
    [(label >> 3) & 1, (label >> 2) & 1, (label >> 1) & 1, label & 1]
}

/// One constellation point per 4 bits, in order.
pub fn map_bits<T: Real>(bits: &[u8], constellation: &QamConstellation<T>) -> Result<ComplexVector<T>> {
    if bits.len() % 4 != 0 {
        return Err(Error::Dimension(format!(
            "bit count {} is not a multiple of 4",
            bits.len()
        )));
    }
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::Dimension(format!("bit value {b} is not 0 or 1")));
    }
    Ok(bits
        .chunks_exact(4)
        .map(|c| constellation.point(bits_to_label(c)))
        .collect())
}

/// Minimum-distance hard decisions, 4 bits per symbol.
pub fn hard_demap<T: Real>(symbols: &[Complex<T>], constellation: &QamConstellation<T>) -> BitVector {
    symbols
        .iter()
        .flat_map(|&z| label_to_bits(constellation.decide(z)))
        .collect()
}

/// Pilot tones and per-antenna pilot sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPlan<T> {
    pub m_p: usize,
    /// Equispaced tones `{0, M/M_p, 2M/M_p, ...}`.
    pub tones: IndexSet,
    /// `sequences[r][k] = sqrt(rho) exp(-j 2 pi k r L / M_p)`.
    pub sequences: Vec<ComplexVector<T>>,
}

impl<T: Real> PilotPlan<T> {
    /// Frequency-domain pilot OFDM symbol of antenna `r`: the pilot sequence on
    /// the pilot tones and zeros on every other tone.
    pub fn pilot_symbol(&self, r: usize) -> ComplexVector<T> {
        let mut x = vec![Complex::new(T::zero(), T::zero()); self.tones.universe()];
        for (k, tone) in self.tones.iter().enumerate() {
            x[tone] = self.sequences[r][k];
        }
        x
    }

    /// All pilot sequences stacked antenna-major (`x_p` of length `Nt * M_p`).
    pub fn stacked(&self) -> ComplexVector<T> {
        self.sequences.iter().flatten().copied().collect()
    }
}

pub fn build_pilot_plan<T: Real>(cfg: &LinkConfig) -> Result<PilotPlan<T>> {
    if cfg.m_p != cfg.nt * cfg.l {
        return Err(Error::Config(format!(
            "pilot count m_p = {} must equal nt * l = {}",
            cfg.m_p,
            cfg.nt * cfg.l
        )));
    }
    if cfg.m_p == 0 || cfg.m % cfg.m_p != 0 {
        return Err(Error::Config(format!(
            "m = {} not divisible by m_p = {}",
            cfg.m, cfg.m_p
        )));
    }
    let spacing = cfg.m / cfg.m_p;
    let tones = IndexSet::new((0..cfg.m_p).map(|k| k * spacing).collect(), cfg.m)?;
    let amp = cfg.rho.sqrt();
    let sequences = (0..cfg.nt)
        .map(|r| {
            (0..cfg.m_p)
                .map(|k| {
                    let turns = ((k * r * cfg.l) % cfg.m_p) as f64 / cfg.m_p as f64;
                    let a = -2.0 * std::f64::consts::PI * turns;
                    Complex::new(T::of(amp * a.cos()), T::of(amp * a.sin()))
                })
                .collect()
        })
        .collect();
    Ok(PilotPlan {
        m_p: cfg.m_p,
        tones,
        sequences,
    })
}

/// One pilot OFDM symbol and one data OFDM symbol per transmit antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmFrame<T> {
    pub pilot_symbols: Vec<ComplexVector<T>>,
    pub data_symbols: Vec<ComplexVector<T>>,
    pub payload_bits: Vec<BitVector>,
}

impl<T: Real> OfdmFrame<T> {
    /// Builds the frame from per-antenna payload bits (`4 * M` each); data
    /// tones are constellation points scaled to average power `rho`.
    pub fn new(
        plan: &PilotPlan<T>,
        payload_bits: Vec<BitVector>,
        constellation: &QamConstellation<T>,
        rho: T,
    ) -> Result<Self> {
        let m = plan.tones.universe();
        let scaled = constellation.scaled(rho.sqrt());
        let mut data_symbols = Vec::with_capacity(payload_bits.len());
        for bits in &payload_bits {
            if bits.len() != 4 * m {
                return Err(Error::Dimension(format!(
                    "antenna payload has {} bits, expected {}",
                    bits.len(),
                    4 * m
                )));
            }
            data_symbols.push(map_bits(bits, &scaled)?);
        }
        Ok(Self {
            pilot_symbols: (0..payload_bits.len()).map(|r| plan.pilot_symbol(r)).collect(),
            data_symbols,
            payload_bits,
        })
    }

    pub fn nt(&self) -> usize {
        self.data_symbols.len()
    }

    /// All payload bits, antenna-major.
    pub fn labels(&self) -> BitVector {
        self.payload_bits.iter().flatten().copied().collect()
    }
}

/// Prepends the last `l_cp` samples.
pub fn add_cyclic_prefix<T: Copy>(x: &[T], l_cp: usize) -> Result<Vec<T>> {
    if l_cp > x.len() {
        return Err(Error::Dimension(format!(
            "cyclic prefix of {l_cp} samples longer than the {}-sample symbol",
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(x.len() + l_cp);
    out.extend_from_slice(&x[x.len() - l_cp..]);
    out.extend_from_slice(x);
    Ok(out)
}

/// Strips the first `l_cp` samples.
pub fn remove_cyclic_prefix<T: Copy>(x: &[T], l_cp: usize) -> Result<Vec<T>> {
    if l_cp > x.len() {
        return Err(Error::Dimension(format!(
            "cannot strip {l_cp} prefix samples from {} samples",
            x.len()
        )));
    }
    Ok(x[l_cp..].to_vec())
}
