//! LS channel estimation from pilots and zero-forcing equalization.
//!
//! The receiver only knows the pilot matrix
//! `B = [diag(x_p^1) F_p, ..., diag(x_p^Nt) F_p]` and estimates
//! `ĥ^q = B† y_p^q` per receive antenna. Data symbols are equalized with the
//! pseudo-inverse of the stacked channel matrix `H_LS`, computed tone by tone:
//! `H = G (I_Nt ⊗ 𝓕)` where `G` holds one `Nr x Nt` frequency-response block
//! per subcarrier, so `H† y = (I_Nt ⊗ 𝓕ᴴ) G† y`.

use num_complex::Complex;

use crate::channel::{freq_response, ChannelRealization};
use crate::error::{Error, Result};
use crate::modem::{hard_demap, BitVector, PilotPlan, QamConstellation};
use crate::numerics::{dft_matrix, partial_fourier, pseudo_inverse, row_select, ComplexMatrix, ComplexVector, FftPlan, IndexSet};
use crate::pa::PaModel;
use crate::scalar::Real;

/// Per receive antenna, the stacked `Nt * L` estimated taps.
#[derive(Debug, Clone, PartialEq)]
pub struct LsEstimate<T> {
    nt: usize,
    l: usize,
    h_hat: Vec<ComplexVector<T>>,
}

impl<T: Real> LsEstimate<T> {
    pub fn new(nt: usize, l: usize, h_hat: Vec<ComplexVector<T>>) -> Result<Self> {
        if h_hat.iter().any(|h| h.len() != nt * l) {
            return Err(Error::Dimension(format!("each estimate must hold nt * l = {} taps", nt * l)));
        }
        Ok(Self { nt, l, h_hat })
    }

    /// The exact channel viewed as an estimate.
    pub fn perfect(ch: &ChannelRealization<T>) -> Self {
        Self {
            nt: ch.nt(),
            l: ch.len(),
            h_hat: (0..ch.nr()).map(|q| ch.stacked(q)).collect(),
        }
    }

    pub fn nr(&self) -> usize {
        self.h_hat.len()
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn stacked(&self, q: usize) -> &[Complex<T>] {
        &self.h_hat[q]
    }

    pub fn taps(&self, q: usize, r: usize) -> &[Complex<T>] {
        &self.h_hat[q][r * self.l..(r + 1) * self.l]
    }

    pub fn is_finite(&self) -> bool {
        self.h_hat.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_channel(&self) -> ChannelRealization<T> {
        let taps = (0..self.nr())
            .flat_map(|q| (0..self.nt).map(move |r| (q, r)))
            .map(|(q, r)| self.taps(q, r).to_vec())
            .collect();
        ChannelRealization::from_taps(self.nt, self.nr(), self.l, taps).expect("consistent dimensions")
    }
}

/// `[diag(s^1) F_p, ..., diag(s^Nt) F_p]` for per-antenna pilot-tone values `s^r`.
fn pilot_system<T: Real>(per_antenna: &[ComplexVector<T>], f_p: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (mp, l) = (f_p.rows(), f_p.cols());
    ComplexMatrix::from_fn(mp, per_antenna.len() * l, |k, c| per_antenna[c / l][k] * f_p[(k, c % l)])
}

fn pilot_fourier<T: Real>(tones: &IndexSet, l: usize) -> Result<ComplexMatrix<T>> {
    row_select(&partial_fourier(tones.universe(), l)?, tones)
}

/// The pilot matrix known to a receiver that assumes a linear PA.
pub fn build_b<T: Real>(plan: &PilotPlan<T>, m: usize, l: usize) -> Result<ComplexMatrix<T>> {
    let nt = plan.sequences.len();
    if plan.m_p != nt * l {
        return Err(Error::Dimension(format!("m_p = {} differs from nt * l = {}", plan.m_p, nt * l)));
    }
    if plan.tones.universe() != m {
        return Err(Error::Dimension(format!(
            "pilot tones live in {} subcarriers, not {m}",
            plan.tones.universe()
        )));
    }
    Ok(pilot_system(&plan.sequences, &pilot_fourier(&plan.tones, l)?))
}

/// Genie pilot matrix `A` built with full knowledge of the PA:
/// `[diag(𝓕_p g(𝓕ᴴ x^1)) F_p, ...]` for the frequency-domain pilot symbols `x^r`.
pub fn build_a_oracle<T: Real>(
    pilot_symbols: &[ComplexVector<T>],
    tones: &IndexSet,
    pa: &PaModel<T>,
    l: usize,
) -> Result<ComplexMatrix<T>> {
    let m = tones.universe();
    if pilot_symbols.iter().any(|x| x.len() != m) {
        return Err(Error::Dimension(format!("pilot symbols must have {m} tones")));
    }
    let fft = FftPlan::new(m);
    let seen: Vec<ComplexVector<T>> = pilot_symbols
        .iter()
        .map(|x| {
            let mut t = fft.idft(x);
            pa.apply_in_place(&mut t);
            fft.forward(&mut t);
            tones.iter().map(|k| t[k]).collect()
        })
        .collect();
    Ok(pilot_system(&seen, &pilot_fourier(tones, l)?))
}

/// LS estimator with a precomputed pseudo-inverse of the pilot matrix.
#[derive(Debug, Clone)]
pub struct LsEstimator<T> {
    pinv: ComplexMatrix<T>,
    nt: usize,
    l: usize,
}

impl<T: Real> LsEstimator<T> {
    /// Fails when the pilot matrix does not have full column rank.
    pub fn new(system: &ComplexMatrix<T>, nt: usize, l: usize) -> Result<Self> {
        if system.cols() != nt * l {
            return Err(Error::Dimension(format!(
                "pilot matrix has {} columns, expected nt * l = {}",
                system.cols(),
                nt * l
            )));
        }
        let p = pseudo_inverse(system);
        if p.rank < system.cols() {
            return Err(Error::RankDeficient {
                rank: p.rank,
                needed: system.cols(),
            });
        }
        Ok(Self { pinv: p.matrix, nt, l })
    }

    pub fn pinv(&self) -> &ComplexMatrix<T> {
        &self.pinv
    }

    /// `ĥ^q = system† y_p^q` for each receive antenna.
    pub fn estimate(&self, y_p: &[ComplexVector<T>]) -> Result<LsEstimate<T>> {
        let h_hat = y_p.iter().map(|y| self.pinv.mul_vec(y)).collect::<Result<Vec<_>>>()?;
        LsEstimate::new(self.nt, self.l, h_hat)
    }
}

/// One-shot LS estimate `ĥ^q = B† y_p^q`.
pub fn ls_estimate<T: Real>(y_p: &[ComplexVector<T>], b: &ComplexMatrix<T>, nt: usize, l: usize) -> Result<LsEstimate<T>> {
    LsEstimator::new(b, nt, l)?.estimate(y_p)
}

/// ZF output `d̂`: per transmit antenna, `M` time-domain samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedSymbol<T> {
    pub nt: usize,
    pub m: usize,
    /// Antenna-major, length `nt * m`.
    pub d_hat: ComplexVector<T>,
}

impl<T: Real> EqualizedSymbol<T> {
    pub fn antenna(&self, r: usize) -> &[Complex<T>] {
        &self.d_hat[r * self.m..(r + 1) * self.m]
    }
}

#[derive(Debug, Clone)]
pub struct ZfOutput<T> {
    pub symbol: EqualizedSymbol<T>,
    /// Subcarriers whose `Nr x Nt` block lost rank under the pseudo-inverse cutoff.
    pub deficient_tones: Vec<usize>,
}

/// `d̂ = H_LS† y_d` using per-subcarrier pseudo-inverses.
///
/// `y_d[q]` is the frequency-domain data symbol at receive antenna `q`.
pub fn zf_equalize<T: Real>(y_d: &[ComplexVector<T>], est: &LsEstimate<T>, fft: &FftPlan<T>) -> Result<ZfOutput<T>> {
    let (nr, nt, m) = (est.nr(), est.nt(), fft.len());
    if y_d.len() != nr || y_d.iter().any(|y| y.len() != m) {
        return Err(Error::Dimension(format!("expected {nr} received symbols of {m} tones")));
    }
    let resp = freq_response(&est.to_channel(), fft);
    let zero = Complex::new(T::zero(), T::zero());
    let mut freq = vec![vec![zero; m]; nt];
    let mut deficient_tones = Vec::new();
    for tone in 0..m {
        let g = ComplexMatrix::from_fn(nr, nt, |q, r| resp[q * nt + r][tone]);
        let p = pseudo_inverse(&g);
        if p.rank < nt {
            deficient_tones.push(tone);
        }
        for r in 0..nt {
            freq[r][tone] = (0..nr).fold(zero, |acc, q| acc + p.matrix[(r, q)] * y_d[q][tone]);
        }
    }
    let mut d_hat = Vec::with_capacity(nt * m);
    for mut f in freq {
        fft.inverse(&mut f);
        d_hat.extend(f);
    }
    Ok(ZfOutput {
        symbol: EqualizedSymbol { nt, m, d_hat },
        deficient_tones,
    })
}

/// Classical detector: DFT each antenna block of `d̂` and slice against the
/// constellation as transmitted (scaled by `sqrt(rho)`).
pub fn zf_baseline_detect<T: Real>(d_hat: &EqualizedSymbol<T>, constellation: &QamConstellation<T>, fft: &FftPlan<T>) -> BitVector {
    (0..d_hat.nt)
        .flat_map(|r| hard_demap(&fft.dft(d_hat.antenna(r)), constellation))
        .collect()
}

/// Dense `(Nr M) x (Nt M)` matrix `H` with blocks `diag(𝐅ĥ^{q,r}) 𝓕`.
/// Intended for oracles on small instances.
pub fn dense_channel_matrix<T: Real>(est: &LsEstimate<T>, m: usize) -> ComplexMatrix<T> {
    let (nr, nt) = (est.nr(), est.nt());
    let fft = FftPlan::new(m);
    let resp = freq_response(&est.to_channel(), &fft);
    let f = dft_matrix::<T>(m);
    ComplexMatrix::from_fn(nr * m, nt * m, |i, j| {
        let (q, row) = (i / m, i % m);
        let (r, col) = (j / m, j % m);
        resp[q * nt + r][row] * f[(row, col)]
    })
}
