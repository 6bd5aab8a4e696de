//! Genie-aided maximum-likelihood detection over a few subcarriers.
//!
//! The detector knows the PA and searches `k_mld` consecutive subcarriers
//! jointly across all transmit antennas while every other subcarrier is held
//! at a reference value: the true data (lower bound) or one random draw per
//! frame (upper bound).
//!
//! For antenna `r` and a candidate `c` on the searched tones, the noiseless
//! contribution at receive antenna `q` is
//! `P_qr(c) = diag(𝐅ĥ^{q,r}) 𝓕 g(𝓕ᴴ x_c^r)`. Expanding the residual,
//!
//! ```text
//! ‖y - Σ_r P_r(c_r)‖² = ‖y‖² + Σ_r (‖P_r‖² - 2 Re⟨y, P_r⟩) + 2 Σ_{r<s} Re⟨P_r, P_s⟩
//! ```
//!
//! so the joint metric over all antennas reduces to per-antenna terms plus
//! pairwise Gram matrices, which are computed with a real GEMM.

use num_complex::Complex;
use rand::Rng;

use crate::channel::freq_response;
use crate::error::{Error, Result};
use crate::linear_rx::{LsEstimate, LsEstimator};
use crate::modem::{label_to_bits, BitVector, OfdmFrame, QamConstellation};
use crate::numerics::{ComplexMatrix, ComplexVector, FftPlan};
use crate::pa::PaModel;
use crate::scalar::{gemm, Op, Real};

/// Largest number of joint candidates searched by default.
pub const DEFAULT_MLD_BUDGET: u128 = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MldMode {
    /// Remaining subcarriers carry one random draw per frame.
    Upper,
    /// Remaining subcarriers carry the true data.
    Lower,
}

#[derive(Debug, Clone)]
pub struct MldConfig<T> {
    pub k_mld: usize,
    pub mode: MldMode,
    /// Points as transmitted, i.e. already scaled by `sqrt(rho)`.
    pub constellation: QamConstellation<T>,
    /// Labels searched per subcarrier, ascending.
    pub alphabet: Vec<u8>,
    pub budget: u128,
}

impl<T: Real> MldConfig<T> {
    pub fn new(k_mld: usize, mode: MldMode, constellation: QamConstellation<T>) -> Self {
        Self {
            k_mld,
            mode,
            constellation,
            alphabet: (0..16).collect(),
            budget: DEFAULT_MLD_BUDGET,
        }
    }

    /// Restricts the search to a subset of labels.
    pub fn with_alphabet(mut self, mut labels: Vec<u8>) -> Self {
        labels.sort_unstable();
        labels.dedup();
        self.alphabet = labels;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// `|alphabet|^(k_mld * nt)`, saturating.
    pub fn candidates(&self, nt: usize) -> u128 {
        let exp = u32::try_from(self.k_mld * nt).unwrap_or(u32::MAX);
        (self.alphabet.len() as u128).checked_pow(exp).unwrap_or(u128::MAX)
    }

    fn check(&self, nt: usize) -> Result<()> {
        if self.k_mld == 0 {
            return Err(Error::Config("k_mld must be positive".into()));
        }
        if self.alphabet.is_empty() || self.alphabet.iter().any(|&a| a > 15) {
            return Err(Error::Config("MLD alphabet must be a nonempty subset of 0..16".into()));
        }
        let candidates = self.candidates(nt);
        if candidates > self.budget {
            return Err(Error::BudgetExceeded {
                candidates,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

/// LS estimate `ĥ^q = A† y_p^q` with the PA-aware pilot matrix.
pub fn genie_ls_estimate<T: Real>(y_p: &[ComplexVector<T>], a: &ComplexMatrix<T>, nt: usize, l: usize) -> Result<LsEstimate<T>> {
    LsEstimator::new(a, nt, l)?.estimate(y_p)
}

/// Winner of one search.
#[derive(Debug, Clone, PartialEq)]
pub struct MldDecision<T> {
    /// Per antenna, one label per searched tone.
    pub labels: Vec<Vec<u8>>,
    /// Residual `Σ_q ‖y^q - prediction^q‖²` of the winner, evaluated directly.
    pub metric: T,
}

/// Precomputed per-frame quantities shared by all searches.
struct Model<'a, T: Real> {
    resp: Vec<ComplexVector<T>>,
    pa: &'a PaModel<T>,
    fft: &'a FftPlan<T>,
    nt: usize,
    nr: usize,
}

impl<T: Real> Model<'_, T> {
    /// Interleaved re/im of `[P_1r(x); ...; P_Nr r(x)]` for frequency symbol `x`.
    fn predict_into(&self, r: usize, x: &[Complex<T>], out: &mut [T]) {
        let mut t = self.fft.idft(x);
        self.pa.apply_in_place(&mut t);
        self.fft.forward(&mut t);
        let m = t.len();
        for q in 0..self.nr {
            let h = &self.resp[q * self.nt + r];
            for k in 0..m {
                let z = h[k] * t[k];
                out[2 * (q * m + k)] = z.re;
                out[2 * (q * m + k) + 1] = z.im;
            }
        }
    }
}

fn interleave<T: Real>(y: &[ComplexVector<T>]) -> Vec<T> {
    y.iter().flatten().flat_map(|z| [z.re, z.im]).collect()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Searches `tones` jointly over all antennas with every other subcarrier of
/// antenna `r` fixed to `fixed[r]` (frequency domain, as transmitted).
pub fn mld_search<T: Real>(
    y_d: &[ComplexVector<T>],
    est: &LsEstimate<T>,
    fixed: &[ComplexVector<T>],
    tones: &[usize],
    pa: &PaModel<T>,
    cfg: &MldConfig<T>,
    fft: &FftPlan<T>,
) -> Result<MldDecision<T>> {
    let model = Model {
        resp: freq_response(&est.to_channel(), fft),
        pa,
        fft,
        nt: est.nt(),
        nr: est.nr(),
    };
    search(&model, &interleave(y_d), fixed, tones, cfg)
}

fn search<T: Real>(model: &Model<'_, T>, y: &[T], fixed: &[ComplexVector<T>], tones: &[usize], cfg: &MldConfig<T>) -> Result<MldDecision<T>> {
    let (nt, m) = (model.nt, model.fft.len());
    if tones.len() != cfg.k_mld {
        return Err(Error::Dimension(format!("{} tones given for k_mld = {}", tones.len(), cfg.k_mld)));
    }
    if let Some(&t) = tones.iter().find(|&&t| t >= m) {
        return Err(Error::IndexOutOfRange { index: t, universe: m });
    }
    if fixed.len() != nt || fixed.iter().any(|x| x.len() != m) {
        return Err(Error::Dimension(format!("expected {nt} reference symbols of {m} tones")));
    }
    if y.len() != 2 * model.nr * m {
        return Err(Error::Dimension(format!("expected {} received symbols of {m} tones", model.nr)));
    }
    cfg.check(nt)?;

    let a = cfg.alphabet.len();
    let per_antenna = a.pow(tones.len() as u32);
    let dim = y.len();
    let digits = |c: usize| {
        // Most significant digit first: the first searched tone.
        let mut out = vec![0usize; tones.len()];
        let mut rest = c;
        for d in out.iter_mut().rev() {
            *d = rest % a;
            rest /= a;
        }
        out
    };

    let mut preds = vec![vec![T::zero(); per_antenna * dim]; nt];
    let mut unary = vec![vec![T::zero(); per_antenna]; nt];
    for r in 0..nt {
        let mut x = fixed[r].clone();
        for c in 0..per_antenna {
            for (&tone, &d) in tones.iter().zip(&digits(c)) {
                x[tone] = cfg.constellation.point(cfg.alphabet[d]);
            }
            let p = &mut preds[r][c * dim..(c + 1) * dim];
            model.predict_into(r, &x, p);
            unary[r][c] = dot(p, p) - T::of(2.0) * dot(y, p);
        }
    }

    let mut pairs = Vec::new();
    for r in 0..nt {
        for s in r + 1..nt {
            let mut g = vec![T::zero(); per_antenna * per_antenna];
            gemm(per_antenna, dim, per_antenna, T::of(2.0), &preds[r], Op::N, &preds[s], Op::T, T::zero(), &mut g);
            pairs.push((r, s, g));
        }
    }

    // Odometer over antenna-major candidate indices, lexicographic order.
    let mut idx = vec![0usize; nt];
    let mut best = idx.clone();
    let mut best_metric = T::infinity();
    'odometer: loop {
        let mut metric = (0..nt).map(|r| unary[r][idx[r]]).sum::<T>();
        for (r, s, g) in &pairs {
            metric += g[idx[*r] * per_antenna + idx[*s]];
        }
        if metric < best_metric {
            best_metric = metric;
            best.copy_from_slice(&idx);
        }
        let mut pos = nt;
        loop {
            if pos == 0 {
                break 'odometer;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < per_antenna {
                break;
            }
            idx[pos] = 0;
        }
    }

    let mut total = vec![T::zero(); dim];
    for r in 0..nt {
        for (t, &p) in total.iter_mut().zip(&preds[r][best[r] * dim..(best[r] + 1) * dim]) {
            *t += p;
        }
    }
    let metric = y.iter().zip(&total).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok(MldDecision {
        labels: best
            .iter()
            .map(|&c| digits(c).into_iter().map(|d| cfg.alphabet[d]).collect())
            .collect(),
        metric,
    })
}

/// Per-antenna frequency-domain symbols held fixed outside the searched tones.
pub fn reference_symbols<T: Real, R: Rng + ?Sized>(
    mode: MldMode,
    frame: &OfdmFrame<T>,
    cfg: &MldConfig<T>,
    rng: &mut R,
) -> Vec<ComplexVector<T>> {
    match mode {
        MldMode::Lower => frame.data_symbols.clone(),
        MldMode::Upper => frame
            .data_symbols
            .iter()
            .map(|x| {
                (0..x.len())
                    .map(|_| cfg.constellation.point(cfg.alphabet[rng.random_range(0..cfg.alphabet.len())]))
                    .collect()
            })
            .collect(),
    }
}

/// Detects every subcarrier of the frame, `k_mld` consecutive tones at a time.
///
/// Returns payload bits antenna-major, like [`OfdmFrame::labels`].
pub fn mld_detect<T: Real, R: Rng + ?Sized>(
    y_d: &[ComplexVector<T>],
    est: &LsEstimate<T>,
    frame: &OfdmFrame<T>,
    pa: &PaModel<T>,
    cfg: &MldConfig<T>,
    rng: &mut R,
) -> Result<BitVector> {
    let nt = frame.nt();
    let m = frame.data_symbols.first().map_or(0, Vec::len);
    if cfg.k_mld == 0 || m % cfg.k_mld != 0 {
        return Err(Error::Config(format!("k_mld = {} must divide M = {m}", cfg.k_mld)));
    }
    if est.nt() != nt {
        return Err(Error::Dimension(format!("estimate has {} transmit antennas, frame {nt}", est.nt())));
    }
    cfg.check(nt)?;
    let fft = FftPlan::new(m);
    let model = Model {
        resp: freq_response(&est.to_channel(), &fft),
        pa,
        fft: &fft,
        nt,
        nr: est.nr(),
    };
    let y = interleave(y_d);
    let fixed = reference_symbols(cfg.mode, frame, cfg, rng);
    let mut labels = vec![vec![0u8; m]; nt];
    for start in (0..m).step_by(cfg.k_mld) {
        let tones: Vec<usize> = (start..start + cfg.k_mld).collect();
        let d = search(&model, &y, &fixed, &tones, cfg)?;
        for r in 0..nt {
            labels[r][start..start + cfg.k_mld].copy_from_slice(&d.labels[r]);
        }
    }
    Ok(labels.iter().flatten().flat_map(|&l| label_to_bits(l)).collect())
}
