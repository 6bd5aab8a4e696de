//! Random multipath MIMO channels, time-domain application and AWGN.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::LinkConfig;
use crate::error::{Error, Result};
use crate::numerics::{ComplexVector, FftPlan};
use crate::rng::{rng_for, Stream};
use crate::scalar::Real;

/// Largest number of resolvable paths per antenna pair.
pub const MAX_PATHS: usize = 10;
/// Largest path delay in samples.
pub const MAX_DELAY: usize = 6;

/// Impulse responses `h^{q,r}` for every receive/transmit antenna pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    nt: usize,
    nr: usize,
    l: usize,
    /// Indexed `q * nt + r`.
    taps: Vec<ComplexVector<T>>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn from_taps(nt: usize, nr: usize, l: usize, taps: Vec<ComplexVector<T>>) -> Result<Self> {
        if taps.len() != nt * nr || taps.iter().any(|h| h.len() != l) {
            return Err(Error::Dimension(format!(
                "expected {} impulse responses of length {l}",
                nt * nr
            )));
        }
        Ok(Self { nt, nr, l, taps })
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    #[inline]
    pub fn taps(&self, q: usize, r: usize) -> &[Complex<T>] {
        &self.taps[q * self.nt + r]
    }

    pub fn all_taps(&self) -> &[ComplexVector<T>] {
        &self.taps
    }

    /// `h^q = [h^{q,1}; ...; h^{q,Nt}]`, the unknown of the LS problem.
    pub fn stacked(&self, q: usize) -> ComplexVector<T> {
        (0..self.nt).flat_map(|r| self.taps(q, r).iter().copied()).collect()
    }

    /// Narrows the scalar type, e.g. to replay an `f64` draw in `f32`.
    pub fn cast<U: Real>(&self) -> ChannelRealization<U> {
        ChannelRealization {
            nt: self.nt,
            nr: self.nr,
            l: self.l,
            taps: self
                .taps
                .iter()
                .map(|h| h.iter().map(|z| Complex::new(U::of(z.re.f64()), U::of(z.im.f64()))).collect())
                .collect(),
        }
    }
}

/// Circular complex Gaussian with variance `var` (`var / 2` per component).
#[inline]
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex<T> {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::of(re * s), T::of(im * s))
}

/// Draws one realization per antenna pair from `rng`.
///
/// Each pair gets `P ~ U{1..10}` paths with delays uniform on `{0..6}` and
/// gains `CN(0, 1/P)`, so `E||h||^2 = 1`. Paths landing on the same delay add.
pub fn sample_channel_with<T: Real, R: Rng + ?Sized>(cfg: &LinkConfig, rng: &mut R) -> ChannelRealization<T> {
    assert!(cfg.l > MAX_DELAY, "channel length must cover the delay spread");
    let zero = Complex::new(T::zero(), T::zero());
    let taps = (0..cfg.nr * cfg.nt)
        .map(|_| {
            let mut h = vec![zero; cfg.l];
            let paths = rng.random_range(1..=MAX_PATHS);
            let var = 1.0 / paths as f64;
            for _ in 0..paths {
                let d = rng.random_range(0..=MAX_DELAY);
                h[d] += complex_gaussian::<T, _>(rng, var);
            }
            h
        })
        .collect();
    ChannelRealization {
        nt: cfg.nt,
        nr: cfg.nr,
        l: cfg.l,
        taps,
    }
}

/// Deterministic channel draw for `seed`.
pub fn sample_channel<T: Real>(cfg: &LinkConfig, seed: u64) -> ChannelRealization<T> {
    sample_channel_with(cfg, &mut rng_for(seed, Stream::Channel, 0))
}

/// Linear convolution of CP-extended transmit streams with the channel,
/// summed over transmit antennas. Samples before the stream start are zero
/// (previous symbol absent), which the cyclic prefix absorbs.
pub fn apply_channel_time<T: Real>(
    x_time: &[ComplexVector<T>],
    ch: &ChannelRealization<T>,
    l_cp: usize,
) -> Result<Vec<ComplexVector<T>>> {
    if x_time.len() != ch.nt {
        return Err(Error::Dimension(format!(
            "{} transmit streams for a channel with {} transmit antennas",
            x_time.len(),
            ch.nt
        )));
    }
    if l_cp + 1 < ch.l {
        return Err(Error::Config(format!(
            "cyclic prefix of {l_cp} samples shorter than channel memory {}",
            ch.l - 1
        )));
    }
    let n = x_time.first().map_or(0, Vec::len);
    if x_time.iter().any(|x| x.len() != n) {
        return Err(Error::Dimension("transmit streams differ in length".into()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    Ok((0..ch.nr)
        .map(|q| {
            let mut y = vec![zero; n];
            for (r, x) in x_time.iter().enumerate() {
                let h = ch.taps(q, r);
                for (l, &hl) in h.iter().enumerate() {
                    if hl == zero {
                        continue;
                    }
                    for t in l..n {
                        y[t] += hl * x[t - l];
                    }
                }
            }
            y
        })
        .collect())
}

/// `𝐅h^{q,r}` for every pair: the unnormalized `M`-point DFT of the
/// zero-padded impulse response. Indexed `q * nt + r`.
pub fn freq_response<T: Real>(ch: &ChannelRealization<T>, plan: &FftPlan<T>) -> Vec<ComplexVector<T>> {
    let m = plan.len();
    let sqrt_m = T::of_usize(m).sqrt();
    ch.taps
        .iter()
        .map(|h| {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
            buf[..h.len()].copy_from_slice(h);
            plan.forward(&mut buf);
            buf.iter_mut().for_each(|z| *z = *z * sqrt_m);
            buf
        })
        .collect()
}

/// Noise level tied to the SNR definition `SNR = Nt * rho / sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2: f64,
    pub snr_db: f64,
}

impl NoiseSpec {
    pub fn from_snr(snr_db: f64, nt: usize, rho: f64) -> Self {
        Self {
            sigma2: nt as f64 * rho / 10f64.powf(snr_db / 10.0),
            snr_db,
        }
    }

    pub fn noiseless() -> Self {
        Self {
            sigma2: 0.0,
            snr_db: f64::INFINITY,
        }
    }
}

/// Adds i.i.d. `CN(0, sigma2)` noise drawn from `rng`.
pub fn add_awgn_with<T: Real, R: Rng + ?Sized>(y: &[Complex<T>], spec: &NoiseSpec, rng: &mut R) -> ComplexVector<T> {
    if spec.sigma2 == 0.0 {
        return y.to_vec();
    }
    y.iter().map(|&z| z + complex_gaussian::<T, _>(rng, spec.sigma2)).collect()
}

pub fn add_awgn<T: Real>(y: &[Complex<T>], spec: &NoiseSpec, seed: u64) -> ComplexVector<T> {
    add_awgn_with(y, spec, &mut rng_for(seed, Stream::DataNoise, 0))
}
