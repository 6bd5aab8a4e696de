//! Memoryless Rapp power-amplifier model.
//!
//! AM/AM: `Γ(r) = r (1 + (r / v_sat)^(2δ))^(-1/(2δ))`, AM/PM identically zero,
//! so the PA scales every sample by the real factor `Γ(|x|) / |x|`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::ComplexVector;
use crate::scalar::Real;

/// Saturation amplitude for a clipping level `v_sat^2 / rho` given in dB.
pub fn clipping_to_vsat<T: Real>(clipping_db: T, rho: T) -> Result<T> {
    if !(rho > T::zero()) {
        return Err(Error::Config(format!("average power rho = {rho} must be positive")));
    }
    Ok((rho * T::of(10.0).powf(clipping_db / T::of(10.0))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RappPaModel<T> {
    v_sat: T,
    delta: T,
    clipping_db: T,
    rho: T,
    /// `2δ` when it is a small integer, for the fast `powi` path.
    two_delta_int: Option<i32>,
}

impl<T: Real> RappPaModel<T> {
    pub fn new(clipping_db: T, delta: T, rho: T) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::Config(format!("smoothness delta = {delta} must be positive")));
        }
        if !clipping_db.is_finite() {
            return Err(Error::Config("Rapp model needs a finite clipping level".into()));
        }
        let v_sat = clipping_to_vsat(clipping_db, rho)?;
        let two_delta = delta + delta;
        let rounded = two_delta.round();
        let two_delta_int = (rounded == two_delta && rounded <= T::of(64.0))
            .then(|| rounded.to_i32().expect("small integer"));
        Ok(Self {
            v_sat,
            delta,
            clipping_db,
            rho,
            two_delta_int,
        })
    }

    pub fn v_sat(&self) -> T {
        self.v_sat
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn clipping_db(&self) -> T {
        self.clipping_db
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    #[inline]
    fn pow_2delta(&self, u: T) -> T {
        match self.two_delta_int {
            Some(n) => u.powi(n),
            None => u.powf(self.delta + self.delta),
        }
    }

    /// AM/AM conversion `Γ(r)` for `r >= 0`.
    #[inline]
    pub fn amam(&self, r: T) -> T {
        let two_delta = self.delta + self.delta;
        let u = r / self.v_sat;
        if u <= T::one() {
            r * (-(self.pow_2delta(u)).ln_1p() / two_delta).exp()
        } else {
            // Same expression divided through by u; avoids overflow of u^(2δ).
            self.v_sat * (-(self.pow_2delta(u.recip())).ln_1p() / two_delta).exp()
        }
    }

    /// `g(x) = x Γ(|x|) / |x|` with `g(0) = 0`.
    #[inline]
    pub fn apply_one(&self, x: Complex<T>) -> Complex<T> {
        let r = x.norm();
        if r < T::of(1e-300).max(T::min_positive_value()) {
            return x;
        }
        x * (self.amam(r) / r)
    }

    pub fn apply(&self, x: &[Complex<T>]) -> ComplexVector<T> {
        x.iter().map(|&z| self.apply_one(z)).collect()
    }
}

/// Transmit amplifier: ideal linear or Rapp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PaModel<T> {
    Linear,
    Rapp(RappPaModel<T>),
}

impl<T: Real> PaModel<T> {
    /// Infinite clipping selects the linear PA.
    pub fn from_clipping(clipping_db: f64, delta: f64, rho: f64) -> Result<Self> {
        if clipping_db.is_infinite() && clipping_db > 0.0 {
            Ok(PaModel::Linear)
        } else {
            Ok(PaModel::Rapp(RappPaModel::new(T::of(clipping_db), T::of(delta), T::of(rho))?))
        }
    }

    pub fn apply(&self, x: &[Complex<T>]) -> ComplexVector<T> {
        match self {
            PaModel::Linear => x.to_vec(),
            PaModel::Rapp(pa) => pa.apply(x),
        }
    }

    pub fn apply_in_place(&self, x: &mut [Complex<T>]) {
        if let PaModel::Rapp(pa) = self {
            for z in x.iter_mut() {
                *z = pa.apply_one(*z);
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, PaModel::Linear)
    }
}

/// Element-wise PA on a whole vector.
pub fn apply_pa<T: Real>(x: &[Complex<T>], pa: &RappPaModel<T>) -> ComplexVector<T> {
    pa.apply(x)
}
