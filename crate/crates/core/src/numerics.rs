//! Complex linear algebra and transform kernels.
//!
//! Conventions used throughout the crate:
//!
//! * the DFT is unitary: the forward transform carries the `1/sqrt(M)` factor
//!   and so does the inverse, so `||dft(x)|| == ||x||`;
//! * indices (tones, taps, rows) are zero-based;
//! * matrices are stored row-major.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Complex baseband samples or symbols.
pub type ComplexVector<T> = Vec<Complex<T>>;

/// Relative singular-value cutoff of [`pseudo_inverse`] for `f64`.
pub const PINV_RTOL: f64 = 1e-10;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ComplexVector<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for p in 0..self.cols {
                let a = self[(i, p)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = rhs.row(p);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Result<ComplexVector<T>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} matrix by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Strictly increasing zero-based indices inside `0..universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    universe: usize,
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>, universe: usize) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Dimension(format!(
                    "index set must be strictly increasing, found {} before {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= universe {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    universe,
                });
            }
        }
        Ok(Self { universe, indices })
    }

    /// `{0, 1, ..., n - 1}` inside a universe of size `n`.
    pub fn full(n: usize) -> Self {
        Self {
            universe: n,
            indices: (0..n).collect(),
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

#[inline]
fn cis<T: Real>(angle: f64) -> Complex<T> {
    Complex::new(T::of(angle.cos()), T::of(angle.sin()))
}

/// Precomputed unitary DFT of a fixed length.
///
/// Power-of-two lengths use an in-place radix-2 FFT; any other length falls
/// back to the dense `O(M^2)` sum with a cached root-of-unity table.
#[derive(Debug, Clone)]
pub struct FftPlan<T> {
    len: usize,
    /// `exp(-j 2 pi k / len)` for `k in 0..len`.
    roots: Vec<Complex<T>>,
    bitrev: Vec<usize>,
    scale: T,
    radix2: bool,
}

impl<T: Real> FftPlan<T> {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "transform length must be positive");
        let roots = (0..len)
            .map(|k| cis(-2.0 * std::f64::consts::PI * k as f64 / len as f64))
            .collect();
        let radix2 = len.is_power_of_two();
        let bitrev = if radix2 {
            let bits = len.trailing_zeros();
            (0..len)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            len,
            roots,
            bitrev,
            scale: T::one() / T::of_usize(len).sqrt(),
            radix2,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unitary forward transform.
    pub fn forward(&self, x: &mut [Complex<T>]) {
        self.transform(x, false);
    }

    /// In-place unitary inverse transform.
    pub fn inverse(&self, x: &mut [Complex<T>]) {
        self.transform(x, true);
    }

    pub fn dft(&self, x: &[Complex<T>]) -> ComplexVector<T> {
        let mut y = x.to_vec();
        self.forward(&mut y);
        y
    }

    pub fn idft(&self, x: &[Complex<T>]) -> ComplexVector<T> {
        let mut y = x.to_vec();
        self.inverse(&mut y);
        y
    }

    fn transform(&self, x: &mut [Complex<T>], inverse: bool) {
        assert_eq!(x.len(), self.len, "transform length mismatch");
        if self.radix2 {
            self.radix2_in_place(x, inverse);
        } else {
            let y = self.dense(x, inverse);
            x.copy_from_slice(&y);
        }
        for z in x.iter_mut() {
            *z = *z * self.scale;
        }
    }

    fn radix2_in_place(&self, x: &mut [Complex<T>], inverse: bool) {
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                x.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let w = self.roots[j * step];
                    let w = if inverse { w.conj() } else { w };
                    let u = x[start + j];
                    let v = x[start + j + half] * w;
                    x[start + j] = u + v;
                    x[start + j + half] = u - v;
                }
            }
            size *= 2;
        }
    }

    fn dense(&self, x: &[Complex<T>], inverse: bool) -> ComplexVector<T> {
        let n = self.len;
        (0..n)
            .map(|m| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, xk) in x.iter().enumerate() {
                    let w = self.roots[(m * k) % n];
                    acc += xk * if inverse { w.conj() } else { w };
                }
                acc
            })
            .collect()
    }

    /// Unscaled dense transform, independent of the radix-2 path. Used to
    /// cross-check the fast path.
    pub fn dense_unitary(&self, x: &[Complex<T>], inverse: bool) -> ComplexVector<T> {
        self.dense(x, inverse).into_iter().map(|z| z * self.scale).collect()
    }
}

/// Unitary DFT `𝓕x`.
pub fn dft<T: Real>(x: &[Complex<T>]) -> ComplexVector<T> {
    FftPlan::new(x.len()).dft(x)
}

/// Unitary inverse DFT `𝓕ᴴx`.
pub fn idft<T: Real>(x: &[Complex<T>]) -> ComplexVector<T> {
    FftPlan::new(x.len()).idft(x)
}

/// `sqrt(M)` times the first `l` columns of the unitary `M`-point DFT matrix,
/// i.e. entry `(m, n) = exp(-j 2 pi m n / M)`.
pub fn partial_fourier<T: Real>(m: usize, l: usize) -> Result<ComplexMatrix<T>> {
    if l == 0 || l > m {
        return Err(Error::Dimension(format!(
            "partial Fourier matrix needs 1 <= L <= M, got M={m}, L={l}"
        )));
    }
    Ok(ComplexMatrix::from_fn(m, l, |r, c| {
        cis(-2.0 * std::f64::consts::PI * ((r * c) % m) as f64 / m as f64)
    }))
}

/// Full unitary DFT matrix, mostly for dense oracles.
pub fn dft_matrix<T: Real>(m: usize) -> ComplexMatrix<T> {
    let s = T::one() / T::of_usize(m).sqrt();
    ComplexMatrix::from_fn(m, m, |r, c| {
        cis::<T>(-2.0 * std::f64::consts::PI * ((r * c) % m) as f64 / m as f64) * s
    })
}

/// Stacks the selected rows of `mtx` in index order.
pub fn row_select<T: Real>(mtx: &ComplexMatrix<T>, rows: &IndexSet) -> Result<ComplexMatrix<T>> {
    if let Some(&bad) = rows.as_slice().iter().find(|&&i| i >= mtx.rows()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            universe: mtx.rows(),
        });
    }
    let mut data = Vec::with_capacity(rows.len() * mtx.cols());
    for i in rows.iter() {
        data.extend_from_slice(mtx.row(i));
    }
    ComplexMatrix::from_rows(rows.len(), mtx.cols(), data)
}

/// Thin singular value decomposition `A = U diag(sigma) Vᴴ`.
///
/// For an `m x n` input, `U` is `m x r`, `V` is `n x r` with `r = min(m, n)`;
/// singular values are sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: ComplexMatrix<T>,
    pub sigma: Vec<T>,
    pub v: ComplexMatrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd<T: Real>(a: &ComplexMatrix<T>) -> Svd<T> {
    if a.rows() < a.cols() {
        let Svd { u, sigma, v } = svd(&a.adjoint());
        return Svd { u: v, sigma, v: u };
    }
    let (m, n) = (a.rows(), a.cols());
    let zero = Complex::new(T::zero(), T::zero());
    let mut cols: Vec<ComplexVector<T>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<ComplexVector<T>> = (0..n)
        .map(|j| {
            let mut e = vec![zero; n];
            e[j] = Complex::new(T::one(), T::zero());
            e
        })
        .collect();
    let eps = T::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: T = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .fold(zero, |acc, (x, y)| acc + x.conj() * y);
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (g + g);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, phase, c, s);
                rotate(&mut vcols, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(T, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = ComplexMatrix::zeros(m, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &(s, j)) in order.iter().enumerate() {
        sigma.push(s);
        for i in 0..m {
            u[(i, k)] = if s > T::zero() { cols[j][i] / s } else { zero };
        }
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
    }
    Svd { u, sigma, v }
}

fn rotate<T: Real>(cols: &mut [ComplexVector<T>], p: usize, q: usize, phase: Complex<T>, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let ap = *x;
        let aq = *y * phase;
        *x = ap * c - aq * s;
        *y = ap * s + aq * c;
    }
}

/// Moore–Penrose pseudo-inverse together with its effective rank.
#[derive(Debug, Clone)]
pub struct PseudoInverse<T> {
    pub matrix: ComplexMatrix<T>,
    pub rank: usize,
    /// Number of singular values zeroed by the cutoff.
    pub dropped: usize,
}

/// Relative singular-value cutoff for the scalar type: `1e-10`, raised to
/// `dim * eps` when the type cannot resolve `1e-10`.
pub fn pinv_tolerance<T: Real>(dim: usize) -> T {
    T::of(PINV_RTOL).max(T::epsilon() * T::of_usize(dim.max(1)))
}

/// Pseudo-inverse via Jacobi SVD. Singular values below
/// [`pinv_tolerance`] times the largest one are treated as zero.
pub fn pseudo_inverse<T: Real>(a: &ComplexMatrix<T>) -> PseudoInverse<T> {
    let (m, n) = (a.rows(), a.cols());
    let Svd { u, sigma, v } = svd(a);
    let smax = sigma.first().copied().unwrap_or(T::zero());
    let cutoff = smax * pinv_tolerance::<T>(m.max(n));
    let mut out = ComplexMatrix::zeros(n, m);
    let mut rank = 0;
    for (k, &s) in sigma.iter().enumerate() {
        if s <= cutoff || s == T::zero() {
            continue;
        }
        rank += 1;
        let inv = T::one() / s;
        for i in 0..n {
            let vik = v[(i, k)] * inv;
            for j in 0..m {
                out[(i, j)] += vik * u[(j, k)].conj();
            }
        }
    }
    PseudoInverse {
        matrix: out,
        rank,
        dropped: sigma.len() - rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
        (0..n)
            .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix<f64> {
        ComplexMatrix::from_rows(r, c, random_vec(rng, r * c)).unwrap()
    }

    fn norm(x: &[C]) -> f64 {
        x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn rel_err(a: &[C], b: &[C]) -> f64 {
        let d: Vec<C> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&d) / norm(b).max(1e-300)
    }

    #[test]
    fn impulse_transforms_to_flat_spectrum() {
        for m in [1, 4, 7, 16] {
            let mut x = vec![C::new(0.0, 0.0); m];
            x[0] = C::new(1.0, 0.0);
            let y = dft(&x);
            let s = 1.0 / (m as f64).sqrt();
            for z in &y {
                assert!((z - C::new(s, 0.0)).norm() < 1e-14);
            }
            let back = idft(&y);
            assert!(rel_err(&back, &x) < 1e-12);
        }
    }

    #[test]
    fn idft_of_zero_is_zero() {
        let y = idft(&vec![C::new(0.0, 0.0); 12]);
        assert!(y.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn radix2_and_dense_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [2usize, 8, 64, 256] {
            let plan = FftPlan::<f64>::new(m);
            let x = random_vec(&mut rng, m);
            assert!(rel_err(&plan.dft(&x), &plan.dense_unitary(&x, false)) < 1e-12);
            assert!(rel_err(&plan.idft(&x), &plan.dense_unitary(&x, true)) < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval_on_odd_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in [3usize, 5, 9, 15, 100] {
            let x = random_vec(&mut rng, m);
            let y = dft(&x);
            assert!((norm(&y) - norm(&x)).abs() / norm(&x) < 1e-12);
            assert!(rel_err(&idft(&y), &x) < 1e-12);
            assert!(rel_err(&dft(&idft(&x)), &x) < 1e-12);
        }
    }

    #[test]
    fn partial_fourier_small_cases() {
        let f = partial_fourier::<f64>(4, 1).unwrap();
        assert_eq!((f.rows(), f.cols()), (4, 1));
        for i in 0..4 {
            assert!((f[(i, 0)] - C::new(1.0, 0.0)).norm() < 1e-15);
        }
        let full = partial_fourier::<f64>(4, 4).unwrap();
        let gram = full.adjoint().matmul(&full).unwrap();
        let want = ComplexMatrix::<f64>::identity(4).scale(C::new(4.0, 0.0));
        assert!(gram.max_abs_diff(&want) < 1e-12);
        assert!(partial_fourier::<f64>(4, 0).is_err());
        assert!(partial_fourier::<f64>(4, 5).is_err());
    }

    #[test]
    fn partial_fourier_columns_are_orthogonal_with_norm_m() {
        for (m, l) in [(8, 3), (16, 16), (12, 5), (128, 16)] {
            let f = partial_fourier::<f64>(m, l).unwrap();
            // Direct Gram computation, entry by entry.
            for a in 0..l {
                for b in 0..l {
                    let g: C = (0..m).map(|i| f[(i, a)].conj() * f[(i, b)]).sum();
                    let want = if a == b { m as f64 } else { 0.0 };
                    assert!((g - C::new(want, 0.0)).norm() < 1e-10, "M={m} L={l} ({a},{b}) -> {g}");
                }
            }
        }
    }

    #[test]
    fn row_select_cases() {
        let id = ComplexMatrix::<f64>::identity(3);
        let r = row_select(&id, &IndexSet::new(vec![1], 3).unwrap()).unwrap();
        assert_eq!(r.row(0), &[C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)]);
        assert_eq!(row_select(&id, &IndexSet::full(3)).unwrap(), id);
        assert!(matches!(
            row_select(&id, &IndexSet::new(vec![0, 3], 4).unwrap()),
            Err(Error::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn selected_dft_rows_are_orthonormal() {
        let f = dft_matrix::<f64>(16);
        let sel = IndexSet::new(vec![0, 4, 8, 12], 16).unwrap();
        let fp = row_select(&f, &sel).unwrap();
        let gram = fp.matmul(&fp.adjoint()).unwrap();
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn index_set_rejects_bad_input() {
        assert!(IndexSet::new(vec![2, 1], 5).is_err());
        assert!(IndexSet::new(vec![1, 1], 5).is_err());
        assert!(IndexSet::new(vec![0, 5], 5).is_err());
        assert!(IndexSet::new(vec![], 5).unwrap().is_empty());
    }

    #[test]
    fn pinv_of_identity_and_repeated_measurement() {
        let id = ComplexMatrix::<f64>::identity(5);
        let p = pseudo_inverse(&id);
        assert_eq!(p.rank, 5);
        assert!(p.matrix.max_abs_diff(&id) < 1e-14);

        let col = ComplexMatrix::from_rows(2, 1, vec![C::new(1.0, 0.0); 2]).unwrap();
        let p = pseudo_inverse(&col);
        assert_eq!((p.matrix.rows(), p.matrix.cols()), (1, 2));
        assert!((p.matrix[(0, 0)] - C::new(0.5, 0.0)).norm() < 1e-15);
        assert!((p.matrix[(0, 1)] - C::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pinv_of_tall_full_rank_is_left_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 8, 4);
        let p = pseudo_inverse(&a);
        assert_eq!(p.rank, 4);
        let prod = p.matrix.matmul(&a).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-9);
    }

    #[test]
    fn pinv_handles_zero_and_rank_deficient() {
        let z = ComplexMatrix::<f64>::zeros(3, 2);
        let p = pseudo_inverse(&z);
        assert_eq!(p.rank, 0);
        assert_eq!(p.matrix, ComplexMatrix::zeros(2, 3));

        // Two identical columns: rank one, never divides by the zero singular value.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_vec(&mut rng, 4);
        let a = ComplexMatrix::from_fn(4, 2, |i, _| c[i]);
        let p = pseudo_inverse(&a);
        assert_eq!(p.rank, 1);
        assert!(p.matrix.is_finite());
        let apa = a.matmul(&p.matrix).unwrap().matmul(&a).unwrap();
        assert!(apa.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn svd_reconstructs_wide_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_matrix(&mut rng, 3, 7);
        let Svd { u, sigma, v } = svd(&a);
        let s = ComplexMatrix::from_fn(sigma.len(), sigma.len(), |i, j| {
            if i == j { C::new(sigma[i], 0.0) } else { C::new(0.0, 0.0) }
        });
        let rec = u.matmul(&s).unwrap().matmul(&v.adjoint()).unwrap();
        assert!(rec.max_abs_diff(&a) < 1e-12);
        assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    }
}
