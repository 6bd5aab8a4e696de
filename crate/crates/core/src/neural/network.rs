//! Fully connected network with batch normalization after every dense layer.
//!
//! Batches are row-major `V x dim` slices. Each layer computes
//! `z = x Wᵀ + b`, normalizes `z` per feature, applies `gamma`/`beta` and then
//! the activation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{gemm, Op, Real};

pub const BN_EPSILON: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply<T: Real>(self, u: T) -> T {
        match self {
            Activation::Relu => u.max(T::zero()),
            Activation::Sigmoid => T::one() / (T::one() + (-u).exp()),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative<T: Real>(self, a: T) -> T {
        match self {
            Activation::Relu => {
                if a > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => a * (T::one() - a),
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}

/// Whether batch normalization uses batch statistics or running statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Inference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm<T> {
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    pub epsilon: T,
    pub momentum: T,
}

impl<T: Real> BatchNorm<T> {
    fn new(dim: usize) -> Self {
        Self {
            gamma: vec![T::one(); dim],
            beta: vec![T::zero(); dim],
            running_mean: vec![T::zero(); dim],
            running_var: vec![T::one(); dim],
            epsilon: T::of(BN_EPSILON),
            momentum: T::of(BN_MOMENTUM),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `out_dim x in_dim`, row-major.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
    pub bn: BatchNorm<T>,
    pub activation: Activation,
}

impl<T: Real> DenseLayer<T> {
    /// Uniform fan-in initialization `U(-sqrt(6 / in), sqrt(6 / in))`.
    pub fn new<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / in_dim.max(1) as f64).sqrt();
        Self {
            in_dim,
            out_dim,
            weights: (0..in_dim * out_dim).map(|_| T::of(rng.random_range(-limit..limit))).collect(),
            bias: vec![T::zero(); out_dim],
            bn: BatchNorm::new(out_dim),
            activation,
        }
    }
}

/// Intermediate values of one layer needed by the backward pass.
#[derive(Debug, Clone)]
pub struct LayerCache<T> {
    pub input: Vec<T>,
    /// Batch mean and biased variance of `z` (train mode only).
    pub batch_mean: Vec<T>,
    pub batch_var: Vec<T>,
    pub x_hat: Vec<T>,
    pub inv_std: Vec<T>,
    pub output: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    pub mode: Mode,
    pub batch: usize,
    pub layers: Vec<LayerCache<T>>,
}

impl<T: Real> ForwardCache<T> {
    pub fn output(&self) -> &[T] {
        &self.layers.last().expect("network has layers").output
    }
}

/// Gradients in the same order as [`MlpNetwork::params_mut`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad<T> {
    pub weights: Vec<T>,
    pub bias: Vec<T>,
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerGrad<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn slices(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|g| [&g.weights[..], &g.bias[..], &g.gamma[..], &g.beta[..]])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork<T> {
    pub layers: Vec<DenseLayer<T>>,
}

impl<T: Real> MlpNetwork<T> {
    /// `dims = [input, hidden..., output]`; ReLU on hidden layers, sigmoid on the output.
    pub fn new<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {dims:?}")));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { Activation::Sigmoid } else { Activation::Relu };
                DenseLayer::new(dims[i], dims[i + 1], act, rng)
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<DenseLayer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            let ok = l.weights.len() == l.in_dim * l.out_dim
                && l.bias.len() == l.out_dim
                && [&l.bn.gamma, &l.bn.beta, &l.bn.running_mean, &l.bn.running_var]
                    .iter()
                    .all(|v| v.len() == l.out_dim);
            if !ok {
                return Err(Error::Dimension(format!("layer {i} has inconsistent parameter sizes")));
            }
            if l.bn.running_var.iter().any(|&v| v < T::zero()) || !(l.bn.epsilon > T::zero()) {
                return Err(Error::Config(format!("layer {i} has invalid batch-norm state")));
            }
            if i > 0 && layers[i - 1].out_dim != l.in_dim {
                return Err(Error::Dimension(format!(
                    "layer {i} expects {} inputs but the previous layer has {} outputs",
                    l.in_dim,
                    layers[i - 1].out_dim
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("network has layers").out_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(|l| l.out_dim)).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + 3 * l.out_dim).sum()
    }

    /// Trainable parameters: per layer weights, bias, gamma, beta.
    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                let DenseLayer { weights, bias, bn, .. } = l;
                [&mut weights[..], &mut bias[..], &mut bn.gamma[..], &mut bn.beta[..]]
            })
            .collect()
    }

    pub fn cast<U: Real>(&self) -> MlpNetwork<U> {
        let c = |v: &[T]| v.iter().map(|x| U::of(x.f64())).collect::<Vec<U>>();
        MlpNetwork {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer {
                    in_dim: l.in_dim,
                    out_dim: l.out_dim,
                    weights: c(&l.weights),
                    bias: c(&l.bias),
                    bn: BatchNorm {
                        gamma: c(&l.bn.gamma),
                        beta: c(&l.bn.beta),
                        running_mean: c(&l.bn.running_mean),
                        running_var: c(&l.bn.running_var),
                        epsilon: U::of(l.bn.epsilon.f64()),
                        momentum: U::of(l.bn.momentum.f64()),
                    },
                    activation: l.activation,
                })
                .collect(),
        }
    }

    /// Forward pass over a batch of `input.len() / input_dim` rows.
    ///
    /// Train mode normalizes with batch statistics and needs at least two rows.
    /// Running statistics are not touched; see [`Self::update_running_stats`].
    pub fn forward(&self, input: &[T], mode: Mode) -> Result<ForwardCache<T>> {
        let d = self.input_dim();
        if input.len() % d != 0 || input.is_empty() {
            return Err(Error::Dimension(format!(
                "batch of {} values is not a whole number of {d}-dimensional rows",
                input.len()
            )));
        }
        let v = input.len() / d;
        if mode == Mode::Train && v < 2 {
            return Err(Error::Dimension("train-mode batch normalization needs at least 2 rows".into()));
        }
        let vt = T::of_usize(v);
        let mut layers: Vec<LayerCache<T>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let x = layers.last().map_or(input, |c| &c.output[..]).to_vec();
            let n = layer.out_dim;
            let mut z = vec![T::zero(); v * n];
            for row in z.chunks_exact_mut(n) {
                row.copy_from_slice(&layer.bias);
            }
            gemm(v, layer.in_dim, n, T::one(), &x, Op::N, &layer.weights, Op::T, T::one(), &mut z);

            let (mean, var) = match mode {
                Mode::Train => {
                    let mut mean = vec![T::zero(); n];
                    for row in z.chunks_exact(n) {
                        for (m, &zi) in mean.iter_mut().zip(row) {
                            *m += zi;
                        }
                    }
                    mean.iter_mut().for_each(|m| *m /= vt);
                    let mut var = vec![T::zero(); n];
                    for row in z.chunks_exact(n) {
                        for ((s, &zi), &m) in var.iter_mut().zip(row).zip(&mean) {
                            *s += (zi - m) * (zi - m);
                        }
                    }
                    var.iter_mut().for_each(|s| *s /= vt);
                    (mean, var)
                }
                Mode::Inference => (layer.bn.running_mean.clone(), layer.bn.running_var.clone()),
            };
            let inv_std: Vec<T> = var.iter().map(|&s| (s + layer.bn.epsilon).sqrt().recip()).collect();
            let mut x_hat = z;
            let mut out = vec![T::zero(); v * n];
            for (xr, orow) in x_hat.chunks_exact_mut(n).zip(out.chunks_exact_mut(n)) {
                for j in 0..n {
                    xr[j] = (xr[j] - mean[j]) * inv_std[j];
                    orow[j] = layer.activation.apply(layer.bn.gamma[j] * xr[j] + layer.bn.beta[j]);
                }
            }
            layers.push(LayerCache {
                input: x,
                batch_mean: mean,
                batch_var: var,
                x_hat,
                inv_std,
                output: out,
            });
        }
        Ok(ForwardCache { mode, batch: v, layers })
    }

    /// Inference-mode outputs.
    pub fn predict(&self, input: &[T]) -> Result<Vec<T>> {
        let mut cache = self.forward(input, Mode::Inference)?;
        Ok(cache.layers.pop().expect("network has layers").output)
    }

    /// Exponential moving average of the batch statistics of a train-mode pass;
    /// the variance is stored unbiased.
    pub fn update_running_stats(&mut self, cache: &ForwardCache<T>) {
        if cache.mode != Mode::Train {
            return;
        }
        let v = cache.batch;
        let unbias = T::of_usize(v) / T::of_usize(v - 1);
        for (layer, c) in self.layers.iter_mut().zip(&cache.layers) {
            let bn = &mut layer.bn;
            let mom = bn.momentum;
            for j in 0..layer.out_dim {
                bn.running_mean[j] = (T::one() - mom) * bn.running_mean[j] + mom * c.batch_mean[j];
                bn.running_var[j] = (T::one() - mom) * bn.running_var[j] + mom * c.batch_var[j] * unbias;
            }
        }
    }

    /// Gradients of a scalar loss given `d loss / d output` for the cached batch.
    pub fn backward(&self, cache: &ForwardCache<T>, output_grad: &[T]) -> Result<Gradients<T>> {
        let v = cache.batch;
        if output_grad.len() != v * self.output_dim() {
            return Err(Error::Dimension(format!(
                "output gradient has {} values, expected {}",
                output_grad.len(),
                v * self.output_dim()
            )));
        }
        let vt = T::of_usize(v);
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = output_grad.to_vec();
        for (layer, c) in self.layers.iter().zip(&cache.layers).rev() {
            let n = layer.out_dim;
            // d loss / d (gamma x_hat + beta)
            let mut du = upstream;
            for (d, &a) in du.iter_mut().zip(&c.output) {
                *d *= layer.activation.derivative(a);
            }
            let mut dgamma = vec![T::zero(); n];
            let mut dbeta = vec![T::zero(); n];
            for (drow, xrow) in du.chunks_exact(n).zip(c.x_hat.chunks_exact(n)) {
                for j in 0..n {
                    dgamma[j] += drow[j] * xrow[j];
                    dbeta[j] += drow[j];
                }
            }
            // d loss / d z
            let mut dz = du;
            match cache.mode {
                Mode::Train => {
                    for (drow, xrow) in dz.chunks_exact_mut(n).zip(c.x_hat.chunks_exact(n)) {
                        for j in 0..n {
                            let g = layer.bn.gamma[j];
                            drow[j] = g * c.inv_std[j] / vt * (vt * drow[j] - dbeta[j] - xrow[j] * dgamma[j]);
                        }
                    }
                }
                Mode::Inference => {
                    for drow in dz.chunks_exact_mut(n) {
                        for j in 0..n {
                            drow[j] *= layer.bn.gamma[j] * c.inv_std[j];
                        }
                    }
                }
            }
            let mut dbias = vec![T::zero(); n];
            for drow in dz.chunks_exact(n) {
                for (b, &d) in dbias.iter_mut().zip(drow) {
                    *b += d;
                }
            }
            let mut dw = vec![T::zero(); n * layer.in_dim];
            gemm(n, v, layer.in_dim, T::one(), &dz, Op::T, &c.input, Op::N, T::zero(), &mut dw);
            let mut dx = vec![T::zero(); v * layer.in_dim];
            gemm(v, n, layer.in_dim, T::one(), &dz, Op::N, &layer.weights, Op::N, T::zero(), &mut dx);
            upstream = dx;
            grads.push(LayerGrad {
                weights: dw,
                bias: dbias,
                gamma: dgamma,
                beta: dbeta,
            });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }
}
