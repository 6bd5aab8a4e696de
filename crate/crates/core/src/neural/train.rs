//! Mini-batch training with Adam.

use rand::seq::SliceRandom;

use super::{mse_grad, mse_loss, AdamState, MlpNetwork, Mode};
use crate::error::{Error, Result};
use crate::rng::{rng_for, Stream};
use crate::scalar::Real;

/// Row-major inputs and targets of `len()` samples.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a, T> {
    pub inputs: &'a [T],
    pub targets: &'a [T],
    pub input_dim: usize,
    pub target_dim: usize,
}

impl<'a, T: Real> Samples<'a, T> {
    pub fn new(inputs: &'a [T], targets: &'a [T], input_dim: usize, target_dim: usize) -> Result<Self> {
        if input_dim == 0 || target_dim == 0 || inputs.len() % input_dim != 0 || targets.len() % target_dim != 0 {
            return Err(Error::Dimension("sample buffers are not whole rows".into()));
        }
        if inputs.len() / input_dim != targets.len() / target_dim {
            return Err(Error::Dimension(format!(
                "{} input rows but {} target rows",
                inputs.len() / input_dim,
                targets.len() / target_dim
            )));
        }
        Ok(Self {
            inputs,
            targets,
            input_dim,
            target_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.input_dim
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn gather(&self, rows: &[usize]) -> (Vec<T>, Vec<T>) {
        let mut x = Vec::with_capacity(rows.len() * self.input_dim);
        let mut y = Vec::with_capacity(rows.len() * self.target_dim);
        for &r in rows {
            x.extend_from_slice(&self.inputs[r * self.input_dim..(r + 1) * self.input_dim]);
            y.extend_from_slice(&self.targets[r * self.target_dim..(r + 1) * self.target_dim]);
        }
        (x, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle: bool,
    pub seed: u64,
    /// Restore the parameters of the epoch with the lowest validation loss.
    pub keep_best: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean training-batch loss per epoch.
    pub train_loss: Vec<f64>,
    /// Inference-mode loss on the validation set per epoch, when given.
    pub val_loss: Vec<f64>,
    pub best_epoch: Option<usize>,
}

/// Inference-mode MSE over all samples, evaluated in chunks.
pub fn evaluate_loss<T: Real>(net: &MlpNetwork<T>, data: &Samples<'_, T>) -> Result<f64> {
    const CHUNK: usize = 1024;
    let mut total = 0.0;
    let mut start = 0;
    while start < data.len() {
        let end = (start + CHUNK).min(data.len());
        let x = &data.inputs[start * data.input_dim..end * data.input_dim];
        let y = &data.targets[start * data.target_dim..end * data.target_dim];
        total += mse_loss(&net.predict(x)?, y)? * (end - start) as f64;
        start = end;
    }
    Ok(total / data.len() as f64)
}

/// Trains in place. A trailing batch with fewer than two rows is skipped
/// because batch normalization needs a batch variance.
pub fn train<T: Real>(
    net: &mut MlpNetwork<T>,
    data: &Samples<'_, T>,
    validation: Option<&Samples<'_, T>>,
    opts: &TrainOptions,
    adam: &mut AdamState<T>,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    if data.input_dim != net.input_dim() || data.target_dim != net.output_dim() {
        return Err(Error::Dimension(format!(
            "samples are {} -> {}, network is {} -> {}",
            data.input_dim,
            data.target_dim,
            net.input_dim(),
            net.output_dim()
        )));
    }
    if opts.batch_size < 2 {
        return Err(Error::Config("batch size must be at least 2".into()));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut report = TrainReport::default();
    let mut best: Option<(f64, MlpNetwork<T>)> = None;
    for epoch in 0..opts.epochs {
        if opts.shuffle {
            order.shuffle(&mut rng_for(opts.seed, Stream::Shuffle, epoch as u64));
        }
        let mut sum = 0.0;
        let mut batches = 0usize;
        for (b, rows) in order.chunks(opts.batch_size).enumerate() {
            if rows.len() < 2 {
                continue;
            }
            let (x, y) = data.gather(rows);
            let cache = net.forward(&x, Mode::Train)?;
            let loss = mse_loss(cache.output(), &y)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    detail: format!("batch loss is {loss}"),
                });
            }
            let grads = net.backward(&cache, &mse_grad(cache.output(), &y))?;
            net.update_running_stats(&cache);
            adam.step(&mut net.params_mut(), &grads.slices())?;
            sum += loss;
            batches += 1;
        }
        report.train_loss.push(sum / batches.max(1) as f64);
        if let Some(val) = validation {
            let loss = evaluate_loss(net, val)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: batches,
                    detail: format!("validation loss is {loss}"),
                });
            }
            report.val_loss.push(loss);
            if opts.keep_best && best.as_ref().is_none_or(|(b, _)| loss < *b) {
                best = Some((loss, net.clone()));
                report.best_epoch = Some(epoch);
            }
        }
    }
    if let Some((_, snapshot)) = best {
        *net = snapshot;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n * 6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n * 4).map(|_| rng.random_range(0..2) as f64).collect();
        (x, y)
    }

    fn opts(epochs: usize, shuffle: bool) -> TrainOptions {
        TrainOptions {
            epochs,
            batch_size: 10,
            shuffle,
            seed: 4,
            keep_best: false,
        }
    }

    #[test]
    fn memorizes_ten_samples() {
        let (x, y) = toy(10, 1);
        let data = Samples::new(&x, &y, 6, 4).unwrap();
        let mut net = MlpNetwork::<f64>::new(&[6, 32, 32, 4], &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let mut adam = AdamState::new(1e-2);
        let report = train(&mut net, &data, None, &opts(3000, false), &mut adam).unwrap();
        assert!(*report.train_loss.last().unwrap() < 1e-3, "{:?}", report.train_loss.last());
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let (x, y) = toy(55, 3);
        let data = Samples::new(&x, &y, 6, 4).unwrap();
        let run = || {
            let mut net = MlpNetwork::<f64>::new(&[6, 8, 4], &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            let mut adam = AdamState::new(1e-3);
            let r = train(&mut net, &data, Some(&data), &opts(3, true), &mut adam).unwrap();
            (net, r)
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(ra.val_loss.len(), 3);
    }

    #[test]
    fn divergence_is_reported() {
        let (mut x, y) = toy(20, 5);
        x[7] = f64::NAN;
        let data = Samples::new(&x, &y, 6, 4).unwrap();
        let mut net = MlpNetwork::<f64>::new(&[6, 4], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let err = train(&mut net, &data, None, &opts(1, false), &mut AdamState::new(1e-3));
        assert!(matches!(err, Err(Error::Divergence { epoch: 0, batch: 0, .. })));
    }

    #[test]
    fn keep_best_restores_snapshot() {
        let (x, y) = toy(40, 6);
        let (vx, vy) = toy(20, 7);
        let data = Samples::new(&x, &y, 6, 4).unwrap();
        let val = Samples::new(&vx, &vy, 6, 4).unwrap();
        let mut net = MlpNetwork::<f64>::new(&[6, 16, 4], &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let o = TrainOptions { keep_best: true, ..opts(30, true) };
        let r = train(&mut net, &data, Some(&val), &o, &mut AdamState::new(1e-2)).unwrap();
        let best = r.best_epoch.unwrap();
        let min = r.val_loss.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(r.val_loss[best], min);
        assert!((evaluate_loss(&net, &val).unwrap() - min).abs() < 1e-12);
    }

    #[test]
    fn empty_or_mismatched_data_rejected() {
        let mut net = MlpNetwork::<f64>::new(&[6, 4], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let empty = Samples::<f64>::new(&[], &[], 6, 4).unwrap();
        assert!(train(&mut net, &empty, None, &opts(1, false), &mut AdamState::new(1e-3)).is_err());
        assert!(Samples::new(&[0.0; 12], &[0.0; 4], 6, 4).is_err());
    }
}
