//! Dense neural-network engine: batch-normalized MLP, MSE loss, Adam, training
//! loop and checkpoints.

mod adam;
mod checkpoint;
mod gradcheck;
mod network;
mod train;

pub use adam::AdamState;
pub use checkpoint::{decode_network, encode_network, load_network, save_network, CHECKPOINT_VERSION};
pub use gradcheck::{check_gradients, GradCheck};
pub use network::{
    Activation, BatchNorm, DenseLayer, ForwardCache, Gradients, LayerCache, LayerGrad, MlpNetwork, Mode, BN_EPSILON,
    BN_MOMENTUM,
};
pub use train::{evaluate_loss, train, Samples, TrainOptions, TrainReport};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `(1 / VP) Σ ‖ŝ - s‖²` over a batch of `V` rows with `P` outputs each.
pub fn mse_loss<T: Real>(outputs: &[T], targets: &[T]) -> Result<f64> {
    if outputs.len() != targets.len() || outputs.is_empty() {
        return Err(Error::Dimension(format!(
            "loss needs equal nonempty shapes, got {} outputs and {} targets",
            outputs.len(),
            targets.len()
        )));
    }
    let sum: f64 = outputs.iter().zip(targets).map(|(&o, &t)| (o - t).f64().powi(2)).sum();
    Ok(sum / outputs.len() as f64)
}

/// Derivative of [`mse_loss`] with respect to every output.
pub fn mse_grad<T: Real>(outputs: &[T], targets: &[T]) -> Vec<T> {
    let scale = T::of(2.0) / T::of_usize(outputs.len());
    outputs.iter().zip(targets).map(|(&o, &t)| scale * (o - t)).collect()
}

/// Hard bit decisions: 1 strictly above one half, else 0.
pub fn decide_bits<T: Real>(outputs: &[T]) -> Vec<u8> {
    let half = T::of(0.5);
    outputs.iter().map(|&o| u8::from(o > half)).collect()
}
