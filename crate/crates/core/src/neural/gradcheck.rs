//! Central finite-difference check of [`MlpNetwork::backward`].

use super::{mse_grad, mse_loss, MlpNetwork, Mode};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    /// Largest `|g - fd| / max(|g|, |fd|, floor)` over the checked parameters.
    pub max_rel_error: f64,
    /// `‖g - fd‖ / (‖g‖ + ‖fd‖)` over the checked parameters.
    pub norm_rel_error: f64,
    pub checked: usize,
    /// Parameters skipped because a ReLU changed state inside `±h`.
    pub skipped: usize,
}

fn loss_at(net: &MlpNetwork<f64>, x: &[f64], y: &[f64], mode: Mode) -> Result<(f64, Vec<bool>)> {
    let cache = net.forward(x, mode)?;
    let pattern = cache.layers[..cache.layers.len() - 1]
        .iter()
        .flat_map(|c| c.output.iter().map(|&a| a > 0.0))
        .collect();
    Ok((mse_loss(cache.output(), y)?, pattern))
}

/// Compares analytic MSE gradients against central differences with step `h`.
///
/// Gradients smaller than `floor` are compared on an absolute scale of `floor`;
/// in train mode the dense bias cancels inside batch normalization and its
/// exact gradient is zero.
pub fn check_gradients(net: &MlpNetwork<f64>, x: &[f64], y: &[f64], mode: Mode, h: f64, floor: f64) -> Result<GradCheck> {
    let cache = net.forward(x, mode)?;
    let analytic = net.backward(&cache, &mse_grad(cache.output(), y))?;
    let flat: Vec<Vec<f64>> = analytic.slices().iter().map(|s| s.to_vec()).collect();
    let mut probe = net.clone();
    let mut out = GradCheck {
        max_rel_error: 0.0,
        norm_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let (mut diff2, mut g2, mut fd2) = (0.0, 0.0, 0.0);
    for (group, grads) in flat.iter().enumerate() {
        for (i, &g) in grads.iter().enumerate() {
            let orig = probe.params_mut()[group][i];
            probe.params_mut()[group][i] = orig + h;
            let (plus, pattern_plus) = loss_at(&probe, x, y, mode)?;
            probe.params_mut()[group][i] = orig - h;
            let (minus, pattern_minus) = loss_at(&probe, x, y, mode)?;
            probe.params_mut()[group][i] = orig;
            if pattern_plus != pattern_minus {
                out.skipped += 1;
                continue;
            }
            let fd = (plus - minus) / (2.0 * h);
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(floor);
            out.max_rel_error = out.max_rel_error.max(rel);
            diff2 += (g - fd).powi(2);
            g2 += g * g;
            fd2 += fd * fd;
            out.checked += 1;
        }
    }
    let denom = g2.sqrt() + fd2.sqrt();
    out.norm_rel_error = if denom > 0.0 { diff2.sqrt() / denom } else { 0.0 };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_case(seed: u64, mode: Mode) -> GradCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.random_range(1..=4);
        let mut dims = vec![rng.random_range(2..=12)];
        for _ in 0..depth {
            dims.push(rng.random_range(2..=16));
        }
        let mut net = MlpNetwork::<f64>::new(&dims, &mut rng).unwrap();
        for l in &mut net.layers {
            for g in &mut l.bn.gamma {
                *g = rng.random_range(0.5..1.5);
            }
            for b in &mut l.bn.beta {
                *b = rng.random_range(-0.5..0.5);
            }
            for b in &mut l.bias {
                *b = rng.random_range(-0.5..0.5);
            }
            for m in &mut l.bn.running_mean {
                *m = rng.random_range(-0.5..0.5);
            }
            for v in &mut l.bn.running_var {
                *v = rng.random_range(0.5..2.0);
            }
        }
        let v = rng.random_range(3..=8);
        let x: Vec<f64> = (0..v * dims[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..v * dims[depth]).map(|_| rng.random_range(0..2) as f64).collect();
        check_gradients(&net, &x, &y, mode, 1e-5, 1e-6).unwrap()
    }

    #[test]
    fn train_mode_gradients_match() {
        for seed in 0..6 {
            let c = random_case(seed, Mode::Train);
            assert!(c.max_rel_error < 1e-5, "seed {seed}: {c:?}");
            assert!(c.checked > 0);
        }
    }

    #[test]
    fn inference_mode_treats_running_stats_as_constants() {
        for seed in 10..16 {
            let c = random_case(seed, Mode::Inference);
            assert!(c.max_rel_error < 1e-5, "seed {seed}: {c:?}");
        }
    }
}
