//! Binary network checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes  "MLPCKPT\0"
//! version      u32
//! layer count  u32
//! per layer    in_dim u64, out_dim u64, activation u8 (0 relu, 1 sigmoid),
//!              bn epsilon f64, bn momentum f64
//! per layer    weights (out_dim x in_dim, row-major), bias, gamma, beta,
//!              running_mean, running_var, every value as f64
//! crc32        u32 over every preceding byte
//! ```
//!
//! Values are widened to `f64` on save, so `f32` and `f64` networks both
//! round-trip bit-exactly.

use std::path::Path;

use super::{Activation, BatchNorm, DenseLayer, MlpNetwork};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"MLPCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn encode_network<T: Real>(net: &MlpNetwork<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * net.num_params() + 16 * net.layers.len() * net.output_dim());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers.len() as u32).to_le_bytes());
    for l in &net.layers {
        out.extend_from_slice(&(l.in_dim as u64).to_le_bytes());
        out.extend_from_slice(&(l.out_dim as u64).to_le_bytes());
        out.push(l.activation.tag());
        out.extend_from_slice(&l.bn.epsilon.f64().to_le_bytes());
        out.extend_from_slice(&l.bn.momentum.f64().to_le_bytes());
    }
    for l in &net.layers {
        for v in [&l.weights, &l.bias, &l.bn.gamma, &l.bn.beta, &l.bn.running_mean, &l.bn.running_var] {
            for x in v {
                out.extend_from_slice(&x.f64().to_le_bytes());
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("checkpoint is truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn values<T: Real>(&mut self, n: usize) -> Result<Vec<T>> {
        (0..n).map(|_| self.f64().map(T::of)).collect()
    }
}

pub fn decode_network<T: Real>(bytes: &[u8]) -> Result<MlpNetwork<T>> {
    if bytes.len() < MAGIC.len() + 12 {
        return Err(Error::Format("checkpoint is truncated".into()));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Format("not a network checkpoint".into()));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum {
            what: "network checkpoint".into(),
            stored,
            computed,
        });
    }
    let mut r = Reader { bytes: body, pos: 8 };
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let count = r.u32()? as usize;
    let mut shapes = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let in_dim = usize::try_from(r.u64()?).map_err(|_| Error::Format("layer size overflows".into()))?;
        let out_dim = usize::try_from(r.u64()?).map_err(|_| Error::Format("layer size overflows".into()))?;
        let tag = r.take(1)?[0];
        let activation = Activation::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown activation tag {tag}")))?;
        let epsilon = r.f64()?;
        let momentum = r.f64()?;
        shapes.push((in_dim, out_dim, activation, epsilon, momentum));
    }
    let mut layers = Vec::with_capacity(count);
    for (in_dim, out_dim, activation, epsilon, momentum) in shapes {
        let n_weights = in_dim
            .checked_mul(out_dim)
            .filter(|&n| n <= body.len() / 8)
            .ok_or_else(|| Error::Format("layer size exceeds the checkpoint".into()))?;
        let weights = r.values(n_weights)?;
        let bias = r.values(out_dim)?;
        let gamma = r.values(out_dim)?;
        let beta = r.values(out_dim)?;
        let running_mean = r.values(out_dim)?;
        let running_var = r.values(out_dim)?;
        layers.push(DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias,
            bn: BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                epsilon: T::of(epsilon),
                momentum: T::of(momentum),
            },
            activation,
        });
    }
    if r.pos != body.len() {
        return Err(Error::Format(format!("{} trailing bytes in checkpoint", body.len() - r.pos)));
    }
    MlpNetwork::from_layers(layers)
}

pub fn save_network<T: Real>(net: &MlpNetwork<T>, path: &Path) -> Result<u32> {
    let bytes = encode_network(net);
    std::fs::write(path, &bytes)?;
    Ok(crc32fast::hash(&bytes))
}

pub fn load_network<T: Real>(path: &Path) -> Result<MlpNetwork<T>> {
    decode_network(&std::fs::read(path)?)
}
