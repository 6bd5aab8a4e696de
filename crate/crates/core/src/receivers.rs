//! Learned receivers: input construction, carrier groups and network banks.
//!
//! Every network of a bank sees the same full input vector and is supervised
//! with the `4K` payload bits of its own carrier group. Complex inputs are
//! presented as all real parts followed by all imaginary parts.
//!
//! # Bank manifest
//!
//! A bank directory holds one checkpoint per trained group and a text file
//! `manifest.txt`:
//!
//! ```text
//! kind = type1
//! m = 64
//! nt = 2
//! k = 8
//! group 0 group_000.ckpt 1a2b3c4d
//! ```
//!
//! Each `group` line names the group index, the checkpoint file relative to
//! the directory and the CRC-32 of the file in hex.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;

use crate::config::LinkConfig;
use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::modem::BitVector;
use crate::neural::{decide_bits, load_network, save_network, train, AdamState, MlpNetwork, Samples, TrainOptions, TrainReport};
use crate::rng::{rng_for, Stream};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReceiverKind {
    /// LS + ZF output `d̂` fed to the network.
    Type1,
    /// Raw pilot observations, pilots and data observations.
    DataDriven,
    /// Both of the above, concatenated.
    Type2,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 3] = [ReceiverKind::Type1, ReceiverKind::DataDriven, ReceiverKind::Type2];

    pub fn name(self) -> &'static str {
        match self {
            ReceiverKind::Type1 => "type1",
            ReceiverKind::DataDriven => "data_driven",
            ReceiverKind::Type2 => "type2",
        }
    }

    /// Network input length for a link configuration.
    pub fn input_dim(self, cfg: &LinkConfig) -> usize {
        let dd = 2 * (cfg.nr * cfg.m_p + cfg.nt * cfg.m_p + cfg.nr * cfg.m);
        let t1 = 2 * cfg.nt * cfg.m;
        match self {
            ReceiverKind::Type1 => t1,
            ReceiverKind::DataDriven => dd,
            ReceiverKind::Type2 => dd + t1,
        }
    }

    fn needs_d_hat(self) -> bool {
        self != ReceiverKind::DataDriven
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReceiverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown receiver kind `{s}`")))
    }
}

/// `K` consecutive tones of one transmit antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarrierGroup {
    pub index: usize,
    pub antenna: usize,
    pub first_tone: usize,
    pub k: usize,
}

impl CarrierGroup {
    pub fn tones(&self) -> std::ops::Range<usize> {
        self.first_tone..self.first_tone + self.k
    }

    /// Positions of this group's bits in the antenna-major payload of `M` tones.
    pub fn label_range(&self, m: usize) -> std::ops::Range<usize> {
        let start = 4 * (self.antenna * m + self.first_tone);
        start..start + 4 * self.k
    }
}

/// All `Nt * M / K` groups, antenna-major.
pub fn carrier_groups(cfg: &LinkConfig) -> Result<Vec<CarrierGroup>> {
    if cfg.k == 0 || cfg.m % cfg.k != 0 {
        return Err(Error::Config(format!("k = {} must divide m = {}", cfg.k, cfg.m)));
    }
    let per_antenna = cfg.m / cfg.k;
    Ok((0..cfg.nt * per_antenna)
        .map(|index| CarrierGroup {
            index,
            antenna: index / per_antenna,
            first_tone: (index % per_antenna) * cfg.k,
            k: cfg.k,
        })
        .collect())
}

fn pack<T: Real, U: Real>(parts: &[&[Complex<T>]]) -> Vec<U> {
    let re = parts.iter().flat_map(|p| p.iter().map(|z| U::of(z.re.f64())));
    let im = parts.iter().flat_map(|p| p.iter().map(|z| U::of(z.im.f64())));
    re.chain(im).collect()
}

/// Inverse of the real/imaginary packing.
pub fn unpack_complex<T: Real>(v: &[T]) -> Vec<Complex<T>> {
    let n = v.len() / 2;
    (0..n).map(|i| Complex::new(v[i], v[n + i])).collect()
}

/// `[Re d̂, Im d̂]`, length `2 Nt M`.
pub fn build_input_type1<T: Real, U: Real>(d_hat: &[Complex<T>]) -> Vec<U> {
    pack(&[d_hat])
}

/// `[Re [y_p; x_p; y_d], Im [y_p; x_p; y_d]]`, length `2 (Nr M_p + Nt M_p + Nr M)`.
pub fn build_input_data_driven<T: Real, U: Real>(y_p: &[Complex<T>], x_p: &[Complex<T>], y_d: &[Complex<T>]) -> Vec<U> {
    pack(&[y_p, x_p, y_d])
}

/// Data-driven input followed by the type-I input.
pub fn build_input_type2<T: Real, U: Real>(y_p: &[Complex<T>], x_p: &[Complex<T>], y_d: &[Complex<T>], d_hat: &[Complex<T>]) -> Vec<U> {
    let mut v = build_input_data_driven(y_p, x_p, y_d);
    v.extend(build_input_type1::<T, U>(d_hat));
    v
}

/// Network input of `kind` for one sample.
pub fn build_input<T: Real, U: Real>(kind: ReceiverKind, s: &Sample<T>) -> Result<Vec<U>> {
    let d_hat = || {
        s.d_hat
            .as_deref()
            .ok_or_else(|| Error::Config(format!("{kind} receiver needs samples with the ZF output")))
    };
    Ok(match kind {
        ReceiverKind::Type1 => build_input_type1(d_hat()?),
        ReceiverKind::DataDriven => build_input_data_driven(&s.y_p, &s.x_p, &s.y_d),
        ReceiverKind::Type2 => build_input_type2(&s.y_p, &s.x_p, &s.y_d, d_hat()?),
    })
}

/// Row-major network inputs and full payload labels of many samples.
#[derive(Debug, Clone)]
pub struct FeatureMatrix<U> {
    pub kind: ReceiverKind,
    pub inputs: Vec<U>,
    pub input_dim: usize,
    pub labels: Vec<u8>,
    pub label_dim: usize,
}

impl<U: Real> FeatureMatrix<U> {
    pub fn build<T: Real>(kind: ReceiverKind, samples: &[Sample<T>]) -> Result<Self> {
        if kind.needs_d_hat() && samples.iter().any(|s| s.d_hat.is_none()) {
            return Err(Error::Config(format!("{kind} receiver needs samples with the ZF output")));
        }
        let rows: Vec<Vec<U>> = samples.par_iter().map(|s| build_input(kind, s)).collect::<Result<_>>()?;
        let input_dim = rows.first().map_or(0, Vec::len);
        let label_dim = samples.first().map_or(0, |s| s.labels.len());
        if rows.iter().any(|r| r.len() != input_dim) || samples.iter().any(|s| s.labels.len() != label_dim) {
            return Err(Error::Dimension("samples have inconsistent shapes".into()));
        }
        Ok(Self {
            kind,
            inputs: rows.concat(),
            input_dim,
            labels: samples.iter().flat_map(|s| s.labels.iter().copied()).collect(),
            label_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len().checked_div(self.label_dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Labels of one group as `0.0 / 1.0` targets, row-major.
    pub fn targets(&self, group: &CarrierGroup, m: usize) -> Vec<U> {
        let range = group.label_range(m);
        self.labels
            .chunks_exact(self.label_dim)
            .flat_map(|row| row[range.clone()].iter().map(|&b| U::of(f64::from(b))))
            .collect()
    }
}

/// Networks for some or all carrier groups of one receiver kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverBank<T> {
    pub kind: ReceiverKind,
    pub m: usize,
    pub nt: usize,
    pub k: usize,
    networks: Vec<Option<MlpNetwork<T>>>,
}

impl<T: Real> ReceiverBank<T> {
    pub fn new(kind: ReceiverKind, cfg: &LinkConfig) -> Result<Self> {
        let groups = carrier_groups(cfg)?.len();
        Ok(Self {
            kind,
            m: cfg.m,
            nt: cfg.nt,
            k: cfg.k,
            networks: vec![None; groups],
        })
    }

    pub fn num_groups(&self) -> usize {
        self.networks.len()
    }

    pub fn group(&self, index: usize) -> CarrierGroup {
        let per_antenna = self.m / self.k;
        CarrierGroup {
            index,
            antenna: index / per_antenna,
            first_tone: (index % per_antenna) * self.k,
            k: self.k,
        }
    }

    /// Indices of groups that have a network.
    pub fn trained_groups(&self) -> Vec<usize> {
        (0..self.networks.len()).filter(|&g| self.networks[g].is_some()).collect()
    }

    pub fn network(&self, group: usize) -> Option<&MlpNetwork<T>> {
        self.networks.get(group).and_then(Option::as_ref)
    }

    pub fn insert(&mut self, group: usize, net: MlpNetwork<T>) -> Result<()> {
        if group >= self.networks.len() {
            return Err(Error::IndexOutOfRange {
                index: group,
                universe: self.networks.len(),
            });
        }
        if net.output_dim() != 4 * self.k {
            return Err(Error::Dimension(format!(
                "group network outputs {} values, expected {}",
                net.output_dim(),
                4 * self.k
            )));
        }
        if let Some(other) = self.networks.iter().flatten().next() {
            if other.input_dim() != net.input_dim() {
                return Err(Error::Dimension("bank networks must share one input size".into()));
            }
        }
        self.networks[group] = Some(net);
        Ok(())
    }

    fn net(&self, group: usize) -> Result<&MlpNetwork<T>> {
        self.network(group).ok_or(Error::MissingNetwork(group))
    }

    /// Detected bits of the listed groups for each row of `inputs`, as
    /// `rows x (groups.len() * 4K)` in the order of `groups`.
    pub fn detect_inputs(&self, inputs: &[T], groups: &[usize]) -> Result<Vec<u8>> {
        let per = 4 * self.k;
        let dim = match groups.first() {
            Some(&g) => self.net(g)?.input_dim(),
            None => return Ok(Vec::new()),
        };
        let rows = inputs.len() / dim;
        let mut out = vec![0u8; rows * groups.len() * per];
        let width = groups.len() * per;
        for (gi, &g) in groups.iter().enumerate() {
            let bits = decide_bits(&self.net(g)?.predict(inputs)?);
            for (r, chunk) in bits.chunks_exact(per).enumerate() {
                out[r * width + gi * per..r * width + (gi + 1) * per].copy_from_slice(chunk);
            }
        }
        Ok(out)
    }

    /// Full `4 Nt M`-bit stream for one sample; every group needs a network.
    pub fn detect<S: Real>(&self, sample: &Sample<S>) -> Result<BitVector> {
        let groups: Vec<usize> = (0..self.networks.len()).collect();
        self.detect_inputs(&build_input::<S, T>(self.kind, sample)?, &groups)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = format!("kind = {}\nm = {}\nnt = {}\nk = {}\n", self.kind, self.m, self.nt, self.k);
        for g in self.trained_groups() {
            let file = format!("group_{g:03}.ckpt");
            let crc = save_network(self.net(g)?, &dir.join(&file))?;
            manifest.push_str(&format!("group {g} {file} {crc:08x}\n"));
        }
        std::fs::write(dir.join("manifest.txt"), manifest)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.txt"))?;
        let (mut kind, mut m, mut nt, mut k) = (None, None, None, None);
        let mut entries = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("group ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [g, file, crc] = parts[..] else {
                    return Err(Error::Format(format!("bad manifest entry `{line}`")));
                };
                let g: usize = g.parse().map_err(|_| Error::Format(format!("bad group index in `{line}`")))?;
                let crc = u32::from_str_radix(crc, 16).map_err(|_| Error::Format(format!("bad checksum in `{line}`")))?;
                entries.push((g, file.to_string(), crc));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad manifest line `{line}`")))?;
            let value = value.trim();
            let num = || value.parse::<usize>().map_err(|_| Error::Format(format!("bad value in `{line}`")));
            match key.trim() {
                "kind" => kind = Some(value.parse::<ReceiverKind>()?),
                "m" => m = Some(num()?),
                "nt" => nt = Some(num()?),
                "k" => k = Some(num()?),
                other => return Err(Error::UnknownKey(other.to_string())),
            }
        }
        let missing = |what: &str| Error::Format(format!("manifest lacks `{what}`"));
        let cfg = LinkConfig {
            m: m.ok_or_else(|| missing("m"))?,
            nt: nt.ok_or_else(|| missing("nt"))?,
            k: k.ok_or_else(|| missing("k"))?,
            ..LinkConfig::desk()
        };
        let mut bank = Self::new(kind.ok_or_else(|| missing("kind"))?, &cfg)?;
        for (g, file, stored) in entries {
            let path = dir.join(&file);
            let computed = crc32fast::hash(&std::fs::read(&path)?);
            if computed != stored {
                return Err(Error::Checksum {
                    what: file,
                    stored,
                    computed,
                });
            }
            bank.insert(g, load_network(&path)?)?;
        }
        Ok(bank)
    }
}

/// Hyperparameters for training the networks of one bank.
#[derive(Debug, Clone, PartialEq)]
pub struct BankTraining {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub keep_best: bool,
    pub seed: u64,
}

/// Trains the listed groups independently (in parallel) on shared inputs.
pub fn train_bank(
    cfg: &LinkConfig,
    train_set: &FeatureMatrix<f32>,
    validation: Option<&FeatureMatrix<f32>>,
    groups: &[usize],
    settings: &BankTraining,
) -> Result<(ReceiverBank<f32>, Vec<TrainReport>)> {
    let mut bank = ReceiverBank::new(train_set.kind, cfg)?;
    if let Some(&g) = groups.iter().find(|&&g| g >= bank.num_groups()) {
        return Err(Error::IndexOutOfRange {
            index: g,
            universe: bank.num_groups(),
        });
    }
    let results: Vec<(usize, MlpNetwork<f32>, TrainReport)> = groups
        .par_iter()
        .map(|&g| {
            let group = bank.group(g);
            let targets = train_set.targets(&group, cfg.m);
            let data = Samples::new(&train_set.inputs, &targets, train_set.input_dim, 4 * cfg.k)?;
            let val_targets = validation.map(|v| v.targets(&group, cfg.m));
            let val = match (validation, &val_targets) {
                (Some(v), Some(t)) if !v.is_empty() => Some(Samples::new(&v.inputs, t, v.input_dim, 4 * cfg.k)?),
                _ => None,
            };
            let mut dims = vec![train_set.input_dim];
            dims.extend(&settings.hidden);
            dims.push(4 * cfg.k);
            let seed = crate::rng::derive_seed(settings.seed, Stream::Init, g as u64);
            let mut net = MlpNetwork::new(&dims, &mut rng_for(seed, Stream::Init, 0))?;
            let opts = TrainOptions {
                epochs: settings.epochs,
                batch_size: settings.batch_size,
                shuffle: true,
                seed,
                keep_best: settings.keep_best && val.is_some(),
            };
            let report = train(&mut net, &data, val.as_ref(), &opts, &mut AdamState::new(settings.learning_rate))?;
            Ok((g, net, report))
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::with_capacity(results.len());
    for (g, net, report) in results {
        bank.insert(g, net)?;
        reports.push(report);
    }
    Ok((bank, reports))
}
