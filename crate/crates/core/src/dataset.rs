//! End-to-end sample generation, dataset files and train/validation/test splits.
//!
//! Per sample seed `s`, independent streams drive the channel, the payload
//! bits, the pilot-symbol noise and the data-symbol noise. The time-domain
//! pipeline (IDFT, cyclic prefix, PA, linear convolution, AWGN, prefix
//! removal, DFT) and the direct frequency-domain evaluation
//! `y^q = Σ_r diag(𝐅h^{q,r}) 𝓕 g(𝓕ᴴ x^r) + 𝓕 n^q` consume the same draws, so
//! they agree to rounding.
//!
//! # File layout
//!
//! Little-endian throughout.
//!
//! ```text
//! magic          8 bytes  "OFDMDSET"
//! version        u32
//! header length  u32, then that many bytes of UTF-8 config text
//! record count   u64
//! header crc32   u32 over every preceding byte
//! per record     payload length u32, payload, crc32 u32 of the payload
//! ```
//!
//! Record payload, in order: `snr_db` f64, `clipping_db` f64, `seed` u64,
//! `channel_id` u64; then `y_p`, `x_p`, `y_d`, each as a u32 count followed by
//! `(re, im)` f64 pairs; `labels` as a u32 count followed by one byte per bit;
//! a u8 flag and, when set, `d_hat` as a u32 count and `(re, im)` f64 pairs.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{apply_channel_time, complex_gaussian, freq_response, sample_channel_with, ChannelRealization, NoiseSpec};
use crate::config::LinkConfig;
use crate::error::{Error, Result};
use crate::linear_rx::{build_b, zf_equalize, LsEstimator};
use crate::modem::{add_cyclic_prefix, build_pilot_plan, remove_cyclic_prefix, BitVector, OfdmFrame, PilotPlan, QamConstellation};
use crate::numerics::{ComplexVector, FftPlan};
use crate::pa::PaModel;
use crate::rng::{derive_seed, rng_for, Stream};
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"OFDMDSET";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMeta {
    pub snr_db: f64,
    pub clipping_db: f64,
    pub seed: u64,
    pub channel_id: u64,
}

/// Observations of one frame and its payload bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    /// Received pilot tones, receive-antenna-major, `Nr * M_p`.
    pub y_p: ComplexVector<T>,
    /// Transmitted pilot sequences, transmit-antenna-major, `Nt * M_p`.
    pub x_p: ComplexVector<T>,
    /// Received data symbol, receive-antenna-major, `Nr * M`.
    pub y_d: ComplexVector<T>,
    /// LS + ZF output with the linear-PA pilot matrix, `Nt * M`.
    pub d_hat: Option<ComplexVector<T>>,
    /// Payload bits, antenna-major then tone then 4 bits MSB first.
    pub labels: BitVector,
    pub meta: SampleMeta,
}

impl<T: Real> Sample<T> {
    pub fn y_p_rows(&self, nr: usize) -> Vec<ComplexVector<T>> {
        split_rows(&self.y_p, nr)
    }

    pub fn y_d_rows(&self, nr: usize) -> Vec<ComplexVector<T>> {
        split_rows(&self.y_d, nr)
    }

    pub fn cast<U: Real>(&self) -> Sample<U> {
        let c = |v: &[Complex<T>]| v.iter().map(|z| Complex::new(U::of(z.re.f64()), U::of(z.im.f64()))).collect();
        Sample {
            y_p: c(&self.y_p),
            x_p: c(&self.x_p),
            y_d: c(&self.y_d),
            d_hat: self.d_hat.as_deref().map(c),
            labels: self.labels.clone(),
            meta: self.meta,
        }
    }

    pub fn check(&self, cfg: &LinkConfig) -> Result<()> {
        let ok = self.y_p.len() == cfg.nr * cfg.m_p
            && self.x_p.len() == cfg.nt * cfg.m_p
            && self.y_d.len() == cfg.nr * cfg.m
            && self.labels.len() == cfg.bits_per_frame()
            && self.d_hat.as_ref().is_none_or(|d| d.len() == cfg.nt * cfg.m);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("sample does not match the link configuration".into()))
        }
    }
}

fn split_rows<T: Copy>(v: &[T], rows: usize) -> Vec<Vec<T>> {
    let n = v.len() / rows.max(1);
    v.chunks_exact(n.max(1)).map(<[T]>::to_vec).collect()
}

/// A generated sample together with the hidden quantities behind it.
#[derive(Debug, Clone)]
pub struct Simulated<T> {
    pub sample: Sample<T>,
    pub channel: ChannelRealization<T>,
    pub frame: OfdmFrame<T>,
}

/// Reusable per-configuration state for sample generation.
#[derive(Debug, Clone)]
pub struct SampleGenerator<T> {
    cfg: LinkConfig,
    plan: PilotPlan<T>,
    pa: PaModel<T>,
    constellation: QamConstellation<T>,
    fft: FftPlan<T>,
    estimator: LsEstimator<T>,
    with_d_hat: bool,
}

impl<T: Real> SampleGenerator<T> {
    pub fn new(cfg: &LinkConfig) -> Result<Self> {
        cfg.validate()?;
        let plan = build_pilot_plan(cfg)?;
        let b = build_b(&plan, cfg.m, cfg.l)?;
        Ok(Self {
            cfg: cfg.clone(),
            pa: PaModel::from_clipping(cfg.clipping_db, cfg.delta, cfg.rho)?,
            estimator: LsEstimator::new(&b, cfg.nt, cfg.l)?,
            plan,
            constellation: QamConstellation::qam16(),
            fft: FftPlan::new(cfg.m),
            with_d_hat: true,
        })
    }

    /// Whether samples carry the precomputed ZF output.
    pub fn with_d_hat(mut self, on: bool) -> Self {
        self.with_d_hat = on;
        self
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    pub fn pa(&self) -> &PaModel<T> {
        &self.pa
    }

    pub fn plan(&self) -> &PilotPlan<T> {
        &self.plan
    }

    pub fn fft(&self) -> &FftPlan<T> {
        &self.fft
    }

    pub fn estimator(&self) -> &LsEstimator<T> {
        &self.estimator
    }

    fn draw(&self, seed: u64) -> Result<(ChannelRealization<T>, OfdmFrame<T>)> {
        let channel = sample_channel_with(&self.cfg, &mut rng_for(seed, Stream::Channel, 0));
        let mut rng = rng_for(seed, Stream::Bits, 0);
        let bits = (0..self.cfg.nt)
            .map(|_| (0..4 * self.cfg.m).map(|_| rng.random_range(0..2u8)).collect())
            .collect();
        let frame = OfdmFrame::new(&self.plan, bits, &self.constellation, T::of(self.cfg.rho))?;
        Ok((channel, frame))
    }

    /// `Nr` rows of `M + L_cp` noise samples.
    fn noise(&self, spec: &NoiseSpec, seed: u64, stream: Stream) -> Vec<ComplexVector<T>> {
        let n = self.cfg.m + self.cfg.l_cp;
        let mut rng = rng_for(seed, stream, 0);
        (0..self.cfg.nr)
            .map(|_| {
                if spec.sigma2 == 0.0 {
                    vec![Complex::new(T::zero(), T::zero()); n]
                } else {
                    (0..n).map(|_| complex_gaussian(&mut rng, spec.sigma2)).collect()
                }
            })
            .collect()
    }

    fn finish(&self, y_pilot: Vec<ComplexVector<T>>, y_data: Vec<ComplexVector<T>>, frame: &OfdmFrame<T>, snr_db: f64, seed: u64) -> Result<Sample<T>> {
        let y_p: ComplexVector<T> = y_pilot.iter().flat_map(|y| self.plan.tones.iter().map(|k| y[k])).collect();
        let d_hat = if self.with_d_hat {
            let est = self.estimator.estimate(&split_rows(&y_p, self.cfg.nr))?;
            Some(zf_equalize(&y_data, &est, &self.fft)?.symbol.d_hat)
        } else {
            None
        };
        Ok(Sample {
            y_p,
            x_p: self.plan.stacked(),
            y_d: y_data.into_iter().flatten().collect(),
            d_hat,
            labels: frame.labels(),
            meta: SampleMeta {
                snr_db,
                clipping_db: self.cfg.clipping_db,
                seed,
                channel_id: derive_seed(seed, Stream::Channel, 0),
            },
        })
    }

    /// Time-domain pipeline: IDFT, cyclic prefix, PA, channel, AWGN, prefix
    /// removal, DFT.
    pub fn simulate(&self, snr_db: f64, seed: u64) -> Result<Simulated<T>> {
        let (channel, frame) = self.draw(seed)?;
        let spec = NoiseSpec::from_snr(snr_db, self.cfg.nt, self.cfg.rho);
        let mut received = Vec::with_capacity(2);
        for (symbols, stream) in [(&frame.pilot_symbols, Stream::PilotNoise), (&frame.data_symbols, Stream::DataNoise)] {
            let tx = symbols
                .iter()
                .map(|x| {
                    let mut t = add_cyclic_prefix(&self.fft.idft(x), self.cfg.l_cp)?;
                    self.pa.apply_in_place(&mut t);
                    Ok(t)
                })
                .collect::<Result<Vec<_>>>()?;
            let rx = apply_channel_time(&tx, &channel, self.cfg.l_cp)?;
            let noise = self.noise(&spec, seed, stream);
            let y = rx
                .iter()
                .zip(&noise)
                .map(|(r, n)| {
                    let noisy: ComplexVector<T> = r.iter().zip(n).map(|(&a, &b)| a + b).collect();
                    Ok(self.fft.dft(&remove_cyclic_prefix(&noisy, self.cfg.l_cp)?))
                })
                .collect::<Result<Vec<_>>>()?;
            received.push(y);
        }
        let y_data = received.pop().expect("data symbol");
        let y_pilot = received.pop().expect("pilot symbol");
        let sample = self.finish(y_pilot, y_data, &frame, snr_db, seed)?;
        Ok(Simulated { sample, channel, frame })
    }

    /// Same draws as [`Self::simulate`], evaluated directly in the frequency domain.
    pub fn simulate_direct(&self, snr_db: f64, seed: u64) -> Result<Simulated<T>> {
        let (channel, frame) = self.draw(seed)?;
        let spec = NoiseSpec::from_snr(snr_db, self.cfg.nt, self.cfg.rho);
        let resp = freq_response(&channel, &self.fft);
        let (nt, m) = (self.cfg.nt, self.cfg.m);
        let mut received = Vec::with_capacity(2);
        for (symbols, stream) in [(&frame.pilot_symbols, Stream::PilotNoise), (&frame.data_symbols, Stream::DataNoise)] {
            let d: Vec<ComplexVector<T>> = symbols
                .iter()
                .map(|x| {
                    let mut t = self.fft.idft(x);
                    self.pa.apply_in_place(&mut t);
                    self.fft.dft(&t)
                })
                .collect();
            let noise = self.noise(&spec, seed, stream);
            let y = (0..self.cfg.nr)
                .map(|q| {
                    let n = self.fft.dft(&noise[q][self.cfg.l_cp..]);
                    (0..m)
                        .map(|k| n[k] + (0..nt).map(|r| resp[q * nt + r][k] * d[r][k]).sum::<Complex<T>>())
                        .collect()
                })
                .collect();
            received.push(y);
        }
        let y_data = received.pop().expect("data symbol");
        let y_pilot = received.pop().expect("pilot symbol");
        let sample = self.finish(y_pilot, y_data, &frame, snr_db, seed)?;
        Ok(Simulated { sample, channel, frame })
    }

    pub fn generate(&self, snr_db: f64, seed: u64) -> Result<Sample<T>> {
        Ok(self.simulate(snr_db, seed)?.sample)
    }
}

/// One sample at the configured SNR.
pub fn generate_sample<T: Real>(cfg: &LinkConfig, seed: u64) -> Result<Sample<T>> {
    SampleGenerator::new(cfg)?.generate(cfg.snr_db, seed)
}

/// SNR assignment across a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrDraw {
    Fixed(f64),
    /// Uniform in `[min, max]` dB, drawn per sample.
    Uniform { min: f64, max: f64 },
}

impl SnrDraw {
    pub fn for_sample(&self, sample_seed: u64) -> f64 {
        match *self {
            SnrDraw::Fixed(s) => s,
            SnrDraw::Uniform { min, max } => {
                if max > min {
                    rng_for(sample_seed, Stream::TrainSnr, 0).random_range(min..=max)
                } else {
                    min
                }
            }
        }
    }
}

/// Seed of sample `index` under `base_seed`.
pub fn sample_seed(base_seed: u64, index: u64) -> u64 {
    derive_seed(base_seed, Stream::Sample, index)
}

/// `count` samples with per-sample derived seeds, generated in parallel.
pub fn generate_dataset<T: Real>(gen: &SampleGenerator<T>, count: usize, base_seed: u64, snr: SnrDraw) -> Result<Vec<Sample<T>>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let seed = sample_seed(base_seed, i as u64);
            gen.generate(snr.for_sample(seed), seed)
        })
        .collect()
}

fn put_complex(out: &mut Vec<u8>, v: &[Complex<f64>]) {
    out.extend_from_slice(&(v.len() as u32).to_le_bytes());
    for z in v {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

fn encode_record(s: &Sample<f64>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&s.meta.snr_db.to_le_bytes());
    out.extend_from_slice(&s.meta.clipping_db.to_le_bytes());
    out.extend_from_slice(&s.meta.seed.to_le_bytes());
    out.extend_from_slice(&s.meta.channel_id.to_le_bytes());
    put_complex(&mut out, &s.y_p);
    put_complex(&mut out, &s.x_p);
    put_complex(&mut out, &s.y_d);
    out.extend_from_slice(&(s.labels.len() as u32).to_le_bytes());
    out.extend_from_slice(&s.labels);
    match &s.d_hat {
        Some(d) => {
            out.push(1);
            put_complex(&mut out, d);
        }
        None => out.push(0),
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("dataset record is truncated".into()))?;
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

    fn complex(&mut self) -> Result<ComplexVector<f64>> {
        let n = self.u32()? as usize;
        if n > self.bytes.len() / 16 {
            return Err(Error::Format("vector length exceeds the record".into()));
        }
        (0..n).map(|_| Ok(Complex::new(self.f64()?, self.f64()?))).collect()
    }
}

fn decode_record(bytes: &[u8]) -> Result<Sample<f64>> {
    let mut c = Cursor { bytes, pos: 0 };
    let meta = SampleMeta {
        snr_db: c.f64()?,
        clipping_db: c.f64()?,
        seed: c.u64()?,
        channel_id: c.u64()?,
    };
    let y_p = c.complex()?;
    let x_p = c.complex()?;
    let y_d = c.complex()?;
    let n = c.u32()? as usize;
    let labels = c.take(n)?.to_vec();
    let d_hat = match c.take(1)?[0] {
        0 => None,
        1 => Some(c.complex()?),
        f => return Err(Error::Format(format!("invalid d_hat flag {f}"))),
    };
    if c.pos != bytes.len() {
        return Err(Error::Format("trailing bytes in dataset record".into()));
    }
    Ok(Sample {
        y_p,
        x_p,
        y_d,
        d_hat,
        labels,
        meta,
    })
}

/// Writes samples with a config-text header. Values are stored as `f64`.
pub fn write_dataset<T: Real>(path: &Path, header: &str, samples: &[Sample<T>]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let mut head = Vec::new();
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    head.extend_from_slice(&(header.len() as u32).to_le_bytes());
    head.extend_from_slice(header.as_bytes());
    head.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    let crc = crc32fast::hash(&head);
    head.extend_from_slice(&crc.to_le_bytes());
    w.write_all(&head)?;
    for s in samples {
        let payload = encode_record(&s.cast::<f64>());
        w.write_all(&(payload.len() as u32).to_le_bytes())?;
        w.write_all(&payload)?;
        w.write_all(&crc32fast::hash(&payload).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("dataset file is truncated".into()),
        _ => Error::Io(e),
    })
}

/// Reads a dataset file; returns the header text and the samples.
pub fn read_dataset(path: &Path) -> Result<(String, Vec<Sample<f64>>)> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut head = vec![0u8; 16];
    read_exact_or_truncated(&mut r, &mut head)?;
    if &head[..8] != MAGIC {
        return Err(Error::Format("not a dataset file".into()));
    }
    let version = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
    if version != DATASET_VERSION {
        return Err(Error::Version {
            found: version,
            expected: DATASET_VERSION,
        });
    }
    let header_len = u32::from_le_bytes(head[12..16].try_into().expect("4 bytes")) as usize;
    let mut rest = vec![0u8; header_len + 12];
    read_exact_or_truncated(&mut r, &mut rest)?;
    head.extend_from_slice(&rest);
    let body = head.len() - 4;
    let stored = u32::from_le_bytes(head[body..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(&head[..body]);
    if stored != computed {
        return Err(Error::Checksum {
            what: "dataset header".into(),
            stored,
            computed,
        });
    }
    let header = String::from_utf8(head[16..16 + header_len].to_vec())
        .map_err(|_| Error::Format("dataset header is not UTF-8".into()))?;
    let count = u64::from_le_bytes(head[16 + header_len..body].try_into().expect("8 bytes"));
    let mut samples = Vec::with_capacity(count.min(1 << 20) as usize);
    for i in 0..count {
        let mut len = [0u8; 4];
        read_exact_or_truncated(&mut r, &mut len)?;
        let mut payload = vec![0u8; u32::from_le_bytes(len) as usize];
        read_exact_or_truncated(&mut r, &mut payload)?;
        let mut crc = [0u8; 4];
        read_exact_or_truncated(&mut r, &mut crc)?;
        let stored = u32::from_le_bytes(crc);
        let computed = crc32fast::hash(&payload);
        if stored != computed {
            return Err(Error::Checksum {
                what: format!("dataset record {i}"),
                stored,
                computed,
            });
        }
        samples.push(decode_record(&payload)?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after the last record".into()));
    }
    Ok((header, samples))
}

/// Partition sizes: `floor(f_i * n)` each, then the leftover items go one at
/// a time to the largest fractional remainders (ties to the earlier part).
pub fn split_sizes(n: usize, fractions: [f64; 3]) -> Result<[usize; 3]> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split fractions {fractions:?} must be in [0, 1] and sum to 1")));
    }
    let exact = fractions.map(|f| f * n as f64);
    let mut sizes = exact.map(|e| e.floor() as usize);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = n - sizes.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    Ok(sizes)
}

/// Seeded shuffle followed by consecutive train / validation / test parts.
pub fn split<S>(items: Vec<S>, fractions: [f64; 3], seed: u64) -> Result<(Vec<S>, Vec<S>, Vec<S>)> {
    let [a, b, _] = split_sizes(items.len(), fractions)?;
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut rng_for(seed, Stream::Split, 0));
    let mut slots: Vec<Option<S>> = items.into_iter().map(Some).collect();
    let mut take = |idx: &[usize]| idx.iter().map(|&i| slots[i].take().expect("index used once")).collect::<Vec<S>>();
    let train = take(&order[..a]);
    let val = take(&order[a..a + b]);
    let test = take(&order[a + b..]);
    Ok((train, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_rx::{zf_baseline_detect, LsEstimate};
    use crate::modem::QamConstellation;

    fn small() -> LinkConfig {
        LinkConfig {
            m: 16,
            l: 8,
            l_cp: 8,
            nt: 2,
            nr: 3,
            m_p: 16,
            k: 4,
            ..LinkConfig::desk()
        }
    }

    fn max_diff(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn time_and_frequency_paths_agree() {
        for cfg in [LinkConfig::desk(), small(), LinkConfig { clipping_db: 5.0, ..small() }] {
            let gen = SampleGenerator::<f64>::new(&cfg).unwrap();
            for seed in 0..5 {
                let a = gen.simulate(10.0, seed).unwrap().sample;
                let b = gen.simulate_direct(10.0, seed).unwrap().sample;
                assert!(max_diff(&a.y_p, &b.y_p) < 1e-9);
                assert!(max_diff(&a.y_d, &b.y_d) < 1e-9);
                assert_eq!(a.labels, b.labels);
            }
        }
    }

    #[test]
    fn linear_noiseless_chain_is_lossless() {
        let cfg = LinkConfig {
            clipping_db: f64::INFINITY,
            ..LinkConfig::desk()
        };
        let gen = SampleGenerator::<f64>::new(&cfg).unwrap();
        let scaled = QamConstellation::qam16().scaled(cfg.rho.sqrt());
        for seed in 0..5 {
            let sim = gen.simulate(f64::INFINITY, seed).unwrap();
            let est = LsEstimate::perfect(&sim.channel);
            let zf = zf_equalize(&sim.sample.y_d_rows(cfg.nr), &est, gen.fft()).unwrap();
            assert_eq!(zf_baseline_detect(&zf.symbol, &scaled, gen.fft()), sim.sample.labels);
            // The stored LS-based output is exact too.
            let d = sim.sample.d_hat.as_ref().unwrap();
            assert!(max_diff(d, &zf.symbol.d_hat) < 1e-9);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let gen = SampleGenerator::<f64>::new(&LinkConfig::desk()).unwrap();
        assert_eq!(gen.generate(15.0, 42).unwrap(), gen.generate(15.0, 42).unwrap());
        assert_ne!(gen.generate(15.0, 42).unwrap().labels, gen.generate(15.0, 43).unwrap().labels);
    }

    #[test]
    fn pa_input_power_matches_rho() {
        let cfg = LinkConfig { rho: 2.0, ..LinkConfig::desk() };
        let gen = SampleGenerator::<f64>::new(&cfg).unwrap();
        let mut total = 0.0;
        let mut count = 0usize;
        for seed in 0..200 {
            let sim = gen.simulate(20.0, seed).unwrap();
            for x in &sim.frame.data_symbols {
                let t = gen.fft().idft(x);
                total += t.iter().map(|z| z.norm_sqr()).sum::<f64>();
                count += t.len();
            }
        }
        assert!(count >= 10_000);
        assert!((total / count as f64 / cfg.rho - 1.0).abs() < 0.02);
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.bin");
        let gen = SampleGenerator::<f64>::new(&small()).unwrap();
        let mut samples = generate_dataset(&gen, 100, 5, SnrDraw::Uniform { min: 0.0, max: 20.0 }).unwrap();
        samples[3].d_hat = None;
        write_dataset(&path, "m = 16\n", &samples).unwrap();
        let (header, back) = read_dataset(&path).unwrap();
        assert_eq!(header, "m = 16\n");
        assert_eq!(back, samples);

        write_dataset::<f64>(&path, "", &[]).unwrap();
        assert!(read_dataset(&path).unwrap().1.is_empty());
    }

    #[test]
    fn dataset_corruption_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.bin");
        let gen = SampleGenerator::<f64>::new(&small()).unwrap();
        let samples = generate_dataset(&gen, 3, 1, SnrDraw::Fixed(10.0)).unwrap();
        write_dataset(&path, "x", &samples).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        let mut bad = bytes.clone();
        let n = bad.len();
        bad[n - 100] ^= 0x10;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Checksum { .. })));

        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Format(_))));

        let mut old = bytes.clone();
        old[8] = 7;
        std::fs::write(&path, &old).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Version { found: 7, .. })));
    }

    #[test]
    fn split_rules() {
        assert_eq!(split_sizes(10, [1.0, 0.0, 0.0]).unwrap(), [10, 0, 0]);
        assert_eq!(split_sizes(10, [0.7, 0.15, 0.15]).unwrap(), [7, 2, 1]);
        assert_eq!(split_sizes(7, [0.5, 0.25, 0.25]).unwrap(), [3, 2, 2]);
        assert!(split_sizes(10, [0.5, 0.6, 0.0]).is_err());
        assert!(split_sizes(10, [1.2, -0.2, 0.0]).is_err());

        let items: Vec<u32> = (0..50).collect();
        let (a, b, c) = split(items.clone(), [0.6, 0.2, 0.2], 9).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (30, 10, 10));
        let mut all: Vec<u32> = a.iter().chain(&b).chain(&c).copied().collect();
        all.sort_unstable();
        assert_eq!(all, items);
        assert_eq!(split(items.clone(), [0.6, 0.2, 0.2], 9).unwrap(), (a, b, c));
    }
}
