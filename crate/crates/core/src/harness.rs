//! Experiment plumbing: training-set generation, bank training, BER sweeps,
//! CSV records and reports.
//!
//! Every sweep cell `(receiver, snr)` is seeded by [`cell_seed`], which depends
//! only on the sweep seed and the SNR, so all receivers at one SNR see the same
//! channels, bits and noise. Frame `i` of a cell uses
//! [`sample_seed`]`(cell_seed, i)`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, LinkConfig, SnrMode};
use crate::dataset::{generate_dataset, sample_seed, split, Sample, SampleGenerator, SnrDraw};
use crate::error::{Error, Result};
use crate::linear_rx::{build_a_oracle, zf_baseline_detect, EqualizedSymbol, LsEstimator};
use crate::mld::{mld_search, reference_symbols, MldConfig, MldMode};
use crate::modem::{label_to_bits, QamConstellation};
use crate::neural::TrainReport;
use crate::receivers::{carrier_groups, train_bank, BankTraining, CarrierGroup, FeatureMatrix, ReceiverBank, ReceiverKind};
use crate::rng::{derive_seed, rng_for, Stream};

/// Smallest allowed `min_bits` of a sweep.
pub const MIN_BITS_FLOOR: u64 = 10_000;

/// Points with fewer errors than this are flagged unreliable.
pub const RELIABLE_ERRORS: u64 = 100;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReceiverId {
    /// LS + ZF on a link with an ideal linear PA.
    LsZfLinear,
    /// LS + ZF on the nonlinear link.
    LsZfNonlinear,
    MldUpper,
    MldLower,
    Type1,
    DataDriven,
    Type2,
}

impl ReceiverId {
    pub const ALL: [ReceiverId; 7] = [
        ReceiverId::LsZfLinear,
        ReceiverId::LsZfNonlinear,
        ReceiverId::MldUpper,
        ReceiverId::MldLower,
        ReceiverId::Type1,
        ReceiverId::DataDriven,
        ReceiverId::Type2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReceiverId::LsZfLinear => "ls_zf_linear",
            ReceiverId::LsZfNonlinear => "ls_zf_nonlinear",
            ReceiverId::MldUpper => "mld_upper",
            ReceiverId::MldLower => "mld_lower",
            ReceiverId::Type1 => "type1",
            ReceiverId::DataDriven => "data_driven",
            ReceiverId::Type2 => "type2",
        }
    }

    /// Learned receiver kind, if this is one.
    pub fn kind(self) -> Option<ReceiverKind> {
        match self {
            ReceiverId::Type1 => Some(ReceiverKind::Type1),
            ReceiverId::DataDriven => Some(ReceiverKind::DataDriven),
            ReceiverId::Type2 => Some(ReceiverKind::Type2),
            _ => None,
        }
    }

    /// Clipping level of the simulated link for a nominal clipping level.
    pub fn link_clipping_db(self, nominal: f64) -> f64 {
        if self == ReceiverId::LsZfLinear {
            f64::INFINITY
        } else {
            nominal
        }
    }
}

impl fmt::Display for ReceiverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReceiverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReceiverId::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown receiver `{s}`")))
    }
}

/// Parses a comma-separated receiver list.
pub fn parse_receivers(s: &str) -> Result<Vec<ReceiverId>> {
    s.split(',').map(|r| r.trim().parse()).collect()
}

/// Parses a comma-separated list of SNR values in dB.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse SNR value `{}`", v.trim())))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub cfg: LinkConfig,
    pub snr_points: Vec<f64>,
    pub receivers: Vec<ReceiverId>,
    pub min_bits: u64,
    pub seed: u64,
    /// Tones searched jointly by the MLD benchmarks.
    pub mld_k: usize,
    /// Carrier groups whose bits are counted, for every receiver; empty means all.
    pub groups: Vec<usize>,
}

impl SweepSpec {
    pub fn from_experiment(exp: &ExperimentConfig, receivers: Vec<ReceiverId>, snr_points: Vec<f64>, min_bits: u64, seed: u64) -> Self {
        Self {
            cfg: exp.link.clone(),
            snr_points,
            receivers,
            min_bits,
            seed,
            mld_k: exp.training.mld_k,
            groups: exp.training.groups.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.min_bits < MIN_BITS_FLOOR {
            return Err(Error::Config(format!("min_bits = {} is below {MIN_BITS_FLOOR}", self.min_bits)));
        }
        if let Some(s) = self.snr_points.iter().find(|s| !s.is_finite()) {
            return Err(Error::Config(format!("SNR point {s} is not finite")));
        }
        let n = self.cfg.num_groups();
        if let Some(&g) = self.groups.iter().find(|&&g| g >= n) {
            return Err(Error::IndexOutOfRange { index: g, universe: n });
        }
        Ok(())
    }

    pub fn counted_groups(&self) -> Result<Vec<CarrierGroup>> {
        let all = carrier_groups(&self.cfg)?;
        if self.groups.is_empty() {
            return Ok(all);
        }
        Ok(self.groups.iter().map(|&g| all[g]).collect())
    }

    /// Cells in canonical order: receivers outer, SNR inner.
    pub fn cells(&self) -> Vec<(ReceiverId, f64)> {
        self.receivers
            .iter()
            .flat_map(|&r| self.snr_points.iter().map(move |&s| (r, s)))
            .collect()
    }
}

/// Seed of all cells at one SNR.
pub fn cell_seed(sweep_seed: u64, snr_db: f64) -> u64 {
    derive_seed(sweep_seed, Stream::Cell, snr_db.to_bits())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub receiver: ReceiverId,
    pub snr_db: f64,
    pub clipping_db: f64,
    pub bits_simulated: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub wall_time_s: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "receiver,snr_db,clipping_db,bits_simulated,bit_errors,ber,wall_time_s,seed";

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        x.to_string()
    }
}

impl BerRecord {
    /// Wilson score interval at 95% confidence.
    pub fn wilson_interval(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.bits_simulated)
    }

    pub fn is_reliable(&self) -> bool {
        self.bit_errors >= RELIABLE_ERRORS
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{}",
            self.receiver,
            fmt_num(self.snr_db),
            fmt_num(self.clipping_db),
            self.bits_simulated,
            self.bit_errors,
            fmt_num(self.ber),
            self.wall_time_s,
            self.seed
        )
    }

    /// The row without the wall-clock column, which is the part a rerun reproduces.
    pub fn reproducible_row(&self) -> String {
        let r = Self { wall_time_s: 0.0, ..self.clone() };
        r.to_csv_row()
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 8 {
            return Err(Error::Format(format!("expected 8 CSV fields, got {} in `{line}`", f.len())));
        }
        let bad = |what: &str| Error::Format(format!("bad {what} in `{line}`"));
        let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
        Ok(Self {
            receiver: f[0].parse()?,
            snr_db: num(f[1], "snr_db")?,
            clipping_db: num(f[2], "clipping_db")?,
            bits_simulated: f[3].parse().map_err(|_| bad("bits_simulated"))?,
            bit_errors: f[4].parse().map_err(|_| bad("bit_errors"))?,
            ber: num(f[5], "ber")?,
            wall_time_s: num(f[6], "wall_time_s")?,
            seed: f[7].parse().map_err(|_| bad("seed"))?,
        })
    }
}

/// Wilson score interval for `errors` out of `n` at 95% confidence.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

pub fn write_csv(path: &Path, records: &[BerRecord]) -> Result<()> {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.to_csv_row());
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BerRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        Some(h) => return Err(Error::Format(format!("unexpected CSV header `{h}`"))),
        None => return Ok(Vec::new()),
    }
    lines.map(BerRecord::from_csv_row).collect()
}

/// Trained banks available to a sweep, keyed by kind.
#[derive(Debug, Clone, Default)]
pub struct Banks {
    banks: BTreeMap<&'static str, ReceiverBank<f32>>,
}

impl Banks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, bank: ReceiverBank<f32>) {
        self.banks.insert(bank.kind.name(), bank);
    }

    pub fn get(&self, kind: ReceiverKind) -> Option<&ReceiverBank<f32>> {
        self.banks.get(kind.name())
    }

    /// Loads `<dir>/<kind>` for each kind whose directory exists.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut out = Self::new();
        for kind in ReceiverKind::ALL {
            let sub = dir.join(kind.name());
            if sub.join("manifest.txt").exists() {
                out.insert(ReceiverBank::load(&sub)?);
            }
        }
        Ok(out)
    }
}

/// Frames per cell so that at least `min_bits` counted bits are simulated.
fn frames_needed(min_bits: u64, bits_per_frame: u64) -> u64 {
    min_bits.div_ceil(bits_per_frame.max(1))
}

/// Frames processed per parallel work item.
const FRAME_CHUNK: u64 = 64;

/// Runs one sweep cell from its seed.
pub fn run_cell(spec: &SweepSpec, receiver: ReceiverId, snr_db: f64, seed: u64, banks: &Banks) -> Result<BerRecord> {
    let start = Instant::now();
    let groups = spec.counted_groups()?;
    let cfg = LinkConfig {
        clipping_db: receiver.link_clipping_db(spec.cfg.clipping_db),
        ..spec.cfg.clone()
    };
    let needs_d_hat = !matches!(receiver, ReceiverId::MldUpper | ReceiverId::MldLower | ReceiverId::DataDriven);
    let gen = SampleGenerator::<f64>::new(&cfg)?.with_d_hat(needs_d_hat);
    let bits_per_frame = 4 * (groups.len() * cfg.k) as u64;
    let frames = frames_needed(spec.min_bits, bits_per_frame);
    let detector = Detector::new(spec, receiver, &gen, &groups, banks)?;
    let chunks: Vec<u64> = (0..frames).step_by(FRAME_CHUNK as usize).collect();
    let errors = chunks
        .par_iter()
        .map(|&first| {
            let last = (first + FRAME_CHUNK).min(frames);
            let sims = (first..last)
                .map(|i| gen.simulate(snr_db, sample_seed(seed, i)))
                .collect::<Result<Vec<_>>>()?;
            detector.count_errors(&gen, &sims)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    let bits = frames * bits_per_frame;
    Ok(BerRecord {
        receiver,
        snr_db,
        clipping_db: cfg.clipping_db,
        bits_simulated: bits,
        bit_errors: errors,
        ber: errors as f64 / bits as f64,
        wall_time_s: (start.elapsed().as_secs_f64() * 1e3).round() / 1e3,
        seed,
    })
}

enum Detector<'a> {
    Zf {
        constellation: QamConstellation<f64>,
        groups: Vec<CarrierGroup>,
    },
    Mld {
        estimator: LsEstimator<f64>,
        mld: MldConfig<f64>,
        groups: Vec<CarrierGroup>,
    },
    Learned {
        bank: &'a ReceiverBank<f32>,
        groups: Vec<CarrierGroup>,
    },
}

impl<'a> Detector<'a> {
    fn new(spec: &SweepSpec, receiver: ReceiverId, gen: &SampleGenerator<f64>, groups: &[CarrierGroup], banks: &'a Banks) -> Result<Self> {
        let cfg = gen.config();
        let constellation = QamConstellation::<f64>::qam16().scaled(cfg.rho.sqrt());
        let groups = groups.to_vec();
        Ok(match receiver {
            ReceiverId::LsZfLinear | ReceiverId::LsZfNonlinear => Detector::Zf { constellation, groups },
            ReceiverId::MldUpper | ReceiverId::MldLower => {
                let plan = gen.plan();
                let pilots: Vec<_> = (0..cfg.nt).map(|r| plan.pilot_symbol(r)).collect();
                let a = build_a_oracle(&pilots, &plan.tones, gen.pa(), cfg.l)?;
                let mode = if receiver == ReceiverId::MldUpper { MldMode::Upper } else { MldMode::Lower };
                if spec.mld_k == 0 || cfg.m % spec.mld_k != 0 {
                    return Err(Error::Config(format!("mld_k = {} must divide m = {}", spec.mld_k, cfg.m)));
                }
                Detector::Mld {
                    estimator: LsEstimator::new(&a, cfg.nt, cfg.l)?,
                    mld: MldConfig::new(spec.mld_k, mode, constellation),
                    groups,
                }
            }
            ReceiverId::Type1 | ReceiverId::DataDriven | ReceiverId::Type2 => {
                let kind = receiver.kind().expect("learned receiver");
                let bank = banks
                    .get(kind)
                    .ok_or_else(|| Error::Config(format!("no trained bank for receiver `{receiver}`")))?;
                if bank.m != cfg.m || bank.nt != cfg.nt || bank.k != cfg.k {
                    return Err(Error::Config(format!("bank for `{receiver}` does not match the link configuration")));
                }
                for g in &groups {
                    if bank.network(g.index).is_none() {
                        return Err(Error::MissingNetwork(g.index));
                    }
                }
                Detector::Learned { bank, groups }
            }
        })
    }

    fn count_errors(&self, gen: &SampleGenerator<f64>, sims: &[crate::dataset::Simulated<f64>]) -> Result<u64> {
        let cfg = gen.config();
        let m = cfg.m;
        let count = |truth: &[u8], detected: &[u8]| truth.iter().zip(detected).filter(|(a, b)| a != b).count() as u64;
        let mut errors = 0;
        match self {
            Detector::Zf { constellation, groups } => {
                for s in sims {
                    let d_hat = EqualizedSymbol {
                        nt: cfg.nt,
                        m,
                        d_hat: s.sample.d_hat.clone().expect("generator keeps the ZF output"),
                    };
                    let bits = zf_baseline_detect(&d_hat, constellation, gen.fft());
                    for g in groups {
                        let r = g.label_range(m);
                        errors += count(&s.sample.labels[r.clone()], &bits[r]);
                    }
                }
            }
            Detector::Mld { estimator, mld, groups } => {
                for s in sims {
                    let est = estimator.estimate(&s.sample.y_p_rows(cfg.nr))?;
                    let y_d = s.sample.y_d_rows(cfg.nr);
                    let mut rng = rng_for(s.sample.meta.seed, Stream::MldReference, 0);
                    let fixed = reference_symbols(mld.mode, &s.frame, mld, &mut rng);
                    let mut decided: BTreeMap<usize, Vec<Vec<u8>>> = BTreeMap::new();
                    for g in groups {
                        let mut detected = Vec::with_capacity(4 * g.k);
                        for t in g.tones() {
                            let block = t - t % mld.k_mld;
                            if !decided.contains_key(&block) {
                                let tones: Vec<usize> = (block..block + mld.k_mld).collect();
                                let d = mld_search(&y_d, &est, &fixed, &tones, gen.pa(), mld, gen.fft())?;
                                decided.insert(block, d.labels);
                            }
                            detected.extend(label_to_bits(decided[&block][g.antenna][t - block]));
                        }
                        errors += count(&s.sample.labels[g.label_range(m)], &detected);
                    }
                }
            }
            Detector::Learned { bank, groups } => {
                let samples: Vec<Sample<f64>> = sims.iter().map(|s| s.sample.clone()).collect();
                let features = FeatureMatrix::<f32>::build(bank.kind, &samples)?;
                let indices: Vec<usize> = groups.iter().map(|g| g.index).collect();
                let bits = bank.detect_inputs(&features.inputs, &indices)?;
                let width = 4 * cfg.k * groups.len();
                for (i, s) in samples.iter().enumerate() {
                    let row = &bits[i * width..(i + 1) * width];
                    for (gi, g) in groups.iter().enumerate() {
                        errors += count(&s.labels[g.label_range(m)], &row[gi * 4 * g.k..(gi + 1) * 4 * g.k]);
                    }
                }
            }
        }
        Ok(errors)
    }
}

fn same_cell(r: &BerRecord, receiver: ReceiverId, snr_db: f64, clipping_db: f64, seed: u64) -> bool {
    r.receiver == receiver && r.snr_db.to_bits() == snr_db.to_bits() && r.clipping_db.to_bits() == clipping_db.to_bits() && r.seed == seed
}

/// Runs every cell of `spec` in canonical order.
pub fn run_sweep(spec: &SweepSpec, banks: &Banks) -> Result<Vec<BerRecord>> {
    spec.validate()?;
    spec.cells()
        .into_iter()
        .map(|(r, snr)| run_cell(spec, r, snr, cell_seed(spec.seed, snr), banks))
        .collect()
}

/// Runs the sweep into a CSV file, resuming from the rows already present.
///
/// Each finished cell is appended immediately; on completion the file is
/// rewritten in canonical cell order. Returns the records of `spec`.
pub fn run_sweep_to_csv(spec: &SweepSpec, banks: &Banks, path: &Path, mut progress: impl FnMut(&BerRecord, bool)) -> Result<Vec<BerRecord>> {
    spec.validate()?;
    let mut existing = if path.exists() { read_csv(path)? } else { Vec::new() };
    if !path.exists() || existing.is_empty() {
        write_csv(path, &existing)?;
    }
    let mut out = Vec::new();
    for (receiver, snr) in spec.cells() {
        let seed = cell_seed(spec.seed, snr);
        let clip = receiver.link_clipping_db(spec.cfg.clipping_db);
        if let Some(r) = existing.iter().find(|r| same_cell(r, receiver, snr, clip, seed)) {
            progress(r, true);
            out.push(r.clone());
            continue;
        }
        let r = run_cell(spec, receiver, snr, seed, banks)?;
        let mut f = std::fs::OpenOptions::new().append(true).open(path)?;
        writeln!(f, "{}", r.to_csv_row())?;
        progress(&r, false);
        existing.push(r.clone());
        out.push(r);
    }
    let mut ordered = out.clone();
    for r in &existing {
        if !out.iter().any(|o| same_cell(o, r.receiver, r.snr_db, r.clipping_db, r.seed)) {
            ordered.push(r.clone());
        }
    }
    write_csv(path, &ordered)?;
    Ok(out)
}

/// Long-format report header: one row per (receiver, SNR, clipping) point.
pub const REPORT_HEADER: &str = "receiver,snr_db,clipping_db,bits_simulated,bit_errors,ber,ci_low,ci_high,half_width,reliable";

/// Merges records and renders the long-format report, sorted by receiver,
/// clipping and SNR. Repeated points are pooled.
pub fn report(records: &[BerRecord]) -> String {
    let mut pooled: BTreeMap<(ReceiverId, u64, u64), (f64, f64, u64, u64)> = BTreeMap::new();
    let key = |x: f64| {
        let b = x.to_bits();
        if x.is_sign_negative() { !b } else { b | (1 << 63) }
    };
    for r in records {
        let e = pooled
            .entry((r.receiver, key(r.clipping_db), key(r.snr_db)))
            .or_insert((r.snr_db, r.clipping_db, 0, 0));
        e.2 += r.bits_simulated;
        e.3 += r.bit_errors;
    }
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for ((receiver, _, _), (snr, clip, bits, errs)) in pooled {
        let (lo, hi) = wilson_interval(errs, bits);
        let ber = if bits > 0 { errs as f64 / bits as f64 } else { 0.0 };
        s.push_str(&format!(
            "{receiver},{},{},{bits},{errs},{},{},{},{},{}\n",
            fmt_num(snr),
            fmt_num(clip),
            fmt_num(ber),
            fmt_num(lo),
            fmt_num(hi),
            fmt_num((hi - lo) / 2.0),
            errs >= RELIABLE_ERRORS
        ));
    }
    s
}

/// SNR assignment of training samples.
pub fn training_snr(exp: &ExperimentConfig) -> SnrDraw {
    match exp.training.snr_mode {
        SnrMode::Fixed => SnrDraw::Fixed(exp.link.snr_db),
        SnrMode::Mixed => SnrDraw::Uniform {
            min: exp.training.train_snr_min,
            max: exp.training.train_snr_max,
        },
    }
}

/// Generates `exp.link.train_samples` samples in `f64` and stores them as `f32`.
pub fn training_samples(exp: &ExperimentConfig, seed: u64) -> Result<Vec<Sample<f32>>> {
    const CHUNK: usize = 4096;
    let gen = SampleGenerator::<f64>::new(&exp.link)?;
    let base = derive_seed(seed, Stream::TrainData, 0);
    let snr = training_snr(exp);
    let n = exp.link.train_samples;
    let mut out = Vec::with_capacity(n);
    let mut first = 0;
    while first < n {
        let count = CHUNK.min(n - first);
        let chunk: Vec<Sample<f32>> = (first..first + count)
            .into_par_iter()
            .map(|i| {
                let s = sample_seed(base, i as u64);
                gen.generate(snr.for_sample(s), s).map(|x| x.cast())
            })
            .collect::<Result<_>>()?;
        out.extend(chunk);
        first += count;
    }
    Ok(out)
}

/// Same samples as [`training_samples`] for a prefix, materialized in `f64`.
pub fn training_samples_f64(exp: &ExperimentConfig, seed: u64, count: usize) -> Result<Vec<Sample<f64>>> {
    let gen = SampleGenerator::<f64>::new(&exp.link)?;
    generate_dataset(&gen, count, derive_seed(seed, Stream::TrainData, 0), training_snr(exp))
}

#[derive(Debug, Clone)]
pub struct TrainedBank {
    pub bank: ReceiverBank<f32>,
    pub reports: Vec<TrainReport>,
    pub seconds: f64,
}

pub fn hidden_layers(exp: &ExperimentConfig, kind: ReceiverKind) -> &[usize] {
    match kind {
        ReceiverKind::Type1 => &exp.training.hidden_type1,
        ReceiverKind::DataDriven => &exp.training.hidden_data_driven,
        ReceiverKind::Type2 => &exp.training.hidden_type2,
    }
}

/// Splits `samples` into training and validation parts and trains one bank
/// per kind on the configured groups.
pub fn train_receivers(exp: &ExperimentConfig, kinds: &[ReceiverKind], samples: Vec<Sample<f32>>, seed: u64) -> Result<Vec<TrainedBank>> {
    let val = exp.training.val_fraction;
    let (train_set, val_set, _) = split(samples, [1.0 - val, val, 0.0], derive_seed(seed, Stream::Split, 0))?;
    let groups: Vec<usize> = if exp.training.groups.is_empty() {
        (0..exp.link.num_groups()).collect()
    } else {
        exp.training.groups.clone()
    };
    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let start = Instant::now();
        let features = FeatureMatrix::<f32>::build(kind, &train_set)?;
        let validation = FeatureMatrix::<f32>::build(kind, &val_set)?;
        let settings = BankTraining {
            hidden: hidden_layers(exp, kind).to_vec(),
            epochs: exp.training.epochs,
            batch_size: exp.link.batch_size,
            learning_rate: exp.training.learning_rate,
            keep_best: true,
            seed: derive_seed(seed, Stream::Init, kind as u64),
        };
        let (bank, reports) = train_bank(&exp.link, &features, Some(&validation), &groups, &settings)?;
        out.push(TrainedBank {
            bank,
            reports,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}
