//! Link and experiment configuration, profiles, and the flat `key = value`
//! configuration file format.
//!
//! ```text
//! # comments start with '#'
//! m = 64
//! nt = 2
//! clipping_db = 7      # "inf" selects an ideal linear PA
//! hidden_type1 = 128,128,64
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// System dimensions and operating point of one MIMO-OFDM link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// Subcarriers per OFDM symbol.
    pub m: usize,
    /// Channel impulse response length (taps).
    pub l: usize,
    /// Cyclic prefix length.
    pub l_cp: usize,
    /// Transmit antennas.
    pub nt: usize,
    /// Receive antennas.
    pub nr: usize,
    /// Pilot tones per antenna; must equal `nt * l`.
    pub m_p: usize,
    /// Carriers detected by one network.
    pub k: usize,
    pub snr_db: f64,
    /// Clipping level `v_sat^2 / rho` in dB; infinite for a linear PA.
    pub clipping_db: f64,
    /// Rapp smoothness factor.
    pub delta: f64,
    /// Average per-antenna transmit power.
    pub rho: f64,
    pub seed: u64,
    pub train_samples: usize,
    pub test_samples: usize,
    pub batch_size: usize,
}

impl LinkConfig {
    /// Laptop-scale profile: M=64, Nt=2, Nr=4.
    pub fn desk() -> Self {
        Self {
            m: 64,
            l: 16,
            l_cp: 16,
            nt: 2,
            nr: 4,
            m_p: 32,
            k: 8,
            snr_db: 15.0,
            clipping_db: 7.0,
            delta: 5.0,
            rho: 1.0,
            seed: 2024,
            train_samples: 50_000,
            test_samples: 10_000,
            batch_size: 300,
        }
    }

    /// Full-size profile: M=128, L=16, Nt=2, Nr=8, 2.4e5 training samples.
    pub fn paper() -> Self {
        Self {
            m: 128,
            nr: 8,
            train_samples: 240_000,
            ..Self::desk()
        }
    }

    pub fn is_linear_pa(&self) -> bool {
        self.clipping_db.is_infinite() && self.clipping_db > 0.0
    }

    /// Number of carrier groups (and networks in a full bank).
    pub fn num_groups(&self) -> usize {
        self.nt * self.m / self.k
    }

    /// Payload bits per frame (16QAM on every tone of every antenna).
    pub fn bits_per_frame(&self) -> usize {
        4 * self.nt * self.m
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.l == 0 || self.nt == 0 || self.nr == 0 || self.k == 0 {
            return fail("dimensions m, l, nt, nr, k must be positive".into());
        }
        if self.l < 7 {
            return fail(format!("l = {} cannot hold the 7-tap delay spread", self.l));
        }
        if self.l > self.m {
            return fail(format!("l = {} exceeds m = {}", self.l, self.m));
        }
        if self.l_cp + 1 < self.l {
            return fail(format!("cyclic prefix l_cp = {} shorter than l - 1 = {}", self.l_cp, self.l - 1));
        }
        if self.m_p != self.nt * self.l {
            return fail(format!("m_p = {} must equal nt * l = {}", self.m_p, self.nt * self.l));
        }
        if self.m % self.m_p != 0 {
            return fail(format!("m = {} not divisible by m_p = {}", self.m, self.m_p));
        }
        if self.m % self.k != 0 {
            return fail(format!("k = {} does not divide m = {}", self.k, self.m));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return fail(format!("rho = {} must be positive", self.rho));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return fail(format!("delta = {} must be positive", self.delta));
        }
        if self.clipping_db.is_nan() || self.clipping_db == f64::NEG_INFINITY {
            return fail("clipping_db must be a number or inf".into());
        }
        if !self.snr_db.is_finite() {
            return fail("snr_db must be finite".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        Ok(())
    }
}

/// How training samples pick their SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrMode {
    /// Every training sample uses `LinkConfig::snr_db`.
    Fixed,
    /// Uniform over `[train_snr_min, train_snr_max]` dB.
    Mixed,
}

impl FromStr for SnrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(SnrMode::Fixed),
            "mixed" => Ok(SnrMode::Mixed),
            _ => Err(Error::Config(format!("snr_mode must be fixed or mixed, got `{s}`"))),
        }
    }
}

impl std::fmt::Display for SnrMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SnrMode::Fixed => "fixed",
            SnrMode::Mixed => "mixed",
        })
    }
}

/// Training hyper-parameters for receiver banks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub val_fraction: f64,
    pub snr_mode: SnrMode,
    pub train_snr_min: f64,
    pub train_snr_max: f64,
    /// Carrier groups to train; empty means the full bank.
    pub groups: Vec<usize>,
    pub hidden_type1: Vec<usize>,
    pub hidden_data_driven: Vec<usize>,
    pub hidden_type2: Vec<usize>,
    /// Carriers searched jointly by the MLD benchmarks.
    pub mld_k: usize,
}

impl TrainingConfig {
    pub fn desk() -> Self {
        Self {
            epochs: 30,
            learning_rate: 2e-3,
            val_fraction: 0.2,
            snr_mode: SnrMode::Mixed,
            train_snr_min: 5.0,
            train_snr_max: 25.0,
            groups: vec![0, 5, 10, 15],
            hidden_type1: vec![128, 128, 64],
            hidden_data_driven: vec![32, 32],
            hidden_type2: vec![64, 64, 32],
            mld_k: 2,
        }
    }

    /// Network sizes of the full-scale architecture table.
    pub fn paper() -> Self {
        Self {
            epochs: 30,
            groups: Vec::new(),
            hidden_type1: vec![1024, 2028, 512],
            hidden_data_driven: vec![4000, 3000, 1024],
            hidden_type2: vec![4000, 3000, 1024],
            ..Self::desk()
        }
    }
}

/// Named configuration presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Desk,
    Paper,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(Error::Config(format!("profile must be desk or paper, got `{s}`"))),
        }
    }
}

/// Everything a CLI run needs: link plus training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub link: LinkConfig,
    pub training: TrainingConfig,
}

impl ExperimentConfig {
    pub fn profile(p: Profile) -> Self {
        match p {
            Profile::Desk => Self {
                link: LinkConfig::desk(),
                training: TrainingConfig::desk(),
            },
            Profile::Paper => Self {
                link: LinkConfig::paper(),
                training: TrainingConfig::paper(),
            },
        }
    }

    /// Applies `key = value` lines on top of `self`. Unknown keys are rejected
    /// by name.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{}`", lineno + 1, raw.trim()))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        self.link.validate()
    }

    pub fn from_file(path: &Path, base: Profile) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::profile(base);
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let l = &mut self.link;
        let t = &mut self.training;
        match key {
            "m" => l.m = parse(key, value)?,
            "l" => l.l = parse(key, value)?,
            "l_cp" => l.l_cp = parse(key, value)?,
            "nt" => l.nt = parse(key, value)?,
            "nr" => l.nr = parse(key, value)?,
            "m_p" => l.m_p = parse(key, value)?,
            "k" => l.k = parse(key, value)?,
            "snr_db" => l.snr_db = parse(key, value)?,
            "clipping_db" => l.clipping_db = parse(key, value)?,
            "delta" => l.delta = parse(key, value)?,
            "rho" => l.rho = parse(key, value)?,
            "seed" => l.seed = parse(key, value)?,
            "train_samples" => l.train_samples = parse(key, value)?,
            "test_samples" => l.test_samples = parse(key, value)?,
            "batch_size" => l.batch_size = parse(key, value)?,
            "epochs" => t.epochs = parse(key, value)?,
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "val_fraction" => t.val_fraction = parse(key, value)?,
            "snr_mode" => t.snr_mode = value.parse()?,
            "train_snr_min" => t.train_snr_min = parse(key, value)?,
            "train_snr_max" => t.train_snr_max = parse(key, value)?,
            "groups" => t.groups = parse_list(key, value)?,
            "hidden_type1" => t.hidden_type1 = parse_list(key, value)?,
            "hidden_data_driven" => t.hidden_data_driven = parse_list(key, value)?,
            "hidden_type2" => t.hidden_type2 = parse_list(key, value)?,
            "mld_k" => t.mld_k = parse(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Serializes every key in a stable order; `apply_text` of the result on
    /// any profile reproduces `self`.
    pub fn to_text(&self) -> String {
        let l = &self.link;
        let t = &self.training;
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "m = {}", l.m);
        let _ = writeln!(s, "l = {}", l.l);
        let _ = writeln!(s, "l_cp = {}", l.l_cp);
        let _ = writeln!(s, "nt = {}", l.nt);
        let _ = writeln!(s, "nr = {}", l.nr);
        let _ = writeln!(s, "m_p = {}", l.m_p);
        let _ = writeln!(s, "k = {}", l.k);
        let _ = writeln!(s, "snr_db = {:?}", l.snr_db);
        let _ = writeln!(s, "clipping_db = {}", fmt_f64(l.clipping_db));
        let _ = writeln!(s, "delta = {:?}", l.delta);
        let _ = writeln!(s, "rho = {:?}", l.rho);
        let _ = writeln!(s, "seed = {}", l.seed);
        let _ = writeln!(s, "train_samples = {}", l.train_samples);
        let _ = writeln!(s, "test_samples = {}", l.test_samples);
        let _ = writeln!(s, "batch_size = {}", l.batch_size);
        let _ = writeln!(s, "epochs = {}", t.epochs);
        let _ = writeln!(s, "learning_rate = {:?}", t.learning_rate);
        let _ = writeln!(s, "val_fraction = {:?}", t.val_fraction);
        let _ = writeln!(s, "snr_mode = {}", t.snr_mode);
        let _ = writeln!(s, "train_snr_min = {:?}", t.train_snr_min);
        let _ = writeln!(s, "train_snr_max = {:?}", t.train_snr_max);
        let _ = writeln!(s, "groups = {}", list(&t.groups));
        let _ = writeln!(s, "hidden_type1 = {}", list(&t.hidden_type1));
        let _ = writeln!(s, "hidden_data_driven = {}", list(&t.hidden_data_driven));
        let _ = writeln!(s, "hidden_type2 = {}", list(&t.hidden_type2));
        let _ = writeln!(s, "mld_k = {}", t.mld_k);
        s
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x:?}")
    }
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse value `{value}` for key `{key}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_validate() {
        LinkConfig::desk().validate().unwrap();
        LinkConfig::paper().validate().unwrap();
        let p = LinkConfig::paper();
        assert_eq!((p.m, p.l, p.nt, p.nr, p.m_p), (128, 16, 2, 8, 32));
        assert_eq!(p.num_groups(), 32);
        assert_eq!(LinkConfig::desk().num_groups(), 16);
    }

    #[test]
    fn constraint_violations_are_reported() {
        let mut c = LinkConfig::desk();
        c.l_cp = 10;
        assert!(c.validate().is_err());
        let mut c = LinkConfig::desk();
        c.m_p = 16;
        assert!(c.validate().is_err());
        let mut c = LinkConfig::desk();
        c.k = 7;
        assert!(c.validate().is_err());
        let mut c = LinkConfig::desk();
        c.l = 6;
        c.m_p = 12;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_key_is_named() {
        let mut cfg = ExperimentConfig::profile(Profile::Desk);
        let err = cfg.apply_text("m = 64\nbogus_key = 3\n").unwrap_err();
        match err {
            Error::UnknownKey(k) => assert_eq!(k, "bogus_key"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::profile(Profile::Paper);
        cfg.link.clipping_db = f64::INFINITY;
        cfg.training.groups = vec![1, 2];
        let text = cfg.to_text();
        let mut back = ExperimentConfig::profile(Profile::Desk);
        back.apply_text(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(back.link.is_linear_pa());
    }

    #[test]
    fn comments_and_blank_lines() {
        let mut cfg = ExperimentConfig::profile(Profile::Desk);
        cfg.apply_text("# header\n\nsnr_db = 20 # trailing\n").unwrap();
        assert_eq!(cfg.link.snr_db, 20.0);
    }
}
