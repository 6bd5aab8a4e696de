use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mimo_ofdm_rx::config::{ExperimentConfig, Profile};
use mimo_ofdm_rx::dataset::{read_dataset, write_dataset};
use mimo_ofdm_rx::harness::{
    parse_receivers, parse_snr_list, read_csv, report, run_sweep_to_csv, train_receivers, training_samples, training_snr, Banks, BerRecord, SweepSpec,
};
use mimo_ofdm_rx::receivers::ReceiverKind;
use mimo_ofdm_rx::{Error, Result};

#[derive(Parser)]
#[command(name = "mimo-ofdm-rx", version, about = "MIMO-OFDM link simulator with nonlinear PAs and learned receivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file applied on top of the profile.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "desk")]
    profile: String,
    /// Master seed; defaults to the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let profile: Profile = self.profile.parse()?;
        match &self.config {
            Some(path) => ExperimentConfig::from_file(path, profile),
            None => Ok(ExperimentConfig::profile(profile)),
        }
    }

    fn seed(&self, exp: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(exp.link.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a training dataset file.
    GenData {
        #[command(flatten)]
        common: Common,
        /// Number of samples; defaults to `train_samples`.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train receiver banks and write checkpoints with manifests.
    Train {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of type1,data_driven,type2.
        #[arg(long, default_value = "type1,data_driven,type2")]
        receivers: String,
        /// Dataset from `gen-data`; generated in memory when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output directory; each bank goes to `<out>/<kind>`.
        #[arg(long)]
        out: PathBuf,
    },
    /// BER versus SNR sweep into a CSV file, resuming finished cells.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "ls_zf_linear,ls_zf_nonlinear,mld_upper,mld_lower,type1,data_driven,type2")]
        receivers: String,
        #[arg(long, default_value = "5,10,15,20,25")]
        snr: String,
        #[arg(long, default_value_t = 100_000)]
        min_bits: u64,
        /// Directory written by `train`.
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge sweep CSVs into a long-format table with confidence intervals.
    Report {
        /// Sweep CSV files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn gen_data(common: &Common, count: Option<usize>, out: &Path) -> Result<()> {
    let mut exp = common.experiment()?;
    if let Some(n) = count {
        exp.link.train_samples = n;
    }
    let seed = common.seed(&exp);
    let samples: Vec<_> = training_samples(&exp, seed)?.iter().map(|s| s.cast::<f64>()).collect();
    let header = format!("{}train_seed = {seed}\nsnr_draw = {:?}\n", exp.to_text(), training_snr(&exp));
    write_dataset(out, &header, &samples)?;
    eprintln!("wrote {} samples to {}", samples.len(), out.display());
    Ok(())
}

fn train(common: &Common, receivers: &str, data: Option<&Path>, out: &Path) -> Result<()> {
    let exp = common.experiment()?;
    let seed = common.seed(&exp);
    let kinds = receivers
        .split(',')
        .map(|k| k.trim().parse::<ReceiverKind>())
        .collect::<Result<Vec<_>>>()?;
    let samples = match data {
        Some(path) => {
            let (_, samples) = read_dataset(path)?;
            samples.iter().map(|s| s.cast::<f32>()).collect()
        }
        None => training_samples(&exp, seed)?,
    };
    for s in &samples {
        s.check(&exp.link)?;
    }
    eprintln!("training on {} samples", samples.len());
    for trained in train_receivers(&exp, &kinds, samples, seed)? {
        let dir = out.join(trained.bank.kind.name());
        trained.bank.save(&dir)?;
        for (g, r) in trained.bank.trained_groups().iter().zip(&trained.reports) {
            let best = r.best_epoch.map(|e| r.val_loss[e]).unwrap_or(f64::NAN);
            eprintln!("{} group {g}: best validation loss {best:.5}", trained.bank.kind);
        }
        eprintln!("{} trained in {:.1} s, saved to {}", trained.bank.kind, trained.seconds, dir.display());
    }
    Ok(())
}

fn sweep(common: &Common, receivers: &str, snr: &str, min_bits: u64, models: Option<&Path>, out: &Path) -> Result<()> {
    let exp = common.experiment()?;
    let receivers = parse_receivers(receivers)?;
    let spec = SweepSpec::from_experiment(&exp, receivers.clone(), parse_snr_list(snr)?, min_bits, common.seed(&exp));
    let banks = match models {
        Some(dir) => Banks::load_dir(dir)?,
        None => Banks::new(),
    };
    if let Some(r) = receivers.iter().find(|r| r.kind().is_some_and(|k| banks.get(k).is_none())) {
        return Err(Error::Config(format!("receiver `{r}` needs --models with a trained bank")));
    }
    run_sweep_to_csv(&spec, &banks, out, |r: &BerRecord, skipped| {
        let tag = if skipped { "kept" } else { "done" };
        eprintln!("{tag} {} snr {} dB: ber {:.3e} ({} errors, {:.1} s)", r.receiver, r.snr_db, r.ber, r.bit_errors, r.wall_time_s);
    })?;
    Ok(())
}

fn report_cmd(inputs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut records = Vec::new();
    for p in inputs {
        records.extend(read_csv(p)?);
    }
    let text = report(&records);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { common, count, out } => gen_data(&common, count, &out),
        Command::Train { common, receivers, data, out } => train(&common, &receivers, data.as_deref(), &out),
        Command::Sweep {
            common,
            receivers,
            snr,
            min_bits,
            models,
            out,
        } => sweep(&common, &receivers, &snr, min_bits, models.as_deref(), &out),
        Command::Report { inputs, out } => report_cmd(&inputs, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
