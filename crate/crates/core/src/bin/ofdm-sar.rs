//! `ofdm-sar {psf|rangeline|image|mse-cp|snr-gain} --config <file> [...]`
//!
//! Exit status: 0 success, 1 runtime failure, 2 configuration or usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ofdm_sar::azimuth::Branch;
use ofdm_sar::experiments::{cmd_image, cmd_mse_cp, cmd_psf, cmd_rangeline, cmd_snr_gain, ExperimentConfig, RunReport};
use ofdm_sar::Error;

#[derive(Parser)]
#[command(name = "ofdm-sar", version, about = "CP-OFDM SAR simulation and imaging experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point-spread function of every waveform branch.
    Psf(Common),
    /// Sparse range line reconstructed for several prefix lengths.
    Rangeline(Common),
    /// Extended-scene images and their error against the truth.
    Image(Common),
    /// Mean-square error against prefix length.
    MseCp(Common),
    /// Range-compression SNR gain.
    SnrGain(Common),
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// cp_ofdm, lfm, noise or conventional_ofdm.
    #[arg(long)]
    branch: Option<Branch>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated prefix lengths.
    #[arg(long, value_delimiter = ',')]
    cp: Option<Vec<usize>>,
}

type Runner = fn(&ExperimentConfig) -> ofdm_sar::Result<RunReport>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };

    if let Some(n) = std::env::var("SAR_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }

    let (cmd, common) = match &cli.command {
        Command::Psf(c) => (cmd_psf as Runner, c),
        Command::Rangeline(c) => (cmd_rangeline as Runner, c),
        Command::Image(c) => (cmd_image as Runner, c),
        Command::MseCp(c) => (cmd_mse_cp as Runner, c),
        Command::SnrGain(c) => (cmd_snr_gain as Runner, c),
    };
    let cfg = match load(common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match cmd(&cfg) {
        Ok(report) => {
            print_report(&report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}

fn load(common: &Common) -> ofdm_sar::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&common.config)?;
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(b) = common.branch {
        cfg.branch = Some(b);
    }
    if let Some(t) = common.trials {
        cfg.trials = Some(t);
    }
    if let Some(cp) = &common.cp {
        cfg.cp_list = Some(cp.clone());
    }
    let warnings = cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn print_report(report: &RunReport) {
    for line in &report.summary {
        println!("{line}");
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
}
