use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dimerchain::experiments::{self, Command, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "dimerchain", version = experiments::VERSION, about = "Single-photon transport through chains of atomic dimers on a waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Transmission and reflection against detuning or chain length.
    Spectrum(Common),
    /// Resonance positions, depths and splitting.
    Peaks(Common),
    /// Localization length of disordered chains.
    Localization(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
    /// Override the disorder seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Peaks(a) => (Command::Peaks, a),
        Sub::Localization(a) => (Command::Localization, a),
    };
    if let Some(k) = args.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: could not start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = ExperimentConfig::load(&args.config).and_then(|config| {
        let options = RunOptions {
            out_dir: args.out,
            plot: args.plot,
            seed: args.seed,
        };
        experiments::run(command, &config, &options)
    });
    match result {
        Ok(summary) => {
            for path in &summary.outputs {
                println!("{}", path.display());
            }
            if summary.sentinel_rows > 0 {
                eprintln!("warning: {} of {} rows failed and were written as NaN", summary.sentinel_rows, summary.rows);
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
