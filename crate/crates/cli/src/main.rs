//! `pointline`: generate, score and ablate pseudo-labels; create phantoms;
//! run or query the preview service.

mod args;
mod commands;

use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use args::GrowArgs;

#[derive(Debug, Parser)]
#[command(name = "pointline", version, about = "Pseudo-labels for meniscus MRI slices from point-line annotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one <image-stem>_pseudo.png mask per manifest entry
    Generate {
        /// JSON list of {image, labels, ground_truth?} entries
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory
        #[arg(long, default_value = "pseudo")]
        out: PathBuf,
        /// Worker threads [default: available cores]
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        grow: GrowArgs,
    },
    /// Dice of generated masks against each entry's ground truth
    Evaluate {
        #[command(flatten)]
        report: ReportArgs,
        #[command(flatten)]
        grow: GrowArgs,
    },
    /// Mean Dice for each cumulative stage set
    Ablate {
        #[command(flatten)]
        report: ReportArgs,
        #[command(flatten)]
        grow: GrowArgs,
    },
    /// Write synthetic slices, truth masks, weak labels and a manifest
    Phantom {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Random seed; required so runs are reproducible
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Mixed)]
        kind: KindArg,
        /// Gaussian noise standard deviation
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Box-blur radius applied before noise
        #[arg(long, default_value_t = 0)]
        blur: usize,
        /// Omit the rim, tear and neighbouring-tissue confounders
        #[arg(long)]
        plain: bool,
    },
    /// Run the HTTP preview service
    Serve {
        #[arg(long, default_value_t = 8731)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Allowed CORS origin; repeat for several. Any origin when omitted
        #[arg(long = "cors-origin", value_name = "ORIGIN")]
        cors_origins: Vec<String>,
    },
    /// Send one slice to a running service and save the returned mask
    Preview {
        #[arg(long, default_value = "http://127.0.0.1:8731")]
        url: String,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Mask to score the result against
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Output mask path
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grow: GrowArgs,
    },
    /// Query a running service's health endpoint
    Health {
        #[arg(long, default_value = "http://127.0.0.1:8731")]
        url: String,
    },
}

#[derive(Debug, Clone, clap::Args)]
struct ReportArgs {
    /// JSON list of {image, labels, ground_truth} entries
    #[arg(long)]
    manifest: PathBuf,
    /// Also write the report to this file (JSON when it ends in .json)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    jobs: Option<usize>,
    /// Print JSON instead of aligned text
    #[arg(long)]
    json: bool,
    /// Score with 2|X∩Y| / |X∪Y| instead of the Dice denominator
    #[arg(long)]
    jaccard_style: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Horn,
    Body,
    Mixed,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are fatal (1); help and version succeed
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
