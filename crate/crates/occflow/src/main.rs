use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use occflow::commands::{ablate, evaluate, gallery, simulate, train};
use occflow::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "occflow", version, about = "One-class classification on optical flows: \
simulate data, train the model suite, evaluate and export analyses.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config; defaults apply when omitted. OCCFLOW_* env vars
    /// override fields (OCCFLOW_STAGES__DCAE__EPOCHS=3).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the output directory (dataset root for `simulate`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved config and plan without computing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic colony dataset.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Train one stage (or all) across the three splits.
    Train {
        /// dcae|dsvdd|iogen|classifier|gen|ngen|ocsvm|all
        #[arg(long)]
        stage: String,
        #[command(flatten)]
        common: Common,
    },
    /// Score every trained method on the test sets and write the report.
    Evaluate {
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Train the primary chain per stack depth m and tabulate AUC.
    Ablate {
        /// Comma-separated m values.
        #[arg(long, value_delimiter = ',')]
        m_values: Option<Vec<usize>>,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Render synthesized and real flow pairs as a grayscale grid.
    Gallery {
        /// Pairs per group.
        #[arg(short = 'n', long, default_value_t = 6)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common, out_overrides_dataset: bool) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::from_process_env(common.config.as_deref())?;
    if let Some(out) = &common.out {
        if out_overrides_dataset {
            cfg.dataset_root = out.clone();
        } else {
            cfg.out_dir = out.clone();
        }
    }
    Ok(cfg)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate { common } => {
            let cfg = load_config(common, true)?;
            simulate::cmd_simulate(&cfg, common.dry_run)
        }
        Command::Train { stage, common } => {
            let cfg = load_config(common, false)?;
            train::cmd_train(&cfg, stage, common.dry_run)
        }
        Command::Evaluate { jobs, common } => {
            let mut cfg = load_config(common, false)?;
            if let Some(jobs) = jobs {
                cfg.eval.jobs = (*jobs).max(1);
            }
            evaluate::cmd_evaluate(&cfg, common.dry_run)
        }
        Command::Ablate { m_values, jobs, common } => {
            let mut cfg = load_config(common, false)?;
            if let Some(jobs) = jobs {
                cfg.eval.jobs = (*jobs).max(1);
            }
            let ms = m_values.clone().unwrap_or_else(|| ablate::DEFAULT_M_VALUES.to_vec());
            ablate::cmd_ablate(&cfg, &ms, common.dry_run)
        }
        Command::Gallery { count, common } => {
            let cfg = load_config(common, false)?;
            gallery::cmd_gallery(&cfg, *count, common.dry_run)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
