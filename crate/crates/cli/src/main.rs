use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lblab_cli::commands::{self, CompareMode, CompareOptions, DemoOptions};
use lblab_cli::manifest::ExperimentManifest;
use lblab_cli::Result;
use lblab_core::BlobParams;

/// Per-sample learnability experiments.
#[derive(Parser)]
#[command(name = "lblab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every run of a manifest and write one history file per run.
    Train { manifest: PathBuf },

    /// Compute learnability and rank per sample from a history file.
    Analyze {
        history: PathBuf,
        /// Output CSV (default: <history stem>.scores.csv next to the input).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Correlate two or more scores files and export 2D histograms.
    Compare {
        #[arg(required = true, num_args = 1..)]
        scores: Vec<PathBuf>,
        #[arg(long, default_value = "both")]
        mode: CompareMode,
        #[arg(long, default_value_t = 200)]
        hist_bins_score: usize,
        #[arg(long, default_value_t = 100)]
        hist_bins_rank: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },

    /// Train one model with SGD, Adam and RMSprop and correlate the results.
    DemoCrossOptimizer {
        #[arg(long, default_value = "standard")]
        preset: String,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 3)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write histories, scores and the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Generate a Gaussian blob dataset as CSV.
    Synth {
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 500)]
        per_class: usize,
        #[arg(long, default_value_t = 0.6)]
        spread: f64,
        #[arg(long, default_value_t = 0.08)]
        label_noise: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    lblab_cli::init_thread_pool()?;
    match cli.command {
        Command::Train { manifest } => {
            let manifest = ExperimentManifest::read(&manifest)?;
            let summaries = commands::train(&manifest)?;
            print!("{}", commands::summary_table(&summaries));
            for s in &summaries {
                println!("wrote {}", s.path.display());
            }
        }
        Command::Analyze { history, out } => {
            let a = commands::analyze(&history, out.as_deref())?;
            let rows = a.table.rows();
            println!("{} samples -> {}", rows.len(), a.output.display());
            let show = |label: &str, slice: &[lblab_cli::tables::ScoreRow]| {
                println!("{label}:");
                for r in slice {
                    println!("  {:>6}  {:.4}  {}", r.rank, r.learnability, r.sample_id);
                }
            };
            let k = rows.len().min(5);
            show("easiest", &rows[..k]);
            show("hardest", &rows[rows.len() - k..]);
        }
        Command::Compare {
            scores,
            mode,
            hist_bins_score,
            hist_bins_rank,
            out,
        } => {
            let options = CompareOptions {
                mode,
                score_bins: hist_bins_score,
                rank_bins: hist_bins_rank,
                out_dir: out,
            };
            print!("{}", commands::compare(&scores, &options)?.report);
        }
        Command::DemoCrossOptimizer {
            preset,
            epochs,
            runs,
            seed,
            out,
        } => {
            let options = DemoOptions {
                preset,
                epochs,
                runs,
                seed,
                out_dir: out,
            };
            print!("{}", commands::demo_cross_optimizer(&options)?.text);
        }
        Command::Synth {
            classes,
            dim,
            per_class,
            spread,
            label_noise,
            seed,
            out,
        } => {
            let params = BlobParams {
                classes,
                dim,
                per_class,
                spread,
                label_noise,
                seed,
            };
            let text = commands::synth(&params, out.as_deref())?;
            match out {
                Some(path) => println!("wrote {} samples to {}", text.lines().count() - 1, path.display()),
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
