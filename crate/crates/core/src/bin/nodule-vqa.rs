use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nodule_vqa::baselines::{GeneratorConfig, GeneratorKind};
use nodule_vqa::clinical::MissingPolicy;
use nodule_vqa::error::Result;
use nodule_vqa::forge::SplitMode;
use nodule_vqa::pipeline::{
    cmd_evaluate, cmd_forge, cmd_generate, cmd_report, cmd_split, render_report, with_jobs, Config, EvaluateOptions,
    ForgeOptions, GenerateOptions, SplitSelector, DEFAULT_SEED,
};

/// Forge a pulmonary-nodule VQA dataset from LIDC-style annotations and
/// score generated findings.
///
/// Exit codes: 0 success, 1 usage, 2 input validation, 3 internal.
#[derive(Parser)]
#[command(name = "nodule-vqa", version)]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build images/, dataset.jsonl and manifest.json from a config file.
    Forge {
        /// TOML config; roots may be overridden by NODULE_VQA_ANNOTATION_ROOT
        /// and NODULE_VQA_DICOM_ROOT.
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `min_readers` from the config.
        #[arg(long)]
        min_readers: Option<usize>,
    },
    /// Assign 7:2:1 train/val/test labels to a dataset in place.
    Split {
        dataset: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SplitMode::ImageLevel)]
        mode: SplitMode,
    },
    /// Write baseline predictions.jsonl for a dataset split.
    GenerateBaseline {
        dataset: PathBuf,
        #[arg(long, value_enum)]
        kind: GeneratorKind,
        /// Output directory for predictions.jsonl and manifest.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitSelector::All)]
        eval_split: SplitSelector,
        /// Per-score corruption probability for `noisy`.
        #[arg(long, default_value_t = 0.25)]
        rate: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Lexicon file (default: the dataset's lexicon.txt).
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Score predictions.jsonl against a dataset and write report.json.
    Evaluate {
        dataset: PathBuf,
        predictions: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitSelector::All)]
        split: SplitSelector,
        /// Output directory (default: `evaluation/` next to the predictions file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Handling of predictions with no readable score.
        #[arg(long, value_enum, default_value_t = MissingPolicy::Skip)]
        missing: MissingPolicy,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Print the tables of an existing report.json.
    Report { report: PathBuf },
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Forge { config, out, min_readers } => {
            let config = Config::load(&config)?;
            let summary = cmd_forge(
                &config,
                &ForgeOptions {
                    output_dir: out,
                    min_readers,
                },
            )?;
            println!("{summary}");
        }
        Command::Split { dataset, seed, mode } => println!("{}", cmd_split(&dataset, seed, mode)?),
        Command::GenerateBaseline {
            dataset,
            kind,
            out,
            eval_split,
            rate,
            seed,
            lexicon,
        } => {
            let n = cmd_generate(&GenerateOptions {
                dataset_dir: dataset,
                generator: GeneratorConfig {
                    kind,
                    corruption_rate: rate,
                    seed,
                },
                eval_split,
                out_dir: out.clone(),
                lexicon,
            })?;
            println!("wrote {n} predictions to {}", out.display());
        }
        Command::Evaluate {
            dataset,
            predictions,
            split,
            out,
            missing,
            lexicon,
        } => {
            let report = cmd_evaluate(&EvaluateOptions {
                dataset_dir: dataset,
                predictions,
                split,
                out_dir: out,
                missing,
                lexicon,
            })?;
            print!("{}", render_report(&report));
        }
        Command::Report { report } => print!("{}", cmd_report(&report)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = with_jobs(cli.jobs, || run(cli.command)).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

