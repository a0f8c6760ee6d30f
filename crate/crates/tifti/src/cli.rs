//! Command-line interface.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use tifti_core::cascade::{CascadeConfig, IntervalPrediction, Method};
use tifti_core::corpus::PatientDrugExample;
use tifti_core::date::DateStamp;
use tifti_core::eval::{evaluate, run_ablation, train_models, MethodResult, TrainedModels};
use tifti_core::synth::generate_corpus;
use tifti_core::temporal::tag_sentence;

use crate::config::{RunConfig, Settings};
use crate::corpus_io::{read_corpus, require_gold, write_corpus};
use crate::error::{Error, Result};
use crate::model_io::{
    read_expr_model, read_seq_model, write_expr_model, write_seq_model, EXPR_FILE, SEQ_ORIGINAL_FILE,
    SEQ_SIMULATED_FILE,
};
use crate::pipeline::predict_all;
use crate::report::{render_table, write_predictions, write_report_dir};

#[derive(Debug, Parser)]
#[command(name = "tifti", version, about = "Drug treatment interval extraction from timestamped clinic notes")]
pub struct Cli {
    /// Flat TOML file of settings; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the merged settings to stderr before running.
    #[arg(long, global = true)]
    pub verbose: bool,
    #[command(flatten)]
    pub settings: Settings,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic labeled corpus.
    Generate {
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Train both sequence labelers and the expression classifier.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Predict intervals with one method.
    Predict {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score methods against a labeled corpus. Evaluates all four methods
    /// unless a method is set by flag or config file.
    Evaluate {
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        models: PathBuf,
        /// Directory for table.txt, summary.csv, agreement.csv and predictions.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Split, train and evaluate the four methods. Generates a corpus from
    /// the generator settings when `--corpus` is absent.
    Ablate {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Directory for the corpus, models and reports.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the time expressions found in a text snippet.
    Tag {
        #[arg(long)]
        text: String,
        /// Note date, YYYY-MM-DD.
        #[arg(long)]
        anchor: String,
    },
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let explicit = match &cli.config {
        Some(path) => Settings::load(path)?.overlay(&cli.settings),
        None => cli.settings.clone(),
    };
    let merged = Settings::defaults().overlay(&explicit);
    if cli.verbose {
        let _ = write!(err, "# settings\n{}", merged.to_toml());
    }
    let config = RunConfig::resolve(merged)?;
    match cli.command {
        Command::Generate { out: path } => {
            let corpus = generate_corpus(&config.gen)?;
            write_corpus(&path, &corpus)
        }
        Command::Train { corpus, out_dir } => {
            let examples = read_corpus(&corpus)?;
            require_gold(&corpus, &examples)?;
            let models = train_models(&examples, &config.pipeline)?;
            write_models(&out_dir, &models)
        }
        Command::Predict { corpus, models, out: path } => {
            let examples = read_corpus(&corpus)?;
            let models = read_models(&models)?;
            let method = config.cascade.method;
            let preds =
                predict_all(&examples, models.labeler_for(method), &models.expr, &config.cascade, config.jobs)?;
            write_predictions(&path, &examples, method, &preds)
        }
        Command::Evaluate { gold, models, out_dir } => {
            let gold = gold.ok_or_else(|| Error::Usage("evaluate requires --gold <labeled corpus>".into()))?;
            let examples = read_corpus(&gold)?;
            let golds = require_gold(&gold, &examples)?;
            let models = read_models(&models)?;
            let methods = match explicit.method {
                Some(_) => vec![config.cascade.method],
                None => Method::ALL.to_vec(),
            };
            let mut rows = Vec::with_capacity(methods.len());
            for method in methods {
                let cascade = CascadeConfig { method, ..config.cascade };
                let predictions =
                    predict_all(&examples, models.labeler_for(method), &models.expr, &cascade, config.jobs)?;
                let intervals: Vec<IntervalPrediction> = predictions.iter().map(|p| p.interval).collect();
                let report = evaluate(&intervals, &golds, &config.pipeline.windows)?;
                rows.push(MethodResult { method, report, predictions });
            }
            if let Some(dir) = out_dir {
                write_report_dir(&dir, &rows)?;
                for row in &rows {
                    let path = dir.join(format!("predictions-{}.jsonl", row.method.flag()));
                    write_predictions(&path, &examples, row.method, &row.predictions)?;
                }
            }
            write_out(out, &render_table(&rows))
        }
        Command::Ablate { corpus, out_dir } => {
            let examples = match &corpus {
                Some(path) => labeled(path)?,
                None => generate_corpus(&config.gen)?,
            };
            let result = run_ablation(&examples, &config.pipeline)?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                if corpus.is_none() {
                    write_corpus(&dir.join("corpus.jsonl"), &examples)?;
                }
                write_models(&dir.join("models"), &result.models)?;
                write_report_dir(&dir, &result.rows)?;
            }
            let header = format!("# dev {} examples, test {} examples\n", result.n_dev, result.n_test);
            write_out(out, &(header + &render_table(&result.rows)))
        }
        Command::Tag { text, anchor } => {
            let anchor: DateStamp = anchor.parse()?;
            let mut lines = String::new();
            for m in tag_sentence(&text, anchor) {
                lines.push_str(&format!("{}\t{}\t{}\n", &text[m.start..m.end], m.bucket, m.mapped_date));
            }
            write_out(out, &lines)
        }
    }
}

pub fn write_models(dir: &Path, models: &TrainedModels) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_seq_model(&dir.join(SEQ_ORIGINAL_FILE), &models.seq_original)?;
    write_seq_model(&dir.join(SEQ_SIMULATED_FILE), &models.seq_simulated)?;
    write_expr_model(&dir.join(EXPR_FILE), &models.expr)
}

pub fn read_models(dir: &Path) -> Result<TrainedModels> {
    Ok(TrainedModels {
        seq_original: read_seq_model(&dir.join(SEQ_ORIGINAL_FILE))?,
        seq_simulated: read_seq_model(&dir.join(SEQ_SIMULATED_FILE))?,
        expr: read_expr_model(&dir.join(EXPR_FILE))?,
    })
}

/// Reads a corpus whose every example carries gold.
pub fn labeled(path: &Path) -> Result<Vec<PatientDrugExample>> {
    let examples = read_corpus(path)?;
    require_gold(path, &examples)?;
    Ok(examples)
}
