use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use udlearn::error::Result;
use udlearn::eval::corpus_uas;
use udlearn::harness::{emit_reports, run_experiment, ExperimentConfig};
use udlearn::metrics::{ComplexityMode, LmUnit, MetricOptions, MetricReport};
use udlearn::parser::{parse_corpus, train_with_stats, Hyperparameters, Model};
use udlearn::transform::{apply_transformation_with, TransformOptions, TransformationId};
use udlearn::treebank::{parse_conllu, write_conllu, Sentence};

#[derive(Parser)]
#[command(name = "udlearn", version, about = "UD annotation-scheme conversion, parsing and learnability metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Form,
    Upos,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComplexityArg {
    Global,
    PerSentence,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a treebank with one transformation.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        transformation: TransformationId,
        /// Relations kept on the noun when a copula is promoted.
        #[arg(long, value_delimiter = ',')]
        copula_noun_labels: Option<Vec<String>>,
    },
    /// Train a parser.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        explore_k: usize,
        #[arg(long, default_value_t = 0.9)]
        explore_p: f64,
        #[arg(long)]
        model: PathBuf,
    },
    /// Parse a treebank with a trained model.
    Parse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Unlabeled attachment score, punctuation excluded.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Learnability metrics of a treebank.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        #[arg(long, value_enum, default_value = "form")]
        lm_unit: UnitArg,
        #[arg(long, value_enum, default_value = "global")]
        complexity: ComplexityArg,
    },
    /// Run an experiment grid from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_corpus(path: &PathBuf) -> Result<Vec<Sentence>> {
    let text = fs::read_to_string(path)?;
    parse_conllu(&text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Transform {
            input,
            output,
            transformation,
            copula_noun_labels,
        } => {
            let corpus = read_corpus(&input)?;
            let mut options = TransformOptions::default();
            if let Some(labels) = copula_noun_labels {
                options.copula_noun_labels = labels;
            }
            let result = apply_transformation_with(&corpus, transformation, &options)?;
            fs::write(&output, write_conllu(&result.sentences)?)?;
            println!(
                "{}",
                json!({
                    "changed": result.changed,
                    "arcs_rewritten": result.arcs_rewritten,
                    "repairs_applied": result.repairs_applied,
                })
            );
        }
        Command::Train {
            train,
            dev,
            epochs,
            seed,
            explore_k,
            explore_p,
            model,
        } => {
            let train_set = read_corpus(&train)?;
            let dev_set = match &dev {
                Some(p) => read_corpus(p)?,
                None => Vec::new(),
            };
            let hp = Hyperparameters {
                epochs,
                explore_k,
                explore_p,
            };
            let outcome = train_with_stats(&train_set, &dev_set, &hp, seed)?;
            outcome.model.save(&model)?;
            for e in &outcome.epochs {
                match e.dev_uas {
                    Some(uas) => eprintln!("epoch {}: {} updates, dev UAS {:.2}", e.epoch, e.updates, uas),
                    None => eprintln!("epoch {}: {} updates", e.epoch, e.updates),
                }
            }
            eprintln!("kept epoch {}", outcome.best_epoch);
        }
        Command::Parse {
            model,
            input,
            output,
        } => {
            let model = Model::load(&model)?;
            let corpus = read_corpus(&input)?;
            fs::write(&output, write_conllu(&parse_corpus(&model, &corpus))?)?;
        }
        Command::Evaluate { gold, pred } => {
            let count = corpus_uas(&read_corpus(&gold)?, &read_corpus(&pred)?)?;
            println!(
                "{}",
                json!({
                    "uas": count.percent(),
                    "correct": count.correct,
                    "total": count.total,
                })
            );
        }
        Command::Metrics {
            input,
            out,
            lm_unit,
            complexity,
        } => {
            let corpus = read_corpus(&input)?;
            let options = MetricOptions {
                lm_unit: match lm_unit {
                    UnitArg::Form => LmUnit::Form,
                    UnitArg::Upos => LmUnit::Upos,
                },
                complexity: match complexity {
                    ComplexityArg::Global => ComplexityMode::Global,
                    ComplexityArg::PerSentence => ComplexityMode::PerSentence,
                },
            };
            let id = input.display().to_string();
            let report = MetricReport::compute(&id, &corpus, options);
            match out {
                OutFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
                OutFormat::Tsv => {
                    println!("{}", MetricReport::TSV_HEADER);
                    println!("{}", report.tsv_row());
                }
            }
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.check_paths()?;
            let report = run_experiment(&cfg)?;
            emit_reports(&report, &cfg.output, cfg.top_k)?;
            eprintln!(
                "{} cells ({} from cache), {} trainings, {} failed",
                report.cells.len(),
                report.cells_from_cache,
                report.trainings_executed,
                report.summary.errors
            );
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::FAILURE
        }
    }
}
