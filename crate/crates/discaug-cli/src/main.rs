//! `discaug`: harvest discourse-marker augmentation samples, train the
//! attention-BiLSTM validator, and run imbalanced-classification
//! experiment grids.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 one or
//! more experiment cells failed (partial results still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use discaug::corpus::{self, Dataset, LoadMode};
use discaug::error::ErrorKind;
use discaug::models::{self, ClassifierKind, TrainConfig};
use discaug::pipeline::{
    augment, run_experiment, DatasetSource, ExperimentConfig, NeuralHyper, Setting, ValidatorSource,
};
use discaug::segmenter::MarkerSet;
use discaug::{checkpoint, Error};

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_CELLS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "discaug",
    about = "Discourse-marker data augmentation for imbalanced sentiment classification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)] // lives only for the duration of startup
enum Command {
    /// Train the attention-BiLSTM validator on a labeled TSV corpus.
    TrainValidator(TrainValidatorArgs),
    /// Generate swap/crop samples from a TSV corpus and write the
    /// augmented corpus.
    Augment(AugmentArgs),
    /// Run the (dataset x ratio x method x setting x seed) grid and write
    /// a CSV report.
    RunExperiment(RunExperimentArgs),
    /// Evaluate a saved model checkpoint on a TSV test set.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct TrainValidatorArgs {
    /// Labeled corpus, one `<label>\t<text>` per line
    #[arg(long)]
    input: PathBuf,
    /// Embedding dimension
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// LSTM hidden units per direction
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    /// Attention projection dimension
    #[arg(long, default_value_t = 16)]
    attn: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Optional pretrained word vectors (text format)
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Checkpoint output path (vocabulary lands beside it as `.vocab`)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AugmentArgs {
    /// Training corpus to augment, `<label>\t<text>` per line
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated lowercase marker tokens
    #[arg(long, default_value = "but,although,though,however,yet")]
    markers: String,
    /// Validator checkpoint; required unless --no-validate
    #[arg(long, required_unless_present = "no_validate")]
    validator: Option<PathBuf>,
    /// Keep every generated candidate without validator filtering
    #[arg(long)]
    no_validate: bool,
    /// Drop kept candidates whose validator confidence falls below this
    #[arg(long, default_value_t = 0.0)]
    min_confidence: f64,
    /// Augmented corpus output path
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct RunExperimentArgs {
    /// Positive-class file, one sentence per line (pair mode)
    #[arg(long, requires = "neg", conflicts_with = "tsv")]
    pos: Option<PathBuf>,
    /// Negative-class file, one sentence per line (pair mode)
    #[arg(long, requires = "pos")]
    neg: Option<PathBuf>,
    /// Labeled TSV corpus (alternative to --pos/--neg)
    #[arg(long)]
    tsv: Option<PathBuf>,
    /// Dataset name in the report; defaults to the input file stem
    #[arg(long)]
    name: Option<String>,
    /// Comma-separated imbalanced-ratio values
    #[arg(long, default_value = "5")]
    ir: String,
    /// Comma-separated subset of nb,lr,cnn,rnn
    #[arg(long, default_value = "nb,lr,cnn,rnn")]
    methods: String,
    /// Comma-separated subset of os,our+os,wo-val
    #[arg(long, default_value = "os,our+os")]
    settings: String,
    /// Number of replicate seeds per cell
    #[arg(long, default_value_t = 3)]
    seeds: u32,
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
    /// Validator checkpoint; omitted means one is trained per replicate
    #[arg(long)]
    validator: Option<PathBuf>,
    #[arg(long, default_value = "but,although,though,however,yet")]
    markers: String,
    #[arg(long, default_value_t = 0.0)]
    min_confidence: f64,
    /// Global seed every per-cell stream derives from
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Embedding dimension for cnn/rnn methods
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// RNN hidden units per direction
    #[arg(long, default_value_t = 256)]
    hidden: usize,
    /// Attention dimension for the rnn method
    #[arg(long, default_value_t = 32)]
    attn: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Dropout for the cnn method
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    /// Filters per width for the cnn method
    #[arg(long, default_value_t = 100)]
    filters: usize,
    /// CSV output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Model checkpoint (expects its `.vocab` sidecar next to it)
    #[arg(long)]
    model: PathBuf,
    /// Labeled TSV test set
    #[arg(long)]
    test: PathBuf,
}

fn exit_for(err: &Error) -> u8 {
    match err.kind() {
        ErrorKind::Config => EXIT_CONFIG,
        _ => EXIT_DATA,
    }
}

fn save_tsv(d: &Dataset, path: &PathBuf) -> discaug::Result<()> {
    let mut out = String::new();
    for s in &d.samples {
        out.push_str(&format!("{}\t{}\n", s.label, s.text()));
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })
}

fn train_validator(args: TrainValidatorArgs) -> Result<(), (u8, String)> {
    let fail = |e: Error| (exit_for(&e), e.to_string());
    let data = corpus::load_dataset(
        args.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into()),
        &LoadMode::Tsv(args.input.clone()),
    )
    .map_err(fail)?;
    let cfg = TrainConfig {
        embedding_dim: args.dim,
        hidden: args.hidden,
        attention_dim: args.attn,
        epochs: args.epochs,
        batch_size: args.batch,
        learning_rate: args.lr,
        embeddings_path: args.embeddings.clone(),
        ..TrainConfig::validator(args.seed)
    };
    let model = models::train(&data, &cfg).map_err(fail)?;
    checkpoint::save(&model, &args.out).map_err(fail)?;
    println!(
        "trained validator on {} samples, wrote {}",
        data.len(),
        args.out.display()
    );
    Ok(())
}

fn augment_cmd(args: AugmentArgs) -> Result<(), (u8, String)> {
    let fail = |e: Error| (exit_for(&e), e.to_string());
    let markers = MarkerSet::parse(&args.markers).map_err(fail)?;
    if !(0.0..=1.0).contains(&args.min_confidence) {
        return Err((EXIT_CONFIG, "min confidence must be in [0,1]".into()));
    }
    let data = corpus::load_dataset("train", &LoadMode::Tsv(args.input.clone())).map_err(fail)?;
    let validator = match (&args.validator, args.no_validate) {
        (_, true) => None,
        (Some(path), false) => Some(checkpoint::load(path).map_err(fail)?),
        (None, false) => unreachable!("clap enforces --validator unless --no-validate"),
    };
    let before = data.len();
    let augmented = augment(&data, &markers, validator.as_ref(), args.min_confidence);
    save_tsv(&augmented, &args.output).map_err(fail)?;
    println!(
        "kept {} generated samples ({} -> {}), wrote {}",
        augmented.len() - before,
        before,
        augmented.len(),
        args.output.display()
    );
    Ok(())
}

fn parse_list<T, F>(raw: &str, what: &str, parse: F) -> Result<Vec<T>, (u8, String)>
where
    F: Fn(&str) -> Result<T, String>,
{
    let items: Vec<T> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<_, _>>()
        .map_err(|e| (EXIT_CONFIG, e))?;
    if items.is_empty() {
        return Err((EXIT_CONFIG, format!("empty {what} list")));
    }
    Ok(items)
}

fn run_experiment_cmd(args: RunExperimentArgs) -> Result<u8, (u8, String)> {
    let fail = |e: Error| (exit_for(&e), e.to_string());

    let source = match (&args.tsv, &args.pos, &args.neg) {
        (Some(tsv), None, _) => {
            let name = args.name.clone().unwrap_or_else(|| stem(tsv));
            DatasetSource::Tsv {
                name,
                path: tsv.clone(),
            }
        }
        (None, Some(pos), Some(neg)) => {
            let name = args.name.clone().unwrap_or_else(|| stem(pos));
            DatasetSource::Pair {
                name,
                pos: pos.clone(),
                neg: neg.clone(),
            }
        }
        _ => {
            return Err((
                EXIT_CONFIG,
                "provide either --tsv or both --pos and --neg".into(),
            ))
        }
    };

    let irs = parse_list(&args.ir, "ir", |s| {
        s.parse::<u32>().map_err(|_| format!("bad ratio {s:?}"))
    })?;
    let methods = parse_list(&args.methods, "methods", |s| {
        ClassifierKind::parse(s).map_err(|e| e.to_string())
    })?;
    let settings = parse_list(&args.settings, "settings", |s| {
        Setting::parse(s).map_err(|e| e.to_string())
    })?;

    let mut cfg = ExperimentConfig::new(vec![source]);
    cfg.markers = MarkerSet::parse(&args.markers).map_err(fail)?;
    cfg.irs = irs;
    cfg.methods = methods;
    cfg.settings = settings;
    cfg.replicates = args.seeds;
    cfg.train_fraction = args.train_frac;
    cfg.global_seed = args.seed;
    cfg.min_confidence = args.min_confidence;
    cfg.validator = match &args.validator {
        Some(path) => ValidatorSource::Checkpoint(path.clone()),
        None => ValidatorSource::TrainPerReplicate,
    };
    cfg.classifier_hyper = NeuralHyper {
        embedding_dim: args.dim,
        hidden: args.hidden,
        attention_dim: args.attn,
        epochs: args.epochs,
        batch_size: args.batch,
        learning_rate: args.lr,
        dropout: args.dropout,
        n_filters: args.filters,
        filter_widths: vec![3, 4, 5],
    };

    let table = run_experiment(&cfg).map_err(fail)?;
    std::fs::write(&args.out, table.to_csv()).map_err(|source| {
        (
            EXIT_DATA,
            Error::Io {
                path: args.out.clone(),
                source,
            }
            .to_string(),
        )
    })?;
    let errors = table.cells.iter().filter(|c| c.accuracy.is_err()).count();
    println!(
        "wrote {} ({} cells, {} errors)",
        args.out.display(),
        table.cells.len(),
        errors
    );
    Ok(if table.has_errors() { EXIT_CELLS } else { 0 })
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<(), (u8, String)> {
    let fail = |e: Error| (exit_for(&e), e.to_string());
    let model = checkpoint::load(&args.model).map_err(fail)?;
    let test = corpus::load_dataset("test", &LoadMode::Tsv(args.test.clone())).map_err(fail)?;
    let accuracy = model.evaluate(&test).map_err(fail)?;
    println!("accuracy {accuracy:.4}");
    Ok(())
}

fn stem(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version are successful exits; bad flags are config errors
            let code = if err.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let outcome = match cli.command {
        Command::TrainValidator(args) => train_validator(args).map(|()| 0),
        Command::Augment(args) => augment_cmd(args).map(|()| 0),
        Command::RunExperiment(args) => run_experiment_cmd(args),
        Command::Evaluate(args) => evaluate_cmd(args).map(|()| 0),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
