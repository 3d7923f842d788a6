use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use log::info;
use seqlearn::corpus::parse_labeled_lines;
use seqlearn::cv::cross_validate;
use seqlearn::eval::roc_points;
use seqlearn::{
    Corpus, ElasticNet, EvalReport, Label, LossKind, Model, SearchConfig, TokenMode, TrainerConfig,
    Traversal,
};

/// Sequence classification with wildcard subsequence features.
#[derive(Parser, Debug)]
#[command(name = "seqlearn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model from a labeled file and write it to MODEL.
    Train {
        #[command(flatten)]
        opts: TrainOpts,
        /// Training file, one "label<TAB>sequence" per line.
        input: PathBuf,
        /// Output model file.
        model: PathBuf,
    },
    /// Score sequences; prints "score<TAB>label[<TAB>probability]" per input line.
    Predict {
        /// Token type the input is expected to use; must match the model.
        #[arg(short = 'n', long = "token-type")]
        token_type: Option<TokenMode>,
        model: PathBuf,
        /// Sequences, labeled ("label<TAB>sequence") or bare.
        input: PathBuf,
    },
    /// Score a labeled file and print AUC, AUC50, BER and confusion counts.
    Eval {
        model: PathBuf,
        input: PathBuf,
        /// Also write ROC points (fpr<TAB>tpr) to this file.
        #[arg(long)]
        roc: Option<PathBuf>,
    },
    /// Stratified k-fold cross-validation.
    Cv {
        #[command(flatten)]
        opts: TrainOpts,
        /// Number of folds.
        #[arg(allow_negative_numbers = true, short = 'k', long = "folds", default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
        folds: u64,
        /// Seed for the fold shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct TrainOpts {
    /// Objective: logistic or squared_hinge (alias svm).
    #[arg(short = 'o', long = "objective", default_value = "logistic")]
    objective: LossKind,
    /// Maximum run of consecutive wildcards in a feature.
    #[arg(
        allow_negative_numbers = true,
        short = 'g',
        long = "maxgap",
        default_value_t = 0
    )]
    maxgap: usize,
    /// Regularization weight.
    #[arg(allow_negative_numbers = true, short = 'C', long = "regularizer", default_value_t = 1.0, value_parser = non_negative)]
    c: f64,
    /// Weight of l1 against l2 in the elastic-net penalty.
    #[arg(allow_negative_numbers = true, short = 'a', long = "alpha", default_value_t = 0.5, value_parser = unit_interval)]
    alpha: f64,
    /// Minimum feature length.
    #[arg(allow_negative_numbers = true, short = 'l', long = "minpat", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    minpat: u64,
    /// Maximum feature length [default: longest training sequence].
    #[arg(allow_negative_numbers = true, short = 'L', long = "maxpat", value_parser = clap::value_parser!(u64).range(1..))]
    maxpat: Option<u64>,
    /// Minimum number of sequences containing a feature.
    #[arg(allow_negative_numbers = true, short = 'm', long = "minsup", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    minsup: u64,
    /// Token type: char or word (whitespace delimited).
    #[arg(short = 'n', long = "token-type", default_value = "char")]
    token_type: TokenMode,
    /// Search tree traversal: dfs or bfs.
    #[arg(short = 'r', long = "traversal", default_value = "dfs")]
    traversal: Traversal,
    /// Stop when the mean absolute change in margins falls below this.
    #[arg(allow_negative_numbers = true, short = 'c', long = "convergence", default_value_t = 0.005, value_parser = positive)]
    convergence: f64,
    /// Maximum number of iterations.
    #[arg(allow_negative_numbers = true, short = 'T', long = "maxitr", default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    maxitr: u64,
    /// 0 quiet, 1 per-iteration summary, 2 search statistics.
    #[arg(
        allow_negative_numbers = true,
        short = 'v',
        long = "verbosity",
        default_value_t = 1
    )]
    verbosity: u8,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is negative"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

impl TrainOpts {
    fn config(&self) -> TrainerConfig {
        TrainerConfig {
            loss: self.objective,
            penalty: ElasticNet::new(self.c, self.alpha).expect("validated by the parser"),
            search: SearchConfig {
                maxgap: self.maxgap,
                minpat: self.minpat as usize,
                maxpat: self.maxpat.map(|m| m as usize),
                minsup: self.minsup as usize,
                traversal: self.traversal,
                ..SearchConfig::default()
            },
            convergence_threshold: self.convergence,
            max_iterations: self.maxitr as usize,
            verbosity: self.verbosity,
        }
    }

    fn check(&self) -> Result<(), clap::Error> {
        match self.maxpat {
            Some(maxpat) if maxpat < self.minpat => Err(usage(format!(
                "--maxpat ({maxpat}) must be at least --minpat ({})",
                self.minpat
            ))),
            _ => Ok(()),
        }
    }
}

fn usage(message: String) -> clap::Error {
    Cli::command().error(ErrorKind::ArgumentConflict, message)
}

fn init_logging(verbosity: u8) {
    let level = match verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

enum Failure {
    Usage(clap::Error),
    Data(seqlearn::Error),
    Output(io::Error),
}

impl From<seqlearn::Error> for Failure {
    fn from(e: seqlearn::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Output(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|source| {
        Failure::Data(seqlearn::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn run_train(opts: &TrainOpts, input: &Path, model_path: &Path) -> Result<(), Failure> {
    opts.check().map_err(Failure::Usage)?;
    let corpus = Corpus::load(input, opts.token_type)?;
    let (pos, neg) = corpus.class_counts();
    info!(
        "loaded {} sequences ({pos} positive, {neg} negative), {} symbols",
        corpus.len(),
        corpus.vocab().len()
    );
    let outcome = seqlearn::train(&corpus, &opts.config())?;
    info!(
        "stopped after {} iterations ({:?}), objective {:.6}, {} features",
        outcome.state.iteration,
        outcome.stop,
        outcome.state.objective,
        outcome.model.len()
    );
    outcome.model.save(model_path)?;
    Ok(())
}

/// Splits a predict line into an optional label and the sequence text.
fn split_line(line: &str) -> (Option<Label>, &str) {
    if let Some((head, rest)) = line.split_once('\t') {
        if let Ok(label) = head.trim().parse::<Label>() {
            return (Some(label), rest);
        }
    }
    (None, line)
}

fn run_predict(
    token_type: Option<TokenMode>,
    model_path: &Path,
    input: &Path,
) -> Result<(), Failure> {
    let model = Model::load(model_path)?;
    if let Some(mode) = token_type {
        if mode != model.mode() {
            return Err(Failure::Usage(usage(format!(
                "-n/--token-type {mode} does not match the model's tokenization ({})",
                model.mode()
            ))));
        }
    }
    let content = read(input)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for (i, raw) in content.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let (_, text) = split_line(line);
        let score = model.score(text).map_err(|e| seqlearn::Error::Load {
            line: i + 1,
            message: e.to_string(),
        })?;
        let p = model.predict_score(score);
        match p.probability {
            Some(prob) => writeln!(out, "{}\t{}\t{}", p.score, p.label.as_str(), prob)?,
            None => writeln!(out, "{}\t{}", p.score, p.label.as_str())?,
        }
    }
    out.flush()?;
    Ok(())
}

fn scored_file(model: &Model, input: &Path) -> Result<Vec<(f64, Label)>, Failure> {
    let content = read(input)?;
    let mut items = Vec::new();
    for line in parse_labeled_lines(&content)? {
        let score = model.score(line.text).map_err(|e| seqlearn::Error::Load {
            line: line.line,
            message: e.to_string(),
        })?;
        items.push((score, line.label));
    }
    Ok(items)
}

fn run_eval(model_path: &Path, input: &Path, roc: Option<&Path>) -> Result<(), Failure> {
    let model = Model::load(model_path)?;
    let items = scored_file(&model, input)?;
    let report = EvalReport::from_scores(&items)?;
    let c = report.confusion;
    let mut out = io::stdout().lock();
    writeln!(out, "auc\tauc50\tber\ttp\tfp\ttn\tfn")?;
    writeln!(
        out,
        "{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}\t{}",
        report.auc, report.auc50, report.ber, c.tp, c.fp, c.tn, c.fn_
    )?;
    if let Some(path) = roc {
        let mut text = String::from("fpr\ttpr\n");
        for (fpr, tpr) in roc_points(&items)? {
            text.push_str(&format!("{fpr}\t{tpr}\n"));
        }
        fs::write(path, text).map_err(|source| {
            Failure::Data(seqlearn::Error::Io {
                path: path.to_path_buf(),
                source,
            })
        })?;
    }
    Ok(())
}

fn run_cv(opts: &TrainOpts, folds: usize, seed: u64, input: &Path) -> Result<(), Failure> {
    opts.check().map_err(Failure::Usage)?;
    let corpus = Corpus::load(input, opts.token_type)?;
    let report = cross_validate(&corpus, &opts.config(), folds, seed)?;
    let mut out = io::stdout().lock();
    writeln!(out, "fold\tfeatures\tauc\tauc50\tber")?;
    for f in &report.folds {
        writeln!(
            out,
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}",
            f.fold + 1,
            f.features,
            f.report.auc,
            f.report.auc50,
            f.report.ber
        )?;
    }
    let m = report.mean;
    writeln!(out, "mean\t-\t{:.4}\t{:.4}\t{:.4}", m.auc, m.auc50, m.ber)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbosity = match &cli.command {
        Command::Train { opts, .. } | Command::Cv { opts, .. } => opts.verbosity,
        _ => 1,
    };
    init_logging(verbosity);

    let result = match &cli.command {
        Command::Train { opts, input, model } => run_train(opts, input, model),
        Command::Predict {
            token_type,
            model,
            input,
        } => run_predict(*token_type, model, input),
        Command::Eval { model, input, roc } => run_eval(model, input, roc.as_deref()),
        Command::Cv {
            opts,
            folds,
            seed,
            input,
        } => run_cv(opts, *folds as usize, *seed, input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => e.exit(),
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Output(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
