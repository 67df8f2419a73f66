//! `abcboost` command-line interface.
//!
//! Exit codes: 0 on success, 1 on runtime failure (I/O, malformed input or
//! model files), 2 on usage and validation errors. Results go to stdout as
//! `key value` lines; diagnostics go to stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use abcboost_core::boost::argmax;
use abcboost_core::{
    error_count, error_curve, p_value, split_indices, train, Algorithm, TrainConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::io::{
    csv_lines, libsvm_lines, load_dataset, read_text, write_atomic, CsvOptions, Format,
};
use crate::manifest::{DatasetRef, RunManifest};
use crate::persist::{load_model_file, save_model_file, sha256_hex, ModelFile};

/// Environment variable read for the default `--threads` value.
pub const THREADS_ENV: &str = "ABCBOOST_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "abcboost",
    version,
    about = "Multi-class tree boosting: mart, logitboost and their abc variants"
)]
pub struct Cli {
    /// Worker threads; results are identical for every value.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model.
    Train(TrainArgs),
    /// Write per-row predicted classes and scores as CSV.
    Predict(PredictArgs),
    /// Count test misclassifications.
    Evaluate(EvaluateArgs),
    /// One-sided p-value that method 2 has a lower error rate than method 1.
    Compare(CompareArgs),
    /// Seeded random halving of a data file.
    Split(SplitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Mart,
    AbcMart,
    Logitboost,
    AbcLogitboost,
    ClassicLogitboost,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Mart => Algorithm::Mart,
            AlgoArg::AbcMart => Algorithm::AbcMart,
            AlgoArg::Logitboost => Algorithm::Logitboost,
            AlgoArg::AbcLogitboost => Algorithm::AbcLogitboost,
            AlgoArg::ClassicLogitboost => Algorithm::ClassicLogitboost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Libsvm,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Libsvm => Format::Libsvm,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// 0-based label column (CSV only).
    #[arg(long, default_value_t = 0)]
    pub label_column: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    #[arg(long)]
    pub train: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Declared number of classes (CSV only); inferred when omitted.
    #[arg(long)]
    pub num_classes: Option<usize>,
    /// Terminal nodes per tree.
    #[arg(short = 'J', default_value_t = 20)]
    pub leaves: usize,
    /// Shrinkage.
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    /// Boosting iterations.
    #[arg(short = 'M')]
    pub iterations: usize,
    /// Test set, evaluated after every iteration.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    /// Response bound for classic-logitboost.
    #[arg(long, default_value_t = 4.0)]
    pub zmax: f64,
    /// Stop once the training loss falls below this.
    #[arg(long, default_value_t = 1e-10)]
    pub loss_stop: f64,
    #[arg(long)]
    pub model: PathBuf,
    /// Per-iteration `iteration,train_loss,test_errors` CSV (needs --test).
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Run manifest path; defaults to `<model>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub format: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub format: DataArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Error counts of method 1 and method 2.
    #[arg(long, num_args = 2, value_names = ["E1", "E2"])]
    pub errors: Vec<u64>,
    /// Test set size.
    #[arg(long)]
    pub n: u64,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub format: DataArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_a: PathBuf,
    #[arg(long)]
    pub out_b: PathBuf,
    /// Index manifest path; defaults to `<out-a>.split.txt`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        use abcboost_core::Error as Core;
        match &e {
            Error::Core(
                Core::TooFewClasses { .. }
                | Core::DimensionMismatch { .. }
                | Core::InvalidParameter { .. }
                | Core::InvalidCounts { .. }
                | Core::LabelOutOfRange { .. },
            ) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<abcboost_core::Error> for CliError {
    fn from(e: abcboost_core::Error) -> Self {
        Error::Core(e).into()
    }
}

type CmdResult = Result<String, CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Runs a parsed command on a pool of `cli.threads` workers and returns its
/// stdout text.
pub fn execute(cli: &Cli) -> CmdResult {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Train(a) => cmd_train(a, cli.threads),
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Split(a) => cmd_split(a),
    })
}

fn csv_options(data: &DataArgs, num_classes: Option<usize>) -> CsvOptions {
    CsvOptions {
        label_column: data.label_column,
        num_classes,
    }
}

fn dataset_ref(path: &Path) -> Result<DatasetRef, CliError> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(DatasetRef {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

fn manifest_path(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_train(args: &TrainArgs, threads: usize) -> CmdResult {
    let started = Instant::now();
    let algorithm: Algorithm = args.algo.into();
    let config = TrainConfig {
        algorithm,
        max_leaves: args.leaves,
        shrinkage: args.nu,
        iterations: args.iterations,
        min_leaf: args.min_leaf,
        z_max: args.zmax,
        loss_stop: args.loss_stop,
    };
    config.validate()?;
    if args.curve.is_some() && args.test.is_none() {
        return Err(CliError::Usage("--curve needs --test".into()));
    }
    let format = args.data.format.into();
    let train_data = load_dataset(
        &args.train,
        format,
        csv_options(&args.data, args.num_classes),
        None,
        None,
    )?;
    let k = train_data.dataset.num_classes();
    if k < algorithm.min_classes() {
        return Err(CliError::Usage(format!(
            "{algorithm} needs K >= {} classes; {} has K = {k}",
            algorithm.min_classes(),
            args.train.display()
        )));
    }
    let test_data = match &args.test {
        Some(path) => Some(load_dataset(
            path,
            format,
            csv_options(&args.data, Some(k)),
            Some(&train_data.label_map),
            Some(train_data.dataset.num_features()),
        )?),
        None => None,
    };
    let (model, log) = train(
        &config,
        &train_data.dataset,
        test_data.as_ref().map(|t| &t.dataset),
    )?;

    let file = ModelFile {
        model,
        class_labels: train_data.label_map.clone(),
    };
    save_model_file(&file, &args.model)?;
    if let Some(curve) = &args.curve {
        let mut csv = String::from("iteration,train_loss,test_errors\n");
        for p in error_curve(&log)? {
            let _ = writeln!(csv, "{},{},{}", p.iteration, p.train_loss, p.test_errors);
        }
        write_atomic(curve, csv.as_bytes())?;
    }

    let final_loss = log.losses.last().copied().unwrap_or(log.initial_loss);
    let final_errors = log.monitor_errors.last().copied();
    let manifest = RunManifest {
        command: "train".into(),
        algorithm: algorithm.name().into(),
        max_leaves: config.max_leaves,
        shrinkage: config.shrinkage,
        iterations_requested: config.iterations,
        min_leaf: config.min_leaf,
        z_max: config.z_max,
        loss_stop: config.loss_stop,
        format: match format {
            Format::Csv => "csv",
            Format::Libsvm => "libsvm",
        }
        .into(),
        label_column: args.data.label_column,
        threads,
        train: dataset_ref(&args.train)?,
        test: args.test.as_deref().map(dataset_ref).transpose()?,
        model: dataset_ref(&args.model)?,
        class_labels: train_data.label_map,
        seed: None,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        iterations_completed: log.losses.len(),
        initial_train_loss: log.initial_loss,
        final_train_loss: final_loss,
        final_test_errors: final_errors,
        test_rows: test_data.as_ref().map(|t| t.dataset.num_samples()),
    };
    let manifest_out = args
        .manifest
        .clone()
        .unwrap_or_else(|| manifest_path(&args.model, ".manifest.json"));
    manifest.write(&manifest_out)?;

    let mut out = String::new();
    let _ = writeln!(out, "iterations {}", log.losses.len());
    let _ = writeln!(out, "train_loss {final_loss}");
    if let (Some(e), Some(t)) = (final_errors, &test_data) {
        let _ = writeln!(out, "test_errors {e}");
        let _ = writeln!(out, "test_rows {}", t.dataset.num_samples());
    }
    Ok(out)
}

fn load_for_model(
    file: &ModelFile,
    path: &Path,
    data: &DataArgs,
) -> Result<abcboost_core::Dataset, CliError> {
    let model = &file.model;
    let loaded = load_dataset(
        path,
        data.format.into(),
        csv_options(data, Some(model.num_classes())),
        Some(&file.class_labels),
        Some(model.num_features()),
    )?;
    let ds = loaded.dataset;
    if ds.num_features() != model.num_features() {
        return Err(CliError::Usage(format!(
            "{} has {} features, the model expects {}",
            path.display(),
            ds.num_features(),
            model.num_features()
        )));
    }
    Ok(ds)
}

pub fn cmd_predict(args: &PredictArgs) -> CmdResult {
    let file = load_model_file(&args.model)?;
    let model = &file.model;
    let ds = load_for_model(&file, &args.data, &args.format)?;
    let k = model.num_classes();
    let mut csv = String::from("row,predicted_class");
    for c in 0..k {
        let _ = write!(csv, ",score_{c}");
    }
    csv.push('\n');
    let mut scores = vec![0.0; k];
    for (i, x) in ds.rows().enumerate() {
        scores.fill(0.0);
        model.accumulate_scores(x, &mut scores);
        let _ = write!(csv, "{i},{}", argmax(&scores));
        for s in &scores {
            let _ = write!(csv, ",{s}");
        }
        csv.push('\n');
    }
    write_atomic(&args.out, csv.as_bytes())?;
    Ok(format!("rows {}\n", ds.num_samples()))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CmdResult {
    let file = load_model_file(&args.model)?;
    let ds = load_for_model(&file, &args.data, &args.format)?;
    let report = error_count(&file.model, &ds)?;
    Ok(format!(
        "test_errors {}\ntest_rows {}\nerror_rate {}\n",
        report.error_count, report.n_test, report.error_rate
    ))
}

pub fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let [e1, e2] = args.errors[..] else {
        return Err(CliError::Usage("--errors takes two counts".into()));
    };
    let p = p_value(e1, e2, args.n)?;
    Ok(format!("{p:.3e}\n"))
}

pub fn cmd_split(args: &SplitArgs) -> CmdResult {
    let text = read_text(&args.data)?;
    let format: Format = args.format.format.into();
    // Validates the whole file before anything is written.
    load_dataset(
        &args.data,
        format,
        csv_options(&args.format, None),
        None,
        None,
    )?;
    let lines = match format {
        Format::Csv => csv_lines(&text),
        Format::Libsvm => libsvm_lines(&text),
    };
    let (a, b) = split_indices(lines.records.len(), args.seed)?;
    let write_half = |path: &Path, rows: &[usize]| -> Result<(), CliError> {
        let mut out = String::new();
        if let Some((_, h)) = lines.header {
            out.push_str(h);
            out.push('\n');
        }
        for &r in rows {
            out.push_str(lines.records[r].1);
            out.push('\n');
        }
        Ok(write_atomic(path, out.as_bytes())?)
    };
    write_half(&args.out_a, &a)?;
    write_half(&args.out_b, &b)?;

    let mut manifest = String::from("# abcboost split manifest: 0-based data row indices\n");
    let _ = writeln!(manifest, "seed {}", args.seed);
    let _ = writeln!(manifest, "source {}", args.data.display());
    let _ = writeln!(manifest, "source_sha256 {}", sha256_hex(text.as_bytes()));
    let _ = writeln!(manifest, "rows {}", lines.records.len());
    for (name, path, rows) in [("a", &args.out_a, &a), ("b", &args.out_b, &b)] {
        let _ = writeln!(
            manifest,
            "partition {name} {} {}",
            rows.len(),
            path.display()
        );
        for r in rows {
            let _ = writeln!(manifest, "{r}");
        }
    }
    let manifest_out = args
        .manifest
        .clone()
        .unwrap_or_else(|| manifest_path(&args.out_a, ".split.txt"));
    write_atomic(&manifest_out, manifest.as_bytes())?;
    Ok(format!("a {}\nb {}\n", a.len(), b.len()))
}
