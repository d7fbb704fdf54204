use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use esc1d::analysis::{
    conv_kernels, kernel_spectra, probe_frequencies, probe_response, sort_by_central_frequency, ProbeActivation,
    ProbeOptions,
};
use esc1d::audio::{read_wav, resample, FramingPolicy, WindowKind};
use esc1d::fsutil::write_atomic;
use esc1d::gammatone::{bin_frequency, fft_magnitude, padded_len, GammatoneBank};
use esc1d::harness::{
    evaluate, gen_synthetic, load_clips, load_manifest, run_cv, run_holdout, Clip, DatasetManifest, EvalReport,
    TrainConfig, CLASS_NAMES, N_FOLDS, TARGET_SAMPLE_RATE,
};
use esc1d::inference::{classify_clip_with_id, AggregationRule};
use esc1d::model::{read_checkpoint, write_checkpoint, ConfigName, Model, ModelConfig};
use esc1d::nn::Mode;
use esc1d::optim::AdadeltaConfig;
use esc1d::Error;

/// End-to-end 1D CNN toolkit for environmental sound classification.
#[derive(Debug, Parser)]
#[command(name = "esc1d", version)]
struct Cli {
    /// Seed for weight initialization, shuffling and dropout.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for framing and inference (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// One of error, warn, info, debug, trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the 10-fold protocol (or a single split with --holdout).
    Train(TrainArgs),
    /// Evaluate a checkpoint on folds of a dataset.
    Eval(EvalArgs),
    /// Classify WAV files and print clip_id, class and scores as CSV.
    Classify(ClassifyArgs),
    /// Filter inspection exports.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Write a deterministic synthetic 10-class dataset.
    GenSynth(GenSynthArgs),
    /// Print the trainable parameter count of a configuration.
    Params(ParamsArgs),
}

#[derive(Debug, Args)]
struct FramingArgs {
    /// Frame length in samples (default: the model's input length).
    #[arg(long)]
    frame_len: Option<usize>,
    /// Frame overlap in percent: 0, 25, 50 or 75.
    #[arg(long, default_value_t = 50)]
    overlap: u32,
    /// Window applied to each frame: rect or hamming.
    #[arg(long, default_value = "rect")]
    window: String,
    /// Clip decision rule: vote or sum.
    #[arg(long, default_value = "sum")]
    rule: String,
}

impl FramingArgs {
    fn policy(&self, input_len: usize) -> Result<FramingPolicy, Error> {
        let frame_len = self.frame_len.unwrap_or(input_len);
        if frame_len != input_len {
            return Err(Error::InvalidArgument(format!(
                "--frame-len {frame_len} does not match model input length {input_len}"
            )));
        }
        FramingPolicy::from_percent(frame_len, self.overlap, WindowKind::from_str(&self.window)?, true)
    }

    fn rule(&self) -> Result<AggregationRule, Error> {
        AggregationRule::from_str(&self.rule)
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Model configuration.
    #[arg(long, default_value = "in16000")]
    config: String,
    /// Dataset root holding metadata/UrbanSound8K.csv and audio/fold1..fold10.
    #[arg(long)]
    data: PathBuf,
    /// Output directory for report.json, confusion.csv (and model.ckpt with --holdout).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    framing: FramingArgs,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    #[arg(long, default_value_t = 100)]
    max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    #[arg(long, default_value_t = 10)]
    patience: usize,
    /// Adadelta learning rate.
    #[arg(long, default_value_t = 1.0)]
    lr: f64,
    /// Adadelta decay.
    #[arg(long, default_value_t = 0.95)]
    rho: f64,
    /// Adadelta epsilon.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Train a single split with this test fold instead of all ten.
    #[arg(long)]
    holdout: Option<u8>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Dataset root holding metadata/UrbanSound8K.csv and audio/.
    #[arg(long)]
    data: PathBuf,
    /// Folds to evaluate (repeatable; default all).
    #[arg(long = "fold")]
    folds: Vec<u8>,
    /// Output directory for report.json and confusion.csv.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    framing: FramingArgs,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    framing: FramingArgs,
    #[arg(required = true)]
    wavs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelSource {
    /// Checkpoint to analyze.
    #[arg(long, conflicts_with = "config")]
    model: Option<PathBuf>,
    /// Build a fresh model instead of loading one.
    #[arg(long)]
    config: Option<String>,
    /// First-layer filter count for a freshly built model.
    #[arg(long, requires = "config")]
    widen_cl1: Option<usize>,
}

impl ModelSource {
    fn load(&self, seed: u64) -> Result<Model, Error> {
        let mut model = match (&self.model, &self.config) {
            (Some(path), _) => open_model(path)?,
            (None, Some(name)) => {
                let mut config = ModelConfig::new(ConfigName::from_str(name)?);
                if let Some(n) = self.widen_cl1 {
                    config = config.widen_first_layer(n)?;
                }
                Model::from_config(config, seed)?
            }
            (None, None) => return Err(Error::InvalidArgument("one of --model or --config is required".into())),
        };
        model.set_mode(Mode::Eval);
        Ok(model)
    }
}

#[derive(Debug, Subcommand)]
enum AnalyzeCommand {
    /// Magnitude spectra of the standard 64-filter gammatone bank.
    Bank {
        #[arg(long)]
        out: PathBuf,
    },
    /// Magnitude spectra of every kernel of a conv layer.
    Spectra {
        #[command(flatten)]
        source: ModelSource,
        /// Layer index (must be a convolution).
        #[arg(long, default_value_t = 0)]
        layer: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean first-layer response to a sinusoid sweep; also writes a
    /// row-normalized copy next to --out.
    Probe {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, default_value_t = 1.0)]
        f_lo: f64,
        #[arg(long, default_value_t = 8000.0)]
        f_hi: f64,
        #[arg(long, default_value_t = 100.0)]
        step: f64,
        /// Average |pre-activation| instead of the ReLU output.
        #[arg(long)]
        abs_preactivation: bool,
        /// Reorder channels by kernel central frequency.
        #[arg(long)]
        sorted: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Channel order by kernel FFT peak.
    Sort {
        #[command(flatten)]
        source: ModelSource,
        #[arg(long, default_value_t = 0)]
        layer: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenSynthArgs {
    /// Clips per class.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ParamsArgs {
    #[arg(long)]
    config: String,
    #[arg(long)]
    widen_cl1: Option<usize>,
}

/// Process exit codes, one per failure class.
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const INVALID_VALUE: u8 = 3;
    pub const IO: u8 = 4;
    pub const DATA: u8 = 5;
    pub const NUMERIC: u8 = 6;
}

fn classify_error(e: &Error) -> (u8, &'static str) {
    match e {
        Error::InvalidArgument(_) | Error::UnknownConfig { .. } => (exit::INVALID_VALUE, "invalid-argument"),
        Error::Io(_) | Error::MissingFile(_) => (exit::IO, "io"),
        Error::Domain(_) | Error::NonFiniteGradient { .. } | Error::Shape { .. } => (exit::NUMERIC, "numeric"),
        _ => (exit::DATA, "data"),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid usage").trim_start_matches("error: ");
            let (code, kind) = match e.kind() {
                ErrorKind::InvalidValue | ErrorKind::ValueValidation => (exit::INVALID_VALUE, "invalid-argument"),
                _ => (exit::USAGE, "usage"),
            };
            eprintln!("error[{kind}]: {}", one_line(first));
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = classify_error(&e);
            eprintln!("error[{kind}]: {}", one_line(&e.to_string()));
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let level = log::LevelFilter::from_str(&cli.log_level)
        .map_err(|_| Error::InvalidArgument(format!("unknown log level {:?}", cli.log_level)))?;
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Train(a) => train(a, seed),
        Command::Eval(a) => eval(a),
        Command::Classify(a) => classify(a),
        Command::Analyze(a) => analyze(a, seed),
        Command::GenSynth(a) => {
            let m = gen_synthetic(a.n, seed, &a.out)?;
            log::info!("wrote {} clips to {}", m.len(), a.out.display());
            Ok(())
        }
        Command::Params(a) => {
            let mut config = ModelConfig::new(ConfigName::from_str(&a.config)?);
            if let Some(n) = a.widen_cl1 {
                config = config.widen_first_layer(n)?;
            }
            let (_, trainable) = Model::from_config(config, seed)?.count_parameters();
            println!("trainable={trainable}");
            Ok(())
        }
    }
}

fn open_model(path: &Path) -> Result<Model, Error> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_checkpoint(path)
}

fn load_dataset(root: &Path) -> Result<DatasetManifest, Error> {
    let loaded = load_manifest(&root.join("metadata").join("UrbanSound8K.csv"), &root.join("audio"))?;
    for path in &loaded.missing {
        log::warn!("missing audio file {}", path.display());
    }
    Ok(loaded.manifest)
}

fn write_report(dir: &Path, report: &EvalReport) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let names: Vec<String> = CLASS_NAMES.iter().map(|s| s.to_string()).collect();
    write_atomic(&dir.join("report.json"), &report.to_json()?)?;
    write_atomic(&dir.join("confusion.csv"), &report.confusion_csv(&names)?)
}

fn train(a: TrainArgs, seed: u64) -> Result<(), Error> {
    let model = ModelConfig::new(ConfigName::from_str(&a.config)?);
    let mut tc = TrainConfig::new(model.clone());
    tc.framing = a.framing.policy(model.input_len)?;
    tc.rule = a.framing.rule()?;
    tc.batch_size = a.batch_size;
    tc.max_epochs = a.max_epochs;
    tc.early_stop_patience = a.patience;
    tc.optimizer = AdadeltaConfig {
        lr: a.lr,
        rho: a.rho,
        epsilon: a.eps,
    };
    tc.seed = seed;
    tc.validate()?;
    let manifest = load_dataset(&a.data)?;
    let report = match a.holdout {
        Some(fold) => {
            let (report, model) = run_holdout(&manifest, &tc, fold)?;
            std::fs::create_dir_all(&a.out)?;
            write_checkpoint(&model, a.out.join("model.ckpt"))?;
            report
        }
        None => run_cv(&manifest, &tc)?,
    };
    log::info!("mean accuracy {:.4} (std {:.4})", report.mean_accuracy, report.std_dev);
    write_report(&a.out, &report)
}

fn eval(a: EvalArgs) -> Result<(), Error> {
    let mut model = open_model(&a.model)?;
    model.set_mode(Mode::Eval);
    let policy = a.framing.policy(model.input_len())?;
    let rule = a.framing.rule()?;
    if let Some(f) = a.folds.iter().find(|&&f| f == 0 || f > N_FOLDS) {
        return Err(Error::InvalidArgument(format!("--fold {f} outside 1..={N_FOLDS}")));
    }
    let manifest = load_dataset(&a.data)?;
    let clips = load_clips(&manifest)?;
    let selected: Vec<&Clip> = clips
        .iter()
        .filter(|c| a.folds.is_empty() || a.folds.contains(&c.fold))
        .collect();
    let fragment = evaluate(&model, &selected, &policy, rule)?;
    println!("accuracy={:.6}", fragment.accuracy);
    let fold = esc1d::harness::FoldResult {
        test_fold: a.folds.first().copied().unwrap_or(0),
        val_fold: 0,
        best_epoch: 0,
        epochs_run: 0,
        test: fragment,
        history: Vec::new(),
    };
    write_report(&a.out, &EvalReport::from_folds(model.config().id(), vec![fold]))
}

fn classify(a: ClassifyArgs) -> Result<(), Error> {
    let mut model = open_model(&a.model)?;
    model.set_mode(Mode::Eval);
    let policy = a.framing.policy(model.input_len())?;
    let rule = a.framing.rule()?;
    let mut header = vec!["clip_id".to_string(), "class".to_string()];
    header.extend(CLASS_NAMES.iter().map(|s| s.to_string()));
    println!("{}", header.join(","));
    for path in &a.wavs {
        let w = resample(&read_wav(path)?, TARGET_SAMPLE_RATE)?;
        let id = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        let d = classify_clip_with_id(&model, &id, &w, &policy, rule)?;
        let scores: Vec<String> = d.scores.iter().map(|s| format!("{s:.6}")).collect();
        println!("{id},{},{}", CLASS_NAMES[d.class_index], scores.join(","));
    }
    Ok(())
}

fn analyze(cmd: AnalyzeCommand, seed: u64) -> Result<(), Error> {
    match cmd {
        AnalyzeCommand::Bank { out } => {
            let bank = GammatoneBank::standard();
            let n = padded_len(bank.kernels()[0].len());
            let mut rows = vec![std::iter::once("filter".to_string())
                .chain((0..n / 2 + 1).map(|b| format!("{}", bin_frequency(b, n, bank.sample_rate_hz() as f64))))
                .collect::<Vec<_>>()
                .join(",")];
            for (k, kernel) in bank.kernels().iter().enumerate() {
                let mags: Vec<String> = fft_magnitude(kernel).iter().map(|m| format!("{m}")).collect();
                rows.push(format!("{k},{}", mags.join(",")));
            }
            write_atomic(&out, (rows.join("\n") + "\n").as_bytes())
        }
        AnalyzeCommand::Spectra { source, layer, out } => {
            let model = source.load(seed)?;
            write_atomic(&out, &kernel_spectra(&model, layer)?.to_csv()?)
        }
        AnalyzeCommand::Probe {
            source,
            f_lo,
            f_hi,
            step,
            abs_preactivation,
            sorted,
            out,
        } => {
            let model = source.load(seed)?;
            let opts = ProbeOptions {
                activation: if abs_preactivation {
                    ProbeActivation::AbsPreActivation
                } else {
                    ProbeActivation::Relu
                },
                ..ProbeOptions::default()
            };
            let mut matrix = probe_response(&model, &probe_frequencies(f_lo, f_hi, step)?, opts)?;
            if sorted {
                matrix = matrix.permute_channels(&sort_by_central_frequency(&conv_kernels(&model, 0)?))?;
            }
            write_atomic(&out, &matrix.to_csv()?)?;
            write_atomic(&rownorm_path(&out), &matrix.row_normalized().to_csv()?)
        }
        AnalyzeCommand::Sort { source, layer, out } => {
            let model = source.load(seed)?;
            let spectra = kernel_spectra(&model, layer)?;
            let peaks = spectra.peak_freqs_hz();
            let perm = sort_by_central_frequency(&conv_kernels(&model, layer)?);
            let mut text = String::from("rank,channel,peak_hz\n");
            for (rank, &c) in perm.iter().enumerate() {
                text.push_str(&format!("{rank},{c},{}\n", peaks[c]));
            }
            write_atomic(&out, text.as_bytes())
        }
    }
}

fn rownorm_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "probe".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.rownorm.csv"))
}
