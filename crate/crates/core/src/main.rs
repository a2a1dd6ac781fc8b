use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hybrid_qlstm::dataprep::{self, PreprocessConfig};
use hybrid_qlstm::harness::{
    self, emit_logs, evaluate, load_checkpoint, parse_key_values, save_checkpoint, write_report, Checkpoint,
    TrainConfig, TrainHooks, TrainOutcome,
};
use hybrid_qlstm::hybrid::{Model, ModelKind};
use hybrid_qlstm::params::Parameters;
use hybrid_qlstm::{Error, Result};

#[derive(Parser)]
#[command(name = "hqlstm", version, about = "Hybrid LSTM + variational quantum circuit fraud classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic transaction CSV
    Generate {
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Engineer features, balance, split and normalize a transaction CSV
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 5000)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train one model on a preprocessed split directory
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: TrainArgs,
    },
    /// Score a checkpoint on one split
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitName::Test)]
        split: SplitName,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Train the hybrid and baseline models and tabulate their test metrics
    Benchmark {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: TrainArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitName {
    Train,
    Val,
    Test,
}

/// Every flag is optional; unset flags fall back to the config file, then defaults.
#[derive(Args)]
struct TrainArgs {
    /// key=value file with training settings
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    clip_norm: Option<f64>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    lstm_layers: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress per-epoch progress on stderr
    #[arg(long)]
    quiet: bool,
}

impl TrainArgs {
    fn resolve(&self) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            for (k, v) in parse_key_values(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        macro_rules! over {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        over!(model => model_kind, epochs => epochs, batch_size => batch_size, lr => lr,
              weight_decay => weight_decay, clip_norm => clip_norm, qubits => n_qubits,
              layers => n_layers, hidden => hidden_size, dropout => dropout, seed => seed);
        if self.lstm_layers.is_some() {
            cfg.lstm_layers = self.lstm_layers;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

/// Trains, writes `best.ckpt`, `final.ckpt`, `epochs.csv` and a test-split `metrics.json` into `out`.
fn train_run(cfg: &TrainConfig, split: &dataprep::DatasetSplit, out: &Path, quiet: bool) -> Result<(TrainOutcome, harness::MetricsReport)> {
    create_dir(out)?;
    let best_path = out.join("best.ckpt");
    let mut progress = |r: &harness::EpochRecord| {
        if !quiet {
            eprintln!(
                "[{}] epoch {:>3}  train_loss {:.5}  val_loss {:.5}  val_acc {:.4}  {:.2}s",
                cfg.model_kind, r.epoch, r.train_loss, r.val_loss, r.val_accuracy, r.epoch_seconds
            );
        }
    };
    let outcome = harness::train_with(
        cfg,
        split,
        TrainHooks {
            checkpoint_path: Some(&best_path),
            on_epoch: Some(&mut progress),
        },
    )?;
    let final_ck = Checkpoint {
        model: outcome.model.clone(),
        spec: cfg.model_spec(split.train.n_features()),
        config: cfg.clone(),
        epoch: outcome.records.len(),
        val_loss: outcome.records.last().map_or(f64::NAN, |r| r.val_loss),
    };
    save_checkpoint(&final_ck, out.join("final.ckpt"))?;
    let scored = outcome.best.as_ref().map_or(&outcome.model, |b| &b.model);
    let report = evaluate(scored, &split.test, 0.5)?;
    emit_logs(&outcome.records, &report, out)?;
    Ok((outcome, report))
}

fn quantum_params(model: &Model) -> usize {
    match model {
        Model::Hybrid(h) => h.n_quantum_params(),
        Model::Baseline(_) => 0,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { rows, seed, out } => {
            let data = dataprep::generate_synthetic(rows, seed)?;
            dataprep::write_transactions(&out, &data)?;
            let fraud = data.iter().filter(|r| r.is_fraud == 1).count();
            println!("wrote {} rows ({} fraud) to {}", data.len(), fraud, out.display());
        }
        Command::Preprocess { input, out_dir, per_class, seed } => {
            let rows = dataprep::read_transactions(&input)?;
            let cfg = PreprocessConfig { per_class, seed, ..Default::default() };
            let split = dataprep::preprocess(&rows, &cfg)?;
            dataprep::save_split(&out_dir, &split)?;
            println!(
                "train {} / val {} / test {} rows, {} features -> {}",
                split.train.len(),
                split.val.len(),
                split.test.len(),
                split.columns.len(),
                out_dir.display()
            );
        }
        Command::Train { data, out, opts } => {
            let cfg = opts.resolve()?;
            let split = dataprep::load_split(&data)?;
            let (outcome, report) = train_run(&cfg, &split, &out, opts.quiet)?;
            println!(
                "{}: {} parameters ({} quantum), {} optimizer steps",
                cfg.model_kind,
                outcome.model.n_params(),
                quantum_params(&outcome.model),
                outcome.optimizer_steps
            );
            println!(
                "test accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}",
                report.metrics.accuracy, report.metrics.precision, report.metrics.recall, report.metrics.f1
            );
        }
        Command::Evaluate { checkpoint, data, split, out, threshold } => {
            let ck = load_checkpoint(&checkpoint, None)?;
            let splits = dataprep::load_split(&data)?;
            let set = match split {
                SplitName::Train => &splits.train,
                SplitName::Val => &splits.val,
                SplitName::Test => &splits.test,
            };
            let report = evaluate(&ck.model, set, threshold)?;
            create_dir(&out)?;
            write_report(out.join(harness::logs::METRICS_REPORT), &report)?;
            let cm = report.confusion_matrix;
            println!(
                "accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}  (tp {} fp {} tn {} fn {})",
                report.metrics.accuracy, report.metrics.precision, report.metrics.recall, report.metrics.f1,
                cm.tp, cm.fp, cm.tn, cm.fn_
            );
        }
        Command::Benchmark { data, out, opts } => {
            let base_cfg = opts.resolve()?;
            let split = dataprep::load_split(&data)?;
            create_dir(&out)?;
            let mut table = csv::Writer::from_path(out.join("comparison.csv"))?;
            table.write_record([
                "model", "accuracy", "precision", "recall", "f1", "parameters", "quantum_parameters",
                "mean_epoch_seconds", "inference_seconds",
            ])?;
            println!("{:<9} {:>8} {:>9} {:>7} {:>7} {:>7} {:>10}", "model", "accuracy", "precision", "recall", "f1", "params", "epoch_s");
            for kind in [ModelKind::Hybrid, ModelKind::Baseline] {
                let cfg = TrainConfig {
                    model_kind: kind,
                    lstm_layers: opts.lstm_layers,
                    ..base_cfg.clone()
                };
                let (outcome, report) = train_run(&cfg, &split, &out.join(kind.to_string()), opts.quiet)?;
                let epochs = outcome.records.len().max(1) as f64;
                let mean_epoch = outcome.records.iter().map(|r| r.epoch_seconds).sum::<f64>() / epochs;
                let m = report.metrics;
                table.write_record([
                    kind.to_string(),
                    m.accuracy.to_string(),
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.f1.to_string(),
                    outcome.model.n_params().to_string(),
                    quantum_params(&outcome.model).to_string(),
                    mean_epoch.to_string(),
                    report.inference_seconds.to_string(),
                ])?;
                println!(
                    "{:<9} {:>8.4} {:>9.4} {:>7.4} {:>7.4} {:>7} {:>10.3}",
                    kind, m.accuracy, m.precision, m.recall, m.f1, outcome.model.n_params(), mean_epoch
                );
            }
            table.flush().map_err(|e| Error::Io { path: out.join("comparison.csv"), source: e })?;
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) => 1,
        Error::NonFiniteLoss { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
