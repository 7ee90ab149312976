//! `itra`: synthesize or ingest datasets, train banks and classifiers,
//! classify, evaluate and run the ablation grid.
//!
//! Every subcommand reads an optional JSON config (`--config`) and a master
//! seed (`--seed`). Failures exit non-zero with `{"error": kind, "message": ..}`
//! on stderr.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use itra_core::classifier::{train_classifier, ClassifierModel};
use itra_core::decomposition::{decompose, KeySequenceSet};
use itra_core::harness::{
    class_training_frames, decompose_splits, evaluate, ingest, predict, read_vidf_file,
    run_ablation_grid, synth_gen, train_bank, training_descriptors, video_seed, Dataset, Describer,
    KeyframeMethod, Split,
};
use itra_core::itra::{itra, DictionaryBank};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "itra", version, about = "Key-sequence action recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dataset as VIDF files.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Load a dataset and print a summary.
    IngestCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Decompose one video against a class's training frames.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        /// VIDF file to decompose.
        #[arg(long)]
        video: PathBuf,
        /// Reference class id.
        #[arg(long)]
        class: usize,
        /// Output `.kseq` file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn the class/position dictionary bank.
    TrainBank {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        bank: Option<PathBuf>,
    },
    /// Compute the relative descriptor of a saved key-sequence set.
    Describe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kseq: PathBuf,
        #[arg(long)]
        class: usize,
        #[arg(long)]
        bank: Option<PathBuf>,
    },
    /// Learn the class dictionaries over training descriptors.
    TrainClassifier {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        bank: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Classify one VIDF video.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        bank: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        video: PathBuf,
    },
    /// Classify the test split and write report.json and confusion.csv.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        bank: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every key-frame method with every descriptor variant.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
}

impl From<itra_core::Error> for CliError {
    fn from(e: itra_core::Error) -> Self {
        CliError {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        kind: "usage",
        message: message.into(),
    }
}

type CliResult<T> = Result<T, CliError>;

fn pick(flag: &Option<PathBuf>, configured: &Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    flag.clone()
        .or_else(|| configured.clone())
        .ok_or_else(|| usage(format!("no {name} path: pass --{name} or set paths.{name}")))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    fs::write(path, text).map_err(|e| itra_core::Error::from(e).at(path).into())
}

/// Video id as `ingest` would name it when the file sits inside `data`.
fn video_id(path: &Path, data: Option<&Path>) -> String {
    let rel = data
        .and_then(|d| path.strip_prefix(d).ok())
        .unwrap_or(path)
        .with_extension("");
    rel.to_string_lossy().replace('\\', "/")
}

fn load_dataset(path: &Path) -> CliResult<Dataset> {
    Ok(ingest(path)?)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth { common, data } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let data = pick(&data, &cfg.paths.data, "data")?;
            let ds = synth_gen(&cfg.synth, common.seed)?;
            ds.write_vidf(&data)?;
            print_json(&json!({
                "data": data,
                "classes": ds.classes,
                "videos": ds.videos.len(),
            }));
        }
        Command::IngestCheck { common, data } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let ds = load_dataset(&pick(&data, &cfg.paths.data, "data")?)?;
            let count = |split: Split, c: usize| ds.split(split).filter(|v| v.class_id == c).count();
            let classes: Vec<_> = ds
                .classes
                .iter()
                .enumerate()
                .map(|(c, name)| json!({"name": name, "train": count(Split::Train, c), "test": count(Split::Test, c)}))
                .collect();
            print_json(&json!({"classes": classes, "videos": ds.videos.len()}));
        }
        Command::Decompose {
            common,
            data,
            video,
            class,
            out,
        } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let data = pick(&data, &cfg.paths.data, "data")?;
            let ds = load_dataset(&data)?;
            if class >= ds.num_classes() {
                return Err(usage(format!("class {class} outside 0..{}", ds.num_classes())));
            }
            let id = video_id(&video, Some(&data));
            let v = read_vidf_file(&video, &id, None)?;
            // leave the video itself out of its reference when it is a training video
            let mut without = ds.clone();
            without.videos.retain(|lv| lv.video.id != id);
            let frames = class_training_frames(&without, &cfg.experiment)
                .map_err(|_| usage(format!("class {class} has no other training videos")))?;
            let ks = decompose(
                &v,
                &frames[class],
                &cfg.experiment.decomposition,
                Some(class),
                video_seed(common.seed, &id),
            )?;
            ks.save(&out)?;
            print_json(&json!({"video": id, "reference_class": class, "key_frames": ks.centers(), "out": out}));
        }
        Command::TrainBank { common, data, bank } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let ds = load_dataset(&pick(&data, &cfg.paths.data, "data")?)?;
            let bank_dir = pick(&bank, &cfg.paths.bank, "bank")?;
            let dec = decompose_splits(&ds, &cfg.experiment, KeyframeMethod::Proposed, &[Split::Train], common.seed)?;
            let b = train_bank(&dec, &cfg.experiment, common.seed)?;
            b.save(&bank_dir)?;
            print_json(&serde_json::to_value(b.manifest()).expect("manifest serializes"));
        }
        Command::Describe {
            common,
            kseq,
            class,
            bank,
        } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let b = DictionaryBank::load(pick(&bank, &cfg.paths.bank, "bank")?)?;
            let ks = KeySequenceSet::load(&kseq)?;
            let d = itra(&ks, &b, class, &cfg.experiment.itra)?;
            let rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
                m.row_iter().map(|r| r.iter().copied().collect()).collect()
            };
            print_json(&json!({
                "reference_class": class,
                "phi": rows(&d.phi),
                "psi": rows(&d.psi),
                "flat": d.flat.as_slice(),
            }));
        }
        Command::TrainClassifier {
            common,
            data,
            bank,
            model,
        } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let ds = load_dataset(&pick(&data, &cfg.paths.data, "data")?)?;
            let b = DictionaryBank::load(pick(&bank, &cfg.paths.bank, "bank")?)?;
            let model_dir = pick(&model, &cfg.paths.model, "model")?;
            let dec = decompose_splits(&ds, &cfg.experiment, KeyframeMethod::Proposed, &[Split::Train], common.seed)?;
            let describer = Describer::Itra(b, cfg.experiment.itra.clone());
            let by_class = training_descriptors(&dec, &describer)?;
            let m = train_classifier(&by_class, &cfg.experiment.classifier, common.seed)?;
            m.save(&model_dir, &ds.classes)?;
            print_json(&serde_json::to_value(m.manifest(&ds.classes)).expect("manifest serializes"));
        }
        Command::Classify {
            common,
            data,
            bank,
            model,
            video,
        } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let data = pick(&data, &cfg.paths.data, "data")?;
            let ds = load_dataset(&data)?;
            let b = DictionaryBank::load(pick(&bank, &cfg.paths.bank, "bank")?)?;
            let (m, names) = ClassifierModel::load(pick(&model, &cfg.paths.model, "model")?)?;
            let id = video_id(&video, Some(&data));
            let v = read_vidf_file(&video, &id, None)?;
            let frames = class_training_frames(&ds, &cfg.experiment)?;
            let res = itra_core::classifier::classify(
                &v,
                &frames,
                &b,
                &m,
                &cfg.experiment.decomposition,
                &cfg.experiment.itra,
                video_seed(common.seed, &id),
            )?;
            print_json(&json!({
                "video": id,
                "label": res.label,
                "class": names.get(res.label),
                "partial_votes": res.partial_votes,
            }));
        }
        Command::Evaluate {
            common,
            data,
            bank,
            model,
            out,
        } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let ds = load_dataset(&pick(&data, &cfg.paths.data, "data")?)?;
            let b = DictionaryBank::load(pick(&bank, &cfg.paths.bank, "bank")?)?;
            let (m, names) = ClassifierModel::load(pick(&model, &cfg.paths.model, "model")?)?;
            if names != ds.classes {
                return Err(usage("model classes do not match the dataset's classes"));
            }
            let out = pick(&out, &cfg.paths.out, "out")?;
            let dec = decompose_splits(&ds, &cfg.experiment, KeyframeMethod::Proposed, &[Split::Test], common.seed)?;
            if dec.test.is_empty() {
                return Err(usage("dataset has no test videos"));
            }
            let describer = Describer::Itra(b, cfg.experiment.itra.clone());
            let preds = predict(&dec, &describer, &m)?;
            let truth: Vec<usize> = dec.test.iter().map(|t| t.1).collect();
            let report = evaluate(&preds, &truth, ds.num_classes(), cfg.hash(), common.seed)?;
            report.write(&out, &ds.classes)?;
            print_json(&json!({"accuracy": report.accuracy, "out": out}));
        }
        Command::Ablate { common, data, out } => {
            let cfg = RunConfig::load(common.config.as_deref())?;
            let ds = load_dataset(&pick(&data, &cfg.paths.data, "data")?)?;
            let out = pick(&out, &cfg.paths.out, "out")?;
            let grid = run_ablation_grid(&ds, &cfg.experiment, common.seed)?;
            let mut rows = Vec::new();
            for r in &grid {
                let name = format!(
                    "{}_{}",
                    serde_json::to_value(r.method).expect("enum").as_str().unwrap_or_default(),
                    serde_json::to_value(r.variant).expect("enum").as_str().unwrap_or_default()
                );
                r.report.write(out.join(&name), &ds.classes)?;
                rows.push(json!({"method": r.method, "variant": r.variant, "accuracy": r.report.accuracy}));
            }
            let summary = json!({"seed": common.seed, "config_hash": cfg.hash(), "runs": rows});
            fs::create_dir_all(&out).map_err(|e| itra_core::Error::from(e).at(&out))?;
            write_json(&out.join("ablation.json"), &summary)?;
            print_json(&summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({"error": "usage", "message": e.to_string().trim()}));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind, "message": e.message}));
            ExitCode::FAILURE
        }
    }
}
