use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use central_hash::centers::{validate_centers, SemanticCenterMap};
use central_hash::config::{parse_widths, CenterChoice, RunConfig};
use central_hash::data::{make_synthetic_splits, Split};
use central_hash::error::{Error, Result, Stage};
use central_hash::io;
use central_hash::model::{encode, train, TrainConfig};
use central_hash::pipeline::{assign_centers, make_centers, run_pipeline};
use central_hash::retrieval::{
    center_distance_matrix, evaluate, group_by_assignment, matrix_to_csv,
    nearest_center_assignment, CodeIndex, QuerySet,
};

#[derive(Parser)]
#[command(name = "central-hash", version, about = "Hash centers, central-similarity training and Hamming retrieval evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate hash centers and write a CSQH file.
    GenCenters {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "hadamard", value_parser = parse_method)]
        method: CenterChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assign a semantic center to every sample; writes per-sample centers as CSQC.
    Assign {
        #[arg(long)]
        centers: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the hash model on a feature file.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        centers_map: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        lambda1: Option<f64>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        momentum: Option<f64>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Comma-separated hidden widths, e.g. `1024,512`.
        #[arg(long)]
        hidden: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_lc: bool,
        #[arg(long)]
        no_lq: bool,
        #[arg(long)]
        out_model: PathBuf,
    },
    /// Encode features into binary codes.
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out_codes: PathBuf,
    },
    /// Evaluate query codes against a database and write a CSV report.
    Eval {
        #[arg(long)]
        db_codes: PathBuf,
        #[arg(long)]
        db_labels: PathBuf,
        #[arg(long)]
        query_codes: PathBuf,
        #[arg(long)]
        query_labels: PathBuf,
        #[arg(long, default_value_t = 1000)]
        map_n: usize,
        #[arg(long, default_value_t = 2)]
        radius: u32,
        #[arg(long)]
        out_report: PathBuf,
    },
    /// Mean distance between codes grouped by assigned center and every center.
    Distmat {
        #[arg(long)]
        codes: PathBuf,
        /// Per-sample centers (CSQC, as written by `assign`).
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        centers: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write synthetic Gaussian-blob train/query/db splits.
    Synth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long)]
        query_per_class: Option<usize>,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_prefix: String,
    },
    /// Run the full pipeline from a `key = value` config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set epochs=20`.
        #[arg(long = "set", value_parser = parse_override)]
        overrides: Vec<(String, String)>,
    },
}

fn parse_method(s: &str) -> std::result::Result<CenterChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_override(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn tagged<T>(stage: Stage, r: Result<T>) -> std::result::Result<T, (Stage, Error)> {
    r.map_err(|e| (stage, e))
}

fn run(cmd: Command) -> std::result::Result<(), (Stage, Error)> {
    match cmd {
        Command::GenCenters { k, m, method, seed, out } => {
            let cs = tagged(Stage::Centers, make_centers(method, m, k, seed))?;
            let v = tagged(Stage::Centers, validate_centers(cs.centers()))?;
            tagged(Stage::Centers, io::save_centers(&out, &cs))?;
            eprintln!(
                "{} centers, k={k}, method {:?}: mean distance {:.3}, min {}, valid {}",
                cs.m(),
                cs.method(),
                v.mean_distance,
                v.min_distance,
                v.valid
            );
        }
        Command::Assign { centers, labels, seed, out } => {
            let stage = Stage::Assign;
            let cs = tagged(stage, io::load_centers(&centers))?;
            let labels = tagged(stage, io::load_labels(&labels))?;
            let d = tagged(stage, central_hash::Dataset::new(1, vec![0.0; labels.len()], labels, Split::Train))?;
            let map = tagged(stage, assign_centers(&cs, &d, seed))?;
            tagged(stage, io::save_codes(&out, &map.materialize()))?;
            eprintln!("{} samples, {} distinct targets", map.len(), map.targets().len());
        }
        Command::Train {
            features,
            labels,
            centers_map,
            k,
            lambda1,
            lr,
            momentum,
            batch,
            epochs,
            hidden,
            seed,
            no_lc,
            no_lq,
            out_model,
        } => {
            let stage = Stage::Train;
            let ds = tagged(stage, io::load_dataset(&features, &labels, Split::Train))?;
            let map = tagged(stage, io::load_codes(&centers_map).and_then(SemanticCenterMap::from_codes))?;
            if let Some(k) = k {
                if k != map.k() {
                    return Err((stage, Error::DimensionMismatch { expected: k, got: map.k() }));
                }
            }
            let defaults = TrainConfig::default();
            let cfg = TrainConfig {
                lambda1: lambda1.unwrap_or(defaults.lambda1),
                learning_rate: lr.unwrap_or(defaults.learning_rate),
                momentum: momentum.unwrap_or(defaults.momentum),
                batch_size: batch.unwrap_or(defaults.batch_size),
                epochs: epochs.unwrap_or(defaults.epochs),
                seed,
                use_lc: !no_lc,
                use_lq: !no_lq,
                hidden: hidden.as_deref().map(parse_widths).transpose().map_err(|e| (stage, e))?,
                ..defaults
            };
            let outcome = tagged(stage, train(&ds, &map, &cfg))?;
            tagged(stage, io::save_model(&out_model, &outcome.model))?;
            if let Some(last) = outcome.epoch_losses.last() {
                eprintln!("trained {} epochs, final loss {last:.6}", outcome.epoch_losses.len());
            }
        }
        Command::Encode { model, features, out_codes } => {
            let stage = Stage::Encode;
            let model = tagged(stage, io::load_model(&model))?;
            let f = tagged(stage, io::load_features(&features))?;
            // Labels are not needed to encode; a placeholder keeps Dataset's invariants.
            let placeholder = vec![central_hash::LabelSet::single(0, 1).unwrap(); f.n];
            let ds = tagged(stage, central_hash::Dataset::new(f.d, f.data, placeholder, Split::Database))?;
            let codes = tagged(stage, encode(&model, &ds))?;
            tagged(stage, io::save_codes(&out_codes, &codes))?;
        }
        Command::Eval {
            db_codes,
            db_labels,
            query_codes,
            query_labels,
            map_n,
            radius,
            out_report,
        } => {
            let stage = Stage::Eval;
            let index = tagged(
                stage,
                (|| CodeIndex::new(io::load_codes(&db_codes)?, io::load_labels(&db_labels)?))(),
            )?;
            let queries = tagged(
                stage,
                (|| QuerySet::new(io::load_codes(&query_codes)?, io::load_labels(&query_labels)?))(),
            )?;
            let report = tagged(stage, evaluate(&index, &queries, map_n, radius))?;
            tagged(stage, report.write_csv(&out_report))?;
            print_summary(&report);
        }
        Command::Distmat { codes, assignments, centers, out } => {
            let stage = Stage::Distmat;
            let result = (|| {
                let codes = io::load_codes(&codes)?;
                let targets = io::load_codes(&assignments)?;
                let cs = io::load_centers(&centers)?;
                let assignment = nearest_center_assignment(&targets, &cs)?;
                let groups = group_by_assignment(&codes, &assignment, cs.m())?;
                let matrix = center_distance_matrix(&groups, &cs)?;
                std::fs::write(&out, matrix_to_csv(&matrix))?;
                Ok(())
            })();
            tagged(stage, result)?;
        }
        Command::Synth {
            classes,
            per_class,
            query_per_class,
            dim,
            spread,
            seed,
            out_prefix,
        } => {
            let stage = Stage::Synth;
            let qpc = query_per_class.unwrap_or_else(|| (per_class / 5).max(1));
            let splits = tagged(stage, make_synthetic_splits(classes, per_class, qpc, dim, spread, seed))?;
            for (name, ds) in [("train", &splits.train), ("query", &splits.query), ("db", &splits.database)] {
                let f = PathBuf::from(format!("{out_prefix}_{name}.csqf"));
                let l = PathBuf::from(format!("{out_prefix}_{name}.csql"));
                tagged(stage, io::save_dataset(&f, &l, ds))?;
            }
        }
        Command::Run { config, overrides } => {
            let cfg = tagged(Stage::Config, RunConfig::load(&config, &overrides))?;
            let (exp, artifacts) = run_pipeline(&cfg).map_err(|e| (e.stage().unwrap_or(Stage::Config), e))?;
            print_summary(&exp.report);
            eprintln!("mean code-to-center distance {:.4}", exp.mean_center_distance);
            eprintln!("artifacts in {}", display_dir(&artifacts.report));
        }
    }
    Ok(())
}

fn display_dir(p: &Path) -> String {
    p.parent().map(|d| d.display().to_string()).unwrap_or_default()
}

fn print_summary(r: &central_hash::EvalReport) {
    eprintln!(
        "mAP@{} {:.4}  P@H<={} {:.4}  ({} queries, {} database, {:.3}s)",
        r.map_n, r.map_at_n, r.radius, r.precision_within_radius, r.runtime.queries, r.runtime.database, r.runtime.seconds
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err((stage, err)) => {
            match err {
                Error::Staged { stage, source } => eprintln!("error [{stage}]: {source}"),
                other => eprintln!("error [{stage}]: {other}"),
            }
            ExitCode::FAILURE
        }
    }
}
