//! End-to-end experiment: centers, assignment, training, encoding and
//! evaluation, with every artifact written to the output directory.

use std::path::PathBuf;

use crate::centers::{
    assign_multi_label, assign_single_label, generate_centers, generate_centers_balanced,
    generate_centers_bernoulli, CenterSet, SemanticCenterMap,
};
use crate::config::{CenterChoice, RunConfig};
use crate::data::{Dataset, Split};
use crate::error::{Result, Stage, StageContext};
use crate::hamming::PackedCode;
use crate::io;
use crate::model::{encode_with, train, TrainOutcome};
use crate::retrieval::{
    center_distance_matrix, evaluate_with, group_by_assignment, nearest_center_assignment,
    CodeIndex, EvalReport, QuerySet,
};

pub fn make_centers(choice: CenterChoice, m: usize, k: usize, seed: u64) -> Result<CenterSet> {
    match choice {
        CenterChoice::Hadamard => generate_centers(m, k, seed),
        CenterChoice::Balanced => generate_centers_balanced(m, k, seed),
        CenterChoice::Bernoulli => generate_centers_bernoulli(m, k, seed),
    }
}

/// Single-label data maps category `j` to center `j`; anything with a
/// multi-category sample goes through majority voting.
pub fn assign_centers(cs: &CenterSet, ds: &Dataset, seed: u64) -> Result<SemanticCenterMap> {
    if ds.labels().iter().all(|l| l.count() == 1) {
        assign_single_label(cs, ds.labels())
    } else {
        assign_multi_label(cs, ds.labels(), seed)
    }
}

/// Everything an experiment produces, kept in memory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub centers: CenterSet,
    pub center_map: SemanticCenterMap,
    pub training: TrainOutcome,
    pub train_codes: Vec<PackedCode>,
    pub query_codes: Vec<PackedCode>,
    pub db_codes: Vec<PackedCode>,
    /// Mean distance between each training code and its target center.
    pub mean_center_distance: f64,
    pub report: EvalReport,
}

impl Experiment {
    pub fn run(cfg: &RunConfig, train_set: &Dataset, query: &Dataset, db: &Dataset) -> Result<Self> {
        cfg.validate().stage(Stage::Config)?;
        let m = cfg.m.unwrap_or_else(|| train_set.num_categories());
        let centers = make_centers(cfg.method, m, cfg.k, cfg.seed).stage(Stage::Centers)?;
        let center_map = assign_centers(&centers, train_set, cfg.seed).stage(Stage::Assign)?;

        let mut tcfg = cfg.train.clone();
        tcfg.seed = cfg.seed;
        let training = train(train_set, &center_map, &tcfg).stage(Stage::Train)?;

        let exec = tcfg.execution;
        let encode = |ds: &Dataset| encode_with(&training.model, ds, exec).stage(Stage::Encode);
        let train_codes = encode(train_set)?;
        let query_codes = encode(query)?;
        let db_codes = encode(db)?;

        let total: u64 = train_codes
            .iter()
            .enumerate()
            .map(|(i, c)| c.distance_unchecked(center_map.center_of(i)) as u64)
            .sum();
        let mean_center_distance = total as f64 / train_codes.len() as f64;

        let report = (|| {
            let index = CodeIndex::new(db_codes.clone(), db.labels().to_vec())?;
            let queries = QuerySet::new(query_codes.clone(), query.labels().to_vec())?;
            let mut report = evaluate_with(&index, &queries, cfg.map_n, cfg.radius, exec)?;
            let assignment = nearest_center_assignment(&center_map.materialize(), &centers)?;
            let groups = group_by_assignment(&train_codes, &assignment, centers.m())?;
            report.distance_matrix = Some(center_distance_matrix(&groups, &centers)?);
            Ok(report)
        })()
        .stage(Stage::Eval)?;

        Ok(Experiment {
            centers,
            center_map,
            training,
            train_codes,
            query_codes,
            db_codes,
            mean_center_distance,
            report,
        })
    }
}

/// Files written by [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub centers: PathBuf,
    pub center_map: PathBuf,
    pub model: PathBuf,
    pub train_codes: PathBuf,
    pub query_codes: PathBuf,
    pub db_codes: PathBuf,
    pub report: PathBuf,
    pub losses: PathBuf,
}

impl Artifacts {
    pub fn in_dir(dir: &std::path::Path) -> Self {
        Artifacts {
            centers: dir.join("centers.csqh"),
            center_map: dir.join("center_map.csqc"),
            model: dir.join("model.csqm"),
            train_codes: dir.join("train_codes.csqc"),
            query_codes: dir.join("query_codes.csqc"),
            db_codes: dir.join("db_codes.csqc"),
            report: dir.join("report.csv"),
            losses: dir.join("losses.csv"),
        }
    }

    pub fn all(&self) -> [&PathBuf; 8] {
        [
            &self.centers,
            &self.center_map,
            &self.model,
            &self.train_codes,
            &self.query_codes,
            &self.db_codes,
            &self.report,
            &self.losses,
        ]
    }
}

/// Loads the three splits named in `cfg`, runs the experiment and writes
/// its artifacts. Identical inputs and config give byte-identical files.
pub fn run_pipeline(cfg: &RunConfig) -> Result<(Experiment, Artifacts)> {
    let (train_set, query, db) = (|| {
        Ok((
            io::load_dataset(&cfg.train_features, &cfg.train_labels, Split::Train)?,
            io::load_dataset(&cfg.query_features, &cfg.query_labels, Split::Query)?,
            io::load_dataset(&cfg.db_features, &cfg.db_labels, Split::Database)?,
        ))
    })()
    .stage(Stage::Config)?;
    let exp = Experiment::run(cfg, &train_set, &query, &db)?;

    let out = Artifacts::in_dir(&cfg.out_dir);
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(Into::into)
        .stage(Stage::Config)?;
    io::save_centers(&out.centers, &exp.centers).stage(Stage::Centers)?;
    io::save_codes(&out.center_map, &exp.center_map.materialize()).stage(Stage::Assign)?;
    io::save_model(&out.model, &exp.training.model).stage(Stage::Train)?;
    let mut losses = String::from("epoch,loss\n");
    for (e, l) in exp.training.epoch_losses.iter().enumerate() {
        losses.push_str(&format!("{},{l}\n", e + 1));
    }
    std::fs::write(&out.losses, losses)
        .map_err(Into::into)
        .stage(Stage::Train)?;
    (|| {
        io::save_codes(&out.train_codes, &exp.train_codes)?;
        io::save_codes(&out.query_codes, &exp.query_codes)?;
        io::save_codes(&out.db_codes, &exp.db_codes)
    })()
    .stage(Stage::Encode)?;
    exp.report.write_csv(&out.report).stage(Stage::Eval)?;
    Ok((exp, out))
}
