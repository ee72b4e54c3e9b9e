use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::svg::loss_svg;
use crate::dual::{train, IterationRecord, TrainOutcome};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub iteration: usize,
    pub loss: f64,
    pub wall_ms: f64,
}

impl From<&IterationRecord> for LossRow {
    fn from(r: &IterationRecord) -> Self {
        LossRow {
            iteration: r.iteration,
            loss: r.loss,
            wall_ms: r.wall_ms,
        }
    }
}

pub fn write_loss_csv(path: &Path, rows: &[LossRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_loss_csv(path: &Path) -> Result<Vec<LossRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    r.deserialize()
        .collect::<std::result::Result<Vec<LossRow>, _>>()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossSummary {
    pub iterations: usize,
    pub final_loss: f64,
    pub min_loss: f64,
    pub min_iteration: usize,
    /// First iteration whose loss is within 1% of the run minimum.
    pub plateau_iteration: usize,
}

pub fn summarize(rows: &[LossRow]) -> Option<LossSummary> {
    let last = rows.last()?;
    let (min_iteration, min_loss) = rows
        .iter()
        .map(|r| (r.iteration, r.loss))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let plateau_iteration = rows
        .iter()
        .find(|r| r.loss <= min_loss + 0.01 * min_loss.abs())
        .map(|r| r.iteration)
        .unwrap_or(min_iteration);
    Some(LossSummary {
        iterations: rows.len(),
        final_loss: last.loss,
        min_loss,
        min_iteration,
        plateau_iteration,
    })
}

pub fn summary_text(label: &str, s: &LossSummary) -> String {
    format!(
        "run: {label}\niterations: {}\nfinal_loss: {:.6}\nmin_loss: {:.6} (iteration {})\nplateau_iteration: {}\n",
        s.iterations, s.final_loss, s.min_loss, s.min_iteration, s.plateau_iteration
    )
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub outcome: TrainOutcome,
    pub summary: LossSummary,
}

/// Trains as described by `config` and writes `config.toml`, `loss.csv`,
/// `checkpoints/`, `report.txt` and `loss.svg` into `dir`.
///
/// The configuration is validated before anything is created, and `dir` must not exist yet.
pub fn run_experiment(config: &ExperimentConfig, dir: &Path) -> Result<RunArtifacts> {
    let model = config.build_model()?;
    let mut train_cfg = config.train_config()?;
    if dir.exists() {
        return Err(Error::Config(format!("run directory {} already exists", dir.display())));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let snapshot = dir.join("config.toml");
    fs::write(&snapshot, config.to_toml()).map_err(|e| Error::io(&snapshot, e))?;
    train_cfg.checkpoint_dir = Some(dir.join("checkpoints"));

    let outcome = train(&model, &train_cfg, |_| {})?;
    let rows: Vec<LossRow> = outcome.records.iter().map(LossRow::from).collect();
    write_loss_csv(&dir.join("loss.csv"), &rows)?;
    let summary = summarize(&rows).expect("at least one iteration");
    let label = format!("{} {}", config.model, train_cfg.net);
    let report = dir.join("report.txt");
    fs::write(&report, summary_text(&label, &summary)).map_err(|e| Error::io(&report, e))?;
    let svg = dir.join("loss.svg");
    fs::write(&svg, loss_svg(&[(label, rows)], None)).map_err(|e| Error::io(&svg, e))?;
    Ok(RunArtifacts {
        dir: dir.to_path_buf(),
        outcome,
        summary,
    })
}
