//! Experiment driver: configuration files, run directories, loss reports and convergence studies.

mod config;
mod convergence;
mod run;
mod svg;

pub use config::ExperimentConfig;
pub use convergence::{run_convergence, slope, BsmSetup, ConvergenceReport, ConvergenceRow};
pub use run::{
    read_loss_csv, run_experiment, summarize, summary_text, write_loss_csv, LossRow, LossSummary, RunArtifacts,
};
pub use svg::loss_svg;
