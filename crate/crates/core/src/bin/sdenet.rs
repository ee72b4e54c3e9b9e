use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdenet::dual::train;
use sdenet::experiment::{
    loss_svg, read_loss_csv, run_convergence, run_experiment, summarize, summary_text, write_loss_csv,
    BsmSetup, ExperimentConfig, LossRow,
};
use sdenet::oracles::{binomial_american_put, bs_european_call, bs_european_put};
use sdenet::schemes::Scheme;
use sdenet::{Error, Result};

#[derive(Parser)]
#[command(name = "sdenet", version, about = "Weak-approximation schemes and neural dual pricing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a martingale network and record its loss curve.
    Train(TrainArgs),
    /// Weak-order study of a scheme on the Black-Scholes European put.
    Converge(ConvergeArgs),
    /// Reference prices.
    Oracle(OracleArgs),
    /// Summarise one or more runs and optionally plot them together.
    Report(ReportArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML file with the run description; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    net: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    bridge: Option<OnOff>,
    /// A `.csv` path (checkpoints go to `<stem>_checkpoints/`) or a run directory to create.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value = "bsm")]
    model: String,
    #[arg(long)]
    scheme: Scheme,
    /// Comma-separated ascending step counts.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    steps: Vec<usize>,
    #[arg(long, default_value_t = 1 << 16)]
    points: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum OracleKind {
    /// CRR binomial American put.
    Binomial,
    /// Black-Scholes European put and call.
    Bs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    #[arg(long, default_value_t = 100.0)]
    strike: f64,
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    #[arg(long, default_value_t = 0.32)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories or loss CSV files.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Write an SVG overlay of all loss curves here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Horizontal reference line on the plot, e.g. the binomial price.
    #[arg(long)]
    reference: Option<f64>,
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = a.model {
        cfg.model = m;
    }
    if let Some(n) = a.net {
        cfg.net = n;
    }
    if a.steps.is_some() {
        cfg.steps = a.steps;
    }
    if let Some(b) = a.batch {
        cfg.batch = b;
    }
    if let Some(i) = a.iters {
        cfg.iters = i;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(b) = a.bridge {
        cfg.bridge = matches!(b, OnOff::On);
    }
    cfg.validate()?;

    if a.out.extension().is_some_and(|e| e == "csv") {
        let model = cfg.build_model()?;
        let mut tc = cfg.train_config()?;
        let stem = a.out.file_stem().unwrap_or_default().to_string_lossy();
        tc.checkpoint_dir = Some(a.out.with_file_name(format!("{stem}_checkpoints")));
        let outcome = train(&model, &tc, progress)?;
        let rows: Vec<LossRow> = outcome.records.iter().map(LossRow::from).collect();
        write_loss_csv(&a.out, &rows)?;
        if let Some(s) = summarize(&rows) {
            print!("{}", summary_text(&a.out.display().to_string(), &s));
        }
    } else {
        let art = run_experiment(&cfg, &a.out)?;
        print!("{}", summary_text(&art.dir.display().to_string(), &art.summary));
    }
    Ok(())
}

fn progress(r: &sdenet::dual::IterationRecord) {
    if r.iteration == 1 || r.iteration % 10 == 0 {
        eprintln!("iteration {:>5}  loss {:.5}  {:.0} ms", r.iteration, r.loss, r.wall_ms);
    }
}

fn converge_cmd(a: ConvergeArgs) -> Result<()> {
    let setup = BsmSetup::paper();
    let model = ExperimentConfig {
        model: a.model.clone(),
        ..ExperimentConfig::default()
    }
    .build_model()?;
    let rep = run_convergence(&model, &setup, a.scheme, &a.steps, a.points, a.seed)?;
    println!("scheme {}  reference {:.6}", rep.scheme, rep.reference);
    println!("{:>6} {:>14} {:>14} {:>12}", "steps", "error", "band", "estimate");
    for r in &rep.rows {
        println!("{:>6} {:>14.6e} {:>14.3e} {:>12.6}", r.steps, r.error, r.error_band, r.estimate);
    }
    match rep.slope {
        Some(s) => println!("slope {s:.4}"),
        None => println!("slope -"),
    }
    if let Some(out) = &a.out {
        let mut w = csv::Writer::from_path(out).map_err(|e| Error::Csv { path: out.clone(), source: e })?;
        for r in &rep.rows {
            w.serialize(r).map_err(|e| Error::Csv { path: out.clone(), source: e })?;
        }
        w.flush().map_err(|e| Error::Io { path: out.clone(), source: e })?;
    }
    Ok(())
}

fn oracle_cmd(a: OracleArgs) -> Result<()> {
    match a.kind {
        OracleKind::Binomial => {
            let p = binomial_american_put(a.s0, a.strike, a.rate, a.sigma, a.horizon, a.steps)?;
            println!("american put (binomial, {} steps): {p:.6}", a.steps);
        }
        OracleKind::Bs => {
            let put = bs_european_put(a.s0, a.strike, a.rate, a.sigma, a.horizon)?;
            let call = bs_european_call(a.s0, a.strike, a.rate, a.sigma, a.horizon)?;
            println!("european put: {put:.6}\neuropean call: {call:.6}");
        }
    }
    Ok(())
}

fn loss_file(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("loss.csv")
    } else {
        p.to_path_buf()
    }
}

fn report_cmd(a: ReportArgs) -> Result<()> {
    let mut runs = Vec::new();
    for p in &a.runs {
        let rows = read_loss_csv(&loss_file(p))?;
        let label = p.display().to_string();
        match summarize(&rows) {
            Some(s) => print!("{}", summary_text(&label, &s)),
            None => println!("run: {label}\niterations: 0"),
        }
        runs.push((label, rows));
    }
    if let Some(svg) = &a.svg {
        std::fs::write(svg, loss_svg(&runs, a.reference)).map_err(|e| Error::Io { path: svg.clone(), source: e })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Train(a) => train_cmd(a),
        Command::Converge(a) => converge_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Report(a) => report_cmd(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
