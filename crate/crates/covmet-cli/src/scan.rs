use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use covmet::ce_bounds::{default_bracket, optimize_time, optimize_time_with, TimeOptimum};
use covmet::exact_oracle::{oracle_qfi, DensityMatrix, MAX_QUBITS};
use covmet::ghz_strategy::ghz_optimize_time;
use covmet::kraus_opt::{optimize_time_numeric, MinimizeOptions};
use covmet::lindblad_bridge::MapTrajectory;
use covmet::models::Model;
use covmet::optim::log_space;
use rayon::prelude::*;

use crate::error::CliError;
use crate::model_args::ModelArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    BoundAnalytic,
    BoundNumeric,
    Ghz,
    /// Time-optimized GHZ QFI from the density-matrix oracle (N ≤ 12)
    Oracle,
}

impl Method {
    fn label(self) -> &'static str {
        match self {
            Method::BoundAnalytic => "bound-analytic",
            Method::BoundNumeric => "bound-numeric",
            Method::Ghz => "ghz",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Method::BoundAnalytic)]
    pub method: Method,
    #[arg(long, default_value_t = 10.0)]
    pub n_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub n_max: f64,
    /// Log-spaced grid points (rounded to integers, duplicates dropped)
    #[arg(long, default_value_t = 40)]
    pub n_count: usize,
    /// Lower end of the time bracket (default: model-dependent)
    #[arg(long, requires = "t_max")]
    pub t_min: Option<f64>,
    #[arg(long, requires = "t_min")]
    pub t_max: Option<f64>,
    /// Seed of the optimizer restarts
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination (stdout when absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub model: Model,
    pub ns: Vec<u64>,
    pub method: Method,
    pub bracket: Option<(f64, f64)>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl ScanConfig {
    pub fn from_args(args: &ScanArgs) -> Result<Self, CliError> {
        let model = args
            .model
            .model()
            .ok_or_else(|| CliError::Usage("scan needs --model".into()))??;
        if !(args.n_min >= 1.0 && args.n_max >= args.n_min && args.n_max.is_finite()) || args.n_count == 0 {
            return Err(CliError::Usage(format!(
                "invalid grid: N ∈ [{}, {}] with {} points",
                args.n_min, args.n_max, args.n_count
            )));
        }
        let mut ns: Vec<u64> = if args.n_count == 1 {
            vec![args.n_min.round() as u64]
        } else {
            log_space(args.n_min, args.n_max, args.n_count)
                .into_iter()
                .map(|n| n.round() as u64)
                .collect()
        };
        ns.dedup();
        if args.method == Method::Oracle && ns.last().is_some_and(|&n| n as usize > MAX_QUBITS) {
            return Err(CliError::Usage(format!("the oracle method handles at most N = {MAX_QUBITS}")));
        }
        Ok(Self {
            model,
            ns,
            method: args.method,
            bracket: args.t_min.zip(args.t_max),
            seed: args.seed,
            output: args.output.clone(),
        })
    }
}

struct Row {
    opt: TimeOptimum,
    flag: &'static str,
}

fn edge(opt: &TimeOptimum) -> &'static str {
    if opt.converged {
        "ok"
    } else {
        "edge"
    }
}

fn compute(cfg: &ScanConfig, traj: &MapTrajectory, n: u64) -> Result<Row, covmet::Error> {
    Ok(match cfg.method {
        Method::BoundAnalytic => {
            let opt = optimize_time(traj, n, cfg.bracket)?.optimum;
            Row { flag: edge(&opt), opt }
        }
        Method::Ghz => {
            let opt = ghz_optimize_time(traj, n, cfg.bracket)?;
            Row { flag: edge(&opt), opt }
        }
        Method::BoundNumeric => {
            let opts = MinimizeOptions {
                seed: cfg.seed,
                ..MinimizeOptions::default()
            };
            let r = optimize_time_numeric(traj, n, cfg.bracket, &opts)?;
            let flag = if r.flagged { "budget" } else { edge(&r.optimum) };
            Row { opt: r.optimum, flag }
        }
        Method::Oracle => {
            let ghz = DensityMatrix::ghz(n as usize)?;
            let bracket = cfg.bracket.unwrap_or_else(|| default_bracket(traj));
            let opt = optimize_time_with(n, bracket, |t| oracle_qfi(&ghz, &traj.at(t), n as usize, t))?;
            Row { flag: edge(&opt), opt }
        }
    })
}

pub fn run(cfg: &ScanConfig) -> Result<(), CliError> {
    let traj = cfg.model.trajectory()?;
    let exponent = cfg.model.scaling_exponent();
    let rows: Vec<Row> = cfg
        .ns
        .par_iter()
        .map(|&n| compute(cfg, &traj, n))
        .collect::<Result<_, _>>()?;

    let sink: Box<dyn Write> = match &cfg.output {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(["N", "t_opt", "mse_T", "rescaled_const", "method", "flag"])?;
    for r in &rows {
        w.write_record([
            r.opt.n.to_string(),
            format!("{:.12e}", r.opt.t_opt),
            format!("{:.12e}", r.opt.mse_t),
            format!("{:.12e}", r.opt.rescaled(exponent)),
            cfg.method.label().to_string(),
            r.flag.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
