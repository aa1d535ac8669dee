use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use covmet::lindblad_bridge::{is_cp_divisible, rates_from_trajectory};

use crate::error::CliError;
use crate::model_args::ModelArgs;

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// End of the time grid (default: 10 characteristic times)
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Writes the map and the master-equation rates recovered from it on a uniform grid.
pub fn run(args: &RatesArgs) -> Result<(), CliError> {
    let model = args
        .model
        .model()
        .ok_or_else(|| CliError::Usage("rates needs --model".into()))??;
    let traj = model.trajectory()?;
    let t_end = args.t_end.unwrap_or(10.0 * traj.tau_char()).min(traj.t_max());
    if t_end.is_nan() || t_end <= 0.0 || args.points < 2 {
        return Err(CliError::Usage("need --t-end > 0 and at least 2 points".into()));
    }
    let grid: Vec<f64> = (1..=args.points).map(|i| t_end * i as f64 / args.points as f64).collect();

    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(["t", "eta_perp", "eta_par", "kappa", "h", "gamma_plus", "gamma_minus", "gamma_z"])?;
    let mut recovered = Vec::with_capacity(grid.len());
    for &t in &grid {
        let m = traj.at(t);
        let r = rates_from_trajectory(&traj, t)?;
        recovered.push((t, r));
        w.write_record(
            [t, m.eta_perp, m.eta_par, m.kappa, r.h, r.gamma_plus, r.gamma_minus, r.gamma_z]
                .iter()
                .map(|x| format!("{x:.12e}")),
        )?;
    }
    w.flush()?;

    let lookup = move |t: f64| {
        recovered
            .iter()
            .find(|(s, _)| *s == t)
            .map(|(_, r)| *r)
            .expect("grid time")
    };
    let cp = is_cp_divisible(&lookup, &grid);
    match cp.first_violation {
        None => eprintln!("CP-divisible on the grid"),
        Some(t) => eprintln!("not CP-divisible: first negative rate at t = {t}"),
    }
    Ok(())
}
