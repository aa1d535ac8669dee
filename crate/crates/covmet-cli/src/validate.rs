use clap::Args;
use covmet::PhaseCovariantMap;

use crate::error::CliError;
use crate::model_args::ModelArgs;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, allow_hyphen_values = true, required_unless_present = "model")]
    pub eta_perp: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "model")]
    pub eta_par: Option<f64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "model")]
    pub kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub phi: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Time at which the model's map is evaluated
    #[arg(long, requires = "model")]
    pub t: Option<f64>,
}

/// Prints the CPTP report; returns whether the map is CPTP.
pub fn run(args: &ValidateArgs) -> Result<bool, CliError> {
    let map = match args.model.model() {
        Some(model) => {
            let t = args
                .t
                .ok_or_else(|| CliError::Usage("--model needs --t".into()))?;
            model?.trajectory()?.at(t)
        }
        None => {
            let get = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::Usage(format!("missing --{name}")));
            PhaseCovariantMap::new(
                get(args.eta_perp, "eta-perp")?,
                get(args.eta_par, "eta-par")?,
                get(args.kappa, "kappa")?,
                args.phi,
            )?
        }
    };
    let report = map.validate_cptp()?;
    let [m1, m2, m3] = report.margins;
    println!("map: eta_perp={} eta_par={} kappa={} phi={}", map.eta_perp, map.eta_par, map.kappa, map.phi);
    println!("margin 1 - (eta_par + kappa)               = {m1:.6e}");
    println!("margin 1 - (eta_par - kappa)               = {m2:.6e}");
    println!("margin 1 + eta_par - sqrt(4eta_perp^2+k^2) = {m3:.6e}");
    println!("Choi minimum eigenvalue                    = {:.6e}", map.choi().min_eigenvalue());
    println!("{}", if report.is_cptp { "CPTP" } else { "NOT CPTP" });
    Ok(report.is_cptp)
}
