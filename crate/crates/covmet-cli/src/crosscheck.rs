use clap::Args;
use covmet::ce_bounds::{f_upper_general, PPolicy};
use covmet::exact_oracle::{oracle_qfi, DensityMatrix};
use covmet::ghz_strategy::ghz_qfi;
use covmet::kraus_opt::{f_num, MinimizeOptions};
use covmet::PhaseCovariantMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::model_args::ModelArgs;

const GHZ_TOL: f64 = 1e-9;
const SLACK_TOL: f64 = -1e-9;

#[derive(Debug, Args)]
pub struct CrosscheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Use a random CPTP channel drawn from --seed instead of a model
    #[arg(long, conflicts_with = "model")]
    pub random: bool,
    /// Largest probe number (ancillae: as many as probes)
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub n: u64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Random input states per N
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn random_channel(r: &mut impl Rng) -> Result<PhaseCovariantMap, covmet::Error> {
    let ea: f64 = r.random_range(-1.0..1.0);
    let km = 1.0 - ea.abs();
    let k = r.random_range(-km..=km);
    let em = ((1.0 + ea).powi(2) - k * k).max(0.0).sqrt() / 2.0;
    PhaseCovariantMap::new(r.random_range(0.0..=em), ea, k, r.random_range(-3.0..3.0))
}

/// Prints the check table; returns whether every check passed.
pub fn run(args: &CrosscheckArgs) -> Result<bool, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let map = if args.random {
        random_channel(&mut rng)?
    } else {
        let model = args
            .model
            .model()
            .ok_or_else(|| CliError::Usage("crosscheck needs --model or --random".into()))??;
        model.trajectory()?.at(args.t)
    };
    map.validate_cptp()?;
    let t = args.t;
    let opts = MinimizeOptions {
        seed: args.seed,
        ..MinimizeOptions::default()
    };
    println!("map: eta_perp={} eta_par={} kappa={} phi={}  t={t}", map.eta_perp, map.eta_par, map.kappa, map.phi);
    println!("{:<4}{:>16}{:>16}{:>16}{:>16}{:>14}{:>14}  result", "N", "oracle GHZ", "ghz formula", "bound mixture", "bound numeric", "ghz rel err", "min slack");
    let mut all_ok = true;
    for n in 1..=args.n {
        let k = n as usize;
        let oracle_ghz = oracle_qfi(&DensityMatrix::ghz(k)?, &map, k, t)?;
        let formula = ghz_qfi(&map, n, t)?;
        let mix = f_upper_general(&map, n, t, PPolicy::Scan)?.value;
        let num = f_num(&map, n, t, &opts)?.f_num;
        let ghz_err = if oracle_ghz == formula { 0.0 } else { (oracle_ghz - formula).abs() / oracle_ghz.abs().max(formula.abs()) };
        let mut slack = mix.min(num) - oracle_ghz;
        for _ in 0..args.samples {
            let input = DensityMatrix::random_pure(2 * k, &mut rng)?;
            slack = slack.min(mix.min(num) - oracle_qfi(&input, &map, k, t)?);
        }
        let ok = ghz_err < GHZ_TOL && slack >= SLACK_TOL;
        all_ok &= ok;
        println!(
            "{n:<4}{oracle_ghz:>16.9e}{formula:>16.9e}{mix:>16.9e}{num:>16.9e}{ghz_err:>14.2e}{slack:>14.2e}  {}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("{}", if all_ok { "all checks passed" } else { "some checks FAILED" });
    Ok(all_ok)
}
