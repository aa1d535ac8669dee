use covmet::lindblad_bridge::{is_cp_divisible, rates_from_trajectory, trajectory_from_rates};
use covmet::models::{Model, SlParams};
use covmet::optim::log_space;

fn models() -> Vec<Model> {
    vec![
        Model::ShabaniLidar(SlParams::reference()),
        Model::ShabaniLidar(SlParams::new(1.3, 0.05, 0.5).unwrap()),
        Model::Semigroup { g_plus: 0.1, g_minus: 0.4, g_z: 0.2 },
        Model::Semigroup { g_plus: 0.0, g_minus: 0.0, g_z: 0.35 },
        Model::ZenoDephasing { a: 0.7 },
        Model::ZenoUnital { a: 1.1 },
        Model::Noiseless,
    ]
}

#[test]
fn every_model_is_cptp_along_its_trajectory() {
    for model in models() {
        let traj = model.trajectory().unwrap();
        let t_end = (50.0 * traj.tau_char()).min(traj.t_max());
        for i in 0..1000 {
            let t = t_end * i as f64 / 999.0;
            let m = traj.at(t);
            assert!(m.is_cptp(), "{} at t = {t}: {m:?}", model.name());
        }
        assert!(traj.initial_condition_error() < 1e-14, "{}", model.name());
    }
}

#[test]
fn rates_round_trip_through_integration() {
    for model in models() {
        let Some(rates) = model.rates() else { continue };
        let traj = model.trajectory().unwrap();
        let grid: Vec<f64> = (1..=60).map(|i| 0.1 * i as f64 * traj.tau_char()).collect();
        let integrated = trajectory_from_rates(rates.clone(), &grid).unwrap();
        assert!(integrated.singularity.is_none());
        for (t, m) in &integrated.samples {
            let exact = traj.at(*t);
            let err = (m.eta_perp - exact.eta_perp)
                .abs()
                .max((m.eta_par - exact.eta_par).abs())
                .max((m.kappa - exact.kappa).abs());
            assert!(err < 1e-6, "{} at t = {t}: {err}", model.name());
        }
        for &t in grid.iter().step_by(7) {
            let back = rates_from_trajectory(&integrated.trajectory, t).unwrap();
            let diff = back.max_abs_diff(&rates.at(t));
            assert!(diff < 1e-6, "{} at t = {t}: {diff}", model.name());
        }
    }
}

#[test]
fn semigroups_are_cp_divisible() {
    let grid = log_space(1e-6, 100.0, 200);
    for model in models() {
        if let Model::Semigroup { .. } = model {
            assert!(is_cp_divisible(model.rates().unwrap().as_ref(), &grid).divisible);
        }
    }
}
