mod common;

use covmet::ce_bounds::{f_upper_general, PPolicy};
use covmet::exact_oracle::{evolve, omega_derivative, oracle_qfi, qfi, DensityMatrix};
use covmet::ghz_strategy::ghz_qfi;
use covmet::kraus_opt::{f_num, family_objective, objective, KrausObjective, MinimizeOptions};
use covmet::linalg::{c, herm4_from_params, Mat2, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(r: &mut impl Rng) -> f64 {
    r.sample(StandardNormal)
}

#[test]
fn omega_derivative_matches_finite_difference() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-6;
    for _ in 0..20 {
        let m = common::random_interior(&mut r);
        let t = r.random_range(0.1..2.0);
        let s = DensityMatrix::random_pure(4, &mut r).unwrap();
        let probes = [0, 2];
        let out = evolve(&s, &m, t, &probes).unwrap();
        let plus = evolve(&s, &m.with_phi(m.phi + h * t), t, &probes).unwrap();
        let minus = evolve(&s, &m.with_phi(m.phi - h * t), t, &probes).unwrap();
        let fd = (plus.matrix() - minus.matrix()) / c(2.0 * h);
        let an = omega_derivative(&out, t, &probes).unwrap();
        assert!(an.trace().norm() < 1e-14);
        let err = (fd - an.matrix()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(err < 1e-8, "{err}");
        assert!(out.validate().is_ok());
    }
}

#[test]
fn qfi_is_convex_in_the_state() {
    let mut r = ChaCha8Rng::seed_from_u64(22);
    let probes = [0, 1, 2];
    for _ in 0..20 {
        let m = common::random_interior(&mut r);
        let t = r.random_range(0.1..2.0);
        let a = evolve(&DensityMatrix::random_pure(3, &mut r).unwrap(), &m, t, &probes).unwrap();
        let b = evolve(&DensityMatrix::random_pure(3, &mut r).unwrap(), &m, t, &probes).unwrap();
        let q = r.random_range(0.0..1.0);
        let mix = DensityMatrix::mix(&a, &b, q).unwrap();
        let f = |s: &DensityMatrix| qfi(s, &omega_derivative(s, t, &probes).unwrap()).unwrap();
        assert!(f(&mix) <= q * f(&a) + (1.0 - q) * f(&b) + 1e-9);
    }
}

#[test]
fn ghz_formula_matches_oracle_small() {
    let mut r = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let m = common::random_cptp(&mut r);
        let t = r.random_range(0.05..3.0);
        for n in 1..=4usize {
            let exact = oracle_qfi(&DensityMatrix::ghz(n).unwrap(), &m, n, t).unwrap();
            let formula = ghz_qfi(&m, n as u64, t).unwrap();
            assert!((exact - formula).abs() <= 1e-9 * exact.max(1e-300), "{m:?} N={n}: {exact} vs {formula}");
        }
    }
}

#[test]
fn ghz_two_qubit_near_hand_example() {
    let m = covmet::PhaseCovariantMap::new(0.89, 0.8, 0.1, 0.0).unwrap();
    let exact = oracle_qfi(&DensityMatrix::ghz(2).unwrap(), &m, 2, 1.0).unwrap();
    let den = 0.125 * (0.1f64.powi(2) + 1.7f64.powi(2) + 0.3f64.powi(2) + 1.9f64.powi(2));
    let hand = 4.0 * 0.89f64.powi(4) / den;
    assert!((exact - hand).abs() < 1e-10);
    assert!((ghz_qfi(&m, 2, 1.0).unwrap() - hand).abs() < 1e-12);
}

fn random_unitary(r: &mut impl Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(4, 4, |_, _| C64::new(gaussian(r), gaussian(r)));
    g.qr().q()
}

#[test]
fn objective_invariant_under_kraus_remixing() {
    let mut r = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..50 {
        let m = common::random_cptp(&mut r);
        let (n, t) = (r.random_range(1..500u64), r.random_range(0.05..2.0));
        let obj = KrausObjective::from_map(&m, n, t).unwrap();
        let params: Vec<f64> = (0..16).map(|_| gaussian(&mut r)).collect();
        let shift = gaussian(&mut r);
        let gen = herm4_from_params(&params) + covmet::linalg::Mat4::identity() * c(shift);
        let v = random_unitary(&mut r);
        let mix = |ks: &[Mat2; 4]| -> Vec<Mat2> {
            (0..4).map(|a| (0..4).map(|i| ks[i] * v[(a, i)]).sum()).collect()
        };
        let g = DMatrix::from_fn(4, 4, |i, j| gen[(i, j)]);
        let g2 = &v * g * v.adjoint();
        let remixed = family_objective(&mix(&obj.kraus.ops), &mix(&obj.kraus.derivs), &g2, n, t).unwrap();
        let direct = objective(&gen, &obj).unwrap();
        assert!(common::rel(remixed, direct) < 1e-10, "{remixed} vs {direct}");
    }
}

#[test]
fn numeric_bound_tightens_mixture_bound() {
    let mut r = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..100 {
        let m = common::random_interior(&mut r);
        let (n, t) = (r.random_range(1..1000u64), r.random_range(0.05..2.0));
        let num = f_num(&m, n, t, &MinimizeOptions::default()).unwrap();
        let mix = f_upper_general(&m, n, t, PPolicy::Scan).unwrap().value;
        assert!(num.f_num <= mix * (1.0 + 1e-6), "{m:?} N={n} t={t}: {} > {mix}", num.f_num);
        let ghz = ghz_qfi(&m, n, t).unwrap();
        assert!(ghz <= num.f_num * (1.0 + 1e-9) + 1e-9);
        assert!(ghz <= mix * (1.0 + 1e-9) + 1e-9);
    }
}

#[test]
fn bounds_dominate_oracle_spot_check() {
    let mut r = ChaCha8Rng::seed_from_u64(26);
    for n in 1..=3usize {
        let m = common::random_interior(&mut r);
        let t = r.random_range(0.1..2.0);
        let mix = f_upper_general(&m, n as u64, t, PPolicy::Scan).unwrap().value;
        let num = f_num(&m, n as u64, t, &MinimizeOptions::default()).unwrap().f_num;
        for _ in 0..10 {
            let s = DensityMatrix::random_pure(2 * n, &mut r).unwrap();
            let f = oracle_qfi(&s, &m, n, t).unwrap();
            assert!(mix - f >= -1e-9 && num - f >= -1e-9, "N={n}: oracle {f}, mix {mix}, num {num}");
        }
    }
}
