//! Random inputs shared by the integration tests.
#![allow(dead_code)]

use covmet::PhaseCovariantMap;
use rand::Rng;

/// Uniform over the CPTP set in (η∥, κ, η⊥) coordinates, random φ.
pub fn random_cptp(r: &mut impl Rng) -> PhaseCovariantMap {
    let ea: f64 = r.random_range(-1.0..1.0);
    let km = 1.0 - ea.abs();
    let k = r.random_range(-km..=km);
    let em = ((1.0 + ea).powi(2) - k * k).max(0.0).sqrt() / 2.0;
    let ep = r.random_range(0.0..=em);
    PhaseCovariantMap::new(ep, ea, k, r.random_range(-3.0..3.0)).unwrap()
}

/// Random CPTP map kept away from the boundary and from η⊥ = 0.
pub fn random_interior(r: &mut impl Rng) -> PhaseCovariantMap {
    loop {
        let m = random_cptp(r);
        if m.eta_perp > 0.05 && m.cptp_margins().iter().all(|&x| x > 1e-3) {
            return m;
        }
    }
}

pub fn random_unital(r: &mut impl Rng) -> (f64, f64) {
    let ea: f64 = r.random_range(-0.95..0.999);
    let ep = r.random_range(0.02..0.999) * 0.5 * (1.0 + ea);
    (ep, ea)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
