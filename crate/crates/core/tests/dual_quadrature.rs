//! Adaptive Gauss–Kronrod decoherence rates against fixed composite
//! Gauss–Legendre sums of an independently written integrand.

use std::f64::consts::PI;

use gie_core::decoherence::{decoherence_rate, Coupling, DecoherenceSpec, Density};
use gie_core::PhysicalConstants;
use gie_testkit::oracles::rate_reference;

fn reference(spec: &DecoherenceSpec, t: f64, g: impl Fn(f64) -> f64, rho: impl Fn(f64) -> f64, knots: &[f64]) -> f64 {
    rate_reference(spec.wave_speed, spec.k_max(), t, g, rho, knots)
}

fn check(spec: DecoherenceSpec, t: f64, g: impl Fn(f64) -> f64, rho: impl Fn(f64) -> f64, knots: &[f64]) {
    let got = decoherence_rate(&spec, t).unwrap();
    let want = reference(&spec, t, g, rho, knots);
    let rel = ((got - want) / want).abs();
    assert!(rel < 1e-8, "{:?}: {got:e} vs {want:e} ({rel:e})", spec.coupling);
}

#[test]
fn constant_coupling_free_space() {
    let mut s = DecoherenceSpec::new(Coupling::Constant(0.3), 50.0);
    s.wave_speed = 1.0;
    check(s, 2.0, |_| 0.3, |k| k * k, &[]);
}

#[test]
fn power_law_coupling_uniform_density() {
    let mut s = DecoherenceSpec::new(
        Coupling::PowerLaw { g0: 0.2, k0: 1.5, exponent: 1.5 },
        30.0,
    );
    s.wave_speed = 2.0;
    s.density = Density::Uniform(0.7);
    check(s, 1.3, |k| 0.2 * (k / 1.5f64).powf(1.5), |_| 0.7, &[]);
}

#[test]
fn tabulated_coupling_power_law_density() {
    let ks = vec![0.0, 2.0, 5.0, 9.0, 20.0];
    let gs = vec![0.1, 0.4, 0.2, 0.6, 0.0];
    let mut s = DecoherenceSpec::new(Coupling::Tabulated { k: ks.clone(), g: gs.clone() }, 15.0);
    s.wave_speed = 1.0;
    s.density = Density::PowerLaw { rho0: 1.2, k0: 3.0, exponent: 0.5 };
    let interp = move |k: f64| {
        let i = (1..ks.len()).find(|&i| k <= ks[i]).unwrap_or(ks.len() - 1);
        let t = (k - ks[i - 1]) / (ks[i] - ks[i - 1]);
        gs[i - 1] + t * (gs[i] - gs[i - 1])
    };
    check(s, 0.8, interp, |k| 1.2 * (k / 3.0f64).sqrt(), &[2.0, 5.0, 9.0]);
}

#[test]
fn quadrupole_coupling() {
    let k = PhysicalConstants::codata2018();
    let (v, x, vol) = (1e-20, 1e-6, 1e-3);
    let mut s = DecoherenceSpec::new(Coupling::Quadrupole { potential: v, x, volume: vol }, 1e4);
    s.density = Density::FreeSpace { prefactor: 2.0 };
    let c = s.wave_speed;
    let pre = v * x * x * (16.0 * PI * k.g * k.hbar).sqrt() / (4.0 * k.c.powi(3) * vol.sqrt());
    check(s, 1e-3, move |kk| pre * (c * kk).powf(1.5), |kk| 2.0 * kk * kk, &[]);
}

#[test]
fn constant_coupling_uniform_density_long_time() {
    let mut s = DecoherenceSpec::new(Coupling::Constant(1.0), 200.0);
    s.wave_speed = 1.0;
    s.density = Density::Uniform(1.0);
    check(s, 3.0, |_| 1.0, |_| 1.0, &[]);
}
