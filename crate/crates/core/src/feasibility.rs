//! Closed-form calculators and the experiment planner.
//!
//! Each calculator is composed from [`Quantity`] values so a mismatched
//! formula fails with [`Error::Units`] instead of returning a number.

use std::f64::consts::PI;

use crate::constants::PhysicalConstants;
use crate::decoherence::{decoherence_rate, field_mass_entanglement, DecoherenceSpec};
use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::interferometer::{gravitational_phase, ExperimentParams};
use crate::linalg::{C64, ZERO};
use crate::mediator::penrose_collapse_time;
use crate::qstate::{negativity, HilbertLayout, PureState};
use crate::units::{Dim, Quantity};

/// Speeds above this fraction of c trigger a non-relativistic warning.
pub const NONRELATIVISTIC_LIMIT: f64 = 0.1;

/// A named numeric result with its unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    pub quantity: Quantity,
}

/// A pass/fail check and the rule it applies.
#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    pub name: String,
    pub passed: bool,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub values: Vec<Entry>,
    pub flags: Vec<Flag>,
    pub warnings: Vec<String>,
    /// "name = value unit (source)" for every constant used.
    pub constants: Vec<String>,
}

impl FeasibilityReport {
    fn with_constants(k: &PhysicalConstants) -> Self {
        FeasibilityReport {
            constants: k
                .provenance()
                .into_iter()
                .map(|(n, v, u, s)| format!("{n} = {v:e} {u} ({s})"))
                .collect(),
            ..Default::default()
        }
    }

    fn push(&mut self, name: &str, q: Quantity) {
        self.values.push(Entry {
            name: name.to_string(),
            quantity: q,
        });
    }

    fn flag(&mut self, name: &str, passed: bool, rule: impl Into<String>) {
        self.flags.push(Flag {
            name: name.to_string(),
            passed,
            rule: rule.into(),
        });
    }

    pub fn value(&self, name: &str) -> Option<Quantity> {
        self.values.iter().find(|e| e.name == name).map(|e| e.quantity)
    }

    pub fn passed(&self, name: &str) -> Option<bool> {
        self.flags.iter().find(|f| f.name == name).map(|f| f.passed)
    }

    /// True when every flag passed.
    pub fn all_passed(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }
}

/// How the gravito-electric field is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GravitoElectric {
    /// E_G = G M / r², Newton's law.
    #[default]
    Coulomb,
    /// E_G = (1/ε_G) M / r² with ε_G = 1/(4πG) taken as printed.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GravitoEmForces {
    pub electric: Quantity,
    pub magnetic: Quantity,
    pub warnings: Vec<String>,
}

/// F_E = M E_G and F_B = M v B_G for two masses M a distance r apart moving
/// in parallel at speed v. The mass current is I = M v and the moving point
/// source gives B_G = μ_G I / r² with μ_G = 4G/c², so F_B/F_E = 4v²/c² in
/// the Coulomb normalisation.
pub fn gravito_em_forces(
    mass: f64,
    r: f64,
    v: f64,
    convention: GravitoElectric,
    k: &PhysicalConstants,
) -> Result<GravitoEmForces> {
    if r == 0.0 {
        return Err(invalid("r", "zero separation"));
    }
    require_positive("M", mass)?;
    require_positive("r", r)?;
    require_non_negative("v", v)?;
    let mut warnings = Vec::new();
    if v > NONRELATIVISTIC_LIMIT * k.c {
        warnings.push(format!(
            "v = {v:e} m/s exceeds {NONRELATIVISTIC_LIMIT} c; the weak-field forces are non-relativistic"
        ));
    }
    let m = Quantity::new(mass, Dim::KG);
    let r = Quantity::new(r, Dim::M);
    let v = Quantity::new(v, Dim::M_PER_S);
    let prefactor = match convention {
        GravitoElectric::Coulomb => 1.0,
        GravitoElectric::Literal => 4.0 * PI,
    };
    let e_g = k.g_q() * m / r.powi(2) * prefactor;
    let mu_g = k.g_q() / k.c_q().powi(2) * 4.0;
    let current = m * v;
    let b_g = mu_g * current / r.powi(2);
    Ok(GravitoEmForces {
        electric: Quantity::new((m * e_g).expect(Dim::N)?, Dim::N),
        magnetic: Quantity::new((m * v * b_g).expect(Dim::N)?, Dim::N),
        warnings,
    })
}

/// l_P² / L⁴ (m⁻²).
pub fn christoffel_uncertainty_bound(l: f64, k: &PhysicalConstants) -> Result<Quantity> {
    if l == 0.0 {
        return Err(invalid("L", "zero confinement length"));
    }
    require_positive("L", l)?;
    let lp = Quantity::new(k.planck_length(), Dim::M);
    let bound = lp.powi(2) / Quantity::new(l, Dim::M).powi(4);
    Ok(Quantity::new(bound.expect(Dim::new(0, -2, 0, 0))?, bound.dim))
}

/// ħ c / L⁴ (J m⁻³).
pub fn em_uncertainty_bound(l: f64, k: &PhysicalConstants) -> Result<Quantity> {
    if l == 0.0 {
        return Err(invalid("L", "zero confinement length"));
    }
    require_positive("L", l)?;
    let bound = k.hbar_q() * k.c_q() / Quantity::new(l, Dim::M).powi(4);
    Ok(Quantity::new(bound.expect(Dim::new(1, -1, -2, 0))?, bound.dim))
}

/// Which-path detection through graviton emission versus fringe size.
///
/// Which-path information needs (m/m_P)² ≥ (R/d)². The fringe spacing
/// without it is l = ħL/(m v d); the `fringes_unobservable` flag engages
/// when the which-path condition holds and l ≤ l_P.
pub fn baym_ozawa_check(
    m: f64,
    r: f64,
    d: f64,
    l: f64,
    v: f64,
    k: &PhysicalConstants,
) -> Result<FeasibilityReport> {
    for (name, x) in [("m", m), ("R", r), ("d", d), ("L", l), ("v", v)] {
        require_positive(name, x)?;
    }
    let mut rep = FeasibilityReport::with_constants(k);
    if d >= r {
        rep.warnings
            .push(format!("d = {d:e} m is not small compared with R = {r:e} m"));
    }
    if v > NONRELATIVISTIC_LIMIT * k.c {
        rep.warnings
            .push(format!("v = {v:e} m/s exceeds {NONRELATIVISTIC_LIMIT} c"));
    }
    let mass_ratio = (Quantity::new(m, Dim::KG) / Quantity::new(k.planck_mass(), Dim::KG))
        .powi(2)
        .expect(Dim::NONE)?;
    let geom_ratio = (Quantity::new(r, Dim::M) / Quantity::new(d, Dim::M))
        .powi(2)
        .expect(Dim::NONE)?;
    let fringe = (k.hbar_q() * Quantity::new(l, Dim::M)
        / (Quantity::new(m, Dim::KG) * Quantity::new(v, Dim::M_PER_S) * Quantity::new(d, Dim::M)))
    .expect(Dim::M)?;
    let lp = k.planck_length();
    rep.push("mass_ratio_squared", Quantity::scalar(mass_ratio));
    rep.push("distance_ratio_squared", Quantity::scalar(geom_ratio));
    rep.push("fringe_size", Quantity::new(fringe, Dim::M));
    rep.push("planck_length", Quantity::new(lp, Dim::M));
    let which_path = mass_ratio >= geom_ratio;
    rep.flag("which_path", which_path, "(m/m_P)^2 >= (R/d)^2");
    rep.flag("fringe_below_planck", fringe <= lp, "hbar L/(m v d) <= l_P");
    rep.flag(
        "fringes_unobservable",
        which_path && fringe <= lp,
        "which_path and fringe_below_planck",
    );
    Ok(rep)
}

/// t = m s²/ħ (s).
pub fn peres_rosen_time(m: f64, s: f64, k: &PhysicalConstants) -> Result<Quantity> {
    require_positive("m", m)?;
    require_positive("s", s)?;
    let t = Quantity::new(m, Dim::KG) * Quantity::new(s, Dim::M).powi(2) / k.hbar_q();
    Ok(Quantity::new(t.expect(Dim::S)?, Dim::S))
}

/// φ = 2π g m_n² λ A sin(tilt) / h² (rad).
pub fn cow_phase(
    lambda: f64,
    area: f64,
    tilt: f64,
    m_n: f64,
    g: f64,
    k: &PhysicalConstants,
) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_positive("A", area)?;
    require_positive("m_n", m_n)?;
    require_non_negative("g", g)?;
    if !tilt.is_finite() {
        return Err(invalid("tilt", "must be finite"));
    }
    let h = Quantity::new(k.h(), Dim::J_S);
    let phi = Quantity::new(g, Dim::M_PER_S2)
        * Quantity::new(m_n, Dim::KG).powi(2)
        * Quantity::new(lambda, Dim::M)
        * Quantity::new(area, Dim::M2)
        / h.powi(2)
        * (2.0 * PI * tilt.sin());
    phi.expect(Dim::NONE)
}

/// φ_S = 2 m Ω A / ħ (rad).
pub fn sagnac_phase(m: f64, omega: f64, area: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("m", m)?;
    require_non_negative("Omega", omega)?;
    require_positive("A", area)?;
    let phi = Quantity::new(m, Dim::KG) * Quantity::new(omega, Dim::PER_S) * Quantity::new(area, Dim::M2)
        / k.hbar_q()
        * 2.0;
    phi.expect(Dim::NONE)
}

/// Two parties, each in cos θ|m₁⟩ + sin θ|m₂⟩, where the mass eigenstates
/// carry rest energies E₁, E₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSuperposition {
    pub theta: f64,
    pub e1: f64,
    pub e2: f64,
    pub m1: f64,
    pub m2: f64,
    pub d: f64,
    pub dt: f64,
}

/// Labels of the two parties.
pub const PARTY_A: &str = "A";
pub const PARTY_B: &str = "B";

/// Branch |ij⟩ picks up exp(i[(E_i + E_j)/ħ + G m_i m_j/(ħ d)]Δt). Returns
/// the normalised state and its negativity.
pub fn mass_superposition_phases(
    input: &MassSuperposition,
    k: &PhysicalConstants,
) -> Result<(PureState, f64)> {
    let s = input;
    if s.d == 0.0 {
        return Err(invalid("d", "zero separation"));
    }
    for (name, x) in [("m1", s.m1), ("m2", s.m2), ("d", s.d)] {
        require_positive(name, x)?;
    }
    for (name, x) in [("E1", s.e1), ("E2", s.e2), ("dt", s.dt)] {
        require_non_negative(name, x)?;
    }
    if !s.theta.is_finite() {
        return Err(invalid("theta", "must be finite"));
    }
    let amp = [s.theta.cos(), s.theta.sin()];
    let masses = [s.m1, s.m2];
    let energies = [s.e1, s.e2];
    let hbar = k.hbar_q();
    let dt = Quantity::new(s.dt, Dim::S);
    let mut amps = vec![ZERO; 4];
    for i in 0..2 {
        for j in 0..2 {
            let e = Quantity::new(energies[i] + energies[j], Dim::J) / hbar * dt;
            let g = k.g_q() * Quantity::new(masses[i], Dim::KG) * Quantity::new(masses[j], Dim::KG)
                / (hbar * Quantity::new(s.d, Dim::M))
                * dt;
            let phase = e.try_add(g)?.expect(Dim::NONE)?;
            amps[2 * i + j] = C64::from_polar(amp[i] * amp[j], phase);
        }
    }
    let layout = HilbertLayout::qubits(&[PARTY_A, PARTY_B])?;
    let psi = PureState::normalized(amps, layout)?;
    let n = negativity(&psi.to_density(), &[PARTY_A])?;
    Ok((psi, n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    /// The phase criterion is Δφ ≥ π(1 − slack).
    pub slack: f64,
    /// Additional decoherence rate (1/s) added to the budget.
    pub extra_rate: f64,
    /// Superposition size used for the collapse time; defaults to d₁.
    pub superposition_size: Option<f64>,
    /// Count the collapse rate against the budget.
    pub include_collapse: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            slack: 0.9,
            extra_rate: 0.0,
            superposition_size: None,
            include_collapse: false,
        }
    }
}

/// Aggregates the phases, ξ, the collapse time and the decoherence budget
/// for one configuration and flags the phase and rate criteria.
pub fn plan(
    params: &ExperimentParams,
    budget: &DecoherenceSpec,
    options: &PlanOptions,
) -> Result<FeasibilityReport> {
    params.validate()?;
    if !(options.slack.is_finite() && (0.0..=1.0).contains(&options.slack)) {
        return Err(invalid("slack", "must lie in [0, 1]"));
    }
    require_non_negative("extra_rate", options.extra_rate)?;
    let k = &params.constants;
    let mut rep = FeasibilityReport::with_constants(k);
    let pair = params.phase_pair()?;
    let phase_d1 = gravitational_phase(params.m, params.d1, params.dt, k)?;
    let (xi, entropy) = field_mass_entanglement(params.m, params.d1, params.dt, k)?;
    let size = options.superposition_size.unwrap_or(params.d1);
    let t_collapse = penrose_collapse_time(params.m, size, k)?;
    let gamma_field = decoherence_rate(budget, params.dt)?;
    let mut gamma = gamma_field + options.extra_rate;
    if options.include_collapse {
        gamma += 1.0 / t_collapse;
    }
    let rad = Quantity::scalar;
    rep.push("phase_d1", rad(phase_d1));
    rep.push("phi1", rad(pair.phi1));
    rep.push("delta_phi", rad(pair.delta_phi));
    rep.push("entangling_phase", rad(pair.entangling_phase()));
    rep.push("xi", rad(xi));
    rep.push("linear_entropy_estimate", rad(entropy));
    rep.push("penrose_time", Quantity::new(t_collapse, Dim::S));
    rep.push("decoherence_rate", Quantity::new(gamma_field, Dim::PER_S));
    rep.push("total_rate", Quantity::new(gamma, Dim::PER_S));
    let exposure = (Quantity::new(gamma, Dim::PER_S) * Quantity::new(params.dt, Dim::S))
        .expect(Dim::NONE)?;
    rep.push("rate_times_dt", rad(exposure));
    let threshold = PI * (1.0 - options.slack);
    rep.flag(
        "phase",
        pair.delta_phi >= threshold,
        format!("delta_phi >= pi (1 - {}) = {threshold:e} rad", options.slack),
    );
    rep.flag("decoherence", exposure <= 1.0, "gamma * dt <= 1");
    if !gamma.is_finite() {
        return Err(Error::Numerical("decoherence rate is not finite".into()));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::Coupling;
    use proptest::prelude::*;

    fn k() -> PhysicalConstants {
        PhysicalConstants::codata2018()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gravito_forces_examples() {
        let f = gravito_em_forces(1e-12, 1e-6, 0.0, GravitoElectric::Coulomb, &k()).unwrap();
        // G M²/r² = 6.6743e-11 · 1e-24 / 1e-12
        assert!(rel(f.electric.value, 6.6743e-23) < 1e-12);
        assert_eq!(f.magnetic.value, 0.0);
        assert_eq!(f.electric.dim, Dim::N);
        let lit = gravito_em_forces(1e-12, 1e-6, 0.0, GravitoElectric::Literal, &k()).unwrap();
        assert!(rel(lit.electric.value / f.electric.value, 4.0 * PI) < 1e-14);
        let v = 1e6;
        let f = gravito_em_forces(1e-12, 1e-6, v, GravitoElectric::Coulomb, &k()).unwrap();
        let ratio = f.magnetic.value / f.electric.value;
        assert!(rel(ratio, 4.0 * v * v / (k().c * k().c)) < 1e-12);
        assert!(ratio > 1e-5 && ratio < 1e-4);
        assert!(f.warnings.is_empty());
        assert!(!gravito_em_forces(1.0, 1.0, 0.2 * k().c, GravitoElectric::Coulomb, &k())
            .unwrap()
            .warnings
            .is_empty());
        assert!(gravito_em_forces(1.0, 0.0, 1.0, GravitoElectric::Coulomb, &k()).is_err());
    }

    #[test]
    fn uncertainty_bound_examples() {
        let k = k();
        let lp = k.planck_length();
        assert!(rel(christoffel_uncertainty_bound(lp.sqrt(), &k).unwrap().value, 1.0) < 1e-12);
        let b = christoffel_uncertainty_bound(1e-6, &k).unwrap().value;
        assert!(rel(b, 2.6116e-46) < 1e-3, "{b:e}");
        let em = em_uncertainty_bound(1e-6, &k).unwrap().value;
        assert!(rel(em, 3.1615e-2) < 1e-3, "{em:e}");
        for l in [1e-9, 1e-3, 2.0] {
            let r = christoffel_uncertainty_bound(l, &k).unwrap().value
                / em_uncertainty_bound(l, &k).unwrap().value;
            assert!(rel(r, lp * lp / (k.hbar * k.c)) < 1e-12);
        }
        assert!(em_uncertainty_bound(0.0, &k).is_err());
        assert!(christoffel_uncertainty_bound(0.0, &k).is_err());
    }

    #[test]
    fn baym_ozawa_examples() {
        let k = k();
        let (r, d, l, v) = (1.0, 1e-3, 1e-30, 1.0);
        let m = k.planck_mass() * r / d;
        let rep = baym_ozawa_check(m * (1.0 + 1e-12), r, d, l, v, &k).unwrap();
        assert_eq!(rep.passed("which_path"), Some(true));
        assert_eq!(rep.passed("fringes_unobservable"), Some(true));
        let small = baym_ozawa_check(1e-30, r, d, l, v, &k).unwrap();
        assert_eq!(small.passed("which_path"), Some(false));
        assert_eq!(small.passed("fringes_unobservable"), Some(false));
        let a = baym_ozawa_check(1e-3, r, d, 1.0, v, &k).unwrap();
        let b = baym_ozawa_check(2e-3, r, d, 1.0, v, &k).unwrap();
        let (fa, fb) = (a.value("fringe_size").unwrap(), b.value("fringe_size").unwrap());
        assert!(rel(fa.value / fb.value, 2.0) < 1e-14);
        assert_eq!(fa.dim, Dim::M);
        assert!(!baym_ozawa_check(1.0, 1e-3, 1.0, 1.0, 1.0, &k).unwrap().warnings.is_empty());
    }

    #[test]
    fn peres_rosen_examples() {
        let k = k();
        let t = peres_rosen_time(k.planck_mass(), 1e-4, &k).unwrap();
        assert!(rel(t.value, 2.0636e18) < 1e-3, "{:e}", t.value);
        assert!(t.value > crate::constants::UNIVERSE_AGE_S);
        let t4 = peres_rosen_time(k.planck_mass(), 4e-4, &k).unwrap();
        assert!(rel(t4.value / t.value, 16.0) < 1e-14);
        let atom = peres_rosen_time(1e-27, 1e-10, &k).unwrap();
        assert!(rel(atom.value, 9.4825e-14) < 1e-3, "{:e}", atom.value);
    }

    #[test]
    fn cow_examples() {
        let k = k();
        let mn = 1.674_927_5e-27;
        assert_eq!(cow_phase(1.4e-10, 1e-3, 0.0, mn, 9.81, &k).unwrap(), 0.0);
        let max = cow_phase(1.4e-10, 1e-3, PI / 2.0, mn, 9.81, &k).unwrap();
        for t in [0.1, 0.7, 1.2, 2.0, 3.0] {
            assert!(cow_phase(1.4e-10, 1e-3, t, mn, 9.81, &k).unwrap().abs() <= max);
        }
        let a2 = cow_phase(1.4e-10, 2e-3, PI / 2.0, mn, 9.81, &k).unwrap();
        let l2 = cow_phase(2.8e-10, 1e-3, PI / 2.0, mn, 9.81, &k).unwrap();
        assert!(rel(a2, 2.0 * max) < 1e-14 && rel(l2, 2.0 * max) < 1e-14);
        // neutron interferometry scale: tens of radians
        assert!(max > 10.0 && max < 100.0, "{max}");
    }

    #[test]
    fn cow_with_single_mass_power_is_not_dimensionless() {
        let k = k();
        let h = Quantity::new(k.h(), Dim::J_S);
        let bad = Quantity::new(9.81, Dim::M_PER_S2)
            * Quantity::new(1.67e-27, Dim::KG)
            * Quantity::new(1e-10, Dim::M)
            * Quantity::new(1e-3, Dim::M2)
            / h.powi(2);
        assert!(matches!(bad.expect(Dim::NONE), Err(Error::Units(_))));
    }

    #[test]
    fn sagnac_examples() {
        let k = k();
        assert_eq!(sagnac_phase(1e-26, 0.0, 1e-4, &k).unwrap(), 0.0);
        let p = sagnac_phase(1e-26, 1.0, 1e-4, &k).unwrap();
        assert!(rel(p, 1.8965e4) < 1e-3, "{p}");
        assert!(rel(sagnac_phase(3e-26, 1.0, 1e-4, &k).unwrap(), 3.0 * p) < 1e-14);
        assert!(rel(sagnac_phase(1e-26, 2.5, 1e-4, &k).unwrap(), 2.5 * p) < 1e-14);
        assert!(rel(sagnac_phase(1e-26, 1.0, 7e-4, &k).unwrap(), 7.0 * p) < 1e-14);
    }

    fn superposition(m1: f64, m2: f64, theta: f64) -> MassSuperposition {
        MassSuperposition {
            theta,
            e1: 1e-30,
            e2: 3e-30,
            m1,
            m2,
            d: 1e-4,
            dt: 1e-3,
        }
    }

    #[test]
    fn mass_superposition_examples() {
        let k = k();
        let s = superposition(1e-8, 2e-8, 0.6);
        let (_, n) = mass_superposition_phases(&s, &k.without_gravity()).unwrap();
        assert!(n < 1e-10);
        let (_, n) = mass_superposition_phases(&superposition(2e-8, 2e-8, 0.6), &k).unwrap();
        assert!(n < 1e-10);
        // G (m1 − m2)² Δt/(ħ d) = π makes the entangling phase π.
        let mp = k.planck_mass();
        let (m1, d) = (mp, 1e-4);
        let dt = 1e-3;
        let dm = (PI * k.hbar * d / (k.g * dt)).sqrt();
        let s = MassSuperposition {
            theta: PI / 4.0,
            e1: 0.0,
            e2: 0.0,
            m1,
            m2: m1 + dm,
            d,
            dt,
        };
        let (psi, n) = mass_superposition_phases(&s, &k).unwrap();
        assert!((n - 0.5).abs() < 1e-6, "{n}");
        // brute force over θ: π/4 is the maximiser
        for i in 1..40 {
            let t = PI / 2.0 * i as f64 / 40.0;
            let (_, ni) = mass_superposition_phases(&MassSuperposition { theta: t, ..s }, &k).unwrap();
            assert!(ni <= n + 1e-9);
        }
        assert!((psi.to_density().purity() - 1.0).abs() < 1e-12);
        assert!(mass_superposition_phases(&MassSuperposition { d: 0.0, ..s }, &k).is_err());
    }

    fn nominal() -> ExperimentParams {
        ExperimentParams::new(1e-12, 1e-6, 0.5e-6, 1e-6)
    }

    fn quiet_budget() -> DecoherenceSpec {
        DecoherenceSpec::new(Coupling::Constant(0.0), 1e3)
    }

    #[test]
    fn plan_examples() {
        let rep = plan(&nominal(), &quiet_budget(), &PlanOptions::default()).unwrap();
        let phase = rep.value("phase_d1").unwrap().value;
        assert!(phase > 0.1 && phase < 10.0);
        assert_eq!(rep.passed("phase"), Some(true));
        assert!(rep.all_passed());
        assert_eq!(rep.value("penrose_time").unwrap().dim, Dim::S);
        assert!(!rep.constants.is_empty());

        let mut light = nominal();
        light.m /= 100.0;
        let r2 = plan(&light, &quiet_budget(), &PlanOptions::default()).unwrap();
        let ratio = rep.value("delta_phi").unwrap().value / r2.value("delta_phi").unwrap().value;
        assert!(rel(ratio, 1e4) < 1e-10);
        assert_eq!(r2.passed("phase"), Some(false));

        let noisy = PlanOptions {
            extra_rate: 1e9,
            ..Default::default()
        };
        let r3 = plan(&nominal(), &quiet_budget(), &noisy).unwrap();
        assert_eq!(r3.passed("phase"), Some(true));
        assert_eq!(r3.passed("decoherence"), Some(false));
        assert!(!r3.all_passed());
    }

    proptest! {
        #[test]
        fn scaling_laws(a in 0.1f64..10.0, x in 1e-9f64..1e-3) {
            let k = k();
            let t = |s: f64| peres_rosen_time(1e-20, s, &k).unwrap().value;
            prop_assert!(rel(t(a * x) / t(x), a * a) < 1e-10);
            let b = |l: f64| em_uncertainty_bound(l, &k).unwrap().value;
            prop_assert!(rel(b(x) / b(a * x), a.powi(4)) < 1e-10);
            let cb = |l: f64| christoffel_uncertainty_bound(l, &k).unwrap().value;
            prop_assert!(rel(cb(x) / cb(a * x), a.powi(4)) < 1e-10);
            let f = |r: f64| gravito_em_forces(1e-12, r, 10.0, GravitoElectric::Coulomb, &k).unwrap();
            prop_assert!(rel(f(x).electric.value / f(a * x).electric.value, a * a) < 1e-10);
            let g = |m: f64| gravitational_phase(m, 1e-6, 1e-6, &k).unwrap();
            prop_assert!(rel(g(a * 1e-12) / g(1e-12), a * a) < 1e-10);
        }

        #[test]
        fn plan_is_monotone_in_mass_and_time(m in 1e-14f64..1e-11, dt in 1e-7f64..1e-5, f in 1.0f64..5.0) {
            let base = ExperimentParams::new(m, 1e-6, 0.5e-6, dt);
            let opts = PlanOptions::default();
            let p0 = plan(&base, &quiet_budget(), &opts).unwrap().passed("phase").unwrap();
            let heavier = ExperimentParams { m: m * f, ..base.clone() };
            let longer = ExperimentParams { dt: dt * f, ..base.clone() };
            for p in [heavier, longer] {
                let p1 = plan(&p, &quiet_budget(), &opts).unwrap().passed("phase").unwrap();
                prop_assert!(!(p0 && !p1));
            }
        }
    }
}
