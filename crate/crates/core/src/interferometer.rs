//! The two-mass double interferometer: phases, branch state, detector
//! statistics and the X₁Z₂ + Z₁X₂ witness.

use crate::constants::PhysicalConstants;
use crate::error::{invalid, require_positive, Error, Result};
use crate::linalg::C64;
use crate::qstate::{
    apply, partial_trace, DensityMatrix, HilbertLayout, LinearOperator, PureState, QuantumState,
};

/// Labels of the two probe qubits.
pub const MASS_1: &str = "m1";
pub const MASS_2: &str = "m2";

/// Experiment geometry and timing in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    /// Probe mass (kg).
    pub m: f64,
    /// Distance between the arms of branches 01 and 10 (m).
    pub d1: f64,
    /// Distance between the arms of branch 11, the closest pair (m).
    pub d2: f64,
    /// Distance between the arms of branch 00 (m); `None` means far enough to
    /// neglect. When set, the branch-00 phase is included.
    pub d3: Option<f64>,
    /// Arm length (m).
    pub arm_length: Option<f64>,
    /// Probe velocity (m/s).
    pub velocity: Option<f64>,
    /// Interaction time (s).
    pub dt: f64,
    pub constants: PhysicalConstants,
}

impl ExperimentParams {
    pub fn new(m: f64, d1: f64, d2: f64, dt: f64) -> Self {
        ExperimentParams {
            m,
            d1,
            d2,
            d3: None,
            arm_length: None,
            velocity: None,
            dt,
            constants: PhysicalConstants::codata2018(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("m", self.m)?;
        require_positive("d1", self.d1)?;
        require_positive("d2", self.d2)?;
        require_positive("dt", self.dt)?;
        if let Some(d3) = self.d3 {
            require_positive("d3", d3)?;
        }
        if let Some(l) = self.arm_length {
            require_positive("arm_length", l)?;
        }
        if let Some(v) = self.velocity {
            require_positive("velocity", v)?;
        }
        if let (Some(l), Some(v)) = (self.arm_length, self.velocity) {
            let t = l / v;
            if ((t - self.dt) / self.dt).abs() > 1e-9 {
                return Err(invalid(
                    "dt",
                    format!("arm_length / velocity = {t:e} s disagrees with dt = {:e} s", self.dt),
                ));
            }
        }
        Ok(())
    }

    /// Pairwise phases (φ₀₀, φ₀₁, φ₁₀, φ₁₁) from the geometry.
    pub fn branch_phases(&self) -> Result<[f64; 4]> {
        self.validate()?;
        let k = &self.constants;
        let p1 = gravitational_phase(self.m, self.d1, self.dt, k)?;
        let p2 = gravitational_phase(self.m, self.d2, self.dt, k)?;
        let p3 = match self.d3 {
            Some(d3) => gravitational_phase(self.m, d3, self.dt, k)?,
            None => 0.0,
        };
        Ok([p3, p1, p1, p2])
    }

    /// (φ₁, Δφ) as used by [`branch_state`]. With d₃ included, its phase is
    /// moved into a global phase so only the relative phases remain.
    pub fn phase_pair(&self) -> Result<PhasePair> {
        let [p00, p01, _, p11] = self.branch_phases()?;
        Ok(PhasePair {
            phi1: p01 - p00,
            delta_phi: p11 - p01,
        })
    }
}

/// The phases φ₁ and Δφ = φ₂ − φ₁ (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair {
    pub phi1: f64,
    pub delta_phi: f64,
}

impl PhasePair {
    pub fn new(phi1: f64, delta_phi: f64) -> Self {
        PhasePair { phi1, delta_phi }
    }

    /// Per-branch phases of |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn branch_phases(&self) -> [f64; 4] {
        [0.0, self.phi1, self.phi1, self.phi1 + self.delta_phi]
    }

    /// φ₀₀ − φ₀₁ − φ₁₀ + φ₁₁, the only combination that local phases cannot
    /// remove. The branch state is a product state iff it vanishes mod 2π.
    pub fn entangling_phase(&self) -> f64 {
        self.delta_phi - self.phi1
    }

    fn check(&self) -> Result<()> {
        if self.phi1.is_finite() && self.delta_phi.is_finite() {
            Ok(())
        } else {
            Err(invalid("phases", "must be finite"))
        }
    }
}

/// G m² Δt / (ħ d).
pub fn gravitational_phase(m: f64, d: f64, dt: f64, k: &PhysicalConstants) -> Result<f64> {
    if d == 0.0 {
        return Err(invalid("d", "zero separation"));
    }
    require_positive("m", m)?;
    require_positive("d", d)?;
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(invalid("dt", format!("must be finite and >= 0, got {dt}")));
    }
    Ok(k.g * m * m * dt / (k.hbar * d))
}

/// The same phase through the Planck mass: (m/m_P)² (c/d) Δt.
pub fn planck_form_phase(m: f64, d: f64, dt: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("d", d)?;
    let r = m / k.planck_mass();
    Ok(r * r * k.c / d * dt)
}

/// Semiclassical local phase using the mean distance (d₁ + d₂)/2.
pub fn mean_field_phase(m: f64, d1: f64, d2: f64, dt: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("d1", d1)?;
    require_positive("d2", d2)?;
    gravitational_phase(m, 0.5 * (d1 + d2), dt, k)
}

pub fn two_qubit_layout() -> HilbertLayout {
    HilbertLayout::qubits(&[MASS_1, MASS_2]).expect("static layout")
}

/// ½|0⟩(|0⟩ + e^{iφ₁}|1⟩) + ½e^{iφ₁}|1⟩(|0⟩ + e^{iΔφ}|1⟩).
pub fn branch_state(phases: PhasePair) -> Result<PureState> {
    phases.check()?;
    let amps: Vec<C64> = phases
        .branch_phases()
        .iter()
        .map(|&t| C64::from_polar(0.5, t))
        .collect();
    PureState::new(amps, two_qubit_layout())
}

/// Output-port probabilities (p₀, p₁) of either mass.
pub fn detector_probabilities(phases: PhasePair) -> Result<(f64, f64)> {
    phases.check()?;
    let h0 = |x: f64| (x / 2.0).cos().powi(2);
    let h1 = |x: f64| (x / 2.0).sin().powi(2);
    let p0 = 0.5 * (h0(phases.phi1) + h0(phases.delta_phi));
    let p1 = 0.5 * (h1(phases.phi1) + h1(phases.delta_phi));
    Ok((p0, p1))
}

/// Recombines both arms on Hadamard beam splitters and returns the
/// port-0/port-1 probabilities of mass 1 by the Born rule.
pub fn simulated_detector_probabilities(state: &PureState) -> Result<(f64, f64)> {
    check_two_qubit(state.layout())?;
    let h = LinearOperator::hadamard();
    let out = apply(&h, &apply(&h, state, &[MASS_1])?, &[MASS_2])?;
    let a = out.amplitudes();
    let p0 = a[0].norm_sqr() + a[1].norm_sqr();
    let p1 = a[2].norm_sqr() + a[3].norm_sqr();
    Ok((p0, p1))
}

fn check_two_qubit(layout: &HilbertLayout) -> Result<()> {
    if layout.dims() == [2, 2] {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "expected a two-qubit layout, got dims {:?}",
            layout.dims()
        )))
    }
}

fn witness_operator() -> crate::linalg::CMat {
    let x = LinearOperator::pauli_x();
    let z = LinearOperator::pauli_z();
    x.tensor(&z).matrix() + z.tensor(&x).matrix()
}

/// ⟨X₁Z₂ + Z₁X₂⟩.
pub fn witness_expectation(state: &impl QuantumState) -> Result<f64> {
    check_two_qubit(state.layout())?;
    let w = witness_operator();
    let rho = state.density();
    Ok((w * rho.matrix()).trace().re)
}

/// Joint outcome probabilities for the Z⊗X and X⊗Z pairings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTable {
    /// zx[i][s]: mass 1 reads Z = i, mass 2 reads X = + (s = 0) or − (s = 1).
    pub zx: [[f64; 2]; 2],
    /// xz[s][i]: mass 1 reads X = ±, mass 2 reads Z = i.
    pub xz: [[f64; 2]; 2],
}

pub fn correlation_table(state: &impl QuantumState) -> Result<CorrelationTable> {
    check_two_qubit(state.layout())?;
    let rho = state.density();
    let h = LinearOperator::hadamard();
    let rotate = |target: &str| -> Result<DensityMatrix> {
        crate::qstate::apply_to_density(&h, &rho, &[target])
    };
    let zx_state = rotate(MASS_2)?;
    let xz_state = rotate(MASS_1)?;
    let mut t = CorrelationTable {
        zx: [[0.0; 2]; 2],
        xz: [[0.0; 2]; 2],
    };
    for i in 0..2 {
        for s in 0..2 {
            t.zx[i][s] = zx_state.population(2 * i + s);
            t.xz[s][i] = xz_state.population(2 * s + i);
        }
    }
    Ok(t)
}

/// Marginal Z-basis populations of one mass.
pub fn marginal(state: &impl QuantumState, mass: &str) -> Result<[f64; 2]> {
    let r = partial_trace(&state.density(), &[mass])?;
    Ok([r.population(0), r.population(1)])
}
