//! Mediator models: each evolves the two probe masses (and, where relevant,
//! the mediating field) and returns the final two-mass state.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::constants::PhysicalConstants;
use crate::cvhybrid::{hall_reginatto_protocol, GaussianState};
use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::interferometer::{
    branch_state, gravitational_phase, two_qubit_layout, ExperimentParams, PhasePair, MASS_1,
    MASS_2,
};
use crate::linalg::{c, CMat, C64, ONE, ZERO};
use crate::qstate::{
    coherent_state_with, negativity, partial_trace, tensor, truncation_leakage, DensityMatrix,
    HilbertLayout, LinearOperator, PureState, QuantumState,
};
use crate::tol;

/// Label of a single mediator mode.
pub const FIELD: &str = "field";

/// Label of field mode `i` in multi-mode layouts.
pub fn mode_label(i: usize) -> String {
    format!("k{i}")
}

/// One field mode: frequency ω (rad/s), coupling g (rad/s) and the
/// wavenumber k (1/m) projected on the line joining the masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMode {
    pub omega: f64,
    pub coupling: f64,
    pub wavenumber: f64,
}

/// Basis in which a measured mediator is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasureBasis {
    /// Eigenbasis of a†a.
    #[default]
    Number,
}

/// Local random phases applied to the arm-1 branch of each mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseNoise {
    /// Standard deviation of each phase (rad).
    pub sigma: f64,
    /// Both masses receive the same draw.
    pub shared: bool,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MediatorModel {
    /// Exact branch phases, no mediator dynamics.
    Ideal,
    /// Controlled displacements of a field mode, a free rotation, and the
    /// inverse displacements. `inelasticity` ε shrinks the return
    /// displacement to (1 − ε) of the outgoing one.
    GateModel {
        alpha: C64,
        w: f64,
        cutoff: usize,
        inelasticity: f64,
    },
    /// Linearised field modes driven by the masses on their branch paths.
    /// `positions[i][a]` is the coordinate of mass i on arm a; by default
    /// it follows from the geometry.
    LqgField {
        modes: Vec<FieldMode>,
        cutoff: usize,
        positions: Option<[[f64; 2]; 2]>,
    },
    /// Each mass evolves in the expectation value of the other's field.
    MeanField,
    /// The mediator is read out in `basis` after every coupling and the
    /// record is passed on classically.
    MeasuredChannel {
        basis: MeasureBasis,
        rounds: usize,
        beta: C64,
        cutoff: usize,
    },
    /// Ideal phases interleaved with position dephasing at `rate` (1/s) on
    /// each mass. Without a rate, 1/penrose_collapse_time(m, size) is used
    /// with size defaulting to d₁.
    Collapse {
        rate: Option<f64>,
        steps: usize,
        superposition_size: Option<f64>,
    },
    ClassicalDephasing(PhaseNoise),
    /// Hybrid quantum–classical–quantum chain in natural units.
    HybridEnsemble { g1: f64, g2: f64, duration: f64 },
}

impl MediatorModel {
    pub fn name(&self) -> &'static str {
        match self {
            MediatorModel::Ideal => "ideal",
            MediatorModel::GateModel { .. } => "gate_model",
            MediatorModel::LqgField { .. } => "lqg_field",
            MediatorModel::MeanField => "mean_field",
            MediatorModel::MeasuredChannel { .. } => "measured_channel",
            MediatorModel::Collapse { .. } => "collapse",
            MediatorModel::ClassicalDephasing(_) => "classical_dephasing",
            MediatorModel::HybridEnsemble { .. } => "hybrid_ensemble",
        }
    }

    /// True for models in which the mediator cannot carry entanglement.
    pub fn is_classical(&self) -> bool {
        matches!(
            self,
            MediatorModel::MeanField
                | MediatorModel::MeasuredChannel { .. }
                | MediatorModel::Collapse { .. }
                | MediatorModel::ClassicalDephasing(_)
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MediatorModel::Ideal | MediatorModel::MeanField => Ok(()),
            MediatorModel::GateModel {
                alpha,
                w,
                cutoff,
                inelasticity,
            } => {
                check_cutoff(*cutoff)?;
                check_complex("alpha", *alpha)?;
                if !(w.is_finite() && *w > 0.0 && *w < PI) {
                    return Err(invalid("w", "must lie in (0, pi)"));
                }
                if !(inelasticity.is_finite() && (0.0..=1.0).contains(inelasticity)) {
                    return Err(invalid("inelasticity", "must lie in [0, 1]"));
                }
                Ok(())
            }
            MediatorModel::LqgField { modes, cutoff, positions } => {
                check_cutoff(*cutoff)?;
                check_modes(modes)?;
                if let Some(p) = positions {
                    if p.iter().flatten().any(|x| !x.is_finite()) {
                        return Err(invalid("positions", "must be finite"));
                    }
                }
                Ok(())
            }
            MediatorModel::MeasuredChannel {
                rounds,
                beta,
                cutoff,
                ..
            } => {
                check_cutoff(*cutoff)?;
                check_complex("beta", *beta)?;
                if *rounds == 0 {
                    return Err(invalid("rounds", "must be >= 1"));
                }
                Ok(())
            }
            MediatorModel::Collapse {
                rate,
                steps,
                superposition_size,
            } => {
                if let Some(r) = rate {
                    require_non_negative("rate", *r)?;
                }
                if let Some(s) = superposition_size {
                    require_positive("superposition_size", *s)?;
                }
                if *steps == 0 {
                    return Err(invalid("steps", "must be >= 1"));
                }
                Ok(())
            }
            MediatorModel::ClassicalDephasing(n) => {
                require_non_negative("sigma", n.sigma)?;
                if n.samples == 0 {
                    return Err(invalid("samples", "must be >= 1"));
                }
                Ok(())
            }
            MediatorModel::HybridEnsemble { g1, g2, duration } => {
                if !(g1.is_finite() && g2.is_finite()) {
                    return Err(invalid("g", "couplings must be finite"));
                }
                require_non_negative("duration", *duration)
            }
        }
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        Err(invalid("cutoff", "must be >= 2"))
    } else {
        Ok(())
    }
}

fn check_complex(name: &'static str, z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

fn check_modes(modes: &[FieldMode]) -> Result<()> {
    if modes.is_empty() {
        return Err(invalid("modes", "at least one field mode is required"));
    }
    for m in modes {
        require_positive("omega", m.omega)?;
        if !(m.coupling.is_finite() && m.wavenumber.is_finite()) {
            return Err(invalid("modes", "coupling and wavenumber must be finite"));
        }
    }
    Ok(())
}

/// Final probe state: two qubits, or Gaussian modes for the hybrid chain.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeState {
    Qubits(DensityMatrix),
    Gaussian(GaussianState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub state: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub final_state: ProbeState,
    pub field_state: Option<DensityMatrix>,
    pub trajectory: Vec<Snapshot>,
    pub phases_extracted: Option<PhasePair>,
    /// Log-negativity across the probe cut, for Gaussian probes.
    pub log_negativity: Option<f64>,
}

impl ProtocolResult {
    fn qubits(rho: DensityMatrix, trajectory: Vec<Snapshot>) -> Self {
        let phases = extract_phases(&rho);
        ProtocolResult {
            final_state: ProbeState::Qubits(rho),
            field_state: None,
            trajectory,
            phases_extracted: phases,
            log_negativity: None,
        }
    }

    pub fn two_mass(&self) -> Option<&DensityMatrix> {
        match &self.final_state {
            ProbeState::Qubits(r) => Some(r),
            ProbeState::Gaussian(_) => None,
        }
    }

    /// Negativity of the two-mass state; `None` for Gaussian probes.
    pub fn negativity(&self) -> Result<Option<f64>> {
        match &self.final_state {
            ProbeState::Qubits(r) => Ok(Some(negativity(r, &[MASS_1])?)),
            ProbeState::Gaussian(_) => Ok(None),
        }
    }
}

/// Reads (φ₁, Δφ) off the coherences ρ₀₁,₀₀ and ρ₁₁,₀₀.
pub fn extract_phases(rho: &DensityMatrix) -> Option<PhasePair> {
    if rho.layout().dims() != [2, 2] {
        return None;
    }
    let m = rho.matrix();
    let (r1, r3) = (m[(1, 0)], m[(3, 0)]);
    if r1.norm() < 1e-12 || r3.norm() < 1e-12 {
        return None;
    }
    let wrap = |x: f64| x - TAU * ((x + PI) / TAU).floor();
    Some(PhasePair::new(r1.arg(), wrap(r3.arg() - r1.arg())))
}

/// Runs the protocol with the phases implied by the geometry.
pub fn run_protocol(model: &MediatorModel, params: &ExperimentParams) -> Result<ProtocolResult> {
    params.validate()?;
    let phases = params.phase_pair()?;
    run_protocol_with_phases(model, params, phases)
}

/// Runs the protocol with explicit target phases. Field models that derive
/// their own phases (`LqgField`, `HybridEnsemble`) ignore `phases`.
pub fn run_protocol_with_phases(
    model: &MediatorModel,
    params: &ExperimentParams,
    phases: PhasePair,
) -> Result<ProtocolResult> {
    model.validate()?;
    params.validate()?;
    if !(phases.phi1.is_finite() && phases.delta_phi.is_finite()) {
        return Err(invalid("phases", "must be finite"));
    }
    let dt = params.dt;
    match model {
        MediatorModel::Ideal => {
            let rho = branch_state(phases)?.to_density();
            let start = branch_state(PhasePair::new(0.0, 0.0))?.to_density();
            Ok(ProtocolResult::qubits(
                rho.clone(),
                vec![
                    Snapshot { time: 0.0, state: start },
                    Snapshot { time: dt, state: rho },
                ],
            ))
        }
        MediatorModel::GateModel {
            alpha,
            w,
            cutoff,
            inelasticity,
        } => {
            let targets = phases.branch_phases();
            let xi = gate_model_couplings(*alpha, *w, targets)?;
            let psi = gate_model_evolution_with(*alpha, xi, *w, *cutoff, *inelasticity)?;
            let rho = psi.to_density();
            let masses = partial_trace(&rho, &[MASS_1, MASS_2])?;
            let field = partial_trace(&rho, &[FIELD])?;
            let mut r = ProtocolResult::qubits(
                masses.clone(),
                vec![Snapshot { time: dt, state: masses }],
            );
            r.field_state = Some(field);
            Ok(r)
        }
        MediatorModel::LqgField {
            modes,
            cutoff,
            positions,
        } => {
            let positions = positions.unwrap_or(default_positions(params));
            let field = LqgField {
                modes: modes.clone(),
                positions,
                cutoff: *cutoff,
            };
            let rho = field.reduced_mass_state(dt)?;
            let mut r = ProtocolResult::qubits(
                rho.clone(),
                vec![Snapshot { time: dt, state: rho }],
            );
            let fdim = (*cutoff as f64).powi(modes.len() as i32);
            if fdim <= 1024.0 {
                let psi = field.evolve(dt)?;
                let labels: Vec<String> = (0..modes.len()).map(mode_label).collect();
                let keep: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
                r.field_state = Some(partial_trace(&psi.to_density(), &keep)?);
            }
            Ok(r)
        }
        MediatorModel::MeanField => mean_field_evolution(params, phases),
        MediatorModel::MeasuredChannel {
            basis,
            rounds,
            beta,
            cutoff,
        } => measured_channel_evolution_with(phases, dt, *basis, *rounds, *beta, *cutoff),
        MediatorModel::Collapse {
            rate,
            steps,
            superposition_size,
        } => {
            let rate = match rate {
                Some(r) => *r,
                None => {
                    let size = superposition_size.unwrap_or(params.d1);
                    1.0 / penrose_collapse_time(params.m, size, &params.constants)?
                }
            };
            collapse_channel_evolution_with(phases, dt, rate, *steps)
        }
        MediatorModel::ClassicalDephasing(noise) => {
            classical_dephasing_evolution_with(params, phases, noise)
        }
        MediatorModel::HybridEnsemble { g1, g2, duration } => {
            let (state, en) = hall_reginatto_protocol(*g1, *g2, *duration, None)?;
            Ok(ProtocolResult {
                final_state: ProbeState::Gaussian(state),
                field_state: None,
                trajectory: Vec::new(),
                phases_extracted: None,
                log_negativity: Some(en),
            })
        }
    }
}

fn diag_phase_density(rho: &CMat, theta: [f64; 4]) -> CMat {
    CMat::from_fn(4, 4, |i, j| rho[(i, j)] * C64::from_polar(1.0, theta[i] - theta[j]))
}

fn product_density(a: [C64; 2], b: [C64; 2]) -> CMat {
    let v = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    CMat::from_fn(4, 4, |i, j| v[i] * v[j].conj())
}

fn plus_plus() -> CMat {
    CMat::from_element(4, 4, c(0.25, 0.0))
}

/// Local phases of arm a of each mass: the average of the pairwise phases
/// over the other mass's arms.
fn mean_field_local_phases(phases: PhasePair) -> ([f64; 2], [f64; 2]) {
    let t = phases.branch_phases();
    let m1 = [0.5 * (t[0] + t[1]), 0.5 * (t[2] + t[3])];
    let m2 = [0.5 * (t[0] + t[2]), 0.5 * (t[1] + t[3])];
    (m1, m2)
}

fn local_state(phases: [f64; 2]) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [C64::from_polar(s, phases[0]), C64::from_polar(s, phases[1])]
}

const TRAJECTORY_POINTS: usize = 10;

fn mean_field_evolution(params: &ExperimentParams, phases: PhasePair) -> Result<ProtocolResult> {
    let (m1, m2) = mean_field_local_phases(phases);
    let mut traj = Vec::with_capacity(TRAJECTORY_POINTS + 1);
    for j in 0..=TRAJECTORY_POINTS {
        let f = j as f64 / TRAJECTORY_POINTS as f64;
        let a = local_state([m1[0] * f, m1[1] * f]);
        let b = local_state([m2[0] * f, m2[1] * f]);
        let state = DensityMatrix::unchecked(product_density(a, b), two_qubit_layout())?;
        traj.push(Snapshot {
            time: f * params.dt,
            state,
        });
    }
    let last = traj.last().expect("non-empty").state.clone();
    Ok(ProtocolResult::qubits(last, traj))
}

/// Ideal phase evolution interleaved with dephasing of both masses in the
/// path basis: each of `steps` steps applies ρ → (1−p)ρ + pZρZ per mass with
/// p = (1 − e^{−rate·δt})/2, so coherences decay as e^{−rate·t} per mass.
pub fn collapse_channel_evolution(params: &ExperimentParams, rate: f64) -> Result<ProtocolResult> {
    params.validate()?;
    collapse_channel_evolution_with(params.phase_pair()?, params.dt, rate, DEFAULT_COLLAPSE_STEPS)
}

pub const DEFAULT_COLLAPSE_STEPS: usize = 100;

pub fn collapse_channel_evolution_with(
    phases: PhasePair,
    dt: f64,
    rate: f64,
    steps: usize,
) -> Result<ProtocolResult> {
    require_non_negative("rate", rate)?;
    require_positive("dt", dt)?;
    if steps == 0 {
        return Err(invalid("steps", "must be >= 1"));
    }
    let delta = dt / steps as f64;
    let keep = (-rate * delta).exp();
    let target = phases.branch_phases();
    let step_phase = target.map(|t| t / steps as f64);
    let mut rho = plus_plus();
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(Snapshot {
        time: 0.0,
        state: DensityMatrix::unchecked(rho.clone(), two_qubit_layout())?,
    });
    for s in 1..=steps {
        rho = diag_phase_density(&rho, step_phase);
        // Z-dephasing on both masses scales ρ_ij by keep^(#differing bits).
        rho = CMat::from_fn(4, 4, |i, j| {
            let flips = ((i ^ j) as u32).count_ones() as i32;
            rho[(i, j)] * keep.powi(flips)
        });
        traj.push(Snapshot {
            time: s as f64 * delta,
            state: DensityMatrix::unchecked(rho.clone(), two_qubit_layout())?,
        });
    }
    let last = DensityMatrix::unchecked(rho, two_qubit_layout())?;
    Ok(ProtocolResult::qubits(last, traj))
}

/// Ensemble of product states with Gaussian local phase noise on top of the
/// mean-field phases.
pub fn classical_dephasing_evolution(
    params: &ExperimentParams,
    noise: &PhaseNoise,
) -> Result<ProtocolResult> {
    params.validate()?;
    classical_dephasing_evolution_with(params, params.phase_pair()?, noise)
}

fn classical_dephasing_evolution_with(
    params: &ExperimentParams,
    phases: PhasePair,
    noise: &PhaseNoise,
) -> Result<ProtocolResult> {
    require_non_negative("sigma", noise.sigma)?;
    if noise.samples == 0 {
        return Err(invalid("samples", "must be >= 1"));
    }
    let normal = Normal::new(0.0, noise.sigma).map_err(|e| invalid("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let draws: Vec<(f64, f64)> = (0..noise.samples)
        .map(|_| {
            let a = normal.sample(&mut rng);
            let b = if noise.shared { a } else { normal.sample(&mut rng) };
            (a, b)
        })
        .collect();
    let (m1, m2) = mean_field_local_phases(phases);
    let weight = 1.0 / noise.samples as f64;
    let mut traj = Vec::with_capacity(TRAJECTORY_POINTS + 1);
    for j in 0..=TRAJECTORY_POINTS {
        let f = j as f64 / TRAJECTORY_POINTS as f64;
        let mut acc = CMat::zeros(4, 4);
        for &(n1, n2) in &draws {
            let a = local_state([m1[0] * f, (m1[1] + n1) * f]);
            let b = local_state([m2[0] * f, (m2[1] + n2) * f]);
            acc += product_density(a, b) * c(weight, 0.0);
        }
        traj.push(Snapshot {
            time: f * params.dt,
            state: DensityMatrix::unchecked(acc, two_qubit_layout())?,
        });
    }
    let last = traj.last().expect("non-empty").state.clone();
    Ok(ProtocolResult::qubits(last, traj))
}

/// Measure-and-prepare relay. Each round, mass 1 displaces a freshly
/// prepared mediator |β⟩ by i·a·κ, the mediator is read out in the number
/// basis, and mass 2 applies the phase n·b·θ using the classical record;
/// then the roles are swapped. κ and θ are chosen so the mean kick matches
/// the target entangling phase.
pub fn measured_channel_evolution(params: &ExperimentParams) -> Result<ProtocolResult> {
    params.validate()?;
    measured_channel_evolution_with(
        params.phase_pair()?,
        params.dt,
        MeasureBasis::Number,
        1,
        c(1.0, 0.0),
        tol::DEFAULT_CUTOFF,
    )
}

pub fn measured_channel_evolution_with(
    phases: PhasePair,
    dt: f64,
    basis: MeasureBasis,
    rounds: usize,
    beta: C64,
    cutoff: usize,
) -> Result<ProtocolResult> {
    let MeasureBasis::Number = basis;
    check_cutoff(cutoff)?;
    if rounds == 0 {
        return Err(invalid("rounds", "must be >= 1"));
    }
    let per_round = phases.entangling_phase().abs() / (2 * rounds) as f64;
    let kappa = per_round.sqrt();
    let theta = per_round / beta.norm_sqr().max(1.0);
    // Amplitudes ⟨n|D(iaκ)|β⟩ for a = 0, 1.
    let shifts = [ZERO, c(0.0, kappa)];
    let mut amps = [vec![ZERO; cutoff], vec![ZERO; cutoff]];
    for a in 0..2 {
        let g = shifts[a];
        let end = beta + g;
        let leak = truncation_leakage(end, cutoff);
        if leak > tol::TRUNCATION_LEAKAGE {
            return Err(Error::Truncation {
                leakage: leak,
                tolerance: tol::TRUNCATION_LEAKAGE,
                cutoff,
            });
        }
        let phase = C64::from_polar(1.0, (g * beta.conj()).im);
        let mut x = c((-end.norm_sqr() / 2.0).exp(), 0.0) * phase;
        for n in 0..cutoff {
            if n > 0 {
                x = x * end / (n as f64).sqrt();
            }
            amps[a][n] = x;
        }
    }
    let mut rho = plus_plus();
    let mut traj = vec![Snapshot {
        time: 0.0,
        state: DensityMatrix::unchecked(rho.clone(), two_qubit_layout())?,
    }];
    let half_steps = 2 * rounds;
    for step in 0..half_steps {
        // Even steps: mass 1 writes, mass 2 reads; odd steps the reverse.
        let writer_is_1 = step % 2 == 0;
        let mut next = CMat::zeros(4, 4);
        for n in 0..cutoff {
            let k: [C64; 4] = std::array::from_fn(|i| {
                let (a, b) = (i >> 1, i & 1);
                let (w, r) = if writer_is_1 { (a, b) } else { (b, a) };
                amps[w][n] * C64::from_polar(1.0, n as f64 * r as f64 * theta)
            });
            for i in 0..4 {
                for j in 0..4 {
                    next[(i, j)] += k[i] * rho[(i, j)] * k[j].conj();
                }
            }
        }
        let tr: f64 = (0..4).map(|i| next[(i, i)].re).sum();
        rho = next / c(tr, 0.0);
        traj.push(Snapshot {
            time: dt * (step + 1) as f64 / half_steps as f64,
            state: DensityMatrix::unchecked(rho.clone(), two_qubit_layout())?,
        });
    }
    let last = DensityMatrix::unchecked(rho, two_qubit_layout())?;
    Ok(ProtocolResult::qubits(last, traj))
}

/// ħ d / (G m²).
pub fn penrose_collapse_time(m: f64, d: f64, k: &PhysicalConstants) -> Result<f64> {
    if m == 0.0 {
        return Err(invalid("m", "zero mass"));
    }
    require_positive("m", m)?;
    require_positive("d", d)?;
    Ok(k.hbar * d / (k.g * m * m))
}

/// G m² t / (ħ · separation): the branch phase in the Newtonian limit.
pub fn lqg_newtonian_limit_phase(
    m: f64,
    separation: f64,
    t: f64,
    k: &PhysicalConstants,
) -> Result<f64> {
    if separation == 0.0 {
        return Err(invalid("separation", "zero separation"));
    }
    gravitational_phase(m, separation, t, k)
}

/// Arm coordinates on a common line: mass 1 sits at −p_a, mass 2 at +p_b,
/// with p₁ = d₂/2 and p₀ = d₁ − d₂/2. This reproduces d₁ for the mixed
/// branches and d₂ for branch 11; branch 00 is then 2d₁ − d₂ apart.
pub fn default_positions(params: &ExperimentParams) -> [[f64; 2]; 2] {
    let p1 = params.d2 / 2.0;
    let p0 = params.d1 - p1;
    [[-p0, -p1], [p0, p1]]
}

/// Field modes approximating the continuum: a midpoint grid of `radial`
/// wavenumbers up to `k_max` times `angular` direction cosines, with
/// 2g²/ω = (2Gm²/(πħ))·Δk·Δu. As k_max → ∞ the branch phase difference
/// tends to the Newtonian G m² t/ħ·(1/d − 1/d′) once ωt ≫ 1.
pub fn continuum_modes(
    m: f64,
    k_max: f64,
    radial: usize,
    angular: usize,
    k: &PhysicalConstants,
) -> Result<Vec<FieldMode>> {
    require_positive("m", m)?;
    require_positive("k_max", k_max)?;
    if radial == 0 || angular == 0 {
        return Err(invalid("modes", "grid sizes must be >= 1"));
    }
    let dk = k_max / radial as f64;
    let du = 1.0 / angular as f64;
    let weight = 2.0 * k.g * m * m / (PI * k.hbar) * dk * du;
    let mut out = Vec::with_capacity(radial * angular);
    for i in 0..radial {
        let kk = (i as f64 + 0.5) * dk;
        let omega = k.c * kk;
        let g = (weight * omega / 2.0).sqrt();
        for j in 0..angular {
            let u = (j as f64 + 0.5) * du;
            out.push(FieldMode {
                omega,
                coupling: g,
                wavenumber: kk * u,
            });
        }
    }
    Ok(out)
}

/// Field modes coupled to both masses on definite paths per branch.
///
/// Per branch and mode, H = ω a†a − (λa + λ*a†) with
/// λ = g(e^{ikx₁} + e^{ikx₂}). From the vacuum this gives the coherent
/// amplitude μ(1 − e^{−iωt}), μ = λ*/ω, and the phase
/// (|λ|²/ω)(t − sin(ωt)/ω), where |λ|² = 2g²(1 + cos kΔx).
#[derive(Debug, Clone, PartialEq)]
pub struct LqgField {
    pub modes: Vec<FieldMode>,
    pub positions: [[f64; 2]; 2],
    pub cutoff: usize,
}

impl LqgField {
    fn lambda(&self, mode: &FieldMode, a: usize, b: usize) -> C64 {
        let (x1, x2) = (self.positions[0][a], self.positions[1][b]);
        (C64::from_polar(1.0, mode.wavenumber * x1) + C64::from_polar(1.0, mode.wavenumber * x2))
            * mode.coupling
    }

    /// Branch phases θ_ab at time t, in the order 00, 01, 10, 11.
    pub fn branch_phases(&self, t: f64) -> Result<[f64; 4]> {
        check_modes(&self.modes)?;
        Ok(std::array::from_fn(|i| {
            let (a, b) = (i >> 1, i & 1);
            self.modes
                .iter()
                .map(|md| {
                    let w = md.omega;
                    self.lambda(md, a, b).norm_sqr() / w * (t - (w * t).sin() / w)
                })
                .sum()
        }))
    }

    /// Coherent amplitudes of each mode per branch.
    pub fn field_amplitudes(&self, t: f64) -> Result<[Vec<C64>; 4]> {
        check_modes(&self.modes)?;
        Ok(std::array::from_fn(|i| {
            let (a, b) = (i >> 1, i & 1);
            self.modes
                .iter()
                .map(|md| {
                    let mu = self.lambda(md, a, b).conj() / md.omega;
                    mu * (ONE - C64::from_polar(1.0, -md.omega * t))
                })
                .collect()
        }))
    }

    /// Two-mass state with the field traced out analytically through the
    /// coherent-state overlaps; no Fock truncation is involved.
    pub fn reduced_mass_state(&self, t: f64) -> Result<DensityMatrix> {
        let theta = self.branch_phases(t)?;
        let beta = self.field_amplitudes(t)?;
        let rho = CMat::from_fn(4, 4, |i, j| {
            let mut ov = C64::from_polar(0.25, theta[i] - theta[j]);
            for (x, y) in beta[i].iter().zip(&beta[j]) {
                // ⟨β_j|β_i⟩
                ov *= (-(x.norm_sqr() + y.norm_sqr()) / 2.0 + y.conj() * x).exp();
            }
            ov
        });
        DensityMatrix::unchecked(rho, two_qubit_layout())
    }

    /// Full masses ⊗ field state on truncated Fock spaces (labels
    /// m1, m2, k0, k1, …), starting from |+⟩|+⟩ and the vacuum.
    pub fn evolve(&self, t: f64) -> Result<PureState> {
        lqg_exact_evolution(self, t)
    }
}

/// Closed-form evolution of the masses and field; see [`LqgField`].
pub fn lqg_exact_evolution(model: &LqgField, t: f64) -> Result<PureState> {
    check_modes(&model.modes)?;
    check_cutoff(model.cutoff)?;
    if !t.is_finite() {
        return Err(invalid("t", "must be finite"));
    }
    let theta = model.branch_phases(t)?;
    let beta = model.field_amplitudes(t)?;
    let mut parts = Vec::with_capacity(4);
    for i in 0..4 {
        let mut factors = Vec::with_capacity(model.modes.len());
        for (k, b) in beta[i].iter().enumerate() {
            let (s, _) = coherent_state_with(
                *b,
                model.cutoff,
                &mode_label(k),
                tol::TRUNCATION_LEAKAGE,
            )?;
            factors.push(s);
        }
        parts.push(tensor(&factors)?);
    }
    let fdim = parts[0].amplitudes().len();
    let mut amps = vec![ZERO; 4 * fdim];
    for i in 0..4 {
        let w = C64::from_polar(0.5, theta[i]);
        for (f, x) in parts[i].amplitudes().iter().enumerate() {
            amps[i * fdim + f] = w * x;
        }
    }
    let layout = two_qubit_layout().concat(parts[0].layout())?;
    PureState::normalized(amps, layout)
}

/// ξ_ab for each branch so that the exact gate-model phase equals the
/// target (reduced to [0, 2π)). With D(i√ξ) and U₂ = e^{iw a†a} the branch
/// phase is √ξ·Re(α*(1 − e^{−iw})) + ξ·sin w, solved as a quadratic in √ξ.
pub fn gate_model_couplings(alpha: C64, w: f64, targets: [f64; 4]) -> Result<[[f64; 2]; 2]> {
    if !(w.is_finite() && w > 0.0 && w < PI) {
        return Err(invalid("w", "must lie in (0, pi)"));
    }
    let a = w.sin();
    let b = (alpha.conj() * (ONE - C64::from_polar(1.0, -w))).re;
    let mut xi = [[0.0; 2]; 2];
    for (i, &t) in targets.iter().enumerate() {
        if !t.is_finite() {
            return Err(invalid("phases", "must be finite"));
        }
        let phi = t.rem_euclid(TAU);
        let x = (-b + (b * b + 4.0 * a * phi).sqrt()) / (2.0 * a);
        xi[i >> 1][i & 1] = x * x;
    }
    Ok(xi)
}

/// Branch phase produced by the gate sequence for one ξ.
pub fn gate_model_phase(alpha: C64, xi: f64, w: f64) -> f64 {
    let s = xi.sqrt();
    s * (alpha.conj() * (ONE - C64::from_polar(1.0, -w))).re + xi * w.sin()
}

/// U₁ = Σ P_ab ⊗ D(i√ξ_ab), U₂ = e^{iw a†a}, then U₁†, starting from
/// |+⟩|+⟩|α⟩. The result is reported in the frame co-rotating with U₂, so
/// ξ = 0 leaves the state unchanged.
pub fn gate_model_evolution(
    alpha: C64,
    xi: [[f64; 2]; 2],
    w: f64,
    cutoff: usize,
) -> Result<PureState> {
    gate_model_evolution_with(alpha, xi, w, cutoff, 0.0)
}

pub fn gate_model_evolution_with(
    alpha: C64,
    xi: [[f64; 2]; 2],
    w: f64,
    cutoff: usize,
    inelasticity: f64,
) -> Result<PureState> {
    check_cutoff(cutoff)?;
    check_complex("alpha", alpha)?;
    if !w.is_finite() {
        return Err(invalid("w", "must be finite"));
    }
    if xi.iter().flatten().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(invalid("xi", "entries must be finite and >= 0"));
    }
    if !(0.0..=1.0).contains(&inelasticity) {
        return Err(invalid("inelasticity", "must lie in [0, 1]"));
    }
    let (field0, _) = coherent_state_with(alpha, cutoff, FIELD, tol::TRUNCATION_LEAKAGE)?;
    let rotate = LinearOperator::new(
        CMat::from_fn(cutoff, cutoff, |i, j| {
            if i == j {
                C64::from_polar(1.0, w * i as f64)
            } else {
                ZERO
            }
        }),
        vec![cutoff],
    )?;
    let unrotate = rotate.dagger();
    let mut amps = vec![ZERO; 4 * cutoff];
    for i in 0..4 {
        let s = c(0.0, xi[i >> 1][i & 1].sqrt());
        let back = s * (1.0 - inelasticity);
        for (name, amp) in [
            ("outgoing displacement", alpha + s),
            ("returned field", (alpha + s) * C64::from_polar(1.0, w) - back),
        ] {
            let leak = truncation_leakage(amp, cutoff);
            if leak > tol::TRUNCATION_LEAKAGE {
                let _ = name;
                return Err(Error::Truncation {
                    leakage: leak,
                    tolerance: tol::TRUNCATION_LEAKAGE,
                    cutoff,
                });
            }
        }
        let u1 = LinearOperator::displacement(s, cutoff);
        let u1_back = LinearOperator::displacement(-back, cutoff);
        let op = unrotate.compose(&u1_back.compose(&rotate.compose(&u1)?)?)?;
        let out = op.matrix() * field0.amplitudes();
        for f in 0..cutoff {
            amps[i * cutoff + f] = out[f] * 0.5;
        }
    }
    let layout = two_qubit_layout().concat(&HilbertLayout::single(FIELD, cutoff)?)?;
    PureState::normalized(amps, layout)
}

/// Fidelity of the gate-model two-mass state with the target branch state,
/// and of the returned field with |α⟩.
pub fn gate_model_fidelities(
    alpha: C64,
    w: f64,
    cutoff: usize,
    phases: PhasePair,
) -> Result<(f64, f64)> {
    let xi = gate_model_couplings(alpha, w, phases.branch_phases())?;
    let psi = gate_model_evolution(alpha, xi, w, cutoff)?;
    let rho = psi.to_density();
    let masses = partial_trace(&rho, &[MASS_1, MASS_2])?;
    let field = partial_trace(&rho, &[FIELD])?;
    let target = branch_state(phases)?;
    let (coh, _) = coherent_state_with(alpha, cutoff, FIELD, tol::TRUNCATION_LEAKAGE)?;
    Ok((
        crate::qstate::fidelity(&target, &masses)?,
        crate::qstate::fidelity(&coh, &field)?,
    ))
}

/// Best gate-model fidelity over a grid of rotation angles w ∈ (0, π),
/// skipping angles whose displacements leak beyond the cutoff. Returns
/// (w, mass fidelity, field fidelity).
pub fn gate_model_best(
    alpha: C64,
    cutoff: usize,
    phases: PhasePair,
    grid: usize,
) -> Result<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 1..grid {
        let w = PI * i as f64 / grid as f64;
        match gate_model_fidelities(alpha, w, cutoff, phases) {
            Ok((fm, ff)) => {
                if best.map_or(true, |b| fm > b.1) {
                    best = Some((w, fm, ff));
                }
            }
            Err(Error::Truncation { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(Error::Truncation {
        leakage: 1.0,
        tolerance: tol::TRUNCATION_LEAKAGE,
        cutoff,
    })
}

#[doc(hidden)]
pub fn _assert_state<T: QuantumState>(_: &T) {}
