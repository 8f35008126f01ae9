//! Decoherence of a superposed mass coupled to a bosonic field: coherent
//! shifts, decay factors, rate integrals, emission estimates and the
//! spin-echo discrimination of dephasing, field entanglement and collapse.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::quad;
use crate::tol;
use crate::units::{Dim, Quantity};

/// Which coherent-state overlap the decay factor reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapConvention {
    /// exp(−Σ|δα|²), as printed for a single shifted branch.
    #[default]
    Printed,
    /// exp(−2Σ|δα|²), the overlap of branches shifted by +δα and −δα.
    Symmetric,
}

impl OverlapConvention {
    fn factor(self) -> f64 {
        match self {
            OverlapConvention::Printed => 1.0,
            OverlapConvention::Symmetric => 2.0,
        }
    }
}

/// Field–mass coupling g(k) in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Constant(f64),
    /// g0·(k/k0)^exponent
    PowerLaw { g0: f64, k0: f64, exponent: f64 },
    /// V(x)·x²·√(16πGħ)/(4c³√V)·ω^{3/2}, with `potential` in J, `x` in m and
    /// the quantisation volume in m³.
    Quadrupole {
        potential: f64,
        x: f64,
        volume: f64,
    },
    /// Linear interpolation through (k, g) samples; zero outside.
    Tabulated { k: Vec<f64>, g: Vec<f64> },
}

/// Density of states ρ(k).
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform(f64),
    /// prefactor·k²
    FreeSpace { prefactor: f64 },
    /// rho0·(k/k0)^exponent
    PowerLaw { rho0: f64, k0: f64, exponent: f64 },
}

impl Default for Density {
    fn default() -> Self {
        Density::FreeSpace { prefactor: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceSpec {
    pub coupling: Coupling,
    pub density: Density,
    /// Upper frequency cutoff Ω (rad/s); modes run over k ∈ [0, Ω/c].
    pub cutoff_omega: f64,
    pub exponent: u32,
    pub temperature: f64,
    /// Dispersion speed in ω = c·k (m/s).
    pub wave_speed: f64,
    pub convention: OverlapConvention,
    pub constants: PhysicalConstants,
}

impl DecoherenceSpec {
    pub fn new(coupling: Coupling, cutoff_omega: f64) -> Self {
        let constants = PhysicalConstants::codata2018();
        DecoherenceSpec {
            coupling,
            density: Density::default(),
            cutoff_omega,
            exponent: 1,
            temperature: 0.0,
            wave_speed: constants.c,
            convention: OverlapConvention::default(),
            constants,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("cutoff_omega", self.cutoff_omega)?;
        require_positive("wave_speed", self.wave_speed)?;
        require_non_negative("temperature", self.temperature)?;
        if self.exponent < 1 {
            return Err(invalid("exponent", "must be >= 1"));
        }
        match &self.coupling {
            Coupling::Constant(g) => require_finite("coupling", *g)?,
            Coupling::PowerLaw { g0, k0, exponent } => {
                require_finite("coupling", *g0)?;
                require_positive("k0", *k0)?;
                require_finite("coupling exponent", *exponent)?;
            }
            Coupling::Quadrupole { potential, x, volume } => {
                require_finite("potential", *potential)?;
                require_finite("x", *x)?;
                require_positive("volume", *volume)?;
            }
            Coupling::Tabulated { k, g } => {
                if k.len() != g.len() || k.len() < 2 {
                    return Err(invalid(
                        "coupling",
                        "tabulated coupling needs at least two (k, g) pairs of equal length",
                    ));
                }
                if k.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("coupling", "tabulated k must increase strictly"));
                }
                if k.iter().chain(g.iter()).any(|x| !x.is_finite()) {
                    return Err(invalid("coupling", "tabulated values must be finite"));
                }
            }
        }
        match &self.density {
            Density::Uniform(r) => require_non_negative("density", *r)?,
            Density::FreeSpace { prefactor } => require_non_negative("density", *prefactor)?,
            Density::PowerLaw { rho0, k0, exponent } => {
                require_non_negative("density", *rho0)?;
                require_positive("k0", *k0)?;
                require_finite("density exponent", *exponent)?;
            }
        }
        Ok(())
    }

    pub fn k_max(&self) -> f64 {
        self.cutoff_omega / self.wave_speed
    }

    pub fn omega(&self, k: f64) -> f64 {
        self.wave_speed * k
    }

    pub fn coupling_at(&self, k: f64) -> f64 {
        match &self.coupling {
            Coupling::Constant(g) => *g,
            Coupling::PowerLaw { g0, k0, exponent } => g0 * (k / k0).powf(*exponent),
            Coupling::Quadrupole { potential, x, volume } => {
                let kc = &self.constants;
                let pre = potential * x * x * (16.0 * PI * kc.g * kc.hbar).sqrt()
                    / (4.0 * kc.c.powi(3) * volume.sqrt());
                pre * self.omega(k).powf(1.5)
            }
            Coupling::Tabulated { k: ks, g } => {
                if k < ks[0] || k > ks[ks.len() - 1] {
                    return 0.0;
                }
                let i = ks.partition_point(|&x| x <= k).clamp(1, ks.len() - 1);
                let t = (k - ks[i - 1]) / (ks[i] - ks[i - 1]);
                g[i - 1] + t * (g[i] - g[i - 1])
            }
        }
    }

    pub fn density_at(&self, k: f64) -> f64 {
        match &self.density {
            Density::Uniform(r) => *r,
            Density::FreeSpace { prefactor } => prefactor * k * k,
            Density::PowerLaw { rho0, k0, exponent } => rho0 * (k / k0).powf(*exponent),
        }
    }

    /// Same spec with every coupling multiplied by `s`.
    pub fn scaled_coupling(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coupling = match &self.coupling {
            Coupling::Constant(g) => Coupling::Constant(g * s),
            Coupling::PowerLaw { g0, k0, exponent } => Coupling::PowerLaw {
                g0: g0 * s,
                k0: *k0,
                exponent: *exponent,
            },
            Coupling::Quadrupole { potential, x, volume } => Coupling::Quadrupole {
                potential: potential * s,
                x: *x,
                volume: *volume,
            },
            Coupling::Tabulated { k, g } => Coupling::Tabulated {
                k: k.clone(),
                g: g.iter().map(|v| v * s).collect(),
            },
        };
        out
    }
}

fn require_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

/// δα = −i(g/ω)(e^{iωT} − 1).
pub fn coherent_shift(g: f64, omega: f64, t: f64) -> Result<Complex64> {
    if !(omega.is_finite() && omega != 0.0) {
        return Err(invalid("omega", "must be finite and non-zero"));
    }
    require_finite("g", g)?;
    require_finite("T", t)?;
    let e = Complex64::from_polar(1.0, omega * t) - 1.0;
    Ok(Complex64::new(0.0, -g / omega) * e)
}

/// exp(−Σ|δα|²).
pub fn decay_factor(shifts: &[Complex64]) -> Result<f64> {
    decay_factor_with(shifts, OverlapConvention::Printed)
}

pub fn decay_factor_with(shifts: &[Complex64], convention: OverlapConvention) -> Result<f64> {
    if shifts.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(invalid("shifts", "must be finite"));
    }
    let sum: f64 = shifts.iter().map(|s| s.norm_sqr()).sum();
    Ok((-convention.factor() * sum).exp())
}

/// (sin(ωT)/ω)² evaluated without cancellation near ω = 0.
fn sin_over_omega_sq(omega: f64, t: f64) -> f64 {
    let x = omega * t;
    let sinc = if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    (t * sinc).powi(2)
}

/// The rate integrand g²(k)ρ(k)sin²(ω_kT)/ω_k².
pub fn rate_integrand(spec: &DecoherenceSpec, t: f64, k: f64) -> f64 {
    let g = spec.coupling_at(k);
    g * g * spec.density_at(k) * sin_over_omega_sq(spec.omega(k), t)
}

/// γ = T·∫₀^{Ω/c} g²(k)ρ(k) sin²(ω_kT)/ω_k² dk, by adaptive quadrature.
pub fn decoherence_rate(spec: &DecoherenceSpec, t: f64) -> Result<f64> {
    Ok(decoherence_rate_detailed(spec, t)?.value * t)
}

/// The bare integral γ/T with its quadrature error estimate.
pub fn decoherence_rate_detailed(spec: &DecoherenceSpec, t: f64) -> Result<quad::Integral> {
    spec.validate()?;
    require_positive("T", t)?;
    let k_max = spec.k_max();
    // Resolve the sin² oscillation: at least a few panels per period.
    let periods = (spec.cutoff_omega * t / PI).ceil().max(1.0);
    let max_intervals = (40.0 * periods).clamp(2000.0, 2.0e6) as usize;
    quad::integrate_with(
        |k| rate_integrand(spec, t, k),
        0.0,
        k_max,
        tol::QUADRATURE_REL,
        max_intervals,
    )
}

/// (ΔE/E_P)²·(Δx/c)ⁿ·(k_B T/ħ)·Ωⁿ, dimension-checked.
pub fn thermal_rate_estimate(
    de: f64,
    dx: f64,
    temperature: f64,
    omega: f64,
    n: u32,
    k: &PhysicalConstants,
) -> Result<f64> {
    require_non_negative("dE", de)?;
    require_non_negative("dx", dx)?;
    require_non_negative("temperature", temperature)?;
    require_non_negative("Omega", omega)?;
    if n < 1 || n > 60 {
        return Err(invalid("n", "must be between 1 and 60"));
    }
    let n = n as i8;
    let ep = Quantity::new(k.planck_energy(), Dim::J);
    let energy = (Quantity::new(de, Dim::J) / ep).powi(2);
    let light = (Quantity::new(dx, Dim::M) / k.c_q()).powi(n);
    let thermal = k.kb_q() * Quantity::new(temperature, Dim::K) / k.hbar_q();
    let cut = Quantity::new(omega, Dim::PER_S).powi(n);
    (energy * light * thermal * cut).expect(Dim::PER_S)
}

/// Quadrupole emission: power |dE/dt| = Gm²a⁴ω⁶/c⁵ (W) and the
/// corresponding rate γ_s = |dE/dt|/(ħω) (1/s).
pub fn graviton_emission_rate(
    m: f64,
    a: f64,
    omega: f64,
    k: &PhysicalConstants,
) -> Result<(f64, f64)> {
    require_non_negative("m", m)?;
    require_non_negative("a", a)?;
    require_non_negative("omega", omega)?;
    let w = Quantity::new(omega, Dim::PER_S);
    let power = k.g_q()
        * Quantity::new(m, Dim::KG).powi(2)
        * Quantity::new(a, Dim::M).powi(4)
        * w.powi(6)
        / k.c_q().powi(5);
    let p = power.expect(Dim::W)?;
    if omega == 0.0 {
        return Ok((p, 0.0));
    }
    let gamma = (power / (k.hbar_q() * w)).expect(Dim::PER_S)?;
    Ok((p, gamma))
}

/// Half-life ln 2/γ_s of the emitting superposition (s).
pub fn emission_half_life(gamma_s: f64) -> f64 {
    if gamma_s > 0.0 {
        std::f64::consts::LN_2 / gamma_s
    } else {
        f64::INFINITY
    }
}

/// ξ = (m/m_P)² and the linear-entropy estimate 1 − e^{−ξ}.
pub fn field_mass_entanglement(
    m: f64,
    d: f64,
    dt: f64,
    k: &PhysicalConstants,
) -> Result<(f64, f64)> {
    require_non_negative("m", m)?;
    require_positive("d", d)?;
    require_non_negative("dt", dt)?;
    let xi = (Quantity::new(m, Dim::KG) / Quantity::new(k.planck_mass(), Dim::KG))
        .powi(2)
        .expect(Dim::NONE)?;
    Ok((xi, -(-xi).exp_m1()))
}

/// Environment acting on a single superposed mass.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Both branches couple to a bosonic field with opposite sign. With
    /// `recombination` the branch separation is ramped as sin²(πt/T), so the
    /// field follows adiabatically and is returned at the end.
    EntanglingField {
        spec: DecoherenceSpec,
        recombination: bool,
    },
    /// Branch phases grow at `rate_a`, `rate_b` (rad/s); the rate difference
    /// fluctuates from run to run with standard deviation `spread` (rad/s).
    ClassicalDephasing {
        rate_a: f64,
        rate_b: f64,
        spread: f64,
    },
    /// Irreversible loss of coherence at `rate` (1/s).
    ObjectiveCollapse { rate: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::EntanglingField { spec, .. } => spec.validate(),
            NoiseModel::ClassicalDephasing {
                rate_a,
                rate_b,
                spread,
            } => {
                require_finite("rate_a", *rate_a)?;
                require_finite("rate_b", *rate_b)?;
                require_non_negative("spread", *spread)
            }
            NoiseModel::ObjectiveCollapse { rate } => require_non_negative("rate", *rate),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NoiseModel::EntanglingField { .. } => "entangling_field",
            NoiseModel::ClassicalDephasing { .. } => "classical_dephasing",
            NoiseModel::ObjectiveCollapse { .. } => "objective_collapse",
        }
    }
}

/// How the two branches are driven during the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Separated for the whole run, recombined abruptly.
    Plain,
    /// As `Plain` with the branches swapped at T/2.
    Echo,
    /// Separation ramped as sin²(πt/T).
    Recombined,
}

/// Fringe visibility (p_max − p_min)/(p_max + p_min) of a qubit whose
/// off-diagonal element has magnitude `coherence`; the final phase scan
/// gives p = ½ ± |ρ₀₁|.
pub fn fringe_visibility(coherence: f64) -> f64 {
    let c = coherence.abs().min(0.5);
    let (pmax, pmin) = (0.5 + c, 0.5 - c);
    (pmax - pmin) / (pmax + pmin)
}

/// ∫₀ᵀ f(t)e^{iωt} dt for the switching profile of each protocol, times
/// g; for `Plain` this is the printed shift.
pub fn protocol_shift(g: f64, omega: f64, t: f64, protocol: Protocol) -> Result<Complex64> {
    let plain = coherent_shift(g, omega, t)?;
    Ok(match protocol {
        Protocol::Plain => plain,
        Protocol::Echo => {
            let h = Complex64::from_polar(1.0, omega * t / 2.0) - 1.0;
            Complex64::new(0.0, g / omega) * h * h
        }
        Protocol::Recombined => {
            // e^{iωT} − 1 = e^{i(ω−Ω_T)T} − 1, divided by (ω − Ω_T) stably.
            let wt = 2.0 * PI / t;
            let x = omega - wt;
            let ratio = if (x * t).abs() < 1e-8 {
                Complex64::new(0.0, t)
            } else {
                (Complex64::from_polar(1.0, x * t) - 1.0) / x
            };
            let e = Complex64::from_polar(1.0, omega * t) - 1.0;
            let integral = e / Complex64::new(0.0, 2.0 * omega)
                - ratio * (omega / (omega + wt)) / Complex64::new(0.0, 2.0);
            integral * g
        }
    })
}

fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Golub–Welsch for the weight e^{−x²}, rescaled to a standard normal.
    let j = DMatrix::from_fn(n, n, |i, k| {
        if i + 1 == k || k + 1 == i {
            ((i.max(k)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(j);
    let nodes = eig.eigenvalues.iter().map(|x| x * 2f64.sqrt()).collect();
    let weights = (0..n).map(|i| eig.eigenvectors[(0, i)].powi(2)).collect();
    (nodes, weights)
}

const ENSEMBLE_NODES: usize = 64;

/// Coherence |ρ₀₁|/½ after time T under one protocol.
pub fn protocol_visibility(noise: &NoiseModel, t: f64, protocol: Protocol) -> Result<f64> {
    noise.validate()?;
    require_positive("total_time", t)?;
    let v = match noise {
        NoiseModel::ObjectiveCollapse { rate } => (-rate * t).exp(),
        NoiseModel::ClassicalDephasing {
            rate_a,
            rate_b,
            spread,
        } => {
            // Accumulated phase difference per unit rate difference.
            let lever = match protocol {
                Protocol::Plain => t,
                Protocol::Echo => 0.0,
                Protocol::Recombined => t / 2.0,
            };
            let mean = (rate_b - rate_a) * lever;
            let (nodes, weights) = gauss_hermite(ENSEMBLE_NODES);
            let avg: Complex64 = nodes
                .iter()
                .zip(&weights)
                .map(|(z, w)| Complex64::from_polar(*w, mean + spread * z * lever))
                .sum();
            avg.norm()
        }
        NoiseModel::EntanglingField { spec, recombination } => {
            let protocol = match (protocol, recombination) {
                (Protocol::Plain, true) => Protocol::Recombined,
                (p, _) => p,
            };
            let integral = quad::integrate_with(
                |k| {
                    let w = spec.omega(k);
                    if w == 0.0 {
                        return 0.0;
                    }
                    let g = spec.coupling_at(k);
                    protocol_shift(g, w, t, protocol)
                        .map(|s| s.norm_sqr() * spec.density_at(k))
                        .unwrap_or(f64::NAN)
                },
                0.0,
                spec.k_max(),
                tol::QUADRATURE_REL,
                (40.0 * (spec.cutoff_omega * t / PI).ceil()).clamp(2000.0, 2.0e6) as usize,
            )?;
            (-spec.convention.factor() * integral.value).exp()
        }
    };
    Ok(fringe_visibility(0.5 * v))
}

/// Visibilities (without echo, with a branch swap at T/2).
pub fn spin_echo_experiment(noise: &NoiseModel, total_time: f64) -> Result<(f64, f64)> {
    Ok((
        protocol_visibility(noise, total_time, Protocol::Plain)?,
        protocol_visibility(noise, total_time, Protocol::Echo)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// The echo restores the fringes: classical phase noise.
    Dephasing,
    /// Only returning the field restores them: entanglement with the field.
    FalseDecoherence,
    /// Nothing restores them.
    Collapse,
    /// No loss of visibility to explain.
    Coherent,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Dephasing => "dephasing",
            Classification::FalseDecoherence => "false decoherence",
            Classification::Collapse => "collapse",
            Classification::Coherent => "coherent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrimination {
    pub plain: f64,
    pub echo: f64,
    pub recombined: f64,
    pub classification: Classification,
}

/// Default minimum visibility gap separating the three signatures.
pub const DISCRIMINATION_GAP: f64 = 0.1;

/// Runs all three protocols and classifies the environment.
pub fn discriminate(noise: &NoiseModel, total_time: f64, gap: f64) -> Result<Discrimination> {
    if !(gap > 0.0 && gap < 1.0) {
        return Err(invalid("gap", "must lie in (0, 1)"));
    }
    let bare = match noise {
        NoiseModel::EntanglingField { spec, .. } => NoiseModel::EntanglingField {
            spec: spec.clone(),
            recombination: false,
        },
        other => other.clone(),
    };
    let plain = protocol_visibility(&bare, total_time, Protocol::Plain)?;
    let echo = protocol_visibility(&bare, total_time, Protocol::Echo)?;
    let recombined = protocol_visibility(&bare, total_time, Protocol::Recombined)?;
    let classification = if plain.min(echo).min(recombined) > 1.0 - gap {
        Classification::Coherent
    } else if echo > plain + gap && echo > recombined + gap {
        Classification::Dephasing
    } else if recombined > plain.max(echo) + gap {
        Classification::FalseDecoherence
    } else if plain.max(echo).max(recombined) < 1.0 - gap {
        Classification::Collapse
    } else {
        return Err(Error::Numerical(format!(
            "visibilities plain={plain:.3}, echo={echo:.3}, recombined={recombined:.3} \
             do not separate by {gap}"
        )));
    };
    Ok(Discrimination {
        plain,
        echo,
        recombined,
        classification,
    })
}
