//! Scenario configuration: TOML with SI units spelled out in key names.

use serde::{Deserialize, Serialize};

use gie_core::constants::PhysicalConstants;
use gie_core::decoherence::{Coupling, DecoherenceSpec, Density, NoiseModel, OverlapConvention};
use gie_core::feasibility::PlanOptions;
use gie_core::interferometer::{ExperimentParams, PhasePair};
use gie_core::linalg::C64;
use gie_core::mediator::{
    continuum_modes, FieldMode, MeasureBasis, MediatorModel, PhaseNoise, DEFAULT_COLLAPSE_STEPS,
};

use crate::error::{CliError, FieldError};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: i64,
    #[serde(default)]
    pub seed: u64,
    pub experiment: ExperimentSection,
    pub constants: Option<ConstantsSection>,
    pub phases: Option<PhasesSection>,
    pub mediator: Option<MediatorSection>,
    pub compare: Option<CompareSection>,
    pub decoherence: Option<DecoherenceSection>,
    pub noise: Option<NoiseSection>,
    pub discriminate: Option<DiscriminateSection>,
    pub sweep: Option<SweepSection>,
    pub plan: Option<PlanSection>,
    #[serde(default)]
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub mass_kg: f64,
    pub d1_m: f64,
    pub d2_m: f64,
    pub d3_m: Option<f64>,
    pub arm_length_m: Option<f64>,
    pub velocity_m_per_s: Option<f64>,
    pub dt_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub g_m3_per_kg_s2: Option<f64>,
    pub hbar_j_s: Option<f64>,
    pub c_m_per_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesSection {
    pub phi1_rad: f64,
    pub delta_phi_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub omega_rad_per_s: f64,
    pub coupling_rad_per_s: f64,
    pub wavenumber_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumSection {
    pub k_max_per_m: f64,
    pub radial: usize,
    pub angular: usize,
}

fn default_gate_cutoff() -> usize {
    60
}
fn default_measured_cutoff() -> usize {
    30
}
fn default_lqg_cutoff() -> usize {
    20
}
fn default_one() -> f64 {
    1.0
}
fn default_rounds() -> usize {
    1
}
fn default_steps() -> usize {
    DEFAULT_COLLAPSE_STEPS
}
fn default_samples() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BasisName {
    #[default]
    Number,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediatorSection {
    Ideal,
    GateModel {
        alpha_re: f64,
        #[serde(default)]
        alpha_im: f64,
        w_rad: f64,
        #[serde(default = "default_gate_cutoff")]
        cutoff: usize,
        #[serde(default)]
        inelasticity: f64,
    },
    LqgField {
        modes: Option<Vec<ModeSection>>,
        continuum: Option<ContinuumSection>,
        #[serde(default = "default_lqg_cutoff")]
        cutoff: usize,
        /// [[mass 1 arm 0, mass 1 arm 1], [mass 2 arm 0, mass 2 arm 1]]
        positions_m: Option<[[f64; 2]; 2]>,
    },
    MeanField,
    MeasuredChannel {
        #[serde(default)]
        basis: BasisName,
        #[serde(default = "default_rounds")]
        rounds: usize,
        #[serde(default = "default_one")]
        beta_re: f64,
        #[serde(default)]
        beta_im: f64,
        #[serde(default = "default_measured_cutoff")]
        cutoff: usize,
    },
    Collapse {
        rate_per_s: Option<f64>,
        #[serde(default = "default_steps")]
        steps: usize,
        superposition_size_m: Option<f64>,
    },
    ClassicalDephasing {
        sigma_rad: f64,
        #[serde(default)]
        shared: bool,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Natural units.
    HybridEnsemble { g1: f64, g2: f64, duration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub mediators: Vec<MediatorSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSection {
    Constant {
        g_rad_per_s: f64,
    },
    PowerLaw {
        g0_rad_per_s: f64,
        k0_per_m: f64,
        exponent: f64,
    },
    Quadrupole {
        potential_j: f64,
        x_m: f64,
        volume_m3: f64,
    },
    Tabulated {
        k_per_m: Vec<f64>,
        g_rad_per_s: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySection {
    Uniform { value: f64 },
    FreeSpace { prefactor: f64 },
    PowerLaw { rho0: f64, k0_per_m: f64, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConventionName {
    #[default]
    Printed,
    Symmetric,
}

fn default_exponent() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceSection {
    pub coupling: CouplingSection,
    pub density: Option<DensitySection>,
    pub cutoff_omega_rad_per_s: f64,
    #[serde(default = "default_exponent")]
    pub exponent: u32,
    #[serde(default)]
    pub temperature_k: f64,
    pub wave_speed_m_per_s: Option<f64>,
    #[serde(default)]
    pub convention: ConventionName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSection {
    /// Uses the [decoherence] section.
    EntanglingField {
        #[serde(default)]
        recombination: bool,
    },
    ClassicalDephasing {
        rate_a_rad_per_s: f64,
        rate_b_rad_per_s: f64,
        spread_rad_per_s: f64,
    },
    Collapse {
        rate_per_s: f64,
    },
}

fn default_gap() -> f64 {
    gie_core::decoherence::DISCRIMINATION_GAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscriminateSection {
    pub total_time_s: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path of a numeric config key, e.g. "experiment.d2_m".
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: Scale,
}

fn default_slack() -> f64 {
    PlanOptions::default().slack
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default)]
    pub extra_rate_per_s: f64,
    pub superposition_size_m: Option<f64>,
    #[serde(default)]
    pub include_collapse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Phases,
    Probabilities,
    Witness,
    Negativity,
    LogNegativity,
    Entropy,
    Decay,
    Correlations,
    Report,
}

impl Output {
    pub fn as_str(self) -> &'static str {
        match self {
            Output::Phases => "phases",
            Output::Probabilities => "probabilities",
            Output::Witness => "witness",
            Output::Negativity => "negativity",
            Output::LogNegativity => "log_negativity",
            Output::Entropy => "entropy",
            Output::Decay => "decay",
            Output::Correlations => "correlations",
            Output::Report => "report",
        }
    }
}

fn default_outputs() -> Vec<Output> {
    vec![
        Output::Phases,
        Output::Probabilities,
        Output::Witness,
        Output::Negativity,
        Output::Entropy,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_outputs")]
    pub quantities: Vec<Output>,
}

impl Default for OutputsSection {
    fn default() -> Self {
        OutputsSection {
            quantities: default_outputs(),
        }
    }
}

/// A parsed config together with its raw table, which sweeps edit.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub raw: toml::Table,
}

/// Parses and validates a config document.
pub fn parse(text: &str) -> Result<LoadedConfig, CliError> {
    let raw: toml::Table = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    match raw.get("schema_version") {
        None => return Err(CliError::field("schema_version", "missing field")),
        Some(toml::Value::Integer(SCHEMA_VERSION)) => {}
        Some(v) => {
            return Err(CliError::field(
                "schema_version",
                format!("unsupported version {v}; expected {SCHEMA_VERSION}"),
            ))
        }
    }
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    validate(&config)?;
    if let Some(s) = &config.sweep {
        set_path(&mut raw.clone(), &s.parameter, s.from)?;
    }
    Ok(LoadedConfig { config, raw })
}

/// Re-reads a (possibly edited) raw table.
pub fn from_table(raw: toml::Table) -> Result<LoadedConfig, CliError> {
    let config: ScenarioConfig = toml::Value::Table(raw.clone())
        .try_into()
        .map_err(|e: toml::de::Error| CliError::field("config", e.message().to_string()))?;
    validate(&config)?;
    Ok(LoadedConfig { config, raw })
}

/// Sets `path` in a raw config table. The key must already exist and be
/// numeric; integer keys receive the rounded value.
pub fn set_path(raw: &mut toml::Table, path: &str, value: f64) -> Result<(), CliError> {
    let bad = |m: String| CliError::field("sweep.parameter", m);
    let parts: Vec<&str> = path.split('.').collect();
    let (last, parents) = parts.split_last().ok_or_else(|| bad("empty path".into()))?;
    let mut table = raw;
    for p in parents {
        table = match table.get_mut(*p) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(bad(format!("`{path}`: no table `{p}`"))),
        };
    }
    match table.get_mut(*last) {
        Some(v @ toml::Value::Float(_)) => *v = toml::Value::Float(value),
        Some(v @ toml::Value::Integer(_)) => *v = toml::Value::Integer(value.round() as i64),
        Some(_) => return Err(bad(format!("`{path}` is not numeric"))),
        None => return Err(bad(format!("`{path}` does not exist in the config"))),
    }
    Ok(())
}

/// Names the offending key from the error span: the enclosing table header
/// plus the key on the reported line.
fn toml_error(text: &str, e: &toml::de::Error) -> CliError {
    let mut field = String::from("config");
    let mut location = String::new();
    if let Some(span) = e.span() {
        let start = span.start.min(text.len());
        let line_no = text[..start].matches('\n').count() + 1;
        location = format!(" (line {line_no})");
        let lines: Vec<&str> = text.lines().collect();
        let mut section = String::new();
        for l in lines.iter().take(line_no).rev() {
            let t = l.trim();
            if t.starts_with('[') {
                section = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
                break;
            }
        }
        let key = lines
            .get(line_no - 1)
            .and_then(|l| l.split_once('='))
            .map(|(k, _)| k.trim().to_string())
            .filter(|k| !k.starts_with('['));
        let key = key.or_else(|| buffered_key(text, &section, e.message()));
        field = match (section.is_empty(), key) {
            (true, Some(k)) => k,
            (false, Some(k)) => format!("{section}.{k}"),
            (false, None) => section,
            (true, None) => field,
        };
    }
    CliError::field(field, format!("{}{location}", e.message().trim()))
}

/// Internally tagged sections report errors against the whole table, so
/// the key is recovered from the message: named outright for missing and
/// unknown fields, or as the only key holding a value of the wrong type.
fn buffered_key(text: &str, section: &str, message: &str) -> Option<String> {
    for prefix in ["missing field `", "unknown field `"] {
        if let Some(rest) = message.split(prefix).nth(1) {
            return rest.split('`').next().map(str::to_string);
        }
    }
    let found = message.strip_prefix("invalid type: ")?.split_whitespace().next()?;
    let raw: toml::Table = toml::from_str(text).ok()?;
    let mut table = &raw;
    for part in section.split('.').filter(|p| !p.is_empty()) {
        table = table.get(part)?.as_table()?;
    }
    let mut hits = table.iter().filter(|(k, v)| {
        k.as_str() != "kind"
            && matches!(
                (found, v),
                ("string", toml::Value::String(_))
                    | ("integer", toml::Value::Integer(_))
                    | ("floating", toml::Value::Float(_))
                    | ("boolean", toml::Value::Boolean(_))
                    | ("sequence", toml::Value::Array(_))
                    | ("map", toml::Value::Table(_))
            )
    });
    match (hits.next(), hits.next()) {
        (Some((k, _)), None) => Some(k.clone()),
        _ => None,
    }
}

struct Checker {
    errors: Vec<FieldError>,
}

impl Checker {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(FieldError {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.fail(field, format!("must be finite and > 0, got {v}"));
        }
    }

    fn non_negative(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.fail(field, format!("must be finite and >= 0, got {v}"));
        }
    }

    fn finite(&mut self, field: &str, v: f64) {
        if !v.is_finite() {
            self.fail(field, format!("must be finite, got {v}"));
        }
    }

    fn at_least(&mut self, field: &str, v: usize, min: usize) {
        if v < min {
            self.fail(field, format!("must be >= {min}, got {v}"));
        }
    }
}

pub fn validate(c: &ScenarioConfig) -> Result<(), CliError> {
    let mut k = Checker { errors: Vec::new() };
    let e = &c.experiment;
    k.positive("experiment.mass_kg", e.mass_kg);
    k.positive("experiment.d1_m", e.d1_m);
    k.positive("experiment.d2_m", e.d2_m);
    k.positive("experiment.dt_s", e.dt_s);
    if let Some(v) = e.d3_m {
        k.positive("experiment.d3_m", v);
    }
    if let Some(v) = e.arm_length_m {
        k.positive("experiment.arm_length_m", v);
    }
    if let Some(v) = e.velocity_m_per_s {
        k.positive("experiment.velocity_m_per_s", v);
    }
    if let (Some(l), Some(v)) = (e.arm_length_m, e.velocity_m_per_s) {
        if l > 0.0 && v > 0.0 && e.dt_s > 0.0 && ((l / v - e.dt_s) / e.dt_s).abs() > 1e-9 {
            k.fail(
                "experiment.dt_s",
                format!("arm_length_m / velocity_m_per_s = {:e} s disagrees with dt_s", l / v),
            );
        }
    }
    if let Some(cs) = &c.constants {
        for (name, v) in [
            ("constants.g_m3_per_kg_s2", cs.g_m3_per_kg_s2),
            ("constants.hbar_j_s", cs.hbar_j_s),
            ("constants.c_m_per_s", cs.c_m_per_s),
        ] {
            if let Some(v) = v {
                if name.ends_with("g_m3_per_kg_s2") {
                    k.non_negative(name, v);
                } else {
                    k.positive(name, v);
                }
            }
        }
    }
    if let Some(p) = &c.phases {
        k.finite("phases.phi1_rad", p.phi1_rad);
        k.finite("phases.delta_phi_rad", p.delta_phi_rad);
    }
    if let Some(m) = &c.mediator {
        check_mediator(&mut k, "mediator", m);
    }
    if let Some(cmp) = &c.compare {
        if cmp.mediators.len() < 2 {
            k.fail("compare.mediators", "list at least two mediators");
        }
        for (i, m) in cmp.mediators.iter().enumerate() {
            check_mediator(&mut k, &format!("compare.mediators[{i}]"), m);
        }
    }
    if let Some(d) = &c.decoherence {
        check_decoherence(&mut k, d);
    }
    if let Some(n) = &c.noise {
        match n {
            NoiseSection::EntanglingField { .. } => {
                if c.decoherence.is_none() {
                    k.fail("noise.kind", "entangling_field needs a [decoherence] section");
                }
            }
            NoiseSection::ClassicalDephasing {
                rate_a_rad_per_s,
                rate_b_rad_per_s,
                spread_rad_per_s,
            } => {
                k.finite("noise.rate_a_rad_per_s", *rate_a_rad_per_s);
                k.finite("noise.rate_b_rad_per_s", *rate_b_rad_per_s);
                k.non_negative("noise.spread_rad_per_s", *spread_rad_per_s);
            }
            NoiseSection::Collapse { rate_per_s } => k.non_negative("noise.rate_per_s", *rate_per_s),
        }
    }
    if let Some(d) = &c.discriminate {
        k.positive("discriminate.total_time_s", d.total_time_s);
        if !(d.gap.is_finite() && d.gap > 0.0 && d.gap < 1.0) {
            k.fail("discriminate.gap", format!("must lie in (0, 1), got {}", d.gap));
        }
    }
    if let Some(s) = &c.sweep {
        k.at_least("sweep.steps", s.steps, 2);
        k.finite("sweep.from", s.from);
        k.finite("sweep.to", s.to);
        if s.scale == Scale::Log && !(s.from > 0.0 && s.to > 0.0) {
            k.fail("sweep.scale", "log sweeps need positive endpoints");
        }
        if !SWEEPABLE_PREFIXES.iter().any(|p| s.parameter.starts_with(p)) {
            k.fail(
                "sweep.parameter",
                format!("`{}` is not under {:?}", s.parameter, SWEEPABLE_PREFIXES),
            );
        }
    }
    if let Some(p) = &c.plan {
        if !(p.slack.is_finite() && (0.0..=1.0).contains(&p.slack)) {
            k.fail("plan.slack", format!("must lie in [0, 1], got {}", p.slack));
        }
        k.non_negative("plan.extra_rate_per_s", p.extra_rate_per_s);
        if let Some(v) = p.superposition_size_m {
            k.positive("plan.superposition_size_m", v);
        }
    }
    if k.errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(k.errors))
    }
}

/// Sections whose numeric keys a sweep may vary.
pub const SWEEPABLE_PREFIXES: [&str; 6] = [
    "experiment.",
    "phases.",
    "mediator.",
    "decoherence.",
    "plan.",
    "constants.",
];

fn check_mediator(k: &mut Checker, at: &str, m: &MediatorSection) {
    let f = |key: &str| format!("{at}.{key}");
    match m {
        MediatorSection::Ideal | MediatorSection::MeanField => {}
        MediatorSection::GateModel {
            alpha_re,
            alpha_im,
            w_rad,
            cutoff,
            inelasticity,
        } => {
            k.finite(&f("alpha_re"), *alpha_re);
            k.finite(&f("alpha_im"), *alpha_im);
            if !(w_rad.is_finite() && *w_rad > 0.0 && *w_rad < std::f64::consts::PI) {
                k.fail(&f("w_rad"), format!("must lie in (0, pi), got {w_rad}"));
            }
            k.at_least(&f("cutoff"), *cutoff, 2);
            if !(inelasticity.is_finite() && (0.0..=1.0).contains(inelasticity)) {
                k.fail(&f("inelasticity"), format!("must lie in [0, 1], got {inelasticity}"));
            }
        }
        MediatorSection::LqgField {
            modes,
            continuum,
            cutoff,
            positions_m,
        } => {
            k.at_least(&f("cutoff"), *cutoff, 2);
            match (modes, continuum) {
                (Some(_), Some(_)) => k.fail(at, "give either `modes` or `continuum`, not both"),
                (None, None) => k.fail(at, "give `modes` or `continuum`"),
                (Some(ms), None) => {
                    if ms.is_empty() {
                        k.fail(&f("modes"), "at least one mode is required");
                    }
                    for (i, md) in ms.iter().enumerate() {
                        k.positive(&f(&format!("modes[{i}].omega_rad_per_s")), md.omega_rad_per_s);
                        k.finite(&f(&format!("modes[{i}].coupling_rad_per_s")), md.coupling_rad_per_s);
                        k.finite(&f(&format!("modes[{i}].wavenumber_per_m")), md.wavenumber_per_m);
                    }
                }
                (None, Some(cs)) => {
                    k.positive(&f("continuum.k_max_per_m"), cs.k_max_per_m);
                    k.at_least(&f("continuum.radial"), cs.radial, 1);
                    k.at_least(&f("continuum.angular"), cs.angular, 1);
                }
            }
            if let Some(p) = positions_m {
                if p.iter().flatten().any(|x| !x.is_finite()) {
                    k.fail(&f("positions_m"), "must be finite");
                }
            }
        }
        MediatorSection::MeasuredChannel {
            rounds,
            beta_re,
            beta_im,
            cutoff,
            ..
        } => {
            k.at_least(&f("rounds"), *rounds, 1);
            k.finite(&f("beta_re"), *beta_re);
            k.finite(&f("beta_im"), *beta_im);
            k.at_least(&f("cutoff"), *cutoff, 2);
        }
        MediatorSection::Collapse {
            rate_per_s,
            steps,
            superposition_size_m,
        } => {
            if let Some(r) = rate_per_s {
                k.non_negative(&f("rate_per_s"), *r);
            }
            k.at_least(&f("steps"), *steps, 1);
            if let Some(s) = superposition_size_m {
                k.positive(&f("superposition_size_m"), *s);
            }
        }
        MediatorSection::ClassicalDephasing {
            sigma_rad, samples, ..
        } => {
            k.non_negative(&f("sigma_rad"), *sigma_rad);
            k.at_least(&f("samples"), *samples, 1);
        }
        MediatorSection::HybridEnsemble { g1, g2, duration } => {
            k.finite(&f("g1"), *g1);
            k.finite(&f("g2"), *g2);
            k.non_negative(&f("duration"), *duration);
        }
    }
}

fn check_decoherence(k: &mut Checker, d: &DecoherenceSection) {
    let at = "decoherence";
    k.positive(&format!("{at}.cutoff_omega_rad_per_s"), d.cutoff_omega_rad_per_s);
    k.non_negative(&format!("{at}.temperature_k"), d.temperature_k);
    if d.exponent < 1 {
        k.fail(&format!("{at}.exponent"), "must be >= 1");
    }
    if let Some(w) = d.wave_speed_m_per_s {
        k.positive(&format!("{at}.wave_speed_m_per_s"), w);
    }
    match &d.coupling {
        CouplingSection::Constant { g_rad_per_s } => {
            k.finite("decoherence.coupling.g_rad_per_s", *g_rad_per_s)
        }
        CouplingSection::PowerLaw {
            g0_rad_per_s,
            k0_per_m,
            exponent,
        } => {
            k.finite("decoherence.coupling.g0_rad_per_s", *g0_rad_per_s);
            k.positive("decoherence.coupling.k0_per_m", *k0_per_m);
            k.finite("decoherence.coupling.exponent", *exponent);
        }
        CouplingSection::Quadrupole {
            potential_j,
            x_m,
            volume_m3,
        } => {
            k.finite("decoherence.coupling.potential_j", *potential_j);
            k.finite("decoherence.coupling.x_m", *x_m);
            k.positive("decoherence.coupling.volume_m3", *volume_m3);
        }
        CouplingSection::Tabulated { k_per_m, g_rad_per_s } => {
            if k_per_m.len() != g_rad_per_s.len() || k_per_m.len() < 2 {
                k.fail(
                    "decoherence.coupling.k_per_m",
                    "needs at least two entries, matching g_rad_per_s in length",
                );
            } else if k_per_m.windows(2).any(|w| !(w[1] > w[0])) {
                k.fail("decoherence.coupling.k_per_m", "must increase strictly");
            }
            if k_per_m.iter().chain(g_rad_per_s).any(|x| !x.is_finite()) {
                k.fail("decoherence.coupling", "tabulated values must be finite");
            }
        }
    }
    match &d.density {
        None => {}
        Some(DensitySection::Uniform { value }) => k.non_negative("decoherence.density.value", *value),
        Some(DensitySection::FreeSpace { prefactor }) => {
            k.non_negative("decoherence.density.prefactor", *prefactor)
        }
        Some(DensitySection::PowerLaw {
            rho0,
            k0_per_m,
            exponent,
        }) => {
            k.non_negative("decoherence.density.rho0", *rho0);
            k.positive("decoherence.density.k0_per_m", *k0_per_m);
            k.finite("decoherence.density.exponent", *exponent);
        }
    }
}

impl ScenarioConfig {
    pub fn constants(&self) -> PhysicalConstants {
        let mut k = PhysicalConstants::codata2018();
        if let Some(c) = &self.constants {
            if let Some(g) = c.g_m3_per_kg_s2 {
                k.g = g;
            }
            if let Some(h) = c.hbar_j_s {
                k.hbar = h;
            }
            if let Some(v) = c.c_m_per_s {
                k.c = v;
            }
        }
        k
    }

    pub fn params(&self) -> ExperimentParams {
        let e = &self.experiment;
        ExperimentParams {
            m: e.mass_kg,
            d1: e.d1_m,
            d2: e.d2_m,
            d3: e.d3_m,
            arm_length: e.arm_length_m,
            velocity: e.velocity_m_per_s,
            dt: e.dt_s,
            constants: self.constants(),
        }
    }

    /// Explicit phases when a [phases] section is present.
    pub fn phase_override(&self) -> Option<PhasePair> {
        self.phases
            .as_ref()
            .map(|p| PhasePair::new(p.phi1_rad, p.delta_phi_rad))
    }

    pub fn decoherence_spec(&self) -> Option<DecoherenceSpec> {
        self.decoherence.as_ref().map(|d| d.to_spec(self.constants()))
    }

    pub fn noise_model(&self) -> Option<NoiseModel> {
        let n = self.noise.as_ref()?;
        Some(match n {
            NoiseSection::EntanglingField { recombination } => NoiseModel::EntanglingField {
                spec: self.decoherence_spec()?,
                recombination: *recombination,
            },
            NoiseSection::ClassicalDephasing {
                rate_a_rad_per_s,
                rate_b_rad_per_s,
                spread_rad_per_s,
            } => NoiseModel::ClassicalDephasing {
                rate_a: *rate_a_rad_per_s,
                rate_b: *rate_b_rad_per_s,
                spread: *spread_rad_per_s,
            },
            NoiseSection::Collapse { rate_per_s } => NoiseModel::ObjectiveCollapse { rate: *rate_per_s },
        })
    }

    pub fn plan_options(&self) -> PlanOptions {
        match &self.plan {
            None => PlanOptions::default(),
            Some(p) => PlanOptions {
                slack: p.slack,
                extra_rate: p.extra_rate_per_s,
                superposition_size: p.superposition_size_m,
                include_collapse: p.include_collapse,
            },
        }
    }
}

impl DecoherenceSection {
    pub fn to_spec(&self, constants: PhysicalConstants) -> DecoherenceSpec {
        let coupling = match &self.coupling {
            CouplingSection::Constant { g_rad_per_s } => Coupling::Constant(*g_rad_per_s),
            CouplingSection::PowerLaw {
                g0_rad_per_s,
                k0_per_m,
                exponent,
            } => Coupling::PowerLaw {
                g0: *g0_rad_per_s,
                k0: *k0_per_m,
                exponent: *exponent,
            },
            CouplingSection::Quadrupole {
                potential_j,
                x_m,
                volume_m3,
            } => Coupling::Quadrupole {
                potential: *potential_j,
                x: *x_m,
                volume: *volume_m3,
            },
            CouplingSection::Tabulated { k_per_m, g_rad_per_s } => Coupling::Tabulated {
                k: k_per_m.clone(),
                g: g_rad_per_s.clone(),
            },
        };
        let mut spec = DecoherenceSpec::new(coupling, self.cutoff_omega_rad_per_s);
        spec.constants = constants;
        spec.wave_speed = self.wave_speed_m_per_s.unwrap_or(constants.c);
        spec.exponent = self.exponent;
        spec.temperature = self.temperature_k;
        spec.convention = match self.convention {
            ConventionName::Printed => OverlapConvention::Printed,
            ConventionName::Symmetric => OverlapConvention::Symmetric,
        };
        if let Some(d) = &self.density {
            spec.density = match d {
                DensitySection::Uniform { value } => Density::Uniform(*value),
                DensitySection::FreeSpace { prefactor } => Density::FreeSpace {
                    prefactor: *prefactor,
                },
                DensitySection::PowerLaw {
                    rho0,
                    k0_per_m,
                    exponent,
                } => Density::PowerLaw {
                    rho0: *rho0,
                    k0: *k0_per_m,
                    exponent: *exponent,
                },
            };
        }
        spec
    }
}

impl MediatorSection {
    /// The engine model; `seed` feeds stochastic mediators.
    pub fn to_model(&self, params: &ExperimentParams, seed: u64) -> Result<MediatorModel, CliError> {
        Ok(match self {
            MediatorSection::Ideal => MediatorModel::Ideal,
            MediatorSection::GateModel {
                alpha_re,
                alpha_im,
                w_rad,
                cutoff,
                inelasticity,
            } => MediatorModel::GateModel {
                alpha: C64::new(*alpha_re, *alpha_im),
                w: *w_rad,
                cutoff: *cutoff,
                inelasticity: *inelasticity,
            },
            MediatorSection::LqgField {
                modes,
                continuum,
                cutoff,
                positions_m,
            } => {
                let modes = match (modes, continuum) {
                    (Some(ms), _) => ms
                        .iter()
                        .map(|m| FieldMode {
                            omega: m.omega_rad_per_s,
                            coupling: m.coupling_rad_per_s,
                            wavenumber: m.wavenumber_per_m,
                        })
                        .collect(),
                    (None, Some(c)) => {
                        continuum_modes(params.m, c.k_max_per_m, c.radial, c.angular, &params.constants)
                            .map_err(|e| CliError::from_core("mediator.continuum", e))?
                    }
                    (None, None) => return Err(CliError::field("mediator", "give `modes` or `continuum`")),
                };
                MediatorModel::LqgField {
                    modes,
                    cutoff: *cutoff,
                    positions: *positions_m,
                }
            }
            MediatorSection::MeanField => MediatorModel::MeanField,
            MediatorSection::MeasuredChannel {
                basis,
                rounds,
                beta_re,
                beta_im,
                cutoff,
            } => MediatorModel::MeasuredChannel {
                basis: match basis {
                    BasisName::Number => MeasureBasis::Number,
                },
                rounds: *rounds,
                beta: C64::new(*beta_re, *beta_im),
                cutoff: *cutoff,
            },
            MediatorSection::Collapse {
                rate_per_s,
                steps,
                superposition_size_m,
            } => MediatorModel::Collapse {
                rate: *rate_per_s,
                steps: *steps,
                superposition_size: *superposition_size_m,
            },
            MediatorSection::ClassicalDephasing {
                sigma_rad,
                shared,
                samples,
            } => MediatorModel::ClassicalDephasing(PhaseNoise {
                sigma: *sigma_rad,
                shared: *shared,
                samples: *samples,
                seed,
            }),
            MediatorSection::HybridEnsemble { g1, g2, duration } => MediatorModel::HybridEnsemble {
                g1: *g1,
                g2: *g2,
                duration: *duration,
            },
        })
    }
}
