//! Command runners. Each returns rows ready for the report.

use rayon::prelude::*;

use gie_core::decoherence::{
    decoherence_rate, discriminate as core_discriminate, Coupling, DecoherenceSpec,
};
use gie_core::feasibility::{plan as core_plan, FeasibilityReport};
use gie_core::interferometer::{correlation_table, witness_expectation, ExperimentParams, PhasePair, MASS_1, MASS_2};
use gie_core::mediator::{run_protocol_with_phases, ProbeState, ProtocolResult};
use gie_core::qstate::{apply_to_density, negativity, partial_trace, ppt_separable, von_neumann_entropy, linear_entropy, EntropyBase, LinearOperator};
use gie_core::Error as CoreError;

use crate::config::{LoadedConfig, MediatorSection, Output, Scale, ScenarioConfig};
use crate::error::CliError;

use crate::report::{Cell, Results, Row, Unavailable};

/// Entanglement below this is reported as PPT for Gaussian probes.
pub const GAUSSIAN_PPT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Compare,
    Discriminate,
    Plan,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Compare => "compare",
            Command::Discriminate => "discriminate",
            Command::Plan => "plan",
        }
    }
}

/// Per-point seed derived from the base seed (splitmix64 finalizer).
pub fn point_seed(base: u64, index: usize) -> u64 {
    let mut z = base.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run(command: Command, loaded: &LoadedConfig, seed: u64) -> Result<Results, CliError> {
    match command {
        Command::Simulate => simulate(&loaded.config, seed),
        Command::Sweep => sweep(loaded, seed),
        Command::Compare => compare(&loaded.config, seed),
        Command::Discriminate => discriminate(&loaded.config),
        Command::Plan => plan(&loaded.config),
    }
}

fn core_err(context: &'static str) -> impl Fn(CoreError) -> CliError {
    move |e| CliError::from_core(context, e)
}

fn target_phases(c: &ScenarioConfig, params: &ExperimentParams) -> Result<PhasePair, CliError> {
    match c.phase_override() {
        Some(p) => Ok(p),
        None => params.phase_pair().map_err(core_err("experiment")),
    }
}

/// Runs the configured mediator once.
pub fn simulate(c: &ScenarioConfig, seed: u64) -> Result<Results, CliError> {
    let m = c
        .mediator
        .as_ref()
        .ok_or_else(|| CliError::field("mediator", "section required by `simulate`"))?;
    simulate_point(c, m, point_seed(seed, 0), &c.outputs.quantities)
}

/// One protocol run of `mediator` with the given seed.
pub fn simulate_point(
    c: &ScenarioConfig,
    mediator: &MediatorSection,
    seed: u64,
    outputs: &[Output],
) -> Result<Results, CliError> {
    let params = c.params();
    let model = mediator.to_model(&params, seed)?;
    model.validate().map_err(core_err("mediator"))?;
    let phases = target_phases(c, &params)?;
    let result = run_protocol_with_phases(&model, &params, phases).map_err(core_err("mediator"))?;
    let mut res = Results::default();
    let mut row = Row::default();
    row.push("mediator", "text", Cell::Text(model.name().to_string()));
    row.push("classical", "bool", Cell::Bool(model.is_classical()));
    let mut outputs = outputs.to_vec();
    outputs.sort();
    outputs.dedup();
    for o in outputs {
        fill_output(c, &params, phases, &result, o, &mut row, &mut res)?;
    }
    res.rows.push(row);
    Ok(res)
}

fn unavailable(res: &mut Results, output: Output, reason: impl Into<String>) {
    res.unavailable.push(Unavailable {
        output: output.as_str().to_string(),
        reason: reason.into(),
    });
}

#[allow(clippy::too_many_arguments)]
fn fill_output(
    c: &ScenarioConfig,
    params: &ExperimentParams,
    phases: PhasePair,
    result: &ProtocolResult,
    o: Output,
    row: &mut Row,
    res: &mut Results,
) -> Result<(), CliError> {
    let rho = result.two_mass();
    let gaussian_reason = "the hybrid ensemble yields a Gaussian probe state";
    let num = core_err("outputs");
    match o {
        Output::Phases => {
            row.num("phi1_rad", "rad", phases.phi1);
            row.num("delta_phi_rad", "rad", phases.delta_phi);
            row.num("entangling_phase_rad", "rad", phases.entangling_phase());
            match result.phases_extracted {
                Some(p) => {
                    row.num("extracted_phi1_rad", "rad", p.phi1);
                    row.num("extracted_delta_phi_rad", "rad", p.delta_phi);
                }
                None => {
                    row.push("extracted_phi1_rad", "rad", Cell::Missing);
                    row.push("extracted_delta_phi_rad", "rad", Cell::Missing);
                    let why = if rho.is_none() {
                        gaussian_reason
                    } else {
                        "the branch coherences vanish, so the phases cannot be read off"
                    };
                    unavailable(res, o, format!("extracted phases: {why}"));
                }
            }
        }
        Output::Probabilities => match rho {
            Some(r) => {
                // Both masses read out after a Hadamard.
                let h = LinearOperator::hadamard();
                let once = apply_to_density(&h, r, &[MASS_1]).map_err(&num)?;
                let out = apply_to_density(&h, &once, &[MASS_2]).map_err(&num)?;
                for (i, label) in ["p_00", "p_01", "p_10", "p_11"].iter().enumerate() {
                    row.num(*label, "1", out.population(i));
                }
            }
            None => unavailable(res, o, gaussian_reason),
        },
        Output::Witness => match rho {
            Some(r) => row.num("witness", "1", witness_expectation(r).map_err(&num)?),
            None => unavailable(res, o, gaussian_reason),
        },
        Output::Negativity => {
            match rho {
                Some(r) => {
                    row.num("negativity", "1", negativity(r, &[MASS_1]).map_err(&num)?);
                    row.push("ppt", "bool", Cell::Bool(ppt_separable(r).map_err(&num)?));
                }
                None => {
                    row.push("negativity", "1", Cell::Missing);
                    let ln = result.log_negativity.unwrap_or(0.0);
                    row.push("ppt", "bool", Cell::Bool(ln <= GAUSSIAN_PPT_TOL));
                    unavailable(res, o, format!("{gaussian_reason}; see log_negativity"));
                }
            }
        }
        Output::LogNegativity => {
            let ln = match (rho, result.log_negativity) {
                (_, Some(ln)) => ln,
                (Some(r), None) => (2.0 * negativity(r, &[MASS_1]).map_err(&num)? + 1.0).ln(),
                (None, None) => 0.0,
            };
            row.num("log_negativity", "1", ln);
        }
        Output::Entropy => match rho {
            Some(r) => {
                let reduced = partial_trace(r, &[MASS_1]).map_err(&num)?;
                row.num("entropy_mass1_bits", "bit", von_neumann_entropy(&reduced, EntropyBase::Bits));
                row.num("linear_entropy_mass1", "1", linear_entropy(&reduced));
                row.num("entropy_total_bits", "bit", von_neumann_entropy(r, EntropyBase::Bits));
                row.num("purity", "1", r.purity());
            }
            None => unavailable(res, o, gaussian_reason),
        },
        Output::Decay => match c.decoherence_spec() {
            Some(spec) => {
                let gamma = decoherence_rate(&spec, params.dt).map_err(core_err("decoherence"))?;
                row.num("decoherence_rate_per_s", "1/s", gamma);
                row.num("coherence", "1", (-gamma * params.dt).exp());
            }
            None => unavailable(res, o, "no [decoherence] section"),
        },
        Output::Correlations => match rho {
            Some(r) => {
                let t = correlation_table(r).map_err(&num)?;
                for i in 0..2 {
                    for s in 0..2 {
                        row.num(format!("zx_{i}{s}"), "1", t.zx[i][s]);
                    }
                }
                for s in 0..2 {
                    for i in 0..2 {
                        row.num(format!("xz_{s}{i}"), "1", t.xz[s][i]);
                    }
                }
            }
            None => unavailable(res, o, gaussian_reason),
        },
        Output::Report => {
            let rep = feasibility(c, params)?;
            push_report(&rep, "plan_", row, res);
        }
    }
    Ok(())
}

fn budget(c: &ScenarioConfig) -> (DecoherenceSpec, Option<String>) {
    match c.decoherence_spec() {
        Some(s) => (s, None),
        None => {
            let mut s = DecoherenceSpec::new(Coupling::Constant(0.0), 1.0);
            s.constants = c.constants();
            (
                s,
                Some("no [decoherence] section: field decoherence budget taken as zero".into()),
            )
        }
    }
}

fn feasibility(c: &ScenarioConfig, params: &ExperimentParams) -> Result<FeasibilityReport, CliError> {
    let (spec, _) = budget(c);
    core_plan(params, &spec, &c.plan_options()).map_err(core_err("plan"))
}

fn push_report(rep: &FeasibilityReport, prefix: &str, row: &mut Row, res: &mut Results) {
    for e in &rep.values {
        let unit = e.quantity.unit();
        let unit = if unit.is_empty() { "1".to_string() } else { unit };
        row.num(format!("{prefix}{}", e.name), &unit, e.quantity.value);
    }
    for f in &rep.flags {
        row.push(format!("{prefix}{}_ok", f.name), "bool", Cell::Bool(f.passed));
        let note = format!("{}: {}", f.name, f.rule);
        if !res.notes.contains(&note) {
            res.notes.push(note);
        }
    }
    for w in &rep.warnings {
        if !res.notes.contains(w) {
            res.notes.push(w.clone());
        }
    }
}

/// The grid of parameter values.
pub fn sweep_grid(from: f64, to: f64, steps: usize, scale: Scale) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            let s = i as f64 / last;
            let x = match scale {
                Scale::Linear => from + (to - from) * s,
                Scale::Log => (from.ln() + (to.ln() - from.ln()) * s).exp(),
            };
            // Endpoints exactly as written.
            if i == 0 {
                from
            } else if i + 1 == steps {
                to
            } else {
                x
            }
        })
        .collect()
}

/// Unit implied by a key's suffix.
pub fn unit_from_key(key: &str) -> &'static str {
    const SUFFIXES: [(&str, &str); 13] = [
        ("_m3_per_kg_s2", "m^3/(kg s^2)"),
        ("_j_s", "J s"),
        ("_rad_per_s", "rad/s"),
        ("_m_per_s", "m/s"),
        ("_per_s", "1/s"),
        ("_per_m", "1/m"),
        ("_m3", "m^3"),
        ("_kg", "kg"),
        ("_rad", "rad"),
        ("_m", "m"),
        ("_s", "s"),
        ("_j", "J"),
        ("_k", "K"),
    ];
    SUFFIXES
        .iter()
        .find(|(s, _)| key.ends_with(s))
        .map(|(_, u)| *u)
        .unwrap_or("1")
}

/// Config for sweep point `value`.
pub fn sweep_point_config(loaded: &LoadedConfig, value: f64) -> Result<LoadedConfig, CliError> {
    let s = loaded
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::field("sweep", "section required by `sweep`"))?;
    let mut raw = loaded.raw.clone();
    crate::config::set_path(&mut raw, &s.parameter, value)?;
    raw.remove("sweep");
    crate::config::from_table(raw)
}

pub fn sweep(loaded: &LoadedConfig, seed: u64) -> Result<Results, CliError> {
    let s = loaded
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::field("sweep", "section required by `sweep`"))?;
    if loaded.config.mediator.is_none() {
        return Err(CliError::field("mediator", "section required by `sweep`"));
    }
    let grid = sweep_grid(s.from, s.to, s.steps, s.scale);
    let key = s.parameter.rsplit('.').next().unwrap_or(&s.parameter);
    let unit = unit_from_key(key);
    let points: Vec<Result<Results, CliError>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let point = sweep_point_config(loaded, x)?;
            let c = &point.config;
            let m = c.mediator.as_ref().expect("checked above");
            let mut r = simulate_point(c, m, point_seed(seed, i), &c.outputs.quantities)?;
            let mut row = Row::default();
            row.num(s.parameter.clone(), unit, x);
            row.cells.append(&mut r.rows[0].cells);
            r.rows[0] = row;
            Ok(r)
        })
        .collect();
    let mut out = Results::default();
    for p in points {
        let mut p = p?;
        out.rows.append(&mut p.rows);
        out.unavailable.append(&mut p.unavailable);
        for n in p.notes {
            if !out.notes.contains(&n) {
                out.notes.push(n);
            }
        }
    }
    Ok(out)
}

/// One row per mediator, all sharing the same seed.
pub fn compare(c: &ScenarioConfig, seed: u64) -> Result<Results, CliError> {
    let list = &c
        .compare
        .as_ref()
        .ok_or_else(|| CliError::field("compare", "section required by `compare`"))?
        .mediators;
    if list.len() < 2 {
        return Err(CliError::field("compare.mediators", "list at least two mediators"));
    }
    let mut outputs = c.outputs.quantities.clone();
    outputs.extend([Output::Witness, Output::Negativity]);
    let s = point_seed(seed, 0);
    let rows: Vec<Result<Results, CliError>> = list
        .par_iter()
        .map(|m| simulate_point(c, m, s, &outputs))
        .collect();
    let mut out = Results::default();
    for (i, r) in rows.into_iter().enumerate() {
        let mut r = r?;
        let mut row = Row::default();
        row.num("index", "1", i as f64);
        row.cells.append(&mut r.rows[0].cells);
        out.rows.push(row);
        out.unavailable.append(&mut r.unavailable);
    }
    Ok(out)
}

pub fn discriminate(c: &ScenarioConfig) -> Result<Results, CliError> {
    let noise = c
        .noise_model()
        .ok_or_else(|| CliError::field("noise", "section required by `discriminate`"))?;
    let d = c
        .discriminate
        .as_ref()
        .ok_or_else(|| CliError::field("discriminate", "section required by `discriminate`"))?;
    let r = core_discriminate(&noise, d.total_time_s, d.gap).map_err(core_err("noise"))?;
    let mut row = Row::default();
    row.push("noise", "text", Cell::Text(noise.kind().to_string()));
    row.num("total_time_s", "s", d.total_time_s);
    row.num("visibility_plain", "1", r.plain);
    row.num("visibility_echo", "1", r.echo);
    row.num("visibility_recombined", "1", r.recombined);
    row.push("classification", "text", Cell::Text(r.classification.as_str().to_string()));
    Ok(Results {
        rows: vec![row],
        notes: vec![format!("recovery counts when visibility rises by more than {}", d.gap)],
        unavailable: vec![],
    })
}

pub fn plan(c: &ScenarioConfig) -> Result<Results, CliError> {
    let params = c.params();
    let (spec, note) = budget(c);
    let rep = core_plan(&params, &spec, &c.plan_options()).map_err(core_err("plan"))?;
    let mut res = Results::default();
    let mut row = Row::default();
    push_report(&rep, "", &mut row, &mut res);
    row.push("feasible", "bool", Cell::Bool(rep.all_passed()));
    res.rows.push(row);
    res.notes.extend(note);
    Ok(res)
}

/// The two-mass state of one run, for callers that need more than the row.
pub fn protocol_state(c: &ScenarioConfig, m: &MediatorSection, seed: u64) -> Result<ProbeState, CliError> {
    let params = c.params();
    let model = m.to_model(&params, seed)?;
    let phases = target_phases(c, &params)?;
    Ok(run_protocol_with_phases(&model, &params, phases)
        .map_err(core_err("mediator"))?
        .final_state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_endpoints() {
        assert_eq!(sweep_grid(0.0, 1.0, 2, Scale::Linear), vec![0.0, 1.0]);
        let g = sweep_grid(1e-3, 1e3, 7, Scale::Log);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1e3);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_seeds_differ_and_repeat() {
        assert_eq!(point_seed(5, 3), point_seed(5, 3));
        assert_ne!(point_seed(5, 3), point_seed(5, 4));
        assert_ne!(point_seed(5, 0), point_seed(6, 0));
    }

    #[test]
    fn units_follow_key_suffix() {
        assert_eq!(unit_from_key("mass_kg"), "kg");
        assert_eq!(unit_from_key("d2_m"), "m");
        assert_eq!(unit_from_key("velocity_m_per_s"), "m/s");
        assert_eq!(unit_from_key("omega_rad_per_s"), "rad/s");
        assert_eq!(unit_from_key("delta_phi_rad"), "rad");
        assert_eq!(unit_from_key("cutoff"), "1");
        assert_eq!(unit_from_key("hbar_j_s"), "J s");
    }

    #[test]
    fn set_path_requires_existing_numeric_key() {
        let mut t: toml::Table = toml::from_str("[a]\nx = 1.0\nn = 3\ns = \"q\"").unwrap();
        crate::config::set_path(&mut t, "a.x", 2.5).unwrap();
        assert_eq!(t["a"]["x"].as_float(), Some(2.5));
        crate::config::set_path(&mut t, "a.n", 4.4).unwrap();
        assert_eq!(t["a"]["n"].as_integer(), Some(4));
        assert!(crate::config::set_path(&mut t, "a.s", 1.0).is_err());
        assert!(crate::config::set_path(&mut t, "a.y", 1.0).is_err());
        assert!(crate::config::set_path(&mut t, "b.x", 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn grid_is_monotone_with_exact_endpoints(
            a in 1e-6f64..10.0, b in 1e-6f64..10.0, steps in 2usize..40, log in proptest::bool::ANY
        ) {
            let scale = if log { Scale::Log } else { Scale::Linear };
            let g = sweep_grid(a, b, steps, scale);
            proptest::prop_assert_eq!(g.len(), steps);
            proptest::prop_assert_eq!(g[0], a);
            proptest::prop_assert_eq!(g[steps - 1], b);
            let up = b >= a;
            let ordered = g.windows(2).all(|w| if up { w[1] >= w[0] } else { w[1] <= w[0] });
            proptest::prop_assert!(ordered);
        }
    }
}
