//! End-to-end behaviour of the scenario runner and the `gie` binary.

use std::path::Path;
use std::process::Command;

use gie_cli::config::{parse, LoadedConfig};
use gie_cli::report::{validate_report, Cell, Results};
use gie_cli::run::{compare, discriminate, plan, point_seed, simulate, sweep, sweep_point_config};
use gie_core::interferometer::{ExperimentParams, PhasePair};
use gie_core::linalg::C64;
use gie_core::mediator::{run_protocol_with_phases, MediatorModel};
use gie_core::qstate::negativity;

const HEAD: &str = r#"
schema_version = 1
seed = 11

[experiment]
mass_kg = 1e-14
d1_m = 2.5e-4
d2_m = 2e-4
dt_s = 2.5
"#;

fn load(body: &str) -> LoadedConfig {
    parse(&format!("{HEAD}{body}")).unwrap()
}

fn num(r: &Results, row: usize, name: &str) -> f64 {
    r.rows[row].number(name).unwrap_or_else(|| panic!("no numeric `{name}`"))
}

fn flag(r: &Results, row: usize, name: &str) -> bool {
    match r.rows[row].get(name) {
        Some(Cell::Bool(b)) => *b,
        other => panic!("`{name}` is {other:?}"),
    }
}

#[test]
fn mean_field_report_has_zero_negativity() {
    let c = load("[mediator]\nkind = \"mean_field\"\n");
    let r = simulate(&c.config, c.config.seed).unwrap();
    assert!(num(&r, 0, "negativity").abs() < 1e-12);
    assert!(flag(&r, 0, "ppt"));
    assert!(r.unavailable.is_empty());
}

#[test]
fn gate_model_report_equals_in_process_result() {
    let c = load(
        r#"
[phases]
phi1_rad = 6.283185307179586
delta_phi_rad = 3.141592653589793

[mediator]
kind = "gate_model"
alpha_re = 3.0
w_rad = 0.3
cutoff = 60

[outputs]
quantities = ["witness", "negativity"]
"#,
    );
    let r = simulate(&c.config, 0).unwrap();
    let model = MediatorModel::GateModel {
        alpha: C64::new(3.0, 0.0),
        w: 0.3,
        cutoff: 60,
        inelasticity: 0.0,
    };
    let params = ExperimentParams::new(1e-14, 2.5e-4, 2e-4, 2.5);
    let direct = run_protocol_with_phases(&model, &params, PhasePair::new(std::f64::consts::TAU, std::f64::consts::PI)).unwrap();
    let rho = direct.two_mass().unwrap();
    let want_n = negativity(rho, &[gie_core::interferometer::MASS_1]).unwrap();
    let want_w = gie_core::interferometer::witness_expectation(rho).unwrap();
    assert!((num(&r, 0, "negativity") - want_n).abs() < 1e-12);
    assert!((num(&r, 0, "witness") - want_w).abs() < 1e-12);
    assert!(want_n > 0.3, "gate model still entangles strongly: {want_n}");
}

#[test]
fn hybrid_ensemble_marks_qubit_outputs_unavailable() {
    let c = load(
        "[mediator]\nkind = \"hybrid_ensemble\"\ng1 = 1.0\ng2 = 1.0\nduration = 1.0\n\n[outputs]\nquantities = [\"negativity\", \"log_negativity\", \"witness\"]\n",
    );
    let r = simulate(&c.config, 0).unwrap();
    let missing: Vec<&str> = r.unavailable.iter().map(|u| u.output.as_str()).collect();
    assert_eq!(missing, vec!["witness", "negativity"]);
    assert!(r.unavailable.iter().all(|u| !u.reason.is_empty()));
    assert!(num(&r, 0, "log_negativity").abs() < 1e-10);
    assert_eq!(r.rows[0].get("negativity"), Some(&Cell::Missing));
}

#[test]
fn every_requested_output_is_present_or_explained() {
    let c = load(
        "[mediator]\nkind = \"ideal\"\n\n[outputs]\nquantities = [\"phases\", \"probabilities\", \"witness\", \"negativity\", \"log_negativity\", \"entropy\", \"decay\", \"correlations\", \"report\"]\n",
    );
    let r = simulate(&c.config, 0).unwrap();
    for col in ["phi1_rad", "p_00", "witness", "negativity", "log_negativity", "entropy_mass1_bits", "zx_00", "plan_delta_phi"] {
        assert!(r.rows[0].get(col).is_some(), "{col}");
    }
    // no [decoherence] section
    assert_eq!(r.unavailable.len(), 1);
    assert_eq!(r.unavailable[0].output, "decay");
    let p: f64 = ["p_00", "p_01", "p_10", "p_11"].iter().map(|n| num(&r, 0, n)).sum();
    assert!((p - 1.0).abs() < 1e-12);
}

const COMPARE_QUANTUM: &str = r#"
[phases]
phi1_rad = 0.0
delta_phi_rad = 1.5707963267948966

[[compare.mediators]]
kind = "gate_model"
alpha_re = 3.0
w_rad = 0.3

[[compare.mediators]]
kind = "mean_field"

[[compare.mediators]]
kind = "measured_channel"
rounds = 4
"#;

#[test]
fn compare_finds_exactly_one_entangling_mediator() {
    let c = load(COMPARE_QUANTUM);
    let r = compare(&c.config, 3).unwrap();
    assert_eq!(r.rows.len(), 3);
    let entangled: Vec<usize> = (0..3).filter(|&i| num(&r, i, "negativity") > 1e-3).collect();
    assert_eq!(entangled, vec![0]);
    for i in 1..3 {
        assert!(flag(&r, i, "classical") && flag(&r, i, "ppt"));
    }
}

#[test]
fn compare_classical_rows_are_ppt_and_duplicates_agree() {
    let c = load(
        r#"
[[compare.mediators]]
kind = "classical_dephasing"
sigma_rad = 1.2
samples = 40

[[compare.mediators]]
kind = "collapse"
rate_per_s = 2.0

[[compare.mediators]]
kind = "classical_dephasing"
sigma_rad = 1.2
samples = 40
"#,
    );
    let r = compare(&c.config, 9).unwrap();
    assert!((0..3).all(|i| flag(&r, i, "ppt")));
    let strip = |i: usize| r.rows[i].cells.iter().skip(1).cloned().collect::<Vec<_>>();
    assert_eq!(strip(0), strip(2));
}

#[test]
fn compare_needs_two_mediators() {
    let text = format!("{HEAD}\n[[compare.mediators]]\nkind = \"ideal\"\n");
    assert!(matches!(parse(&text), Err(gie_cli::CliError::Config(_))));
}

const SWEEP_DELTA: &str = r#"
[phases]
phi1_rad = 0.0
delta_phi_rad = 0.0

[mediator]
kind = "ideal"

[sweep]
parameter = "phases.delta_phi_rad"
from = 0.0
to = 3.141592653589793
steps = 25

[outputs]
quantities = ["negativity"]
"#;

#[test]
fn delta_phi_sweep_rises_monotonically_to_one_half() {
    let c = load(SWEEP_DELTA);
    let r = sweep(&c, 0).unwrap();
    assert_eq!(r.rows.len(), 25);
    let n: Vec<f64> = (0..25).map(|i| num(&r, i, "negativity")).collect();
    assert!(n[0].abs() < 1e-12);
    assert!((n[24] - 0.5).abs() < 1e-12);
    assert!(n.windows(2).all(|w| w[1] > w[0]));
    // brute force: N = |sin(Δφ/2)|/2 for the branch state
    for i in 0..25 {
        let x = num(&r, i, "phases.delta_phi_rad");
        assert!((n[i] - 0.5 * (x / 2.0).sin().abs()).abs() < 1e-12);
    }
}

#[test]
fn d2_sweep_traces_the_same_curve_in_the_entangling_phase() {
    let c = load(
        r#"
[mediator]
kind = "ideal"

[sweep]
parameter = "experiment.d2_m"
from = 1.25e-4
to = 3.6e-5
steps = 12

[outputs]
quantities = ["phases", "negativity"]
"#,
    );
    let r = sweep(&c, 0).unwrap();
    for i in 0..12 {
        let e = num(&r, i, "entangling_phase_rad");
        assert!((num(&r, i, "negativity") - 0.5 * (e / 2.0).sin().abs()).abs() < 1e-12);
    }
    // d2 = d1/2 doubles the d1 phase, so the entangling phase starts at zero
    assert!(num(&r, 0, "entangling_phase_rad").abs() < 1e-9);
}

#[test]
fn two_step_sweep_returns_the_endpoints() {
    let c = load(&SWEEP_DELTA.replace("steps = 25", "steps = 2"));
    let r = sweep(&c, 0).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert_eq!(num(&r, 0, "phases.delta_phi_rad"), 0.0);
    assert_eq!(num(&r, 1, "phases.delta_phi_rad"), std::f64::consts::PI);
}

#[test]
fn sweep_points_equal_single_runs() {
    let c = load(
        r#"
[mediator]
kind = "classical_dephasing"
sigma_rad = 0.5
samples = 30

[sweep]
parameter = "experiment.d2_m"
from = 1e-4
to = 2e-4
steps = 5

[outputs]
quantities = ["witness", "negativity", "entropy", "correlations"]
"#,
    );
    let r = sweep(&c, 21).unwrap();
    let s = c.config.sweep.as_ref().unwrap();
    let grid = gie_cli::run::sweep_grid(s.from, s.to, s.steps, s.scale);
    for (i, x) in grid.iter().enumerate() {
        let point = sweep_point_config(&c, *x).unwrap();
        let m = point.config.mediator.as_ref().unwrap();
        let single = gie_cli::run::simulate_point(&point.config, m, point_seed(21, i), &point.config.outputs.quantities).unwrap();
        for (name, _, cell) in &single.rows[0].cells {
            match (cell, r.rows[i].get(name)) {
                (Cell::Num(a), Some(Cell::Num(b))) => assert!((a - b).abs() < 1e-12, "{name}"),
                (a, b) => assert_eq!(Some(a), b, "{name}"),
            }
        }
    }
}

#[test]
fn discrimination_configs_are_classified() {
    let cases = [
        (
            "[noise]\nkind = \"classical_dephasing\"\nrate_a_rad_per_s = 3.0\nrate_b_rad_per_s = 1.0\nspread_rad_per_s = 2.0\n\n[discriminate]\ntotal_time_s = 2.0\n",
            "dephasing",
        ),
        (
            "[noise]\nkind = \"collapse\"\nrate_per_s = 1.0\n\n[discriminate]\ntotal_time_s = 2.0\n",
            "collapse",
        ),
        (
            "[decoherence]\ncutoff_omega_rad_per_s = 2000.0\nwave_speed_m_per_s = 1.0\ncoupling = { kind = \"constant\", g_rad_per_s = 1.0 }\ndensity = { kind = \"free_space\", prefactor = 1e-4 }\n\n[noise]\nkind = \"entangling_field\"\nrecombination = true\n\n[discriminate]\ntotal_time_s = 1.0\n",
            "false decoherence",
        ),
    ];
    for (body, want) in cases {
        let c = load(body);
        let r = discriminate(&c.config).unwrap();
        assert_eq!(r.rows[0].get("classification"), Some(&Cell::Text(want.into())));
    }
}

#[test]
fn plan_reports_flags_and_values() {
    // d2 = 2e-4 m: delta_phi = 0.158 rad, below pi (1 - 0.9)
    let c = load("[plan]\nslack = 0.9\n");
    let r = plan(&c.config).unwrap();
    assert!(!flag(&r, 0, "phase_ok"));
    assert!(flag(&r, 0, "decoherence_ok"));
    assert!(!flag(&r, 0, "feasible"));
    assert!((num(&r, 0, "phase_d1") - 0.632891937).abs() < 1e-8);
    assert!(r.notes.iter().any(|n| n.contains("field decoherence budget taken as zero")));
    let c = parse(&format!("{}[plan]\nslack = 0.9\n", HEAD.replace("d2_m = 2e-4", "d2_m = 1.25e-4"))).unwrap();
    let r = plan(&c.config).unwrap();
    assert!((num(&r, 0, "delta_phi") - 0.632891937).abs() < 1e-8);
    assert!(flag(&r, 0, "feasible"));
}

fn gie(args: &[&str], env: &[(&str, &Path)]) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gie"));
    cmd.args(args).env_remove("GIE_OUT_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, format!("{HEAD}{body}")).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn binary_writes_default_files_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let cfg = write(dir.path(), "mf.toml", "[mediator]\nkind = \"mean_field\"\n");
    let o = gie(&["simulate", &cfg, "--format", "both", "--quiet"], &[("GIE_OUT_DIR", &out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(out.join("mf-simulate.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    validate_report(&v).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["command"], "simulate");
    assert_eq!(v["config"]["experiment"]["mass_kg"], 1e-14);
    assert!(v["constants"].as_array().unwrap().iter().any(|c| c["name"] == "G"));
    let csv = std::fs::read_to_string(out.join("mf-simulate.csv")).unwrap();
    assert!(csv.starts_with("mediator [text],classical [bool],phi1_rad [rad]"));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[mediator]\nkind = \"ideal\"\n");
    let text = std::fs::read_to_string(&bad).unwrap().replace("mass_kg = 1e-14", "mass_kg = -1.0");
    std::fs::write(&bad, text).unwrap();
    let o = gie(&["simulate", &bad, "--out", "-"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment.mass_kg"));

    let trunc = write(
        dir.path(),
        "trunc.toml",
        "[mediator]\nkind = \"gate_model\"\nalpha_re = 6.0\nw_rad = 0.5\ncutoff = 20\n",
    );
    let o = gie(&["simulate", &trunc, "--out", "-"], &[]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));

    let ambiguous = write(
        dir.path(),
        "amb.toml",
        "[noise]\nkind = \"classical_dephasing\"\nrate_a_rad_per_s = 0.0\nrate_b_rad_per_s = 0.0\nspread_rad_per_s = 0.285\n\n[discriminate]\ntotal_time_s = 2.0\n",
    );
    let o = gie(&["discriminate", &ambiguous, "--out", "-"], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let o = gie(&["check", dir.path().join("missing.toml").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));

    let o = gie(&["check", &trunc], &[]);
    assert!(o.status.success());
}

#[test]
fn shipped_configs_pass_check() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let o = gie(&["check", p.to_str().unwrap(), "--quiet"], &[]);
            assert!(o.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn unused_mediator_sections_do_not_block_other_commands() {
    let c = load("[mediator]\nkind = \"ideal\"\n");
    assert!(matches!(
        gie_cli::run::discriminate(&c.config),
        Err(gie_cli::CliError::Config(ref e)) if e[0].field == "noise"
    ));
}

/// Replays the checked-in fuzz seeds through the same entry points as the
/// fuzz targets.
#[test]
fn fuzz_corpus_seeds_do_not_panic() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let seeds = |target: &str| -> Vec<String> {
        std::fs::read_dir(corpus.join(target))
            .unwrap()
            .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
            .collect()
    };
    let mut accepted = 0;
    for s in seeds("config_parse") {
        if let Ok(loaded) = parse(&s) {
            accepted += 1;
            if let Some(sw) = &loaded.config.sweep {
                sweep_point_config(&loaded, sw.to).unwrap();
            }
        }
    }
    assert!(accepted >= 5);
    let mut valid = 0;
    for s in seeds("report_validate") {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&s) {
            valid += validate_report(&v).is_ok() as usize;
        }
    }
    assert_eq!(valid, 2);
    for s in seeds("sweep_path") {
        let (path, body) = s.split_once('\n').unwrap_or((&s, ""));
        if let Ok(mut t) = toml::from_str::<toml::Table>(body) {
            let _ = gie_cli::config::set_path(&mut t, path, 1.5);
        }
    }
}
