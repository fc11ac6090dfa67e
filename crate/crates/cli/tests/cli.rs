mod support;

use std::f64::consts::LN_2;
use std::fs;

use support::*;

fn scenario(name: &str) -> String {
    scenario_dir().join(format!("{name}.json")).to_string_lossy().into_owned()
}

#[test]
fn bundled_reports_match_goldens() {
    let problems = check_goldens();
    assert!(problems.is_empty(), "{problems:#?}");
}

#[test]
fn erasure_reports_landauer_bound() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_scenario(scenario("erasure_bit").as_ref(), "landauer", dir.path(), &[]);
    assert_eq!(code, 0);
    let r = report_json(&text);
    let bound = r["outputs"]["bound"].as_f64().unwrap();
    assert!((bound - LN_2).abs() <= 1e-12);
    assert!(r["outputs"]["average_delta_e"].as_f64().unwrap() >= bound - 1e-9);
    assert_eq!(r["outputs"]["mode"], "unconditional");

    let (code, text) = run_scenario(scenario("erasure_bit_conditional").as_ref(), "landauer", dir.path(), &[]);
    assert_eq!(code, 0);
    let r = report_json(&text);
    assert!(r["outputs"]["bound"].as_f64().unwrap().abs() <= 1e-9);
    assert!(r["outputs"]["average_delta_e"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn units_flag_converts_entropic_outputs_only() {
    let dir = tempfile::tempdir().unwrap();
    let (_, nats) = run_scenario(scenario("erasure_bit").as_ref(), "landauer", dir.path(), &[]);
    let (code, bits) = run_scenario(scenario("erasure_bit").as_ref(), "landauer", dir.path(), &["--units", "bits"]);
    assert_eq!(code, 0);
    let (nats, bits) = (report_json(&nats), report_json(&bits));
    assert_eq!(nats["units"], "nats");
    assert_eq!(bits["units"], "bits");
    assert!((nats["outputs"]["erased_information"].as_f64().unwrap() - LN_2).abs() < 1e-15);
    assert_eq!(bits["outputs"]["erased_information"].as_f64().unwrap(), 1.0);
    assert_eq!(nats["outputs"]["bound"], bits["outputs"]["bound"]);
}

#[test]
fn dephasing_trajectory_decays_exponentially() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_scenario(scenario("dephasing").as_ref(), "gksl-evolve", dir.path(), &[]);
    assert_eq!(code, 0);
    let (header, rows) = read_csv(&dir.path().join("dephasing.trajectory.csv"));
    assert_eq!(header[..3], ["t", "re_0_0", "im_0_0"]);
    let col = header.iter().position(|h| h == "re_0_1").unwrap();
    assert_eq!(rows.len(), 20);
    let kappa = 0.5;
    for row in rows {
        let expected = 0.5 * (-2.0 * kappa * row[0]).exp();
        assert!((row[col] - expected).abs() <= 1e-6 * expected, "{row:?}");
    }
}

#[test]
fn adiabatic_sweep_hits_closed_form_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_scenario(scenario("adiabatic").as_ref(), "adiabatic-sweep", dir.path(), &[]);
    assert_eq!(code, 0);
    let r = report_json(&text);
    let opt = r["outputs"]["optimal_t_tr"].as_f64().unwrap();
    let min = r["outputs"]["min_e_diss"].as_f64().unwrap();
    assert!((opt - 1.0).abs() < 1e-12 && (min - 0.02).abs() < 1e-12);
    let (header, rows) = read_csv(&dir.path().join("adiabatic.sweep.csv"));
    assert_eq!(header, ["t_tr", "e_sw", "e_lk", "e_diss"]);
    let best = rows.iter().min_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
    assert!((best[0] - opt).abs() <= 1e-9 && (best[3] - min).abs() <= 1e-12);
    for row in &rows {
        assert_eq!(row[3], row[1] + row[2]);
    }
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = revtherm(&["classify", "--scenario", &scenario("cnot_classify"), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let r = report_json(&fs::read_to_string(out).unwrap());
    assert_eq!(r["outputs"]["reversible"], true);
    assert_eq!(r["checks"]["generalized_theorem"], true);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let missing = dir.path().join("absent.json");
    assert_eq!(code(&revtherm(&["landauer", "--scenario", missing.to_str().unwrap()])), 1);

    let truncated = write("truncated.json", r#"{"task": "landauer", "payload": {"#);
    assert_eq!(code(&revtherm(&["landauer", "--scenario", &truncated])), 2);

    let odd = write(
        "odd.json",
        r#"{"task": "entropy-decompose", "payload": {"state": [[[1, 0], [0, 0, 0]], [[0, 0], [0, 0]]], "blocks": [[0], [1]]}}"#,
    );
    let o = revtherm(&["entropy-decompose", "--scenario", &odd]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("payload.state[0][1]"));

    let erasure = scenario("erasure_bit");
    assert_eq!(code(&revtherm(&["landauer", "--scenario", &erasure, "--units", "furlongs"])), 3);
    assert_eq!(code(&revtherm(&["classify", "--scenario", &erasure])), 3);
    assert_eq!(code(&revtherm(&["frobnicate", "--scenario", &erasure])), 3);
    assert_eq!(code(&revtherm(&["landauer", "--scenario", &erasure, "--tol", "-1"])), 3);

    let not_a_state = write(
        "negative.json",
        r#"{"task": "entropy-decompose", "payload": {"state": [[[2, 0], [0, 0]], [[0, 0], [-1, 0]]], "blocks": [[0], [1]]}}"#,
    );
    let o = revtherm(&["entropy-decompose", "--scenario", &not_a_state]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("payload.state"));

    let o = revtherm(&["cto-check", "--scenario", &scenario("cto_cycle")]);
    assert_eq!(code(&o), 4);
    assert_eq!(report_json(&String::from_utf8(o.stdout).unwrap())["passed"], false);

    let overflow = write(
        "overflow.json",
        r#"{"task": "gksl-evolve", "payload": {"generator": {"hamiltonian": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]],
            "jumps": [{"operator": [[[0, 0], [1e200, 0]], [[0, 0], [0, 0]]], "rate": 1}]},
            "rho0": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]], "t_max": 1, "n_points": 3}}"#,
    );
    let o = revtherm(&["gksl-evolve", "--scenario", &overflow]);
    assert_eq!(code(&o), 5);
    assert!(o.stdout.is_empty());
}

#[test]
fn batch_writes_each_report_and_reports_worst_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let paths: Vec<String> = ["erasure_bit", "dephasing", "adiabatic", "cto_cycle"].iter().map(|n| scenario(n)).collect();
    let mut args = vec!["batch"];
    for p in &paths {
        args.extend(["--scenario", p.as_str()]);
    }
    args.extend(["--out", out.to_str().unwrap()]);
    let o = revtherm(&args);
    assert_eq!(code(&o), 4);
    for name in ["erasure_bit", "dephasing", "adiabatic", "cto_cycle"] {
        let report = fs::read_to_string(out.join(format!("{name}.report.json"))).unwrap();
        let golden = fs::read_to_string(golden_dir().join(format!("{name}.report.json"))).unwrap();
        assert_eq!(report, golden);
    }
    assert!(out.join("dephasing.trajectory.csv").exists());
    assert!(out.join("adiabatic.sweep.csv").exists());

    let dup = scenario("dephasing");
    let o = revtherm(&["batch", "--scenario", &dup, "--scenario", &dup, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let o = revtherm(&["batch", "--scenario", &dup]);
    assert_eq!(code(&o), 3);
}
