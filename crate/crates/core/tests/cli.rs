use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bvr_tactics::retreat::composite_cost;
use bvr_tactics::scenario_io::parse_scenario;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bvr"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_out(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_variant(dir: &Path, base: &str, from: &str, to: &str) -> PathBuf {
    let text = std::fs::read_to_string(scenario(base)).unwrap();
    assert!(text.contains(from));
    let p = dir.join(format!("variant-{base}"));
    std::fs::write(&p, text.replace(from, to)).unwrap();
    p
}

#[test]
fn solve_attack_reference() {
    let out = run(&["solve-attack", "--scenario", scenario("reference_attack.json").to_str().unwrap()]);
    let s = json_out(&out);
    assert_eq!(s["stage"], "attack");
    assert_eq!(s["mode"], "cooperative");
    assert_eq!(s["winner"], "red");
    assert!((s["value"].as_f64().unwrap() - 13.9870).abs() < 1e-3);
}

#[test]
fn solve_attack_symmetric_heads_straight() {
    let s = json_out(&run(&["solve-attack", "--scenario", scenario("symmetric_attack.json").to_str().unwrap()]));
    assert_eq!(s["headings"]["leader"].as_f64().unwrap(), 0.0);
    let r = &s["headings"]["interceptors"];
    assert_eq!(r[0].as_f64().unwrap(), -r[1].as_f64().unwrap());
}

#[test]
fn solve_attack_disjoint_regions_goes_solo() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_variant(dir.path(), "reference_attack.json", "[16.0, 6.5]", "[30.0, 30.0]");
    let s = json_out(&run(&["solve-attack", "--scenario", p.to_str().unwrap()]));
    assert_eq!(s["mode"], "solo1");
}

#[test]
fn blue_win_is_data_not_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_variant(dir.path(), "reference_attack.json", "\"rho_s\": 7.0", "\"rho_s\": 14.5");
    let s = json_out(&run(&["solve-attack", "--scenario", p.to_str().unwrap()]));
    assert_eq!(s["winner"], "blue");
}

#[test]
fn solve_retreat_chained_spawn() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "solve-retreat",
        "--scenario",
        scenario("reference_chained.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let s = json_out(&out);
    assert_eq!(s["constraint_active"], true);
    assert_eq!(s["bands"].as_array().unwrap().len(), 2);
    let theta = s["theta_star"].as_f64().unwrap();
    let upper = s["constraint"]["upper"].as_f64().unwrap();
    assert!((theta.rem_euclid(std::f64::consts::TAU) - upper).abs() < 1e-6);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(file, s);
}

#[test]
fn infeasible_retreat_exits_4_with_bands() {
    let out = run(&["solve-retreat", "--scenario", scenario("infeasible_retreat.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.matches("\"lower\"").count(), 2, "{err}");
}

#[test]
fn weight_override_moves_heading_to_grid_optimum() {
    let path = scenario("two_pair_retreat.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut headings = Vec::new();
    for w in ["0.25", "0.75"] {
        let s = json_out(&run(&["solve-retreat", "--scenario", path.to_str().unwrap(), "--w", w]));
        let theta = s["theta_star"].as_f64().unwrap();
        let value = s["value"].as_f64().unwrap();

        let mut file = parse_scenario(&text).unwrap();
        file.parameters.w = w.parse().unwrap();
        let scn = file.retreat_scenario();
        let n = 200_000;
        let best = (0..n)
            .filter_map(|k| {
                let th = -std::f64::consts::PI + std::f64::consts::TAU * k as f64 / n as f64;
                composite_cost(&scn, th).ok().map(|j| (j, th))
            })
            .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        assert!(value >= best.0 - 1e-7, "w = {w}: {value} vs grid {}", best.0);
        assert!((value - best.0).abs() < 1e-6);
        headings.push(theta);
    }
    // Each end of the weight range is one pair's own preference.
    let pref = |w: &str| {
        json_out(&run(&["solve-retreat", "--scenario", path.to_str().unwrap(), "--w", w]))["theta_star"]
            .as_f64()
            .unwrap()
    };
    let gap = |a: f64, b: f64| bvr_tactics::geometry::shortest_arc(a - b).abs();
    let (first, second) = (pref("1"), pref("0"));
    assert!(gap(headings[1], first) < gap(headings[0], first), "{headings:?} vs {first}");
    assert!(gap(headings[0], second) < gap(headings[1], second), "{headings:?} vs {second}");
}

#[test]
fn simulate_chained_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--scenario",
        scenario("simple_chained.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let s = json_out(&out);
    assert_eq!(s["stage"], "chained");
    assert_eq!(s["attack"]["simultaneous_block"], true);
    assert!((s["attack"]["distance_to_asset"].as_f64().unwrap() - 13.9870).abs() < 1e-3);
    assert_eq!(s["retreat"]["outcome"]["kind"], "intercepted");
    assert!(s["terminal_cost"].as_f64().unwrap() > 0.0);
    let events = std::fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert!(events.starts_with("t,event,subjects\n"));
    for kind in ["range_reached", "stage_transition", "missile_launch", "interception"] {
        assert!(events.contains(kind), "{events}");
    }
    let rows = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(rows.starts_with("t,agent,x,y,heading,speed\n"));
}

#[test]
fn simulate_stage_override_and_richardson() {
    let s = json_out(&run(&[
        "simulate",
        "--scenario",
        scenario("reference_chained.json").to_str().unwrap(),
        "--stage",
        "attack",
        "--richardson",
    ]));
    assert!(s["retreat"].is_null());
    let d = &s["diagnostics"];
    let j: Vec<f64> = d["terminal_cost"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    // First-order scheme: halving dt halves the error.
    let ratio = d["convergence_ratio"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    assert!((j[1] - j[2]).abs() < (j[0] - j[1]).abs());
}

#[test]
fn simulate_dt_override() {
    let s = json_out(&run(&[
        "simulate",
        "--scenario",
        scenario("reference_attack.json").to_str().unwrap(),
        "--dt",
        "0.01",
        "--replan-every",
        "2",
    ]));
    assert!((s["terminal_cost"].as_f64().unwrap() - 13.9870).abs() < 1e-2);
}

#[test]
fn input_errors_exit_2() {
    let out = run(&["solve-attack", "--scenario", "/definitely/missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/missing.json"));

    let dir = tempfile::tempdir().unwrap();
    let p = write_variant(dir.path(), "reference_attack.json", "\"beta\": 1.25", "\"beta\": 0.9");
    let out = run(&["solve-attack", "--scenario", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parameters.beta"));

    let out = run(&["simulate", "--scenario", scenario("reference_attack.json").to_str().unwrap(), "--dt", "-1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["solve-retreat", "--scenario", scenario("reference_attack.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["sweep", "--scenario", scenario("reference_attack.json").to_str().unwrap(), "--grid", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = run(&[
        "solve-attack",
        "--scenario",
        scenario("reference_attack.json").to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
}

fn sweep_table(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn one_point_sweep_matches_solve_attack() {
    let sc = scenario("reference_attack.json");
    let t = sweep_table(&["sweep", "--scenario", sc.to_str().unwrap(), "--grid", "rho_s=7"]);
    let s = json_out(&run(&["solve-attack", "--scenario", sc.to_str().unwrap()]));
    let mut r = csv::Reader::from_reader(t.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "cooperative");
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), s["value"].as_f64().unwrap());
    assert_eq!(&rows[0][3], "red");
}

#[test]
fn sweep_winner_flips_at_the_value() {
    let sc = scenario("reference_attack.json");
    let t = sweep_table(&["sweep", "--scenario", sc.to_str().unwrap(), "--grid", "rho_s=13.98,13.986,13.988,14"]);
    let winners: Vec<String> = csv::Reader::from_reader(t.as_bytes())
        .records()
        .map(|r| r.unwrap()[3].to_string())
        .collect();
    assert_eq!(winners, ["red", "red", "blue", "blue"]);
}

#[test]
fn sweep_is_deterministic_and_records_failures() {
    let sc = scenario("reference_chained.json");
    let args = [
        "sweep",
        "--scenario",
        sc.to_str().unwrap(),
        "--grid",
        "beta=0.9,1.2,1.25;w=0.25:0.75:3",
    ];
    let a = sweep_table(&args);
    assert_eq!(a, sweep_table(&args));
    let rows: Vec<csv::StringRecord> = csv::Reader::from_reader(a.as_bytes()).records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(&rows[0][0], "0.9");
    assert!(rows[0][7].contains("exit 2"));
    assert!(rows[8][7].is_empty());
    assert!(!rows[8][5].is_empty(), "theta_star reported for chained rows");

    let sampled = ["sweep", "--scenario", sc.to_str().unwrap(), "--grid", "rho=4:5:2", "--samples", "5", "--seed", "3"];
    assert_eq!(sweep_table(&sampled), sweep_table(&sampled));
}
