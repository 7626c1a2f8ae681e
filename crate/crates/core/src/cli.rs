//! `bvr` command line: solve-attack, solve-retreat, simulate, sweep.
//!
//! Exit codes: 0 success (whoever wins), 2 invalid input or missing file,
//! 3 solver failure, 4 empty feasible heading set, 5 output I/O failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::attack::{select_strategy, AttackError};
use crate::retreat::{optimize_heading, PairingMode, RetreatError, RetreatScenario};
use crate::scenario_io::{
    attack_summary, band_json, fmt_sig, parse_scenario, round_sig, retreat_summary, simulation_summary, write_trajectory,
    ScenarioError, ScenarioFile, Stage,
};
use crate::sim::{
    analytic_attack_terminal, run_attack_stage, run_chained, run_retreat_stage, spawn_retreat, RetreatStageSetup,
    SimError, TrajectoryLog,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "bvr", version, about = "Two-on-two beyond-visual-range engagement games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the attack game at the initial positions.
    SolveAttack(Common),
    /// Solve the retreat game; chained scenarios spawn it from the analytic attack solution.
    SolveRetreat(Common),
    /// Run the closed-loop simulation and write trajectories.
    Simulate(SimulateArgs),
    /// Evaluate a scenario over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Directory for summary.json and other outputs.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Weight of the first missile pair.
    #[arg(long)]
    w: Option<f64>,
    #[arg(long, value_parser = parse_pairing)]
    pairing: Option<PairingMode>,
}

#[derive(Debug, Args)]
struct SimOverrides {
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    capture_eps: Option<f64>,
    #[arg(long)]
    replan_every: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: SimOverrides,
    #[arg(long, value_enum)]
    stage: Option<Stage>,
    /// Repeat at dt/2 and dt/4 and report the observed convergence.
    #[arg(long)]
    richardson: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: SimOverrides,
    /// Axes separated by `;`: `name=v1,v2,...` or `name=start:stop:count`.
    /// Names: beta, alpha, rho, rho_s, w, leader_speed, retreat_speed, <id>.x, <id>.y.
    #[arg(long, value_name = "SPEC")]
    grid: String,
    /// Draw this many random points inside the grid ranges instead of the full product.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulate each point instead of solving it analytically.
    #[arg(long)]
    simulate: bool,
    #[arg(long, value_enum)]
    stage: Option<Stage>,
}

fn parse_pairing(s: &str) -> Result<PairingMode, String> {
    match s {
        "index" => Ok(PairingMode::Index),
        "best" => Ok(PairingMode::Best),
        _ => Err(format!("expected index or best, got {s:?}")),
    }
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Solver(String),
    Infeasible { message: String, bands: Value },
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Infeasible { .. } => EXIT_INFEASIBLE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Solver(m) | CliError::Io(m) => f.write_str(m),
            CliError::Infeasible { message, bands } => {
                write!(f, "{message}\nfeasible bands: {}", serde_json::to_string_pretty(bands).unwrap())
            }
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::InvalidScenario(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<RetreatError> for CliError {
    fn from(e: RetreatError) -> Self {
        match &e {
            RetreatError::EmptyFeasibleSet { bands, .. } => CliError::Infeasible {
                message: e.to_string(),
                bands: json!(bands
                    .iter()
                    .map(|b| b.as_ref().map(band_json).unwrap_or(Value::Null))
                    .collect::<Vec<_>>()),
            },
            RetreatError::NoFeasibleHeading => CliError::Infeasible {
                message: e.to_string(),
                bands: json!([]),
            },
            RetreatError::InvalidScenario(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::SolverFailure { snapshot, .. } => {
                let state: Vec<String> = snapshot
                    .iter()
                    .map(|(id, p)| format!("{id}=({}, {})", fmt_sig(p.x), fmt_sig(p.y)))
                    .collect();
                CliError::Solver(format!("{e}\nstate: {}", state.join(" ")))
            }
            SimError::EmptyFeasibleSet(m) => CliError::Infeasible {
                message: "no feasible retreat heading".into(),
                bands: json!(m),
            },
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

/// Entry point used by the `bvr` binary. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn execute(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::SolveAttack(c) => {
            let file = load(&c, None)?;
            let summary = solve_attack(&file)?;
            emit(&c.out, &summary)
        }
        Command::SolveRetreat(c) => {
            let file = load(&c, None)?;
            let summary = solve_retreat(&file)?;
            emit(&c.out, &summary)
        }
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn load(c: &Common, sim: Option<&SimOverrides>) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(&c.scenario)
        .map_err(|e| CliError::Invalid(format!("{}: cannot read scenario: {e}", c.scenario.display())))?;
    let mut file = parse_scenario(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", c.scenario.display())))?;
    if let Some(w) = c.w {
        file.parameters.w = w;
    }
    if let Some(p) = c.pairing {
        file.parameters.pairing = p;
    }
    if let Some(s) = sim {
        if let Some(dt) = s.dt {
            file.sim.dt = dt;
        }
        if let Some(e) = s.capture_eps {
            file.sim.capture_eps = e;
        }
        if let Some(n) = s.replan_every {
            file.sim.replan_every = n;
        }
    }
    revalidate(&file)?;
    Ok(file)
}

fn revalidate(file: &ScenarioFile) -> Result<(), CliError> {
    let d = file.validate();
    if d.is_empty() {
        Ok(())
    } else {
        Err(ScenarioError::Validation(d).into())
    }
}

fn emit(out: &Option<PathBuf>, summary: &Value) -> Result<String, CliError> {
    let text = serde_json::to_string_pretty(summary).unwrap() + "\n";
    if let Some(dir) = out {
        write_file(dir, "summary.json", text.as_bytes())?;
    }
    Ok(text)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), bytes).map_err(io)
}

pub fn solve_attack(file: &ScenarioFile) -> Result<Value, CliError> {
    if file.stage == Stage::Retreat {
        return Err(CliError::Invalid("solve-attack needs an attack or chained scenario".into()));
    }
    Ok(attack_summary(&select_strategy(&file.attack_scenario())?))
}

/// Retreat game of the scenario; for a chained scenario the attack stage is
/// replaced by its closed-form outcome.
pub fn retreat_game(file: &ScenarioFile) -> Result<(RetreatScenario, Option<Value>), CliError> {
    match file.stage {
        Stage::Retreat => Ok((file.retreat_scenario(), None)),
        Stage::Attack => Err(CliError::Invalid("solve-retreat needs a retreat or chained scenario".into())),
        Stage::Chained => {
            let setup = file.attack_setup();
            let terminal = analytic_attack_terminal(&setup)?;
            let attack = terminal.initial_solution.as_ref().map(attack_summary);
            let wingman = terminal.wingman.expect("chained scenarios have a wingman").position;
            let scn = spawn_retreat(&terminal, wingman, &file.retreat_spawn()).map_err(|e| match e {
                SimError::WrongTermination => {
                    CliError::Invalid("the leader reaches the engagement zone; there is no retreat stage".into())
                }
                e => e.into(),
            })?;
            Ok((scn, attack))
        }
    }
}

pub fn solve_retreat(file: &ScenarioFile) -> Result<Value, CliError> {
    let (scn, attack) = retreat_game(file)?;
    let opt = optimize_heading(&scn)?;
    let mut summary = retreat_summary(&scn, &opt);
    if let Some(a) = attack {
        summary["attack"] = a;
    }
    Ok(summary)
}

struct SimRun {
    log: TrajectoryLog,
    summary: Value,
}

fn simulate_once(file: &ScenarioFile, stage: Stage) -> Result<SimRun, CliError> {
    match (file.stage, stage) {
        (Stage::Retreat, Stage::Retreat) => {
            let (log, r) = run_retreat_stage(&file.retreat_stage_setup(), &file.sim)?;
            let summary = simulation_summary(stage, None, Some(&r), &log);
            Ok(SimRun { log, summary })
        }
        (Stage::Retreat, _) => Err(CliError::Invalid(format!(
            "a retreat scenario cannot run the {} stage",
            stage.as_str()
        ))),
        (_, Stage::Attack) => {
            let (log, a) = run_attack_stage(&file.attack_setup(), &file.sim)?;
            let summary = simulation_summary(stage, Some(&a), None, &log);
            Ok(SimRun { log, summary })
        }
        (Stage::Attack, _) => Err(CliError::Invalid(format!(
            "an attack scenario has no {} stage",
            stage.as_str()
        ))),
        (Stage::Chained, Stage::Chained) => {
            let (log, out) = run_chained(&file.attack_setup(), &file.retreat_spawn(), &file.sim)?;
            let summary = simulation_summary(stage, Some(&out.attack), out.retreat.as_ref(), &log);
            Ok(SimRun { log, summary })
        }
        (Stage::Chained, Stage::Retreat) => {
            // Retreat alone, spawned from the closed-form attack outcome.
            let setup = file.attack_setup();
            let terminal = analytic_attack_terminal(&setup)?;
            let (scn, _) = retreat_game(file)?;
            let spawn = file.retreat_spawn();
            let mut leader = terminal.leader;
            if let Some(k) = spawn.leader_kind {
                leader.kind = k;
            }
            let stage_setup = RetreatStageSetup {
                pair_ids: scn
                    .pairs
                    .iter()
                    .map(|p| {
                        let i = terminal.interceptors.iter().position(|r| r.position == p.attacker).unwrap_or(0);
                        (format!("A{}", i + 1), format!("D{}", i + 1))
                    })
                    .collect(),
                scenario: scn,
                leader,
                retreat_speed: spawn.retreat_speed,
                missile_speed: spawn.missile_speed,
                missile_kind: spawn.missile_kind,
                t0: terminal.time,
                leader_id: setup.ids.leader.clone(),
            };
            let (log, r) = run_retreat_stage(&stage_setup, &file.sim)?;
            let summary = simulation_summary(stage, None, Some(&r), &log);
            Ok(SimRun { log, summary })
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<String, CliError> {
    let file = load(&a.common, Some(&a.sim))?;
    let stage = a.stage.unwrap_or(file.stage);
    let run = simulate_once(&file, stage)?;
    let mut summary = run.summary;
    if a.richardson {
        summary["diagnostics"] = richardson(&file, stage, &summary)?;
    }
    if let Some(dir) = &a.common.out {
        let (mut rows, mut events) = (Vec::new(), Vec::new());
        write_trajectory(&run.log, &mut rows, &mut events).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(dir, "trajectory.csv", &rows)?;
        write_file(dir, "events.csv", &events)?;
    }
    emit(&a.common.out, &summary)
}

fn richardson(file: &ScenarioFile, stage: Stage, base: &Value) -> Result<Value, CliError> {
    let mut dts = vec![file.sim.dt];
    let mut costs = vec![base["terminal_cost"].as_f64()];
    for k in [2.0, 4.0] {
        let mut f = file.clone();
        f.sim.dt = file.sim.dt / k;
        dts.push(f.sim.dt);
        costs.push(simulate_once(&f, stage)?.summary["terminal_cost"].as_f64());
    }
    let (ratio, extrapolated) = match costs.as_slice() {
        [Some(a), Some(b), Some(c)] => {
            let ratio = if b != c { Some((a - b) / (b - c)) } else { None };
            (ratio, Some(2.0 * c - b))
        }
        _ => (None, None),
    };
    Ok(json!({
        "dt": dts,
        "terminal_cost": costs,
        "convergence_ratio": ratio.map(round_sig),
        "extrapolated": extrapolated.map(round_sig),
    }))
}

#[derive(Debug, Clone, PartialEq)]
enum Axis {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Axis {
    fn values(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Range { start, stop, count } => {
                if *count == 1 {
                    return vec![*start];
                }
                (0..*count)
                    .map(|i| start + (stop - start) * i as f64 / (*count - 1) as f64)
                    .collect()
            }
        }
    }

    fn sample(&self, rng: &mut StdRng) -> f64 {
        match self {
            Axis::List(v) => v[rng.random_range(0..v.len())],
            Axis::Range { start, stop, .. } => {
                if start == stop {
                    *start
                } else {
                    rng.random_range(start.min(*stop)..=start.max(*stop))
                }
            }
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<(String, Axis)>, CliError> {
    let bad = |m: String| CliError::Invalid(format!("--grid: {m}"));
    let mut axes = Vec::new();
    for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, vals) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected name=values in {part:?}")))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("bad number {s:?} in {part:?}")))
        };
        let axis = if vals.contains(':') {
            let f: Vec<&str> = vals.split(':').collect();
            if f.len() != 3 {
                return Err(bad(format!("expected start:stop:count in {part:?}")));
            }
            let count: usize = f[2]
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| bad(format!("bad count in {part:?}")))?;
            Axis::Range {
                start: num(f[0])?,
                stop: num(f[1])?,
                count,
            }
        } else {
            Axis::List(vals.split(',').map(num).collect::<Result<_, _>>()?)
        };
        axes.push((name.trim().to_string(), axis));
    }
    if axes.is_empty() {
        return Err(bad("no axes".into()));
    }
    Ok(axes)
}

fn apply(file: &mut ScenarioFile, name: &str, v: f64) -> Result<(), String> {
    let p = &mut file.parameters;
    match name {
        "beta" => p.beta = Some(v),
        "alpha" => p.alpha = Some(v),
        "rho" => p.rho = Some(v),
        "rho_s" => p.rho_s = Some(v),
        "w" => p.w = v,
        "leader_speed" => p.leader_speed = v,
        "retreat_speed" => p.retreat_speed = Some(v),
        _ => {
            let (id, coord) = name.rsplit_once('.').ok_or_else(|| format!("unknown parameter {name:?}"))?;
            let k = match coord {
                "x" => 0,
                "y" => 1,
                _ => return Err(format!("unknown coordinate in {name:?}")),
            };
            let agent = file
                .agents
                .iter_mut()
                .find(|a| a.id == id)
                .ok_or_else(|| format!("no agent with id {id:?}"))?;
            agent.position[k] = v;
        }
    }
    Ok(())
}

fn sweep_points(axes: &[(String, Axis)], samples: Option<usize>, seed: u64) -> Vec<Vec<f64>> {
    match samples {
        Some(n) => {
            let mut rng = StdRng::seed_from_u64(seed);
            (0..n).map(|_| axes.iter().map(|(_, a)| a.sample(&mut rng)).collect()).collect()
        }
        None => {
            let mut points = vec![Vec::new()];
            for (_, axis) in axes {
                let vals = axis.values();
                points = points
                    .into_iter()
                    .flat_map(|p| {
                        vals.iter().map(move |v| {
                            let mut q = p.clone();
                            q.push(*v);
                            q
                        })
                    })
                    .collect();
            }
            points
        }
    }
}

const SWEEP_COLUMNS: [&str; 6] = ["mode", "value", "winner", "theta_star", "terminal_cost", "error"];

fn sweep_row(base: &ScenarioFile, names: &[String], point: &[f64], stage: Stage, simulate: bool) -> Vec<String> {
    let mut row: Vec<String> = point.iter().map(|v| fmt_sig(*v)).collect();
    let result = (|| -> Result<Value, CliError> {
        let mut f = base.clone();
        for (n, v) in names.iter().zip(point) {
            apply(&mut f, n, *v).map_err(CliError::Invalid)?;
        }
        revalidate(&f)?;
        if simulate {
            return Ok(simulate_once(&f, stage)?.summary);
        }
        match stage {
            Stage::Attack => solve_attack(&f),
            Stage::Retreat => solve_retreat(&f),
            Stage::Chained => {
                let mut s = solve_attack(&f)?;
                if s["winner"] == json!("red") {
                    let r = solve_retreat(&f)?;
                    s["theta_star"] = r["theta_star"].clone();
                    s["terminal_cost"] = r["value"].clone();
                }
                Ok(s)
            }
        }
    })();
    let text = |v: &Value| match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().map(fmt_sig).unwrap_or_default(),
        other => other.to_string(),
    };
    match result {
        Ok(s) => {
            for c in &SWEEP_COLUMNS[..5] {
                row.push(text(&s[*c]));
            }
            row.push(String::new());
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(format!("exit {}: {}", e.code(), e.to_string().replace('\n', " ")));
        }
    }
    row
}

fn sweep(a: SweepArgs) -> Result<String, CliError> {
    let file = load(&a.common, Some(&a.sim))?;
    let axes = parse_grid(&a.grid)?;
    let names: Vec<String> = axes.iter().map(|(n, _)| n.clone()).collect();
    let mut probe = file.clone();
    for (n, axis) in &axes {
        let v = axis.values()[0];
        apply(&mut probe, n, v).map_err(|m| CliError::Invalid(format!("--grid: {m}")))?;
    }
    let stage = a.stage.unwrap_or(file.stage);
    let points = sweep_points(&axes, a.samples, a.seed);
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|p| sweep_row(&file, &names, p, stage, a.simulate))
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = names.iter().map(String::as_str).chain(SWEEP_COLUMNS).collect();
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in &rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(dir) = &a.common.out {
        write_file(dir, "sweep.csv", &bytes)?;
    }
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        let axes = parse_grid("rho_s=10:16:4; beta=1.2,1.3").unwrap();
        assert_eq!(axes[0].1.values(), vec![10.0, 12.0, 14.0, 16.0]);
        assert_eq!(axes[1].1, Axis::List(vec![1.2, 1.3]));
        let pts = sweep_points(&axes, None, 0);
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[1], vec![10.0, 1.3]);
        assert!(parse_grid("rho_s=1:2").is_err());
        assert!(parse_grid("rho_s").is_err());
        assert!(parse_grid("beta=x").is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let axes = parse_grid("rho=4:6:2;w=0.25,0.75").unwrap();
        let a = sweep_points(&axes, Some(20), 7);
        assert_eq!(a, sweep_points(&axes, Some(20), 7));
        assert_ne!(a, sweep_points(&axes, Some(20), 8));
        assert!(a.iter().all(|p| (4.0..=6.0).contains(&p[0]) && (p[1] == 0.25 || p[1] == 0.75)));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["bvr", "solve-attack"]), EXIT_INVALID);
        assert_eq!(run(["bvr", "frobnicate"]), EXIT_INVALID);
        assert_eq!(run(["bvr", "solve-attack", "--scenario", "/nonexistent/x.json"]), EXIT_INVALID);
    }
}
