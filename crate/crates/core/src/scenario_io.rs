//! Scenario files, trajectory CSVs and result summaries.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "stage": "attack",
//!   "agents": [
//!     { "id": "B_L", "role": "leader", "position": [-6, 8] },
//!     { "id": "R1", "role": "interceptor", "position": [15, 14] },
//!     { "id": "R2", "role": "interceptor", "position": [16, 6.5] },
//!     { "id": "R_s", "role": "asset", "position": [15.5, 10] }
//!   ],
//!   "parameters": { "beta": 1.25, "rho": 5, "rho_s": 7 }
//! }
//! ```
//!
//! Unknown fields anywhere are rejected.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::attack::{AttackScenario, AttackSolution};
use crate::geometry::Point2;
use crate::retreat::{assign_pairs, HeadingOptimum, PairingMode, RetreatScenario};
use crate::sim::{
    resolve_constraint, AgentDynamics, AttackIds, AttackStageSetup, AttackTerminal, ConstraintSpec, Control,
    DynamicsKind, RetreatSpawn, RetreatStageSetup, RetreatTerminal, SimConfig, TrajectoryLog,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Attack,
    Retreat,
    Chained,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Attack => "attack",
            Stage::Retreat => "retreat",
            Stage::Chained => "chained",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Leader,
    Wingman,
    Interceptor,
    Asset,
    /// Retreat stage: missile fired at the leader.
    Attacker,
    /// Retreat stage: missile fired to intercept an attacker.
    Defender,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRecord {
    pub id: String,
    pub role: Role,
    pub position: [f64; 2],
    #[serde(default)]
    pub heading: f64,
    /// Initial speed; defaults to the commanded speed of the role.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default)]
    pub dynamics: DynamicsKind,
    /// Attack-stage heading rule; optimal feedback by default.
    #[serde(default, skip_serializing_if = "is_feedback")]
    pub control: Control,
}

fn is_feedback(c: &Control) -> bool {
    *c == Control::Feedback
}

fn default_weight() -> f64 {
    0.5
}

fn default_speed() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    /// Interceptor-to-leader speed ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Leader-to-missile speed ratio in the retreat.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_s: Option<f64>,
    #[serde(default = "default_weight")]
    pub w: f64,
    #[serde(default = "default_speed")]
    pub leader_speed: f64,
    /// Leader speed in the retreat; defaults to `leader_speed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retreat_speed: Option<f64>,
    #[serde(default)]
    pub constraint: ConstraintSpec,
    #[serde(default)]
    pub pairing: PairingMode,
    /// Leader dynamics in the retreat of a chained run; keeps the attack model if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retreat_dynamics: Option<DynamicsKind>,
    #[serde(default)]
    pub missile_dynamics: DynamicsKind,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            beta: None,
            alpha: None,
            rho: None,
            rho_s: None,
            w: default_weight(),
            leader_speed: default_speed(),
            retreat_speed: None,
            constraint: ConstraintSpec::default(),
            pairing: PairingMode::default(),
            retreat_dynamics: None,
            missile_dynamics: DynamicsKind::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub stage: Stage,
    pub agents: Vec<AgentRecord>,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default)]
    pub sim: SimConfig,
}

/// One problem found in a scenario, located by a JSON path.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario:\n{}", format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl ScenarioError {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            ScenarioError::Parse { path, message } => vec![Diagnostic {
                path: path.clone(),
                message: message.clone(),
            }],
            ScenarioError::Validation(d) => d.clone(),
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let diags = file.validate();
    if diags.is_empty() {
        Ok(file)
    } else {
        Err(ScenarioError::Validation(diags))
    }
}

pub fn to_json(file: &ScenarioFile) -> String {
    serde_json::to_string_pretty(file).expect("scenario serializes")
}

struct Checker(Vec<Diagnostic>);

impl Checker {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            path: path.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.err(path, format!("must be positive and finite (got {v})"));
        }
    }

    fn required(&mut self, path: &str, v: Option<f64>) -> Option<f64> {
        if v.is_none() {
            self.err(path, "required for this stage");
        }
        v
    }
}

impl ScenarioFile {
    fn with_role(&self, role: Role) -> Vec<(usize, &AgentRecord)> {
        self.agents.iter().enumerate().filter(|(_, a)| a.role == role).collect()
    }

    fn one(&self, role: Role) -> Option<&AgentRecord> {
        self.agents.iter().find(|a| a.role == role)
    }

    fn pos(a: &AgentRecord) -> Point2 {
        Point2::from(a.position)
    }

    pub fn retreat_speed(&self) -> f64 {
        self.parameters.retreat_speed.unwrap_or(self.parameters.leader_speed)
    }

    /// Every violated invariant, in document order.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut c = Checker(Vec::new());
        if self.schema_version != SCHEMA_VERSION {
            c.err(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            );
        }

        for (i, a) in self.agents.iter().enumerate() {
            if a.position.iter().any(|v| !v.is_finite()) {
                c.err(format!("agents[{i}].position"), "coordinates must be finite");
            }
            if !a.heading.is_finite() {
                c.err(format!("agents[{i}].heading"), "must be finite");
            }
            if let Some(s) = a.speed {
                if !(s.is_finite() && s >= 0.0) {
                    c.err(format!("agents[{i}].speed"), "must be non-negative");
                }
            }
            if let Err(m) = a.dynamics.validate() {
                c.err(format!("agents[{i}].dynamics"), m);
            }
            if self.agents[..i].iter().any(|b| b.id == a.id) {
                c.err(format!("agents[{i}].id"), format!("duplicate id {:?}", a.id));
            }
        }

        let p = &self.parameters;
        c.positive("parameters.leader_speed", p.leader_speed);
        if !(0.0..=1.0).contains(&p.w) {
            c.err("parameters.w", format!("weight must lie in [0, 1] (got {})", p.w));
        }
        if let Some(rs) = p.retreat_speed {
            c.positive("parameters.retreat_speed", rs);
        }
        if let Some(k) = p.retreat_dynamics {
            if let Err(m) = k.validate() {
                c.err("parameters.retreat_dynamics", m);
            }
        }
        if let Err(m) = p.missile_dynamics.validate() {
            c.err("parameters.missile_dynamics", m);
        }
        if let ConstraintSpec::Interval { lower, upper } = p.constraint {
            if !(lower.is_finite() && upper.is_finite()) {
                c.err("parameters.constraint", "interval ends must be finite");
            }
        }
        if let Err(e) = self.sim.validate() {
            c.err("sim", e.to_string());
        }

        let count = |c: &mut Checker, role: Role, name: &str, lo: usize, hi: usize| {
            let n = self.with_role(role).len();
            if n < lo || n > hi {
                let want = if lo == hi { format!("{lo}") } else { format!("{lo}–{hi}") };
                c.err("agents", format!("stage {} needs {want} {name} agent(s), found {n}", self.stage.as_str()));
            }
            n
        };

        if matches!(self.stage, Stage::Attack | Stage::Chained) {
            let leaders = count(&mut c, Role::Leader, "leader", 1, 1);
            let wing = if self.stage == Stage::Chained {
                count(&mut c, Role::Wingman, "wingman", 1, 1)
            } else {
                count(&mut c, Role::Wingman, "wingman", 0, 1)
            };
            let inter = count(&mut c, Role::Interceptor, "interceptor", 2, 2);
            let assets = count(&mut c, Role::Asset, "asset", 1, 1);
            for (i, a) in self.agents.iter().enumerate() {
                if matches!(a.role, Role::Attacker | Role::Defender) {
                    c.err(format!("agents[{i}].role"), "attackers and defenders belong to a retreat-stage scenario");
                }
            }
            let beta = c.required("parameters.beta", p.beta);
            let rho = c.required("parameters.rho", p.rho);
            let rho_s = c.required("parameters.rho_s", p.rho_s);
            if let Some(b) = beta {
                if !(b.is_finite() && b > 1.0) {
                    c.err(
                        "parameters.beta",
                        format!("beta must satisfy beta > 1 (interceptors faster than the leader), got {b}"),
                    );
                }
            }
            if let Some(r) = rho {
                c.positive("parameters.rho", r);
            }
            if let Some(r) = rho_s {
                c.positive("parameters.rho_s", r);
            }
            if self.stage == Stage::Chained {
                self.check_alpha(&mut c);
            }
            if leaders == 1 && inter == 2 && assets == 1 && c.0.is_empty() {
                let leader = Self::pos(self.one(Role::Leader).unwrap());
                for (i, a) in self.with_role(Role::Interceptor) {
                    if leader.distance(Self::pos(a)) <= rho.unwrap() {
                        c.err(
                            format!("agents[{i}].position"),
                            format!("{} starts within engagement range rho of the leader", a.id),
                        );
                    }
                }
                let (ai, asset) = self.with_role(Role::Asset)[0];
                if leader.distance(Self::pos(asset)) <= rho_s.unwrap() {
                    c.err(format!("agents[{ai}].position"), "the leader starts inside the zone of radius rho_s");
                }
                if c.0.is_empty() {
                    if let Err(e) = self.attack_scenario().validate() {
                        c.err("agents", e.to_string());
                    }
                }
            }
            let _ = wing;
        } else {
            count(&mut c, Role::Leader, "leader", 1, 1);
            let na = count(&mut c, Role::Attacker, "attacker", 1, 2);
            let nd = count(&mut c, Role::Defender, "defender", 1, 2);
            count(&mut c, Role::Wingman, "wingman", 0, 1);
            if na != nd {
                c.err("agents", format!("{na} attacker(s) but {nd} defender(s); pairs need one of each"));
            }
            for (i, a) in self.agents.iter().enumerate() {
                if matches!(a.role, Role::Interceptor | Role::Asset) {
                    c.err(format!("agents[{i}].role"), "interceptors and assets belong to an attack-stage scenario");
                }
            }
            self.check_alpha(&mut c);
            if c.0.is_empty() {
                if let Err(e) = self.retreat_scenario().validate() {
                    c.err("agents", e.to_string());
                }
            }
        }
        c.0
    }

    fn check_alpha(&self, c: &mut Checker) {
        if let Some(a) = c.required("parameters.alpha", self.parameters.alpha) {
            if !(a.is_finite() && a > 0.0 && a < 1.0) {
                c.err(
                    "parameters.alpha",
                    format!("alpha must satisfy 0 < alpha < 1 (missiles faster than the leader), got {a}"),
                );
            }
        }
    }

    /// Analytic attack game at the initial positions.
    pub fn attack_scenario(&self) -> AttackScenario {
        let p = &self.parameters;
        let r: Vec<Point2> = self.with_role(Role::Interceptor).iter().map(|(_, a)| Self::pos(a)).collect();
        AttackScenario {
            leader: Self::pos(self.one(Role::Leader).expect("validated")),
            interceptors: [r[0], r[1]],
            asset: Self::pos(self.one(Role::Asset).expect("validated")),
            beta: p.beta.unwrap_or(f64::NAN),
            rho: p.rho.unwrap_or(f64::NAN),
            rho_s: p.rho_s.unwrap_or(f64::NAN),
        }
    }

    fn agent(a: &AgentRecord, commanded: f64) -> AgentDynamics {
        let mut d = AgentDynamics::steady(a.dynamics, Self::pos(a), a.heading, commanded);
        d.speed = a.speed.unwrap_or(commanded);
        d
    }

    pub fn attack_setup(&self) -> AttackStageSetup {
        let p = &self.parameters;
        let leader = self.one(Role::Leader).expect("validated");
        let wingman = self.one(Role::Wingman);
        let r = self.with_role(Role::Interceptor);
        let vr = p.beta.unwrap_or(f64::NAN) * p.leader_speed;
        AttackStageSetup {
            asset: Self::pos(self.one(Role::Asset).expect("validated")),
            rho: p.rho.unwrap_or(f64::NAN),
            rho_s: p.rho_s.unwrap_or(f64::NAN),
            leader: Self::agent(leader, p.leader_speed),
            wingman: wingman.map(|w| Self::agent(w, p.leader_speed)),
            interceptors: [Self::agent(r[0].1, vr), Self::agent(r[1].1, vr)],
            controls: [leader.control, r[0].1.control, r[1].1.control],
            ids: AttackIds {
                leader: leader.id.clone(),
                wingman: wingman.map_or_else(|| "B_W".to_string(), |w| w.id.clone()),
                interceptors: [r[0].1.id.clone(), r[1].1.id.clone()],
            },
        }
    }

    pub fn retreat_spawn(&self) -> RetreatSpawn {
        let p = &self.parameters;
        let alpha = p.alpha.unwrap_or(f64::NAN);
        RetreatSpawn {
            retreat_speed: self.retreat_speed(),
            missile_speed: self.retreat_speed() / alpha,
            weight: p.w,
            constraint: p.constraint,
            pairing: p.pairing,
            leader_kind: p.retreat_dynamics,
            missile_kind: p.missile_dynamics,
        }
    }

    /// Retreat game of a retreat-stage scenario. The turn-away constraint
    /// uses the leader's heading as reference and the wingman (or the first
    /// defender) as the side to turn away from.
    pub fn retreat_scenario(&self) -> RetreatScenario {
        let p = &self.parameters;
        let leader = self.one(Role::Leader).expect("validated");
        let attackers: Vec<Point2> = self.with_role(Role::Attacker).iter().map(|(_, a)| Self::pos(a)).collect();
        let defenders: Vec<Point2> = self.with_role(Role::Defender).iter().map(|(_, a)| Self::pos(a)).collect();
        let b = Self::pos(leader);
        let wing = self
            .one(Role::Wingman)
            .map(Self::pos)
            .or_else(|| defenders.first().copied())
            .unwrap_or(b);
        RetreatScenario {
            leader: b,
            pairs: assign_pairs(b, &attackers, &defenders, p.alpha.unwrap_or(f64::NAN), p.pairing),
            weight: p.w,
            constraint: resolve_constraint(p.constraint, leader.heading, b, wing),
        }
    }

    pub fn retreat_stage_setup(&self) -> RetreatStageSetup {
        let scenario = self.retreat_scenario();
        let leader = self.one(Role::Leader).expect("validated");
        let rs = self.retreat_speed();
        let attackers = self.with_role(Role::Attacker);
        let defenders = self.with_role(Role::Defender);
        // Pair ids follow the geometric pairing chosen above.
        let pair_ids = scenario
            .pairs
            .iter()
            .map(|pair| {
                let a = attackers.iter().find(|(_, a)| Self::pos(a) == pair.attacker).unwrap().1;
                let d = defenders.iter().find(|(_, d)| Self::pos(d) == pair.defender).unwrap().1;
                (a.id.clone(), d.id.clone())
            })
            .collect();
        RetreatStageSetup {
            leader: Self::agent(leader, rs),
            retreat_speed: rs,
            missile_speed: rs / self.parameters.alpha.unwrap_or(f64::NAN),
            missile_kind: self.parameters.missile_dynamics,
            t0: 0.0,
            leader_id: leader.id.clone(),
            pair_ids,
            scenario,
        }
    }
}

/// Formats `x` with 9 significant digits, shortest form.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mant, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-5..DIGITS).contains(&exp) {
        let mant = trim_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the printed precision.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

/// Writes the trajectory CSV (`t,agent,x,y,heading,speed`) and the event
/// CSV (`t,event,subjects`, subjects joined by `;`).
pub fn write_trajectory<W1: Write, W2: Write>(log: &TrajectoryLog, rows: W1, events: W2) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(rows);
    w.write_record(["t", "agent", "x", "y", "heading", "speed"])?;
    for r in &log.rows {
        w.write_record([
            fmt_sig(r.t),
            log.agents[r.agent].clone(),
            fmt_sig(r.position.x),
            fmt_sig(r.position.y),
            fmt_sig(r.heading),
            fmt_sig(r.speed),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(events);
    w.write_record(["t", "event", "subjects"])?;
    for e in &log.events {
        w.write_record([fmt_sig(e.t), e.kind.as_str().to_string(), e.subjects.join(";")])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub t: f64,
    pub agent: String,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

pub fn read_trajectory<R: std::io::Read>(src: R) -> csv::Result<Vec<CsvRow>> {
    csv::Reader::from_reader(src).deserialize().collect()
}

/// Summary numbers: 9 significant digits, with round-off noise below
/// 1e-12 shown as zero.
fn num(x: f64) -> serde_json::Value {
    if x.abs() < 1e-12 {
        json!(0.0)
    } else if x.is_finite() {
        json!(round_sig(x))
    } else {
        serde_json::Value::Null
    }
}

fn pt(p: Point2) -> serde_json::Value {
    json!([num(p.x), num(p.y)])
}

fn events_json(log: Option<&TrajectoryLog>) -> serde_json::Value {
    let events: Vec<_> = log
        .map(|l| l.events.iter().map(|e| json!({"t": num(e.t), "event": e.kind.as_str(), "subjects": e.subjects})).collect())
        .unwrap_or_default();
    json!(events)
}

/// Summary of an analytic attack solution.
pub fn attack_summary(sol: &AttackSolution) -> serde_json::Value {
    json!({
        "stage": "attack",
        "mode": sol.mode,
        "value": num(sol.value),
        "terminal_cost": num(sol.value),
        "winner": sol.winner,
        "theta_star": serde_json::Value::Null,
        "aimpoint": pt(sol.aimpoint),
        "headings": {
            "leader": num(sol.headings.leader),
            "interceptors": [num(sol.headings.interceptors[0]), num(sol.headings.interceptors[1])],
        },
        "cooperative_points": sol.cooperative_points.iter().map(|p| pt(*p)).collect::<Vec<_>>(),
        "events": [],
    })
}

/// Summary of an analytic retreat solution.
pub fn retreat_summary(scn: &RetreatScenario, opt: &HeadingOptimum) -> serde_json::Value {
    let pairs: Vec<_> = opt
        .pairs
        .iter()
        .map(|s| {
            json!({
                "value": num(s.value),
                "intercept": pt(s.intercept),
                "y_star": num(s.y_star),
                "attacker_heading": num(s.attacker_heading),
                "defender_heading": num(s.defender_heading),
            })
        })
        .collect();
    let bands: Vec<_> = opt.bands.iter().map(band_json).collect();
    json!({
        "stage": "retreat",
        "mode": serde_json::Value::Null,
        "value": num(opt.value),
        "terminal_cost": num(opt.value),
        "winner": serde_json::Value::Null,
        "theta_star": num(opt.heading),
        "constraint_active": opt.constraint_active,
        "constraint": scn.constraint.map(|c| json!({"lower": num(c.arc.start), "upper": num(c.arc.end())})),
        "weight": num(scn.weight),
        "bands": bands,
        "pairs": pairs,
        "events": [],
    })
}

pub fn band_json(b: &crate::retreat::FeasibleBand) -> serde_json::Value {
    json!({
        "kind": b.kind,
        "lower": num(b.lower()),
        "upper": num(b.upper()),
        "full": b.arc.is_full(),
    })
}

pub fn attack_terminal_json(t: &AttackTerminal) -> serde_json::Value {
    json!({
        "time": num(t.time),
        "termination": t.termination,
        "simultaneous_block": t.simultaneous_block(),
        "leader": pt(t.leader.position),
        "interceptors": [pt(t.interceptors[0].position), pt(t.interceptors[1].position)],
        "distance_to_asset": num(t.distance_to_asset),
    })
}

pub fn retreat_terminal_json(t: &RetreatTerminal) -> serde_json::Value {
    json!({
        "outcome": t.outcome,
        "time": num(t.time),
        "heading": num(t.heading),
        "predicted_value": num(t.predicted_value),
        "constraint_active": t.constraint_active,
        "pair_distances": t.pair_distances.iter().map(|d| d.map(num)).collect::<Vec<_>>(),
        "interception_times": t.interception_times.iter().map(|d| d.map(num)).collect::<Vec<_>>(),
        "composite": t.composite.map(num),
        "leader": pt(t.leader.position),
    })
}

/// Summary of a simulated run. `terminal_cost` is J for an attack-only run
/// and the realized J_c once a retreat has been flown.
pub fn simulation_summary(
    stage: Stage,
    attack: Option<&AttackTerminal>,
    retreat: Option<&RetreatTerminal>,
    log: &TrajectoryLog,
) -> serde_json::Value {
    let sol = attack.and_then(|a| a.initial_solution.as_ref());
    let terminal_cost = match (attack, retreat) {
        (_, Some(r)) => r.composite.map(num).unwrap_or(serde_json::Value::Null),
        (Some(a), None) => num(a.distance_to_asset),
        _ => serde_json::Value::Null,
    };
    json!({
        "stage": stage.as_str(),
        "mode": sol.map(|s| json!(s.mode)).unwrap_or(serde_json::Value::Null),
        "value": sol.map(|s| num(s.value)).or_else(|| retreat.map(|r| num(r.predicted_value))),
        "terminal_cost": terminal_cost,
        "winner": sol.map(|s| json!(s.winner)).unwrap_or(serde_json::Value::Null),
        "theta_star": retreat.map(|r| num(r.heading)),
        "attack": attack.map(attack_terminal_json),
        "retreat": retreat.map(retreat_terminal_json),
        "events": events_json(Some(log)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ATTACK: &str = r#"{
        "schema_version": 1,
        "stage": "attack",
        "agents": [
            {"id": "B_L", "role": "leader", "position": [-6, 8]},
            {"id": "R1", "role": "interceptor", "position": [15, 14]},
            {"id": "R2", "role": "interceptor", "position": [16, 6.5]},
            {"id": "R_s", "role": "asset", "position": [15.5, 10]}
        ],
        "parameters": {"beta": 1.25, "rho": 5, "rho_s": 7}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let f = parse_scenario(ATTACK).unwrap();
        assert_eq!(f.sim, SimConfig::default());
        let again = parse_scenario(&to_json(&f)).unwrap();
        assert_eq!(f, again);
        assert_eq!(to_json(&f), to_json(&again));
    }

    #[test]
    fn slow_interceptors_name_beta() {
        let err = parse_scenario(&ATTACK.replace("1.25", "0.9")).unwrap_err();
        let d = err.diagnostics();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "parameters.beta");
        assert!(d[0].message.contains("beta > 1"));
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        let text = ATTACK.replacen("\"stage\"", "\"stgae\": 1, \"stage\"", 1);
        match parse_scenario(&text).unwrap_err() {
            ScenarioError::Parse { path, message } => {
                assert_eq!(path, "stgae");
                assert!(message.contains("unknown field"));
            }
            e => panic!("{e}"),
        }
        let text = ATTACK.replace("\"rho_s\": 7", "\"rho_s\": 7, \"gamma\": 2");
        let ScenarioError::Parse { path, .. } = parse_scenario(&text).unwrap_err() else {
            panic!()
        };
        assert_eq!(path, "parameters.gamma");
    }

    #[test]
    fn interceptor_in_range_is_located() {
        let text = ATTACK.replace("[15, 14]", "[-3, 8]");
        let d = parse_scenario(&text).unwrap_err().diagnostics();
        assert_eq!(d[0].path, "agents[1].position");
    }

    #[test]
    fn missing_roles() {
        let text = ATTACK.replace(r#"{"id": "R_s", "role": "asset", "position": [15.5, 10]}"#, "")
            .replace("[16, 6.5]},", "[16, 6.5]}");
        let d = parse_scenario(&text).unwrap_err().diagnostics();
        assert!(d.iter().any(|d| d.path == "agents" && d.message.contains("asset")));
    }

    #[test]
    fn retreat_alpha() {
        let text = r#"{
            "schema_version": 1, "stage": "retreat",
            "agents": [
                {"id": "B", "role": "leader", "position": [1, 1.5]},
                {"id": "A1", "role": "attacker", "position": [2, 0]},
                {"id": "D1", "role": "defender", "position": [0, 0]}
            ],
            "parameters": {"alpha": 1.5, "constraint": {"kind": "none"}}
        }"#;
        let d = parse_scenario(text).unwrap_err().diagnostics();
        assert_eq!(d[0].path, "parameters.alpha");
        let f = parse_scenario(&text.replace("1.5}", "0.5}").replace("\"alpha\": 1.5", "\"alpha\": 0.5")).unwrap();
        let setup = f.retreat_stage_setup();
        assert_eq!(setup.missile_speed, 2.0);
        assert_eq!(setup.pair_ids, vec![("A1".to_string(), "D1".to_string())]);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(13.98699256912), "13.9869926");
        assert_eq!(fmt_sig(-0.000123456789012), "-0.000123456789");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig(1234567890123.0), "1.23456789e12");
        assert_eq!(fmt_sig(100.0), "100");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn empty_log_writes_headers() {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_trajectory(&TrajectoryLog::default(), &mut a, &mut b).unwrap();
        assert_eq!(String::from_utf8(a).unwrap(), "t,agent,x,y,heading,speed\n");
        assert_eq!(String::from_utf8(b).unwrap(), "t,event,subjects\n");
    }
}
