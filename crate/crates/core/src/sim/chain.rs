use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::retreat::{assign_pairs, HeadingConstraint, PairingMode, RetreatScenario};

use super::attack_stage::{run_attack_stage, AttackStageSetup, AttackTermination, AttackTerminal};
use super::dynamics::DynamicsKind;
use super::log::{EventKind, TrajectoryLog};
use super::retreat_stage::{run_retreat_stage, RetreatStageSetup, RetreatTerminal};
use super::{SimConfig, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    /// Turn away from the wingman, at most a half-turn from the terminal
    /// attack heading.
    #[default]
    TurnAway,
    None,
    Interval {
        lower: f64,
        upper: f64,
    },
}

/// How the retreat stage is set up from the end of the attack stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetreatSpawn {
    pub retreat_speed: f64,
    pub missile_speed: f64,
    pub weight: f64,
    pub constraint: ConstraintSpec,
    pub pairing: PairingMode,
    /// Leader dynamics during the retreat; keeps the attack-stage model if unset.
    pub leader_kind: Option<DynamicsKind>,
    pub missile_kind: DynamicsKind,
}

impl RetreatSpawn {
    pub fn alpha(&self) -> f64 {
        self.retreat_speed / self.missile_speed
    }
}

pub fn resolve_constraint(spec: ConstraintSpec, reference: f64, leader: Point2, wingman: Point2) -> Option<HeadingConstraint> {
    match spec {
        ConstraintSpec::TurnAway => Some(HeadingConstraint::turn_away(reference, leader, wingman)),
        ConstraintSpec::None => None,
        ConstraintSpec::Interval { lower, upper } => Some(HeadingConstraint::interval(lower, upper)),
    }
}

/// Missiles fired at the leader from every interceptor that blocked it;
/// defenders fired from the wingman.
pub fn spawn_retreat(terminal: &AttackTerminal, wingman: Point2, spawn: &RetreatSpawn) -> Result<RetreatScenario, SimError> {
    let AttackTermination::Blocked { interceptors } = &terminal.termination else {
        return Err(SimError::WrongTermination);
    };
    if interceptors.is_empty() {
        return Err(SimError::WrongTermination);
    }
    if !(spawn.missile_speed > spawn.retreat_speed && spawn.retreat_speed > 0.0) {
        return Err(SimError::InvalidSetup("missiles must be faster than the leader".into()));
    }
    let leader = terminal.leader.position;
    let attackers: Vec<Point2> = interceptors.iter().map(|&i| terminal.interceptors[i].position).collect();
    let defenders = vec![wingman; attackers.len()];
    let pairs = assign_pairs(leader, &attackers, &defenders, spawn.alpha(), spawn.pairing);
    Ok(RetreatScenario {
        leader,
        pairs,
        weight: spawn.weight,
        constraint: resolve_constraint(spawn.constraint, terminal.leader.heading, leader, wingman),
    })
}

/// Terminal state of the attack stage under simple motion and optimal
/// play, from the closed-form solution (no integration).
pub fn analytic_attack_terminal(setup: &AttackStageSetup) -> Result<AttackTerminal, SimError> {
    let scn = crate::attack::AttackScenario {
        leader: setup.leader.position,
        interceptors: [setup.interceptors[0].position, setup.interceptors[1].position],
        asset: setup.asset,
        beta: setup.beta(),
        rho: setup.rho,
        rho_s: setup.rho_s,
    };
    let sol = crate::attack::select_strategy(&scn).map_err(|e| SimError::SolverFailure {
        time: 0.0,
        message: e.to_string(),
        snapshot: Vec::new(),
    })?;
    let v = setup.leader.commanded_speed;
    let travel = sol.aimpoint - setup.leader.position;
    let tf = travel.norm() / v;
    let mut leader = setup.leader;
    leader.position = sol.aimpoint;
    leader.heading = sol.headings.leader;
    leader.commanded_heading = sol.headings.leader;
    leader.speed = v;
    let wingman = setup.wingman.map(|mut w| {
        w.position = w.position + travel;
        w.heading = sol.headings.leader;
        w.commanded_heading = sol.headings.leader;
        w
    });
    let mut interceptors = setup.interceptors;
    for (i, r) in interceptors.iter_mut().enumerate() {
        let h = sol.headings.interceptors[i];
        r.position = r.position + crate::geometry::unit(h) * (r.commanded_speed * tf);
        r.heading = h;
        r.commanded_heading = h;
        r.speed = r.commanded_speed;
    }
    let termination = if sol.winner == crate::attack::Winner::Blue {
        AttackTermination::ReachedZone
    } else {
        let who = (0..2)
            .filter(|&i| interceptors[i].position.distance(sol.aimpoint) <= setup.rho * (1.0 + 1e-6))
            .collect();
        AttackTermination::Blocked { interceptors: who }
    };
    Ok(AttackTerminal {
        time: tf,
        termination,
        leader,
        wingman,
        interceptors,
        distance_to_asset: sol.value,
        steps: 0,
        initial_solution: Some(sol),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainedOutcome {
    pub attack: AttackTerminal,
    pub retreat_scenario: Option<RetreatScenario>,
    pub retreat: Option<RetreatTerminal>,
}

/// Attack stage followed, after a block, by the retreat stage.
pub fn run_chained(
    setup: &AttackStageSetup,
    spawn: &RetreatSpawn,
    cfg: &SimConfig,
) -> Result<(TrajectoryLog, ChainedOutcome), SimError> {
    let (mut log, attack) = run_attack_stage(setup, cfg)?;
    let AttackTermination::Blocked { interceptors } = attack.termination.clone() else {
        return Ok((
            log,
            ChainedOutcome {
                attack,
                retreat_scenario: None,
                retreat: None,
            },
        ));
    };
    let wingman = attack
        .wingman
        .ok_or_else(|| SimError::InvalidSetup("the retreat stage needs a wingman".into()))?;
    let scenario = spawn_retreat(&attack, wingman.position, spawn)?;

    let mut leader = attack.leader;
    if let Some(kind) = spawn.leader_kind {
        leader.kind = kind;
    }
    let ids = &setup.ids;
    let pair_ids = interceptors
        .iter()
        .map(|&i| (format!("A{}", i + 1), format!("D{}", i + 1)))
        .collect();
    let stage = RetreatStageSetup {
        scenario: scenario.clone(),
        leader,
        retreat_speed: spawn.retreat_speed,
        missile_speed: spawn.missile_speed,
        missile_kind: spawn.missile_kind,
        t0: attack.time,
        leader_id: ids.leader.clone(),
        pair_ids,
    };
    log.event(attack.time, EventKind::StageTransition, &[&ids.leader]);
    let (rlog, retreat) = run_retreat_stage(&stage, cfg)?;
    log.append(rlog);
    Ok((
        log,
        ChainedOutcome {
            attack,
            retreat_scenario: Some(scenario),
            retreat: Some(retreat),
        },
    ))
}
