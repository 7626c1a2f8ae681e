use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::retreat::{optimize_heading, pair_game_solve_unchecked, MissilePair, RetreatError, RetreatScenario};

use super::dynamics::{step_agent, AgentDynamics, DynamicsKind};
use super::log::{EventKind, TrajectoryLog};
use super::{first_crossing, lerp_agent, SimConfig, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct RetreatStageSetup {
    /// Positions, speed ratio, weight and heading constraint.
    pub scenario: RetreatScenario,
    /// Leader's current motion state; its commanded speed is set to `retreat_speed`.
    pub leader: AgentDynamics,
    pub retreat_speed: f64,
    pub missile_speed: f64,
    pub missile_kind: DynamicsKind,
    /// Stage start time (non-zero when chained after the attack).
    pub t0: f64,
    pub leader_id: String,
    /// Attacker and defender ids per pair.
    pub pair_ids: Vec<(String, String)>,
}

impl RetreatStageSetup {
    pub fn default_ids(n: usize) -> Vec<(String, String)> {
        (1..=n).map(|i| (format!("A{i}"), format!("D{i}"))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RetreatOutcome {
    /// Every attacker was intercepted.
    Intercepted,
    /// An attacker reached the leader (0-based pair index).
    Loss { pair: usize },
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetreatTerminal {
    pub outcome: RetreatOutcome,
    pub time: f64,
    /// Stage-start optimal heading.
    pub heading: f64,
    /// Predicted composite value at the stage start.
    pub predicted_value: f64,
    pub constraint_active: bool,
    /// Attacker–leader distance at each pair's interception.
    pub pair_distances: Vec<Option<f64>>,
    pub interception_times: Vec<Option<f64>>,
    /// Weighted terminal distance, once every pair is intercepted.
    pub composite: Option<f64>,
    pub leader: AgentDynamics,
}

struct Pair {
    attacker: AgentDynamics,
    defender: AgentDynamics,
    alpha: f64,
    done: bool,
}

fn active_scenario(base: &RetreatScenario, leader: Point2, pairs: &[Pair]) -> Option<RetreatScenario> {
    let live: Vec<MissilePair> = pairs
        .iter()
        .filter(|p| !p.done)
        .map(|p| MissilePair {
            attacker: p.attacker.position,
            defender: p.defender.position,
            alpha: p.alpha,
        })
        .collect();
    if live.is_empty() {
        return None;
    }
    Some(RetreatScenario {
        leader,
        pairs: live,
        weight: base.weight,
        constraint: base.constraint,
    })
}

pub fn run_retreat_stage(
    setup: &RetreatStageSetup,
    cfg: &SimConfig,
) -> Result<(TrajectoryLog, RetreatTerminal), SimError> {
    cfg.validate()?;
    let scn = &setup.scenario;
    if scn.pairs.is_empty() || scn.pairs.len() > 2 {
        return Err(SimError::InvalidSetup("expected 1 or 2 missile pairs".into()));
    }
    if setup.pair_ids.len() != scn.pairs.len() {
        return Err(SimError::InvalidSetup("one id pair per missile pair".into()));
    }
    if !(setup.retreat_speed > 0.0 && setup.missile_speed > setup.retreat_speed) {
        return Err(SimError::InvalidSetup("missiles must be faster than the leader".into()));
    }
    setup.leader.kind.validate().map_err(SimError::InvalidSetup)?;
    setup.missile_kind.validate().map_err(SimError::InvalidSetup)?;

    let mut log = TrajectoryLog::default();
    let leader_idx = log.agent_index(&setup.leader_id);
    let idx: Vec<(usize, usize)> = setup
        .pair_ids
        .iter()
        .map(|(a, d)| (log.agent_index(a), log.agent_index(d)))
        .collect();

    let mut leader = setup.leader;
    let mut pairs: Vec<Pair> = scn
        .pairs
        .iter()
        .map(|p| {
            let launch = p.defender.heading_to(p.attacker);
            Pair {
                attacker: AgentDynamics::steady(setup.missile_kind, p.attacker, launch + std::f64::consts::PI, setup.missile_speed),
                defender: AgentDynamics::steady(setup.missile_kind, p.defender, launch, setup.missile_speed),
                alpha: p.alpha,
                done: false,
            }
        })
        .collect();
    let n = pairs.len();
    let mut distances: Vec<Option<f64>> = vec![None; n];
    let mut times: Vec<Option<f64>> = vec![None; n];

    let ids: Vec<&str> = setup
        .pair_ids
        .iter()
        .flat_map(|(a, d)| [a.as_str(), d.as_str()])
        .collect();
    log.event(setup.t0, EventKind::MissileLaunch, &ids);

    let snapshot = |leader: &AgentDynamics, pairs: &[Pair]| -> Vec<(String, Point2)> {
        let mut v = vec![(setup.leader_id.clone(), leader.position)];
        for (p, (a, d)) in pairs.iter().zip(&setup.pair_ids) {
            v.push((a.clone(), p.attacker.position));
            v.push((d.clone(), p.defender.position));
        }
        v
    };

    // Pairs that start already intercepted.
    for (i, p) in pairs.iter_mut().enumerate() {
        if p.attacker.position.distance(p.defender.position) <= cfg.capture_eps {
            p.done = true;
            distances[i] = Some(p.attacker.position.distance(leader.position));
            times[i] = Some(setup.t0);
            log.event(setup.t0, EventKind::Interception, &[&setup.pair_ids[i].0, &setup.pair_ids[i].1]);
        }
    }

    let record = |log: &mut TrajectoryLog, t: f64, leader: &AgentDynamics, pairs: &[Pair]| {
        log.record(t, leader_idx, leader);
        for (p, (ia, id)) in pairs.iter().zip(&idx) {
            if !p.done {
                log.record(t, *ia, &p.attacker);
                log.record(t, *id, &p.defender);
            }
        }
    };

    let (heading, predicted_value, constraint_active) = match active_scenario(scn, leader.position, &pairs) {
        Some(live) => {
            let opt = optimize_heading(&live).map_err(|e| match e {
                RetreatError::EmptyFeasibleSet { ref bands, .. } => {
                    let shown: Vec<String> = bands
                        .iter()
                        .map(|b| match b {
                            Some(b) if b.arc.is_full() => "all headings".to_string(),
                            Some(b) => format!("[{:.6}, {:.6}]", b.lower(), b.upper()),
                            None => "none".to_string(),
                        })
                        .collect();
                    SimError::EmptyFeasibleSet(format!("{e}; bands {}", shown.join(", ")))
                }
                other => SimError::SolverFailure {
                    time: setup.t0,
                    message: other.to_string(),
                    snapshot: snapshot(&leader, &pairs),
                },
            })?;
            (opt.heading, opt.value, opt.constraint_active)
        }
        None => (leader.heading, 0.0, false),
    };
    leader.tie_turn = scn.constraint.and_then(|c| c.turn);
    leader.command(heading, setup.retreat_speed);
    let mut heading_cmd = heading;

    record(&mut log, setup.t0, &leader, &pairs);
    let finish = |outcome, time, leader: AgentDynamics, distances: Vec<Option<f64>>, times| {
        let composite = if distances.iter().all(|d| d.is_some()) {
            let d: Vec<f64> = distances.iter().map(|d| d.unwrap()).collect();
            Some(match d.as_slice() {
                [a] => *a,
                [a, b] => scn.weight * a + (1.0 - scn.weight) * b,
                _ => unreachable!(),
            })
        } else {
            None
        };
        RetreatTerminal {
            outcome,
            time,
            heading,
            predicted_value,
            constraint_active,
            pair_distances: distances,
            interception_times: times,
            composite,
            leader,
        }
    };

    if pairs.iter().all(|p| p.done) {
        return Ok((log, finish(RetreatOutcome::Intercepted, setup.t0, leader, distances, times)));
    }

    let max_steps = (cfg.max_time / cfg.dt).ceil() as usize;
    for step in 0..max_steps {
        let t0 = setup.t0 + step as f64 * cfg.dt;
        if step % cfg.replan_every == 0 {
            if cfg.retreat_replan && step > 0 {
                if let Some(live) = active_scenario(scn, leader.position, &pairs) {
                    if let Ok(opt) = optimize_heading(&live) {
                        heading_cmd = opt.heading;
                        leader.command(heading_cmd, setup.retreat_speed);
                    }
                }
            }
            let mut commands = Vec::with_capacity(pairs.len());
            for p in pairs.iter() {
                if p.done {
                    commands.push(None);
                    continue;
                }
                let mp = MissilePair {
                    attacker: p.attacker.position,
                    defender: p.defender.position,
                    alpha: p.alpha,
                };
                let sol = pair_game_solve_unchecked(&mp, leader.position, heading_cmd).map_err(|e| {
                    SimError::SolverFailure {
                        time: t0,
                        message: e.to_string(),
                        snapshot: snapshot(&leader, &pairs),
                    }
                })?;
                commands.push(Some(sol));
            }
            for (p, sol) in pairs.iter_mut().zip(commands) {
                if let Some(sol) = sol {
                    p.attacker.command(sol.attacker_heading, setup.missile_speed);
                    p.defender.command(sol.defender_heading, setup.missile_speed);
                }
            }
        }

        let next_leader = step_agent(&leader, cfg.dt);
        let next: Vec<(AgentDynamics, AgentDynamics)> = pairs
            .iter()
            .map(|p| (step_agent(&p.attacker, cfg.dt), step_agent(&p.defender, cfg.dt)))
            .collect();

        let mut capture: Option<(f64, usize)> = None;
        let mut intercepts: Vec<(f64, usize)> = Vec::new();
        for (i, p) in pairs.iter().enumerate().filter(|(_, p)| !p.done) {
            let (na, nd) = &next[i];
            if let Some(s) = first_crossing(
                p.attacker.position - p.defender.position,
                na.position - nd.position,
                cfg.capture_eps,
            ) {
                intercepts.push((s, i));
            }
            if let Some(s) = first_crossing(
                p.attacker.position - leader.position,
                na.position - next_leader.position,
                cfg.capture_eps,
            ) {
                if capture.is_none_or(|(c, _)| s < c) {
                    capture = Some((s, i));
                }
            }
        }
        intercepts.sort_by(|a, b| a.0.total_cmp(&b.0));

        for &(s, i) in &intercepts {
            if capture.is_some_and(|(c, _)| c <= s) {
                break;
            }
            let t = t0 + s * cfg.dt;
            let a = lerp_agent(&pairs[i].attacker, &next[i].0, s);
            let b = lerp_agent(&leader, &next_leader, s);
            distances[i] = Some(a.position.distance(b.position));
            times[i] = Some(t);
            log.event(t, EventKind::Interception, &[&setup.pair_ids[i].0, &setup.pair_ids[i].1]);
        }

        if let Some((s, i)) = capture {
            let t = t0 + s * cfg.dt;
            log.event(t, EventKind::Capture, &[&setup.pair_ids[i].0, &setup.leader_id]);
            let end_leader = lerp_agent(&leader, &next_leader, s);
            for (j, p) in pairs.iter_mut().enumerate() {
                p.attacker = lerp_agent(&p.attacker, &next[j].0, s);
                p.defender = lerp_agent(&p.defender, &next[j].1, s);
            }
            if t > t0 {
                record(&mut log, t, &end_leader, &pairs);
            }
            return Ok((log, finish(RetreatOutcome::Loss { pair: i }, t, end_leader, distances, times)));
        }

        leader = next_leader;
        for (p, (a, d)) in pairs.iter_mut().zip(next) {
            p.attacker = a;
            p.defender = d;
        }
        let t1 = setup.t0 + (step + 1) as f64 * cfg.dt;
        let all_done = pairs.iter().enumerate().all(|(i, p)| p.done || distances[i].is_some());
        if all_done {
            record(&mut log, t1, &leader, &pairs);
            let t_end = times.iter().flatten().fold(f64::NEG_INFINITY, |m, t| m.max(*t));
            return Ok((log, finish(RetreatOutcome::Intercepted, t_end, leader, distances, times)));
        }
        record(&mut log, t1, &leader, &pairs);
        for (i, p) in pairs.iter_mut().enumerate() {
            if distances[i].is_some() {
                p.done = true;
            }
        }
    }

    let t = setup.t0 + max_steps as f64 * cfg.dt;
    Ok((log, finish(RetreatOutcome::Timeout, t, leader, distances, times)))
}
