use serde::{Deserialize, Serialize};

use crate::attack::{select_strategy, AttackScenario, AttackSolution};
use crate::geometry::Point2;

use super::dynamics::{step_agent, AgentDynamics};
use super::log::{EventKind, TrajectoryLog};
use super::{first_crossing, lerp_agent, SimConfig, SimError};

/// How an agent picks its commanded heading each replan.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Control {
    #[default]
    Feedback,
    ConstantHeading {
        heading: f64,
    },
    /// Optimal heading plus a fixed offset.
    FeedbackOffset {
        offset: f64,
    },
}

impl Control {
    fn apply(&self, optimal: f64) -> f64 {
        match *self {
            Control::Feedback => optimal,
            Control::ConstantHeading { heading } => heading,
            Control::FeedbackOffset { offset } => optimal + offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackStageSetup {
    pub asset: Point2,
    pub rho: f64,
    pub rho_s: f64,
    pub leader: AgentDynamics,
    /// Flies in formation: copies the leader's commands.
    pub wingman: Option<AgentDynamics>,
    pub interceptors: [AgentDynamics; 2],
    /// Leader, first interceptor, second interceptor.
    pub controls: [Control; 3],
    pub ids: AttackIds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackIds {
    pub leader: String,
    pub wingman: String,
    pub interceptors: [String; 2],
}

impl Default for AttackIds {
    fn default() -> Self {
        Self {
            leader: "B_L".into(),
            wingman: "B_W".into(),
            interceptors: ["R1".into(), "R2".into()],
        }
    }
}

impl AttackStageSetup {
    /// Interceptor-to-leader speed ratio used by the game solver.
    pub fn beta(&self) -> f64 {
        self.interceptors[0].commanded_speed / self.leader.commanded_speed
    }

    fn scenario(&self, leader: Point2, interceptors: [Point2; 2]) -> AttackScenario {
        AttackScenario {
            leader,
            interceptors,
            asset: self.asset,
            beta: self.beta(),
            rho: self.rho,
            rho_s: self.rho_s,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let agents = std::iter::once(&self.leader)
            .chain(self.wingman.iter())
            .chain(self.interceptors.iter());
        for a in agents {
            a.kind.validate().map_err(SimError::InvalidSetup)?;
            if !(a.speed >= 0.0 && a.commanded_speed > 0.0) {
                return Err(SimError::InvalidSetup("speeds must be positive".into()));
            }
        }
        let (v1, v2) = (self.interceptors[0].commanded_speed, self.interceptors[1].commanded_speed);
        if (v1 - v2).abs() > 1e-12 * v1.max(v2) {
            return Err(SimError::InvalidSetup("interceptors must share one speed".into()));
        }
        self.scenario(
            self.leader.position,
            [self.interceptors[0].position, self.interceptors[1].position],
        )
        .validate()
        .map_err(|e| SimError::InvalidSetup(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackTermination {
    /// Interceptors (0-based indices) at engagement range.
    Blocked { interceptors: Vec<usize> },
    ReachedZone,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackTerminal {
    pub time: f64,
    pub termination: AttackTermination,
    pub leader: AgentDynamics,
    pub wingman: Option<AgentDynamics>,
    pub interceptors: [AgentDynamics; 2],
    /// |B_f − R_s|
    pub distance_to_asset: f64,
    pub steps: usize,
    /// Strategy solved at the initial state.
    pub initial_solution: Option<AttackSolution>,
}

impl AttackTerminal {
    pub fn simultaneous_block(&self) -> bool {
        matches!(&self.termination, AttackTermination::Blocked { interceptors } if interceptors.len() == 2)
    }
}

struct State {
    leader: AgentDynamics,
    wingman: Option<AgentDynamics>,
    interceptors: [AgentDynamics; 2],
}

impl State {
    fn snapshot(&self, ids: &AttackIds) -> Vec<(String, Point2)> {
        let mut v = vec![(ids.leader.clone(), self.leader.position)];
        if let Some(w) = &self.wingman {
            v.push((ids.wingman.clone(), w.position));
        }
        for (i, r) in self.interceptors.iter().enumerate() {
            v.push((ids.interceptors[i].clone(), r.position));
        }
        v
    }

    fn record(&self, log: &mut TrajectoryLog, idx: &[usize], t: f64) {
        let mut k = 0;
        log.record(t, idx[k], &self.leader);
        k += 1;
        if let Some(w) = &self.wingman {
            log.record(t, idx[k], w);
            k += 1;
        }
        for r in &self.interceptors {
            log.record(t, idx[k], r);
            k += 1;
        }
    }

    fn lerp(&self, next: &State, s: f64) -> State {
        State {
            leader: lerp_agent(&self.leader, &next.leader, s),
            wingman: match (&self.wingman, &next.wingman) {
                (Some(a), Some(b)) => Some(lerp_agent(a, b, s)),
                _ => None,
            },
            interceptors: [
                lerp_agent(&self.interceptors[0], &next.interceptors[0], s),
                lerp_agent(&self.interceptors[1], &next.interceptors[1], s),
            ],
        }
    }
}

/// Integrates the attack stage until a block, zone entry, or `max_time`.
pub fn run_attack_stage(
    setup: &AttackStageSetup,
    cfg: &SimConfig,
) -> Result<(TrajectoryLog, AttackTerminal), SimError> {
    cfg.validate()?;
    setup.validate()?;
    let ids = &setup.ids;
    let mut log = TrajectoryLog::default();
    let mut idx = vec![log.agent_index(&ids.leader)];
    if setup.wingman.is_some() {
        idx.push(log.agent_index(&ids.wingman));
    }
    idx.push(log.agent_index(&ids.interceptors[0]));
    idx.push(log.agent_index(&ids.interceptors[1]));

    let mut state = State {
        leader: setup.leader,
        wingman: setup.wingman,
        interceptors: setup.interceptors,
    };
    state.record(&mut log, &idx, 0.0);

    if let Some(term) = check_at_start(setup, &state, &mut log) {
        return Ok((
            log,
            terminal(setup, &state, 0.0, term, 0, None),
        ));
    }

    let max_steps = (cfg.max_time / cfg.dt).ceil() as usize;
    let mut initial_solution = None;
    for step in 0..max_steps {
        let t0 = step as f64 * cfg.dt;
        if step % cfg.replan_every == 0 {
            let scn = setup.scenario(
                state.leader.position,
                [state.interceptors[0].position, state.interceptors[1].position],
            );
            let sol = select_strategy(&scn).map_err(|e| SimError::SolverFailure {
                time: t0,
                message: e.to_string(),
                snapshot: state.snapshot(ids),
            })?;
            let lh = setup.controls[0].apply(sol.headings.leader);
            state.leader.command(lh, setup.leader.commanded_speed);
            if let Some(w) = state.wingman.as_mut() {
                w.command(lh, setup.leader.commanded_speed);
            }
            for i in 0..2 {
                let h = setup.controls[i + 1].apply(sol.headings.interceptors[i]);
                state.interceptors[i].command(h, setup.interceptors[i].commanded_speed);
            }
            if initial_solution.is_none() {
                initial_solution = Some(sol);
            }
        }

        let next = State {
            leader: step_agent(&state.leader, cfg.dt),
            wingman: state.wingman.as_ref().map(|w| step_agent(w, cfg.dt)),
            interceptors: [
                step_agent(&state.interceptors[0], cfg.dt),
                step_agent(&state.interceptors[1], cfg.dt),
            ],
        };
        let t1 = (step + 1) as f64 * cfg.dt;

        let block: Vec<Option<f64>> = (0..2)
            .map(|i| {
                first_crossing(
                    state.leader.position - state.interceptors[i].position,
                    next.leader.position - next.interceptors[i].position,
                    setup.rho,
                )
            })
            .collect();
        let zone = first_crossing(
            state.leader.position - setup.asset,
            next.leader.position - setup.asset,
            setup.rho_s,
        );
        let first_block = block.iter().flatten().fold(f64::INFINITY, |m, s| m.min(*s));

        let hit = match zone {
            Some(sz) if sz < first_block => Some((sz, true)),
            _ if first_block.is_finite() => Some((first_block, false)),
            _ => None,
        };
        let Some((s, reached_zone)) = hit else {
            state = next;
            state.record(&mut log, &idx, t1);
            continue;
        };

        let t = t0 + s * cfg.dt;
        let end = state.lerp(&next, s);
        let termination = if reached_zone {
            log.event(t, EventKind::ZoneReached, &[&ids.leader]);
            AttackTermination::ReachedZone
        } else {
            // Both count as blocking if the second reaches range within the
            // distance the pair closes in one step.
            let mut who = Vec::new();
            for i in 0..2 {
                let closing = (end.leader.speed + end.interceptors[i].speed) * cfg.dt;
                let d = end.leader.position.distance(end.interceptors[i].position);
                if d <= setup.rho + closing.max(1e-9 * setup.rho) {
                    who.push(i);
                }
            }
            let subjects: Vec<&str> = std::iter::once(ids.leader.as_str())
                .chain(who.iter().map(|&i| ids.interceptors[i].as_str()))
                .collect();
            log.event(t, EventKind::RangeReached, &subjects);
            AttackTermination::Blocked { interceptors: who }
        };
        if t > t0 {
            end.record(&mut log, &idx, t);
        }
        return Ok((log, terminal(setup, &end, t, termination, step + 1, initial_solution)));
    }

    let t = max_steps as f64 * cfg.dt;
    Ok((
        log,
        terminal(setup, &state, t, AttackTermination::Timeout, max_steps, initial_solution),
    ))
}

fn check_at_start(setup: &AttackStageSetup, state: &State, log: &mut TrajectoryLog) -> Option<AttackTermination> {
    let ids = &setup.ids;
    if state.leader.position.distance(setup.asset) <= setup.rho_s {
        log.event(0.0, EventKind::ZoneReached, &[&ids.leader]);
        return Some(AttackTermination::ReachedZone);
    }
    let who: Vec<usize> = (0..2)
        .filter(|&i| state.leader.position.distance(state.interceptors[i].position) <= setup.rho)
        .collect();
    if who.is_empty() {
        return None;
    }
    let subjects: Vec<&str> = std::iter::once(ids.leader.as_str())
        .chain(who.iter().map(|&i| ids.interceptors[i].as_str()))
        .collect();
    log.event(0.0, EventKind::RangeReached, &subjects);
    Some(AttackTermination::Blocked { interceptors: who })
}

fn terminal(
    setup: &AttackStageSetup,
    state: &State,
    time: f64,
    termination: AttackTermination,
    steps: usize,
    initial_solution: Option<AttackSolution>,
) -> AttackTerminal {
    AttackTerminal {
        time,
        termination,
        leader: state.leader,
        wingman: state.wingman,
        interceptors: state.interceptors,
        distance_to_asset: state.leader.position.distance(setup.asset),
        steps,
        initial_solution,
    }
}
