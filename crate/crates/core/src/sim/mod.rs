//! Closed-loop engagement simulator.
//!
//! Agents re-solve their games from the current state every `replan_every`
//! steps, integrate their vehicle models, and stop at the first terminal
//! event. Terminal events are located inside the final step by linear
//! interpolation of the relative positions.

mod attack_stage;
mod chain;
mod dynamics;
mod log;
mod retreat_stage;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;

pub use attack_stage::{
    run_attack_stage, AttackIds, AttackStageSetup, AttackTermination, AttackTerminal, Control,
};
pub use chain::{analytic_attack_terminal, resolve_constraint, run_chained, spawn_retreat, ChainedOutcome, ConstraintSpec, RetreatSpawn};
pub use dynamics::{step_agent, AgentDynamics, DynamicsKind};
pub use log::{Event, EventKind, TrajectoryLog, TrajectoryRow};
pub use retreat_stage::{run_retreat_stage, RetreatOutcome, RetreatStageSetup, RetreatTerminal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub capture_eps: f64,
    pub replan_every: usize,
    pub max_time: f64,
    /// Re-optimize the retreat heading at every replan instead of holding
    /// the stage-start optimum.
    pub retreat_replan: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            capture_eps: 1e-2,
            replan_every: 1,
            max_time: 1000.0,
            retreat_replan: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::InvalidConfig(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.capture_eps.is_finite() && self.capture_eps > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "capture_eps must be positive (got {})",
                self.capture_eps
            )));
        }
        if self.replan_every == 0 {
            return Err(SimError::InvalidConfig("replan_every must be at least 1".into()));
        }
        if !(self.max_time.is_finite() && self.max_time > 0.0) {
            return Err(SimError::InvalidConfig("max_time must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("solver failed at t = {time}: {message}")]
    SolverFailure {
        time: f64,
        message: String,
        snapshot: Vec<(String, Point2)>,
    },
    #[error("retreat requires an attack stage that ended with a block")]
    WrongTermination,
    #[error("no feasible retreat heading: {0}")]
    EmptyFeasibleSet(String),
}

/// Earliest s ∈ [0, 1] at which |r0 + s(r1 − r0)| falls to `threshold`.
pub(crate) fn first_crossing(r0: Point2, r1: Point2, threshold: f64) -> Option<f64> {
    if r0.norm() <= threshold {
        return Some(0.0);
    }
    let d = r1 - r0;
    let a = d.norm_squared();
    let b = 2.0 * r0.dot(d);
    let c = r0.norm_squared() - threshold * threshold;
    if a > 0.0 {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let s = (-b - disc.sqrt()) / (2.0 * a);
            if (0.0..=1.0).contains(&s) {
                return Some(s);
            }
        }
    }
    if r1.norm() <= threshold {
        Some(1.0)
    } else {
        None
    }
}

pub(crate) fn lerp_agent(a: &AgentDynamics, b: &AgentDynamics, s: f64) -> AgentDynamics {
    let mut out = *b;
    out.position = a.position.lerp(b.position, s);
    out
}
