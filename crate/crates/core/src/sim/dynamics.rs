use serde::{Deserialize, Serialize};

use crate::geometry::{shortest_arc, unit, wrap_angle, Point2};
use crate::retreat::TurnDirection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicsKind {
    #[default]
    SimpleMotion,
    HeadingLag {
        tau_heading: f64,
    },
    HeadingSpeedLag {
        tau_heading: f64,
        tau_speed: f64,
    },
}

impl DynamicsKind {
    pub fn validate(&self) -> Result<(), String> {
        let ok = |t: f64| t.is_finite() && t > 0.0;
        match *self {
            DynamicsKind::SimpleMotion => Ok(()),
            DynamicsKind::HeadingLag { tau_heading } if ok(tau_heading) => Ok(()),
            DynamicsKind::HeadingSpeedLag {
                tau_heading,
                tau_speed,
            } if ok(tau_heading) && ok(tau_speed) => Ok(()),
            _ => Err("time constants must be positive".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentDynamics {
    pub kind: DynamicsKind,
    pub position: Point2,
    pub heading: f64,
    pub speed: f64,
    pub commanded_heading: f64,
    pub commanded_speed: f64,
    /// Direction to take when the commanded heading is exactly opposite.
    pub tie_turn: Option<TurnDirection>,
}

impl AgentDynamics {
    /// Agent already flying its command.
    pub fn steady(kind: DynamicsKind, position: Point2, heading: f64, speed: f64) -> Self {
        Self {
            kind,
            position,
            heading: wrap_angle(heading),
            speed,
            commanded_heading: wrap_angle(heading),
            commanded_speed: speed,
            tie_turn: None,
        }
    }

    pub fn command(&mut self, heading: f64, speed: f64) {
        self.commanded_heading = wrap_angle(heading);
        self.commanded_speed = speed;
    }

    fn heading_error(&self) -> f64 {
        let d = shortest_arc(self.commanded_heading - self.heading);
        if d.abs() >= std::f64::consts::PI - 1e-12 {
            match self.tie_turn {
                Some(TurnDirection::Right) => -d.abs(),
                _ => d.abs(),
            }
        } else {
            d
        }
    }
}

/// Advances one step: heading and speed relax toward their commands by the
/// exact solution of the first-order lag, then the position moves along the
/// updated heading.
pub fn step_agent(agent: &AgentDynamics, dt: f64) -> AgentDynamics {
    let mut next = *agent;
    match agent.kind {
        DynamicsKind::SimpleMotion => {
            next.heading = agent.commanded_heading;
            next.speed = agent.commanded_speed;
        }
        DynamicsKind::HeadingLag { tau_heading } => {
            let k = 1.0 - (-dt / tau_heading).exp();
            next.heading = wrap_angle(agent.heading + agent.heading_error() * k);
            next.speed = agent.commanded_speed;
        }
        DynamicsKind::HeadingSpeedLag {
            tau_heading,
            tau_speed,
        } => {
            let k = 1.0 - (-dt / tau_heading).exp();
            next.heading = wrap_angle(agent.heading + agent.heading_error() * k);
            let kv = 1.0 - (-dt / tau_speed).exp();
            next.speed = (agent.speed + (agent.commanded_speed - agent.speed) * kv).max(0.0);
        }
    }
    next.position = agent.position + unit(next.heading) * (next.speed * dt);
    next
}
