use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

use super::dynamics::AgentDynamics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RangeReached,
    ZoneReached,
    MissileLaunch,
    Interception,
    Capture,
    StageTransition,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::RangeReached => "range_reached",
            EventKind::ZoneReached => "zone_reached",
            EventKind::MissileLaunch => "missile_launch",
            EventKind::Interception => "interception",
            EventKind::Capture => "capture",
            EventKind::StageTransition => "stage_transition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub subjects: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    /// Index into [`TrajectoryLog::agents`].
    pub agent: usize,
    pub position: Point2,
    pub heading: f64,
    pub speed: f64,
}

/// Per-step samples for every live agent plus discrete events.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub agents: Vec<String>,
    pub rows: Vec<TrajectoryRow>,
    pub events: Vec<Event>,
}

impl TrajectoryLog {
    pub fn agent_index(&mut self, id: &str) -> usize {
        match self.agents.iter().position(|a| a == id) {
            Some(i) => i,
            None => {
                self.agents.push(id.to_string());
                self.agents.len() - 1
            }
        }
    }

    pub fn record(&mut self, t: f64, agent: usize, state: &AgentDynamics) {
        self.rows.push(TrajectoryRow {
            t,
            agent,
            position: state.position,
            heading: state.heading,
            speed: state.speed,
        });
    }

    pub fn event(&mut self, t: f64, kind: EventKind, subjects: &[&str]) {
        self.events.push(Event {
            t,
            kind,
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
        });
    }

    /// Samples of one agent in time order.
    pub fn track(&self, id: &str) -> Vec<TrajectoryRow> {
        match self.agents.iter().position(|a| a == id) {
            Some(i) => self.rows.iter().filter(|r| r.agent == i).copied().collect(),
            None => Vec::new(),
        }
    }

    pub fn last_time(&self, agent: usize) -> Option<f64> {
        self.rows.iter().rev().find(|r| r.agent == agent).map(|r| r.t)
    }

    /// Appends another log, remapping agent ids and dropping samples that
    /// would not advance an agent's time series.
    pub fn append(&mut self, other: TrajectoryLog) {
        let map: Vec<usize> = other.agents.iter().map(|a| self.agent_index(a)).collect();
        let mut last: Vec<Option<f64>> = (0..self.agents.len()).map(|i| self.last_time(i)).collect();
        for mut r in other.rows {
            r.agent = map[r.agent];
            if last[r.agent].is_some_and(|t| r.t <= t) {
                continue;
            }
            last[r.agent] = Some(r.t);
            self.rows.push(r);
        }
        self.events.extend(other.events);
    }
}
