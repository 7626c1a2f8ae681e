use std::f64::consts::PI;

use bvr_tactics::geometry::Point2;
use bvr_tactics::retreat::{HeadingConstraint, MissilePair, RetreatScenario};
use bvr_tactics::scenario_io::parse_scenario;
use bvr_tactics::sim::{
    run_attack_stage, run_chained, run_retreat_stage, AgentDynamics, AttackTermination, DynamicsKind, EventKind,
    RetreatOutcome, RetreatStageSetup, SimConfig, SimError,
};

fn reference(name: &str) -> bvr_tactics::scenario_io::ScenarioFile {
    let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    parse_scenario(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn simple_motion_attack_reproduces_value() {
    let f = reference("reference_attack.json");
    let (_, t) = run_attack_stage(&f.attack_setup(), &f.sim).unwrap();
    assert!(t.simultaneous_block());
    let v = t.initial_solution.as_ref().unwrap().value;
    assert!((t.distance_to_asset - v).abs() < 1e-6, "{} vs {v}", t.distance_to_asset);
    // Straight-line flight to the aimpoint at unit speed.
    let aim = t.initial_solution.as_ref().unwrap().aimpoint;
    assert!((t.time - aim.distance(Point2::new(-6.0, 8.0))).abs() < 1e-6);
    assert!(t.leader.position.distance(aim) < 1e-6);
}

#[test]
fn wingman_holds_formation() {
    let f = reference("simple_chained.json");
    let (log, _) = run_attack_stage(&f.attack_setup(), &f.sim).unwrap();
    let b = log.track("B_L");
    let w = log.track("B_W");
    assert_eq!(b.len(), w.len());
    let offset = w[0].position - b[0].position;
    for (p, q) in b.iter().zip(&w) {
        assert!(((q.position - p.position) - offset).norm() < 1e-9);
    }
}

#[test]
fn start_inside_zone_ends_immediately() {
    let f = reference("reference_attack.json");
    let mut setup = f.attack_setup();
    setup.rho_s = 25.0;
    let (log, t) = run_attack_stage(&setup, &f.sim).unwrap();
    assert_eq!(t.termination, AttackTermination::ReachedZone);
    assert_eq!(t.time, 0.0);
    assert_eq!(log.events[0].kind, EventKind::ZoneReached);
}

#[test]
fn invalid_config_rejected() {
    let f = reference("reference_attack.json");
    let cfg = SimConfig { replan_every: 0, ..SimConfig::default() };
    assert!(matches!(run_attack_stage(&f.attack_setup(), &cfg), Err(SimError::InvalidConfig(_))));
}

#[test]
fn chained_run_is_consistent() {
    let f = reference("simple_chained.json");
    let (log, out) = run_chained(&f.attack_setup(), &f.retreat_spawn(), &f.sim).unwrap();
    let r = out.retreat.unwrap();
    assert_eq!(r.outcome, RetreatOutcome::Intercepted);
    let kinds: Vec<EventKind> = log.events.iter().map(|e| e.kind).collect();
    assert_eq!(
        kinds,
        [
            EventKind::RangeReached,
            EventKind::StageTransition,
            EventKind::MissileLaunch,
            EventKind::Interception,
            EventKind::Interception
        ]
    );
    // Realized composite from the per-pair distances.
    let d: Vec<f64> = r.pair_distances.iter().map(|d| d.unwrap()).collect();
    assert!((r.composite.unwrap() - (0.5 * d[0] + 0.5 * d[1])).abs() < 1e-12);
    // Simple motion realizes the predicted optimum up to discretization.
    assert!((r.composite.unwrap() - r.predicted_value).abs() < 1e-2);
    // Time strictly increases along every track.
    for id in &log.agents {
        let tr = log.track(id);
        assert!(tr.windows(2).all(|w| w[1].t > w[0].t), "{id}");
    }
    // The leader turns away from the wingman within half a turn.
    let c = out.retreat_scenario.unwrap().constraint.unwrap();
    assert!(c.arc.contains_with(r.heading, 1e-9));
}

#[test]
fn missiles_meet_on_the_bisector() {
    let pair = MissilePair {
        attacker: Point2::new(3.0, 0.0),
        defender: Point2::new(0.0, 0.0),
        alpha: 0.5,
    };
    let scenario = RetreatScenario {
        leader: Point2::new(1.5, 4.0),
        pairs: vec![pair],
        weight: 1.0,
        constraint: None,
    };
    let setup = RetreatStageSetup {
        scenario,
        leader: AgentDynamics::steady(DynamicsKind::SimpleMotion, Point2::new(1.5, 4.0), PI / 2.0, 1.0),
        retreat_speed: 1.0,
        missile_speed: 2.0,
        missile_kind: DynamicsKind::SimpleMotion,
        t0: 0.0,
        leader_id: "B".into(),
        pair_ids: RetreatStageSetup::default_ids(1),
    };
    let cfg = SimConfig { capture_eps: 1e-3, ..SimConfig::default() };
    let (log, t) = run_retreat_stage(&setup, &cfg).unwrap();
    assert_eq!(t.outcome, RetreatOutcome::Intercepted);
    let a = log.track("A1").last().unwrap().position;
    let d = log.track("D1").last().unwrap().position;
    assert!((a.x - 1.5).abs() < 2e-3 && (d.x - 1.5).abs() < 2e-3);
    assert!((t.composite.unwrap() - t.predicted_value).abs() < 5e-3);
}

#[test]
fn empty_feasible_set_is_reported() {
    let pair = MissilePair {
        attacker: Point2::new(3.0, 0.0),
        defender: Point2::new(0.0, 0.0),
        alpha: 0.5,
    };
    let b = Point2::new(1.5, 4.0);
    let setup = RetreatStageSetup {
        scenario: RetreatScenario {
            leader: b,
            pairs: vec![pair],
            weight: 1.0,
            constraint: Some(HeadingConstraint::interval(-1.0, 1.0)),
        },
        leader: AgentDynamics::steady(DynamicsKind::SimpleMotion, b, 0.0, 1.0),
        retreat_speed: 1.0,
        missile_speed: 2.0,
        missile_kind: DynamicsKind::SimpleMotion,
        t0: 0.0,
        leader_id: "B".into(),
        pair_ids: RetreatStageSetup::default_ids(1),
    };
    match run_retreat_stage(&setup, &SimConfig::default()) {
        Err(SimError::EmptyFeasibleSet(m)) => assert!(m.contains("[1.570796, 4.712389]"), "{m}"),
        other => panic!("{other:?}"),
    }
}
