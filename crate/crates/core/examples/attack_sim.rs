//! Attack stage alone under simple motion, compared against the analytic
//! value, plus a leader that deviates from its optimal heading.
//!
//!     cargo run --release --example attack_sim

use bvr_tactics::scenario_io::parse_scenario;
use bvr_tactics::sim::{run_attack_stage, Control};

fn main() {
    let file = parse_scenario(include_str!("../scenarios/reference_attack.json")).unwrap();
    let cfg = file.sim;

    let (_, t) = run_attack_stage(&file.attack_setup(), &cfg).unwrap();
    let v = t.initial_solution.as_ref().unwrap().value;
    println!("analytic V = {v:.6}");
    println!("simulated  = {:.6} ({:?} at t = {:.4})", t.distance_to_asset, t.termination, t.time);

    for offset in [-0.1, 0.1] {
        let mut setup = file.attack_setup();
        setup.controls[0] = Control::FeedbackOffset { offset };
        let (_, t) = run_attack_stage(&setup, &cfg).unwrap();
        println!("leader offset {offset:+}: J = {:.6}", t.distance_to_asset);
    }
}
