//! Closed-loop attack followed by the retreat, with first-order lags.
//! Writes trajectory.csv and events.csv into the directory given as the
//! first argument (default: current directory).
//!
//!     cargo run --release --example simulate_chained -- out/

use std::fs::File;
use std::path::PathBuf;

use bvr_tactics::scenario_io::{parse_scenario, write_trajectory};
use bvr_tactics::sim::run_chained;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let text = include_str!("../scenarios/reference_chained.json");
    let file = parse_scenario(text).expect("shipped scenario is valid");

    let t = std::time::Instant::now();
    let (log, out) = run_chained(&file.attack_setup(), &file.retreat_spawn(), &file.sim).unwrap();
    let elapsed = t.elapsed();

    let a = &out.attack;
    println!("attack:  {:?} at t = {:.4}", a.termination, a.time);
    println!("         J = {:.6}", a.distance_to_asset);
    if let Some(r) = &out.retreat {
        println!("retreat: {:?} at t = {:.4}, heading {:.4}", r.outcome, r.time, r.heading);
        println!("         J_c = {:?} (predicted {:.6})", r.composite, r.predicted_value);
        println!("         interceptions at {:?}", r.interception_times);
    }
    println!("{} samples in {:?}", log.rows.len(), elapsed);

    std::fs::create_dir_all(&dir).unwrap();
    let rows = File::create(dir.join("trajectory.csv")).unwrap();
    let events = File::create(dir.join("events.csv")).unwrap();
    write_trajectory(&log, rows, events).unwrap();
}
