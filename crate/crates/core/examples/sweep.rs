//! Winner as a function of the zone radius rho_s, evaluated in parallel.
//!
//!     cargo run --release --example sweep

use bvr_tactics::attack::select_strategy;
use bvr_tactics::scenario_io::parse_scenario;
use rayon::prelude::*;

fn main() {
    let file = parse_scenario(include_str!("../scenarios/reference_attack.json")).unwrap();
    let base = file.attack_scenario();
    let radii: Vec<f64> = (0..=16).map(|k| 12.0 + 0.25 * k as f64).collect();
    let rows: Vec<_> = radii
        .par_iter()
        .map(|&rho_s| {
            let mut scn = base;
            scn.rho_s = rho_s;
            (rho_s, select_strategy(&scn))
        })
        .collect();
    println!("rho_s,mode,value,winner");
    for (rho_s, r) in rows {
        match r {
            Ok(s) => println!("{rho_s},{:?},{:.6},{:?}", s.mode, s.value, s.winner),
            Err(e) => println!("{rho_s},,,{e}"),
        }
    }
}
