//! Loading scenario files: a valid file, then the diagnostics produced by
//! broken ones.
//!
//!     cargo run --example scenario_file

use bvr_tactics::scenario_io::{parse_scenario, to_json};

fn main() {
    let text = include_str!("../scenarios/reference_chained.json");
    let file = parse_scenario(text).unwrap();
    println!("stage {:?}, {} agents, beta {:?}, alpha {:?}", file.stage, file.agents.len(), file.parameters.beta, file.parameters.alpha);
    println!("{}", to_json(&file));

    let broken = [
        ("slow interceptors", text.replace("\"beta\": 1.25", "\"beta\": 0.9")),
        ("typo", text.replace("\"rho_s\"", "\"rhos\"")),
        ("interceptor too close", text.replace("[15.0, 14.0]", "[-4.0, 9.0]")),
    ];
    for (what, t) in broken {
        let err = parse_scenario(&t).unwrap_err();
        println!("{what}:");
        for d in err.diagnostics() {
            println!("  {d}");
        }
    }
}
