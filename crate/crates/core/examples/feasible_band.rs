//! Feasible retreat headings for one attacker/defender pair, and the pair
//! game solved at a few headings inside the band.
//!
//!     cargo run --example feasible_band

use bvr_tactics::geometry::Point2;
use bvr_tactics::retreat::{feasible_band, pair_game_solve, MissilePair};

fn main() {
    let pair = MissilePair {
        attacker: Point2::new(3.0, 0.0),
        defender: Point2::new(0.0, 0.0),
        alpha: 0.5,
    };
    for leader in [Point2::new(1.5, 4.0), Point2::new(2.5, 0.5), Point2::new(0.5, 2.0)] {
        let band = match feasible_band(&pair, leader) {
            Ok(b) => b,
            Err(e) => {
                println!("B = ({}, {}): {e}", leader.x, leader.y);
                continue;
            }
        };
        println!(
            "B = ({}, {}): {:?} [{:.4}, {:.4}] chord {:?}",
            leader.x,
            leader.y,
            band.kind,
            band.lower(),
            band.upper(),
            band.chord
        );
        if band.arc.is_full() {
            continue;
        }
        for k in 1..4 {
            let th = band.arc.start + band.arc.width * k as f64 / 4.0;
            let s = pair_game_solve(&pair, leader, th).unwrap();
            println!(
                "  heading {th:7.4}: intercept ({:.4}, {:.4}), distance {:.6}",
                s.intercept.x, s.intercept.y, s.value
            );
        }
    }
}
