//! Attack game of the reference engagement: strategy, aimpoint, value.
//!
//!     cargo run --example solve_attack

use bvr_tactics::attack::{select_strategy, solve_cooperative, solve_solo, AttackScenario, Interceptor};
use bvr_tactics::geometry::Point2;

fn main() {
    let scn = AttackScenario {
        leader: Point2::new(-6.0, 8.0),
        interceptors: [Point2::new(15.0, 14.0), Point2::new(16.0, 6.5)],
        asset: Point2::new(15.5, 10.0),
        beta: 1.25,
        rho: 5.0,
        rho_s: 7.0,
    };

    let sol = select_strategy(&scn).expect("admissible scenario");
    println!("mode      {:?}", sol.mode);
    println!("aimpoint  ({:.6}, {:.6})", sol.aimpoint.x, sol.aimpoint.y);
    println!("value     {:.6}", sol.value);
    println!("winner    {:?}", sol.winner);
    println!("heading   B_L {:.6}", sol.headings.leader);
    for (i, h) in sol.headings.interceptors.iter().enumerate() {
        println!("          R{} {:.6}", i + 1, h);
    }

    // The alternatives the selector compared.
    let coop = solve_cooperative(&scn).unwrap();
    println!("\ncooperative value {:.6}", coop.value);
    for which in [Interceptor::First, Interceptor::Second] {
        let solo = solve_solo(&scn, which).unwrap();
        println!("solo {:?} value {:.6} at ({:.4}, {:.4})", which, solo.value, solo.aimpoint.x, solo.aimpoint.y);
    }
}
