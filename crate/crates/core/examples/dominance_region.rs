//! Traces the leader's dominance region: the inner Cartesian ovals of both
//! interceptors and their intersection, printed as CSV (theta,r).
//!
//!     cargo run --example dominance_region > region.csv

use bvr_tactics::attack::{coop_intersections, dominance_contains, AttackScenario};
use bvr_tactics::geometry::{attack_relative_frame, CartesianOval, Point2};

fn main() {
    let scn = AttackScenario {
        leader: Point2::new(-6.0, 8.0),
        interceptors: [Point2::new(15.0, 14.0), Point2::new(16.0, 6.5)],
        asset: Point2::new(15.5, 10.0),
        beta: 1.25,
        rho: 5.0,
        rho_s: 7.0,
    };
    let frame = attack_relative_frame(scn.leader, scn.interceptors[0], scn.interceptors[1], scn.asset).unwrap();
    let oval1 = CartesianOval::new(frame.x1, scn.beta, scn.rho).unwrap();
    let oval2_offset = frame.r2.norm();
    let oval2 = CartesianOval::new(oval2_offset, scn.beta, scn.rho).unwrap();
    let rot2 = frame.r2.angle();

    println!("theta,r1,r2,region");
    let n = 360;
    for k in 0..n {
        let th = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let r1 = oval1.inner_radius(th).unwrap();
        let r2 = oval2.inner_radius(th - rot2).unwrap();
        println!("{th:.6},{r1:.6},{r2:.6},{:.6}", r1.min(r2));
    }

    let pts = coop_intersections(&oval1, frame.r2).unwrap();
    for p in pts {
        let fixed = frame.frame.to_fixed(p);
        eprintln!(
            "boundary intersection ({:.6}, {:.6}) inside={}",
            fixed.x,
            fixed.y,
            dominance_contains(&scn, fixed)
        );
    }
}
