//! Retreat game after the reference attack: two missile pairs, turn-away
//! constraint, optimal retreat heading and composite cost.
//!
//!     cargo run --example solve_retreat

use bvr_tactics::geometry::Point2;
use bvr_tactics::retreat::{
    composite_cost, optimize_heading, HeadingConstraint, MissilePair, RetreatScenario,
};

fn main() {
    // Blocked at the cooperative aimpoint; interceptors at engagement range.
    let leader = Point2::new(1.60512699, 8.39735396);
    let wingman = Point2::new(0.20512699, 6.59735396);
    let attackers = [Point2::new(6.21788495, 10.32672277), Point2::new(6.56225362, 7.7439669)];
    let attack_heading = 0.0522002;

    let scn = RetreatScenario {
        leader,
        pairs: attackers
            .iter()
            .map(|&a| MissilePair { attacker: a, defender: wingman, alpha: 0.5 })
            .collect(),
        weight: 0.5,
        constraint: Some(HeadingConstraint::turn_away(attack_heading, leader, wingman)),
    };

    let opt = optimize_heading(&scn).expect("feasible");
    println!("theta*    {:.6} rad", opt.heading);
    println!("J_c       {:.6}", opt.value);
    println!("constraint active: {}", opt.constraint_active);
    for (i, (p, b)) in opt.pairs.iter().zip(&opt.bands).enumerate() {
        println!(
            "pair {}: value {:.6}, intercept ({:.4}, {:.4}), band [{:.4}, {:.4}] {:?}",
            i + 1,
            p.value,
            p.intercept.x,
            p.intercept.y,
            b.lower(),
            b.upper(),
            b.kind
        );
    }

    println!("\ncomposite cost over the admissible headings:");
    for arc in &opt.admissible {
        for k in 0..=8 {
            let th = arc.start + arc.width * k as f64 / 8.0;
            if let Ok(j) = composite_cost(&scn, th) {
                println!("  {th:8.4} {j:.6}");
            }
        }
    }
}
