use std::f64::consts::PI;

use bvr_tactics::attack::{dominance_contains, select_strategy, AttackScenario, Winner};
use bvr_tactics::geometry::{shortest_arc, unit, wrap_angle, Point2};
use bvr_tactics::retreat::{feasible_band, pair_game_solve, Arc, MissilePair};
use bvr_tactics::rootfind::{real_roots, RealPolynomial};
use bvr_tactics::scenario_io::fmt_sig;
use bvr_tactics::sim::{step_agent, AgentDynamics, DynamicsKind};
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = Point2> {
    (-r..r, -r..r).prop_map(|(x, y)| Point2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wrapped_angles(theta in -100.0f64..100.0) {
        let w = wrap_angle(theta);
        prop_assert!((-PI..PI).contains(&w));
        let turns = (theta - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
        let d = shortest_arc(theta);
        prop_assert!(d > -PI && d <= PI);
    }

    #[test]
    fn arc_intersection_lies_in_both(a in -PI..PI, wa in 0.0f64..6.2, b in -PI..PI, wb in 0.0f64..6.2, t in 0.0f64..1.0) {
        let (x, y) = (Arc { start: a, width: wa }, Arc { start: b, width: wb });
        for piece in x.intersect(&y) {
            let th = piece.start + piece.width * t;
            prop_assert!(x.contains_with(th, 1e-9) && y.contains_with(th, 1e-9));
        }
        // A heading in both arcs is covered by some piece.
        let th = a + wa * t;
        if y.contains_with(th, -1e-9) && x.contains_with(th, -1e-9) {
            prop_assert!(x.intersect(&y).iter().any(|p| p.contains_with(th, 1e-9)));
        }
    }

    #[test]
    fn polynomial_roots_recovered(mut r in prop::collection::vec(-10.0f64..10.0, 1..=5)) {
        r.sort_by(f64::total_cmp);
        prop_assume!(r.windows(2).all(|w| w[1] - w[0] > 1e-2));
        let mut c = vec![1.0];
        for root in &r {
            let mut next = vec![0.0; c.len() + 1];
            for (i, v) in c.iter().enumerate() {
                next[i] -= root * v;
                next[i + 1] += v;
            }
            c = next;
        }
        let p = RealPolynomial::new(c).unwrap();
        let found = real_roots(&p, -20.0, 20.0).unwrap().values();
        prop_assert_eq!(found.len(), r.len());
        for (f, want) in found.iter().zip(&r) {
            prop_assert!((f - want).abs() < 1e-8, "{} vs {}", f, want);
        }
    }

    #[test]
    fn attack_solution_is_consistent(
        beta in 1.1f64..2.0,
        rho in 1.0f64..4.0,
        a1 in -PI..PI, d1 in 6.0f64..25.0,
        a2 in -PI..PI, d2 in 6.0f64..25.0,
        s in point(25.0),
        rho_s in 0.5f64..15.0,
    ) {
        let scn = AttackScenario {
            leader: Point2::new(0.0, 0.0),
            interceptors: [unit(a1) * d1, unit(a2) * d2],
            asset: s,
            beta, rho, rho_s,
        };
        prop_assume!(scn.validate().is_ok() && scn.interceptors[0].distance(scn.interceptors[1]) > 0.5);
        let sol = select_strategy(&scn).unwrap();
        prop_assert!((sol.aimpoint.distance(s) - sol.value).abs() < 1e-9 * (1.0 + sol.value));
        // The aimpoint is reachable first by the leader: pull it slightly toward the leader.
        prop_assert!(dominance_contains(&scn, sol.aimpoint * (1.0 - 1e-7)));
        prop_assert_eq!(sol.winner == Winner::Blue, sol.value <= rho_s || sol.value == 0.0);
        // Leader heading points at the aimpoint.
        if sol.aimpoint.norm() > 1e-9 {
            prop_assert!(shortest_arc(sol.headings.leader - sol.aimpoint.angle()).abs() < 1e-9);
        }
    }

    #[test]
    fn pair_intercept_is_equidistant(
        d in point(5.0),
        ang in -PI..PI, dist in 1.0f64..8.0,
        b in point(8.0),
        alpha in 0.0f64..0.9,
        t in 0.05f64..0.95,
    ) {
        let pair = MissilePair { attacker: d + unit(ang) * dist, defender: d, alpha };
        let Ok(band) = feasible_band(&pair, b) else { return Ok(()) };
        let th = band.arc.start + band.arc.width * t;
        let sol = pair_game_solve(&pair, b, th).unwrap();
        let (da, dd) = (sol.intercept.distance(pair.attacker), sol.intercept.distance(pair.defender));
        prop_assert!((da - dd).abs() < 1e-9 * dist);
        // Leader position at interception, from its heading and speed ratio.
        let evader = b + unit(th) * (alpha * dd);
        prop_assert!((evader.distance(sol.intercept) - sol.value).abs() < 1e-9 * (1.0 + sol.value));
    }

    #[test]
    fn heading_lag_never_overshoots(h0 in -PI..PI, cmd in -PI..PI, tau in 0.01f64..2.0, dt in 1e-4f64..0.1) {
        let mut a = AgentDynamics::steady(DynamicsKind::HeadingLag { tau_heading: tau }, Point2::new(0.0, 0.0), h0, 1.0);
        a.command(cmd, 1.0);
        let mut err = shortest_arc(cmd - a.heading);
        for _ in 0..20 {
            a = step_agent(&a, dt);
            let e = shortest_arc(cmd - a.heading);
            prop_assert!(e.abs() <= err.abs() + 1e-12);
            prop_assert!(e * err >= -1e-12);
            err = e;
        }
    }

    #[test]
    fn printed_precision(x in -1e6f64..1e6) {
        let back: f64 = fmt_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-9 * x.abs());
    }
}
