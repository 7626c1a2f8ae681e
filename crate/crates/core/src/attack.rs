//! Attack stage: where the leader should aim, and which interceptor(s)
//! end up blocking it.
//!
//! Each interceptor's dominance boundary is a Cartesian oval around the
//! leader. The leader's reachable set is the intersection of the two
//! interiors; its best aimpoint is the point of that set closest to the
//! protected asset.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    attack_relative_frame, bisector_any, Bisector, CartesianOval, GeometryError, Point2,
    RelativeFrame,
};
use crate::rootfind::{real_roots, RealPolynomial, RootError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("invalid attack scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("dominance boundaries do not intersect")]
    NoIntersection,
    #[error("no admissible stationary point of the solo cost")]
    NoStationaryPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub leader: Point2,
    pub interceptors: [Point2; 2],
    pub asset: Point2,
    /// Interceptor-to-leader speed ratio, > 1.
    pub beta: f64,
    /// Interceptor engagement range.
    pub rho: f64,
    /// Radius of the zone the leader must reach around the asset.
    pub rho_s: f64,
}

impl AttackScenario {
    pub fn validate(&self) -> Result<(), AttackError> {
        let pts = [
            self.leader,
            self.interceptors[0],
            self.interceptors[1],
            self.asset,
        ];
        if !pts.iter().all(|p| p.is_finite())
            || !(self.beta.is_finite() && self.rho.is_finite() && self.rho_s.is_finite())
        {
            return Err(AttackError::InvalidScenario("non-finite input".into()));
        }
        if self.beta <= 1.0 {
            return Err(AttackError::InvalidScenario(format!(
                "beta must exceed 1 (got {})",
                self.beta
            )));
        }
        if self.rho <= 0.0 || self.rho_s <= 0.0 {
            return Err(AttackError::InvalidScenario(
                "rho and rho_s must be positive".into(),
            ));
        }
        for (i, r) in self.interceptors.iter().enumerate() {
            let d = self.leader.distance(*r);
            if d <= self.rho {
                return Err(AttackError::InvalidScenario(format!(
                    "interceptor {} starts within engagement range ({d} <= {})",
                    i + 1,
                    self.rho
                )));
            }
        }
        if self.interceptors[0] == self.interceptors[1] {
            return Err(AttackError::InvalidScenario(
                "interceptors coincide".into(),
            ));
        }
        Ok(())
    }

    fn oval_frame(&self, i: usize) -> Result<(RelativeFrame, CartesianOval), AttackError> {
        let frame = RelativeFrame::aligned(self.leader, self.interceptors[i])?;
        let oval = CartesianOval::new(
            self.leader.distance(self.interceptors[i]),
            self.beta,
            self.rho,
        )?;
        Ok((frame, oval))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cooperative,
    Solo1,
    Solo2,
    BisectorRestricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Headings {
    pub leader: f64,
    pub interceptors: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSolution {
    pub mode: Mode,
    pub aimpoint: Point2,
    pub headings: Headings,
    /// Distance from the aimpoint to the asset.
    pub value: f64,
    pub winner: Winner,
    /// Oval intersection points that passed the branch filter (fixed frame).
    pub cooperative_points: Vec<Point2>,
}

impl AttackSolution {
    fn at(scn: &AttackScenario, mode: Mode, aimpoint: Point2) -> Self {
        let headings = Headings {
            leader: scn.leader.heading_to(aimpoint),
            interceptors: [
                scn.interceptors[0].heading_to(aimpoint),
                scn.interceptors[1].heading_to(aimpoint),
            ],
        };
        let value = aimpoint.distance(scn.asset);
        Self {
            mode,
            aimpoint,
            headings,
            value,
            winner: Winner::Red,
            cooperative_points: Vec::new(),
        }
    }
}

/// Whether `p` lies in the leader's dominance region against both
/// interceptors (boundary included, with a small tolerance).
pub fn dominance_contains(scn: &AttackScenario, p: Point2) -> bool {
    scn.interceptors.iter().all(|r| {
        let x = scn.leader.distance(*r);
        p.distance(*r) - scn.rho - scn.beta * p.distance(scn.leader) >= -1e-9 * x
    })
}

/// Quartic in x whose real roots are the abscissae where the bisector of
/// the two interceptors meets the first oval (leader-relative frame,
/// first interceptor at (x1, 0)). Coefficients ascending.
pub fn coop_quartic(x1: f64, m: f64, n: f64, beta: f64, rho: f64) -> Result<RealPolynomial, RootError> {
    let b = 1.0 - beta * beta;
    let eta = rho * rho - x1 * x1;
    let br2 = beta * beta * rho * rho;
    let mm = 1.0 + m * m;
    let k4 = b * b * mm * mm;
    let k3 = b * mm * (b * m * n - x1);
    let k2 = b * b * n * n * (3.0 * m * m + 1.0) / 2.0
        - b * (2.0 * m * n * x1 + eta * mm / 2.0)
        + x1 * x1
        - br2 * mm;
    let k1 = b * b * m * n.powi(3) - b * n * (n * x1 + m * eta) + x1 * eta - 2.0 * br2 * m * n;
    let k0 = (b * n * n - eta).powi(2) - (2.0 * beta * rho * n).powi(2);
    RealPolynomial::new(vec![k0, 4.0 * k1, 4.0 * k2, 4.0 * k3, k4])
}

/// Quartic in y for a vertical bisector x = xv (same oval, same frame).
pub fn coop_quartic_vertical(x1: f64, xv: f64, beta: f64, rho: f64) -> Result<RealPolynomial, RootError> {
    let b = 1.0 - beta * beta;
    let eta = rho * rho - x1 * x1;
    let br2 = beta * beta * rho * rho;
    let g = b * xv * xv - 2.0 * x1 * xv - eta;
    RealPolynomial::new(vec![
        g * g - 4.0 * br2 * xv * xv,
        0.0,
        2.0 * b * g - 4.0 * br2,
        0.0,
        b * b,
    ])
}

/// Points where both inner ovals meet, in the leader-relative frame of the
/// first interceptor.
pub fn coop_intersections(
    oval: &CartesianOval,
    r2_rel: Point2,
) -> Result<Vec<Point2>, AttackError> {
    let (_, rhi) = oval.bounds()?;
    let r1 = Point2::new(oval.offset, 0.0);
    let pad = rhi * (1.0 + 1e-9) + 1e-9;
    let mut pts = Vec::new();
    match bisector_any(r1, r2_rel)? {
        Bisector::Sloped(line) => {
            let q = coop_quartic(oval.offset, line.m, line.n, oval.beta, oval.rho)?;
            if q.degree() > 0 {
                for x in real_roots(&q, -pad, pad)?.values() {
                    pts.push(line.at(x));
                }
            }
        }
        Bisector::Vertical { x } => {
            let q = coop_quartic_vertical(oval.offset, x, oval.beta, oval.rho)?;
            if q.degree() > 0 {
                for y in real_roots(&q, -pad, pad)?.values() {
                    pts.push(Point2::new(x, y));
                }
            }
        }
    }
    // Squaring admits the outer branch too; keep only inner-oval points.
    pts.retain(|p| oval.residual(*p).abs() <= 1e-6 * oval.offset);
    if pts.is_empty() {
        return Err(AttackError::NoIntersection);
    }
    Ok(pts)
}

fn lexicographic_min(a: Point2, b: Point2) -> bool {
    (a.x, a.y) < (b.x, b.y)
}

pub fn solve_cooperative(scn: &AttackScenario) -> Result<AttackSolution, AttackError> {
    scn.validate()?;
    let af = attack_relative_frame(scn.leader, scn.interceptors[0], scn.interceptors[1], scn.asset)?;
    let oval = CartesianOval::new(af.x1, scn.beta, scn.rho)?;
    let pts: Vec<Point2> = coop_intersections(&oval, af.r2)?
        .into_iter()
        .map(|p| af.frame.to_fixed(p))
        .collect();
    let mut best = pts[0];
    for &p in &pts[1..] {
        let (dp, db) = (p.distance(scn.asset), best.distance(scn.asset));
        if dp < db - 1e-12 * db.max(1.0) || ((dp - db).abs() <= 1e-12 * db.max(1.0) && lexicographic_min(p, best)) {
            best = p;
        }
    }
    let mut sol = AttackSolution::at(scn, Mode::Cooperative, best);
    sol.cooperative_points = pts;
    sol.winner = winner(scn, sol.value);
    Ok(sol)
}

/// Sextic in r whose admissible roots are stationary radii of the
/// single-interceptor cost. Coefficients ascending.
pub fn solo_sextic(x1: f64, beta: f64, rho: f64, d_s: f64, phi: f64) -> Result<RealPolynomial, RootError> {
    let b = 1.0 - beta * beta;
    let eta = rho * rho - x1 * x1;
    let (s, c) = phi.sin_cos();
    let s2 = s * s;
    let p = b * c;
    let q = x1 / d_s;
    let br = beta * rho;
    let br2 = br * br;
    let x2 = x1 * x1;
    let w = b * b + q * (q - 2.0 * p);
    let k6 = b * b * w;
    let k5 = -2.0 * b * br * (3.0 * b * b + q * (2.0 * q - 5.0 * p));
    let k4 = br2 * (13.0 * b * b + 4.0 * q * (q - 4.0 * p)) - 2.0 * (b * eta + 2.0 * x2) * w;
    let k3 = 4.0
        * br
        * (br2 * (2.0 * q * c - 3.0 * b)
            + b * eta * (2.0 * b - 3.0 * q * c)
            + x2 * (eta / (d_s * d_s) + b * (2.0 + s2) - 2.0 * q * c));
    let k2 = 2.0 * br2 * (2.0 * br2 - 2.0 * x2 * (1.0 + s2) + eta * (4.0 * q * c - 5.0 * b))
        + eta * eta * w
        + 4.0 * x2 * s2 * (x2 + b * eta);
    let k1 = 4.0 * br * (eta * (br2 - x2 * s2) + 0.5 * eta * eta * (q * c - b));
    let k0 = (br * eta).powi(2);
    RealPolynomial::new(vec![k0, k1, k2, k3, k4, k5, k6])
}

/// Single-interceptor problem in the leader-relative frame of that
/// interceptor: asset at polar (d_s, φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoloGeometry {
    pub oval: CartesianOval,
    pub d_s: f64,
    pub phi: f64,
}

impl SoloGeometry {
    /// br² − 2βρr − η
    fn c_term(&self, r: f64) -> f64 {
        let o = &self.oval;
        o.b() * r * r - 2.0 * o.beta * o.rho * r - o.eta()
    }

    /// Oval point at radius r on the asset's side of the x-axis.
    pub fn point_at(&self, r: f64) -> Point2 {
        let cos_t = if r > 0.0 {
            (self.c_term(r) / (2.0 * self.oval.offset * r)).clamp(-1.0, 1.0)
        } else {
            1.0
        };
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let zeta = if self.phi.sin() < 0.0 { -1.0 } else { 1.0 };
        Point2::new(r * cos_t, zeta * r * sin_t)
    }

    /// Squared distance from the oval point at radius r to the asset.
    pub fn cost(&self, r: f64) -> f64 {
        let x1 = self.oval.offset;
        let c = self.c_term(r);
        let root = (4.0 * x1 * x1 * r * r - c * c).max(0.0).sqrt();
        let (s, co) = self.phi.sin_cos();
        self.d_s * self.d_s + r * r - (self.d_s / x1) * (co * c + s.abs() * root)
    }

    /// Un-squared stationarity condition, made dimensionless.
    pub fn stationarity_residual(&self, r: f64) -> f64 {
        let o = &self.oval;
        let x1 = o.offset;
        let c = self.c_term(r);
        let qf = o.b() * r - o.beta * o.rho;
        let root = (4.0 * x1 * x1 * r * r - c * c).max(0.0).sqrt();
        let (s, co) = self.phi.sin_cos();
        let lhs = s.abs() * (2.0 * x1 * x1 * r - c * qf);
        let rhs = ((x1 / self.d_s) * r - co * qf) * root;
        (lhs - rhs) / x1.powi(3)
    }

    /// Admissible stationary radii within the oval's radius bounds.
    pub fn stationary_radii(&self) -> Result<Vec<f64>, AttackError> {
        let (lo, hi) = self.oval.bounds()?;
        let p = solo_sextic(self.oval.offset, self.oval.beta, self.oval.rho, self.d_s, self.phi)?;
        let radii: Vec<f64> = real_roots(&p, lo, hi)?
            .values()
            .into_iter()
            .filter(|&r| self.stationarity_residual(r).abs() <= 1e-6)
            .collect();
        if radii.is_empty() {
            return Err(AttackError::NoStationaryPoint);
        }
        Ok(radii)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interceptor {
    First,
    Second,
}

impl Interceptor {
    pub fn index(self) -> usize {
        match self {
            Interceptor::First => 0,
            Interceptor::Second => 1,
        }
    }
}

/// Best aimpoint against a single interceptor, ignoring the other.
pub fn solve_solo(scn: &AttackScenario, which: Interceptor) -> Result<AttackSolution, AttackError> {
    scn.validate()?;
    let i = which.index();
    let mode = if i == 0 { Mode::Solo1 } else { Mode::Solo2 };
    let (frame, oval) = scn.oval_frame(i)?;
    let asset = frame.to_relative(scn.asset);

    // Already inside this interceptor's dominance region: go straight in.
    if oval.residual(asset) > 0.0 {
        let mut sol = AttackSolution::at(scn, mode, scn.asset);
        sol.winner = winner(scn, sol.value);
        return Ok(sol);
    }

    let geo = SoloGeometry {
        oval,
        d_s: asset.norm(),
        phi: asset.angle(),
    };
    let (lo, hi) = oval.bounds()?;
    let mut candidates = vec![lo, hi];
    match geo.stationary_radii() {
        Ok(r) => candidates.extend(r),
        Err(AttackError::NoStationaryPoint) => {}
        Err(e) => return Err(e),
    }
    let best = candidates
        .into_iter()
        .map(|r| {
            let p = geo.point_at(r);
            (p.distance(asset), p)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p)
        .expect("candidate list is non-empty");
    let mut sol = AttackSolution::at(scn, mode, frame.to_fixed(best));
    sol.winner = winner(scn, sol.value);
    Ok(sol)
}

fn winner(scn: &AttackScenario, value: f64) -> Winner {
    if value <= scn.rho_s || dominance_contains(scn, scn.asset) {
        Winner::Blue
    } else {
        Winner::Red
    }
}

/// Chooses between the cooperative and solo solutions by testing whether
/// each solo aimpoint also lies in the other interceptor's region.
pub fn select_strategy(scn: &AttackScenario) -> Result<AttackSolution, AttackError> {
    scn.validate()?;
    let solo = [
        solve_solo(scn, Interceptor::First)?,
        solve_solo(scn, Interceptor::Second)?,
    ];
    let inside = [
        dominance_contains(scn, solo[0].aimpoint),
        dominance_contains(scn, solo[1].aimpoint),
    ];
    let coop = match solve_cooperative(scn) {
        Ok(c) => Some(c),
        Err(AttackError::NoIntersection) => None,
        Err(e) => return Err(e),
    };
    let [s1, s2] = solo;
    let cheaper = |a: AttackSolution, b: AttackSolution| if b.value < a.value { b } else { a };
    let mut sol = match (coop, inside) {
        (Some(c), [false, false]) => c,
        (_, [true, false]) => s1,
        (_, [false, true]) => s2,
        (coop, [true, true]) => {
            let pts = coop.map(|c| c.cooperative_points).unwrap_or_default();
            let best = cheaper(s1, s2);
            let mut s = AttackSolution::at(scn, Mode::BisectorRestricted, best.aimpoint);
            s.cooperative_points = pts;
            s
        }
        // Nested boundaries with neither solo aimpoint admissible cannot
        // arise geometrically; keep the solution that is worse for the leader.
        (None, [false, false]) => {
            if s1.value >= s2.value {
                s1
            } else {
                s2
            }
        }
    };
    sol.winner = winner(scn, sol.value);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference() -> AttackScenario {
        AttackScenario {
            leader: Point2::new(-6.0, 8.0),
            interceptors: [Point2::new(15.0, 14.0), Point2::new(16.0, 6.5)],
            asset: Point2::new(15.5, 10.0),
            beta: 1.25,
            rho: 5.0,
            rho_s: 7.0,
        }
    }

    /// Closest point of the dominance region to the asset by dense polar
    /// scan of its boundary (the region is star-shaped about the leader).
    fn dense_oracle(scn: &AttackScenario, n: usize) -> (f64, Point2) {
        let mut best = (f64::INFINITY, Point2::ORIGIN);
        for k in 0..n {
            let th = -PI + 2.0 * PI * k as f64 / n as f64;
            let mut r = f64::INFINITY;
            for ri in scn.interceptors {
                let lam = scn.leader.heading_to(ri);
                let o = CartesianOval::new(scn.leader.distance(ri), scn.beta, scn.rho).unwrap();
                r = r.min(o.inner_radius(th - lam).unwrap());
            }
            let p = scn.leader + Point2::from_polar(r, th);
            let d = p.distance(scn.asset);
            if d < best.0 {
                best = (d, p);
            }
        }
        best
    }

    #[test]
    fn reference_cooperative() {
        let scn = reference();
        let sol = select_strategy(&scn).unwrap();
        assert_eq!(sol.mode, Mode::Cooperative);
        assert_eq!(sol.winner, Winner::Red);
        let (v, p) = dense_oracle(&scn, 400_000);
        assert!((sol.value - v).abs() < 1e-4, "{} vs {v}", sol.value);
        assert!(sol.aimpoint.distance(p) < 1e-3);
    }

    #[test]
    fn intersections_equidistant() {
        let scn = reference();
        let sol = solve_cooperative(&scn).unwrap();
        for p in &sol.cooperative_points {
            let d1 = p.distance(scn.interceptors[0]);
            let d2 = p.distance(scn.interceptors[1]);
            assert!((d1 - d2).abs() < 1e-8);
            assert!((d1 - scn.rho - scn.beta * p.distance(scn.leader)).abs() < 1e-6);
        }
    }

    #[test]
    fn solo_matches_dense_scan() {
        let mut scn = reference();
        // Move the second interceptor far away so the first acts alone.
        scn.interceptors[1] = Point2::new(200.0, -150.0);
        let sol = select_strategy(&scn).unwrap();
        assert_eq!(sol.mode, Mode::Solo1);
        let (v, _) = dense_oracle(&scn, 400_000);
        assert!((sol.value - v).abs() < 1e-4);
    }

    #[test]
    fn solo_cost_matches_geometry() {
        let geo = SoloGeometry {
            oval: CartesianOval::new(9.0, 1.4, 2.0).unwrap(),
            d_s: 6.0,
            phi: -2.0,
        };
        let asset = Point2::from_polar(geo.d_s, geo.phi);
        let (lo, hi) = geo.oval.bounds().unwrap();
        for k in 0..=20 {
            let r = lo + (hi - lo) * k as f64 / 20.0;
            let p = geo.point_at(r);
            assert!(geo.oval.residual(p).abs() < 1e-9);
            assert!((geo.cost(r) - p.distance(asset).powi(2)).abs() < 1e-6);
        }
    }

    #[test]
    fn vertical_bisector_cooperative() {
        let scn = AttackScenario {
            leader: Point2::new(0.0, 0.0),
            interceptors: [Point2::new(12.0, 0.0), Point2::new(-12.0, 0.0)],
            asset: Point2::new(0.0, 20.0),
            beta: 1.2,
            rho: 2.0,
            rho_s: 0.5,
        };
        let sol = select_strategy(&scn).unwrap();
        assert_eq!(sol.mode, Mode::Cooperative);
        assert_eq!(sol.cooperative_points.len(), 2);
        for p in &sol.cooperative_points {
            assert!(p.x.abs() < 1e-9);
        }
        assert!(sol.aimpoint.y > 0.0);
        let (v, _) = dense_oracle(&scn, 400_000);
        assert!((sol.value - v).abs() < 1e-4);
    }

    #[test]
    fn asset_inside_region_is_blue() {
        let mut scn = reference();
        scn.asset = Point2::new(-5.0, 8.5);
        let sol = select_strategy(&scn).unwrap();
        assert_eq!(sol.winner, Winner::Blue);
        assert!(sol.value < 1e-12);
    }

    #[test]
    fn rejects_start_inside_range() {
        let mut scn = reference();
        scn.interceptors[0] = scn.leader + Point2::new(4.0, 0.0);
        assert!(matches!(
            select_strategy(&scn),
            Err(AttackError::InvalidScenario(_))
        ));
    }
}
