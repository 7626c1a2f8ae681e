//! Retreat stage: the leader runs from attacker missiles while defender
//! missiles, fired from the wingman, try to intercept them first.
//!
//! Each attacker/defender pair is analyzed in its own frame: defender at
//! the origin, attacker at (x_A, 0). With equal missile speeds every
//! interception happens on the bisector x = x_m = x_A/2.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{shortest_arc, unit, wrap_angle, GeometryError, Point2, RelativeFrame};
use crate::rootfind::{real_roots, RealPolynomial, RootError};
use crate::search::golden_section_max;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetreatError {
    #[error("invalid retreat scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("no heading lets the defender intercept the attacker")]
    NoFeasibleHeading,
    #[error("heading {heading} lies outside the feasible band")]
    InfeasibleHeading { heading: f64 },
    #[error("evader path is parallel to the attacker/defender bisector")]
    PathParallelToBisector,
    #[error("no admissible stationary point of the pair cost")]
    NoStationaryPoint,
    #[error("feasible headings and the heading constraint do not overlap")]
    EmptyFeasibleSet {
        bands: Vec<Option<FeasibleBand>>,
        constraint: Option<HeadingConstraint>,
    },
}

/// Angular arc starting at `start` and sweeping counter-clockwise by `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub width: f64,
}

impl Arc {
    pub fn full() -> Self {
        Self {
            start: -PI,
            width: TAU,
        }
    }

    /// Arc from `lower` counter-clockwise to `upper`.
    pub fn between(lower: f64, upper: f64) -> Self {
        let mut width = (upper - lower).rem_euclid(TAU);
        if width == 0.0 && upper != lower {
            width = TAU;
        }
        Self {
            start: wrap_angle(lower),
            width,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    pub fn is_full(&self) -> bool {
        self.width >= TAU
    }

    /// Offset of `theta` from the start, in [0, 2π).
    fn offset(&self, theta: f64) -> f64 {
        (theta - self.start).rem_euclid(TAU)
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.contains_with(theta, 0.0)
    }

    pub fn contains_with(&self, theta: f64, slack: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let d = self.offset(theta);
        d <= self.width + slack || d >= TAU - slack
    }

    /// Intersection, possibly in two pieces.
    pub fn intersect(&self, other: &Arc) -> Vec<Arc> {
        if self.is_full() {
            return vec![*other];
        }
        if other.is_full() {
            return vec![*self];
        }
        let d = self.offset(other.start);
        let mut out = Vec::new();
        for shift in [d, d - TAU] {
            let lo = shift.max(0.0);
            let hi = (shift + other.width).min(self.width);
            if hi > lo {
                out.push(Arc {
                    start: self.start + lo,
                    width: hi - lo,
                });
            } else if hi == lo && other.width > 0.0 && self.width > 0.0 && lo >= 0.0 && lo <= self.width {
                out.push(Arc {
                    start: self.start + lo,
                    width: 0.0,
                });
            }
        }
        out.dedup_by(|a, b| (a.start - b.start).abs() < 1e-15 && a.width == b.width);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnDirection {
    Left,
    Right,
}

/// Admissible evader headings independent of the missile geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadingConstraint {
    pub arc: Arc,
    /// Turn direction implied by the constraint, used to break the tie of an
    /// exact half-turn.
    pub turn: Option<TurnDirection>,
}

impl HeadingConstraint {
    pub fn interval(lower: f64, upper: f64) -> Self {
        Self {
            arc: Arc::between(lower, upper),
            turn: None,
        }
    }

    /// Headings reachable by turning away from the wingman, up to a full
    /// reversal of `reference` (the heading at the end of the attack).
    pub fn turn_away(reference: f64, leader: Point2, wingman: Point2) -> Self {
        let side = unit(reference).cross(wingman - leader);
        let turn = if side < 0.0 {
            TurnDirection::Left
        } else {
            TurnDirection::Right
        };
        Self::turn(reference, turn)
    }

    pub fn turn(reference: f64, turn: TurnDirection) -> Self {
        let arc = match turn {
            TurnDirection::Left => Arc {
                start: wrap_angle(reference),
                width: PI,
            },
            TurnDirection::Right => Arc {
                start: wrap_angle(reference - PI),
                width: PI,
            },
        };
        Self {
            arc,
            turn: Some(turn),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissilePair {
    pub attacker: Point2,
    pub defender: Point2,
    /// Evader-to-missile speed ratio, in [0, 1).
    pub alpha: f64,
}

impl MissilePair {
    pub fn validate(&self) -> Result<(), RetreatError> {
        if !(self.attacker.is_finite() && self.defender.is_finite() && self.alpha.is_finite()) {
            return Err(RetreatError::InvalidScenario("non-finite input".into()));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(RetreatError::InvalidScenario(format!(
                "alpha must lie in [0, 1) (got {})",
                self.alpha
            )));
        }
        if self.attacker == self.defender {
            return Err(RetreatError::InvalidScenario(
                "attacker and defender coincide".into(),
            ));
        }
        Ok(())
    }

    fn frame(&self) -> Result<(RelativeFrame, f64), RetreatError> {
        let f = RelativeFrame::aligned(self.defender, self.attacker)?;
        Ok((f, self.defender.distance(self.attacker)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// Evader on the attacker's side of the bisector: it must cross the
    /// bisector inside the chord cut by its Apollonius circle.
    TowardChord,
    /// Evader already on the defender's side: any heading that does not
    /// leave through the chord.
    AwayFromChord,
    /// Evader on the defender's side and its Apollonius circle misses the
    /// bisector: every heading is feasible.
    Unrestricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBand {
    pub arc: Arc,
    pub kind: BandKind,
    /// Chord ends on the bisector (pair frame ordinates), lower first.
    pub chord: Option<(f64, f64)>,
    /// Fixed-frame headings toward the chord ends, matching `chord`.
    pub chord_headings: Option<(f64, f64)>,
}

impl FeasibleBand {
    pub fn lower(&self) -> f64 {
        self.arc.start
    }

    pub fn upper(&self) -> f64 {
        self.arc.end()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.arc.contains_with(theta, 1e-12)
    }
}

struct PairGeometry {
    frame: RelativeFrame,
    x_a: f64,
    x_m: f64,
    b: Point2,
    alpha: f64,
}

impl PairGeometry {
    fn new(pair: &MissilePair, leader: Point2) -> Result<Self, RetreatError> {
        pair.validate()?;
        if !leader.is_finite() {
            return Err(RetreatError::InvalidScenario("non-finite leader".into()));
        }
        let (frame, x_a) = pair.frame()?;
        Ok(Self {
            frame,
            x_a,
            x_m: 0.5 * x_a,
            b: frame.to_relative(leader),
            alpha: pair.alpha,
        })
    }

    fn radicand(&self) -> f64 {
        let a2 = self.alpha * self.alpha;
        let (xb, yb) = (self.b.x, self.b.y);
        a2 * ((xb - self.x_a).powi(2) + yb * yb) - ((1.0 - a2) * self.x_m - xb + a2 * self.x_a).powi(2)
    }

    fn chord(&self) -> Option<(f64, f64)> {
        let rad = self.radicand();
        if rad < 0.0 {
            return None;
        }
        let k = 1.0 - self.alpha * self.alpha;
        let s = rad.sqrt();
        Some(((self.b.y - s) / k, (self.b.y + s) / k))
    }

    fn heading_to(&self, y: f64) -> f64 {
        let rel = (Point2::new(self.x_m, y) - self.b).angle();
        self.frame.heading_to_fixed(rel)
    }

    fn relative_heading(&self, theta: f64) -> f64 {
        self.frame.heading_to_relative(theta)
    }

    fn on_attacker_side(&self) -> bool {
        self.b.x >= self.x_m
    }

    /// Leader position when the missiles meet at (x_m, y), given its heading.
    fn evader_at(&self, y: f64, theta_rel: f64) -> Point2 {
        let s = (self.x_m * self.x_m + y * y).sqrt();
        self.b + unit(theta_rel) * (self.alpha * s)
    }

    fn cost(&self, y: f64, theta_rel: f64) -> f64 {
        (Point2::new(self.x_m, y) - self.evader_at(y, theta_rel)).norm_squared()
    }

    /// s·[(1+α²)y − y_B] − α·R(y): the derivative of the cost, scaled by
    /// s = √(x_m² + y²) and made dimensionless.
    fn stationarity_residual(&self, y: f64, theta_rel: f64) -> f64 {
        let u = unit(theta_rel);
        let a = self.alpha;
        let s = (self.x_m * self.x_m + y * y).sqrt();
        let l = (1.0 + a * a) * y - self.b.y;
        let r = 2.0 * u.y * y * y + ((self.x_m - self.b.x) * u.x - self.b.y * u.y) * y + self.x_m * self.x_m * u.y;
        let scale = (s * l).abs() + (a * r).abs() + self.x_a * self.x_a;
        (s * l - a * r) / scale
    }

    /// Newton on the un-squared condition s·L − α·R, whose roots are simple
    /// even where the quartic has a double root.
    fn refine(&self, y0: f64, theta_rel: f64) -> f64 {
        let u = unit(theta_rel);
        let a = self.alpha;
        let k1 = (self.x_m - self.b.x) * u.x - self.b.y * u.y;
        let g = |y: f64| {
            let s = (self.x_m * self.x_m + y * y).sqrt();
            let l = (1.0 + a * a) * y - self.b.y;
            let r = 2.0 * u.y * y * y + k1 * y + self.x_m * self.x_m * u.y;
            let dg = (y / s) * l + s * (1.0 + a * a) - a * (4.0 * u.y * y + k1);
            (s * l - a * r, dg)
        };
        let mut y = y0;
        let (mut gy, mut dg) = g(y);
        for _ in 0..8 {
            if dg == 0.0 || !dg.is_finite() {
                break;
            }
            let next = y - gy / dg;
            let (gn, dn) = g(next);
            if !(gn.abs() < gy.abs()) {
                break;
            }
            (y, gy, dg) = (next, gn, dn);
        }
        y
    }

    /// α²R² − (x_m² + y²)L²; its real roots contain every stationary point
    /// of the cost.
    fn quartic(&self, theta_rel: f64) -> Result<RealPolynomial, RootError> {
        let u = unit(theta_rel);
        let a = self.alpha;
        let xm2 = self.x_m * self.x_m;
        let l = RealPolynomial::new(vec![-self.b.y, 1.0 + a * a])?;
        let s2 = RealPolynomial::new(vec![xm2, 0.0, 1.0])?;
        let r = RealPolynomial::new(vec![
            a * xm2 * u.y,
            a * ((self.x_m - self.b.x) * u.x - self.b.y * u.y),
            a * 2.0 * u.y,
        ])?;
        let l2 = RealPolynomial::new(l.mul(&l))?;
        let neg = RealPolynomial::new(l2.mul(&s2))?;
        let pos = r.mul(&r);
        let mut c = vec![0.0; 5];
        for (i, v) in pos.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in neg.coeffs().iter().enumerate() {
            c[i] -= v;
        }
        RealPolynomial::new(c)
    }
}

/// Coefficients (c₄, c₃, c₂, c₁, c₀) of the pair quartic
/// c₄y⁴ + 2c₃y³ + c₂y² + 2c₁y + c₀ for a leader at `leader` with heading `theta`.
pub fn retreat_quartic_coefficients(pair: &MissilePair, leader: Point2, theta: f64) -> Result<[f64; 5], RetreatError> {
    let g = PairGeometry::new(pair, leader)?;
    let q = g.quartic(g.relative_heading(theta))?;
    let mut c = [0.0; 5];
    for (i, v) in q.coeffs().iter().enumerate() {
        c[i] = *v;
    }
    Ok([c[4], c[3] / 2.0, c[2], c[1] / 2.0, c[0]])
}

pub fn feasible_band(pair: &MissilePair, leader: Point2) -> Result<FeasibleBand, RetreatError> {
    let g = PairGeometry::new(pair, leader)?;
    let chord = g.chord();
    let chord_headings = chord.map(|(lo, hi)| (g.heading_to(lo), g.heading_to(hi)));

    if g.on_attacker_side() {
        let (ylo, yhi) = chord.ok_or(RetreatError::NoFeasibleHeading)?;
        let arc = if (g.b.x - g.x_m).abs() <= 1e-12 * g.x_a {
            // Sitting on the bisector: every heading into the defender's half.
            let up = g.frame.heading_to_fixed(PI / 2.0);
            Arc { start: up, width: PI }
        } else {
            chord_arc(&g, ylo, yhi)
        };
        return Ok(FeasibleBand {
            arc,
            kind: BandKind::TowardChord,
            chord,
            chord_headings,
        });
    }

    match chord {
        Some((ylo, yhi)) if yhi > ylo => {
            let toward = chord_arc(&g, ylo, yhi);
            Ok(FeasibleBand {
                arc: Arc {
                    start: wrap_angle(toward.end()),
                    width: TAU - toward.width,
                },
                kind: BandKind::AwayFromChord,
                chord,
                chord_headings,
            })
        }
        _ => Ok(FeasibleBand {
            arc: Arc::full(),
            kind: BandKind::Unrestricted,
            chord,
            chord_headings,
        }),
    }
}

/// Arc of headings from the leader toward the chord [ylo, yhi] on x = x_m.
fn chord_arc(g: &PairGeometry, ylo: f64, yhi: f64) -> Arc {
    let mid = g.heading_to(0.5 * (ylo + yhi));
    let a = mid + shortest_arc(g.heading_to(ylo) - mid);
    let b = mid + shortest_arc(g.heading_to(yhi) - mid);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    Arc {
        start: wrap_angle(lo),
        width: hi - lo,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSolution {
    /// Interception ordinate on the bisector, pair frame.
    pub y_star: f64,
    pub intercept: Point2,
    pub attacker_heading: f64,
    pub defender_heading: f64,
    /// Distance between attacker and leader at the moment of interception.
    pub value: f64,
}

/// Pair game for a fixed leader heading `theta` (fixed frame).
pub fn pair_game_solve(pair: &MissilePair, leader: Point2, theta: f64) -> Result<PairSolution, RetreatError> {
    let band = feasible_band(pair, leader)?;
    if !band.contains(theta) {
        return Err(RetreatError::InfeasibleHeading { heading: theta });
    }
    let g = PairGeometry::new(pair, leader)?;
    let th = g.relative_heading(theta);
    if g.on_attacker_side() && th.cos().abs() <= 1e-12 {
        return Err(RetreatError::PathParallelToBisector);
    }
    solve_pair(&g, th, band.chord)
}

/// Pair game without the band check; used by the simulator once the leader
/// has committed to a heading.
pub fn pair_game_solve_unchecked(pair: &MissilePair, leader: Point2, theta: f64) -> Result<PairSolution, RetreatError> {
    let g = PairGeometry::new(pair, leader)?;
    let chord = g.chord();
    solve_pair(&g, g.relative_heading(theta), chord)
}

fn solve_pair(g: &PairGeometry, th: f64, chord: Option<(f64, f64)>) -> Result<PairSolution, RetreatError> {
    let mut candidates: Vec<f64> = Vec::new();
    let q = g.quartic(th)?;
    if q.degree() > 0 {
        let c = q.coeffs();
        let lead = c[c.len() - 1].abs();
        let bound = 1.0 + c[..c.len() - 1].iter().fold(0.0_f64, |m, v| m.max(v.abs())) / lead;
        for y in real_roots(&q, -bound, bound)?.values() {
            if g.stationarity_residual(y, th).abs() <= 1e-6 {
                candidates.push(g.refine(y, th));
            }
        }
    }
    if candidates.is_empty() {
        return Err(RetreatError::NoStationaryPoint);
    }
    if let Some((lo, hi)) = chord {
        candidates.push(lo);
        candidates.push(hi);
    }
    let y = candidates
        .into_iter()
        .min_by(|a, b| g.cost(*a, th).total_cmp(&g.cost(*b, th)))
        .expect("non-empty");
    let intercept = g.frame.to_fixed(Point2::new(g.x_m, y));
    let attacker = g.frame.to_fixed(Point2::new(g.x_a, 0.0));
    Ok(PairSolution {
        y_star: y,
        intercept,
        attacker_heading: attacker.heading_to(intercept),
        defender_heading: g.frame.origin.heading_to(intercept),
        value: g.cost(y, th).max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetreatScenario {
    pub leader: Point2,
    /// One or two missile pairs.
    pub pairs: Vec<MissilePair>,
    /// Weight of the first pair in the composite cost.
    pub weight: f64,
    pub constraint: Option<HeadingConstraint>,
}

impl RetreatScenario {
    pub fn validate(&self) -> Result<(), RetreatError> {
        if self.pairs.is_empty() || self.pairs.len() > 2 {
            return Err(RetreatError::InvalidScenario(format!(
                "expected 1 or 2 missile pairs (got {})",
                self.pairs.len()
            )));
        }
        for p in &self.pairs {
            p.validate()?;
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(RetreatError::InvalidScenario(format!(
                "weight must lie in [0, 1] (got {})",
                self.weight
            )));
        }
        Ok(())
    }

    fn combine(&self, values: &[f64]) -> f64 {
        match values {
            [v] => *v,
            [v1, v2] => self.weight * v1 + (1.0 - self.weight) * v2,
            _ => unreachable!("validated pair count"),
        }
    }
}

/// Weighted sum of pair values for a leader heading `theta`.
pub fn composite_cost(scn: &RetreatScenario, theta: f64) -> Result<f64, RetreatError> {
    scn.validate()?;
    if let Some(c) = &scn.constraint {
        if !c.arc.contains_with(theta, 1e-12) {
            return Err(RetreatError::InfeasibleHeading { heading: theta });
        }
    }
    let mut values = Vec::with_capacity(2);
    for p in &scn.pairs {
        values.push(pair_game_solve(p, scn.leader, theta)?.value);
    }
    Ok(scn.combine(&values))
}

fn composite_unchecked(scn: &RetreatScenario, theta: f64) -> Result<(f64, Vec<PairSolution>), RetreatError> {
    let mut sols = Vec::with_capacity(2);
    for p in &scn.pairs {
        sols.push(pair_game_solve_unchecked(p, scn.leader, theta)?);
    }
    let values: Vec<f64> = sols.iter().map(|s| s.value).collect();
    Ok((scn.combine(&values), sols))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadingOptimum {
    pub heading: f64,
    pub value: f64,
    pub pairs: Vec<PairSolution>,
    pub bands: Vec<FeasibleBand>,
    /// Pieces of the admissible heading set that were searched.
    pub admissible: Vec<Arc>,
    pub constraint_active: bool,
}

pub const GRID_POINTS: usize = 721;
pub const HEADING_TOL: f64 = 1e-6;

/// Maximizes the composite cost over the admissible headings.
pub fn optimize_heading(scn: &RetreatScenario) -> Result<HeadingOptimum, RetreatError> {
    scn.validate()?;
    let mut bands = Vec::new();
    let mut band_opts = Vec::new();
    for p in &scn.pairs {
        match feasible_band(p, scn.leader) {
            Ok(b) => {
                bands.push(b);
                band_opts.push(Some(b));
            }
            Err(RetreatError::NoFeasibleHeading) => band_opts.push(None),
            Err(e) => return Err(e),
        }
    }
    let empty = || RetreatError::EmptyFeasibleSet {
        bands: band_opts.clone(),
        constraint: scn.constraint,
    };
    if bands.len() != scn.pairs.len() {
        return Err(empty());
    }

    let mut pieces = vec![Arc::full()];
    let mut limits: Vec<Arc> = bands.iter().map(|b| b.arc).collect();
    if let Some(c) = &scn.constraint {
        limits.push(c.arc);
    }
    for lim in &limits {
        pieces = pieces.iter().flat_map(|p| p.intersect(lim)).collect();
    }
    if pieces.is_empty() {
        return Err(empty());
    }

    let mut best: Option<(f64, f64)> = None;
    for piece in &pieces {
        let (theta, value) = maximize_on(scn, piece)?;
        if best.map_or(true, |(_, v)| value > v) {
            best = Some((theta, value));
        }
    }
    let (theta, _) = best.expect("at least one piece");
    let theta = wrap_angle(theta);
    let (value, pairs) = composite_unchecked(scn, theta)?;

    let constraint_active = scn.constraint.is_some_and(|c| {
        !c.arc.is_full()
            && [c.arc.start, c.arc.end()]
                .iter()
                .any(|e| shortest_arc(theta - e).abs() <= 10.0 * HEADING_TOL)
    });
    Ok(HeadingOptimum {
        heading: theta,
        value,
        pairs,
        bands,
        admissible: pieces,
        constraint_active,
    })
}

fn maximize_on(scn: &RetreatScenario, piece: &Arc) -> Result<(f64, f64), RetreatError> {
    let f = |t: f64| composite_unchecked(scn, t).map(|(v, _)| v);
    if piece.width == 0.0 {
        return Ok((piece.start, f(piece.start)?));
    }
    // A full circle has no endpoints; the grid wraps.
    let n = GRID_POINTS;
    let step = piece.width / (n - 1) as f64;
    let mut grid = Vec::with_capacity(n);
    for k in 0..n {
        let t = piece.start + step * k as f64;
        grid.push((t, f(t)?));
    }
    let (k, _) = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(k, v)| (k, *v))
        .expect("non-empty grid");
    let lo = if k == 0 { grid[0].0 } else { grid[k - 1].0 };
    let hi = if k == n - 1 { grid[n - 1].0 } else { grid[k + 1].0 };
    let (mut t, mut v) = golden_section_max(f, lo, hi, HEADING_TOL)?;
    if grid[k].1 > v {
        t = grid[k].0;
        v = grid[k].1;
    }
    // Snap to a piece endpoint when the refinement ends against it.
    if !piece.is_full() {
        for e in [piece.start, piece.end()] {
            if (t - e).abs() <= 2.0 * HEADING_TOL {
                let ve = f(e)?;
                if ve >= v - 1e-12 {
                    t = e;
                    v = ve;
                }
            }
        }
    }
    Ok((t, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    #[default]
    Index,
    Best,
}

/// Assigns defenders to attackers. `Best` swaps the index pairing when that
/// widens the common feasible heading set.
pub fn assign_pairs(
    leader: Point2,
    attackers: &[Point2],
    defenders: &[Point2],
    alpha: f64,
    mode: PairingMode,
) -> Vec<MissilePair> {
    let make = |d: &[Point2]| -> Vec<MissilePair> {
        attackers
            .iter()
            .zip(d)
            .map(|(a, d)| MissilePair {
                attacker: *a,
                defender: *d,
                alpha,
            })
            .collect()
    };
    let index = make(defenders);
    if mode == PairingMode::Index || attackers.len() != 2 || defenders.len() != 2 {
        return index;
    }
    let swapped = make(&[defenders[1], defenders[0]]);
    let width = |pairs: &[MissilePair]| -> f64 {
        let mut pieces = vec![Arc::full()];
        for p in pairs {
            match feasible_band(p, leader) {
                Ok(b) => pieces = pieces.iter().flat_map(|x| x.intersect(&b.arc)).collect(),
                Err(_) => return -1.0,
            }
        }
        pieces.iter().map(|a| a.width).sum()
    };
    if width(&swapped) > width(&index) {
        swapped
    } else {
        index
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(ax: f64, ay: f64, alpha: f64) -> MissilePair {
        MissilePair {
            attacker: Point2::new(ax, ay),
            defender: Point2::ORIGIN,
            alpha,
        }
    }

    #[test]
    fn arc_intersections() {
        let a = Arc::between(-1.0, 1.0);
        let b = Arc::between(0.5, 2.0);
        let i = a.intersect(&b);
        assert_eq!(i.len(), 1);
        assert!((i[0].start - 0.5).abs() < 1e-12 && (i[0].width - 0.5).abs() < 1e-12);
        // Two pieces: a wide arc against one that wraps over both of its ends.
        let w = Arc::between(0.0, 5.0);
        let z = Arc::between(4.0, 1.0 + TAU);
        assert_eq!(w.intersect(&z).len(), 2);
        assert!(Arc::between(3.0, -3.0).contains(PI));
        assert!(!Arc::between(3.0, -3.0).contains(0.0));
    }

    #[test]
    fn collocated_with_attacker_is_infeasible() {
        let p = pair(4.0, 0.0, 0.5);
        assert_eq!(
            feasible_band(&p, Point2::new(4.0, 0.0)),
            Err(RetreatError::NoFeasibleHeading)
        );
    }

    #[test]
    fn symmetric_band_on_axis() {
        let p = pair(4.0, 0.0, 0.5);
        let band = feasible_band(&p, Point2::new(2.5, 0.0)).unwrap();
        let (lo, hi) = band.chord.unwrap();
        assert!((lo + hi).abs() < 1e-12);
        assert_eq!(band.kind, BandKind::TowardChord);
        assert!((band.lower() + band.upper() - TAU).abs() < 1e-12);
    }

    #[test]
    fn tangent_chord_from_defender_side() {
        let p = pair(4.0, 0.0, 0.5);
        let band = feasible_band(&p, Point2::new(1.0, 0.0)).unwrap();
        let (lo, hi) = band.chord.unwrap();
        assert!(lo.abs() < 1e-7 && hi.abs() < 1e-7);
        let (t, _) = band.chord_headings.unwrap();
        assert!(t.abs() < 1e-7);
        assert_eq!(band.kind, BandKind::Unrestricted);
    }

    #[test]
    fn alpha_zero_projects_onto_bisector() {
        let p = pair(6.0, 0.0, 0.0);
        let b = Point2::new(1.0, 1.5);
        let sol = pair_game_solve(&p, b, PI).unwrap();
        assert!((sol.y_star - 1.5).abs() < 1e-9);
        assert!((sol.value - 2.0).abs() < 1e-9);
        let c = retreat_quartic_coefficients(&p, b, PI).unwrap();
        // −(y − y_B)²(y² + x_m²)
        let want = [-1.0, 1.5, -(2.25 + 9.0), 13.5, -9.0 * 2.25];
        for (g, w) in c.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn printed_coefficients_match() {
        let p = pair(7.0, 0.0, 0.45);
        let b = Point2::new(5.2, 1.3);
        let theta = 2.6;
        let c = retreat_quartic_coefficients(&p, b, theta).unwrap();
        let (a, xm, xb, yb) = (0.45_f64, 3.5_f64, 5.2_f64, 1.3_f64);
        let phi = theta - PI / 2.0;
        let (s, co) = phi.sin_cos();
        let dm = (xm - xb) / s;
        let ym = yb - dm * co;
        let a2 = a * a;
        let c4 = (2.0 * a * co).powi(2) - (1.0 + a2).powi(2);
        let c3 = yb + a2 * ((1.0 - 2.0 * co * co) * ym - dm * co);
        let c2 = a2 * ((dm + ym * co).powi(2) + (2.0 * xm * co).powi(2)) - yb * yb - xm * xm * (1.0 + a2).powi(2);
        let c1 = yb * xm * xm + a2 * xm * xm * ym * s * s;
        let c0 = (a * xm * xm * co).powi(2) - xm * xm * yb * yb;
        for (g, w) in c.iter().zip([c4, c3, c2, c1, c0]) {
            assert!((g - w).abs() < 1e-10 * w.abs().max(1.0), "{g} vs {w}");
        }
    }

    #[test]
    fn intercept_equidistant() {
        let p = MissilePair {
            attacker: Point2::new(3.0, 5.0),
            defender: Point2::new(-2.0, 1.0),
            alpha: 0.5,
        };
        let b = Point2::new(1.5, 4.0);
        let band = feasible_band(&p, b).unwrap();
        let mid = band.lower() + 0.5 * band.arc.width;
        let sol = pair_game_solve(&p, b, mid).unwrap();
        let da = sol.intercept.distance(p.attacker);
        let dd = sol.intercept.distance(p.defender);
        assert!((da - dd).abs() < 1e-9);
    }

    #[test]
    fn band_endpoints_give_zero_value() {
        let p = pair(6.0, 0.0, 0.5);
        let b = Point2::new(4.5, 0.7);
        let band = feasible_band(&p, b).unwrap();
        for t in [band.lower(), band.upper()] {
            let v = pair_game_solve(&p, b, t).unwrap().value;
            assert!(v < 1e-6, "{v}");
        }
    }

    #[test]
    fn mirror_pairs_symmetric_optimum() {
        let b = Point2::new(0.0, 0.0);
        let scn = RetreatScenario {
            leader: b,
            pairs: vec![
                MissilePair {
                    attacker: Point2::new(4.0, 3.0),
                    defender: Point2::new(-1.0, 0.0),
                    alpha: 0.5,
                },
                MissilePair {
                    attacker: Point2::new(4.0, -3.0),
                    defender: Point2::new(-1.0, 0.0),
                    alpha: 0.5,
                },
            ],
            weight: 0.5,
            constraint: None,
        };
        let opt = optimize_heading(&scn).unwrap();
        assert!(shortest_arc(opt.heading - PI).abs() < 1e-5, "{}", opt.heading);
        assert!((opt.pairs[0].value - opt.pairs[1].value).abs() < 1e-6);
    }

    #[test]
    fn empty_set_reports_bands() {
        let scn = RetreatScenario {
            leader: Point2::new(4.0, 0.0),
            pairs: vec![pair(6.0, 0.0, 0.5)],
            weight: 0.5,
            constraint: Some(HeadingConstraint::interval(-0.2, 0.2)),
        };
        match optimize_heading(&scn) {
            Err(RetreatError::EmptyFeasibleSet { bands, .. }) => assert!(bands[0].is_some()),
            other => panic!("{other:?}"),
        }
    }
}
