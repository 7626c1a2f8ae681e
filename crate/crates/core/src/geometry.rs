//! Planar primitives: points, relative frames, Cartesian ovals, Apollonius
//! circles and perpendicular bisectors.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("speed ratio must exceed 1 (got {0})")]
    InvalidSpeedRatio(f64),
    #[error("speed ratio must lie in [0, 1) (got {0})")]
    InvalidApolloniusRatio(f64),
    #[error("pursuer at distance {offset} is already within engagement range {rho}")]
    DegenerateOval { offset: f64, rho: f64 },
    #[error("ray at angle {theta} does not meet the oval")]
    OutsideOval { theta: f64 },
    #[error("points coincide")]
    CoincidentPoints,
    #[error("bisector is vertical in this frame (x = {x})")]
    VerticalBisector { x: f64 },
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// atan2 of the vector.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Heading from `self` toward `target`.
    pub fn heading_to(self, target: Point2) -> f64 {
        (target - self).angle()
    }

    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, other: Point2, s: f64) -> Self {
        self + (other - self) * s
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Point2::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Wraps to [-π, π).
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Signed shortest rotation, in (-π, π].
pub fn shortest_arc(delta: f64) -> f64 {
    let w = wrap_angle(delta);
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Unit vector for a heading.
pub fn unit(theta: f64) -> Point2 {
    Point2::new(theta.cos(), theta.sin())
}

/// Frame with `origin` at zero and the x-axis along `rotation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeFrame {
    pub origin: Point2,
    pub rotation: f64,
}

impl RelativeFrame {
    pub fn new(origin: Point2, rotation: f64) -> Self {
        Self { origin, rotation }
    }

    /// Frame at `origin` whose x-axis points at `toward`.
    pub fn aligned(origin: Point2, toward: Point2) -> Result<Self, GeometryError> {
        if !(origin.is_finite() && toward.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if (toward - origin).norm() == 0.0 {
            return Err(GeometryError::CoincidentPoints);
        }
        Ok(Self::new(origin, origin.heading_to(toward)))
    }

    pub fn to_relative(&self, p: Point2) -> Point2 {
        (p - self.origin).rotate(-self.rotation)
    }

    pub fn to_fixed(&self, p: Point2) -> Point2 {
        p.rotate(self.rotation) + self.origin
    }

    pub fn heading_to_fixed(&self, theta: f64) -> f64 {
        wrap_angle(theta + self.rotation)
    }

    pub fn heading_to_relative(&self, theta: f64) -> f64 {
        wrap_angle(theta - self.rotation)
    }
}

/// Relative engagement frame for the attack stage: leader at the origin,
/// first interceptor on the positive x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackFrame {
    pub frame: RelativeFrame,
    /// x'₁: distance from the leader to the first interceptor.
    pub x1: f64,
    pub r2: Point2,
    pub asset: Point2,
}

pub fn attack_relative_frame(
    leader: Point2,
    r1: Point2,
    r2: Point2,
    asset: Point2,
) -> Result<AttackFrame, GeometryError> {
    let frame = RelativeFrame::aligned(leader, r1)?;
    if !(r2.is_finite() && asset.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    Ok(AttackFrame {
        frame,
        x1: leader.distance(r1),
        r2: frame.to_relative(r2),
        asset: frame.to_relative(asset),
    })
}

pub fn to_fixed_heading(theta_rel: f64, frame: &RelativeFrame) -> f64 {
    frame.heading_to_fixed(theta_rel)
}

/// Boundary of the leader's dominance region against one interceptor, in
/// the frame where the leader is at the origin and the interceptor sits at
/// (offset, 0).
///
/// Points P with |P − R| = ρ + β|P| satisfy the oval; the inner branch is
/// the one that bounds what the leader can reach first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianOval {
    pub offset: f64,
    pub beta: f64,
    pub rho: f64,
}

impl CartesianOval {
    pub fn new(offset: f64, beta: f64, rho: f64) -> Result<Self, GeometryError> {
        if !(offset.is_finite() && beta.is_finite() && rho.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if beta <= 1.0 {
            return Err(GeometryError::InvalidSpeedRatio(beta));
        }
        Ok(Self { offset, beta, rho })
    }

    /// 1 − β²
    pub fn b(&self) -> f64 {
        1.0 - self.beta * self.beta
    }

    /// ρ² − x'²
    pub fn eta(&self) -> f64 {
        self.rho * self.rho - self.offset * self.offset
    }

    /// (r̲, r̄): the radii along θ = 0 and θ = π.
    pub fn bounds(&self) -> Result<(f64, f64), GeometryError> {
        if self.offset <= self.rho {
            return Err(GeometryError::DegenerateOval {
                offset: self.offset,
                rho: self.rho,
            });
        }
        let d = self.offset - self.rho;
        Ok((d / (self.beta + 1.0), d / (self.beta - 1.0)))
    }

    /// Inner-branch radius along the ray at angle θ.
    pub fn inner_radius(&self, theta: f64) -> Result<f64, GeometryError> {
        let b = self.b();
        let k = self.beta * self.rho + self.offset * theta.cos();
        let disc = k * k + b * self.eta();
        if disc < 0.0 {
            return Err(GeometryError::OutsideOval { theta });
        }
        let r = (k - disc.sqrt()) / b;
        if !(r.is_finite() && r >= 0.0) {
            return Err(GeometryError::OutsideOval { theta });
        }
        Ok(r)
    }

    pub fn inner_point(&self, theta: f64) -> Result<Point2, GeometryError> {
        Ok(Point2::from_polar(self.inner_radius(theta)?, theta))
    }

    /// |P − R| − ρ − β|P|; zero on the oval, positive where the leader wins.
    pub fn residual(&self, p: Point2) -> f64 {
        (p - Point2::new(self.offset, 0.0)).norm() - self.rho - self.beta * p.norm()
    }
}

/// Locus where one agent and a faster pursuer arrive together; the slower
/// agent (speed ratio α) reaches the inside first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApolloniusCircle {
    pub center: Point2,
    pub radius: f64,
}

/// Apollonius circle for `slow` (speed αv) fleeing `fast` (speed v).
pub fn apollonius(slow: Point2, fast: Point2, alpha: f64) -> Result<ApolloniusCircle, GeometryError> {
    if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
        return Err(GeometryError::InvalidApolloniusRatio(alpha));
    }
    if slow == fast {
        return Err(GeometryError::CoincidentPoints);
    }
    let a2 = alpha * alpha;
    let k = 1.0 - a2;
    Ok(ApolloniusCircle {
        center: (slow - fast * a2) * (1.0 / k),
        radius: alpha * slow.distance(fast) / k,
    })
}

impl ApolloniusCircle {
    pub fn contains(&self, p: Point2) -> bool {
        p.distance(self.center) <= self.radius
    }
}

/// y = m·x + n
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectorLine {
    pub m: f64,
    pub n: f64,
}

impl BisectorLine {
    pub fn at(&self, x: f64) -> Point2 {
        Point2::new(x, self.m * x + self.n)
    }
}

/// Perpendicular bisector that may be vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bisector {
    Sloped(BisectorLine),
    Vertical { x: f64 },
}

impl Bisector {
    /// Point of the bisector sharing the given abscissa (or ordinate, when
    /// vertical).
    pub fn through(&self, p: Point2) -> Point2 {
        match *self {
            Bisector::Sloped(l) => l.at(p.x),
            Bisector::Vertical { x } => Point2::new(x, p.y),
        }
    }
}

/// Perpendicular bisector of `a` and `b`, rejecting the vertical case.
pub fn bisector(a: Point2, b: Point2) -> Result<BisectorLine, GeometryError> {
    match bisector_any(a, b)? {
        Bisector::Sloped(l) => Ok(l),
        Bisector::Vertical { x } => Err(GeometryError::VerticalBisector { x }),
    }
}

pub fn bisector_any(a: Point2, b: Point2) -> Result<Bisector, GeometryError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return Err(GeometryError::CoincidentPoints);
    }
    let mid = (a + b) * 0.5;
    if d.y.abs() <= 1e-12 * len {
        return Ok(Bisector::Vertical { x: mid.x });
    }
    let m = -d.x / d.y;
    Ok(Bisector::Sloped(BisectorLine {
        m,
        n: mid.y - m * mid.x,
    }))
}
