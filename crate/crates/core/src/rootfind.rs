//! Real roots of low-degree polynomials (degree ≤ 6).
//!
//! Candidates come from the eigenvalues of the companion matrix; each is
//! polished against the original polynomial and accepted only if its
//! residual is small relative to the coefficient scale.

use nalgebra::{Complex, DMatrix, Schur};
use thiserror::Error;

pub const MAX_DEGREE: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("polynomial is constant after trimming")]
    DegenerateInput,
    #[error("polynomial degree {0} exceeds {MAX_DEGREE}")]
    DegreeTooHigh(usize),
    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),
    #[error("invalid search interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("root polishing did not converge from guess {guess}")]
    NoConvergence { guess: f64 },
}

/// Tolerances for root acceptance. Kept in one place so tests can tighten them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootTolerances {
    /// Accept r when |p(r)| ≤ residual · max(1, max|cᵢ|) · max(1, |r|)ⁿ.
    pub residual: f64,
    /// Roots closer than this (relative to max(1, |r|)) are merged.
    pub dedup: f64,
    /// Eigenvalues with |Im| below this (relative to the spectral scale)
    /// are polished as real candidates. Deliberately loose: a double root
    /// often surfaces as a conjugate pair.
    pub near_real: f64,
    pub max_iterations: usize,
}

impl Default for RootTolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            dedup: 1e-8,
            near_real: 1e-3,
            max_iterations: 100,
        }
    }
}

/// Polynomial with coefficients in ascending order: c₀ + c₁x + … + cₙxⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    /// Trailing (highest-order) coefficients that are zero, or negligible
    /// against the largest coefficient, are trimmed.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Result<Self, RootError> {
        let mut coeffs = coeffs.into();
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(RootError::NonFinite(i));
        }
        let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        while coeffs.len() > 1 {
            let last = *coeffs.last().unwrap();
            if last == 0.0 || last.abs() <= 1e-14 * scale {
                coeffs.pop();
            } else {
                break;
            }
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        if coeffs.len() - 1 > MAX_DEGREE {
            return Err(RootError::DegreeTooHigh(coeffs.len() - 1));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> RealPolynomial {
        if self.coeffs.len() == 1 {
            return RealPolynomial { coeffs: vec![0.0] };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
        RealPolynomial { coeffs }
    }

    pub fn mul(&self, other: &RealPolynomial) -> Vec<f64> {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    }

    fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().fold(1.0_f64, |m, c| m.max(c.abs()))
    }

    /// Residual acceptance bound at `x`.
    pub fn residual_bound(&self, x: f64, tol: &RootTolerances) -> f64 {
        tol.residual * self.coeff_scale() * x.abs().max(1.0).powi(self.degree() as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    pub residual: f64,
    pub multiplicity: usize,
}

/// Distinct real roots in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

pub fn real_roots(p: &RealPolynomial, lo: f64, hi: f64) -> Result<RootSet, RootError> {
    real_roots_with(p, lo, hi, &RootTolerances::default())
}

pub fn real_roots_with(
    p: &RealPolynomial,
    lo: f64,
    hi: f64,
    tol: &RootTolerances,
) -> Result<RootSet, RootError> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(RootError::InvalidInterval { lo, hi });
    }
    let n = p.degree();
    if n == 0 {
        return Err(RootError::DegenerateInput);
    }

    let c = p.coeffs();
    let mut candidates: Vec<f64> = Vec::new();
    if n == 1 {
        candidates.push(-c[0] / c[1]);
    } else {
        let eig = eigenvalues(c);
        let scale = eig.iter().fold(1.0_f64, |s, z| s.max(z.norm()));
        for z in eig.iter() {
            if z.im.abs() <= tol.near_real * scale {
                candidates.push(z.re);
            }
        }
    }

    let slack = |x: f64| 1e-12 * x.abs().max(1.0);
    let mut accepted: Vec<(f64, f64)> = Vec::new();
    for guess in candidates {
        let Ok(r) = polish_root_with(p, guess, tol) else {
            continue;
        };
        let res = p.eval(r).abs();
        if res > p.residual_bound(r, tol) {
            continue;
        }
        if r < lo - slack(lo) || r > hi + slack(hi) {
            continue;
        }
        accepted.push((r.clamp(lo, hi), res));
    }

    accepted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut roots: Vec<Root> = Vec::new();
    for (r, res) in accepted {
        if let Some(last) = roots.last_mut() {
            if (r - last.value).abs() <= tol.dedup * r.abs().max(1.0) {
                last.multiplicity += 1;
                if res < last.residual {
                    last.value = r;
                    last.residual = res;
                }
                continue;
            }
        }
        roots.push(Root {
            value: r,
            residual: res,
            multiplicity: 1,
        });
    }
    Ok(RootSet { roots })
}

/// Companion-matrix eigenvalues, with a simultaneous-iteration fallback
/// for the rare matrices on which the QR sweep stalls.
fn eigenvalues(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    match Schur::try_new(m, f64::EPSILON, 2000) {
        Some(s) => s.complex_eigenvalues().iter().copied().collect(),
        None => durand_kerner(c),
    }
}

fn durand_kerner(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|a| a / lead).collect();
    let bound = 1.0 + monic[..n].iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let eval = |z: Complex<f64>| monic.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &a| acc * z + a);
    let seed = Complex::new(0.4, 0.9);
    let mut z: Vec<Complex<f64>> = (0..n).map(|k| seed.powu(k as u32) * (0.5 * bound)).collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let mut den = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                continue;
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-15 * bound {
            break;
        }
    }
    z
}

pub fn polish_root(p: &RealPolynomial, guess: f64) -> Result<f64, RootError> {
    polish_root_with(p, guess, &RootTolerances::default())
}

/// Newton iteration, refined through p′ near multiple roots, with a
/// bracketing bisection fallback.
pub fn polish_root_with(
    p: &RealPolynomial,
    guess: f64,
    tol: &RootTolerances,
) -> Result<f64, RootError> {
    if !guess.is_finite() {
        return Err(RootError::NoConvergence { guess });
    }
    if p.degree() == 0 {
        return Err(RootError::DegenerateInput);
    }

    let first = newton(p, guess, tol.max_iterations);
    let mut best: Option<f64> = None;
    let mut consider = |x: f64| {
        if !x.is_finite() {
            return;
        }
        let fx = p.eval(x).abs();
        match best {
            Some(b) if p.eval(b).abs() < fx => {}
            _ => best = Some(x),
        }
    };

    if let Some(x) = first {
        consider(x);
        // Near a multiple root p′ also vanishes and Newton on p stalls at
        // the noise floor; the root of p′ is simple there.
        let (_, dp) = p.eval_with_derivative(x);
        let dscale = p.coeff_scale() * x.abs().max(1.0).powi(p.degree() as i32);
        if dp.abs() <= 1e-4 * dscale && p.degree() >= 2 {
            let dpoly = p.derivative();
            if let Some(xd) = newton(&dpoly, x, tol.max_iterations) {
                if (xd - x).abs() <= 1e-3 * x.abs().max(1.0) {
                    consider(xd);
                }
            }
        }
    }

    if let Some(x) = best {
        if p.eval(x).abs() <= p.residual_bound(x, tol) {
            return Ok(x);
        }
    }

    if let Some(x) = bracket_and_bisect(p, guess, tol.max_iterations) {
        return Ok(x);
    }
    if let Some(x) = best {
        return Ok(x);
    }
    Err(RootError::NoConvergence { guess })
}

fn newton(p: &RealPolynomial, guess: f64, max_iter: usize) -> Option<f64> {
    let mut x = guess;
    for _ in 0..max_iter {
        let (f, df) = p.eval_with_derivative(x);
        if f == 0.0 {
            return Some(x);
        }
        if df == 0.0 || !df.is_finite() {
            return Some(x);
        }
        let step = f / df;
        let next = x - step;
        if !next.is_finite() {
            return None;
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs().max(1.0) {
            return Some(next);
        }
        // Stop once the residual no longer decreases (noise floor).
        if p.eval(next).abs() >= f.abs() && (next - x).abs() <= 1e-10 * x.abs().max(1.0) {
            return Some(x);
        }
        x = next;
    }
    Some(x)
}

fn bracket_and_bisect(p: &RealPolynomial, guess: f64, max_iter: usize) -> Option<f64> {
    let mut h = 1e-6 * guess.abs().max(1.0);
    for _ in 0..30 {
        for (a, b) in [(guess - h, guess), (guess, guess + h)] {
            let (fa, fb) = (p.eval(a), p.eval(b));
            if fa == 0.0 {
                return Some(a);
            }
            if fb == 0.0 {
                return Some(b);
            }
            if fa.signum() != fb.signum() {
                return Some(bisect(p, a, b, 4 * max_iter));
            }
        }
        h *= 2.0;
        if h > 1e3 * guess.abs().max(1.0) {
            break;
        }
    }
    None
}

fn bisect(p: &RealPolynomial, mut a: f64, mut b: f64, max_iter: usize) -> f64 {
    let mut fa = p.eval(a);
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[f64]) -> RealPolynomial {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i] -= r * a;
                next[i + 1] += a;
            }
            c = next;
        }
        RealPolynomial::new(c).unwrap()
    }

    #[test]
    fn cubic_three_roots() {
        let p = RealPolynomial::new(vec![-6.0, 11.0, -6.0, 1.0]).unwrap();
        let r = real_roots(&p, -10.0, 10.0).unwrap().values();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn no_real_roots() {
        let p = RealPolynomial::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(real_roots(&p, -10.0, 10.0).unwrap().is_empty());
    }

    #[test]
    fn double_root_reported_once() {
        let p = RealPolynomial::new(vec![4.0, -4.0, 1.0]).unwrap();
        let set = real_roots(&p, -10.0, 10.0).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.roots[0].value - 2.0).abs() < 1e-9);
        assert_eq!(set.roots[0].multiplicity, 2);
    }

    #[test]
    fn polish_double_root() {
        let p = RealPolynomial::new(vec![9.0, -6.0, 1.0]).unwrap();
        let r = polish_root(&p, 2.9).unwrap();
        assert!((r - 3.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn constant_is_degenerate() {
        let p = RealPolynomial::new(vec![3.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 0);
        assert_eq!(real_roots(&p, -1.0, 1.0), Err(RootError::DegenerateInput));
    }

    #[test]
    fn trailing_zero_trimmed() {
        let p = RealPolynomial::new(vec![-1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 1);
        assert_eq!(real_roots(&p, 0.0, 2.0).unwrap().values(), vec![1.0]);
    }

    #[test]
    fn interval_filters() {
        let p = from_roots(&[-2.0, 0.5, 4.0]);
        let r = real_roots(&p, 0.0, 1.0).unwrap().values();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sextic_known_roots() {
        let want = [-3.0, -1.5, 0.25, 1.0, 2.0, 5.0];
        let p = from_roots(&want);
        let got = real_roots(&p, -10.0, 10.0).unwrap().values();
        assert_eq!(got.len(), 6);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn degree_limit() {
        assert_eq!(
            RealPolynomial::new(vec![1.0; 8]),
            Err(RootError::DegreeTooHigh(7))
        );
    }

    #[test]
    fn rejects_nan() {
        assert_eq!(
            RealPolynomial::new(vec![1.0, f64::NAN]),
            Err(RootError::NonFinite(1))
        );
    }

    #[test]
    fn derivative_and_eval() {
        let p = RealPolynomial::new(vec![1.0, 2.0, 3.0]).unwrap();
        let (v, d) = p.eval_with_derivative(2.0);
        assert_eq!(v, 17.0);
        assert_eq!(d, 14.0);
        assert_eq!(p.derivative().coeffs(), &[2.0, 6.0]);
    }
}
