//! One-dimensional maximization helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is narrower than `tol`. Returns (argmax, max).
pub fn golden_section_max<F, E>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x)?;
    let mut best = (x, fx);
    for (xi, fi) in [(x1, f1), (x2, f2)] {
        if fi > best.1 {
            best = (xi, fi);
        }
    }
    Ok(best)
}
