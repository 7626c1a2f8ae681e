//! Real roots of low-degree polynomials: simple, clustered and double roots.
//!
//!     cargo run --example root_finding

use bvr_tactics::rootfind::{real_roots, RealPolynomial};

fn show(name: &str, coeffs: &[f64]) {
    let p = RealPolynomial::new(coeffs.to_vec()).unwrap();
    let roots = real_roots(&p, -1e3, 1e3).unwrap();
    println!("{name}:");
    for r in &roots.roots {
        println!("  x = {:+.12}  |p(x)| = {:.2e}  multiplicity {}", r.value, r.residual, r.multiplicity);
    }
}

fn main() {
    // Coefficients in ascending order.
    show("(x-1)(x-2)(x-3)", &[-6.0, 11.0, -6.0, 1.0]);
    show("(x-1)^2 (x+2)", &[2.0, -3.0, 0.0, 1.0]);
    show("x^4 - 1", &[-1.0, 0.0, 0.0, 0.0, 1.0]);
    show("x^6 - 2x^3 + 1 - 1e-6", &[1.0 - 1e-6, 0.0, 0.0, -2.0, 0.0, 0.0, 1.0]);
}
