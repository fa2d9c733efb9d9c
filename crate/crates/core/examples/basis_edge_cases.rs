//! Coefficient signs and polynomial signs disagree in both directions:
//! a Lagrange polynomial with positive nodal values can dip below zero,
//! while a Bernstein polynomial with a negative coefficient can stay positive.

use bcrk::polybasis::{
    bernstein_eval, control_net_bounds, lagrange_eval, lagrange_to_bernstein,
};

fn sample_min(f: impl Fn(f64) -> f64) -> (f64, f64) {
    (0..=1000)
        .map(|i| {
            let x = i as f64 / 1000.0;
            (x, f(x))
        })
        .fold((0.0, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc })
}

fn main() -> bcrk::Result<()> {
    let nodes = [0.0, 0.5, 1.0];
    let nodal = [0.01, 0.01, 1.0];
    let (x, v) = sample_min(|x| lagrange_eval(&nodes, &nodal, x).unwrap());
    println!("Lagrange values {nodal:?} on {nodes:?}: minimum {v:.4} at x = {x:.3}");
    let b = lagrange_to_bernstein(&nodes, &nodal)?;
    println!("  same polynomial in Bernstein form: {b:.4?}");

    let coeffs = [1.0, -0.9, 1.0];
    let (x, v) = sample_min(|x| bernstein_eval(2, &coeffs, x).unwrap());
    let (lo, hi) = control_net_bounds(&coeffs)?;
    println!("Bernstein coefficients {coeffs:?}: minimum {v:.4} at x = {x:.3}");
    println!("  coefficient range [{lo}, {hi}] encloses every value");
    Ok(())
}
