//! Mass-weighted projection of a sign-changing function onto piecewise
//! quadratics with nonnegative coefficients. Nonnegative Lagrange
//! coefficients only constrain nodal values, Bernstein coefficients
//! constrain the whole function.

use bcrk::fem1d::{build_space, project_constrained, BasisFlavor, Mesh1D};
use bcrk::vi_solver::BoxConstraint;

fn main() -> bcrk::Result<()> {
    let target = |x: f64| (6.0 * std::f64::consts::PI * x).sin() + 0.3;
    for flavor in [BasisFlavor::Lagrange, BasisFlavor::Bernstein] {
        let space = build_space(Mesh1D::uniform(0.0, 1.0, 10, false)?, 2, flavor)?;
        let bounds = BoxConstraint::lower_bounded(space.dof_count(), 0.0);
        let u = project_constrained(&space, target, &bounds)?;
        let min_coeff = u.coeffs.iter().copied().fold(f64::INFINITY, f64::min);
        let min_value = (0..=2000)
            .map(|i| u.eval(i as f64 / 2000.0).unwrap())
            .fold(f64::INFINITY, f64::min);
        println!("{flavor}: smallest coefficient {min_coeff:.2e}, smallest sampled value {min_value:.2e}");
    }
    Ok(())
}
