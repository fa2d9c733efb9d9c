//! Implementing `SemidiscreteProblem` for a problem of your own: a logistic
//! equation started just above zero, stepped with Bernstein-form RadauIIA
//! and nonnegativity bounds.

use bcrk::linalg::DenseMatrix;
use bcrk::stage_system::{CollocationMethod, SemidiscreteProblem, TimeBasis, TimeStepper};
use bcrk::tableau::CollocationFamily;
use bcrk::vi_solver::{BoxConstraint, NewtonSettings};

struct Logistic {
    rate: f64,
    mass: DenseMatrix,
}

impl SemidiscreteProblem for Logistic {
    fn dof_count(&self) -> usize {
        1
    }

    fn mass(&self) -> &DenseMatrix {
        &self.mass
    }

    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) -> bcrk::Result<()> {
        out[0] = self.rate * u[0] * (1.0 - u[0]);
        Ok(())
    }

    fn jacobian(&self, _t: f64, u: &[f64]) -> bcrk::Result<DenseMatrix> {
        Ok(DenseMatrix::from_rows(&[[self.rate * (1.0 - 2.0 * u[0])]]))
    }
}

fn main() -> bcrk::Result<()> {
    let problem = Logistic {
        rate: -3.0,
        mass: DenseMatrix::identity(1),
    };
    let method = CollocationMethod::new(CollocationFamily::RadauIIA, 3, TimeBasis::Bernstein)?;
    let stepper = TimeStepper::new(
        &problem,
        method,
        Some(BoxConstraint::lower_bounded(1, 0.0)),
        NewtonSettings::default(),
    )?;
    let (k, mut y, mut t) = (0.5, vec![0.05], 0.0);
    for _ in 0..8 {
        let step = stepper.step(t, k, &y)?;
        let exact = 1.0 / (1.0 + (1.0 / 0.05 - 1.0) * (3.0 * (t + k)).exp());
        println!(
            "t = {:>4.1}: u = {:.6e} (exact {exact:.6e}), mid-step value {:.6e}, Newton its {}",
            t + k,
            step.y_next[0],
            step.dense_output(0.5)?[0],
            step.report.newton_iterations
        );
        y = step.y_next;
        t += k;
    }
    Ok(())
}
