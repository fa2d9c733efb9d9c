use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::vi_solver::{solve_unconstrained, solve_vi, BoxConstraint, NewtonSettings, SolveReport};

use super::{
    dense_output, jacobian, stage_residual, stage_values, step_update, CollocationMethod,
    MassSolver, SemidiscreteProblem, StepContext, TimeBasis,
};

/// Advances a problem one collocation step at a time, solving the stage
/// system either unconstrained or as a box-constrained VI.
pub struct TimeStepper<'p, P: SemidiscreteProblem + ?Sized> {
    problem: &'p P,
    method: CollocationMethod,
    bounds: Option<BoxConstraint>,
    settings: NewtonSettings,
    mass: Option<MassSolver>,
    /// `order[p]` is the stage-vector index of the `p`-th solver unknown.
    order: Vec<usize>,
}

/// Outcome of one step.
#[derive(Clone, Debug)]
pub struct StepResult<'m> {
    pub ctx: StepContext<'m>,
    /// Solved stage vector in the method's time basis.
    pub stages: Vec<f64>,
    pub y_next: Vec<f64>,
    pub report: SolveReport,
}

impl StepResult<'_> {
    /// Coefficients of the collocating polynomial at `tⁿ + τk`.
    pub fn dense_output(&self, tau: f64) -> Result<Vec<f64>> {
        dense_output(&self.ctx, &self.stages, tau)
    }

    /// Stage values `Y_1..Y_s`, block by block.
    pub fn stage_values(&self) -> Vec<f64> {
        stage_values(&self.ctx, &self.stages)
    }
}

impl<'p, P: SemidiscreteProblem + ?Sized> TimeStepper<'p, P> {
    /// `bounds` holds one entry per problem dof and is tiled over the stages;
    /// `None` solves the stage equations without constraints.
    pub fn new(
        problem: &'p P,
        method: CollocationMethod,
        bounds: Option<BoxConstraint>,
        settings: NewtonSettings,
    ) -> Result<Self> {
        let n = problem.dof_count();
        if let Some(b) = &bounds {
            if b.len() != n {
                return Err(Error::Config(format!(
                    "bounds cover {} dofs, problem has {n}",
                    b.len()
                )));
            }
        }
        if method.confluent() && problem.has_algebraic_fields() {
            return Err(Error::Config(
                "confluent schemes need a nonsingular mass matrix".into(),
            ));
        }
        let needs_mass = method.confluent()
            || (method.time_basis() == TimeBasis::Lagrange
                && !method.tableau().is_stiffly_accurate()
                && !problem.has_algebraic_fields());
        let mass = if needs_mass {
            Some(MassSolver::new(problem)?)
        } else {
            None
        };
        let s = method.stages();
        let locality = problem.locality();
        let mut order: Vec<usize> = (0..s * n).collect();
        order.sort_by_key(|&q| (locality[q % n], q % n, q / n));
        Ok(Self {
            problem,
            method,
            bounds: bounds.map(|b| b.tile(s)),
            settings,
            mass,
            order,
        })
    }

    pub fn method(&self) -> &CollocationMethod {
        &self.method
    }

    pub fn problem(&self) -> &P {
        self.problem
    }

    pub fn constrained(&self) -> bool {
        self.bounds.is_some()
    }

    pub fn settings(&self) -> &NewtonSettings {
        &self.settings
    }

    pub fn context(&self, t_n: f64, k: f64, y_n: &[f64]) -> Result<StepContext<'_>> {
        StepContext::new(self.problem, &self.method, t_n, k, y_n, self.mass.as_ref())
    }

    /// Solves the stage system for the step from `t_n` to `t_n + k`.
    ///
    /// Fails with [`Error::NonConvergence`] when Newton exhausts its budget.
    pub fn step(&self, t_n: f64, k: f64, y_n: &[f64]) -> Result<StepResult<'_>> {
        let ctx = self.context(t_n, k, y_n)?;
        let n = ctx.dof_count();
        let s = ctx.stages();
        let mut x0 = y_n.repeat(s);
        if self.method.time_basis() == TimeBasis::Bernstein {
            for (z, w) in x0[..n].iter_mut().zip(&ctx.w) {
                *z += w;
            }
        }
        let order = &self.order;
        let permute = |x: &[f64]| -> Vec<f64> { order.iter().map(|&q| x[q]).collect() };
        let unpermute = |xp: &[f64]| -> Vec<f64> {
            let mut x = vec![0.0; xp.len()];
            for (&q, &v) in order.iter().zip(xp) {
                x[q] = v;
            }
            x
        };
        let mut scratch = vec![0.0; s * n];
        let residual = |xp: &[f64], out: &mut [f64]| -> Result<()> {
            stage_residual(self.problem, &ctx, &unpermute(xp), &mut scratch)?;
            for (o, &q) in out.iter_mut().zip(order) {
                *o = scratch[q];
            }
            Ok(())
        };
        let jac = |xp: &[f64]| -> Result<DenseMatrix> {
            jacobian(self.problem, &ctx, &unpermute(xp))?.submatrix(order, order)
        };
        let xp0 = permute(&x0);
        let (xp, report) = match &self.bounds {
            Some(b) => {
                let pb = BoxConstraint::new(permute(b.lower()), permute(b.upper()))?;
                solve_vi(residual, jac, &xp0, &pb, &self.settings)?
            }
            None => solve_unconstrained(residual, jac, &xp0, &self.settings)?,
        };
        if !report.converged {
            return Err(Error::NonConvergence {
                iterations: report.newton_iterations,
                residual: report.final_residual_norm,
            });
        }
        let stages = unpermute(&xp);
        let y_next = step_update(self.problem, &ctx, &stages, self.mass.as_ref())?;
        Ok(StepResult {
            ctx,
            stages,
            y_next,
            report,
        })
    }
}
