//! `u_t − u_xx = f` on `[0, 1]` with Dirichlet data taken from a
//! manufactured exact solution.

use std::f64::consts::PI;
use std::fmt;

use crate::error::Result;
use crate::fem1d::{assemble, project_constrained_pinned, FeSpace1D};
use crate::linalg::DenseMatrix;
use crate::stage_system::SemidiscreteProblem;
use crate::vi_solver::BoxConstraint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeatVariant {
    /// `e^{-t} cos²(2πx)`.
    Smooth,
    /// A steep valley around `x = 1/2` multiplied by a rising tanh in time.
    Front,
}

impl fmt::Display for HeatVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Smooth => "smooth",
            Self::Front => "front",
        })
    }
}

const FRONT_HALF_WIDTH: f64 = 0.15;
const FRONT_SHARPNESS: f64 = 0.015;

fn sech2(z: f64) -> f64 {
    let c = z.cosh();
    1.0 / (c * c)
}

impl HeatVariant {
    pub fn exact(self, t: f64, x: f64) -> f64 {
        match self {
            Self::Smooth => (-t).exp() * (2.0 * PI * x).cos().powi(2),
            Self::Front => 0.25 * front_space(x).0 * (1.0 + (75.0 * t - 6.0).tanh()),
        }
    }

    pub fn exact_dx(self, t: f64, x: f64) -> f64 {
        match self {
            Self::Smooth => -(-t).exp() * 2.0 * PI * (4.0 * PI * x).sin(),
            Self::Front => 0.25 * front_space(x).1 * (1.0 + (75.0 * t - 6.0).tanh()),
        }
    }

    pub fn exact_dt(self, t: f64, x: f64) -> f64 {
        match self {
            Self::Smooth => -self.exact(t, x),
            Self::Front => 0.25 * front_space(x).0 * 75.0 * sech2(75.0 * t - 6.0),
        }
    }

    /// `u_t − u_xx` for the exact solution.
    pub fn forcing(self, t: f64, x: f64) -> f64 {
        match self {
            Self::Smooth => -self.exact(t, x) + 8.0 * PI * PI * (-t).exp() * (4.0 * PI * x).cos(),
            Self::Front => {
                let (a, _, a2) = front_space(x);
                let b = 1.0 + (75.0 * t - 6.0).tanh();
                let db = 75.0 * sech2(75.0 * t - 6.0);
                0.25 * (a * db - a2 * b)
            }
        }
    }
}

/// Spatial factor `1 − tanh(z)` with `z = (0.15 − |x − 1/2|)/0.015`, and its
/// first two derivatives away from `x = 1/2`.
fn front_space(x: f64) -> (f64, f64, f64) {
    let z = (FRONT_HALF_WIDTH - (x - 0.5).abs()) / FRONT_SHARPNESS;
    let dz = -(x - 0.5).signum() / FRONT_SHARPNESS;
    let s2 = sech2(z);
    let a = 1.0 - z.tanh();
    let a1 = -s2 * dz;
    let a2 = 2.0 * s2 * z.tanh() * dz * dz;
    (a, a1, a2)
}

/// Galerkin semidiscretization `M u' = (f, φ) − K u` with both endpoints
/// prescribed.
#[derive(Clone, Debug)]
pub struct HeatProblem {
    pub space: FeSpace1D,
    pub variant: HeatVariant,
    mass: DenseMatrix,
    stiffness: DenseMatrix,
}

pub fn heat_mms_problem(space: FeSpace1D, variant: HeatVariant) -> Result<HeatProblem> {
    if space.mesh().periodic() {
        return Err(crate::Error::Config(
            "heat problem needs a non-periodic mesh".into(),
        ));
    }
    let ops = assemble(&space);
    Ok(HeatProblem {
        space,
        variant,
        mass: ops.mass,
        stiffness: ops.stiffness,
    })
}

impl HeatProblem {
    pub fn stiffness(&self) -> &DenseMatrix {
        &self.stiffness
    }

    /// Coefficients `≥ 0`.
    pub fn bounds(&self) -> BoxConstraint {
        BoxConstraint::lower_bounded(self.space.dof_count(), 0.0)
    }

    /// Mass-weighted projection of the exact initial state onto `bounds`
    /// (or unconstrained), with the endpoint values pinned.
    pub fn initial_state(&self, bounds: Option<&BoxConstraint>) -> Result<Vec<f64>> {
        let pinned: Vec<(usize, f64)> = self
            .dirichlet_dofs()
            .into_iter()
            .zip(self.dirichlet_values(0.0))
            .collect();
        let unbounded = BoxConstraint::unbounded(self.space.dof_count());
        let v = self.variant;
        let u0 = project_constrained_pinned(
            &self.space,
            |x| v.exact(0.0, x),
            bounds.unwrap_or(&unbounded),
            &pinned,
        )?;
        Ok(u0.coeffs)
    }
}

impl SemidiscreteProblem for HeatProblem {
    fn dof_count(&self) -> usize {
        self.space.dof_count()
    }

    fn mass(&self) -> &DenseMatrix {
        &self.mass
    }

    fn eval(&self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        let v = self.variant;
        let load = self.space.load_vector(|x| v.forcing(t, x));
        self.stiffness.matvec_into(u, out);
        for (o, l) in out.iter_mut().zip(load) {
            *o = l - *o;
        }
        Ok(())
    }

    fn jacobian(&self, _t: f64, _u: &[f64]) -> Result<DenseMatrix> {
        let mut j = self.stiffness.clone();
        for v in j.as_mut_slice() {
            *v = -*v;
        }
        Ok(j)
    }

    fn dirichlet_dofs(&self) -> Vec<usize> {
        self.space.boundary_dofs().to_vec()
    }

    fn dirichlet_values(&self, t: f64) -> Vec<f64> {
        let (a, b) = self.space.mesh().domain();
        vec![self.variant.exact(t, a), self.variant.exact(t, b)]
    }

    fn dirichlet_rates(&self, t: f64) -> Vec<f64> {
        let (a, b) = self.space.mesh().domain();
        vec![self.variant.exact_dt(t, a), self.variant.exact_dt(t, b)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smooth_variant_shape() {
        for t in [0.0, 0.3, 1.0] {
            assert!(HeatVariant::Smooth.exact(t, 0.25).abs() < 1e-15);
            for i in 0..=50 {
                assert!(HeatVariant::Smooth.exact(t, i as f64 / 50.0) >= 0.0);
            }
        }
    }

    #[test]
    fn front_variant_small_at_start() {
        let scale = 0.5 * (1.0 + (-6.0f64).tanh());
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let u = HeatVariant::Front.exact(0.0, x);
            assert!(u <= scale + 1e-18 && u >= 0.0);
        }
        assert!(scale < 2.5e-5);
    }

    #[test]
    fn forcing_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for variant in [HeatVariant::Smooth, HeatVariant::Front] {
            for _ in 0..50 {
                let t = rng.gen_range(0.0..1.0);
                let mut x = rng.gen_range(0.0..1.0);
                if (x - 0.5f64).abs() < 0.01 {
                    x += 0.02;
                }
                let ht = 1e-6;
                let hx = match variant {
                    HeatVariant::Smooth => 1e-3,
                    HeatVariant::Front => 1e-4,
                };
                let u = |t: f64, x: f64| variant.exact(t, x);
                let ut = (u(t + ht, x) - u(t - ht, x)) / (2.0 * ht);
                let uxx = (-u(t, x + 2.0 * hx) + 16.0 * u(t, x + hx) - 30.0 * u(t, x)
                    + 16.0 * u(t, x - hx)
                    - u(t, x - 2.0 * hx))
                    / (12.0 * hx * hx);
                let fd = ut - uxx;
                let f = variant.forcing(t, x);
                assert!(
                    (fd - f).abs() <= 1e-6 * f.abs().max(1.0),
                    "{variant} t={t} x={x}: {fd} vs {f}"
                );
                let ux = (u(t, x - 2.0 * hx) - 8.0 * u(t, x - hx) + 8.0 * u(t, x + hx)
                    - u(t, x + 2.0 * hx))
                    / (12.0 * hx);
                assert!((ux - variant.exact_dx(t, x)).abs() <= 1e-6 * ux.abs().max(1.0));
                let dt = variant.exact_dt(t, x);
                assert!((ut - dt).abs() <= 1e-6 * dt.abs().max(1.0));
            }
        }
    }
}
