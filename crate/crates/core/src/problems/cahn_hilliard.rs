//! Mixed Cahn–Hilliard system for the order parameter `c` and chemical
//! potential `μ` with the Flory–Huggins logarithmic potential.
//!
//! Unknowns are laid out as `[c; μ]`. Only `c` carries a time derivative:
//!
//! ```text
//! (c_t, v) = −M_ob (μ', v')
//!        0 = (F'(c), w) + ε² (c', w') − (μ, w)
//! ```
//!
//! The residual uses the true logarithm and fails on `|c| ≥ 1`; the
//! Jacobian uses a regularized logarithm that stays finite there.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem1d::{assemble, project_constrained, FeSpace1D};
use crate::linalg::{lu_factor, DenseMatrix};
use crate::stage_system::{FieldLayout, SemidiscreteProblem};
use crate::vi_solver::BoxConstraint;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CahnHilliardParams {
    pub theta0: f64,
    pub theta_c: f64,
    pub epsilon: f64,
    pub mobility: f64,
    pub delta_reg: f64,
    pub delta_b: f64,
}

impl Default for CahnHilliardParams {
    fn default() -> Self {
        Self {
            theta0: 2.0,
            theta_c: 3.5,
            epsilon: 0.01,
            mobility: 1.0,
            delta_reg: 1e-3,
            delta_b: 1e-8,
        }
    }
}

impl CahnHilliardParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.theta0 && self.theta0 < self.theta_c) {
            return Err(Error::Config(format!(
                "need 0 < theta0 < theta_c, got {} and {}",
                self.theta0, self.theta_c
            )));
        }
        if !(self.delta_reg > 0.0 && self.delta_reg < 0.25) {
            return Err(Error::Config(format!(
                "delta_reg must lie in (0, 0.25), got {}",
                self.delta_reg
            )));
        }
        if !(self.delta_b > 0.0) || !(self.epsilon > 0.0) || !(self.mobility > 0.0) {
            return Err(Error::Config(
                "delta_b, epsilon and mobility must be positive".into(),
            ));
        }
        let c_star = binodal(self.theta0, self.theta_c)?;
        if c_star >= 1.0 - self.delta_b {
            return Err(Error::Config(format!(
                "binodal point {c_star} outside the admissible interval for delta_b = {}",
                self.delta_b
            )));
        }
        Ok(())
    }

    /// `F(s)` for `|s| < 1`.
    pub fn potential(&self, s: f64) -> Result<f64> {
        check_open_interval(s)?;
        Ok(0.5 * self.theta0 * ((1.0 + s) * (1.0 + s).ln() + (1.0 - s) * (1.0 - s).ln())
            - 0.5 * self.theta_c * s * s)
    }

    /// `F'(s)` with the true logarithm.
    pub fn potential_derivative(&self, s: f64) -> Result<f64> {
        check_open_interval(s)?;
        Ok(0.5 * self.theta0 * ((1.0 + s).ln() - (1.0 - s).ln()) - self.theta_c * s)
    }

    /// Derivative of `F'` built from the regularized logarithm.
    pub fn regularized_second_derivative(&self, s: f64) -> f64 {
        let d = |x: f64| {
            if x > self.delta_reg {
                1.0 / x
            } else {
                1.0 / self.delta_reg
            }
        };
        0.5 * self.theta0 * (d(1.0 + s) + d(1.0 - s)) - self.theta_c
    }

    pub fn lower_bound(&self) -> f64 {
        -1.0 + self.delta_b
    }

    pub fn upper_bound(&self) -> f64 {
        1.0 - self.delta_b
    }
}

fn check_open_interval(s: f64) -> Result<()> {
    if !(s.abs() < 1.0) {
        return Err(Error::Singularity(format!(
            "logarithmic potential evaluated at {s}"
        )));
    }
    Ok(())
}

/// Logarithm continued linearly below `delta`.
pub fn ln_reg(s: f64, delta: f64) -> f64 {
    if s > delta {
        s.ln()
    } else {
        delta.ln() + (s - delta) / delta
    }
}

/// Positive root of `(1/s) ln((1+s)/(1−s)) = 2θ_c/θ₀`, by bisection.
pub fn binodal(theta0: f64, theta_c: f64) -> Result<f64> {
    let target = 2.0 * theta_c / theta0;
    if !(target > 2.0) {
        return Err(Error::Config(
            "binodal point exists only for theta_c > theta0".into(),
        ));
    }
    let g = |s: f64| ((1.0 + s) / (1.0 - s)).ln() / s - target;
    let (mut lo, mut hi) = (1e-8, 1.0 - 1e-16);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Neumann,
    Periodic,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Neumann => "neumann",
            Self::Periodic => "periodic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InitialCondition {
    /// `¼ sin²(2πx) sin(12πx)`.
    Sine,
    /// Independent coefficients `(2·rand − 1)/10`.
    Random { seed: u64 },
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sine => f.write_str("sine"),
            Self::Random { seed } => write!(f, "random({seed})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CahnHilliardProblem {
    pub space: FeSpace1D,
    pub params: CahnHilliardParams,
    scalar_mass: DenseMatrix,
    stiffness: DenseMatrix,
    mass: DenseMatrix,
    /// Basis values at the quadrature points of the reference cell.
    basis_table: Vec<Vec<f64>>,
    quad_weights: Vec<f64>,
}

/// The boundary condition is carried by `space`: a periodic mesh gives
/// periodic conditions, otherwise the natural (Neumann) ones apply.
pub fn cahn_hilliard_problem(
    space: FeSpace1D,
    params: CahnHilliardParams,
) -> Result<CahnHilliardProblem> {
    params.validate()?;
    let n = space.dof_count();
    let ops = assemble(&space);
    let mut mass = DenseMatrix::zeros(2 * n, 2 * n);
    mass.add_block(0, 0, 1.0, &ops.mass);
    let rule = space.quadrature();
    let basis_table = rule.points.iter().map(|&q| space.local_values(q)).collect();
    Ok(CahnHilliardProblem {
        space,
        params,
        scalar_mass: ops.mass,
        stiffness: ops.stiffness,
        mass,
        basis_table,
        quad_weights: rule.weights,
    })
}

impl CahnHilliardProblem {
    pub fn boundary_condition(&self) -> BoundaryCondition {
        if self.space.mesh().periodic() {
            BoundaryCondition::Periodic
        } else {
            BoundaryCondition::Neumann
        }
    }

    pub fn scalar_dofs(&self) -> usize {
        self.space.dof_count()
    }

    pub fn scalar_mass(&self) -> &DenseMatrix {
        &self.scalar_mass
    }

    /// Bounds on `c`, none on `μ`.
    pub fn bounds(&self) -> BoxConstraint {
        let n = self.scalar_dofs();
        let mut lower = vec![self.params.lower_bound(); n];
        let mut upper = vec![self.params.upper_bound(); n];
        lower.extend(std::iter::repeat(f64::NEG_INFINITY).take(n));
        upper.extend(std::iter::repeat(f64::INFINITY).take(n));
        BoxConstraint::new(lower, upper).expect("validated parameters give ordered bounds")
    }

    /// Coefficients of `c(0)`, projected onto the admissible interval.
    pub fn initial_concentration(&self, init: InitialCondition) -> Result<Vec<f64>> {
        let n = self.scalar_dofs();
        match init {
            InitialCondition::Sine => {
                let bounds = BoxConstraint::uniform(
                    n,
                    self.params.lower_bound(),
                    self.params.upper_bound(),
                )?;
                let f = |x: f64| {
                    let s = (2.0 * std::f64::consts::PI * x).sin();
                    0.25 * s * s * (12.0 * std::f64::consts::PI * x).sin()
                };
                Ok(project_constrained(&self.space, f, &bounds)?.coeffs)
            }
            InitialCondition::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..n)
                    .map(|_| (2.0 * rng.gen::<f64>() - 1.0) / 10.0)
                    .collect())
            }
        }
    }

    /// `[c; μ]` with `μ` solving the algebraic equation for the given `c`.
    pub fn consistent_state(&self, c: &[f64]) -> Result<Vec<f64>> {
        let n = self.scalar_dofs();
        let mut rhs = self.nonlinear_term(c)?;
        let kc = self.stiffness.matvec(c);
        let eps2 = self.params.epsilon * self.params.epsilon;
        for (r, v) in rhs.iter_mut().zip(kc) {
            *r += eps2 * v;
        }
        let mu = lu_factor(&self.scalar_mass)?.solve(&rhs);
        let mut state = Vec::with_capacity(2 * n);
        state.extend_from_slice(c);
        state.extend(mu);
        Ok(state)
    }

    pub fn initial_state(&self, init: InitialCondition) -> Result<Vec<f64>> {
        self.consistent_state(&self.initial_concentration(init)?)
    }

    /// `∫ c dx`.
    pub fn total_mass(&self, c: &[f64]) -> f64 {
        self.scalar_mass.matvec(c).iter().sum()
    }

    /// `(F'(c_h), φ_i)`.
    fn nonlinear_term(&self, c: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.scalar_dofs()];
        for e in 0..self.space.mesh().n_cells() {
            let (xl, xr) = self.space.mesh().cell(e);
            let h = xr - xl;
            let dofs = self.space.cell_dofs(e);
            for (phi, &w) in self.basis_table.iter().zip(&self.quad_weights) {
                let cq: f64 = phi.iter().zip(dofs).map(|(p, &d)| p * c[d]).sum();
                let fq = self.params.potential_derivative(cq)? * w * h;
                for (p, &d) in phi.iter().zip(dofs) {
                    out[d] += fq * p;
                }
            }
        }
        Ok(out)
    }

    /// `(F''_reg(c_h) φ_j, φ_i)`.
    fn nonlinear_jacobian(&self, c: &[f64]) -> DenseMatrix {
        let n = self.scalar_dofs();
        let mut out = DenseMatrix::zeros(n, n);
        for e in 0..self.space.mesh().n_cells() {
            let (xl, xr) = self.space.mesh().cell(e);
            let h = xr - xl;
            let dofs = self.space.cell_dofs(e);
            for (phi, &w) in self.basis_table.iter().zip(&self.quad_weights) {
                let cq: f64 = phi.iter().zip(dofs).map(|(p, &d)| p * c[d]).sum();
                let g = self.params.regularized_second_derivative(cq) * w * h;
                for (a, &da) in dofs.iter().enumerate() {
                    for (b, &db) in dofs.iter().enumerate() {
                        out[(da, db)] += g * phi[a] * phi[b];
                    }
                }
            }
        }
        out
    }
}

/// `E(c) = ∫ F(c_h) + ε²/2 |c_h'|²`.
pub fn free_energy(space: &FeSpace1D, c: &[f64], params: &CahnHilliardParams) -> Result<f64> {
    let rule = space.quadrature();
    let eps2 = params.epsilon * params.epsilon;
    let mut total = 0.0;
    for e in 0..space.mesh().n_cells() {
        let (xl, xr) = space.mesh().cell(e);
        let h = xr - xl;
        for (&q, &w) in rule.points.iter().zip(&rule.weights) {
            let cq = space.eval_in_cell(c, e, q);
            let dq = space.eval_derivative_in_cell(c, e, q);
            total += w * h * (params.potential(cq)? + 0.5 * eps2 * dq * dq);
        }
    }
    Ok(total)
}

impl SemidiscreteProblem for CahnHilliardProblem {
    fn dof_count(&self) -> usize {
        2 * self.scalar_dofs()
    }

    fn mass(&self) -> &DenseMatrix {
        &self.mass
    }

    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.scalar_dofs();
        let (c, mu) = u.split_at(n);
        let (out_c, out_mu) = out.split_at_mut(n);
        self.stiffness.matvec_into(mu, out_c);
        for o in out_c.iter_mut() {
            *o *= -self.params.mobility;
        }
        let nl = self.nonlinear_term(c)?;
        let kc = self.stiffness.matvec(c);
        let mmu = self.scalar_mass.matvec(mu);
        let eps2 = self.params.epsilon * self.params.epsilon;
        for i in 0..n {
            out_mu[i] = nl[i] + eps2 * kc[i] - mmu[i];
        }
        Ok(())
    }

    fn jacobian(&self, _t: f64, u: &[f64]) -> Result<DenseMatrix> {
        let n = self.scalar_dofs();
        let mut j = DenseMatrix::zeros(2 * n, 2 * n);
        j.add_block(0, n, -self.params.mobility, &self.stiffness);
        j.add_block(n, 0, 1.0, &self.nonlinear_jacobian(&u[..n]));
        j.add_block(n, 0, self.params.epsilon * self.params.epsilon, &self.stiffness);
        j.add_block(n, n, -1.0, &self.scalar_mass);
        Ok(j)
    }

    fn fields(&self) -> Vec<FieldLayout> {
        let n = self.scalar_dofs();
        vec![
            FieldLayout {
                name: "c".into(),
                range: 0..n,
                algebraic: false,
            },
            FieldLayout {
                name: "mu".into(),
                range: n..2 * n,
                algebraic: true,
            },
        ]
    }

    fn locality(&self) -> Vec<usize> {
        let n = self.scalar_dofs();
        (0..2 * n).map(|d| d % n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{build_space, BasisFlavor, Mesh1D};

    fn problem(n: usize, periodic: bool) -> CahnHilliardProblem {
        let space = build_space(
            Mesh1D::uniform(0.0, 1.0, n, periodic).unwrap(),
            2,
            BasisFlavor::Bernstein,
        )
        .unwrap();
        cahn_hilliard_problem(space, CahnHilliardParams::default()).unwrap()
    }

    #[test]
    fn zero_state_is_stationary() {
        let p = problem(6, false);
        let u = vec![0.0; p.dof_count()];
        let mut f = vec![1.0; p.dof_count()];
        p.eval(0.0, &u, &mut f).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(p.params.potential_derivative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn binodal_by_bisection() {
        let c = binodal(2.0, 3.5).unwrap();
        assert!(c > 0.0 && c < 1.0);
        let lhs = ((1.0 + c) / (1.0 - c)).ln() / c;
        assert!((lhs - 3.5).abs() < 1e-12);
        assert!((c - 0.925).abs() < 0.01);
    }

    #[test]
    fn regularized_log() {
        let d = 1e-3;
        assert_eq!(ln_reg(0.5, d), 0.5f64.ln());
        assert!((ln_reg(d, d) - d.ln()).abs() < 1e-15);
        let slope = (ln_reg(0.5 * d, d) - ln_reg(0.25 * d, d)) / (0.25 * d);
        assert!((slope - 1.0 / d).abs() < 1e-6 / d);
        assert!(ln_reg(-1.0, d).is_finite());
    }

    #[test]
    fn potential_values() {
        let p = CahnHilliardParams::default();
        assert_eq!(p.potential(0.0).unwrap(), 0.0);
        assert!(matches!(p.potential(1.0), Err(Error::Singularity(_))));
        assert!(matches!(p.potential_derivative(-1.2), Err(Error::Singularity(_))));
        let k = 0.3f64;
        let want = 1.3 * 1.3f64.ln() + 0.7 * 0.7f64.ln() - 3.5 * k * k / 2.0;
        assert!((p.potential(k).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn energy_of_constants() {
        let p = problem(5, true);
        let n = p.scalar_dofs();
        assert_eq!(free_energy(&p.space, &vec![0.0; n], &p.params).unwrap(), 0.0);
        let e = free_energy(&p.space, &vec![0.4; n], &p.params).unwrap();
        assert!((e - p.params.potential(0.4).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn parameter_validation() {
        let bad = CahnHilliardParams {
            theta0: 4.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = CahnHilliardParams {
            delta_reg: 0.3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = CahnHilliardParams {
            delta_b: 0.2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn jacobian_matches_central_differences_away_from_bounds() {
        for periodic in [false, true] {
            let p = problem(4, periodic);
            let n = p.scalar_dofs();
            let c = p.initial_concentration(InitialCondition::Random { seed: 9 }).unwrap();
            let u = p.consistent_state(&c).unwrap();
            let j = p.jacobian(0.0, &u).unwrap();
            let h = 1e-6;
            let (mut fp, mut fm) = (vec![0.0; 2 * n], vec![0.0; 2 * n]);
            for col in 0..2 * n {
                let mut up = u.clone();
                up[col] += h;
                let mut um = u.clone();
                um[col] -= h;
                p.eval(0.0, &up, &mut fp).unwrap();
                p.eval(0.0, &um, &mut fm).unwrap();
                for row in 0..2 * n {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    assert!((fd - j[(row, col)]).abs() <= 1e-6 * j[(row, col)].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn consistent_chemical_potential_zeroes_algebraic_rows() {
        let p = problem(8, false);
        let u = p.initial_state(InitialCondition::Sine).unwrap();
        let mut f = vec![0.0; p.dof_count()];
        p.eval(0.0, &u, &mut f).unwrap();
        assert!(f[p.scalar_dofs()..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn random_initial_data_is_seeded() {
        let p = problem(8, true);
        let a = p.initial_concentration(InitialCondition::Random { seed: 1 }).unwrap();
        let b = p.initial_concentration(InitialCondition::Random { seed: 1 }).unwrap();
        let c = p.initial_concentration(InitialCondition::Random { seed: 2 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| v.abs() <= 0.1));
    }
}
