//! Phytoplankton growing on a carbon and a nitrogen source, with decay into
//! detritus. State ordering is `(C, N, P, D)`.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::stage_system::{FieldLayout, SemidiscreteProblem};
use crate::vi_solver::BoxConstraint;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhytoParams {
    pub a: f64,
    pub b: f64,
    pub k_c: f64,
    pub k_n: f64,
    pub r_max: f64,
    pub e: f64,
    pub c0: f64,
    pub n0: f64,
    pub p0: f64,
    pub d0: f64,
}

impl Default for PhytoParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            k_c: 1.0,
            k_n: 1.0,
            r_max: 1.0,
            e: 0.3,
            c0: 29.98,
            n0: 9.98,
            p0: 0.01,
            d0: 0.01,
        }
    }
}

impl PhytoParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.a, self.b, self.k_c, self.k_n, self.r_max, self.e, self.c0, self.n0, self.p0,
            self.d0,
        ];
        if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!(
                "phytoplankton parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> Vec<f64> {
        vec![self.c0, self.n0, self.p0, self.d0]
    }
}

#[derive(Clone, Debug)]
pub struct PhytoProblem {
    pub params: PhytoParams,
    mass: DenseMatrix,
}

pub fn phyto_problem(params: PhytoParams) -> Result<PhytoProblem> {
    params.validate()?;
    Ok(PhytoProblem {
        params,
        mass: DenseMatrix::identity(4),
    })
}

impl PhytoProblem {
    /// All four components nonnegative.
    pub fn bounds(&self) -> BoxConstraint {
        BoxConstraint::lower_bounded(4, 0.0)
    }
}

/// `(C + P + D, N + P + D)`.
pub fn linear_invariants(state: &[f64]) -> (f64, f64) {
    (state[0] + state[2] + state[3], state[1] + state[2] + state[3])
}

impl SemidiscreteProblem for PhytoProblem {
    fn dof_count(&self) -> usize {
        4
    }

    fn mass(&self) -> &DenseMatrix {
        &self.mass
    }

    fn eval(&self, _t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        let p = &self.params;
        let (c, n, ph) = (u[0], u[1], u[2]);
        let uptake = p.r_max * c / (p.k_c + c) * n / (p.k_n + n) * ph;
        out[0] = -p.a * uptake;
        out[1] = -p.b * uptake;
        out[2] = uptake - p.e * ph;
        out[3] = p.e * ph;
        Ok(())
    }

    fn jacobian(&self, _t: f64, u: &[f64]) -> Result<DenseMatrix> {
        let p = &self.params;
        let (c, n, ph) = (u[0], u[1], u[2]);
        let gc = c / (p.k_c + c);
        let gn = n / (p.k_n + n);
        let dgc = p.k_c / ((p.k_c + c) * (p.k_c + c));
        let dgn = p.k_n / ((p.k_n + n) * (p.k_n + n));
        let du = [
            p.r_max * dgc * gn * ph,
            p.r_max * gc * dgn * ph,
            p.r_max * gc * gn,
            0.0,
        ];
        let mut j = DenseMatrix::zeros(4, 4);
        for col in 0..4 {
            j[(0, col)] = -p.a * du[col];
            j[(1, col)] = -p.b * du[col];
            j[(2, col)] = du[col];
        }
        j[(2, 2)] -= p.e;
        j[(3, 2)] = p.e;
        Ok(j)
    }

    fn fields(&self) -> Vec<FieldLayout> {
        ["C", "N", "P", "D"]
            .iter()
            .enumerate()
            .map(|(i, name)| FieldLayout {
                name: (*name).into(),
                range: i..i + 1,
                algebraic: false,
            })
            .collect()
    }
}
