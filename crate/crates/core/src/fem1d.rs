//! Continuous piecewise polynomial finite element spaces on 1D meshes.
//!
//! A space is parameterized by its degree `r` and by a basis flavor. Both
//! flavors span the same functions; the flavor decides what a coefficient
//! means. Lagrange coefficients are values at equispaced nodes, while
//! Bernstein coefficients form the control net on each cell. Both bases are
//! nodal at the cell endpoints, so C⁰ continuity is imposed by sharing the
//! vertex coefficient between neighboring cells.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, DenseMatrix};
use crate::polybasis::{bernstein_derivatives, bernstein_values, LagrangeBasis};
use crate::quadrature::{gauss_legendre_for_degree, QuadratureRule};
use crate::vi_solver::{solve_vi, BoxConstraint, NewtonSettings};

pub const MAX_DEGREE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisFlavor {
    Lagrange,
    Bernstein,
}

impl BasisFlavor {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Lagrange => "L",
            Self::Bernstein => "B",
        }
    }
}

impl fmt::Display for BasisFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lagrange => "lagrange",
            Self::Bernstein => "bernstein",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Mesh1D {
    vertices: Vec<f64>,
    periodic: bool,
}

impl Mesh1D {
    pub fn uniform(a: f64, b: f64, n_cells: usize, periodic: bool) -> Result<Self> {
        if n_cells == 0 || !(b > a) {
            return Err(Error::Config(format!(
                "uniform mesh needs n_cells >= 1 and a < b, got {n_cells} cells on [{a}, {b}]"
            )));
        }
        let h = (b - a) / n_cells as f64;
        let mut vertices: Vec<f64> = (0..=n_cells).map(|i| a + h * i as f64).collect();
        vertices[n_cells] = b;
        Ok(Self { vertices, periodic })
    }

    pub fn from_vertices(vertices: Vec<f64>, periodic: bool) -> Result<Self> {
        if vertices.len() < 2 || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("mesh vertices must be strictly increasing".into()));
        }
        Ok(Self { vertices, periodic })
    }

    pub fn n_cells(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.vertices[0], self.vertices[self.vertices.len() - 1])
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn cell(&self, e: usize) -> (f64, f64) {
        (self.vertices[e], self.vertices[e + 1])
    }

    /// Cell containing `x` and the local coordinate in `[0, 1]`.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let (a, b) = self.domain();
        if !(a..=b).contains(&x) {
            return Err(Error::Domain(format!("point {x} outside mesh [{a}, {b}]")));
        }
        let e = self
            .vertices
            .partition_point(|&v| v <= x)
            .saturating_sub(1)
            .min(self.n_cells() - 1);
        let (xl, xr) = self.cell(e);
        Ok((e, ((x - xl) / (xr - xl)).clamp(0.0, 1.0)))
    }
}

/// Reference-cell basis of one flavor.
#[derive(Clone, Debug)]
enum LocalBasis {
    Lagrange(LagrangeBasis),
    Bernstein(usize),
}

impl LocalBasis {
    fn values(&self, xi: f64) -> Vec<f64> {
        match self {
            Self::Lagrange(b) => b.values(xi),
            Self::Bernstein(r) => bernstein_values(*r, xi),
        }
    }

    fn derivatives(&self, xi: f64) -> Vec<f64> {
        match self {
            Self::Lagrange(b) => b.derivatives(xi),
            Self::Bernstein(r) => bernstein_derivatives(*r, xi),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FeSpace1D {
    mesh: Mesh1D,
    degree: usize,
    flavor: BasisFlavor,
    dof_count: usize,
    cell_to_dof: Vec<Vec<usize>>,
    boundary_dofs: Vec<usize>,
    local: LocalBasis,
}

pub fn build_space(mesh: Mesh1D, degree: usize, flavor: BasisFlavor) -> Result<FeSpace1D> {
    FeSpace1D::new(mesh, degree, flavor)
}

impl FeSpace1D {
    pub fn new(mesh: Mesh1D, degree: usize, flavor: BasisFlavor) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::Config(format!(
                "element degree must be in [1, {MAX_DEGREE}], got {degree}"
            )));
        }
        let n = mesh.n_cells();
        let r = degree;
        let dof_count = if mesh.periodic() { n * r } else { n * r + 1 };
        if mesh.periodic() && dof_count < 2 {
            return Err(Error::Config("periodic mesh too small for this degree".into()));
        }
        let cell_to_dof = (0..n)
            .map(|e| (0..=r).map(|j| (e * r + j) % dof_count).collect())
            .collect();
        let boundary_dofs = if mesh.periodic() {
            vec![]
        } else {
            vec![0, dof_count - 1]
        };
        let local = match flavor {
            BasisFlavor::Lagrange => {
                let nodes: Vec<f64> = (0..=r).map(|j| j as f64 / r as f64).collect();
                LocalBasis::Lagrange(LagrangeBasis::new(&nodes)?)
            }
            BasisFlavor::Bernstein => LocalBasis::Bernstein(r),
        };
        Ok(Self {
            mesh,
            degree,
            flavor,
            dof_count,
            cell_to_dof,
            boundary_dofs,
            local,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn flavor(&self) -> BasisFlavor {
        self.flavor
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn cell_dofs(&self, e: usize) -> &[usize] {
        &self.cell_to_dof[e]
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    /// Quadrature exact for degree `2r + 2`, the rule used for every form.
    pub fn quadrature(&self) -> QuadratureRule {
        gauss_legendre_for_degree(2 * self.degree + 2)
    }

    /// Physical location associated with each coefficient: the Lagrange
    /// node, or the control point abscissa for Bernstein.
    pub fn dof_positions(&self) -> Vec<f64> {
        let mut pos = vec![0.0; self.dof_count];
        for e in 0..self.mesh.n_cells() {
            let (xl, xr) = self.mesh.cell(e);
            for (j, &d) in self.cell_to_dof[e].iter().enumerate() {
                pos[d] = xl + (xr - xl) * j as f64 / self.degree as f64;
            }
        }
        if self.mesh.periodic() {
            pos[0] = self.mesh.domain().0;
        }
        pos
    }

    /// Local basis values at reference coordinate `xi`.
    pub fn local_values(&self, xi: f64) -> Vec<f64> {
        self.local.values(xi)
    }

    /// Local basis derivatives with respect to the reference coordinate.
    pub fn local_derivatives(&self, xi: f64) -> Vec<f64> {
        self.local.derivatives(xi)
    }

    pub fn eval_in_cell(&self, coeffs: &[f64], e: usize, xi: f64) -> f64 {
        self.local
            .values(xi)
            .iter()
            .zip(&self.cell_to_dof[e])
            .map(|(phi, &d)| phi * coeffs[d])
            .sum()
    }

    pub fn eval_derivative_in_cell(&self, coeffs: &[f64], e: usize, xi: f64) -> f64 {
        let (xl, xr) = self.mesh.cell(e);
        self.local
            .derivatives(xi)
            .iter()
            .zip(&self.cell_to_dof[e])
            .map(|(dphi, &d)| dphi * coeffs[d])
            .sum::<f64>()
            / (xr - xl)
    }

    pub fn eval(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        self.check_len(coeffs)?;
        let (e, xi) = self.mesh.locate(x)?;
        Ok(self.eval_in_cell(coeffs, e, xi))
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.dof_count {
            return Err(Error::Domain(format!(
                "expected {} coefficients, got {}",
                self.dof_count,
                coeffs.len()
            )));
        }
        Ok(())
    }

    /// Load vector `(f, φ_i)`.
    pub fn load_vector(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let rule = self.quadrature();
        let mut out = vec![0.0; self.dof_count];
        let tables: Vec<Vec<f64>> = rule.points.iter().map(|&q| self.local.values(q)).collect();
        for e in 0..self.mesh.n_cells() {
            let (xl, xr) = self.mesh.cell(e);
            let h = xr - xl;
            for ((&q, &w), phi) in rule.points.iter().zip(&rule.weights).zip(&tables) {
                let fx = f(xl + h * q) * w * h;
                for (p, &d) in phi.iter().zip(&self.cell_to_dof[e]) {
                    out[d] += fx * p;
                }
            }
        }
        out
    }

    /// Pointwise coefficient bounds tiled over every dof.
    pub fn uniform_bounds(&self, lower: f64, upper: f64) -> Result<BoxConstraint> {
        BoxConstraint::uniform(self.dof_count, lower, upper)
    }
}

/// Coefficient vector tied to a space.
#[derive(Clone, Debug)]
pub struct FeFunction<'a> {
    pub space: &'a FeSpace1D,
    pub coeffs: Vec<f64>,
}

impl<'a> FeFunction<'a> {
    pub fn new(space: &'a FeSpace1D, coeffs: Vec<f64>) -> Result<Self> {
        space.check_len(&coeffs)?;
        Ok(Self { space, coeffs })
    }

    pub fn zero(space: &'a FeSpace1D) -> Self {
        Self {
            space,
            coeffs: vec![0.0; space.dof_count()],
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.space.eval(&self.coeffs, x)
    }
}

/// Mass and stiffness matrices.
#[derive(Clone, Debug)]
pub struct AssembledOperators {
    pub mass: DenseMatrix,
    pub stiffness: DenseMatrix,
}

/// Cellwise Gauss assembly of `(φ_j, φ_i)` and `(φ_j', φ_i')`.
pub fn assemble(space: &FeSpace1D) -> AssembledOperators {
    let n = space.dof_count();
    let mut mass = DenseMatrix::zeros(n, n);
    let mut stiffness = DenseMatrix::zeros(n, n);
    let rule = space.quadrature();
    let vals: Vec<Vec<f64>> = rule.points.iter().map(|&q| space.local_values(q)).collect();
    let ders: Vec<Vec<f64>> = rule.points.iter().map(|&q| space.local_derivatives(q)).collect();
    let nloc = space.degree() + 1;
    for e in 0..space.mesh().n_cells() {
        let (xl, xr) = space.mesh().cell(e);
        let h = xr - xl;
        let dofs = space.cell_dofs(e);
        for q in 0..rule.len() {
            let w = rule.weights[q];
            for a in 0..nloc {
                for b in 0..nloc {
                    mass[(dofs[a], dofs[b])] += w * h * vals[q][a] * vals[q][b];
                    stiffness[(dofs[a], dofs[b])] += w / h * ders[q][a] * ders[q][b];
                }
            }
        }
    }
    AssembledOperators { mass, stiffness }
}

/// Mass-weighted least-squares projection of `f` onto the box `bounds`.
pub fn project_constrained<'a>(
    space: &'a FeSpace1D,
    f: impl Fn(f64) -> f64,
    bounds: &BoxConstraint,
) -> Result<FeFunction<'a>> {
    project_constrained_pinned(space, f, bounds, &[])
}

/// Like [`project_constrained`], with some coefficients fixed to given values.
pub fn project_constrained_pinned<'a>(
    space: &'a FeSpace1D,
    f: impl Fn(f64) -> f64,
    bounds: &BoxConstraint,
    pinned: &[(usize, f64)],
) -> Result<FeFunction<'a>> {
    if bounds.len() != space.dof_count() {
        return Err(Error::Config(format!(
            "bounds cover {} dofs, space has {}",
            bounds.len(),
            space.dof_count()
        )));
    }
    let mass = assemble(space).mass;
    let mut jac = mass.clone();
    let mut rhs = space.load_vector(f);
    for &(d, g) in pinned {
        jac.row_mut(d).fill(0.0);
        jac[(d, d)] = 1.0;
        rhs[d] = g;
    }
    let lu = lu_factor(&jac)?;
    let x0 = lu.solve(&rhs);
    let residual = |x: &[f64], out: &mut [f64]| -> Result<()> {
        jac.matvec_into(x, out);
        for (o, r) in out.iter_mut().zip(&rhs) {
            *o -= r;
        }
        Ok(())
    };
    let jacobian = |_: &[f64]| -> Result<DenseMatrix> { Ok(jac.clone()) };
    let (x, report) = solve_vi(residual, jacobian, &x0, bounds, &NewtonSettings::default())?;
    if !report.converged {
        return Err(Error::NonConvergence {
            iterations: report.newton_iterations,
            residual: report.final_residual_norm,
        });
    }
    FeFunction::new(space, x)
}

/// `(‖u_h - u‖_{L²}, ‖u_h - u‖_{H¹})` with a rule exact for degree `2r + 6`.
pub fn error_norms(
    uh: &FeFunction<'_>,
    exact: impl Fn(f64) -> f64,
    dexact: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let space = uh.space;
    let rule = gauss_legendre_for_degree(2 * space.degree() + 6);
    let mut l2 = 0.0;
    let mut semi = 0.0;
    for e in 0..space.mesh().n_cells() {
        let (xl, xr) = space.mesh().cell(e);
        let h = xr - xl;
        for (&q, &w) in rule.points.iter().zip(&rule.weights) {
            let x = xl + h * q;
            let ev = space.eval_in_cell(&uh.coeffs, e, q) - exact(x);
            let ed = space.eval_derivative_in_cell(&uh.coeffs, e, q) - dexact(x);
            l2 += w * h * ev * ev;
            semi += w * h * ed * ed;
        }
    }
    (l2.sqrt(), (l2 + semi).sqrt())
}

/// Linear system with Dirichlet dofs removed by symmetric elimination.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub free: Vec<usize>,
    pub pinned: Vec<(usize, f64)>,
    full_len: usize,
}

impl ReducedSystem {
    /// Full coefficient vector from a solution on the free dofs.
    pub fn expand(&self, x_free: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.full_len];
        for (&i, &v) in self.free.iter().zip(x_free) {
            x[i] = v;
        }
        for &(i, g) in &self.pinned {
            x[i] = g;
        }
        x
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        Ok(self.expand(&lu_factor(&self.matrix)?.solve(&self.rhs)))
    }
}

/// Pins the endpoint coefficients to `(left, right)` and eliminates their rows
/// and columns, moving the known contributions to the right-hand side.
pub fn apply_dirichlet(
    space: &FeSpace1D,
    matrix: &DenseMatrix,
    rhs: &[f64],
    left: f64,
    right: f64,
) -> Result<ReducedSystem> {
    if space.mesh().periodic() {
        return Err(Error::Config("Dirichlet conditions on a periodic space".into()));
    }
    let n = space.dof_count();
    let bd = space.boundary_dofs();
    let pinned = vec![(bd[0], left), (bd[1], right)];
    let free: Vec<usize> = (0..n).filter(|i| !bd.contains(i)).collect();
    let mut reduced_rhs: Vec<f64> = free.iter().map(|&i| rhs[i]).collect();
    for (r, &i) in reduced_rhs.iter_mut().zip(&free) {
        for &(j, g) in &pinned {
            *r -= matrix[(i, j)] * g;
        }
    }
    Ok(ReducedSystem {
        matrix: matrix.submatrix(&free, &free)?,
        rhs: reduced_rhs,
        free,
        pinned,
        full_len: n,
    })
}
