//! Coupled stage equations of a collocation Runge–Kutta step for a
//! semidiscrete system `M u' = F(t, u)`.
//!
//! Stage unknowns are stored stage-major: block `i` of a flat vector holds
//! the coefficients of stage `i`. In Lagrange form the blocks are the stage
//! values `Y_i`; in Bernstein form they are the Bernstein coefficients
//! `Z_1..Z_s` of the collocating polynomial, whose zeroth coefficient is
//! always the previous solution `yⁿ`.

mod stepper;

pub use stepper::{StepResult, TimeStepper};

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, DenseMatrix, LuFactors};
use crate::polybasis::{
    bernstein_derivatives, bernstein_values, collocation_transform, CollocationTransform,
    LagrangeBasis,
};
use crate::tableau::{collocation_tableau, ButcherTableau, CollocationFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TimeBasis {
    Lagrange,
    Bernstein,
}

impl TimeBasis {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Lagrange => "L",
            Self::Bernstein => "B",
        }
    }
}

impl fmt::Display for TimeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lagrange => "lagrange",
            Self::Bernstein => "bernstein",
        })
    }
}

/// A named block of unknowns. Algebraic fields carry no time derivative and
/// have zero rows in the mass matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldLayout {
    pub name: String,
    pub range: Range<usize>,
    pub algebraic: bool,
}

/// Semidiscrete system `M u' = F(t, u)` with optional Dirichlet dofs.
pub trait SemidiscreteProblem: Sync {
    fn dof_count(&self) -> usize;

    fn mass(&self) -> &DenseMatrix;

    /// Writes `F(t, u)` into `out`, a vector in the dual (residual) space.
    fn eval(&self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()>;

    /// `∂F/∂u` at `(t, u)`.
    fn jacobian(&self, t: f64, u: &[f64]) -> Result<DenseMatrix>;

    fn fields(&self) -> Vec<FieldLayout> {
        vec![FieldLayout {
            name: "u".into(),
            range: 0..self.dof_count(),
            algebraic: false,
        }]
    }

    /// Dofs whose values are prescribed in time.
    fn dirichlet_dofs(&self) -> Vec<usize> {
        Vec::new()
    }

    /// Prescribed values at time `t`, aligned with [`Self::dirichlet_dofs`].
    fn dirichlet_values(&self, _t: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Time derivatives of the prescribed values.
    fn dirichlet_rates(&self, _t: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Spatial position index of each dof. Unknowns are ordered by it before
    /// factorization so that coupled stage Jacobians stay narrow-banded.
    fn locality(&self) -> Vec<usize> {
        (0..self.dof_count()).collect()
    }

    fn has_algebraic_fields(&self) -> bool {
        self.fields().iter().any(|f| f.algebraic)
    }
}

/// Tableau, Bernstein–Vandermonde transform and time basis of a scheme.
#[derive(Clone, Debug)]
pub struct CollocationMethod {
    family: Option<CollocationFamily>,
    tableau: ButcherTableau,
    transform: CollocationTransform,
    transform_lu: LuFactors,
    interpolant: Option<LagrangeBasis>,
    time_basis: TimeBasis,
}

impl CollocationMethod {
    pub fn new(family: CollocationFamily, stages: usize, time_basis: TimeBasis) -> Result<Self> {
        let mut m = Self::from_tableau(collocation_tableau(family, stages)?, time_basis)?;
        m.family = Some(family);
        Ok(m)
    }

    pub fn from_tableau(tableau: ButcherTableau, time_basis: TimeBasis) -> Result<Self> {
        let confluent = tableau.is_confluent();
        let transform = collocation_transform(&tableau.c, confluent)?;
        let transform_lu = lu_factor(&transform.vmat)?;
        let interpolant = if confluent {
            None
        } else {
            let mut nodes = vec![0.0];
            nodes.extend_from_slice(&tableau.c);
            Some(LagrangeBasis::new(&nodes)?)
        };
        Ok(Self {
            family: None,
            tableau,
            transform,
            transform_lu,
            interpolant,
            time_basis,
        })
    }

    pub fn family(&self) -> Option<CollocationFamily> {
        self.family
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    pub fn transform(&self) -> &CollocationTransform {
        &self.transform
    }

    pub fn time_basis(&self) -> TimeBasis {
        self.time_basis
    }

    pub fn stages(&self) -> usize {
        self.tableau.stages()
    }

    pub fn confluent(&self) -> bool {
        self.transform.confluent
    }

    pub fn nodes(&self) -> &[f64] {
        &self.tableau.c
    }
}

/// Everything that is fixed during one step.
#[derive(Clone, Debug)]
pub struct StepContext<'m> {
    pub method: &'m CollocationMethod,
    pub t_n: f64,
    pub k: f64,
    pub y_n: Vec<f64>,
    /// Correction subtracted from the first stage block in the confluent
    /// case, `(k/s) M⁻¹F(tⁿ, yⁿ)`; zero otherwise.
    pub w: Vec<f64>,
    dirichlet_dofs: Vec<usize>,
    /// Prescribed values at each stage time, one vector per stage.
    dirichlet_stage_values: Vec<Vec<f64>>,
}

impl<'m> StepContext<'m> {
    /// Builds the context of the step from `t_n` to `t_n + k`. The confluent
    /// correction needs a mass solve, supplied by `mass`.
    pub fn new<P: SemidiscreteProblem + ?Sized>(
        problem: &P,
        method: &'m CollocationMethod,
        t_n: f64,
        k: f64,
        y_n: &[f64],
        mass: Option<&MassSolver>,
    ) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {k}")));
        }
        let n = problem.dof_count();
        if y_n.len() != n {
            return Err(Error::Config(format!(
                "state has {} entries, problem has {n} dofs",
                y_n.len()
            )));
        }
        let dirichlet_dofs = problem.dirichlet_dofs();
        let dirichlet_stage_values = method
            .nodes()
            .iter()
            .map(|&c| problem.dirichlet_values(t_n + c * k))
            .collect();
        let mut w = vec![0.0; n];
        if method.confluent() {
            if problem.has_algebraic_fields() {
                return Err(Error::Config(
                    "confluent schemes need a nonsingular mass matrix".into(),
                ));
            }
            let owned;
            let mass = match mass {
                Some(m) => m,
                None => {
                    owned = MassSolver::new(problem)?;
                    &owned
                }
            };
            let mut f = vec![0.0; n];
            problem.eval(t_n, y_n, &mut f)?;
            let riesz = mass.solve(&f, &problem.dirichlet_rates(t_n));
            let scale = k / method.stages() as f64;
            for (wi, fi) in w.iter_mut().zip(riesz) {
                *wi = scale * fi;
            }
        }
        Ok(Self {
            method,
            t_n,
            k,
            y_n: y_n.to_vec(),
            w,
            dirichlet_dofs,
            dirichlet_stage_values,
        })
    }

    pub fn stages(&self) -> usize {
        self.method.stages()
    }

    pub fn dof_count(&self) -> usize {
        self.y_n.len()
    }

    pub fn stage_time(&self, j: usize) -> f64 {
        self.t_n + self.method.nodes()[j] * self.k
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.stages() * self.dof_count() {
            return Err(Error::Config(format!(
                "stage vector has {} entries, expected {}",
                x.len(),
                self.stages() * self.dof_count()
            )));
        }
        Ok(())
    }
}

/// Mass matrix with the Dirichlet rows replaced by identity rows, factored.
#[derive(Clone, Debug)]
pub struct MassSolver {
    lu: LuFactors,
    mass: DenseMatrix,
    pinned: Vec<usize>,
}

impl MassSolver {
    pub fn new<P: SemidiscreteProblem + ?Sized>(problem: &P) -> Result<Self> {
        let mass = problem.mass().clone();
        let pinned = problem.dirichlet_dofs();
        let mut m = mass.clone();
        for &d in &pinned {
            m.row_mut(d).fill(0.0);
            m[(d, d)] = 1.0;
        }
        Ok(Self {
            lu: lu_factor(&m)?,
            mass,
            pinned,
        })
    }

    /// Solves `M x = rhs` away from the Dirichlet dofs, where `x` takes the
    /// values `pinned_values`.
    pub fn solve(&self, rhs: &[f64], pinned_values: &[f64]) -> Vec<f64> {
        let mut r = rhs.to_vec();
        for (&d, &g) in self.pinned.iter().zip(pinned_values) {
            r[d] = g;
        }
        self.lu.solve(&r)
    }

    pub fn mass(&self) -> &DenseMatrix {
        &self.mass
    }
}

/// Stage values `Y` for a stage vector in the method's time basis. In
/// Bernstein form `Y = V Z + yⁿ v − w`.
pub fn stage_values(ctx: &StepContext<'_>, x: &[f64]) -> Vec<f64> {
    match ctx.method.time_basis() {
        TimeBasis::Lagrange => x.to_vec(),
        TimeBasis::Bernstein => bernstein_to_stages(ctx, x),
    }
}

fn bernstein_to_stages(ctx: &StepContext<'_>, z: &[f64]) -> Vec<f64> {
    let n = ctx.dof_count();
    let s = ctx.stages();
    let t = ctx.method.transform();
    let mut y = vec![0.0; s * n];
    for i in 0..s {
        let yi = &mut y[i * n..(i + 1) * n];
        for (yd, &u) in yi.iter_mut().zip(&ctx.y_n) {
            *yd = t.v[i] * u;
        }
        for j in 0..s {
            let vij = t.vmat[(i, j)];
            if vij == 0.0 {
                continue;
            }
            for (yd, &zd) in yi.iter_mut().zip(&z[j * n..(j + 1) * n]) {
                *yd += vij * zd;
            }
        }
    }
    for (yd, &wd) in y[..n].iter_mut().zip(&ctx.w) {
        *yd -= wd;
    }
    y
}

/// Bernstein coefficients `Z_1..Z_s` of the collocating polynomial.
pub fn bernstein_coefficients(ctx: &StepContext<'_>, x: &[f64]) -> Result<Vec<f64>> {
    ctx.check_len(x)?;
    if ctx.method.time_basis() == TimeBasis::Bernstein {
        return Ok(x.to_vec());
    }
    let n = ctx.dof_count();
    let s = ctx.stages();
    let t = ctx.method.transform();
    let mut z = vec![0.0; s * n];
    let mut rhs = vec![0.0; s];
    for d in 0..n {
        for i in 0..s {
            rhs[i] = x[i * n + d] - t.v[i] * ctx.y_n[d];
        }
        rhs[0] += ctx.w[d];
        for (i, zi) in ctx.method.transform_lu.solve(&rhs).into_iter().enumerate() {
            z[i * n + d] = zi;
        }
    }
    Ok(z)
}

/// `M Yᵢ − M yⁿ − k Σⱼ Aᵢⱼ F(tⁿ + cⱼk, Yⱼ)` with Dirichlet rows replaced by
/// `Yᵢ[b] − g(tⁿ + cᵢk)`.
fn residual_from_stages<P: SemidiscreteProblem + ?Sized>(
    problem: &P,
    ctx: &StepContext<'_>,
    y: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let n = ctx.dof_count();
    let s = ctx.stages();
    let a = &ctx.method.tableau().a;
    let mass = problem.mass();
    let mut f = vec![0.0; s * n];
    for j in 0..s {
        if (0..s).all(|i| a[(i, j)] == 0.0) {
            continue;
        }
        problem.eval(ctx.stage_time(j), &y[j * n..(j + 1) * n], &mut f[j * n..(j + 1) * n])?;
    }
    let mut diff = vec![0.0; n];
    for i in 0..s {
        for (dd, (&yi, &yn)) in diff.iter_mut().zip(y[i * n..(i + 1) * n].iter().zip(&ctx.y_n)) {
            *dd = yi - yn;
        }
        let oi = &mut out[i * n..(i + 1) * n];
        mass.matvec_into(&diff, oi);
        for j in 0..s {
            let kij = ctx.k * a[(i, j)];
            if kij == 0.0 {
                continue;
            }
            for (o, &fj) in oi.iter_mut().zip(&f[j * n..(j + 1) * n]) {
                *o -= kij * fj;
            }
        }
        for (&d, &g) in ctx.dirichlet_dofs.iter().zip(&ctx.dirichlet_stage_values[i]) {
            oi[d] = y[i * n + d] - g;
        }
    }
    Ok(())
}

fn require_basis(ctx: &StepContext<'_>, basis: TimeBasis) -> Result<()> {
    if ctx.method.time_basis() != basis {
        return Err(Error::Config(format!(
            "stage residual expects {basis} time basis, method uses {}",
            ctx.method.time_basis()
        )));
    }
    Ok(())
}

/// Stage residual in Lagrange form, unknowns `Y`.
pub fn residual_lagrange<P: SemidiscreteProblem + ?Sized>(
    problem: &P,
    ctx: &StepContext<'_>,
    y: &[f64],
    out: &mut [f64],
) -> Result<()> {
    require_basis(ctx, TimeBasis::Lagrange)?;
    ctx.check_len(y)?;
    residual_from_stages(problem, ctx, y, out)
}

/// Stage residual in Bernstein form, unknowns `Z`, for `c₁ ≠ 0`.
pub fn residual_bernstein<P: SemidiscreteProblem + ?Sized>(
    problem: &P,
    ctx: &StepContext<'_>,
    z: &[f64],
    out: &mut [f64],
) -> Result<()> {
    require_basis(ctx, TimeBasis::Bernstein)?;
    if ctx.method.confluent() {
        return Err(Error::Config(
            "c_1 = 0 requires the confluent Bernstein residual".into(),
        ));
    }
    ctx.check_len(z)?;
    residual_from_stages(problem, ctx, &bernstein_to_stages(ctx, z), out)
}

/// Stage residual in Bernstein form for `c₁ = 0`, where the first
/// coefficient is tied to the initial slope through `w`.
pub fn residual_bernstein_confluent<P: SemidiscreteProblem + ?Sized>(
    problem: &P,
    ctx: &StepContext<'_>,
    z: &[f64],
    out: &mut [f64],
) -> Result<()> {
    require_basis(ctx, TimeBasis::Bernstein)?;
    if !ctx.method.confluent() {
        return Err(Error::Config(
            "confluent residual needs a method with c_1 = 0".into(),
        ));
    }
    ctx.check_len(z)?;
    residual_from_stages(problem, ctx, &bernstein_to_stages(ctx, z), out)
}

/// Dispatches to the residual matching the method.
pub fn stage_residual<P: SemidiscreteProblem + ?Sized>(
    problem: &P,
    ctx: &StepContext<'_>,
    x: &[f64],
    out: &mut [f64],
) -> Result<()> {
    match (ctx.method.time_basis(), ctx.method.confluent()) {
        (TimeBasis::Lagrange, _) => residual_lagrange(problem, ctx, x, out),
        (TimeBasis::Bernstein, false) => residual_bernstein(problem, ctx, x, out),
        (TimeBasis::Bernstein, true) => residual_bernstein_confluent(problem, ctx, x, out),
    }
}

/// Jacobian of [`stage_residual`] with respect to the stage vector.
pub fn jacobian<P: SemidiscreteProblem + ?Sized>(
    problem: &P,
    ctx: &StepContext<'_>,
    x: &[f64],
) -> Result<DenseMatrix> {
    ctx.check_len(x)?;
    let n = ctx.dof_count();
    let s = ctx.stages();
    let a = &ctx.method.tableau().a;
    let y = stage_values(ctx, x);
    let mut jl = DenseMatrix::zeros(s * n, s * n);
    for i in 0..s {
        jl.add_block(i * n, i * n, 1.0, problem.mass());
    }
    for j in 0..s {
        if (0..s).all(|i| a[(i, j)] == 0.0) {
            continue;
        }
        let jf = problem.jacobian(ctx.stage_time(j), &y[j * n..(j + 1) * n])?;
        for i in 0..s {
            let kij = ctx.k * a[(i, j)];
            if kij != 0.0 {
                jl.add_block(i * n, j * n, -kij, &jf);
            }
        }
    }
    for i in 0..s {
        for &d in &ctx.dirichlet_dofs {
            let row = jl.row_mut(i * n + d);
            row.fill(0.0);
            row[i * n + d] = 1.0;
        }
    }
    if ctx.method.time_basis() == TimeBasis::Lagrange {
        return Ok(jl);
    }
    // Chain rule through Y = (V ⊗ I) Z.
    let vm = &ctx.method.transform().vmat;
    let mut jb = DenseMatrix::zeros(s * n, s * n);
    for r in 0..s * n {
        let src = jl.row(r);
        let dst = jb.row_mut(r);
        for j in 0..s {
            let block = &src[j * n..(j + 1) * n];
            if block.iter().all(|&v| v == 0.0) {
                continue;
            }
            for l in 0..s {
                let vjl = vm[(j, l)];
                if vjl == 0.0 {
                    continue;
                }
                for (o, &b) in dst[l * n..(l + 1) * n].iter_mut().zip(block) {
                    *o += b * vjl;
                }
            }
        }
    }
    Ok(jb)
}

/// Solution at `tⁿ + k` from solved stages.
///
/// Bernstein form and stiffly accurate Lagrange form read off the last
/// block. Otherwise the quadrature update `M yⁿ⁺¹ = M yⁿ + k Σ bⱼ F(Yⱼ)` is
/// solved with `mass`; problems with algebraic fields evaluate the
/// collocating polynomial at `τ = 1` instead. Dirichlet dofs always take the
/// polynomial's value at `τ = 1`.
pub fn step_update<P: SemidiscreteProblem + ?Sized>(
    problem: &P,
    ctx: &StepContext<'_>,
    x: &[f64],
    mass: Option<&MassSolver>,
) -> Result<Vec<f64>> {
    ctx.check_len(x)?;
    let n = ctx.dof_count();
    let s = ctx.stages();
    let last = x[(s - 1) * n..].to_vec();
    if ctx.method.time_basis() == TimeBasis::Bernstein || ctx.method.tableau().is_stiffly_accurate()
    {
        return Ok(last);
    }
    if problem.has_algebraic_fields() {
        return dense_output(ctx, x, 1.0);
    }
    let owned;
    let mass = match mass {
        Some(m) => m,
        None => {
            owned = MassSolver::new(problem)?;
            &owned
        }
    };
    let b = &ctx.method.tableau().b;
    let mut rhs = problem.mass().matvec(&ctx.y_n);
    let mut f = vec![0.0; n];
    for j in 0..s {
        problem.eval(ctx.stage_time(j), &x[j * n..(j + 1) * n], &mut f)?;
        for (r, &fj) in rhs.iter_mut().zip(&f) {
            *r += ctx.k * b[j] * fj;
        }
    }
    // Boundary entries follow the collocating polynomial so that both time
    // bases produce the same update.
    let end = dense_output(ctx, x, 1.0)?;
    let pinned: Vec<f64> = ctx.dirichlet_dofs.iter().map(|&d| end[d]).collect();
    Ok(mass.solve(&rhs, &pinned))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("dense output parameter {tau} outside [0, 1]")));
    }
    Ok(())
}

/// Evaluates `Σ_j weights_j · block_j` where block 0 is `yⁿ` and block
/// `j ≥ 1` is stage block `j - 1` of `x`.
fn combine(ctx: &StepContext<'_>, x: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = ctx.dof_count();
    let mut out: Vec<f64> = ctx.y_n.iter().map(|&u| weights[0] * u).collect();
    for (j, &wj) in weights.iter().enumerate().skip(1) {
        for (o, &v) in out.iter_mut().zip(&x[(j - 1) * n..j * n]) {
            *o += wj * v;
        }
    }
    out
}

/// Coefficients of the collocating polynomial at `tⁿ + τk`.
pub fn dense_output(ctx: &StepContext<'_>, x: &[f64], tau: f64) -> Result<Vec<f64>> {
    check_tau(tau)?;
    ctx.check_len(x)?;
    match (&ctx.method.interpolant, ctx.method.time_basis()) {
        (Some(basis), TimeBasis::Lagrange) => Ok(combine(ctx, x, &basis.values(tau))),
        _ => {
            let z = bernstein_coefficients(ctx, x)?;
            Ok(combine(ctx, &z, &bernstein_values(ctx.stages(), tau)))
        }
    }
}

/// Time derivative of the collocating polynomial at `tⁿ + τk`.
pub fn dense_output_rate(ctx: &StepContext<'_>, x: &[f64], tau: f64) -> Result<Vec<f64>> {
    check_tau(tau)?;
    ctx.check_len(x)?;
    let mut out = match (&ctx.method.interpolant, ctx.method.time_basis()) {
        (Some(basis), TimeBasis::Lagrange) => combine(ctx, x, &basis.derivatives(tau)),
        _ => {
            let z = bernstein_coefficients(ctx, x)?;
            combine(ctx, &z, &bernstein_derivatives(ctx.stages(), tau))
        }
    };
    for o in &mut out {
        *o /= ctx.k;
    }
    Ok(out)
}
