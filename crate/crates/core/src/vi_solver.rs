//! Newton solvers for square nonlinear systems, optionally subject to box
//! constraints in mixed complementarity form.
//!
//! The constrained solver is a reduced-space active-set method: each iteration
//! freezes the coordinates that sit on a bound with the residual pushing
//! outward and takes a Newton step on the rest.

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, norm2, DenseMatrix};

/// Width of the band around a bound within which a coordinate counts as on it.
pub const ACTIVE_TOLERANCE: f64 = 1e-12;

const MIN_STEP: f64 = 1.0 / 1024.0;
const SUFFICIENT_DECREASE: f64 = 1e-4;

/// Componentwise bounds `lower ≤ x ≤ upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxConstraint {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxConstraint {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Config(format!(
                "bound vectors differ in length: {} vs {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
            return Err(Error::Config(format!(
                "infeasible bounds at {i}: lower {} > upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// `x ≥ lower` with no upper bound.
    pub fn lower_bounded(n: usize, lower: f64) -> Self {
        Self {
            lower: vec![lower; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// Repeats these bounds `copies` times, e.g. once per stage.
    pub fn tile(&self, copies: usize) -> Self {
        Self {
            lower: self.lower.repeat(copies),
            upper: self.upper.repeat(copies),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower.iter().all(|l| *l == f64::NEG_INFINITY)
            && self.upper.iter().all(|u| *u == f64::INFINITY)
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((xi, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.max(l).min(u);
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((&xi, &l), &u)| xi >= l - tol && xi <= u + tol)
    }

    /// Coordinates on a bound whose residual pushes out of the box.
    pub fn active_set(&self, x: &[f64], f: &[f64]) -> Vec<bool> {
        (0..x.len())
            .map(|i| {
                let at_lower = x[i] - self.lower[i] <= ACTIVE_TOLERANCE;
                let at_upper = self.upper[i] - x[i] <= ACTIVE_TOLERANCE;
                (at_lower && f[i] > 0.0) || (at_upper && f[i] < 0.0)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonSettings {
    pub absolute_tolerance: f64,
    pub max_iterations: usize,
    pub line_search: bool,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            absolute_tolerance: 1e-8,
            max_iterations: 50,
            line_search: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    /// Number of linear solves performed.
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub active_set_size_history: Vec<usize>,
}

fn check_settings(settings: &NewtonSettings) -> Result<()> {
    if !(settings.absolute_tolerance > 0.0) {
        return Err(Error::Config("Newton tolerance must be positive".into()));
    }
    Ok(())
}

fn reduced_norm(f: &[f64], active: &[bool]) -> f64 {
    f.iter()
        .zip(active)
        .filter(|(_, &a)| !a)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Solves the mixed complementarity problem for `F` on `bounds`.
///
/// With `line_search` on, the step is halved until the reduced residual norm
/// decreases sufficiently; if no step down to 1/1024 qualifies, the full
/// step is taken.
///
/// Returns `Ok` with `converged = false` when the iteration budget runs out.
/// Failures of the residual evaluation or a singular reduced Jacobian are
/// errors.
pub fn solve_vi<R, J>(
    mut residual: R,
    mut jacobian: J,
    x0: &[f64],
    bounds: &BoxConstraint,
    settings: &NewtonSettings,
) -> Result<(Vec<f64>, SolveReport)>
where
    R: FnMut(&[f64], &mut [f64]) -> Result<()>,
    J: FnMut(&[f64]) -> Result<DenseMatrix>,
{
    check_settings(settings)?;
    let n = x0.len();
    if bounds.len() != n {
        return Err(Error::Config(format!(
            "bounds have length {}, initial guess {n}",
            bounds.len()
        )));
    }
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut f = vec![0.0; n];
    residual(&x, &mut f)?;
    let mut report = SolveReport::default();
    let mut trial = vec![0.0; n];
    let mut f_trial = vec![0.0; n];
    let mut full_step = vec![0.0; n];
    let mut f_full = vec![0.0; n];
    loop {
        let active = bounds.active_set(&x, &f);
        let norm = reduced_norm(&f, &active);
        report.final_residual_norm = norm;
        report
            .active_set_size_history
            .push(active.iter().filter(|&&a| a).count());
        if norm <= settings.absolute_tolerance {
            report.converged = true;
            return Ok((x, report));
        }
        if report.newton_iterations >= settings.max_iterations {
            return Ok((x, report));
        }
        let inactive: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let jac = jacobian(&x)?;
        let reduced = jac.submatrix(&inactive, &inactive)?;
        let rhs: Vec<f64> = inactive.iter().map(|&i| -f[i]).collect();
        let d = lu_factor(&reduced)?.solve(&rhs);
        report.newton_iterations += 1;

        let mut lambda = 1.0;
        loop {
            trial.copy_from_slice(&x);
            for (&i, &di) in inactive.iter().zip(&d) {
                trial[i] += lambda * di;
            }
            bounds.project(&mut trial);
            residual(&trial, &mut f_trial)?;
            if !settings.line_search {
                break;
            }
            let trial_norm = reduced_norm(&f_trial, &bounds.active_set(&trial, &f_trial));
            if trial_norm <= (1.0 - SUFFICIENT_DECREASE * lambda) * norm {
                break;
            }
            if lambda == 1.0 {
                full_step.copy_from_slice(&trial);
                f_full.copy_from_slice(&f_trial);
            }
            if lambda <= MIN_STEP {
                trial.copy_from_slice(&full_step);
                f_trial.copy_from_slice(&f_full);
                break;
            }
            lambda *= 0.5;
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut f, &mut f_trial);
    }
}

/// Plain Newton iteration with the same stopping rule and line search as
/// [`solve_vi`].
pub fn solve_unconstrained<R, J>(
    mut residual: R,
    mut jacobian: J,
    x0: &[f64],
    settings: &NewtonSettings,
) -> Result<(Vec<f64>, SolveReport)>
where
    R: FnMut(&[f64], &mut [f64]) -> Result<()>,
    J: FnMut(&[f64]) -> Result<DenseMatrix>,
{
    check_settings(settings)?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = vec![0.0; n];
    residual(&x, &mut f)?;
    let mut report = SolveReport::default();
    let mut trial = vec![0.0; n];
    let mut f_trial = vec![0.0; n];
    let mut full_step = vec![0.0; n];
    let mut f_full = vec![0.0; n];
    loop {
        let norm = norm2(&f);
        report.final_residual_norm = norm;
        report.active_set_size_history.push(0);
        if norm <= settings.absolute_tolerance {
            report.converged = true;
            return Ok((x, report));
        }
        if report.newton_iterations >= settings.max_iterations {
            return Ok((x, report));
        }
        let jac = jacobian(&x)?;
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let d = lu_factor(&jac)?.solve(&rhs);
        report.newton_iterations += 1;

        let mut lambda = 1.0;
        loop {
            for ((t, &xi), &di) in trial.iter_mut().zip(&x).zip(&d) {
                *t = xi + lambda * di;
            }
            residual(&trial, &mut f_trial)?;
            if !settings.line_search {
                break;
            }
            if norm2(&f_trial) <= (1.0 - SUFFICIENT_DECREASE * lambda) * norm {
                break;
            }
            if lambda == 1.0 {
                full_step.copy_from_slice(&trial);
                f_full.copy_from_slice(&f_trial);
            }
            if lambda <= MIN_STEP {
                trial.copy_from_slice(&full_step);
                f_trial.copy_from_slice(&f_full);
                break;
            }
            lambda *= 0.5;
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut f, &mut f_trial);
    }
}

/// Largest complementarity defect over all coordinates, measured as
/// `min(x - l, max(F, 0))` and `min(u - x, max(-F, 0))`.
pub fn complementarity_defect(x: &[f64], f: &[f64], bounds: &BoxConstraint) -> f64 {
    (0..x.len())
        .map(|i| {
            let lo = (x[i] - bounds.lower()[i]).min(f[i].max(0.0));
            let hi = (bounds.upper()[i] - x[i]).min((-f[i]).max(0.0));
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear<'a>(a: &'a DenseMatrix, b: &[f64]) -> impl Fn(&[f64], &mut [f64]) -> Result<()> + 'a {
        let b = b.to_vec();
        move |x, out| {
            a.matvec_into(x, out);
            for (o, bi) in out.iter_mut().zip(&b) {
                *o -= bi;
            }
            Ok(())
        }
    }

    #[test]
    fn scalar_complementarity_at_lower_bound() {
        let bounds = BoxConstraint::uniform(1, 0.0, f64::INFINITY).unwrap();
        let (x, rep) = solve_vi(
            |x, f| {
                f[0] = x[0] + 1.0;
                Ok(())
            },
            |_| Ok(DenseMatrix::identity(1)),
            &[3.0],
            &bounds,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(x[0], 0.0);
    }

    #[test]
    fn linear_system_one_iteration() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let b = [1.0, 2.0];
        let (_, rep) = solve_unconstrained(
            linear(&a, &b),
            |_| Ok(a.clone()),
            &[0.0, 0.0],
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(rep.newton_iterations, 1);
    }

    #[test]
    fn infinite_bounds_match_plain_newton_bitwise() {
        let res = |x: &[f64], f: &mut [f64]| -> Result<()> {
            f[0] = x[0] * x[0] + x[1] - 3.0;
            f[1] = x[0] - x[1] * x[1] * x[1] + 0.5;
            Ok(())
        };
        let jac = |x: &[f64]| -> Result<DenseMatrix> {
            Ok(DenseMatrix::from_rows(&[
                vec![2.0 * x[0], 1.0],
                vec![1.0, -3.0 * x[1] * x[1]],
            ]))
        };
        let settings = NewtonSettings::default();
        let (xa, ra) =
            solve_vi(res, jac, &[1.0, 1.0], &BoxConstraint::unbounded(2), &settings).unwrap();
        let (xb, rb) = solve_unconstrained(res, jac, &[1.0, 1.0], &settings).unwrap();
        assert!(ra.converged);
        assert_eq!(xa, xb);
        assert_eq!(ra.newton_iterations, rb.newton_iterations);
        assert_eq!(ra.final_residual_norm.to_bits(), rb.final_residual_norm.to_bits());
    }

    #[test]
    fn riccati_backward_euler_matches_bisection() {
        // y' = y², one implicit Euler step: Y - y0 - k Y² = 0
        let (y0, k) = (1.0, 0.1);
        let g = |y: f64| y - y0 - k * y * y;
        let (mut lo, mut hi) = (0.5, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let (x, rep) = solve_unconstrained(
            |x, f| {
                f[0] = g(x[0]);
                Ok(())
            },
            |x| Ok(DenseMatrix::from_rows(&[vec![1.0 - 2.0 * k * x[0]]])),
            &[y0],
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!(rep.converged && rep.newton_iterations <= 5);
        assert!((x[0] - oracle).abs() < 1e-12);
    }

    #[test]
    fn iteration_budget_reports_non_convergence() {
        let settings = NewtonSettings {
            max_iterations: 2,
            line_search: false,
            ..Default::default()
        };
        let (_, rep) = solve_unconstrained(
            |x, f| {
                f[0] = x[0].atan();
                Ok(())
            },
            |x| Ok(DenseMatrix::from_rows(&[vec![1.0 / (1.0 + x[0] * x[0])]])),
            &[3.0],
            &settings,
        )
        .unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.newton_iterations, 2);
    }

    #[test]
    fn singular_reduced_jacobian_is_an_error() {
        let r = solve_unconstrained(
            |x, f| {
                f[0] = x[0] + x[1] - 1.0;
                f[1] = x[0] + x[1] - 2.0;
                Ok(())
            },
            |_| Ok(DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]])),
            &[0.0, 0.0],
            &NewtonSettings::default(),
        );
        assert!(matches!(r, Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn infeasible_bounds_rejected() {
        assert!(matches!(
            BoxConstraint::new(vec![0.0, 2.0], vec![1.0, 1.0]),
            Err(Error::Config(_))
        ));
    }

    /// Projection of `z` onto `x ≥ 0` in the `M`-norm by trying every active set.
    fn brute_force_projection(m: &DenseMatrix, z: &[f64]) -> Vec<f64> {
        let n = z.len();
        let mz = m.matvec(z);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 0u32..(1 << n) {
            let free: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
            let mut x = vec![0.0; n];
            if !free.is_empty() {
                let sub = m.submatrix(&free, &free).unwrap();
                let rhs: Vec<f64> = free.iter().map(|&i| mz[i]).collect();
                let sol = lu_factor(&sub).unwrap().solve(&rhs);
                for (&i, v) in free.iter().zip(sol) {
                    x[i] = v;
                }
            }
            if x.iter().any(|&v| v < -1e-13) {
                continue;
            }
            let f: Vec<f64> = m.matvec(&x).iter().zip(&mz).map(|(a, b)| a - b).collect();
            if (0..n).any(|i| mask & (1 << i) != 0 && f[i] < -1e-11) {
                continue;
            }
            let diff: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
            let obj: f64 = diff.iter().zip(m.matvec(&diff)).map(|(a, b)| a * b).sum();
            if best.as_ref().map_or(true, |(o, _)| obj < *o) {
                best = Some((obj, x));
            }
        }
        best.unwrap().1
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let b = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut m = b.transpose().matmul(&b);
        for i in 0..n {
            m[(i, i)] += 0.5;
        }
        m
    }

    #[test]
    fn obstacle_projection_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let n = 2 + trial % 9;
            let m = random_spd(&mut rng, n);
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mz = m.matvec(&z);
            let bounds = BoxConstraint::uniform(n, 0.0, f64::INFINITY).unwrap();
            let (x, rep) = solve_vi(
                linear(&m, &mz),
                |_| Ok(m.clone()),
                &vec![0.0; n],
                &bounds,
                &NewtonSettings::default(),
            )
            .unwrap();
            assert!(rep.converged, "trial {trial}");
            let oracle = brute_force_projection(&m, &z);
            for (a, b) in x.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "trial {trial}: {x:?} vs {oracle:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn solutions_feasible_and_complementary(
            seed in 0u64..10_000,
            n in 1usize..8,
            lo in -1.0f64..0.0,
            width in 0.0f64..2.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_spd(&mut rng, n);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let bounds = BoxConstraint::uniform(n, lo, lo + width).unwrap();
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let (x, rep) = solve_vi(
                linear(&m, &b), |_| Ok(m.clone()), &x0, &bounds, &NewtonSettings::default(),
            ).unwrap();
            prop_assert!(rep.converged);
            prop_assert!(bounds.contains(&x, 1e-15));
            let mut f = vec![0.0; n];
            linear(&m, &b)(&x, &mut f).unwrap();
            prop_assert!(complementarity_defect(&x, &f, &bounds) <= 1e-7);
        }
    }
}
