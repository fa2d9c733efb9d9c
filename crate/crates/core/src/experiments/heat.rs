use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem1d::{build_space, error_norms, FeFunction, Mesh1D};
use crate::problems::{heat_mms_problem, HeatProblem, HeatVariant};
use crate::stage_system::TimeStepper;
use crate::vi_solver::NewtonSettings;

use super::{MethodSpec, RunRecord, StopReason};

/// Outcome of one heat run on `[0, 1]` with `cells` uniform cells.
#[derive(Clone, Debug)]
pub struct HeatRun {
    pub method: MethodSpec,
    pub variant: HeatVariant,
    pub cells: usize,
    pub k: f64,
    /// L² and H¹ errors at the final time reached.
    pub l2_error: f64,
    pub h1_error: f64,
    pub newton_iterations: Vec<usize>,
    pub final_time: f64,
    pub stop: StopReason,
}

impl HeatRun {
    pub fn mean_iterations(&self) -> f64 {
        if self.newton_iterations.is_empty() {
            return f64::NAN;
        }
        self.newton_iterations.iter().sum::<usize>() as f64 / self.newton_iterations.len() as f64
    }
}

fn setup(method: &MethodSpec, variant: HeatVariant, cells: usize) -> Result<HeatProblem> {
    let mesh = Mesh1D::uniform(0.0, 1.0, cells, false)?;
    let space = build_space(mesh, method.spatial_degree, method.spatial_flavor)?;
    heat_mms_problem(space, variant)
}

fn step_count(k: f64, t_final: f64) -> Result<usize> {
    if !(k > 0.0) || !(t_final > 0.0) {
        return Err(Error::Config(format!("need k > 0 and T > 0, got k={k}, T={t_final}")));
    }
    Ok((t_final / k).round().max(1.0) as usize)
}

pub fn run_heat(
    method: &MethodSpec,
    variant: HeatVariant,
    cells: usize,
    k: f64,
    t_final: f64,
) -> Result<HeatRun> {
    let n_steps = step_count(k, t_final)?;
    let problem = setup(method, variant, cells)?;
    let bounds = method.constrained.then(|| problem.bounds());
    let mut y = problem.initial_state(bounds.as_ref())?;
    let stepper = TimeStepper::new(&problem, method.collocation_method()?, bounds, NewtonSettings::default())?;
    let mut newton_iterations = Vec::with_capacity(n_steps);
    let mut stop = StopReason::Completed;
    let mut t = 0.0;
    for n in 0..n_steps {
        match stepper.step(n as f64 * k, k, &y) {
            Ok(res) => {
                newton_iterations.push(res.report.newton_iterations);
                y = res.y_next;
                t = (n + 1) as f64 * k;
            }
            Err(e) => {
                stop = StopReason::Failed { time: n as f64 * k, error: e.to_string() };
                break;
            }
        }
    }
    let uh = FeFunction::new(&problem.space, y)?;
    let (l2_error, h1_error) = error_norms(&uh, |x| variant.exact(t, x), |x| variant.exact_dx(t, x));
    Ok(HeatRun {
        method: *method,
        variant,
        cells,
        k,
        l2_error,
        h1_error,
        newton_iterations,
        final_time: t,
        stop,
    })
}

/// One `(method, N)` entry of a convergence table.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub method: MethodSpec,
    pub cells: usize,
    pub run: HeatRun,
}

pub const CONVERGENCE_COLUMNS: [&str; 8] = [
    "method",
    "N",
    "k",
    "l2_error",
    "h1_error",
    "avg_newton_its",
    "max_newton_its",
    "completed",
];

/// Runs every `(method, N)` pair with `k = 1/N` to `T = 1`, in parallel.
/// Rows come back grouped by method in the order given, then by `N`.
pub fn run_heat_convergence(
    methods: &[MethodSpec],
    cells: &[usize],
    variant: HeatVariant,
) -> Result<(Vec<ConvergenceRow>, RunRecord)> {
    let jobs: Vec<(MethodSpec, usize)> = methods
        .iter()
        .flat_map(|m| cells.iter().map(move |&n| (*m, n)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(method, n)| {
            let run = run_heat(&method, variant, n, 1.0 / n as f64, 1.0)?;
            Ok(ConvergenceRow { method, cells: n, run })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut record = RunRecord::new(&CONVERGENCE_COLUMNS);
    record.meta("problem", format!("heat ({variant})"));
    record.meta("tfinal", 1.0);
    for row in &rows {
        record.push(vec![
            row.method.to_string().into(),
            row.cells.into(),
            row.run.k.into(),
            row.run.l2_error.into(),
            row.run.h1_error.into(),
            row.run.mean_iterations().into(),
            row.run.newton_iterations.iter().copied().max().unwrap_or(0).into(),
            usize::from(row.run.stop.completed()).into(),
        ]);
    }
    for m in methods {
        let (ns, l2, h1) = series(&rows, m);
        record.meta(
            &format!("slopes {m}"),
            format!("L2 {:.3}, H1 {:.3}", fit_slope(&ns, &l2), fit_slope(&ns, &h1)),
        );
    }
    Ok((rows, record))
}

fn series(rows: &[ConvergenceRow], m: &MethodSpec) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut ns = Vec::new();
    let mut l2 = Vec::new();
    let mut h1 = Vec::new();
    for r in rows.iter().filter(|r| r.method == *m) {
        ns.push(r.cells as f64);
        l2.push(r.run.l2_error);
        h1.push(r.run.h1_error);
    }
    (ns, l2, h1)
}

/// Least-squares slope of `−log(err)` against `log(N)`, i.e. the observed
/// order when `err ≈ C N^{-p}`.
pub fn fit_slope(ns: &[f64], errors: &[f64]) -> f64 {
    let x: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| -e.ln()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCategory {
    AtDofAtCollocation,
    BetweenDofsAtCollocation,
    AtDofBetweenCollocation,
    BetweenDofsBetweenCollocation,
}

impl ViolationCategory {
    pub const ALL: [Self; 4] = [
        Self::AtDofAtCollocation,
        Self::BetweenDofsAtCollocation,
        Self::AtDofBetweenCollocation,
        Self::BetweenDofsBetweenCollocation,
    ];

    pub fn classify(at_dof: bool, at_collocation: bool) -> Self {
        match (at_dof, at_collocation) {
            (true, true) => Self::AtDofAtCollocation,
            (false, true) => Self::BetweenDofsAtCollocation,
            (true, false) => Self::AtDofBetweenCollocation,
            (false, false) => Self::BetweenDofsBetweenCollocation,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ViolationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AtDofAtCollocation => "at-dof/at-collocation",
            Self::BetweenDofsAtCollocation => "between-dofs/at-collocation",
            Self::AtDofBetweenCollocation => "at-dof/between-collocation",
            Self::BetweenDofsBetweenCollocation => "between-dofs/between-collocation",
        })
    }
}

/// Negative values of the space-time dense output of a constrained heat run,
/// sampled on a fixed `(τ, x)` grid in every step.
#[derive(Clone, Debug)]
pub struct ViolationScan {
    pub method: MethodSpec,
    pub cells: usize,
    pub k: f64,
    pub tolerance: f64,
    /// Violating samples per [`ViolationCategory`].
    pub counts: [usize; 4],
    /// Most negative sample per category (`+∞` when nothing was sampled).
    pub minima: [f64; 4],
    pub record: RunRecord,
    pub stop: StopReason,
}

impl ViolationScan {
    pub fn count(&self, cat: ViolationCategory) -> usize {
        self.counts[cat.index()]
    }

    pub fn minimum(&self, cat: ViolationCategory) -> f64 {
        self.minima[cat.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub const SCAN_COLUMNS: [&str; 10] = [
    "time",
    "vios_dof_coll",
    "vios_between_coll",
    "vios_dof_offcoll",
    "vios_between_offcoll",
    "min_dof_coll",
    "min_between_coll",
    "min_dof_offcoll",
    "min_between_offcoll",
    "newton_its",
];

pub const SCAN_TAUS: [f64; 5] = [0.01, 1.0 / 3.0, 0.5, 0.99, 1.0];

/// Values below `-tolerance` count as violations.
pub fn run_violation_scan(
    method: &MethodSpec,
    cells: usize,
    k: f64,
    t_final: f64,
    tolerance: f64,
) -> Result<ViolationScan> {
    let n_steps = step_count(k, t_final)?;
    let problem = setup(method, HeatVariant::Front, cells)?;
    let bounds = method.constrained.then(|| problem.bounds());
    let mut y = problem.initial_state(bounds.as_ref())?;
    let stepper = TimeStepper::new(&problem, method.collocation_method()?, bounds, NewtonSettings::default())?;
    let nodes = stepper.method().nodes().to_vec();

    let dof_x = problem.space.dof_positions();
    let mut xs: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
    xs.extend_from_slice(&dof_x);
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let at_dof: Vec<bool> = xs
        .iter()
        .map(|x| dof_x.iter().any(|d| (d - x).abs() < 1e-14))
        .collect();

    let mut record = RunRecord::new(&SCAN_COLUMNS);
    record.meta("problem", "heat (front)");
    record.meta("method", method);
    record.meta("cells", cells);
    record.meta("dt", k);
    record.meta("tolerance", format!("{tolerance:e}"));
    record.meta("taus", format!("{SCAN_TAUS:?}"));
    record.meta("x_samples", xs.len());
    let mut counts = [0usize; 4];
    let mut minima = [f64::INFINITY; 4];
    let mut stop = StopReason::Completed;
    for n in 0..n_steps {
        let t_n = n as f64 * k;
        let res = match stepper.step(t_n, k, &y) {
            Ok(r) => r,
            Err(e) => {
                stop = StopReason::Failed { time: t_n, error: e.to_string() };
                break;
            }
        };
        let mut step_counts = [0usize; 4];
        let mut step_minima = [f64::INFINITY; 4];
        for &tau in &SCAN_TAUS {
            let at_coll = nodes.iter().any(|c| (c - tau).abs() < 1e-14);
            let coeffs = res.dense_output(tau)?;
            for (&x, &on_dof) in xs.iter().zip(&at_dof) {
                let v = problem.space.eval(&coeffs, x)?;
                let cat = ViolationCategory::classify(on_dof, at_coll).index();
                step_minima[cat] = step_minima[cat].min(v);
                if v < -tolerance {
                    step_counts[cat] += 1;
                }
            }
        }
        let mut row = vec![((n + 1) as f64 * k).into()];
        row.extend(step_counts.iter().map(|&c| c.into()));
        row.extend(step_minima.iter().map(|&m| m.into()));
        row.push(res.report.newton_iterations.into());
        record.push(row);
        for i in 0..4 {
            counts[i] += step_counts[i];
            minima[i] = minima[i].min(step_minima[i]);
        }
        y = res.y_next;
    }
    for cat in ViolationCategory::ALL {
        record.meta(
            &format!("violations {cat}"),
            format!("{} (min {:e})", counts[cat.index()], minima[cat.index()]),
        );
    }
    stop.annotate(&mut record);
    Ok(ViolationScan {
        method: *method,
        cells,
        k,
        tolerance,
        counts,
        minima,
        record,
        stop,
    })
}
