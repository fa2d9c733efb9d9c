use crate::error::{Error, Result};
use crate::problems::{linear_invariants, phyto_problem, PhytoParams};
use crate::stage_system::TimeStepper;
use crate::vi_solver::NewtonSettings;

use super::{dense_sample_points, MethodSpec, RunRecord, StopReason};

/// Per-step diagnostics of a phytoplankton run.
#[derive(Clone, Debug)]
pub struct PhytoStep {
    /// End time of the step.
    pub time: f64,
    pub state: Vec<f64>,
    /// `(C + P + D, N + P + D)` at the end of the step.
    pub invariants: (f64, f64),
    /// Smallest component over all stage values `Y_i`.
    pub min_stage_value: f64,
    /// Smallest stage value of `N`.
    pub min_stage_n: f64,
    /// Smallest component of the dense output over the sample points.
    pub min_dense_output: f64,
    pub newton_iterations: usize,
    /// Number of bounds active in the accepted stage solution.
    pub active_bounds: usize,
    /// A constrained run whose step update left the bounds. This happens for
    /// Lagrange-form schemes that are not stiffly accurate, and is reported
    /// rather than repaired.
    pub update_violation: bool,
}

#[derive(Clone, Debug)]
pub struct PhytoRun {
    pub method: MethodSpec,
    pub initial_state: Vec<f64>,
    pub steps: Vec<PhytoStep>,
    pub record: RunRecord,
    pub stop: StopReason,
}

impl PhytoRun {
    pub fn initial_invariants(&self) -> (f64, f64) {
        linear_invariants(&self.initial_state)
    }

    /// Largest change of either invariant over one step, split by whether
    /// the step had active bounds: `(inactive, active)`.
    pub fn invariant_drift(&self) -> (f64, f64) {
        let mut prev = self.initial_invariants();
        let (mut inactive, mut active) = (0.0f64, 0.0f64);
        for st in &self.steps {
            let d = (st.invariants.0 - prev.0).abs().max((st.invariants.1 - prev.1).abs());
            if st.active_bounds > 0 {
                active = active.max(d);
            } else {
                inactive = inactive.max(d);
            }
            prev = st.invariants;
        }
        (inactive, active)
    }
}

const UPDATE_TOLERANCE: f64 = 1e-10;

pub const PHYTO_COLUMNS: [&str; 9] = [
    "time",
    "C",
    "N",
    "P",
    "D",
    "CPD_inv",
    "NPD_inv",
    "min_dense_output",
    "newton_its",
];

/// Integrates the model with fixed steps `k` up to `t_final`. A failed
/// step ends the run early and is reported in `stop`; configuration errors
/// are returned directly.
pub fn run_phyto(method: &MethodSpec, params: PhytoParams, k: f64, t_final: f64) -> Result<PhytoRun> {
    if !(k > 0.0) || !(t_final > 0.0) {
        return Err(Error::Config(format!("need k > 0 and T > 0, got k={k}, T={t_final}")));
    }
    let problem = phyto_problem(params)?;
    let cm = method.collocation_method()?;
    let bounds = method.constrained.then(|| problem.bounds());
    let stepper = TimeStepper::new(&problem, cm, bounds, NewtonSettings::default())?;
    let taus = dense_sample_points(stepper.method().nodes());

    let mut record = RunRecord::new(&PHYTO_COLUMNS);
    record.meta("problem", "phytoplankton");
    record.meta("method", method.time_label());
    record.meta("dt", k);
    record.meta("tfinal", t_final);
    record.meta("params", format!("{params:?}"));

    let initial_state = problem.params.initial_state();
    let mut y = initial_state.clone();
    let mut steps = Vec::new();
    let n_steps = (t_final / k).round().max(1.0) as usize;
    let mut stop = StopReason::Completed;
    let mut flagged = Vec::new();
    for n in 0..n_steps {
        let t = n as f64 * k;
        let res = match stepper.step(t, k, &y) {
            Ok(r) => r,
            Err(e) => {
                stop = StopReason::Failed { time: t, error: e.to_string() };
                break;
            }
        };
        let stages = res.stage_values();
        let min_stage_value = stages.iter().copied().fold(f64::INFINITY, f64::min);
        let min_stage_n = stages.iter().skip(1).step_by(4).copied().fold(f64::INFINITY, f64::min);
        let mut min_dense = f64::INFINITY;
        for &tau in &taus {
            for v in res.dense_output(tau)? {
                min_dense = min_dense.min(v);
            }
        }
        y = res.y_next.clone();
        let inv = linear_invariants(&y);
        let its = res.report.newton_iterations;
        let active = res.report.active_set_size_history.last().copied().unwrap_or(0);
        let time = (n + 1) as f64 * k;
        let update_violation = method.constrained && y.iter().any(|&v| v < -UPDATE_TOLERANCE);
        if update_violation {
            flagged.push(time);
        }
        record.push(vec![
            time.into(),
            y[0].into(),
            y[1].into(),
            y[2].into(),
            y[3].into(),
            inv.0.into(),
            inv.1.into(),
            min_dense.into(),
            its.into(),
        ]);
        steps.push(PhytoStep {
            time,
            state: y.clone(),
            invariants: inv,
            min_stage_value,
            min_stage_n,
            min_dense_output: min_dense,
            newton_iterations: its,
            active_bounds: active,
            update_violation,
        });
    }
    if !flagged.is_empty() {
        record.meta("update_bound_violations", format!("{flagged:?}"));
    }
    stop.annotate(&mut record);
    Ok(PhytoRun {
        method: *method,
        initial_state,
        steps,
        record,
        stop,
    })
}
