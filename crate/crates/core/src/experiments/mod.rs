//! Drivers for the numerical experiments: each runs a problem with a given
//! [`MethodSpec`] and returns per-step diagnostics plus a [`RunRecord`]
//! ready to be written as CSV.

mod cahn_hilliard;
mod config;
mod heat;
mod method;
mod params;
mod phyto;
mod record;

pub use cahn_hilliard::{run_cahn_hilliard, CahnHilliardRun, CahnHilliardSetup, CH_COLUMNS};
pub use config::{
    heat_suite, parse_bc, parse_init, parse_list, Experiment, Outcome, RunConfig, HEAT_SUITE_ORDERS,
};
pub use heat::{
    fit_slope, run_heat, run_heat_convergence, run_violation_scan, ConvergenceRow, HeatRun,
    ViolationCategory, ViolationScan, CONVERGENCE_COLUMNS, SCAN_COLUMNS, SCAN_TAUS,
};
pub use method::{parse_constrained, parse_family, parse_flavor, parse_time_basis, MethodSpec};
pub use params::ParamFile;
pub use phyto::{run_phyto, PhytoRun, PhytoStep, PHYTO_COLUMNS};
pub use record::{RunRecord, Value};

/// Why a time integration ended.
#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    Completed,
    /// A step starting at `time` could not be completed.
    Failed { time: f64, error: String },
}

impl StopReason {
    pub fn completed(&self) -> bool {
        matches!(self, Self::Completed)
    }

    fn annotate(&self, record: &mut RunRecord) {
        match self {
            Self::Completed => record.meta("status", "completed"),
            Self::Failed { time, error } => {
                record.meta("status", format!("failed at t = {time}: {error}"))
            }
        }
    }
}

/// 200 equispaced points of `[0, 1]` together with the collocation nodes.
pub fn dense_sample_points(nodes: &[f64]) -> Vec<f64> {
    let mut taus: Vec<f64> = (0..200).map(|j| j as f64 / 199.0).collect();
    taus.extend_from_slice(nodes);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus
}
