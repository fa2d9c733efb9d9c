use crate::error::{Error, Result};
use crate::fem1d::{build_space, Mesh1D};
use crate::problems::{
    cahn_hilliard_problem, free_energy, BoundaryCondition, CahnHilliardParams, InitialCondition,
};
use crate::stage_system::TimeStepper;
use crate::vi_solver::NewtonSettings;

use super::{MethodSpec, RunRecord, StopReason};

/// Configuration of a Cahn–Hilliard run on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CahnHilliardSetup {
    pub method: MethodSpec,
    pub params: CahnHilliardParams,
    pub bc: BoundaryCondition,
    pub init: InitialCondition,
    pub cells: usize,
    pub k: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct CahnHilliardRun {
    pub setup: CahnHilliardSetup,
    /// Free energy of the initial state followed by one value per step.
    pub energies: Vec<f64>,
    /// `(min, max)` over the `c` coefficients after each step.
    pub extremes: Vec<(f64, f64)>,
    /// `∫ c` of the initial state followed by one value per step.
    pub masses: Vec<f64>,
    pub newton_iterations: Vec<usize>,
    pub record: RunRecord,
    pub stop: StopReason,
}

impl CahnHilliardRun {
    pub fn total_iterations(&self) -> usize {
        self.newton_iterations.iter().sum()
    }

    pub fn mean_iterations(&self) -> f64 {
        self.total_iterations() as f64 / self.newton_iterations.len().max(1) as f64
    }

    /// Largest one-step increase of the free energy (negative if it always
    /// decreased).
    pub fn max_energy_increase(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub const CH_COLUMNS: [&str; 6] = ["time", "energy", "min_c", "max_c", "mass", "newton_its"];

/// Integrates for `setup.steps` steps. Solver failures and singular
/// potential evaluations stop the run and are reported in `stop`.
pub fn run_cahn_hilliard(setup: &CahnHilliardSetup) -> Result<CahnHilliardRun> {
    if !(setup.k > 0.0) {
        return Err(Error::Config(format!("need k > 0, got {}", setup.k)));
    }
    let mesh = Mesh1D::uniform(0.0, 1.0, setup.cells, setup.bc == BoundaryCondition::Periodic)?;
    let space = build_space(mesh, setup.method.spatial_degree, setup.method.spatial_flavor)?;
    let problem = cahn_hilliard_problem(space, setup.params)?;
    let n = problem.scalar_dofs();
    let bounds = setup.method.constrained.then(|| problem.bounds());
    let stepper = TimeStepper::new(
        &problem,
        setup.method.collocation_method()?,
        bounds,
        NewtonSettings::default(),
    )?;

    let mut record = RunRecord::new(&CH_COLUMNS);
    record.meta("problem", "cahn-hilliard");
    record.meta("method", setup.method);
    record.meta("cells", setup.cells);
    record.meta("bc", setup.bc);
    record.meta("init", setup.init);
    record.meta("dt", setup.k);
    record.meta("steps", setup.steps);
    record.meta("params", format!("{:?}", setup.params));

    let mut y = problem.initial_state(setup.init)?;
    let mut energies = vec![free_energy(&problem.space, &y[..n], &setup.params)?];
    let mut masses = vec![problem.total_mass(&y[..n])];
    let mut extremes = Vec::new();
    let mut newton_iterations = Vec::new();
    let mut stop = StopReason::Completed;
    for step in 0..setup.steps {
        let t = step as f64 * setup.k;
        let advanced = stepper.step(t, setup.k, &y).and_then(|res| {
            let e = free_energy(&problem.space, &res.y_next[..n], &setup.params)?;
            Ok((res.y_next, res.report.newton_iterations, e))
        });
        let (y_next, its, energy) = match advanced {
            Ok(v) => v,
            Err(e) => {
                stop = StopReason::Failed {
                    time: t,
                    error: format!("step {step}: {e}"),
                };
                break;
            }
        };
        y = y_next;
        let c = &y[..n];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mass = problem.total_mass(c);
        let time = (step + 1) as f64 * setup.k;
        record.push(vec![time.into(), energy.into(), lo.into(), hi.into(), mass.into(), its.into()]);
        energies.push(energy);
        masses.push(mass);
        extremes.push((lo, hi));
        newton_iterations.push(its);
    }
    record.meta("total_newton_its", newton_iterations.iter().sum::<usize>());
    stop.annotate(&mut record);
    Ok(CahnHilliardRun {
        setup: *setup,
        energies,
        extremes,
        masses,
        newton_iterations,
        record,
        stop,
    })
}
