use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem1d::BasisFlavor;
use crate::problems::{BoundaryCondition, CahnHilliardParams, HeatVariant, InitialCondition, PhytoParams};
use crate::stage_system::TimeBasis;
use crate::tableau::CollocationFamily;

use super::{
    parse_constrained, parse_family, parse_flavor, parse_time_basis, run_cahn_hilliard,
    run_heat_convergence, run_phyto, run_violation_scan, CahnHilliardSetup, MethodSpec, ParamFile,
    RunRecord,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Phyto,
    HeatConvergence,
    HeatViolations,
    CahnHilliard,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Phyto => "phyto",
            Self::HeatConvergence => "heat-conv",
            Self::HeatViolations => "heat-vios",
            Self::CahnHilliard => "cahn-hilliard",
        })
    }
}

/// Everything needed to run one experiment. Start from
/// [`RunConfig::defaults`], then override fields or apply a parameter file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub space: BasisFlavor,
    pub degree: usize,
    pub family: CollocationFamily,
    pub stages: usize,
    pub time_basis: TimeBasis,
    pub constrained: bool,
    pub dt: f64,
    pub tfinal: f64,
    pub cells: Vec<usize>,
    pub seed: u64,
    /// Run every `(r, s)` pair and basis combination instead of one method.
    pub suite: bool,
    pub violation_tolerance: f64,
    pub phyto: PhytoParams,
    pub ch: CahnHilliardParams,
    pub bc: BoundaryCondition,
    pub random_init: bool,
}

/// `(r, s)` pairs of the heat convergence suite.
pub const HEAT_SUITE_ORDERS: [(usize, usize); 4] = [(1, 2), (2, 2), (2, 3), (3, 3)];

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            space: BasisFlavor::Lagrange,
            degree: 1,
            family: CollocationFamily::RadauIIA,
            stages: 2,
            time_basis: TimeBasis::Lagrange,
            constrained: false,
            dt: 1.0,
            tfinal: 20.0,
            cells: vec![1],
            seed: 0,
            suite: false,
            violation_tolerance: 1e-10,
            phyto: PhytoParams::default(),
            ch: CahnHilliardParams::default(),
            bc: BoundaryCondition::Neumann,
            random_init: false,
        };
        match experiment {
            Experiment::Phyto => base,
            Experiment::HeatConvergence => Self {
                constrained: true,
                dt: f64::NAN,
                tfinal: 1.0,
                cells: vec![4, 8, 16, 32, 64],
                ..base
            },
            Experiment::HeatViolations => Self {
                degree: 2,
                constrained: true,
                dt: 0.125,
                tfinal: 0.5,
                cells: vec![8],
                ..base
            },
            Experiment::CahnHilliard => Self {
                space: BasisFlavor::Bernstein,
                degree: 2,
                time_basis: TimeBasis::Bernstein,
                constrained: true,
                dt: 1e-4,
                tfinal: 0.05,
                cells: vec![100],
                ..base
            },
        }
    }

    pub fn method(&self) -> MethodSpec {
        MethodSpec::new(
            self.space,
            self.degree,
            self.family,
            self.stages,
            self.time_basis,
            self.constrained,
        )
    }

    fn single_cells(&self) -> Result<usize> {
        match self.cells.as_slice() {
            [n] => Ok(*n),
            _ => Err(Error::Config(format!(
                "{} takes a single cell count, got {:?}",
                self.experiment, self.cells
            ))),
        }
    }

    /// Keys accepted in a parameter file for this experiment.
    pub fn allowed_keys(&self) -> Vec<&'static str> {
        let mut keys = vec![
            "space", "degree", "family", "stages", "time_basis", "constrained", "dt", "tfinal",
            "cells", "seed",
        ];
        match self.experiment {
            Experiment::Phyto => keys.extend([
                "a", "b", "k_c", "k_n", "r_max", "e", "c0", "n0", "p0", "d0",
            ]),
            Experiment::HeatConvergence => keys.push("suite"),
            Experiment::HeatViolations => keys.push("tolerance"),
            Experiment::CahnHilliard => keys.extend([
                "theta0", "theta_c", "epsilon", "mobility", "delta_reg", "delta_b", "bc", "init",
                "steps",
            ]),
        }
        keys
    }

    /// Overrides fields with the entries of `params`. Unknown keys are errors.
    pub fn apply_params(&mut self, params: &ParamFile) -> Result<()> {
        params.check_keys(&self.allowed_keys())?;
        if let Some(v) = params.raw("space") {
            self.space = parse_flavor(v)?;
        }
        if let Some(v) = params.raw("family") {
            self.family = parse_family(v)?;
        }
        if let Some(v) = params.raw("time_basis") {
            self.time_basis = parse_time_basis(v)?;
        }
        if let Some(v) = params.raw("constrained") {
            self.constrained = parse_constrained(v)?;
        }
        if let Some(v) = params.raw("cells") {
            self.cells = parse_list(v)?;
        }
        if let Some(v) = params.raw("bc") {
            self.bc = parse_bc(v)?;
        }
        if let Some(v) = params.raw("init") {
            self.random_init = parse_init(v)?;
        }
        params.set("degree", &mut self.degree)?;
        params.set("stages", &mut self.stages)?;
        params.set("dt", &mut self.dt)?;
        params.set("tfinal", &mut self.tfinal)?;
        params.set("seed", &mut self.seed)?;
        params.set("suite", &mut self.suite)?;
        params.set("tolerance", &mut self.violation_tolerance)?;
        let p = &mut self.phyto;
        for (key, field) in [
            ("a", &mut p.a),
            ("b", &mut p.b),
            ("k_c", &mut p.k_c),
            ("k_n", &mut p.k_n),
            ("r_max", &mut p.r_max),
            ("e", &mut p.e),
            ("c0", &mut p.c0),
            ("n0", &mut p.n0),
            ("p0", &mut p.p0),
            ("d0", &mut p.d0),
        ] {
            params.set(key, field)?;
        }
        let c = &mut self.ch;
        for (key, field) in [
            ("theta0", &mut c.theta0),
            ("theta_c", &mut c.theta_c),
            ("epsilon", &mut c.epsilon),
            ("mobility", &mut c.mobility),
            ("delta_reg", &mut c.delta_reg),
            ("delta_b", &mut c.delta_b),
        ] {
            params.set(key, field)?;
        }
        if let Some(steps) = params.get::<usize>("steps")? {
            self.tfinal = steps as f64 * self.dt;
        }
        Ok(())
    }

    /// Runs the experiment. Solver failures do not make this an `Err`; they
    /// come back with `completed = false` and a partial record.
    pub fn execute(&self) -> Result<Outcome> {
        let method = self.method();
        let mut outcome = match self.experiment {
            Experiment::Phyto => {
                let run = run_phyto(&method, self.phyto, self.dt, self.tfinal)?;
                let (inactive, active) = run.invariant_drift();
                let min_dense = run
                    .steps
                    .iter()
                    .map(|s| s.min_dense_output)
                    .fold(f64::INFINITY, f64::min);
                Outcome {
                    summary: format!(
                        "{}: {} steps, min dense output {min_dense:.3e}, invariant drift {inactive:.1e} (inactive) / {active:.1e} (active)",
                        method.time_label(),
                        run.steps.len()
                    ),
                    completed: run.stop.completed(),
                    record: run.record,
                }
            }
            Experiment::HeatConvergence => {
                let methods = if self.suite {
                    heat_suite()
                } else {
                    vec![method]
                };
                let (rows, record) = run_heat_convergence(&methods, &self.cells, HeatVariant::Smooth)?;
                let completed = rows.iter().all(|r| r.run.stop.completed());
                let summary = record
                    .metadata
                    .iter()
                    .filter(|(k, _)| k.starts_with("slopes"))
                    .map(|(k, v)| format!("{k}: {v}"))
                    .collect::<Vec<_>>()
                    .join("\n");
                Outcome { record, completed, summary }
            }
            Experiment::HeatViolations => {
                let scan = run_violation_scan(
                    &method,
                    self.single_cells()?,
                    self.dt,
                    self.tfinal,
                    self.violation_tolerance,
                )?;
                let counts = super::ViolationCategory::ALL
                    .iter()
                    .map(|c| format!("{c}: {}", scan.count(*c)))
                    .collect::<Vec<_>>()
                    .join(", ");
                Outcome {
                    summary: format!("{method}: {counts}"),
                    completed: scan.stop.completed(),
                    record: scan.record,
                }
            }
            Experiment::CahnHilliard => {
                if !(self.dt > 0.0) {
                    return Err(Error::Config(format!("need dt > 0, got {}", self.dt)));
                }
                let setup = CahnHilliardSetup {
                    method,
                    params: self.ch,
                    bc: self.bc,
                    init: if self.random_init {
                        InitialCondition::Random { seed: self.seed }
                    } else {
                        InitialCondition::Sine
                    },
                    cells: self.single_cells()?,
                    k: self.dt,
                    steps: (self.tfinal / self.dt).round() as usize,
                };
                let run = run_cahn_hilliard(&setup)?;
                Outcome {
                    summary: format!(
                        "{method}: {} steps, {} Newton iterations, max energy increase {:.2e}",
                        run.newton_iterations.len(),
                        run.total_iterations(),
                        run.max_energy_increase()
                    ),
                    completed: run.stop.completed(),
                    record: run.record,
                }
            }
        };
        outcome.record.meta("seed", self.seed);
        Ok(outcome)
    }
}

pub struct Outcome {
    pub record: RunRecord,
    /// False when a step failed and the record is partial.
    pub completed: bool,
    pub summary: String,
}

/// All basis combinations, with and without bounds, for each suite `(r, s)`.
pub fn heat_suite() -> Vec<MethodSpec> {
    let mut methods = Vec::new();
    for (r, s) in HEAT_SUITE_ORDERS {
        for space in [BasisFlavor::Lagrange, BasisFlavor::Bernstein] {
            for tb in [TimeBasis::Lagrange, TimeBasis::Bernstein] {
                for constrained in [false, true] {
                    methods.push(MethodSpec::new(space, r, CollocationFamily::RadauIIA, s, tb, constrained));
                }
            }
        }
    }
    methods
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad list entry '{v}' in '{s}'")))
        })
        .collect()
}

pub fn parse_bc(s: &str) -> Result<BoundaryCondition> {
    match s.to_ascii_lowercase().as_str() {
        "neumann" => Ok(BoundaryCondition::Neumann),
        "periodic" => Ok(BoundaryCondition::Periodic),
        _ => Err(Error::Config(format!("unknown boundary condition '{s}'"))),
    }
}

/// `true` for a random initial state, `false` for the sine profile.
pub fn parse_init(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "sine" => Ok(false),
        "random" => Ok(true),
        _ => Err(Error::Config(format!("unknown initial condition '{s}'"))),
    }
}
