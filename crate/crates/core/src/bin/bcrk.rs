use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bcrk::experiments::{
    parse_bc, parse_constrained, parse_family, parse_flavor, parse_init, parse_time_basis,
    Experiment, ParamFile, RunConfig,
};

#[derive(Parser)]
#[command(name = "bcrk", version, about = "Run bounds-constrained collocation experiments and write CSV")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phytoplankton ODE with fixed steps.
    Phyto(Common),
    /// Heat equation convergence table with k = 1/N.
    HeatConv {
        #[command(flatten)]
        common: Common,
        /// Run every (r, s) pair and basis combination.
        #[arg(long)]
        suite: bool,
    },
    /// Sign violations of the dense output on the steep-front heat problem.
    HeatVios(Common),
    /// Cahn–Hilliard with the logarithmic potential.
    CahnHilliard {
        #[command(flatten)]
        common: Common,
        /// neumann or periodic.
        #[arg(long)]
        bc: Option<String>,
        /// sine or random (seeded by --seed).
        #[arg(long)]
        init: Option<String>,
        /// Integrate to T = 1 instead of the short default.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Args)]
struct Common {
    /// lagrange or bernstein.
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    /// radau, gauss or lobatto.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    stages: Option<usize>,
    /// lagrange or bernstein.
    #[arg(long)]
    time_basis: Option<String>,
    /// vp (unconstrained) or vi (bounds enforced).
    #[arg(long)]
    constrained: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tfinal: Option<f64>,
    /// Cell count; heat-conv takes a comma-separated list.
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file applied after the flags.
    #[arg(long)]
    params: Option<PathBuf>,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) -> bcrk::Result<()> {
        if let Some(v) = &self.space {
            cfg.space = parse_flavor(v)?;
        }
        if let Some(v) = self.degree {
            cfg.degree = v;
        }
        if let Some(v) = &self.family {
            cfg.family = parse_family(v)?;
        }
        if let Some(v) = self.stages {
            cfg.stages = v;
        }
        if let Some(v) = &self.time_basis {
            cfg.time_basis = parse_time_basis(v)?;
        }
        if let Some(v) = &self.constrained {
            cfg.constrained = parse_constrained(v)?;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.tfinal {
            cfg.tfinal = v;
        }
        if let Some(v) = &self.cells {
            cfg.cells = bcrk::experiments::parse_list(v)?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        Ok(())
    }
}

fn configure(command: &Command) -> bcrk::Result<(RunConfig, &Common)> {
    let (experiment, common) = match command {
        Command::Phyto(c) => (Experiment::Phyto, c),
        Command::HeatConv { common, .. } => (Experiment::HeatConvergence, common),
        Command::HeatVios(c) => (Experiment::HeatViolations, c),
        Command::CahnHilliard { common, .. } => (Experiment::CahnHilliard, common),
    };
    let mut cfg = RunConfig::defaults(experiment);
    common.apply(&mut cfg)?;
    match command {
        Command::HeatConv { suite, .. } => {
            if common.dt.is_some() {
                return Err(bcrk::Error::Config("heat-conv sets k = 1/N; drop --dt".into()));
            }
            cfg.suite = *suite;
        }
        Command::CahnHilliard { bc, init, full, .. } => {
            if let Some(v) = bc {
                cfg.bc = parse_bc(v)?;
            }
            if let Some(v) = init {
                cfg.random_init = parse_init(v)?;
            }
            if *full {
                cfg.tfinal = 1.0;
            }
        }
        _ => {}
    }
    if let Some(path) = &common.params {
        cfg.apply_params(&ParamFile::load(path)?)?;
    }
    Ok((cfg, common))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (cfg, common) = match configure(&cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let outcome = match cfg.execute() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &common.out {
        Some(path) => outcome.record.write_csv(path),
        None => {
            print!("{}", outcome.record.to_csv());
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    eprintln!("{}", outcome.summary);
    if outcome.completed {
        ExitCode::SUCCESS
    } else {
        eprintln!("solver failure: partial results written");
        ExitCode::from(2)
    }
}
