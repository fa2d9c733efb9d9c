//! Phase separation with the logarithmic potential, bounds imposed on the
//! Bernstein coefficients of the order parameter.

use bcrk::experiments::{run_cahn_hilliard, CahnHilliardSetup, MethodSpec};
use bcrk::fem1d::BasisFlavor;
use bcrk::problems::{binodal, BoundaryCondition, CahnHilliardParams, InitialCondition};
use bcrk::stage_system::TimeBasis;
use bcrk::tableau::CollocationFamily;

fn main() -> bcrk::Result<()> {
    let params = CahnHilliardParams::default();
    let setup = CahnHilliardSetup {
        method: MethodSpec::new(BasisFlavor::Bernstein, 2, CollocationFamily::RadauIIA, 2, TimeBasis::Bernstein, true),
        params,
        bc: BoundaryCondition::Neumann,
        init: InitialCondition::Random { seed: 1 },
        cells: 100,
        k: 1e-4,
        steps: 100,
    };
    let run = run_cahn_hilliard(&setup)?;
    println!("binodal concentration {:.6}", binodal(params.theta0, params.theta_c)?);
    println!("initial energy {:.6e}", run.energies[0]);
    for step in (20..=run.extremes.len()).step_by(20) {
        let (lo, hi) = run.extremes[step - 1];
        println!("step {step:>4}: energy {:>12.6e}, c in [{lo:.6}, {hi:.6}]", run.energies[step]);
    }
    println!(
        "{} Newton iterations over {} steps, largest energy increase {:.2e}, mass drift {:.1e}",
        run.total_iterations(),
        run.newton_iterations.len(),
        run.max_energy_increase(),
        run.masses.last().unwrap() - run.masses[0]
    );
    Ok(())
}
