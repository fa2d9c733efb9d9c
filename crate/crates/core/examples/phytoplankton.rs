//! Phytoplankton model with one unit time steps of two-stage RadauIIA,
//! without bounds, with bounds on Lagrange stage values, and with bounds on
//! Bernstein coefficients. Pass a directory to also write the CSV records.

use std::path::PathBuf;

use bcrk::experiments::{run_phyto, MethodSpec};
use bcrk::problems::PhytoParams;
use bcrk::stage_system::TimeBasis;
use bcrk::tableau::CollocationFamily;

fn main() -> bcrk::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let variants = [
        (TimeBasis::Lagrange, false),
        (TimeBasis::Lagrange, true),
        (TimeBasis::Bernstein, true),
    ];
    for (basis, constrained) in variants {
        let method = MethodSpec::ode(CollocationFamily::RadauIIA, 2, basis, constrained);
        let run = run_phyto(&method, PhytoParams::default(), 1.0, 20.0)?;
        let min_stage_n = run.steps.iter().map(|s| s.min_stage_n).fold(f64::INFINITY, f64::min);
        let (worst_step, min_dense) = run
            .steps
            .iter()
            .map(|s| (s.time, s.min_dense_output))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let (inactive, active) = run.invariant_drift();
        println!("{}", method.time_label());
        println!("  smallest N stage value      {min_stage_n:.3e}");
        println!("  smallest dense output       {min_dense:.3e} (step ending at t = {worst_step})");
        println!("  invariant drift per step    {inactive:.1e} without active bounds, {active:.1e} with");
        if let Some(dir) = &out_dir {
            run.record.write_csv(&dir.join(format!("phyto_{}.csv", method.time_label())))?;
        }
    }
    Ok(())
}
