//! Space-time convergence for the heat equation with a manufactured
//! solution, refining h and k = 1/N together.

use bcrk::experiments::{fit_slope, run_heat_convergence, MethodSpec};
use bcrk::fem1d::BasisFlavor;
use bcrk::problems::HeatVariant;
use bcrk::stage_system::TimeBasis;
use bcrk::tableau::CollocationFamily;

fn main() -> bcrk::Result<()> {
    let methods = [
        MethodSpec::new(BasisFlavor::Lagrange, 2, CollocationFamily::RadauIIA, 2, TimeBasis::Lagrange, false),
        MethodSpec::new(BasisFlavor::Bernstein, 2, CollocationFamily::RadauIIA, 2, TimeBasis::Bernstein, true),
    ];
    let cells = [4, 8, 16, 32, 64];
    let (rows, _) = run_heat_convergence(&methods, &cells, HeatVariant::Smooth)?;
    for m in &methods {
        println!("{m}");
        println!("  {:>4} {:>12} {:>12} {:>8}", "N", "L2", "H1", "its");
        let mine: Vec<_> = rows.iter().filter(|r| r.method == *m).collect();
        for r in &mine {
            println!(
                "  {:>4} {:>12.4e} {:>12.4e} {:>8.3}",
                r.cells,
                r.run.l2_error,
                r.run.h1_error,
                r.run.mean_iterations()
            );
        }
        let fine: Vec<_> = mine.iter().filter(|r| r.cells >= 8).collect();
        let ns: Vec<f64> = fine.iter().map(|r| r.cells as f64).collect();
        let l2: Vec<f64> = fine.iter().map(|r| r.run.l2_error).collect();
        let h1: Vec<f64> = fine.iter().map(|r| r.run.h1_error).collect();
        println!(
            "  observed orders for N >= 8: L2 {:.2}, H1 {:.2}",
            fit_slope(&ns, &l2),
            fit_slope(&ns, &h1)
        );
    }
    Ok(())
}
