//! Where each way of imposing nonnegativity can still let the space-time
//! solution go negative, on a heat problem with a steep front.

use bcrk::experiments::{run_violation_scan, MethodSpec, ViolationCategory};
use bcrk::fem1d::BasisFlavor;
use bcrk::stage_system::TimeBasis;
use bcrk::tableau::CollocationFamily;

fn main() -> bcrk::Result<()> {
    println!(
        "{:<16} {:>10} {:>10} {:>10} {:>10}",
        "method", "dof/coll", "btw/coll", "dof/off", "btw/off"
    );
    for space in [BasisFlavor::Lagrange, BasisFlavor::Bernstein] {
        for time in [TimeBasis::Lagrange, TimeBasis::Bernstein] {
            let m = MethodSpec::new(space, 2, CollocationFamily::RadauIIA, 2, time, true);
            let scan = run_violation_scan(&m, 8, 0.125, 0.5, 1e-10)?;
            let c = ViolationCategory::ALL.map(|cat| scan.count(cat));
            println!(
                "{:<16} {:>10} {:>10} {:>10} {:>10}",
                m.to_string(),
                c[0],
                c[1],
                c[2],
                c[3]
            );
        }
    }
    println!("\ncounts of samples below -1e-10; 'coll' = collocation times, 'btw' = between nodes");
    Ok(())
}
