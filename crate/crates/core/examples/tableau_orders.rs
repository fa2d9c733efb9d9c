//! Builds the collocation tableaux of each family and checks them against
//! the rooted-tree order conditions.

use bcrk::tableau::{collocation_tableau, order_conditions_check, CollocationFamily};

fn main() -> bcrk::Result<()> {
    let cases = [
        (CollocationFamily::RadauIIA, 1..=3),
        (CollocationFamily::GaussLegendre, 1..=3),
        (CollocationFamily::LobattoIIIA, 2..=3),
    ];
    for (family, stages) in cases {
        for s in stages {
            let t = collocation_tableau(family, s)?;
            let p = family.order(s);
            println!(
                "{family}({s}): order {p} holds: {}, order {} holds: {}, stiffly accurate: {}",
                order_conditions_check(&t, p),
                p + 1,
                order_conditions_check(&t, p + 1),
                t.is_stiffly_accurate()
            );
        }
    }

    let t = collocation_tableau(CollocationFamily::RadauIIA, 2)?;
    println!("\nRadauIIA(2)");
    for i in 0..2 {
        println!("  {:>8.5} | {:>8.5} {:>8.5}", t.c[i], t.a[(i, 0)], t.a[(i, 1)]);
    }
    println!("  ---------+------------------");
    println!("           | {:>8.5} {:>8.5}", t.b[0], t.b[1]);
    Ok(())
}
