//! Rauzy induction on a two-interval exchange is the subtractive Euclidean
//! algorithm on its lengths; on longer exchanges it agrees with inducing.
//!
//! Usage: cargo run --example rauzy_euclid -- [p] [q]

use iet_closing::induction::{check_property_c, rauzy_orbit};
use iet_closing::rational::{format_rational, ratio};
use iet_closing::make_iet;

fn main() -> iet_closing::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: i64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(13);
    let q: i64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(47);

    let e = make_iet(vec![ratio(p, q), ratio(q - p, q)], vec![2, 1])?;
    let orbit = rauzy_orbit(&e, q as usize)?;
    for (n, step) in orbit.steps.iter().enumerate() {
        let l = &step.after.lengths;
        println!("{:>3} {:?}  ({}, {})", n + 1, step.step_type, format_rational(&l[0]), format_rational(&l[1]));
    }
    println!("halted: {:?} after {} steps", orbit.halt_reason, orbit.steps.len());

    let e = make_iet(vec![ratio(211, 1000), ratio(377, 1000), ratio(412, 1000)], vec![3, 2, 1])?;
    let report = check_property_c(&e, 20)?;
    println!("Rauzy maps equal induced maps on m = 3, {} steps: {}", report.entries.len(), report.all_passed);
    Ok(())
}
