//! Depth-bounded probe of the edge requirement along Rauzy scales, and
//! along a user-chosen sequence of scales.

use iet_closing::edges::{probe_bk, ClosingCriterion};
use iet_closing::rational::{format_rational, ratio};
use iet_closing::make_iet;

fn main() -> iet_closing::Result<()> {
    let criterion = ClosingCriterion::new(-3, 0, 1)?;
    let e = make_iet(vec![ratio(6180, 10_000), ratio(3820, 10_000)], vec![2, 1])?;

    let report = probe_bk(&e, &criterion, 10, None)?;
    for p in &report.probes {
        println!(
            "{:>2} {:?} scale {}: {} edges{}",
            p.n,
            p.source,
            format_rational(&p.scale),
            p.edge_count,
            if p.passed { "" } else { "  (short)" }
        );
    }
    println!("verdict: {:?}", report.verdict);

    let given = [ratio(1, 1), ratio(1, 2), ratio(1, 4)];
    let report = probe_bk(&e, &criterion, given.len(), Some(&given))?;
    println!("halving scales: {:?}", report.verdict);
    Ok(())
}
