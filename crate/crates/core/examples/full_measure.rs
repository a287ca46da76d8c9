//! Monte Carlo estimate of the certified fraction of random 3-interval iets.
//!
//! Usage: cargo run --release --example full_measure -- [samples] [seed]

use iet_closing::edges::{estimate_full_measure, ClosingCriterion, MeasureConfig};

fn main() -> iet_closing::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples = args.next().and_then(|s| s.parse().ok()).unwrap_or(500);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(2024);
    // χ = -3, k = 1: one edge per induced map suffices
    let criterion = ClosingCriterion::new(-3, 0, 1)?;

    println!("depth  certified          refuted            undecided");
    for depth in [1, 3, 5, 8] {
        let report = estimate_full_measure(&MeasureConfig::new(3, criterion.clone(), depth, samples, seed))?;
        let show = |f: &iet_closing::edges::Fraction| {
            format!("{:.3} [{:.3},{:.3}]", f.fraction, f.ci_low, f.ci_high)
        };
        println!(
            "{depth:>5}  {}  {}  {}",
            show(&report.certified),
            show(&report.refuted),
            show(&report.undecided)
        );
    }
    Ok(())
}
