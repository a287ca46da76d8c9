//! Orbits of a three-interval exchange, exactly.
//!
//! Usage: cargo run --example evaluate -- [x] [steps]

use iet_closing::rational::{format_rational, parse_rational, ratio};
use iet_closing::make_iet;

fn main() -> iet_closing::Result<()> {
    let mut args = std::env::args().skip(1);
    let x = parse_rational(&args.next().unwrap_or_else(|| "1/7".into()))?;
    let steps: i64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);

    let e = make_iet(vec![ratio(1, 5), ratio(1, 3), ratio(7, 15)], vec![3, 2, 1])?;
    println!("E = {}", serde_json::to_string(&e).expect("serializable"));
    println!("breakpoints: {}", e.breakpoints().iter().map(format_rational).collect::<Vec<_>>().join(", "));

    let mut y = x.clone();
    for n in 1..=steps {
        y = e.evaluate(&y)?;
        println!("E^{n}({}) = {}", format_rational(&x), format_rational(&y));
    }
    // back to the start in one call
    println!("E^-{steps}: {}", format_rational(&e.iterate(&y, -steps)?));

    let show = |p: &iet_closing::Piece| {
        println!("  [{}, {})  x + {}", format_rational(&p.start), format_rational(&p.end), format_rational(&p.translation))
    };
    println!("where E, E^2 and E^3 are all continuous:");
    e.continuity_intervals(3).iter().for_each(show);
    println!("where E^3 is a translation:");
    e.translation_pieces(3).iter().for_each(show);
    Ok(())
}
