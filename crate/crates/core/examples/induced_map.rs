//! First-return map of an iet to `[0, b)`, with return times and the Kac sum.
//!
//! Usage: cargo run --example induced_map -- [b]

use iet_closing::induction::{default_max_steps, induce};
use iet_closing::rational::{format_rational, parse_rational, ratio};
use iet_closing::make_iet;

fn main() -> iet_closing::Result<()> {
    let b = parse_rational(&std::env::args().nth(1).unwrap_or_else(|| "1/2".into()))?;
    let e = make_iet(vec![ratio(1, 5), ratio(1, 3), ratio(7, 15)], vec![3, 1, 2])?;

    let r = induce(&e, &b, default_max_steps(&e, &b))?;
    println!("induced on [0, {}): {}", format_rational(&b), serde_json::to_string(&r.induced).expect("serializable"));
    for p in &r.pieces {
        println!(
            "  [{}, {})  returns after {} steps, x + {}",
            format_rational(&p.start),
            format_rational(&p.end),
            p.return_time,
            format_rational(&p.translation)
        );
    }
    println!("Kac sum: {}", format_rational(&r.kac_sum()));
    Ok(())
}
