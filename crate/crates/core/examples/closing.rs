//! Twist-closing on suspension flows: the rotation by 1/10 at three scales,
//! both twist directions, and a rotation close to the golden mean whose
//! closing twists shrink with the neighborhood.

use iet_closing::closing::close_at_point;
use iet_closing::edges::ClosingCriterion;
use iet_closing::io::parse_flow;
use iet_closing::rational::int;

const TENTH: &str = r#"{"base": {"lengths": ["9/10", "1/10"], "permutation": [2, 1]}, "roof": ["1/1", "1/1"]}"#;
const NEAR_GOLDEN: &str = r#"{"base": {"lengths": ["4181/5473", "1292/5473"], "permutation": [2, 1]}, "roof": ["1/1", "1/1"]}"#;

fn show(label: &str, flow: &str, steps: usize, rate: f64) -> iet_closing::Result<()> {
    let flow = parse_flow(flow)?;
    let criterion = ClosingCriterion::new(-3, 0, 1)?;
    println!("{label}, drift rate {rate}:");
    for r in close_at_point(&flow, &int(0), &criterion, steps, 1e-9, rate)? {
        println!(
            "  n={} scale {} box [{}, {}, {}] laps {}  sigma1 {:+.3e}  periodic point {:.9}  residual {:.1e}",
            r.n, r.scale, r.a_bar, r.b_bar, r.c_bar, r.laps, r.sigma1, r.periodic_point, r.residual
        );
    }
    Ok(())
}

fn main() -> iet_closing::Result<()> {
    show("rotation by 1/10", TENTH, 3, 1.0)?;
    show("rotation by 1/10 mirrored", TENTH, 3, -1.0)?;
    show("rotation by 1292/5473", NEAR_GOLDEN, 5, 1.0)?;
    Ok(())
}
