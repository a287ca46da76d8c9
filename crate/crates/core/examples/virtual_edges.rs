//! Virtual orthogonal edges of a rotation close to `1/16`, and the A_k test.

use iet_closing::edges::{find_virtual_edges, in_a_k, max_disjoint_edges};
use iet_closing::rational::{format_rational, ratio};
use iet_closing::Iet;

fn main() -> iet_closing::Result<()> {
    let e = Iet::rotation(&ratio(1, 1), &ratio(33, 512))?;
    for f in find_virtual_edges(&e) {
        println!(
            "interval {}: s in [{}, {}), edges of length {}, {} disjoint",
            f.interval + 1,
            format_rational(&f.s_min),
            format_rational(&f.s_sup),
            format_rational(&f.edge_length()),
            f.max_disjoint()
        );
    }
    let found = max_disjoint_edges(&e);
    println!("max disjoint: {} (witness gap {})", found.count, format_rational(&found.gap));
    for edge in found.witness.iter().take(3) {
        println!("  [{}, {}, {}]", format_rational(&edge.s), format_rational(&edge.e1), format_rational(&edge.t));
    }
    for k in 1..=3 {
        println!("in A_{k}: {}", in_a_k(&e, k)?);
    }
    Ok(())
}
