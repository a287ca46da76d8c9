use num_bigint::BigInt;
use rayon::prelude::*;

use super::flow::{build_flow_box, FlowBox, SuspensionFlow};
use super::twist::{ClosingResult, TwistFamily};
use crate::edges::{find_virtual_edges, max_disjoint_edges, ClosingCriterion, EdgeFamily};
use crate::error::{Error, Result};
use crate::induction::{induce, lattice_return_bound, rauzy_orbit, InducedResult};
use crate::rational::{format_rational, pow2_inv, to_f64, Rational};

/// Candidate edges tried per scale before the scale is given up.
const ATTEMPTS_PER_SCALE: usize = 64;

/// Closes an orbit near `p` at `shrink_steps` successively smaller scales.
///
/// The flow is recentered so that `p` sits at 0; the neighborhoods are the
/// bases `[0, b_n)` of the Rauzy scales of the recentered return map (then
/// halving once Rauzy stops), keeping only scales whose induced map meets
/// `criterion` and carries an edge whose box avoids the singular points.
/// Periodic points and traces are reported in the original coordinates.
pub fn close_at_point(
    flow: &SuspensionFlow,
    p: &Rational,
    criterion: &ClosingCriterion,
    shrink_steps: usize,
    tolerance: f64,
    drift_rate: f64,
) -> Result<Vec<ClosingResult>> {
    if shrink_steps == 0 {
        return Err(Error::InvalidArgument("shrink_steps must be at least 1".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let local = flow.recentered(p)?;
    let budget = 64 + 8 * shrink_steps;
    let scales = candidate_scales(&local, budget)?;

    let mut chosen: Vec<(Rational, FlowBox)> = Vec::with_capacity(shrink_steps);
    let mut blocked = Vec::new();
    for scale in &scales {
        if chosen.len() == shrink_steps {
            break;
        }
        let induced = induce(&local.base, scale, lattice_return_bound(&local.base, scale))?;
        if !criterion.is_met_by(max_disjoint_edges(&induced.induced).count) {
            continue;
        }
        match admissible_box(&local, &induced) {
            Ok(flow_box) => chosen.push((scale.clone(), flow_box)),
            Err(mut reasons) => blocked.append(&mut reasons),
        }
    }
    if chosen.len() < shrink_steps {
        return Err(Error::NoEdgeInNeighborhood {
            n: chosen.len() + 1,
            reason: format!(
                "{} of {} candidate scales carry an edge clear of the singular points while meeting the threshold {}",
                chosen.len(),
                scales.len(),
                criterion.threshold
            ),
            blocked,
        });
    }

    let base = to_f64(flow.base.base_length());
    let shift = to_f64(p);
    let back = |x: f64| {
        let y = x + shift;
        if y >= base { y - base } else { y }
    };
    chosen
        .into_par_iter()
        .enumerate()
        .map(|(i, (scale, flow_box))| {
            let family = TwistFamily::new(local.clone(), flow_box, drift_rate);
            let mut result = family.find_closing_parameter(tolerance)?;
            result.n = i + 1;
            result.scale = scale;
            result.periodic_point = back(result.periodic_point);
            for point in &mut result.orbit_trace {
                point.position = back(point.position);
            }
            Ok(result)
        })
        .collect()
}

/// Rauzy scales of the return map, then halvings of the last one.
fn candidate_scales(flow: &SuspensionFlow, budget: usize) -> Result<Vec<Rational>> {
    let mut scales = match rauzy_orbit(&flow.base, budget) {
        Ok(orbit) => orbit.scales,
        Err(Error::ReduciblePermutation(_)) => Vec::new(),
        Err(err) => return Err(err),
    };
    let last = scales.last().cloned().unwrap_or_else(|| flow.base.base_length().clone());
    let missing = budget - scales.len();
    // geometric tail kept short: return times double with every halving
    scales.extend((1..=missing.min(16)).map(|j| &last * pow2_inv(j as u32)));
    Ok(scales)
}

/// The first edge of the induced map, nearest 0, whose box exists and is
/// clear of singular points; otherwise one diagnostic line per family.
fn admissible_box(flow: &SuspensionFlow, induced: &InducedResult) -> std::result::Result<FlowBox, Vec<String>> {
    let mut reasons = Vec::new();
    for family in find_virtual_edges(&induced.induced) {
        let mut last_error = String::from("no start clear of the singular points");
        for s in candidate_starts(flow, induced, &family).into_iter().take(ATTEMPTS_PER_SCALE) {
            let edge = family.edge_at(&s).expect("candidate lies in the family");
            match build_flow_box(flow, &edge) {
                Ok(flow_box) => return Ok(flow_box),
                Err(err) => last_error = err.to_string(),
            }
        }
        reasons.push(format!(
            "scale {}: edges [s, s + {}] for s in [{}, {}): {}",
            format_rational(induced.induced.base_length()),
            format_rational(&family.edge_length()),
            format_rational(&family.s_min),
            format_rational(&family.s_sup),
            last_error
        ));
    }
    Err(reasons)
}

/// One start per maximal run of `s` whose strips `T^j [s, s + τ]`
/// (`j` up to the return time) miss every singular point: the left end of
/// the run if it is included, its midpoint otherwise.
fn candidate_starts(flow: &SuspensionFlow, induced: &InducedResult, family: &EdgeFamily) -> Vec<Rational> {
    let tau = &family.offset;
    let mut out = Vec::new();
    for piece in induced.pieces.iter().filter(|p| &p.translation == tau) {
        let lo = std::cmp::max(&family.s_min, &piece.start).clone();
        let hi = std::cmp::min(family.s_sup.clone(), &piece.end - tau);
        if lo >= hi {
            continue;
        }
        // offsets of T^j on the piece
        let mut shifts = Vec::with_capacity(piece.return_time + 1);
        let mut y = piece.start.clone();
        for _ in 0..=piece.return_time {
            shifts.push(&y - &piece.start);
            match flow.base.evaluate(&y) {
                Ok(next) => y = next,
                Err(_) => break,
            }
        }
        let mut blocked: Vec<(Rational, Rational)> = flow
            .singular_points
            .iter()
            .flat_map(|z| shifts.iter().map(move |d| (z - d - tau, z - d)))
            .filter(|(u, v)| u < &hi && v >= &lo)
            .collect();
        blocked.sort();
        out.extend(free_points(&lo, &hi, &blocked));
    }
    out
}

/// Points of `[lo, hi)` outside the closed intervals `blocked` (sorted by
/// left end), one per free run.
fn free_points(lo: &Rational, hi: &Rational, blocked: &[(Rational, Rational)]) -> Vec<Rational> {
    let two = BigInt::from(2);
    let mut out = Vec::new();
    // the free run starts at `cursor`, which is excluded once it is blocked
    let mut cursor = lo.clone();
    let mut open = false;
    let mut take = |from: &Rational, to: &Rational, open: bool| {
        if from < to {
            out.push(if open { (from + to) / &two } else { from.clone() });
        }
    };
    for (u, v) in blocked {
        if v < &cursor {
            continue;
        }
        if u > &cursor {
            take(&cursor, std::cmp::min(u, hi), open);
        }
        cursor = v.clone();
        open = true;
    }
    take(&cursor, hi, open);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Iet;
    use crate::rational::{int, ratio};

    fn criterion() -> ClosingCriterion {
        ClosingCriterion::new(-3, 0, 1).unwrap()
    }

    fn rotation_flow(singular: Vec<Rational>) -> SuspensionFlow {
        SuspensionFlow::with_constant_roof(Iet::rotation(&int(1), &ratio(1, 10)).unwrap(), int(1), singular, 0).unwrap()
    }

    #[test]
    fn free_points_skip_closed_blocks() {
        let pts = free_points(&int(0), &int(1), &[(ratio(-1, 2), int(0)), (ratio(1, 4), ratio(1, 2))]);
        assert_eq!(pts, vec![ratio(1, 8), ratio(3, 4)]);
        let pts = free_points(&int(0), &int(1), &[(ratio(1, 4), ratio(1, 2))]);
        assert_eq!(pts, vec![int(0), ratio(3, 4)]);
        assert!(free_points(&int(0), &int(1), &[(int(-1), int(2))]).is_empty());
    }

    #[test]
    fn rotation_closes_three_times() {
        let results = close_at_point(&rotation_flow(vec![]), &int(0), &criterion(), 3, 1e-9, 1.0).unwrap();
        assert_eq!(results.len(), 3);
        let scales: Vec<_> = results.iter().map(|r| r.scale.clone()).collect();
        assert_eq!(scales, vec![ratio(9, 10), ratio(4, 5), ratio(7, 10)]);
        for r in &results {
            assert!(r.residual <= 1e-9);
            assert!((r.sigma1 - 0.1).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_has_no_edge() {
        let flow = SuspensionFlow::with_constant_roof(Iet::identity(int(1)).unwrap(), int(1), vec![], 0).unwrap();
        match close_at_point(&flow, &int(0), &criterion(), 1, 1e-9, 1.0).unwrap_err() {
            Error::NoEdgeInNeighborhood { n, .. } => assert_eq!(n, 1),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn singular_points_block_every_edge() {
        let flow = rotation_flow(vec![ratio(3, 20), ratio(7, 20), ratio(11, 20), ratio(15, 20)]);
        match close_at_point(&flow, &int(0), &criterion(), 1, 1e-9, 1.0).unwrap_err() {
            Error::NoEdgeInNeighborhood { n, blocked, .. } => {
                assert_eq!(n, 1);
                assert!(!blocked.is_empty());
                assert!(blocked[0].contains("scale 9/10"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn singular_point_pushes_the_edge_right() {
        let flow = rotation_flow(vec![ratio(3, 20)]);
        let results = close_at_point(&flow, &int(0), &criterion(), 1, 1e-9, 1.0).unwrap();
        // strips [s, s + 1/10] and [s + 1/10, s + 1/5] must miss 3/20
        assert!(results[0].periodic_point > 0.15 + 0.1 - 1e-9);
    }

    #[test]
    fn recentered_point() {
        let flow = rotation_flow(vec![]);
        let results = close_at_point(&flow, &ratio(1, 2), &criterion(), 2, 1e-9, 1.0).unwrap();
        for r in &results {
            // b̄ = 1/10 in local coordinates
            assert!((r.periodic_point - 0.6).abs() < 1e-9);
        }
    }
}
