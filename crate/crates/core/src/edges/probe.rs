use rayon::prelude::*;
use serde::Serialize;

use super::{max_disjoint_edges, ClosingCriterion};
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::induction::{default_max_steps, induce, rauzy_orbit_labeled, HaltReason, LabeledIet};
use crate::rational::{format_rational, pow2_inv, serde_rational, serde_rational_vec, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSource {
    Given,
    Rauzy,
    Geometric,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleProbe {
    pub n: usize,
    #[serde(with = "serde_rational")]
    pub scale: Rational,
    pub source: ScaleSource,
    pub edge_count: usize,
    pub passed: bool,
}

/// How the probed scales are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceMode {
    /// The user's scales are the sequence `b_n`; every one must pass.
    Given,
    /// The probed scales are candidates and `b_n` may be any subsequence of
    /// them, so one passing scale certifies.
    Subsequence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedToDepth,
    RefutedAtDepth,
    UndecidedTie,
}

#[derive(Clone, Debug, Serialize)]
pub struct BkProbeReport {
    pub criterion: ClosingCriterion,
    pub mode: SequenceMode,
    pub depth: usize,
    pub probes: Vec<ScaleProbe>,
    /// The scales that passed, i.e. the certifying sequence.
    #[serde(with = "serde_rational_vec")]
    pub sequence: Vec<Rational>,
    /// `None` when scales were given or the permutation is reducible.
    pub rauzy_halt: Option<HaltReason>,
    pub verdict: Verdict,
    pub note: &'static str,
}

const NOTE: &str = "certified_to_depth checks finitely many scales only; it is not a proof of B_k membership";

/// Probes the edge requirement of `B_k` on the induced maps at `depth` scales.
pub fn probe_bk(
    e: &Iet,
    criterion: &ClosingCriterion,
    depth: usize,
    scales: Option<&[Rational]>,
) -> Result<BkProbeReport> {
    match scales {
        Some(given) => {
            if depth == 0 {
                return Err(Error::InvalidArgument("probe depth must be at least 1".into()));
            }
            check_scales(given, e.base_length())?;
            let candidates = given.iter().take(depth).map(|s| Candidate::induced(s, ScaleSource::Given)).collect();
            run(e, criterion, depth, candidates, SequenceMode::Given, None)
        }
        None => probe_bk_labeled(&LabeledIet::from_iet(e), criterion, depth),
    }
}

/// [`probe_bk`] with default scales, taken from the Rauzy orbit of the pair
/// `(λ, π)` itself. For a permutation that keeps two intervals adjacent this
/// orbit differs from the one of the merged (canonical) map.
pub fn probe_bk_labeled(start: &LabeledIet, criterion: &ClosingCriterion, depth: usize) -> Result<BkProbeReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("probe depth must be at least 1".into()));
    }
    let e = start.to_iet();
    let (orbit, halt) = match rauzy_orbit_labeled(start, depth) {
        Ok(orbit) => (orbit.steps, Some(orbit.halt_reason)),
        Err(Error::ReduciblePermutation(_)) => (Vec::new(), None),
        Err(err) => return Err(err),
    };
    let last = orbit.last().map_or_else(|| e.base_length().clone(), |s| s.after.base.clone());
    let missing = depth - orbit.len();
    // R^n(E) is the first-return map to [0, a_n), so no induction is needed
    let mut candidates: Vec<Candidate> = orbit
        .iter()
        .map(|s| Candidate { scale: s.after.base.clone(), source: ScaleSource::Rauzy, map: Some(s.after.to_iet()) })
        .collect();
    candidates.extend((1..=missing).map(|j| Candidate::induced(&(&last * pow2_inv(j as u32)), ScaleSource::Geometric)));
    run(&e, criterion, depth, candidates, SequenceMode::Subsequence, halt)
}

struct Candidate {
    scale: Rational,
    source: ScaleSource,
    map: Option<Iet>,
}

impl Candidate {
    fn induced(scale: &Rational, source: ScaleSource) -> Candidate {
        Candidate { scale: scale.clone(), source, map: None }
    }
}

fn run(
    e: &Iet,
    criterion: &ClosingCriterion,
    depth: usize,
    candidates: Vec<Candidate>,
    mode: SequenceMode,
    rauzy_halt: Option<HaltReason>,
) -> Result<BkProbeReport> {
    let probes = candidates
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let edge_count = match &c.map {
                Some(map) => max_disjoint_edges(map).count,
                None => max_disjoint_edges(&induce(e, &c.scale, default_max_steps(e, &c.scale))?.induced).count,
            };
            Ok(ScaleProbe {
                n: i + 1,
                scale: c.scale.clone(),
                source: c.source,
                edge_count,
                passed: criterion.is_met_by(edge_count),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let sequence: Vec<Rational> = probes.iter().filter(|p| p.passed).map(|p| p.scale.clone()).collect();
    let verdict = match mode {
        SequenceMode::Given if sequence.len() == probes.len() => Verdict::CertifiedToDepth,
        SequenceMode::Given => Verdict::RefutedAtDepth,
        SequenceMode::Subsequence if !sequence.is_empty() => Verdict::CertifiedToDepth,
        SequenceMode::Subsequence if rauzy_halt == Some(HaltReason::TieEncountered) => Verdict::UndecidedTie,
        SequenceMode::Subsequence => Verdict::RefutedAtDepth,
    };
    Ok(BkProbeReport {
        criterion: criterion.clone(),
        mode,
        depth,
        probes,
        sequence,
        rauzy_halt,
        verdict,
        note: NOTE,
    })
}

fn check_scales(scales: &[Rational], base: &Rational) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidArgument("scales must be nonempty".into()));
    }
    for (i, s) in scales.iter().enumerate() {
        if s <= &Rational::default() || s > base {
            return Err(Error::InvalidArgument(format!(
                "scale {} is outside (0, {}]",
                format_rational(s),
                format_rational(base)
            )));
        }
        if i > 0 && s >= &scales[i - 1] {
            return Err(Error::InvalidArgument("scales must be strictly decreasing".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edges::find_virtual_edges;
    use crate::iet::make_iet;
    use crate::rational::{int, ratio};

    fn criterion(threshold_k: u32) -> ClosingCriterion {
        // χ = -3 makes threshold = k
        ClosingCriterion::new(-3, 0, threshold_k).unwrap()
    }

    #[test]
    fn identity_is_refuted_at_first_scale() {
        let e = Iet::identity(int(1)).unwrap();
        let report = probe_bk(&e, &criterion(1), 1, None).unwrap();
        assert_eq!(report.verdict, Verdict::RefutedAtDepth);
        assert_eq!(report.probes[0].edge_count, 0);
        assert_eq!(report.probes[0].scale, ratio(1, 2));
    }

    #[test]
    fn given_scales_rotation_sixteenth() {
        let e = Iet::rotation(&int(1), &ratio(1, 16)).unwrap();
        let scales = [ratio(1, 2), ratio(1, 4), ratio(1, 8)];
        let report = probe_bk(&e, &criterion(2), 3, Some(&scales)).unwrap();
        assert_eq!(report.mode, SequenceMode::Given);
        for p in &report.probes {
            // induced map on [0, b) is rotation by 1/16 mod b: one family, s ∈ [0, b - 3/16)
            let width = &p.scale - ratio(3, 16);
            let expect = if width > int(0) { crate::rational::ceil(&(width / ratio(1, 8))) } else { 0.into() };
            assert_eq!(num_bigint::BigInt::from(p.edge_count), expect);
        }
        let all = report.probes.iter().all(|p| p.passed);
        assert_eq!(report.verdict == Verdict::CertifiedToDepth, all);
        assert_eq!(report.verdict, Verdict::RefutedAtDepth);
    }

    #[test]
    fn bad_scales_rejected() {
        let e = Iet::rotation(&int(1), &ratio(1, 16)).unwrap();
        assert!(probe_bk(&e, &criterion(1), 2, Some(&[ratio(1, 4), ratio(1, 2)])).is_err());
        assert!(probe_bk(&e, &criterion(1), 1, Some(&[ratio(3, 2)])).is_err());
        assert!(probe_bk(&e, &criterion(1), 0, None).is_err());
    }

    #[test]
    fn default_scales_match_recomputation() {
        let e = make_iet(
            vec![ratio(13, 97), ratio(29, 97), ratio(31, 97), ratio(24, 97)],
            vec![4, 3, 2, 1],
        )
        .unwrap();
        let report = probe_bk(&e, &criterion(1), 6, None).unwrap();
        assert_eq!(report.probes.len(), 6);
        for p in &report.probes {
            let induced = induce(&e, &p.scale, 10_000).unwrap().induced;
            let families = find_virtual_edges(&induced);
            let count: usize = families.iter().map(|f| f.max_disjoint()).sum();
            assert_eq!(count, p.edge_count);
        }
        assert_ne!(report.verdict, Verdict::RefutedAtDepth);
    }

    #[test]
    fn monotone_in_threshold() {
        let e = make_iet(vec![ratio(3, 7), ratio(1, 7), ratio(3, 7)], vec![3, 2, 1]).unwrap();
        for t in 1..6 {
            let low = probe_bk(&e, &criterion(t), 5, None).unwrap();
            let high = probe_bk(&e, &criterion(t + 1), 5, None).unwrap();
            if high.verdict == Verdict::CertifiedToDepth {
                assert_eq!(low.verdict, Verdict::CertifiedToDepth);
            }
        }
    }
}
