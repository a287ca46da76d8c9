//! Virtual orthogonal edges.
//!
//! `[s, t]` is a virtual orthogonal edge of `E` when `E` is continuous on
//! `[s, t]` and `s < E(s) < E²(s) = t`. Continuity forces `[s, t]` into one
//! interval `[a_i, a_{i+1})` of `E`, where `E` is the translation by `τ_i`;
//! the ordering then says `τ_i > 0` and `t = s + 2τ_i`. So the edges of `E`
//! are exactly described by one [`EdgeFamily`] per interval with
//! `0 < 2τ_i < λ_i`: every `s ∈ [a_i, a_{i+1} - 2τ_i)` starts an edge.

mod measure;
mod probe;

pub use measure::{estimate_full_measure, sample_iet, Fraction, MeasureConfig, MeasureReport, SampleRow};
pub use probe::{probe_bk, probe_bk_labeled, BkProbeReport, ScaleProbe, ScaleSource, SequenceMode, Verdict};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::rational::{self, serde_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VirtualEdge {
    #[serde(with = "serde_rational")]
    pub s: Rational,
    /// `E(s)`
    #[serde(with = "serde_rational")]
    pub e1: Rational,
    /// `E²(s)`
    #[serde(with = "serde_rational")]
    pub t: Rational,
}

impl VirtualEdge {
    /// Re-checks the definition against `e` by direct evaluation.
    pub fn is_valid_for(&self, e: &Iet) -> bool {
        let Ok(e1) = e.evaluate(&self.s) else { return false };
        let Ok(t) = e.iterate(&self.s, 2) else { return false };
        if e1 != self.e1 || t != self.t || !(self.s < self.e1 && self.e1 < self.t) {
            return false;
        }
        // no discontinuity of E in (s, t]
        !e.breakpoints()[1..e.len()].iter().any(|a| &self.s < a && a <= &self.t)
    }

    /// Closed intervals are disjoint iff one ends strictly before the other starts.
    pub fn is_disjoint_from(&self, other: &VirtualEdge) -> bool {
        self.t < other.s || other.t < self.s
    }
}

/// All edges lying in one interval of `E`: `[s, s + 2·offset]` for every
/// `s ∈ [s_min, s_sup)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeFamily {
    /// 1-based interval index, as in the permutation.
    pub interval: usize,
    #[serde(with = "serde_rational")]
    pub s_min: Rational,
    /// Exclusive upper bound on `s`.
    #[serde(with = "serde_rational")]
    pub s_sup: Rational,
    /// The translation `τ` of `E` on the interval; each edge has length `2τ`.
    #[serde(with = "serde_rational")]
    pub offset: Rational,
}

impl EdgeFamily {
    pub fn contains(&self, s: &Rational) -> bool {
        &self.s_min <= s && s < &self.s_sup
    }

    pub fn edge_at(&self, s: &Rational) -> Option<VirtualEdge> {
        self.contains(s).then(|| VirtualEdge {
            s: s.clone(),
            e1: s + &self.offset,
            t: s + &self.offset * BigInt::from(2),
        })
    }

    pub fn edge_length(&self) -> Rational {
        &self.offset * BigInt::from(2)
    }

    /// Supremum of the number of pairwise disjoint edges from this family:
    /// `n` edges fit iff `(n - 1)·2τ < s_sup - s_min`, so it is
    /// `⌈(s_sup - s_min) / 2τ⌉`.
    pub fn max_disjoint(&self) -> usize {
        let ratio = (&self.s_sup - &self.s_min) / self.edge_length();
        rational::ceil(&ratio).to_usize().unwrap_or(usize::MAX)
    }
}

/// Exact description of every virtual orthogonal edge of `e`.
pub fn find_virtual_edges(e: &Iet) -> Vec<EdgeFamily> {
    let two = BigInt::from(2);
    (0..e.len())
        .filter_map(|i| {
            let offset = &e.offsets()[i];
            if !offset.is_positive() {
                return None;
            }
            let s_min = e.breakpoints()[i].clone();
            let s_sup = &e.breakpoints()[i + 1] - offset * &two;
            (s_min < s_sup).then(|| EdgeFamily { interval: i + 1, s_min, s_sup, offset: offset.clone() })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointEdges {
    pub count: usize,
    pub witness: Vec<VirtualEdge>,
    /// Gap actually used between consecutive witnesses of one family.
    #[serde(with = "serde_rational")]
    pub gap: Rational,
}

/// Default witness gap `ε = 10^-6`.
pub fn default_gap() -> Rational {
    rational::ratio(1, 1_000_000)
}

pub fn max_disjoint_edges(e: &Iet) -> DisjointEdges {
    max_disjoint_edges_with_gap(e, &default_gap())
}

/// Maximum number of pairwise disjoint virtual edges, with a witness family.
///
/// Families live in distinct intervals of `E`, so edges from different
/// families never meet. Inside a family the greedy earliest-end choice
/// `s_0 = s_min`, `s_{j+1} = t_j + gap` is optimal as `gap → 0`; the gap is
/// shrunk below `gap` when needed so the witness realizes the supremum.
pub fn max_disjoint_edges_with_gap(e: &Iet, gap: &Rational) -> DisjointEdges {
    let mut count = 0;
    let mut witness = Vec::new();
    let mut used_gap = gap.clone();
    for family in find_virtual_edges(e) {
        let n = family.max_disjoint();
        count += n;
        if n >= 2 {
            let slack = &family.s_sup - &family.s_min - family.edge_length() * BigInt::from(n - 1);
            let fitted = slack / BigInt::from(n);
            if fitted < used_gap {
                used_gap = fitted;
            }
        }
        witness.push(family);
    }
    let mut edges = Vec::with_capacity(count);
    for family in &witness {
        let step = family.edge_length() + &used_gap;
        let mut s = family.s_min.clone();
        for _ in 0..family.max_disjoint() {
            let e1 = &s + &family.offset;
            let t = &e1 + &family.offset;
            let next = &s + &step;
            edges.push(VirtualEdge { s, e1, t });
            s = next;
        }
    }
    DisjointEdges { count, witness: edges, gap: used_gap }
}

/// Whether `E(x) = x + a` on `[0, 1/2]` for some
/// `a ∈ (16^-k - 32^-k, 16^-k + 32^-k)`.
pub fn in_a_k(e: &Iet, k: u32) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if e.base_length() != &Rational::one() {
        return Err(Error::InvalidArgument("A_k is defined for iets on [0, 1)".into()));
    }
    let half = rational::ratio(1, 2);
    // [0, 1/2] inside the first interval, which must reach past 1/2
    if e.breakpoints()[1] <= half {
        return Ok(false);
    }
    let a = &e.offsets()[0];
    let center = Rational::new(BigInt::one(), BigInt::from(16).pow(k));
    let radius = Rational::new(BigInt::one(), BigInt::from(32).pow(k));
    Ok(&(&center - &radius) < a && a < &(&center + &radius))
}

/// The edge-count requirement `χ + k + 3`, clamped to at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosingCriterion {
    pub euler_characteristic: i64,
    pub singularity_count: u32,
    pub k: u32,
    pub threshold: usize,
    /// Set when `χ + k + 3 < 1` and the threshold was raised to 1.
    pub clamped: bool,
}

impl ClosingCriterion {
    pub fn new(euler_characteristic: i64, singularity_count: u32, k: u32) -> Result<ClosingCriterion> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let raw = euler_characteristic + i64::from(k) + 3;
        Ok(ClosingCriterion {
            euler_characteristic,
            singularity_count,
            k,
            threshold: raw.max(1) as usize,
            clamped: raw < 1,
        })
    }

    /// `χ + k + 3` before clamping.
    pub fn raw_threshold(&self) -> i64 {
        self.euler_characteristic + i64::from(self.k) + 3
    }

    /// `χ + K + 2`: the bound on the number of gap points of the return map.
    pub fn gap_bound(&self) -> i64 {
        self.euler_characteristic + i64::from(self.singularity_count) + 2
    }

    pub fn is_met_by(&self, edge_count: usize) -> bool {
        edge_count >= self.threshold
    }
}
