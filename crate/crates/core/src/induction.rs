//! First-return maps and Rauzy–Veech induction.
//!
//! [`induce`] computes the first-return map to `[0, b)` by pushing the
//! partition of `[0, b)` forward piece by piece, exactly. [`rauzy_step`]
//! computes the same kind of object combinatorially, on the two-row
//! (labelled) representation. [`check_property_c`] checks that the two agree
//! after rescaling, along a whole Rauzy orbit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iet::{Iet, IetRepr, Piece};
use crate::rational::{format_rational, serde_rational, serde_rational_vec, Rational};

/// Convention recorded in every Rauzy report.
pub const RAUZY_CONVENTION: &str = "right-end Rauzy-Veech: compare the last domain interval \
(top) with the last image interval (bottom); the longer one is shortened by the shorter; \
step type names the longer (winning) row";

/// One piece of a first-return map: on `[start, end)` the first return to
/// the base happens after `return_time` steps and is `x ↦ x + translation`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReturnPiece {
    #[serde(with = "serde_rational")]
    pub start: Rational,
    #[serde(with = "serde_rational")]
    pub end: Rational,
    pub return_time: usize,
    #[serde(with = "serde_rational")]
    pub translation: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct InducedResult {
    /// The first-return map, canonical, on `[0, b)`.
    pub induced: Iet,
    /// Pieces of constant return time and translation, in domain order.
    /// They refine the intervals of `induced`, and coincide with them unless
    /// two pieces with different return times happen to glue continuously.
    pub pieces: Vec<ReturnPiece>,
    /// `pieces[i].return_time`, for convenience.
    pub return_times: Vec<usize>,
    /// Interior piece boundaries: points whose orbit meets a discontinuity of
    /// the parent (or the end of the base) before returning.
    #[serde(with = "serde_rational_vec")]
    pub parent_break_hits: Vec<Rational>,
}

impl InducedResult {
    pub fn piece_at(&self, x: &Rational) -> Option<&ReturnPiece> {
        self.pieces.iter().find(|p| &p.start <= x && x < &p.end)
    }

    /// `Σ return_time · length`. Equals the parent's base length exactly when
    /// the orbit of `[0, b)` covers the parent's domain.
    pub fn kac_sum(&self) -> Rational {
        self.pieces
            .iter()
            .map(|p| (&p.end - &p.start) * Rational::from_integer(p.return_time.into()))
            .sum()
    }
}

/// Budget heuristic `10 · (m + base/b)`, rounded up.
pub fn default_max_steps(e: &Iet, b: &Rational) -> usize {
    let ratio = (e.base_length() / b).ceil().to_integer();
    10 * (e.len() + ratio.to_usize().unwrap_or(usize::MAX / 20))
}

/// Exact bound on return times to `[0, b)`: with `D` the common
/// denominator of the lengths and `b`, `E` permutes the cells of the grid
/// `(1/D)Z`, every return piece is at least one cell wide and its tower has
/// at most `base · D` levels.
pub fn lattice_return_bound(e: &Iet, b: &Rational) -> usize {
    let d = e.lengths().iter().chain(std::iter::once(b)).fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    (e.base_length() * Rational::from_integer(d)).ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

/// First-return map of `e` to `[0, b)`.
pub fn induce(e: &Iet, b: &Rational, max_steps: usize) -> Result<InducedResult> {
    if !b.is_positive() || b > e.base_length() {
        return Err(Error::InvalidArgument(format!(
            "induction base {} must lie in (0, {}]",
            format_rational(b),
            format_rational(e.base_length())
        )));
    }
    if max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be positive".into()));
    }

    let mut active = vec![Piece { start: Rational::zero(), end: b.clone(), translation: Rational::zero() }];
    let mut done: Vec<ReturnPiece> = Vec::new();
    let mut steps = 0usize;
    while !active.is_empty() {
        if steps == max_steps {
            return Err(Error::ReturnTimeExceeded { max_steps, scale: b.clone() });
        }
        steps += 1;
        let mut next = Vec::with_capacity(active.len() + 2);
        for piece in &active {
            for p in e.push_forward(piece) {
                let img_start = &p.start + &p.translation;
                let img_end = &p.end + &p.translation;
                if &img_end <= b {
                    done.push(ReturnPiece {
                        start: p.start,
                        end: p.end,
                        return_time: steps,
                        translation: p.translation,
                    });
                } else if &img_start >= b {
                    next.push(p);
                } else {
                    let cut = b - &p.translation;
                    done.push(ReturnPiece {
                        start: p.start,
                        end: cut.clone(),
                        return_time: steps,
                        translation: p.translation.clone(),
                    });
                    next.push(Piece { start: cut, end: p.end, translation: p.translation });
                }
            }
        }
        active = next;
    }

    done.sort_by(|x, y| x.start.cmp(&y.start));
    let mut pieces: Vec<ReturnPiece> = Vec::with_capacity(done.len());
    for p in done {
        match pieces.last_mut() {
            Some(last) if last.return_time == p.return_time && last.translation == p.translation => {
                last.end = p.end;
            }
            _ => pieces.push(p),
        }
    }
    let induced = Iet::from_pieces(
        pieces
            .iter()
            .map(|p| (p.start.clone(), &p.end - &p.start, &p.start + &p.translation))
            .collect(),
    )?;
    if induced.base_length() != b {
        return Err(Error::NotInduced("returned pieces do not cover the base".into()));
    }
    let return_times = pieces.iter().map(|p| p.return_time).collect();
    let parent_break_hits = pieces.iter().skip(1).map(|p| p.start.clone()).collect();
    Ok(InducedResult { induced, pieces, return_times, parent_break_hits })
}

/// `e` conjugated by the linear map onto `[0, to_base)`.
pub fn rescale(e: &Iet, to_base: &Rational) -> Result<Iet> {
    if !to_base.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "rescale target {} must be positive",
            format_rational(to_base)
        )));
    }
    Ok(e.scaled(&(to_base / e.base_length())))
}

/// Which row was longer at a Rauzy step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepType {
    /// The last domain interval was longer.
    Top,
    /// The last image interval was longer.
    Bottom,
}

/// Two-row form of an iet, kept exactly as Rauzy induction produces it: the
/// labels are the original interval indices and no merging happens, so `m`
/// is preserved even where the map has become continuous at a marked point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledIet {
    #[serde(with = "serde_rational")]
    pub base: Rational,
    /// Indexed by label.
    #[serde(with = "serde_rational_vec")]
    pub lengths: Vec<Rational>,
    /// Labels in domain order.
    pub top: Vec<usize>,
    /// Labels in image order.
    pub bottom: Vec<usize>,
}

impl LabeledIet {
    pub fn from_iet(e: &Iet) -> LabeledIet {
        LabeledIet::build(e.base_length().clone(), e.lengths().to_vec(), e.permutation())
    }

    /// The pair `(λ, π)` as given, without merging intervals that `π`
    /// keeps adjacent.
    pub fn from_raw(lengths: Vec<Rational>, permutation: Vec<usize>) -> Result<LabeledIet> {
        let e = crate::iet::make_iet(lengths.clone(), permutation.clone())?;
        Ok(LabeledIet::build(e.base_length().clone(), lengths, &permutation))
    }

    fn build(base: Rational, lengths: Vec<Rational>, permutation: &[usize]) -> LabeledIet {
        let m = lengths.len();
        let mut bottom = vec![0; m];
        for (i, &p) in permutation.iter().enumerate() {
            bottom[p - 1] = i;
        }
        LabeledIet { base, lengths, top: (0..m).collect(), bottom }
    }

    /// Domain-order lengths and 1-indexed permutation, before canonicalization.
    pub fn raw(&self) -> (Vec<Rational>, Vec<usize>) {
        let mut position = vec![0; self.top.len()];
        for (k, &label) in self.bottom.iter().enumerate() {
            position[label] = k + 1;
        }
        let lengths = self.top.iter().map(|&l| self.lengths[l].clone()).collect();
        let perm = self.top.iter().map(|&l| position[l]).collect();
        (lengths, perm)
    }

    pub fn to_iet(&self) -> Iet {
        let (lengths, perm) = self.raw();
        crate::iet::make_iet(lengths, perm).expect("Rauzy induction keeps lengths positive")
    }

    pub fn is_irreducible(&self) -> bool {
        let m = self.top.len();
        if m < 2 {
            return false;
        }
        // seen[l] counts how many of the two prefixes contain label l
        let mut seen = vec![0u8; m];
        let mut shared = 0;
        for j in 0..m - 1 {
            for label in [self.top[j], self.bottom[j]] {
                seen[label] += 1;
                if seen[label] == 2 {
                    shared += 1;
                }
            }
            if shared == j + 1 {
                return false;
            }
        }
        true
    }

    /// One Rauzy–Veech step: the first-return map to
    /// `[0, base - min(λ_top, λ_bottom))`.
    pub fn rauzy_step(&self) -> Result<(LabeledIet, StepType)> {
        if !self.is_irreducible() {
            return Err(Error::ReduciblePermutation(self.raw().1));
        }
        let m = self.top.len();
        let alpha = self.top[m - 1];
        let beta = self.bottom[m - 1];
        let (la, lb) = (&self.lengths[alpha], &self.lengths[beta]);
        let mut next = self.clone();
        let step = match la.cmp(lb) {
            std::cmp::Ordering::Equal => return Err(Error::TieEncountered(la.clone())),
            std::cmp::Ordering::Greater => {
                next.lengths[alpha] = la - lb;
                next.base = &self.base - lb;
                next.bottom.pop();
                let at = next.bottom.iter().position(|&l| l == alpha).unwrap();
                next.bottom.insert(at + 1, beta);
                StepType::Top
            }
            std::cmp::Ordering::Less => {
                next.lengths[beta] = lb - la;
                next.base = &self.base - la;
                next.top.pop();
                let at = next.top.iter().position(|&l| l == beta).unwrap();
                next.top.insert(at + 1, alpha);
                StepType::Bottom
            }
        };
        Ok((next, step))
    }
}

/// One Rauzy–Veech step of a canonical iet.
pub fn rauzy_step(e: &Iet) -> Result<(LabeledIet, StepType)> {
    LabeledIet::from_iet(e).rauzy_step()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    DepthReached,
    TieEncountered,
}

#[derive(Clone, Debug, Serialize)]
pub struct RauzyStep {
    pub step_type: StepType,
    pub before: LabeledIet,
    pub after: LabeledIet,
}

#[derive(Clone, Debug, Serialize)]
pub struct RauzyTrajectory {
    pub steps: Vec<RauzyStep>,
    /// `a_n`: unnormalized base length after step `n` (n = 1, 2, …).
    #[serde(with = "serde_rational_vec")]
    pub scales: Vec<Rational>,
    pub halt_reason: HaltReason,
}

impl RauzyTrajectory {
    /// `R^n(E)` on its own base `[0, a_n)`, canonical.
    pub fn iet_at(&self, n: usize) -> Iet {
        self.steps[n - 1].after.to_iet()
    }
}

/// Up to `depth` Rauzy steps; a tie ends the orbit early.
pub fn rauzy_orbit(e: &Iet, depth: usize) -> Result<RauzyTrajectory> {
    rauzy_orbit_labeled(&LabeledIet::from_iet(e), depth)
}

/// [`rauzy_orbit`] started from a two-row form, e.g. one with marked points.
pub fn rauzy_orbit_labeled(start: &LabeledIet, depth: usize) -> Result<RauzyTrajectory> {
    if depth == 0 {
        return Err(Error::InvalidArgument("Rauzy depth must be at least 1".into()));
    }
    let mut current = start.clone();
    let mut steps = Vec::with_capacity(depth.min(1 << 16));
    let mut scales = Vec::with_capacity(depth.min(1 << 16));
    let mut halt_reason = HaltReason::DepthReached;
    for _ in 0..depth {
        match current.rauzy_step() {
            Ok((after, step_type)) => {
                scales.push(after.base.clone());
                steps.push(RauzyStep { step_type, before: current, after: after.clone() });
                current = after;
            }
            Err(Error::TieEncountered(_)) => {
                halt_reason = HaltReason::TieEncountered;
                break;
            }
            Err(err) => return Err(err),
        }
    }
    Ok(RauzyTrajectory { steps, scales, halt_reason })
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCEntry {
    pub n: usize,
    #[serde(with = "serde_rational")]
    pub scale: Rational,
    pub step_type: StepType,
    pub passed: bool,
    /// `R^n(E)` rescaled to `[0, 1)`.
    pub rauzy: IetRepr,
    /// The first-return map to `[0, a_n)` rescaled to `[0, 1)`.
    pub induced: IetRepr,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCReport {
    pub convention: &'static str,
    pub depth: usize,
    pub halt_reason: HaltReason,
    pub entries: Vec<PropertyCEntry>,
    pub all_passed: bool,
}

/// For each Rauzy step `n`, compares `R^n(E)` with the first-return map of
/// `E` to `[0, a_n)`, both rescaled to `[0, 1)`, exactly.
pub fn check_property_c(e: &Iet, depth: usize) -> Result<PropertyCReport> {
    let trajectory = rauzy_orbit(e, depth)?;
    let one = Rational::from_integer(1.into());
    let mut entries = Vec::with_capacity(trajectory.steps.len());
    for (idx, (step, scale)) in trajectory.steps.iter().zip(&trajectory.scales).enumerate() {
        let rauzy = rescale(&step.after.to_iet(), &one)?;
        let induced = induce(e, scale, lattice_return_bound(e, scale))?;
        let induced = rescale(&induced.induced, &one)?;
        entries.push(PropertyCEntry {
            n: idx + 1,
            scale: scale.clone(),
            step_type: step.step_type,
            passed: rauzy == induced,
            rauzy: rauzy.into(),
            induced: induced.into(),
        });
    }
    let all_passed = entries.iter().all(|e| e.passed);
    Ok(PropertyCReport {
        convention: RAUZY_CONVENTION,
        depth,
        halt_reason: trajectory.halt_reason,
        entries,
        all_passed,
    })
}
