//! Interval exchange transformations with exact rational lengths.
//!
//! An [`Iet`] on `[0, b)` is encoded by a length vector `λ` (domain order)
//! and a 1-indexed permutation `π`, where `π(i)` is the position of the
//! i-th domain interval in the image. So `E(a_i) = Σ_{π(j) < π(i)} λ_j` and
//! `E(x) = E(a_i) + x - a_i` on `[a_i, a_{i+1})`.
//!
//! Every `Iet` is canonical: the map is discontinuous at exactly the stored
//! interior breakpoints. Construction merges adjacent intervals whose images
//! are adjacent in the same order.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, serde_rational_vec, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IetRepr", into = "IetRepr")]
pub struct Iet {
    base: Rational,
    lengths: Vec<Rational>,
    permutation: Vec<usize>,
    breakpoints: Vec<Rational>,
    offsets: Vec<Rational>,
}

/// A maximal half-open interval `[start, end)` on which a power of the map
/// acts as `x ↦ x + translation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub start: Rational,
    pub end: Rational,
    pub translation: Rational,
}

impl Piece {
    pub fn contains(&self, x: &Rational) -> bool {
        &self.start <= x && x < &self.end
    }
}

/// Builds the canonical iet with the given lengths and permutation.
///
/// Adjacent intervals `i, i+1` with `π(i+1) = π(i) + 1` are merged, since the
/// map is continuous across their common endpoint.
pub fn make_iet(lengths: Vec<Rational>, permutation: Vec<usize>) -> Result<Iet> {
    if lengths.is_empty() {
        return Err(Error::EmptyLengths);
    }
    for (index, value) in lengths.iter().enumerate() {
        if !value.is_positive() {
            return Err(Error::NonPositiveLength { index, value: value.clone() });
        }
    }
    validate_permutation(&permutation, lengths.len())?;

    let mut lengths = lengths;
    let mut permutation = permutation;
    let mut i = 0;
    while i + 1 < lengths.len() {
        if permutation[i + 1] == permutation[i] + 1 {
            let removed = permutation.remove(i + 1);
            let len = lengths.remove(i + 1);
            lengths[i] += len;
            for p in permutation.iter_mut() {
                if *p > removed {
                    *p -= 1;
                }
            }
            // a merge can expose a new mergeable pair on the left
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    Ok(Iet::assemble(lengths, permutation))
}

fn validate_permutation(permutation: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    if permutation.len() != m {
        return Err(Error::PermutationNotBijective(permutation.to_vec()));
    }
    for &p in permutation {
        if p == 0 || p > m || seen[p - 1] {
            return Err(Error::PermutationNotBijective(permutation.to_vec()));
        }
        seen[p - 1] = true;
    }
    Ok(())
}

impl Iet {
    fn assemble(lengths: Vec<Rational>, permutation: Vec<usize>) -> Iet {
        let m = lengths.len();
        let mut breakpoints = Vec::with_capacity(m + 1);
        let mut acc = Rational::zero();
        breakpoints.push(acc.clone());
        for l in &lengths {
            acc += l;
            breakpoints.push(acc.clone());
        }
        let mut by_position = vec![0usize; m];
        for (i, &p) in permutation.iter().enumerate() {
            by_position[p - 1] = i;
        }
        let mut image_start = vec![Rational::zero(); m];
        let mut acc = Rational::zero();
        for &i in &by_position {
            image_start[i] = acc.clone();
            acc += &lengths[i];
        }
        let offsets = image_start
            .into_iter()
            .zip(&breakpoints)
            .map(|(e, a)| e - a)
            .collect();
        Iet { base: acc, lengths, permutation, breakpoints, offsets }
    }

    /// The identity on `[0, base)` (a single interval).
    pub fn identity(base: Rational) -> Result<Iet> {
        make_iet(vec![base], vec![1])
    }

    /// `x ↦ x + shift (mod base)` on `[0, base)`, for `0 <= shift < base`.
    pub fn rotation(base: &Rational, shift: &Rational) -> Result<Iet> {
        if shift.is_negative() || shift >= base {
            return Err(Error::InvalidArgument(format!(
                "rotation shift {} must lie in [0, {})",
                format_rational(shift),
                format_rational(base)
            )));
        }
        if shift.is_zero() {
            return Iet::identity(base.clone());
        }
        make_iet(vec![base - shift, shift.clone()], vec![2, 1])
    }

    /// Builds an iet from pieces `(start, length, image_start)` that tile the
    /// domain and whose images tile the same interval. The result is
    /// canonicalized.
    pub fn from_pieces(mut pieces: Vec<(Rational, Rational, Rational)>) -> Result<Iet> {
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|&i, &j| pieces[i].2.cmp(&pieces[j].2));
        let mut permutation = vec![0; pieces.len()];
        for (pos, &i) in order.iter().enumerate() {
            permutation[i] = pos + 1;
        }
        // the images must tile [0, base) in the order just computed
        let mut acc = Rational::zero();
        for &i in &order {
            if pieces[i].2 != acc {
                return Err(Error::NotInduced(format!(
                    "image pieces do not tile the base: gap or overlap at {}",
                    format_rational(&acc)
                )));
            }
            acc += &pieces[i].1;
        }
        make_iet(pieces.into_iter().map(|p| p.1).collect(), permutation)
    }

    pub fn base_length(&self) -> &Rational {
        &self.base
    }

    /// Number of intervals `m`.
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    /// 1-indexed: `permutation()[i] - 1` is the image position of interval `i`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// `a_1 = 0 < a_2 < … < a_{m+1} = base`.
    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    /// `E(x) - x` on each interval.
    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    pub fn is_identity(&self) -> bool {
        self.lengths.len() == 1
    }

    pub fn in_domain(&self, x: &Rational) -> bool {
        !x.is_negative() && x < &self.base
    }

    fn check_domain(&self, x: &Rational) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x: x.clone(), base: self.base.clone() })
        }
    }

    /// Index (0-based) of the interval `[a_i, a_{i+1})` containing `x`.
    pub fn interval_index(&self, x: &Rational) -> Result<usize> {
        self.check_domain(x)?;
        let interior = &self.breakpoints[1..self.len()];
        Ok(interior.partition_point(|a| a <= x))
    }

    pub fn evaluate(&self, x: &Rational) -> Result<Rational> {
        let i = self.interval_index(x)?;
        Ok(x + &self.offsets[i])
    }

    /// Image of interval `i` as `[start, end)`.
    pub fn image_interval(&self, i: usize) -> (Rational, Rational) {
        let start = &self.breakpoints[i] + &self.offsets[i];
        let end = &start + &self.lengths[i];
        (start, end)
    }

    pub fn invert(&self) -> Iet {
        let m = self.len();
        let mut preimage = vec![0usize; m];
        for (i, &p) in self.permutation.iter().enumerate() {
            preimage[p - 1] = i;
        }
        let lengths = preimage.iter().map(|&i| self.lengths[i].clone()).collect();
        let permutation = preimage.iter().map(|&i| i + 1).collect();
        // the inverse of a canonical iet is canonical
        Iet::assemble(lengths, permutation)
    }

    /// `E^n(x)`; negative `n` iterates the inverse.
    pub fn iterate(&self, x: &Rational, n: i64) -> Result<Rational> {
        self.check_domain(x)?;
        let inverse;
        let map = if n < 0 {
            inverse = self.invert();
            &inverse
        } else {
            self
        };
        let mut y = x.clone();
        for _ in 0..n.unsigned_abs() {
            y = map.evaluate(&y)?;
        }
        Ok(y)
    }

    /// Pieces of constant itinerary for `E, E^2, …, E^n`: on each returned
    /// interval every `E^j` with `j <= n` is a single translation, and each
    /// piece is maximal with that property. Breaks are the pull-backs
    /// `E^{-j}(a_i)` for `0 <= j < n`, so there are at most `1 + n(m-1)`.
    /// `translation` is the offset of `E^n`.
    ///
    /// Use [`Iet::translation_pieces`] for the coarser partition on which only
    /// `E^n` itself is required to be a translation.
    pub fn continuity_intervals(&self, n: usize) -> Vec<Piece> {
        let mut pieces = vec![Piece {
            start: Rational::zero(),
            end: self.base.clone(),
            translation: Rational::zero(),
        }];
        for _ in 0..n {
            let mut next = Vec::with_capacity(pieces.len() + self.len());
            for piece in &pieces {
                next.extend(self.push_forward(piece));
            }
            pieces = next;
        }
        pieces
    }

    /// Splits `piece` where its current image crosses a breakpoint of `self`
    /// and adds one more application of `self` to each part.
    pub(crate) fn push_forward(&self, piece: &Piece) -> Vec<Piece> {
        let img_start = &piece.start + &piece.translation;
        let img_end = &piece.end + &piece.translation;
        let mut out = Vec::new();
        let mut i = self.interval_index(&img_start).expect("image lies in the domain");
        let mut lo = img_start;
        loop {
            let hi = std::cmp::min(&self.breakpoints[i + 1], &img_end).clone();
            out.push(Piece {
                start: &lo - &piece.translation,
                end: &hi - &piece.translation,
                translation: &piece.translation + &self.offsets[i],
            });
            if hi >= img_end {
                break;
            }
            lo = hi;
            i += 1;
        }
        out
    }

    /// Maximal intervals on which `E^n` is a translation.
    pub fn translation_pieces(&self, n: usize) -> Vec<Piece> {
        let mut merged: Vec<Piece> = Vec::new();
        for piece in self.continuity_intervals(n) {
            match merged.last_mut() {
                Some(last) if last.translation == piece.translation => last.end = piece.end,
                _ => merged.push(piece),
            }
        }
        merged
    }

    /// `self ∘ inner` (apply `inner` first). Both maps must share a base.
    pub fn compose(&self, inner: &Iet) -> Result<Iet> {
        if self.base != inner.base {
            return Err(Error::InvalidArgument(format!(
                "cannot compose iets on [0, {}) and [0, {})",
                format_rational(&self.base),
                format_rational(&inner.base)
            )));
        }
        let mut pieces = Vec::new();
        for i in 0..inner.len() {
            let piece = Piece {
                start: inner.breakpoints[i].clone(),
                end: inner.breakpoints[i + 1].clone(),
                translation: inner.offsets[i].clone(),
            };
            for p in self.push_forward(&piece) {
                let len = &p.end - &p.start;
                let image = &p.start + &p.translation;
                pieces.push((p.start, len, image));
            }
        }
        Iet::from_pieces(pieces)
    }

    /// `R ∘ E ∘ R^{-1}` where `R` is the rotation `x ↦ x - shift (mod base)`:
    /// the same dynamics read in coordinates where `shift` sits at 0.
    pub fn recentered(&self, shift: &Rational) -> Result<Iet> {
        let forward = Iet::rotation(&self.base, shift)?;
        let back = forward.invert();
        back.compose(&self.compose(&forward)?)
    }

    /// Same combinatorics, every length multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &Rational) -> Iet {
        Iet::assemble(
            self.lengths.iter().map(|l| l * factor).collect(),
            self.permutation.clone(),
        )
    }
}

/// On-disk form: `{"lengths": ["2/3","1/3"], "permutation": [2,1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IetRepr {
    #[serde(with = "serde_rational_vec")]
    pub lengths: Vec<Rational>,
    pub permutation: Vec<usize>,
}

impl TryFrom<IetRepr> for Iet {
    type Error = Error;
    fn try_from(r: IetRepr) -> Result<Iet> {
        make_iet(r.lengths, r.permutation)
    }
}

impl From<Iet> for IetRepr {
    fn from(e: Iet) -> IetRepr {
        IetRepr { lengths: e.lengths, permutation: e.permutation }
    }
}
