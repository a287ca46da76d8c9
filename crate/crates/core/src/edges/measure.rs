use std::io::Write;

use num_bigint::BigInt;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{probe_bk_labeled, ClosingCriterion, Verdict};
use crate::error::{Error, Result};
use crate::induction::LabeledIet;
use crate::rational::{format_rational, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct MeasureConfig {
    pub m: usize,
    pub criterion: ClosingCriterion,
    pub depth: usize,
    pub samples: usize,
    pub seed: u64,
    /// Lengths are multiples of `1/resolution`.
    pub resolution: u64,
}

impl MeasureConfig {
    pub fn new(m: usize, criterion: ClosingCriterion, depth: usize, samples: usize, seed: u64) -> MeasureConfig {
        MeasureConfig { m, criterion, depth, samples, seed, resolution: 1_000_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub index: usize,
    /// `"p/q"` lengths separated by `;`.
    pub lengths: String,
    /// Sampled permutation, before canonical merging, separated by `;`.
    pub permutation: String,
    pub canonical_m: usize,
    pub verdict: String,
    pub passed_scales: usize,
    /// First passing scale index, 0 if none.
    pub first_pass: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fraction {
    pub count: usize,
    pub fraction: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Fraction {
    pub fn wilson(count: usize, total: usize) -> Fraction {
        if total == 0 {
            return Fraction { count, fraction: 0.0, ci_low: 0.0, ci_high: 1.0 };
        }
        let z = 1.959_963_984_540_054_f64;
        let n = total as f64;
        let p = count as f64 / n;
        let denom = 1.0 + z * z / n;
        let center = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        Fraction {
            count,
            fraction: p,
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureReport {
    pub config: MeasureConfig,
    pub certified: Fraction,
    pub refuted: Fraction,
    pub undecided: Fraction,
    /// Samples whose probe failed (counted in none of the fractions' numerators).
    pub errors: usize,
    /// Reducible permutations drawn and rejected before acceptance.
    pub reducible_rejected: usize,
    #[serde(skip)]
    pub rows: Vec<SampleRow>,
}

impl MeasureReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Irreducible iff no proper prefix `1..j` is mapped onto itself.
fn is_irreducible(perm: &[usize]) -> bool {
    let mut max = 0;
    for (j, &p) in perm.iter().enumerate().take(perm.len() - 1) {
        max = max.max(p);
        if max == j + 1 {
            return false;
        }
    }
    true
}

/// One sample: lengths from `m - 1` distinct cut points of `{1, …, R-1}`
/// (uniform over compositions of `R` into `m` positive parts) and a
/// permutation drawn uniformly from the irreducible ones by rejection.
/// Returns the lengths, the permutation and the number of rejections.
pub fn sample_iet<R: Rng>(rng: &mut R, m: usize, resolution: u64) -> (Vec<Rational>, Vec<usize>, usize) {
    let mut cuts: Vec<u64> = index::sample(rng, (resolution - 1) as usize, m - 1)
        .into_iter()
        .map(|c| c as u64 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(resolution);
    let mut prev = 0;
    let lengths = cuts
        .iter()
        .map(|&c| {
            let l = Rational::new(BigInt::from(c - prev), BigInt::from(resolution));
            prev = c;
            l
        })
        .collect();
    let mut perm: Vec<usize> = (1..=m).collect();
    let mut rejected = 0;
    loop {
        perm.shuffle(rng);
        if is_irreducible(&perm) {
            break;
        }
        rejected += 1;
    }
    (lengths, perm, rejected)
}

fn join<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

/// Monte Carlo estimate of how much of `Δ_m × S_m` the probe certifies.
///
/// Each sample is probed along the Rauzy orbit of its own pair `(λ, π)`.
/// Samples are drawn sequentially from one seeded stream, probed in
/// parallel, and reported in sample order, so the output depends on the
/// seed only.
pub fn estimate_full_measure(config: &MeasureConfig) -> Result<MeasureReport> {
    if config.m < 2 {
        return Err(Error::InvalidArgument("m must be at least 2".into()));
    }
    if config.samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if config.resolution < config.m as u64 {
        return Err(Error::InvalidArgument("resolution must be at least m".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reducible_rejected = 0;
    let drawn: Vec<_> = (0..config.samples)
        .map(|_| {
            let (lengths, perm, rejected) = sample_iet(&mut rng, config.m, config.resolution);
            reducible_rejected += rejected;
            (lengths, perm)
        })
        .collect();

    let rows: Vec<SampleRow> = drawn
        .par_iter()
        .enumerate()
        .map(|(index, (lengths, perm))| {
            let mut row = SampleRow {
                index,
                lengths: join(lengths, format_rational),
                permutation: join(perm, |p| p.to_string()),
                canonical_m: 0,
                verdict: String::new(),
                passed_scales: 0,
                first_pass: 0,
                error: String::new(),
            };
            let outcome = LabeledIet::from_raw(lengths.clone(), perm.clone()).and_then(|start| {
                row.canonical_m = start.to_iet().len();
                probe_bk_labeled(&start, &config.criterion, config.depth)
            });
            match outcome {
                Ok(report) => {
                    row.verdict = verdict_name(report.verdict).into();
                    row.passed_scales = report.sequence.len();
                    row.first_pass = report.probes.iter().find(|p| p.passed).map_or(0, |p| p.n);
                }
                Err(err) => {
                    row.verdict = "error".into();
                    row.error = err.to_string();
                }
            }
            row
        })
        .collect();

    let count = |v: &str| rows.iter().filter(|r| r.verdict == v).count();
    let n = config.samples;
    Ok(MeasureReport {
        config: config.clone(),
        certified: Fraction::wilson(count("certified_to_depth"), n),
        refuted: Fraction::wilson(count("refuted_at_depth"), n),
        undecided: Fraction::wilson(count("undecided_tie"), n),
        errors: count("error"),
        reducible_rejected,
        rows,
    })
}

pub(crate) fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::CertifiedToDepth => "certified_to_depth",
        Verdict::RefutedAtDepth => "refuted_at_depth",
        Verdict::UndecidedTie => "undecided_tie",
    }
}
