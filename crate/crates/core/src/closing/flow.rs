use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::edges::{ClosingCriterion, VirtualEdge};
use crate::error::{Error, Result};
use crate::iet::{make_iet, Iet};
use crate::rational::{format_rational, serde_rational, serde_rational_vec, Rational};

/// Flow over `[0, base)`: move up at unit speed from `(x, 0)` to
/// `(x, roof(x))`, which is glued to `(T(x), 0)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuspensionFlow {
    pub base: Iet,
    /// Left ends of the roof pieces, starting with 0.
    #[serde(with = "serde_rational_vec")]
    pub roof_breaks: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    pub roof_values: Vec<Rational>,
    /// Points of the section where the return map is undefined.
    #[serde(with = "serde_rational_vec")]
    pub singular_points: Vec<Rational>,
    /// Number of singularities `K`.
    pub singularities: u32,
}

impl SuspensionFlow {
    /// `roof[i]` is the return time over the `i`-th of the given intervals
    /// (before any merging of `lengths`).
    pub fn new(
        lengths: Vec<Rational>,
        permutation: Vec<usize>,
        roof: Vec<Rational>,
        mut singular_points: Vec<Rational>,
        singularities: u32,
    ) -> Result<SuspensionFlow> {
        if roof.len() != lengths.len() {
            return Err(Error::InvalidArgument(format!(
                "roof has {} values for {} intervals",
                roof.len(),
                lengths.len()
            )));
        }
        if let Some(r) = roof.iter().find(|r| !r.is_positive()) {
            return Err(Error::InvalidArgument(format!("roof value {} is not positive", format_rational(r))));
        }
        let base = make_iet(lengths.clone(), permutation)?;
        if let Some(z) = singular_points.iter().find(|z| !base.in_domain(z)) {
            return Err(Error::OutOfDomain { x: z.clone(), base: base.base_length().clone() });
        }
        singular_points.sort();
        singular_points.dedup();
        let mut roof_breaks = Vec::with_capacity(lengths.len());
        let mut acc = Rational::zero();
        for l in &lengths {
            roof_breaks.push(acc.clone());
            acc += l;
        }
        let (roof_breaks, roof_values) = merge_steps(roof_breaks, roof);
        Ok(SuspensionFlow { base, roof_breaks, roof_values, singular_points, singularities })
    }

    /// Constant roof over `base`.
    pub fn with_constant_roof(base: Iet, roof: Rational, singular_points: Vec<Rational>, singularities: u32) -> Result<SuspensionFlow> {
        let n = base.len();
        SuspensionFlow::new(base.lengths().to_vec(), base.permutation().to_vec(), vec![roof; n], singular_points, singularities)
    }

    pub fn roof_at(&self, x: &Rational) -> &Rational {
        let i = self.roof_breaks.partition_point(|b| b <= x) - 1;
        &self.roof_values[i]
    }

    /// Index of the roof piece containing `x`.
    pub fn roof_piece(&self, x: &Rational) -> usize {
        self.roof_breaks.partition_point(|b| b <= x) - 1
    }

    /// End of roof piece `i`.
    pub fn roof_piece_end(&self, i: usize) -> &Rational {
        self.roof_breaks.get(i + 1).unwrap_or(self.base.base_length())
    }

    pub fn is_singular(&self, x: &Rational) -> bool {
        self.singular_points.binary_search(x).is_ok()
    }

    /// The same flow read in coordinates where `p` sits at 0.
    pub fn recentered(&self, p: &Rational) -> Result<SuspensionFlow> {
        let base_len = self.base.base_length();
        if !self.base.in_domain(p) {
            return Err(Error::OutOfDomain { x: p.clone(), base: base_len.clone() });
        }
        if p.is_zero() {
            return Ok(self.clone());
        }
        let shift = |x: &Rational| {
            let y = x - p;
            if y.is_negative() { y + base_len } else { y }
        };
        let mut steps: Vec<(Rational, Rational)> =
            self.roof_breaks.iter().zip(&self.roof_values).map(|(b, v)| (shift(b), v.clone())).collect();
        // the piece containing p now starts at 0
        steps.push((Rational::zero(), self.roof_at(p).clone()));
        steps.sort();
        steps.dedup_by(|later, earlier| later.0 == earlier.0);
        let (breaks, values) = merge_steps(steps.iter().map(|s| s.0.clone()).collect(), steps.into_iter().map(|s| s.1).collect());
        let mut singular_points: Vec<Rational> = self.singular_points.iter().map(shift).collect();
        singular_points.sort();
        Ok(SuspensionFlow {
            base: self.base.recentered(p)?,
            roof_breaks: breaks,
            roof_values: values,
            singular_points,
            singularities: self.singularities,
        })
    }

    /// Whether there are at most `χ + K + 2` singular points.
    pub fn within_gap_bound(&self, criterion: &ClosingCriterion) -> bool {
        (self.singular_points.len() as i64) <= criterion.gap_bound()
    }
}

fn merge_steps(breaks: Vec<Rational>, values: Vec<Rational>) -> (Vec<Rational>, Vec<Rational>) {
    let mut out_b: Vec<Rational> = Vec::with_capacity(breaks.len());
    let mut out_v: Vec<Rational> = Vec::with_capacity(values.len());
    for (b, v) in breaks.into_iter().zip(values) {
        if out_v.last() != Some(&v) {
            out_b.push(b);
            out_v.push(v);
        }
    }
    (out_b, out_v)
}

/// One lap of the box: the strip over `[start, start + width]` of height `roof`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxSegment {
    #[serde(with = "serde_rational")]
    pub start: Rational,
    #[serde(with = "serde_rational")]
    pub roof: Rational,
    /// Translation of `T` on this segment.
    #[serde(with = "serde_rational")]
    pub offset: Rational,
}

/// A crossing of the section by the tangent edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Crossing {
    #[serde(with = "serde_rational")]
    pub position: Rational,
    /// Time of the flight that starts here.
    #[serde(with = "serde_rational")]
    pub flight_time: Rational,
}

/// Simple flow box: the region `F` swept by `[ā, b̄]` until it lands on
/// `[b̄, c̄]`, bounded by the orthogonal edge `[ā, c̄]` and the orbit arc
/// from `ā` through `b̄` to `c̄`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowBox {
    #[serde(with = "serde_rational")]
    pub a_bar: Rational,
    #[serde(with = "serde_rational")]
    pub b_bar: Rational,
    #[serde(with = "serde_rational")]
    pub c_bar: Rational,
    /// `F` lap by lap: `T^j [ā, b̄]` for `j = 0 .. n-1`, where `T^n(ā) = b̄`.
    pub segments: Vec<BoxSegment>,
    /// Crossings from `ā` to `b̄` (excluded) and from `b̄` to `c̄` (excluded).
    pub tangent_edge: Vec<Crossing>,
    /// Flight time of `F`, from `ā` to `b̄`.
    #[serde(with = "serde_rational")]
    pub lap_time: Rational,
    /// Flight time of the whole tangent edge.
    #[serde(with = "serde_rational")]
    pub total_height: Rational,
}

impl FlowBox {
    /// `b̄ - ā`, the width of every strip of `F`.
    pub fn width(&self) -> Rational {
        &self.b_bar - &self.a_bar
    }

    pub fn laps(&self) -> usize {
        self.segments.len()
    }
}

/// Cap on the number of laps searched for `T^n(ā) = b̄`.
pub const MAX_LAPS: usize = 1 << 20;

/// The simple flow box bounded by `[ā, c̄]` and the orbit arc through
/// `ā = s`, `b̄ = e1`, `c̄ = t`.
///
/// `[s, t]` is meant to be a virtual orthogonal edge of some map induced by
/// the return map of `flow`, so `b̄` and `c̄` are reached from `ā` and `b̄`
/// after finitely many returns.
pub fn build_flow_box(flow: &SuspensionFlow, edge: &VirtualEdge) -> Result<FlowBox> {
    let (s, e1, t) = (&edge.s, &edge.e1, &edge.t);
    if !(s < e1 && e1 < t) {
        return Err(Error::InvalidArgument(format!(
            "box corners must satisfy s < E(s) < t, got {}, {}, {}",
            format_rational(s),
            format_rational(e1),
            format_rational(t)
        )));
    }
    let base = &flow.base;
    if !base.in_domain(s) || !base.in_domain(t) {
        return Err(Error::OutOfDomain { x: t.clone(), base: base.base_length().clone() });
    }
    let width = e1 - s;
    // apart from the vertex b̄, the arc meets [ā, c̄] only at its ends
    let on_edge = |x: &Rational| s <= x && x <= t;

    let mut segments = Vec::new();
    let mut tangent_edge = Vec::new();
    let mut lap_time = Rational::zero();
    let mut x = s.clone();
    while &x != e1 {
        if segments.len() == MAX_LAPS {
            return Err(Error::NotEmbedded(format!("b̄ not reached within {MAX_LAPS} returns")));
        }
        let end = &x + &width;
        if !segments.is_empty() && &x <= t && &end >= s {
            return Err(Error::NotEmbedded(format!(
                "the strip over [ā, b̄] returns to the orthogonal edge at lap {}",
                segments.len()
            )));
        }
        if let Some(z) = flow.singular_points.iter().find(|z| &&x <= z && *z <= &end) {
            return Err(Error::SingularityInBox(z.clone()));
        }
        let i = base.interval_index(&x)?;
        let piece = flow.roof_piece(&x);
        if &end >= &base.breakpoints()[i + 1] || &end >= flow.roof_piece_end(piece) {
            return Err(Error::NotEmbedded(format!(
                "T^{} [ā, b̄] = [{}, {}] is cut by a discontinuity",
                segments.len(),
                format_rational(&x),
                format_rational(&end)
            )));
        }
        let segment_end_image = &end + &base.offsets()[i];
        let roof = flow.roof_values[piece].clone();
        lap_time += &roof;
        tangent_edge.push(Crossing { position: x.clone(), flight_time: roof.clone() });
        segments.push(BoxSegment { start: x.clone(), roof, offset: base.offsets()[i].clone() });
        x = &segment_end_image - &width;
    }
    // top of F
    if let Some(z) = flow.singular_points.iter().find(|z| &e1 <= z && z <= &t) {
        return Err(Error::SingularityInBox(z.clone()));
    }

    // the arc from b̄ to c̄
    let mut total_height = lap_time.clone();
    let mut y = e1.clone();
    let mut laps = 0;
    while &y != t {
        if laps == MAX_LAPS {
            return Err(Error::NotEmbedded(format!("c̄ not reached from b̄ within {MAX_LAPS} returns")));
        }
        if laps > 0 && on_edge(&y) {
            return Err(Error::NotEmbedded(format!(
                "the arc from b̄ to c̄ crosses the orthogonal edge at {}",
                format_rational(&y)
            )));
        }
        if flow.is_singular(&y) {
            return Err(Error::SingularityInBox(y));
        }
        let roof = flow.roof_at(&y).clone();
        total_height += &roof;
        tangent_edge.push(Crossing { position: y.clone(), flight_time: roof });
        y = base.evaluate(&y)?;
        laps += 1;
    }

    Ok(FlowBox {
        a_bar: s.clone(),
        b_bar: e1.clone(),
        c_bar: t.clone(),
        segments,
        tangent_edge,
        lap_time,
        total_height,
    })
}
