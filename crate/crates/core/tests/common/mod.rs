//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use iet_closing::closing::{build_flow_box, FlowBox, SuspensionFlow, TwistFamily};
use iet_closing::edges::VirtualEdge;
use iet_closing::rational::{int, ratio, to_f64};
use iet_closing::{make_iet, Iet, Rational};

/// An iet with integer lengths (in units of `1/q`) evaluated with plain
/// integer arithmetic, on the refined grid `1/(q·r)`.
#[derive(Debug)]
pub struct GridIet {
    pub q: i64,
    pub refine: i64,
    pub lengths: Vec<i64>,
    pub perm: Vec<usize>,
    starts: Vec<i64>,
    shifts: Vec<i64>,
}

impl GridIet {
    pub fn new(lengths: Vec<i64>, perm: Vec<usize>, refine: i64) -> GridIet {
        let q: i64 = lengths.iter().sum();
        let m = lengths.len();
        let mut starts = vec![0; m];
        for i in 1..m {
            starts[i] = starts[i - 1] + lengths[i - 1];
        }
        let mut image_starts = vec![0; m];
        let mut acc = 0;
        for pos in 1..=m {
            let i = perm.iter().position(|&p| p == pos).unwrap();
            image_starts[i] = acc;
            acc += lengths[i];
        }
        let shifts = (0..m).map(|i| (image_starts[i] - starts[i]) * refine).collect();
        let starts = starts.iter().map(|s| s * refine).collect();
        GridIet { q, refine, lengths, perm, starts, shifts }
    }

    pub fn size(&self) -> i64 {
        self.q * self.refine
    }

    fn interval(&self, k: i64) -> usize {
        self.starts.iter().rposition(|&s| s <= k).unwrap()
    }

    pub fn eval(&self, k: i64) -> i64 {
        k + self.shifts[self.interval(k)]
    }

    /// Grid edges `[s, t]`, checked point by point against the definition.
    pub fn edges(&self) -> Vec<(i64, i64)> {
        let n = self.size();
        let mut out = Vec::new();
        for s in 0..n {
            let e1 = self.eval(s);
            let t = self.eval(e1);
            if !(s < e1 && e1 < t) {
                continue;
            }
            // continuity on [s, t]: one translation throughout
            let (i, j) = (self.interval(s), self.interval(t));
            if self.shifts[i..=j].iter().all(|&d| d == self.shifts[i]) {
                out.push((s, t));
            }
        }
        out
    }

    /// Greedy earliest-end packing of closed intervals.
    pub fn max_disjoint(&self) -> usize {
        let mut edges = self.edges();
        edges.sort_by_key(|&(s, t)| (t, s));
        let mut count = 0;
        let mut last_end = -1;
        for (s, t) in edges {
            if s > last_end {
                count += 1;
                last_end = t;
            }
        }
        count
    }

    pub fn to_iet(&self) -> Iet {
        make_iet(self.lengths.iter().map(|&l| ratio(l, self.q)).collect(), self.perm.clone()).unwrap()
    }
}

pub fn irreducible(perm: &[usize]) -> bool {
    let m = perm.len();
    (1..m).all(|j| perm[..j].iter().any(|&p| p > j))
}

pub fn rotation_flow(p: i64, q: i64) -> SuspensionFlow {
    SuspensionFlow::with_constant_roof(Iet::rotation(&int(1), &ratio(p, q)).unwrap(), int(1), vec![], 0).unwrap()
}

pub fn family(flow: &SuspensionFlow, s: Rational, e1: Rational, t: Rational, rate: f64) -> TwistFamily {
    let b = build_flow_box(flow, &VirtualEdge { s, e1, t }).unwrap();
    TwistFamily::new(flow.clone(), b, rate)
}

/// The closing fixtures shipped with the crate, by name.
pub fn closing_fixtures() -> Vec<(&'static str, TwistFamily)> {
    let tenth = rotation_flow(1, 10);
    let seven = rotation_flow(7, 10);
    vec![
        ("rotation 1/10", family(&tenth, int(0), ratio(1, 10), ratio(1, 5), 1.0)),
        ("rotation 1/10 mirrored", family(&tenth, int(0), ratio(1, 10), ratio(1, 5), -1.0)),
        ("rotation 1/10 inner edge", family(&tenth, ratio(1, 4), ratio(7, 20), ratio(9, 20), 0.5)),
        ("rotation 7/10 three laps", family(&seven, int(0), ratio(1, 10), ratio(1, 5), 1.0)),
    ]
}

/// Sign change of `g` located by stepping over the grid `k · step` (away
/// from 0 in the direction of the range): the midpoint of the first grid
/// cell whose right end has `g >= 0`.
pub fn sweep(family: &TwistFamily, step: f64) -> Option<f64> {
    let (lo, hi) = family.t_range();
    let (dir, far) = if lo < 0.0 { (-1.0, -lo) } else { (1.0, hi) };
    let n = (far / step).ceil() as usize;
    let at = |k: usize| dir * (k as f64 * step).min(far);
    if family.gap(0.0).unwrap() >= 0.0 {
        return Some(0.0);
    }
    (1..=n).find(|&k| family.gap(at(k)).unwrap() >= 0.0).map(|k| 0.5 * (at(k - 1) + at(k)))
}

/// Euler integration of the twisted field for `laps` flights starting at
/// `x0`, with time step `dt`. Roof and base map are evaluated exactly at the
/// binary value of each top crossing.
pub fn euler_closed_orbit(flow: &SuspensionFlow, flow_box: &FlowBox, twist: f64, x0: f64, dt: f64) -> f64 {
    let width = to_f64(&flow_box.width());
    let velocity = -twist;
    let mut x = x0;
    for _ in 0..flow_box.laps() {
        let exact = Rational::from_float(x).unwrap();
        let roof = to_f64(flow.roof_at(&exact));
        let strip = flow_box.segments.iter().map(|s| to_f64(&s.start)).find(|&l| {
            if velocity < 0.0 { l < x && x <= l + width } else { l <= x && x < l + width }
        });
        let mut y = 0.0;
        while y < roof {
            let h = dt.min(roof - y);
            if let Some(l) = strip {
                x = (x + velocity * h).clamp(l, l + width);
            }
            y += h;
        }
        x = to_f64(&flow.base.evaluate(&Rational::from_float(x).unwrap()).unwrap());
    }
    x
}
