use serde::Serialize;

use super::flow::{FlowBox, SuspensionFlow};
use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64};

/// Number of coarse samples used to bracket the sign change of `g`.
const BRACKET_SAMPLES: usize = 64;
const MAX_BISECTIONS: usize = 200;

/// The box geometry in floating point.
#[derive(Clone, Debug)]
struct Strip {
    left: f64,
    roof: f64,
    offset: f64,
}

/// `X + t X⊥` on a suspension flow: inside the box `F` a forward orbit
/// drifts horizontally with velocity `-t · drift_rate`; elsewhere it moves
/// straight up.
///
/// With `drift_rate > 0` and `t > 0`, forward orbits drift toward `ā`, so
/// the backward arc from `b̄` lands to the right of `ā`: `ā(t)` moves from
/// `ā` toward `c̄`. Negating `drift_rate` mirrors everything, and the
/// parameter range becomes `[-σ, 0]`.
#[derive(Clone, Debug, Serialize)]
pub struct TwistFamily {
    pub flow: SuspensionFlow,
    pub flow_box: FlowBox,
    /// `σ`: `|t|` ranges over `[0, σ]`.
    pub sigma_max: f64,
    pub drift_rate: f64,
    #[serde(skip)]
    strips: Vec<Strip>,
    #[serde(skip)]
    width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub position: f64,
    /// Time elapsed since the start of the orbit.
    pub time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosingResult {
    /// Index of the scale in the shrinking sequence (1-based), 0 for a single run.
    pub n: usize,
    #[serde(with = "crate::rational::serde_rational")]
    pub scale: crate::rational::Rational,
    pub a_bar: String,
    pub b_bar: String,
    pub c_bar: String,
    pub laps: usize,
    /// `σ₁`, signed like the parameter range.
    pub sigma1: f64,
    pub sigma_max: f64,
    /// Set when `σ₁` lies at the end of the range.
    pub hit_sigma_bound: bool,
    pub periodic_point: f64,
    pub orbit_trace: Vec<TracePoint>,
    pub residual: f64,
    pub iterations: usize,
}

impl TwistFamily {
    /// Family with the default `σ`, see [`TwistFamily::default_sigma_max`].
    pub fn new(flow: SuspensionFlow, flow_box: FlowBox, drift_rate: f64) -> TwistFamily {
        let sigma_max = TwistFamily::default_sigma_max(&flow_box, drift_rate);
        TwistFamily::with_sigma_max(flow, flow_box, drift_rate, sigma_max)
    }

    pub fn with_sigma_max(flow: SuspensionFlow, flow_box: FlowBox, drift_rate: f64, sigma_max: f64) -> TwistFamily {
        let strips = flow_box
            .segments
            .iter()
            .map(|s| Strip { left: to_f64(&s.start), roof: to_f64(&s.roof), offset: to_f64(&s.offset) })
            .collect();
        let width = to_f64(&flow_box.width());
        TwistFamily { flow, flow_box, sigma_max: sigma_max.max(0.0), drift_rate, strips, width }
    }

    /// `(c̄ - ā) / (|drift_rate| · H)` with `H` the flight time of `F`: the
    /// largest twist for which the backward arc from `b̄` stays over the
    /// orthogonal edge. A zero rate uses `|drift_rate| = 1`.
    pub fn default_sigma_max(flow_box: &FlowBox, drift_rate: f64) -> f64 {
        let rate = if drift_rate == 0.0 { 1.0 } else { drift_rate.abs() };
        to_f64(&(&flow_box.c_bar - &flow_box.a_bar)) / (rate * to_f64(&flow_box.lap_time))
    }

    /// The parameter interval: `[0, σ]`, or `[-σ, 0]` for a negative rate.
    pub fn t_range(&self) -> (f64, f64) {
        if self.drift_rate < 0.0 {
            (-self.sigma_max, 0.0)
        } else {
            (0.0, self.sigma_max)
        }
    }

    fn direction(&self) -> f64 {
        if self.drift_rate < 0.0 { -1.0 } else { 1.0 }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.t_range();
        let slack = 1e-12 * self.sigma_max.max(1.0);
        if t.is_nan() || t < lo - slack || t > hi + slack {
            return Err(Error::InvalidArgument(format!("twist {t} outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    fn singular(&self, x: f64) -> bool {
        self.flow.singular_points.iter().any(|z| to_f64(z) == x)
    }

    /// Next crossing of the section by the `t`-twisted orbit of `x`, and
    /// the flight time.
    pub fn twisted_return(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        self.check_t(t)?;
        let base = to_f64(self.flow.base.base_length());
        if !(0.0..base).contains(&x) {
            return Err(Error::InvalidArgument(format!("{x} is not in [0, {base})")));
        }
        if self.singular(x) {
            return Err(Error::LeftBoxUndefined(x));
        }
        let v = -t * self.drift_rate;
        let w = self.width;
        let strip = self.strips.iter().find(|s| {
            if v < 0.0 {
                s.left < x && x <= s.left + w
            } else if v > 0.0 {
                s.left <= x && x < s.left + w
            } else {
                false
            }
        });
        match strip {
            Some(s) => {
                // drift for the whole flight, stopped by the wall it runs into
                let top = (x + v * s.roof).clamp(s.left, s.left + w);
                if self.singular(top) {
                    return Err(Error::LeftBoxUndefined(top));
                }
                Ok((top + s.offset, s.roof))
            }
            None => Ok((evaluate_f64(&self.flow, x), roof_f64(&self.flow, x))),
        }
    }

    /// Where the `t`-twisted arc through `b̄`, followed backward through
    /// `F`, meets the section: `ā(t)`, not clamped at `b̄`.
    pub fn arc_endpoint(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let mut offset = 0.0;
        for s in self.strips.iter().rev() {
            // backward in time the horizontal velocity is t · drift_rate
            offset += t * self.drift_rate * s.roof;
            if offset < 0.0 {
                return Err(Error::ContinuationBroken { t });
            }
        }
        Ok(to_f64(&self.flow_box.a_bar) + offset)
    }

    /// `g(t) = ā(t) - b̄`.
    pub fn gap(&self, t: f64) -> Result<f64> {
        Ok(self.arc_endpoint(t)? - to_f64(&self.flow_box.b_bar))
    }

    /// `ā(t)` sampled at `steps` equally spaced `t` from 0 to the far end of
    /// the range.
    pub fn continuation_curve(&self, steps: usize) -> Result<Vec<(f64, f64)>> {
        if steps < 2 {
            return Err(Error::InvalidArgument("continuation needs at least 2 steps".into()));
        }
        let curve = (0..steps)
            .map(|k| {
                let t = self.direction() * self.sigma_max * k as f64 / (steps - 1) as f64;
                Ok((t, self.arc_endpoint(t)?))
            })
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(curve.windows(2).all(|p| p[1].1 >= p[0].1));
        Ok(curve)
    }

    /// Bisection on `g` after a coarse bracketing sweep, then an
    /// independent forward integration of the closed orbit.
    pub fn find_closing_parameter(&self, tolerance: f64) -> Result<ClosingResult> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
        }
        let (lo, hi) = self.t_range();
        let no_closing = || Error::NoClosingInRange { lo, hi };
        if self.sigma_max == 0.0 {
            return Err(no_closing());
        }
        let at = |k: usize| self.direction() * self.sigma_max * k as f64 / BRACKET_SAMPLES as f64;
        let mut bracket = None;
        let mut prev = 0.0;
        for k in 1..=BRACKET_SAMPLES {
            let t = at(k);
            if self.gap(t)? >= 0.0 {
                bracket = Some((prev, t));
                break;
            }
            prev = t;
        }
        let (mut below, mut above) = bracket.ok_or_else(no_closing)?;
        let mut g_below = self.gap(below)?;
        let mut iterations = 0;
        while -g_below > tolerance && iterations < MAX_BISECTIONS {
            let mid = 0.5 * (below + above);
            if mid == below || mid == above {
                break;
            }
            iterations += 1;
            let g = self.gap(mid)?;
            if g < 0.0 {
                below = mid;
                g_below = g;
            } else {
                above = mid;
            }
        }
        if -g_below > tolerance {
            return Err(no_closing());
        }
        // below keeps ā(σ₁) on the edge side of b̄, inside F
        let sigma1 = below;
        let start = self.arc_endpoint(sigma1)?;
        let trace = integrate_forward(&self.flow, &self.flow_box, sigma1 * self.drift_rate, start, self.flow_box.laps())?;
        let residual = (trace.last().expect("at least one flight").position - start).abs();
        if residual > tolerance {
            return Err(Error::ClosingNotVerified { residual, tolerance });
        }
        Ok(ClosingResult {
            n: 0,
            scale: self.flow.base.base_length().clone(),
            a_bar: format_rational(&self.flow_box.a_bar),
            b_bar: format_rational(&self.flow_box.b_bar),
            c_bar: format_rational(&self.flow_box.c_bar),
            laps: self.flow_box.laps(),
            sigma1,
            sigma_max: self.sigma_max,
            hit_sigma_bound: sigma1.abs() >= self.sigma_max * (1.0 - 1e-12),
            periodic_point: start,
            orbit_trace: trace,
            residual,
            iterations,
        })
    }
}

fn evaluate_f64(flow: &SuspensionFlow, x: f64) -> f64 {
    let e = &flow.base;
    let i = e.breakpoints()[1..e.len()].partition_point(|a| to_f64(a) <= x);
    x + to_f64(&e.offsets()[i])
}

fn roof_f64(flow: &SuspensionFlow, x: f64) -> f64 {
    let i = flow.roof_breaks.partition_point(|b| to_f64(b) <= x) - 1;
    to_f64(&flow.roof_values[i])
}

/// Event-driven forward integration of the twisted field for `flights`
/// returns, with `twist = t · drift_rate`. Inside `F` the horizontal speed
/// is `-twist` until a side of `F` is reached; everywhere the vertical
/// speed is 1 and the roof glues `(x, roof(x))` to `(T(x), 0)`.
pub fn integrate_forward(
    flow: &SuspensionFlow,
    flow_box: &FlowBox,
    twist: f64,
    x0: f64,
    flights: usize,
) -> Result<Vec<TracePoint>> {
    let width = to_f64(&flow_box.width());
    let sides: Vec<(f64, f64)> = flow_box
        .segments
        .iter()
        .map(|s| (to_f64(&s.start), to_f64(&s.start) + width))
        .collect();
    let mut x = x0;
    let mut clock = 0.0;
    let mut trace = vec![TracePoint { position: x, time: 0.0 }];
    for _ in 0..flights {
        if flow.singular_points.iter().any(|z| to_f64(z) == x) {
            return Err(Error::LeftBoxUndefined(x));
        }
        let height = roof_f64(flow, x);
        let velocity = -twist;
        let inside = sides.iter().find(|&&(l, r)| {
            (velocity < 0.0 && l < x && x <= r) || (velocity > 0.0 && l <= x && x < r)
        });
        let mut top = x;
        if let Some(&(l, r)) = inside {
            let wall = if velocity < 0.0 { l } else { r };
            let hit = (wall - x) / velocity;
            top = if hit < height { wall } else { x + velocity * height };
        }
        if flow.singular_points.iter().any(|z| to_f64(z) == top) {
            return Err(Error::LeftBoxUndefined(top));
        }
        x = evaluate_f64(flow, top);
        clock += height;
        trace.push(TracePoint { position: x, time: clock });
    }
    Ok(trace)
}
