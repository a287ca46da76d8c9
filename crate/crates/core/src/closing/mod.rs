//! Twist-closing on suspension flows.
//!
//! A virtual orthogonal edge `[ā, c̄]` of a map induced by the return map
//! `T` bounds a simple flow box `F`: the strip swept by `[ā, b̄]` from the
//! section back to `[b̄, c̄]`. Twisting the flow inside `F` moves the
//! backward arc from `b̄` along the edge; when it lands on `b̄` itself the
//! twisted flow has a closed orbit through `b̄`.
//!
//! Geometry (breakpoints, box corners, roof values) is exact; the twisted
//! dynamics run in `f64`.

mod close;
mod flow;
mod twist;

pub use close::close_at_point;
pub use flow::{build_flow_box, BoxSegment, Crossing, FlowBox, SuspensionFlow, MAX_LAPS};
pub use twist::{integrate_forward, ClosingResult, TracePoint, TwistFamily};
