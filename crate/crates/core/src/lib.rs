//! Exact interval exchange transformations and the twist-closing of
//! suspension flows built over them.
//!
//! The crate is organized bottom-up:
//!
//! - [`iet`]: exact evaluation, inversion, iteration and continuity pieces;
//! - [`induction`]: first-return maps, Rauzy–Veech steps and their agreement
//!   after rescaling;
//! - [`edges`]: virtual orthogonal edges, the `A_k` test, depth-bounded `B_k`
//!   probing and the Monte Carlo full-measure experiment;
//! - [`closing`]: suspension flows, simple flow boxes, the twist family
//!   `X + tX⊥` and the search for the closing parameter;
//! - [`io`]: the JSON file formats;
//! - [`cli`]: the `iet` command-line front end.
//!
//! See `examples/` for one runnable program per capability.

pub mod cli;
pub mod closing;
pub mod edges;
pub mod error;
pub mod iet;
pub mod induction;
pub mod io;
pub mod rational;

pub use error::{Error, Result};
pub use iet::{make_iet, Iet, Piece};
pub use rational::Rational;
