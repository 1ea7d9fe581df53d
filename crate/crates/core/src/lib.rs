//! Input-output analysis of additive networks of Chen-Fliess series.
//!
//! - [`series`] and [`compose`]: exact truncated noncommutative series with
//!   shuffle, concatenation and composition products.
//! - [`network`]: closed-loop generating series between node pairs.
//! - [`reldeg`]: measured and graph-predicted relative degree, and seeded
//!   genericity sampling over random weights.
//! - [`growth`] and [`lambert`]: growth bounds, the maximal-network Abel
//!   recursion and its closed-form natural response.
//! - [`sim`] and [`ode`]: numerical evaluation of Fliess operators and
//!   network simulation with finite-escape detection.

pub mod compose;
pub mod error;
pub mod growth;
pub mod io;
pub mod lambert;
pub mod network;
pub mod ode;
pub mod reldeg;
pub mod scalar;
pub mod series;
pub mod sim;
pub mod stats;
pub mod word;

pub use compose::{compose, mixed_compose};
pub use error::{Error, Result};
pub use network::{io_map, NetworkSpec, NodeSource};
pub use scalar::{Rational, Scalar};
pub use series::{MaximalSeriesSpec, Series};
pub use word::Word;
