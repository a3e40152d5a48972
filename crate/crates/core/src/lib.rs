//! Mated-CRT maps built from correlated encoding walks, together with the
//! metric, random-walk and electrical experiments used to probe their
//! growth exponents.
//!
//! The pipeline is `walkgen` (sample an encoding walk) → `mapbuild` (turn
//! walk-time cells into a graph) → `graphalgo` (balls, walks, resistances,
//! return probabilities) → `estimators` (log-log fits, closed-form exponent
//! bounds, Markov-type ratios). `format` reads and writes the binary walk
//! and graph files.

// Numeric kernels index several parallel arrays, and `!(x > 0.0)` is the
// NaN-rejecting guard.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod format;
pub mod graphalgo;
pub mod mapbuild;
pub mod rmq;
pub mod seed;
pub mod walkgen;

pub use error::{Error, Result};
pub use estimators::{ExponentFit, MarkovTypeEstimate, TheoryConstants};
pub use graphalgo::{BallGrowthCurve, ResistanceResult, WalkTrace, WeightVector};
pub use mapbuild::{EdgeFlags, MatedCrtGraph};
pub use walkgen::{EncodingWalk, StepLaw, WalkValues};
