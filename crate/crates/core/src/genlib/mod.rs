//! Fourier-domain generator library.
//!
//! Builds and evaluates the generators that define finitely generated
//! shift-invariant spaces: the smooth transition function and its window
//! derivatives ([`bump`]), sparse dyadic series ([`series`]), serializable
//! expression trees ([`expr`]), support geometry and truncation metadata
//! ([`support`]), and labeled generator sets with built-in presets
//! ([`generator`]).

pub mod bump;
pub mod expr;
pub mod generator;
pub mod series;
pub mod support;

pub use expr::{Coord, GeneratorExpr, MATERIALIZE_CAP};
pub use generator::{
    make_hat_set, make_preset, make_regular_set, make_sinc_set, make_sparse_generator,
    make_sparse_set, smooth_pair_first, smooth_pair_second, FourierGenerator, GeneratorSet,
};
pub use support::{AxisSupport, Interval, IntervalUnion, PieceFamily, TailInfo, TailZone};
