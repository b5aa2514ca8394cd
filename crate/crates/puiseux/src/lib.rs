//! Exact arithmetic in the field of Puiseux series over the rationals.
//!
//! Elements are finite sums `sum c_i t^{e_i}` with rational exponents,
//! truncated at a fixed order, where `t` is a positive infinitesimal. The
//! crate provides the ordered-field operations, the max norm, set-valued
//! distances between finite point sets, and volumes of planar cells bounded
//! by polynomial graphs.

mod cell;
mod error;
mod interval;
mod number;
mod order;
mod parse;

pub use cell::{max_norm_strip, px_vol_cell, px_vol_scaling_check, CellForm2D, PxPoly, ScalingReport};
pub use error::PuiseuxError;
pub use interval::{px_dist_set, IntervalSubset};
pub use number::{Coeff, Exponent, PuiseuxNumber, DEFAULT_TRUNC_ORDER};
pub use order::{px_compare, px_lt, px_max, px_min, px_norm, PxOrdering};
pub use parse::parse_puiseux;
