//! Exact arithmetic in `Z[Z^d]` and matrices over it.

mod element;
mod matrix;
mod parse;
mod serde_impl;
mod torus_point;

pub use element::{Exponent, GroupRingElement};
pub use matrix::{matrix_from_strs, GroupRingMatrix, RankProfile};
pub use parse::{inferred_dim, parse_with_dim};
pub use torus_point::{torus_distance, wrap_signed, TorusPoint};
