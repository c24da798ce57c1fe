//! Leaves of functional graphs of shifted squaring maps over prime fields.
//!
//! For an odd prime `p` and distinct shifts `a_1, ..., a_n` in `F_p`, the
//! graph with edges `x -> x^2 + a_i` has a leaf at `v` when `v` has no
//! preimage, i.e. `v - a_i` is a non-square for every `i`. This crate counts
//! leaves, evaluates the closed forms for `n <= 3`, tabulates leaf counts over
//! all families, builds leafless families, and compares the normalized
//! three-map deviation with the semicircle law.

pub mod bits;
pub mod census;
pub mod cover;
pub mod curves;
pub mod dist;
pub mod error;
pub mod field;
pub mod leaves;
pub mod records;
pub mod verify;

pub use error::{Error, Result};
pub use field::{is_prime, Chi, PrimeField};
pub use leaves::{count_leaves, count_leaves_bitset, count_leaves_scan, LeafCount, ShiftFamily};
