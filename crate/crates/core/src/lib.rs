//! Density-matrix simulation of bright/dark exciton coherence in carbon
//! nanotubes: level schemes, Lindblad dynamics, closed-form analytics and
//! parameter scans.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod constants;
pub mod density;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod liouvillian;
pub mod presets;
pub mod pulse;
pub mod rates;
pub mod scenario;
pub mod scheme;
pub mod stirap;
pub mod sweep;
pub mod units;
