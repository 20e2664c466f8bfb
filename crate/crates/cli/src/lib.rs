//! Command-line front end for `cnt-coherence`: config files, result files and
//! the `cnt-coherence` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod output;
pub mod solve;

pub use cli::{cli_main, cli_run};
