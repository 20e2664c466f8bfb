//! Ordered evaluation of independent grid points.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f` at every grid value, in parallel when asked, and returns the
/// results in grid order. The first failing point (in grid order) is reported.
pub fn map_grid<T, F>(grid: &[f64], parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, f64) -> Result<T> + Sync,
{
    let wrap = |(index, &value): (usize, &f64)| {
        f(index, value).map_err(|e| Error::AtGridPoint {
            index,
            value,
            source: Box::new(e),
        })
    };
    if parallel {
        let out: Vec<Result<T>> = grid.par_iter().enumerate().map(wrap).collect();
        out.into_iter().collect()
    } else {
        grid.iter().enumerate().map(wrap).collect()
    }
}
