use alloc::vec::Vec;

use crate::error::Error;
use crate::series::{exp_series, grow_table, PmfTable, Term};

use super::{poisson_decomposition, BHParams};

/// Probabilities `P(X1 = r, X2 = s)` for `r <= rmax`, `s <= smax`.
///
/// The pgf is `exp` of a polynomial with at most eight monomials, so the
/// table is the Taylor block of that exponential. The recurrence does not
/// need the rates to be nonnegative; for a non-representable point the
/// output may contain negative entries (such a point is not a probability
/// law). Whether the block is large enough is left to the caller via
/// [`PmfTable::meets_tolerance`].
pub fn pmf_table(p: &BHParams, rmax: usize, smax: usize) -> PmfTable {
    let d = poisson_decomposition(p);
    let terms: Vec<Term> = d.terms().collect();
    PmfTable::from_series(exp_series(d.log_p00(), &terms, rmax, smax))
}

/// Grow a square table until the tail mass is below `tol`.
pub fn pmf_table_auto(p: &BHParams, tol: f64) -> Result<PmfTable, Error> {
    let d = poisson_decomposition(p);
    let terms: Vec<Term> = d.terms().collect();
    grow_table(16, tol, |r, s| {
        PmfTable::from_series(exp_series(d.log_p00(), &terms, r, s))
    })
}
