//! Truncated bivariate power series.
//!
//! A probability generating function `G(t1, t2) = sum f(r,s) t1^r t2^s` is
//! represented by its coefficient block `0 <= r <= rmax`, `0 <= s <= smax`.
//! The families used here are all of the form `exp(P)`, `Q^alpha` or
//! `log Q` for a sparse polynomial or series `P`/`Q`, and their
//! coefficients follow from differentiating once in `t1` (or in `t2` on the
//! `r = 0` row) and matching coefficients. Each coefficient is then a
//! finite sum over the nonzero terms of the inner polynomial.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// One monomial `coeff * t1^j * t2^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    /// Power of `t1`.
    pub j: usize,
    /// Power of `t2`.
    pub k: usize,
    /// Coefficient.
    pub coeff: f64,
}

impl Term {
    /// Shorthand constructor.
    pub const fn new(j: usize, k: usize, coeff: f64) -> Self {
        Term { j, k, coeff }
    }
}

/// Dense coefficient block of a bivariate series, row index `r` (power of
/// `t1`), column index `s` (power of `t2`).
#[derive(Debug, Clone, PartialEq)]
pub struct Series2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Series2 {
    /// All-zero block covering `0..=rmax` by `0..=smax`.
    pub fn zeros(rmax: usize, smax: usize) -> Self {
        Series2 {
            rows: rmax + 1,
            cols: smax + 1,
            data: vec![0.0; (rmax + 1) * (smax + 1)],
        }
    }

    /// Wrap a row-major block of `(rmax + 1) * (smax + 1)` coefficients.
    ///
    /// # Panics
    ///
    /// If the length does not match the block.
    pub fn from_dense(rmax: usize, smax: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), (rmax + 1) * (smax + 1), "block size mismatch");
        Series2 {
            rows: rmax + 1,
            cols: smax + 1,
            data,
        }
    }

    /// Highest `t1` power held.
    pub fn rmax(&self) -> usize {
        self.rows - 1
    }

    /// Highest `t2` power held.
    pub fn smax(&self) -> usize {
        self.cols - 1
    }

    /// Coefficient of `t1^r t2^s`; zero outside the block.
    #[inline]
    pub fn get(&self, r: usize, s: usize) -> f64 {
        if r < self.rows && s < self.cols {
            self.data[r * self.cols + s]
        } else {
            0.0
        }
    }

    #[inline]
    fn set(&mut self, r: usize, s: usize, v: f64) {
        self.data[r * self.cols + s] = v;
    }

    /// Row-major view of the coefficients.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Sum of all held coefficients.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Evaluate the truncated series at `(t1, t2)`.
    pub fn eval(&self, t1: f64, t2: f64) -> f64 {
        let mut acc = 0.0;
        let mut p1 = 1.0;
        for r in 0..self.rows {
            let mut row = 0.0;
            let mut p2 = 1.0;
            for s in 0..self.cols {
                row += self.data[r * self.cols + s] * p2;
                p2 *= t2;
            }
            acc += row * p1;
            p1 *= t1;
        }
        acc
    }

    /// Nonzero entries other than the constant, as terms.
    pub fn nonconstant_terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for s in 0..self.cols {
                let c = self.data[r * self.cols + s];
                if (r, s) != (0, 0) && c != 0.0 {
                    out.push(Term::new(r, s, c));
                }
            }
        }
        out
    }

    /// `a * self + b * other`, both truncated to the same block.
    pub fn combine(&self, a: f64, other: &Series2, b: f64) -> Series2 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Series2 {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Coefficients of `exp(c0 + sum terms)`.
///
/// `terms` must not contain the constant monomial.
pub fn exp_series(c0: f64, terms: &[Term], rmax: usize, smax: usize) -> Series2 {
    let mut out = Series2::zeros(rmax, smax);
    out.set(0, 0, libm::exp(c0));
    // r = 0 row: s F(0,s) = sum_k k c(0,k) F(0,s-k)
    for s in 1..=smax {
        let mut acc = 0.0;
        for t in terms.iter().filter(|t| t.j == 0 && t.k <= s) {
            acc += t.k as f64 * t.coeff * out.get(0, s - t.k);
        }
        out.set(0, s, acc / s as f64);
    }
    // r >= 1: r F(r,s) = sum_{j>=1} j c(j,k) F(r-j, s-k)
    for r in 1..=rmax {
        for s in 0..=smax {
            let mut acc = 0.0;
            for t in terms.iter().filter(|t| t.j >= 1 && t.j <= r && t.k <= s) {
                acc += t.j as f64 * t.coeff * out.get(r - t.j, s - t.k);
            }
            out.set(r, s, acc / r as f64);
        }
    }
    out
}

/// Coefficients of `(q0 + sum terms)^alpha` for `q0 != 0`.
pub fn power_series(q0: f64, terms: &[Term], alpha: f64, rmax: usize, smax: usize) -> Series2 {
    let mut out = Series2::zeros(rmax, smax);
    out.set(0, 0, libm::pow(q0, alpha));
    // Q * t dF/dt = alpha * F * t dQ/dt, read along t2 on the first row
    for s in 1..=smax {
        let mut acc = 0.0;
        for t in terms.iter().filter(|t| t.j == 0 && t.k <= s) {
            let lag = (s - t.k) as f64;
            acc += (alpha * t.k as f64 - lag) * t.coeff * out.get(0, s - t.k);
        }
        out.set(0, s, acc / (q0 * s as f64));
    }
    for r in 1..=rmax {
        for s in 0..=smax {
            let mut acc = 0.0;
            for t in terms.iter().filter(|t| t.j <= r && t.k <= s) {
                let lag = (r - t.j) as f64;
                acc += (alpha * t.j as f64 - lag) * t.coeff * out.get(r - t.j, s - t.k);
            }
            out.set(r, s, acc / (q0 * r as f64));
        }
    }
    out
}

/// Coefficients of `log(q0 + sum terms)` for `q0 > 0`.
pub fn log_series(q0: f64, terms: &[Term], rmax: usize, smax: usize) -> Series2 {
    let mut q = Series2::zeros(rmax, smax);
    for t in terms.iter().filter(|t| t.j <= rmax && t.k <= smax) {
        q.set(t.j, t.k, q.get(t.j, t.k) + t.coeff);
    }
    let mut out = Series2::zeros(rmax, smax);
    out.set(0, 0, libm::log(q0));
    // Q * t dL/dt = t dQ/dt
    for s in 1..=smax {
        let mut acc = s as f64 * q.get(0, s);
        for t in terms.iter().filter(|t| t.j == 0 && t.k <= s) {
            acc -= t.coeff * (s - t.k) as f64 * out.get(0, s - t.k);
        }
        out.set(0, s, acc / (q0 * s as f64));
    }
    for r in 1..=rmax {
        for s in 0..=smax {
            let mut acc = r as f64 * q.get(r, s);
            for t in terms.iter().filter(|t| t.j <= r && t.k <= s) {
                acc -= t.coeff * (r - t.j) as f64 * out.get(r - t.j, s - t.k);
            }
            out.set(r, s, acc / (q0 * r as f64));
        }
    }
    out
}

/// Default tail tolerance when a table is grown automatically.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Hard per-axis cap on automatic table growth.
pub const TABLE_CAP: usize = 200;

/// Probability mass table of a bivariate count law, truncated to a block.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    probs: Series2,
    tail_mass: f64,
}

impl PmfTable {
    /// Wrap a block of probabilities; the tail is whatever is missing from 1.
    pub fn from_series(probs: Series2) -> Self {
        let tail_mass = (1.0 - probs.sum()).max(0.0);
        PmfTable { probs, tail_mass }
    }

    /// `P(X1 = r, X2 = s)`, zero outside the table.
    #[inline]
    pub fn prob(&self, r: usize, s: usize) -> f64 {
        self.probs.get(r, s)
    }

    /// Largest first coordinate held.
    pub fn rmax(&self) -> usize {
        self.probs.rmax()
    }

    /// Largest second coordinate held.
    pub fn smax(&self) -> usize {
        self.probs.smax()
    }

    /// Probability mass outside the table.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Whether the truncation leaves at most `tol` outside.
    pub fn meets_tolerance(&self, tol: f64) -> bool {
        self.tail_mass <= tol
    }

    /// The underlying coefficient block.
    pub fn series(&self) -> &Series2 {
        &self.probs
    }

    /// Cells in row-major order with their probabilities.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let cols = self.smax() + 1;
        self.probs
            .as_slice()
            .iter()
            .enumerate()
            .map(move |(i, &p)| ((i / cols, i % cols), p))
    }
}

/// Grow a square table geometrically until its tail mass is at most `tol`.
///
/// `build(rmax, smax)` must return the table for that block. Growth starts
/// at `start` per axis, doubles, and stops at [`TABLE_CAP`].
pub fn grow_table<F>(start: usize, tol: f64, mut build: F) -> Result<PmfTable, Error>
where
    F: FnMut(usize, usize) -> PmfTable,
{
    let mut size = start.clamp(1, TABLE_CAP);
    loop {
        let table = build(size, size);
        if table.meets_tolerance(tol) {
            return Ok(table);
        }
        if size >= TABLE_CAP {
            return Err(Error::TruncationCap {
                cap: TABLE_CAP,
                tail_mass: table.tail_mass(),
            });
        }
        size = (size * 2).min(TABLE_CAP);
    }
}
