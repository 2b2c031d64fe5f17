//! Observed bivariate count data.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::Error;

/// A distinct observed pair together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    /// First coordinate.
    pub x: u32,
    /// Second coordinate.
    pub y: u32,
    /// How many observations fall on `(x, y)`.
    pub count: u32,
}

/// A non-empty sequence of nonnegative integer pairs.
///
/// Order is preserved; the distinct cells are precomputed because every
/// statistic here depends on the data only through cell counts.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BivariateSample {
    pairs: Vec<(u32, u32)>,
    #[cfg_attr(feature = "serde", serde(skip))]
    cells: Vec<Cell>,
}

impl BivariateSample {
    /// Wrap the pairs; fails on an empty input.
    pub fn new(pairs: Vec<(u32, u32)>) -> Result<Self, Error> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut counts: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for &p in &pairs {
            *counts.entry(p).or_default() += 1;
        }
        let cells = counts
            .into_iter()
            .map(|((x, y), count)| Cell { x, y, count })
            .collect();
        Ok(BivariateSample { pairs, cells })
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Observations in input order.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Distinct cells sorted by `(x, y)`.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Largest first coordinate.
    pub fn max_x(&self) -> u32 {
        self.cells.iter().map(|c| c.x).max().unwrap_or(0)
    }

    /// Largest second coordinate.
    pub fn max_y(&self) -> u32 {
        self.cells.iter().map(|c| c.y).max().unwrap_or(0)
    }

    /// Whether every observation is the same pair.
    pub fn is_degenerate(&self) -> bool {
        self.cells.len() == 1
    }

    /// Sample means, (biased) variances and covariance:
    /// `(mean1, mean2, var1, var2, cov)`.
    pub fn moments(&self) -> (f64, f64, f64, f64, f64) {
        let n = self.len() as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        for c in &self.cells {
            sx += c.count as f64 * c.x as f64;
            sy += c.count as f64 * c.y as f64;
        }
        let (mx, my) = (sx / n, sy / n);
        let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
        for c in &self.cells {
            let w = c.count as f64;
            let (dx, dy) = (c.x as f64 - mx, c.y as f64 - my);
            vx += w * dx * dx;
            vy += w * dy * dy;
            cxy += w * dx * dy;
        }
        (mx, my, vx / n, vy / n, cxy / n)
    }

    /// The sample concatenated with itself `k` times.
    pub fn repeated(&self, k: usize) -> Self {
        let mut pairs = Vec::with_capacity(self.pairs.len() * k);
        for _ in 0..k {
            pairs.extend_from_slice(&self.pairs);
        }
        let cells = self
            .cells
            .iter()
            .map(|c| Cell {
                count: c.count * k as u32,
                ..*c
            })
            .collect();
        BivariateSample { pairs, cells }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn empty_rejected() {
        assert_eq!(BivariateSample::new(vec![]), Err(Error::EmptySample));
    }

    #[test]
    fn cells_aggregate() {
        let s = BivariateSample::new(vec![(1, 2), (0, 0), (1, 2)]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(
            s.cells(),
            &[Cell { x: 0, y: 0, count: 1 }, Cell { x: 1, y: 2, count: 2 }]
        );
        assert_eq!((s.max_x(), s.max_y()), (1, 2));
        assert!(!s.is_degenerate());
    }

    #[test]
    fn moments_simple() {
        let s = BivariateSample::new(vec![(0, 0), (2, 4)]).unwrap();
        let (m1, m2, v1, v2, c) = s.moments();
        assert_eq!((m1, m2, v1, v2, c), (1.0, 2.0, 1.0, 4.0, 2.0));
    }
}
