//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use bhgof_core::hermite::{poisson_decomposition, BHParams, Moments};

/// Distribution of `(j N, k N)` for `N ~ Poisson(rate)` convolved into a
/// dense `(size x size)` grid, one packet at a time. Uses only the Poisson
/// pmf `e^-c c^m / m!`, not any series recurrence.
pub fn convolution_pmf(p: &BHParams, size: usize) -> Vec<Vec<f64>> {
    let d = poisson_decomposition(p);
    let mut grid = vec![vec![0.0; size]; size];
    grid[0][0] = 1.0;
    for (&(j, k), &c) in bhgof_core::hermite::PACKETS.iter().zip(d.coefficients()) {
        if c == 0.0 {
            continue;
        }
        let (j, k) = (j as usize, k as usize);
        let mut packet = Vec::new();
        let mut prob = (-c).exp();
        let mut m = 0usize;
        while m * j.max(k) < size {
            packet.push((m * j, m * k, prob));
            m += 1;
            prob *= c / m as f64;
        }
        let mut next = vec![vec![0.0; size]; size];
        for r in 0..size {
            for s in 0..size {
                if grid[r][s] == 0.0 {
                    continue;
                }
                for &(dr, ds, q) in &packet {
                    if r + dr < size && s + ds < size {
                        next[r + dr][s + ds] += grid[r][s] * q;
                    }
                }
            }
        }
        grid = next;
    }
    grid
}

/// The distinct null parameter points of the type-I-error tables
/// (`lambda3 = 0`).
pub fn null_grid() -> Vec<BHParams> {
    [
        (1.0, 0.8, 0.10, 0.20),
        (1.0, 0.8, 0.25, 0.25),
        (1.0, 0.8, 0.50, 0.20),
        (1.0, 0.8, 0.50, 0.50),
        (1.5, 1.0, 0.50, 0.50),
        (1.5, 1.0, 0.50, 0.75),
        (1.5, 1.0, 0.75, 0.25),
        (1.5, 1.0, 1.00, 0.25),
        (2.0, 1.0, 0.25, 0.75),
        (2.0, 1.0, 0.50, 0.25),
        (2.0, 1.0, 0.75, 0.25),
    ]
    .iter()
    .map(|&(mu, s2, l1, l2)| BHParams::new(mu, s2, l1, l2, 0.0).unwrap())
    .collect()
}

/// Pearson chi-square p-value of observed counts against expected
/// probabilities, pooling cells with expected count below 5 into one.
pub fn chi_square_p(observed: &[(u64, f64)], n: u64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for &(o, prob) in observed {
        let e = prob * n as f64;
        if e >= 5.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pool_o += o as f64;
            pool_e += e;
        }
    }
    if pool_e >= 5.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e;
        cells += 1;
    }
    let df = (cells - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Chi-square p-value of a sample against every cell of `table` plus one
/// pooled cell for everything outside it.
pub fn table_chi_square(s: &bhgof_core::BivariateSample, table: &bhgof_core::PmfTable) -> f64 {
    let n = s.len() as u64;
    let mut counts = std::collections::HashMap::new();
    for c in s.cells() {
        counts.insert((c.x as usize, c.y as usize), c.count as u64);
    }
    let mut obs = Vec::new();
    let mut inside = 0u64;
    for (cell, prob) in table.cells() {
        let count = counts.get(&cell).copied().unwrap_or(0);
        inside += count;
        obs.push((count, prob));
    }
    let outside = 1.0 - obs.iter().map(|o| o.1).sum::<f64>();
    obs.push((n - inside, outside.max(0.0)));
    chi_square_p(&obs, n)
}

/// Central differences of the pgf at (1, 1): first derivatives with step
/// 1e-5; second derivatives with step 1e-4, where a smaller step would let
/// rounding (~eps/h^2) exceed the tolerance.
pub fn fd_moments(p: &BHParams) -> Moments {
    let g = |a: f64, b: f64| p.log_pgf(a, b).exp();
    let h = 1e-5;
    let d1 = (g(1.0 + h, 1.0) - g(1.0 - h, 1.0)) / (2.0 * h);
    let d2 = (g(1.0, 1.0 + h) - g(1.0, 1.0 - h)) / (2.0 * h);
    let h = 1e-4;
    let d11 = (g(1.0 + h, 1.0) - 2.0 + g(1.0 - h, 1.0)) / (h * h);
    let d22 = (g(1.0, 1.0 + h) - 2.0 + g(1.0, 1.0 - h)) / (h * h);
    let d12 = (g(1.0 + h, 1.0 + h) - g(1.0 + h, 1.0 - h) - g(1.0 - h, 1.0 + h) + g(1.0 - h, 1.0 - h)) / (4.0 * h * h);
    Moments {
        mean1: d1,
        mean2: d2,
        var1: d11 + d1 - d1 * d1,
        var2: d22 + d2 - d2 * d2,
        cov: d12 - d1 * d2,
    }
}
