//! Gauss–Legendre rules on `[0, 1]` and their tensor products.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of an `m`-point Gauss–Legendre rule mapped to `[0, 1]`.
///
/// Nodes are strictly inside `(0, 1)`, ascending; weights are positive and
/// sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the rule by Newton iteration on the Legendre recurrence.
    ///
    /// # Panics
    ///
    /// If `m == 0`.
    pub fn new(m: usize) -> Self {
        assert!(m > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; m];
        let mut weights = alloc::vec![0.0; m];
        let nf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if libm::fabs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // x is the i-th largest root on [-1, 1]
            nodes[m - 1 - i] = 0.5 * (1.0 + x);
            nodes[i] = 0.5 * (1.0 - x);
            weights[m - 1 - i] = 0.5 * w;
            weights[i] = 0.5 * w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Number of nodes.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Abscissae in `(0, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Positive weights summing to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum w_i f(x_i)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_m(x), P_m'(x))`.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 1 {
        return (x, 1.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product rule on `[0,1]^2` with the monomial weight
/// `t1^a1 t2^a2` folded into the per-axis weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTensorRule {
    x: Vec<f64>,
    wx: Vec<f64>,
    y: Vec<f64>,
    wy: Vec<f64>,
}

impl WeightedTensorRule {
    /// `m` nodes per axis, weight exponents `a1`, `a2`.
    pub fn new(m: usize, a1: f64, a2: f64) -> Self {
        let base = GaussLegendre::new(m);
        let fold = |a: f64| -> Vec<f64> {
            base.nodes()
                .iter()
                .zip(base.weights())
                .map(|(&t, &w)| w * libm::pow(t, a))
                .collect()
        };
        WeightedTensorRule {
            x: base.nodes().to_vec(),
            wx: fold(a1),
            y: base.nodes().to_vec(),
            wy: fold(a2),
        }
    }

    /// Nodes along the first axis.
    pub fn x_nodes(&self) -> &[f64] {
        &self.x
    }

    /// Nodes along the second axis.
    pub fn y_nodes(&self) -> &[f64] {
        &self.y
    }

    /// First-axis weights including `t1^a1`.
    pub fn x_weights(&self) -> &[f64] {
        &self.wx
    }

    /// Second-axis weights including `t2^a2`.
    pub fn y_weights(&self) -> &[f64] {
        &self.wy
    }

    /// `sum_ij wx_i wy_j f(x_i, y_j)`.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for (&x, &wx) in self.x.iter().zip(&self.wx) {
            let mut row = 0.0;
            for (&y, &wy) in self.y.iter().zip(&self.wy) {
                row += wy * f(x, y);
            }
            acc += wx * row;
        }
        acc
    }
}
