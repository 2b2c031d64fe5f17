use crate::error::Error;
use crate::series::Term;

use super::BHParams;

/// Monomials `t1^j t2^k` of the expanded pgf exponent, in storage order.
pub const PACKETS: [(u8, u8); 8] = [(1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (2, 1), (1, 2), (2, 2)];

// rounding at exact boundary points can leave -1e-17 where 0 is meant
const ZERO_SNAP: f64 = 1e-14;

/// Rates `c_jk` with `mu*l + sigma2*l^2/2 = sum c_jk (t1^j t2^k - 1)`.
///
/// When every rate is nonnegative the distribution is the law of
/// `sum_jk (j, k) * N_jk` with independent `N_jk ~ Poisson(c_jk)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonDecomposition {
    coeff: [f64; 8],
    log_p00: f64,
}

impl PoissonDecomposition {
    /// Rate of monomial `(j, k)`; zero for monomials outside [`PACKETS`].
    pub fn coeff(&self, j: u8, k: u8) -> f64 {
        PACKETS
            .iter()
            .position(|&m| m == (j, k))
            .map_or(0.0, |i| self.coeff[i])
    }

    /// Rates in [`PACKETS`] order.
    pub fn coefficients(&self) -> &[f64; 8] {
        &self.coeff
    }

    /// Whether every rate is nonnegative.
    pub fn is_representable(&self) -> bool {
        self.coeff.iter().all(|&c| c >= 0.0)
    }

    /// `Ok(self)` if representable, otherwise the first negative rate.
    pub fn require_representable(self) -> Result<Self, Error> {
        match self.coeff.iter().position(|&c| c < 0.0) {
            None => Ok(self),
            Some(i) => Err(Error::NonRepresentable {
                j: PACKETS[i].0,
                k: PACKETS[i].1,
                value: self.coeff[i],
            }),
        }
    }

    /// Sum of all rates.
    pub fn total_rate(&self) -> f64 {
        self.coeff.iter().sum()
    }

    /// `log P(0,0) = mu*gamma + sigma2*gamma^2/2`, computed directly rather
    /// than as `-total_rate()`.
    pub fn log_p00(&self) -> f64 {
        self.log_p00
    }

    /// Nonzero rates as series terms.
    pub(crate) fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        PACKETS
            .iter()
            .zip(&self.coeff)
            .filter(|(_, &c)| c != 0.0)
            .map(|(&(j, k), &c)| Term::new(j as usize, k as usize, c))
    }
}

/// Expand the pgf exponent in the basis `t1^j t2^k - 1`.
///
/// With `L = lambda1 + lambda2 + lambda3`:
///
/// ```text
/// c10 = lambda1 (mu - sigma2 L)      c20 = sigma2 lambda1^2 / 2
/// c01 = lambda2 (mu - sigma2 L)      c02 = sigma2 lambda2^2 / 2
/// c11 = lambda3 (mu - sigma2 L) + sigma2 lambda1 lambda2
/// c21 = sigma2 lambda1 lambda3       c12 = sigma2 lambda2 lambda3
/// c22 = sigma2 lambda3^2 / 2
/// ```
pub fn poisson_decomposition(p: &BHParams) -> PoissonDecomposition {
    let s2 = p.sigma2;
    let (l1, l2, l3) = (p.lambda1, p.lambda2, p.lambda3);
    let excess = p.mu - s2 * (l1 + l2 + l3);
    let mut coeff = [
        l1 * excess,
        l2 * excess,
        0.5 * s2 * l1 * l1,
        0.5 * s2 * l2 * l2,
        l3 * excess + s2 * l1 * l2,
        s2 * l1 * l3,
        s2 * l2 * l3,
        0.5 * s2 * l3 * l3,
    ];
    let scale = p.mu.max(1.0);
    for c in &mut coeff {
        if c.abs() < ZERO_SNAP * scale {
            *c = 0.0;
        }
    }
    let g = p.gamma();
    PoissonDecomposition {
        coeff,
        log_p00: p.mu * g + 0.5 * s2 * g * g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point() {
        let d = poisson_decomposition(&BHParams::new(1.0, 0.8, 0.5, 0.5, 0.0).unwrap());
        let want = [0.1, 0.1, 0.1, 0.1, 0.2, 0.0, 0.0, 0.0];
        for (c, w) in d.coefficients().iter().zip(want) {
            assert!((c - w).abs() < 1e-15, "{c} vs {w}");
        }
        assert!(d.is_representable());
        assert!((libm::exp(-d.total_rate()) - libm::exp(-0.6)).abs() < 1e-12);
    }

    #[test]
    fn poisson_boundary() {
        let d = poisson_decomposition(&BHParams::new(1.3, 0.0, 0.5, 0.4, 0.2).unwrap());
        assert!((d.coeff(1, 0) - 1.3 * 0.5).abs() < 1e-15);
        assert!((d.coeff(0, 1) - 1.3 * 0.4).abs() < 1e-15);
        assert!((d.coeff(1, 1) - 1.3 * 0.2).abs() < 1e-15);
        for (j, k) in [(2, 0), (0, 2), (2, 1), (1, 2), (2, 2)] {
            assert_eq!(d.coeff(j, k), 0.0);
        }
    }

    #[test]
    fn asymmetric_point() {
        let d = poisson_decomposition(&BHParams::new(1.0, 0.8, 0.1, 0.2, 0.0).unwrap());
        assert!((d.coeff(1, 0) - 0.076).abs() < 1e-15);
    }

    #[test]
    fn gap_point_not_representable() {
        // mu > sigma2 (lambda_i + lambda3) holds but mu < sigma2 L
        let p = BHParams::new(1.0, 1.0, 0.6, 0.6, 0.0).unwrap();
        let d = poisson_decomposition(&p);
        assert!(!d.is_representable());
        assert!(matches!(
            d.require_representable(),
            Err(Error::NonRepresentable { j: 1, k: 0, .. })
        ));
    }
}
