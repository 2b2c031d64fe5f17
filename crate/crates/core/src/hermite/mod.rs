//! The bivariate Hermite distribution.
//!
//! Its pgf is `exp(mu*l(t) + sigma2*l(t)^2/2)` with
//! `l(t) = lambda1(t1-1) + lambda2(t2-1) + lambda3(t1 t2 - 1)`. The law is
//! the bivariate Poisson with rates scaled by a normally distributed
//! intensity, truncated at the moment-generating level.
//!
//! The pgf depends on the parameters only through `mu*lambda` and
//! `sigma2*lambda^2`, so `(mu, sigma2, lambda) -> (mu/c, sigma2/c^2, c*lambda)`
//! leaves the distribution unchanged. [`gauge_normalize`] picks the
//! representative with `sigma2 = 1`.

mod decomposition;
mod pmf;
mod sampler;

pub use decomposition::{poisson_decomposition, PoissonDecomposition, PACKETS};
pub use pmf::{pmf_table, pmf_table_auto};
pub use sampler::sample_bhd;

use crate::error::{Error, ParamConstraint};

/// Parameter vector `(mu, sigma2, lambda1, lambda2, lambda3)`.
///
/// Constructed only through [`validate_params`] (or [`BHParams::new`]), so
/// every value satisfies
/// `mu > sigma2 (lambda_i + lambda3)`, `lambda_i > lambda3 >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BHParams {
    mu: f64,
    sigma2: f64,
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
}

impl BHParams {
    /// Same as [`validate_params`] with the five values spelled out.
    pub fn new(mu: f64, sigma2: f64, lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self, Error> {
        validate_params([mu, sigma2, lambda1, lambda2, lambda3])
    }

    /// Location of the normal intensity.
    pub fn mu(&self) -> f64 {
        self.mu
    }
    /// Variance of the normal intensity.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    /// First marginal rate factor.
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    /// Second marginal rate factor.
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    /// Joint rate factor.
    pub fn lambda3(&self) -> f64 {
        self.lambda3
    }

    /// `[mu, sigma2, lambda1, lambda2, lambda3]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.mu, self.sigma2, self.lambda1, self.lambda2, self.lambda3]
    }

    /// `gamma = -(lambda1 + lambda2 + lambda3)`, the value of `l` at the origin.
    pub fn gamma(&self) -> f64 {
        -(self.lambda1 + self.lambda2 + self.lambda3)
    }

    /// `l(t)` for this parameter vector.
    #[inline]
    pub fn rate_poly(&self, t1: f64, t2: f64) -> f64 {
        self.lambda1 * (t1 - 1.0) + self.lambda2 * (t2 - 1.0) + self.lambda3 * (t1 * t2 - 1.0)
    }

    /// Log of the pgf at `t`.
    #[inline]
    pub fn log_pgf(&self, t1: f64, t2: f64) -> f64 {
        let l = self.rate_poly(t1, t2);
        self.mu * l + 0.5 * self.sigma2 * l * l
    }
}

/// Check the five raw values against the parameter space.
///
/// Only the first violated constraint is reported.
pub fn validate_params(raw: [f64; 5]) -> Result<BHParams, Error> {
    let [mu, sigma2, lambda1, lambda2, lambda3] = raw;
    let fail = |c| Err(Error::InvalidParams(c));
    if raw.iter().any(|v| !v.is_finite()) {
        return fail(ParamConstraint::Finite);
    }
    if mu <= 0.0 {
        return fail(ParamConstraint::MuPositive);
    }
    if sigma2 < 0.0 {
        return fail(ParamConstraint::Sigma2NonNegative);
    }
    if lambda3 < 0.0 {
        return fail(ParamConstraint::Lambda3NonNegative);
    }
    if lambda2 <= lambda3 {
        return fail(ParamConstraint::Lambda2AboveLambda3);
    }
    if lambda1 <= lambda3 {
        return fail(ParamConstraint::Lambda1AboveLambda3);
    }
    if mu <= sigma2 * (lambda1 + lambda3) {
        return fail(ParamConstraint::MuAboveFirstMargin);
    }
    if mu <= sigma2 * (lambda2 + lambda3) {
        return fail(ParamConstraint::MuAboveSecondMargin);
    }
    Ok(BHParams {
        mu,
        sigma2,
        lambda1,
        lambda2,
        lambda3,
    })
}

/// Rescale to the `sigma2 = 1` representative of the same distribution.
///
/// With `c = sqrt(sigma2)`: `(mu/c, 1, c*lambda1, c*lambda2, c*lambda3)`.
pub fn gauge_normalize(p: &BHParams) -> Result<BHParams, Error> {
    if p.sigma2 <= 0.0 {
        return Err(Error::GaugeUnreachable);
    }
    if p.sigma2 == 1.0 {
        return Ok(*p);
    }
    let c = libm::sqrt(p.sigma2);
    // scaling maps the parameter space onto itself
    Ok(BHParams {
        mu: p.mu / c,
        sigma2: 1.0,
        lambda1: p.lambda1 * c,
        lambda2: p.lambda2 * c,
        lambda3: p.lambda3 * c,
    })
}

/// Probability generating function at `t in [0,1]^2`.
pub fn pgf_eval(p: &BHParams, t: (f64, f64)) -> f64 {
    libm::exp(p.log_pgf(t.0, t.1))
}

/// First and second moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// `E X1`.
    pub mean1: f64,
    /// `E X2`.
    pub mean2: f64,
    /// `Var X1`.
    pub var1: f64,
    /// `Var X2`.
    pub var2: f64,
    /// `Cov(X1, X2)`.
    pub cov: f64,
}

/// Closed-form moments from the derivatives of the pgf at `(1,1)`.
pub fn moments(p: &BHParams) -> Moments {
    let a1 = p.lambda1 + p.lambda3;
    let a2 = p.lambda2 + p.lambda3;
    Moments {
        mean1: p.mu * a1,
        mean2: p.mu * a2,
        var1: p.mu * a1 + p.sigma2 * a1 * a1,
        var2: p.mu * a2 + p.sigma2 * a2 * a2,
        cov: p.sigma2 * a1 * a2 + p.mu * p.lambda3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> BHParams {
        BHParams::new(1.0, 0.8, 0.5, 0.5, 0.0).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_params([1.0, 0.8, 0.5, 0.5, 0.0]).is_ok());
        assert_eq!(
            validate_params([1.0, 0.8, 0.5, 0.5, 0.6]),
            Err(Error::InvalidParams(ParamConstraint::Lambda2AboveLambda3))
        );
        assert_eq!(
            validate_params([1.0, 0.8, 0.5, 0.7, 0.6]),
            Err(Error::InvalidParams(ParamConstraint::Lambda1AboveLambda3))
        );
        assert_eq!(
            validate_params([1.0, 2.0, 0.5, 0.5, 0.0]),
            Err(Error::InvalidParams(ParamConstraint::MuAboveFirstMargin))
        );
        assert_eq!(
            validate_params([1.0, 2.0, 0.4, 0.5, 0.0]),
            Err(Error::InvalidParams(ParamConstraint::MuAboveSecondMargin))
        );
        assert_eq!(
            validate_params([0.0, 0.8, 0.5, 0.5, 0.0]),
            Err(Error::InvalidParams(ParamConstraint::MuPositive))
        );
        assert_eq!(
            validate_params([1.0, -0.1, 0.5, 0.5, 0.0]),
            Err(Error::InvalidParams(ParamConstraint::Sigma2NonNegative))
        );
        assert_eq!(
            validate_params([1.0, 0.8, 0.5, 0.5, -0.1]),
            Err(Error::InvalidParams(ParamConstraint::Lambda3NonNegative))
        );
        assert_eq!(
            validate_params([f64::NAN, 0.8, 0.5, 0.5, 0.0]),
            Err(Error::InvalidParams(ParamConstraint::Finite))
        );
        // sigma2 = 0 is admitted
        assert!(validate_params([1.0, 0.0, 0.5, 0.5, 0.0]).is_ok());
    }

    #[test]
    fn gauge_examples() {
        let g = gauge_normalize(&reference()).unwrap();
        assert!((g.mu() - 1.118_034_0).abs() < 1e-7);
        assert_eq!(g.sigma2(), 1.0);
        assert!((g.lambda1() - 0.447_213_6).abs() < 1e-7);
        assert!((g.lambda2() - 0.447_213_6).abs() < 1e-7);
        assert_eq!(g.lambda3(), 0.0);

        let unit = BHParams::new(1.3, 1.0, 0.4, 0.3, 0.1).unwrap();
        assert_eq!(gauge_normalize(&unit).unwrap(), unit);

        let boundary = BHParams::new(1.0, 0.0, 0.4, 0.3, 0.1).unwrap();
        assert_eq!(gauge_normalize(&boundary), Err(Error::GaugeUnreachable));
    }

    #[test]
    fn pgf_examples() {
        let p = reference();
        assert_eq!(pgf_eval(&p, (1.0, 1.0)), 1.0);
        assert!((pgf_eval(&p, (0.0, 0.0)) - libm::exp(-0.6)).abs() < 1e-15);
        assert!((pgf_eval(&p, (0.0, 0.0)) - 0.548_811_6).abs() < 1e-7);
    }

    #[test]
    fn moments_example() {
        let m = moments(&reference());
        assert!((m.mean1 - 0.5).abs() < 1e-15 && (m.mean2 - 0.5).abs() < 1e-15);
        assert!((m.var1 - 0.7).abs() < 1e-15 && (m.var2 - 0.7).abs() < 1e-15);
        assert!((m.cov - 0.2).abs() < 1e-15);

        let poisson = moments(&BHParams::new(1.0, 0.0, 0.3, 0.6, 0.0).unwrap());
        assert_eq!(poisson.var1, poisson.mean1);
        assert_eq!(poisson.var2, poisson.mean2);
    }
}
