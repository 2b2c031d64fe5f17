//! Maximum-likelihood fitting of the bivariate Hermite distribution.
//!
//! The distribution is only identified up to the scaling gauge, so the
//! search runs in the `sigma2 = 1` gauge over an unconstrained vector:
//!
//! ```text
//! lambda3 = softplus(u3)            (or a fixed value)
//! lambda_i = lambda3 + softplus(u_i)
//! mu = min(L + softplus(u_mu), 50)  with L = lambda1 + lambda2 + lambda3
//! ```
//!
//! `mu >= L` is exactly the set where all Poisson-packet rates are
//! nonnegative, i.e. where the pgf defines a probability law; the
//! weaker parameter-space bound `mu > lambda_i + lambda3` still admits
//! points with `P(1,0) < 0`. The cap at 50 stops the drift towards the
//! Poisson boundary, which in this gauge sends `mu` to infinity.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::hermite::{pmf_table, validate_params, BHParams};
use crate::nelder_mead::{self, Settings};
use crate::rng_from_seed;
use crate::sample::BivariateSample;

/// Cells with probability below this floor make the log-likelihood `-inf`.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;
/// Upper bound on `mu` in the `sigma2 = 1` gauge.
pub const MU_CAP: f64 = 50.0;
/// Lower clip for moment-based rate starts.
pub const START_EPS: f64 = 1e-3;
/// Smallest sample accepted by the fitter.
pub const MIN_FIT_SIZE: usize = 5;

/// Optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Objective evaluations allowed per simplex run.
    pub max_evals: usize,
    /// Simplex diameter (transformed space) at which a run stops.
    pub xtol: f64,
    /// Relative spread of simplex log-likelihoods at which a run stops.
    pub ftol: f64,
    /// Extra runs started from perturbations of the best point.
    pub restarts: usize,
    /// Pin `lambda3` (in the `sigma2 = 1` gauge) instead of estimating it.
    pub fix_lambda3: Option<f64>,
    /// Seed for the restart perturbations.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_evals: 2000,
            xtol: 1e-6,
            ftol: 1e-12,
            restarts: 2,
            fix_lambda3: None,
            seed: 0,
        }
    }
}

impl FitOptions {
    /// Same settings with `lambda3` pinned to `value`.
    pub fn with_fixed_lambda3(mut self, value: f64) -> Self {
        self.fix_lambda3 = Some(value);
        self
    }

    /// Same settings with a different restart seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of [`fit_mle`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Maximizer, `sigma2 = 1` representative.
    pub theta_hat: BHParams,
    /// Log-likelihood at `theta_hat`.
    pub loglik: f64,
    /// Total objective evaluations over all runs.
    pub iterations: usize,
    /// Whether the best run met a stopping tolerance before its budget.
    pub converged: bool,
    /// Moment-based start.
    pub init_theta: BHParams,
    /// Log-likelihood at the start.
    pub init_loglik: f64,
}

/// `sum_i log f(x_i, y_i; p)`; `-inf` if any observed cell falls below
/// [`UNDERFLOW_FLOOR`].
pub fn log_likelihood(p: &BHParams, s: &BivariateSample) -> f64 {
    log_likelihood_checked(p, s).unwrap_or(f64::NEG_INFINITY)
}

/// As [`log_likelihood`], naming the first cell that underflows.
pub fn log_likelihood_checked(p: &BHParams, s: &BivariateSample) -> Result<f64, Error> {
    let table = pmf_table(p, s.max_x() as usize, s.max_y() as usize);
    let mut acc = 0.0;
    for c in s.cells() {
        let f = table.prob(c.x as usize, c.y as usize);
        if f.is_nan() || f < UNDERFLOW_FLOOR {
            return Err(Error::LikelihoodUnderflow { x: c.x, y: c.y });
        }
        acc += c.count as f64 * libm::log(f);
    }
    Ok(acc)
}

fn softplus(u: f64) -> f64 {
    if u > 35.0 {
        u
    } else {
        libm::log1p(libm::exp(u))
    }
}

fn softplus_inv(v: f64) -> f64 {
    if v > 35.0 {
        v
    } else {
        libm::log(libm::expm1(v))
    }
}

/// Map between the unconstrained search space and gauge-fixed parameters.
#[derive(Debug, Clone, Copy)]
struct Transform {
    fixed_lambda3: Option<f64>,
}

impl Transform {
    fn dim(&self) -> usize {
        if self.fixed_lambda3.is_some() {
            3
        } else {
            4
        }
    }

    /// `u = [u1, u2, (u3,) u_mu]`. `None` where the map leaves the
    /// parameter space through underflow.
    fn forward(&self, u: &[f64]) -> Option<BHParams> {
        let l3 = match self.fixed_lambda3 {
            Some(v) => v,
            None => softplus(u[2]),
        };
        let l1 = l3 + softplus(u[0]);
        let l2 = l3 + softplus(u[1]);
        let total = l1 + l2 + l3;
        let u_mu = u[self.dim() - 1];
        let mu = (total + softplus(u_mu)).min(MU_CAP.max(total));
        validate_params([mu, 1.0, l1, l2, l3]).ok()
    }

    fn inverse(&self, p: &BHParams) -> Vec<f64> {
        let l3 = p.lambda3();
        let total = p.lambda1() + p.lambda2() + l3;
        let mut u = Vec::with_capacity(4);
        u.push(softplus_inv(p.lambda1() - l3));
        u.push(softplus_inv(p.lambda2() - l3));
        if self.fixed_lambda3.is_none() {
            u.push(softplus_inv(l3.max(1e-12)));
        }
        u.push(softplus_inv((p.mu() - total).max(1e-12)));
        u
    }
}

/// Moment-matched start in the `sigma2 = 1` gauge.
///
/// In that gauge `var_i - mean_i = (lambda_i + lambda3)^2`, which gives
/// `lambda_i = sqrt(var_i - mean_i)` (clipped below at [`START_EPS`]);
/// `mu` averages `mean_i / lambda_i` over the coordinates that were not
/// clipped, and `lambda3` solves the covariance identity. The result is
/// then pushed into the interior of the region searched by [`fit_mle`].
pub fn initial_estimate(s: &BivariateSample) -> Result<BHParams, Error> {
    initial_estimate_with(s, None)
}

fn initial_estimate_with(s: &BivariateSample, fixed_lambda3: Option<f64>) -> Result<BHParams, Error> {
    if s.len() < MIN_FIT_SIZE {
        return Err(Error::SampleTooSmall {
            n: s.len(),
            min: MIN_FIT_SIZE,
        });
    }
    if s.is_degenerate() {
        return Err(Error::DegenerateSample);
    }
    let (m1, m2, v1, v2, cov) = s.moments();
    let rate = |m: f64, v: f64| libm::sqrt((v - m).max(0.0)).max(START_EPS);
    let (mut l1, mut l2) = (rate(m1, v1), rate(m2, v2));

    let informative: Vec<f64> = [(m1, l1), (m2, l2)]
        .iter()
        .filter(|(_, l)| *l > START_EPS)
        .map(|(m, l)| m / l)
        .collect();
    let mut mu = if informative.is_empty() {
        ((m1 + m2) / 2.0 / START_EPS).min(MU_CAP)
    } else {
        informative.iter().sum::<f64>() / informative.len() as f64
    };

    let l3 = match fixed_lambda3 {
        Some(v) => v,
        None => {
            // cov = (l1 + l3)(l2 + l3) + mu l3
            let b = l1 + l2 + mu;
            let c = l1 * l2 - cov;
            let root = if c < 0.0 {
                (-b + libm::sqrt(b * b - 4.0 * c)) / 2.0
            } else {
                0.0
            };
            root.clamp(0.0, 0.9 * l1.min(l2))
        }
    };

    if l1 <= l3 {
        l1 = l3 + START_EPS;
    }
    if l2 <= l3 {
        l2 = l3 + START_EPS;
    }
    let total = l1 + l2 + l3;
    mu = mu.clamp(total * (1.0 + 1e-3) + START_EPS, MU_CAP.max(total * (1.0 + 1e-3) + START_EPS));
    validate_params([mu, 1.0, l1, l2, l3])
}

/// Fit by simplex search over the transformed parameters.
///
/// One run from the moment start, then `opts.restarts` runs from uniform
/// perturbations (width 1 per coordinate) of the best point so far. The
/// best run is reported. The result is a pure function of the sample and
/// `opts`.
pub fn fit_mle(s: &BivariateSample, opts: &FitOptions) -> Result<FitResult, Error> {
    if let Some(v) = opts.fix_lambda3 {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParams(crate::ParamConstraint::Lambda3NonNegative));
        }
    }
    let start = initial_estimate_with(s, opts.fix_lambda3)?;
    let tf = Transform {
        fixed_lambda3: opts.fix_lambda3,
    };
    let objective = |u: &[f64]| match tf.forward(u) {
        Some(p) => -log_likelihood(&p, s),
        None => f64::INFINITY,
    };
    let settings = Settings {
        max_evals: opts.max_evals,
        xtol: opts.xtol,
        ftol: opts.ftol,
        initial_step: 0.5,
    };

    let u0 = tf.inverse(&start);
    let init_theta = tf.forward(&u0).unwrap_or(start);
    let init_loglik = log_likelihood(&init_theta, s);

    let mut best = nelder_mead::minimize(objective, &u0, &settings);
    let mut evals = best.evals;
    let mut rng = rng_from_seed(opts.seed);
    for _ in 0..opts.restarts {
        let perturbed: Vec<f64> = best.x.iter().map(|x| x + rng.random::<f64>() - 0.5).collect();
        let run = nelder_mead::minimize(objective, &perturbed, &settings);
        evals += run.evals;
        if run.f < best.f {
            best = run;
        }
    }

    let theta_hat = match tf.forward(&best.x) {
        Some(p) if best.f.is_finite() => p,
        _ => {
            // every evaluation underflowed
            let (x, y) = s.cells().last().map_or((0, 0), |c| (c.x, c.y));
            return Err(Error::LikelihoodUnderflow { x, y });
        }
    };
    Ok(FitResult {
        theta_hat,
        loglik: -best.f,
        iterations: evals,
        converged: best.converged,
        init_theta,
        init_loglik,
    })
}
