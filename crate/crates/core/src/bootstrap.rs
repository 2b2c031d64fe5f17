//! Parametric bootstrap calibration of the statistic.
//!
//! Fit the null model to the data, then repeatedly draw a sample of the same
//! size from the fitted law, refit, and recompute the statistic. The
//! replicate statistics approximate the null distribution of the observed
//! one.
//!
//! Replicate `b` draws everything it needs from its own generator, seeded
//! by [`derive_replicate_seed`]`(seed, b)`, so the outcome does not depend
//! on how replicates are scheduled. Running them in parallel is delegated
//! to an [`Executor`].

use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::hermite::{sample_bhd, BHParams};
use crate::mle::{fit_mle, FitOptions, FitResult};
use crate::rng_from_seed;
use crate::sample::BivariateSample;
use crate::statistic::{statistic_vnw, WeightSpec};

/// Smallest supported number of bootstrap replicates.
pub const MIN_REPLICATES: usize = 99;
/// Levels at which critical values are reported by default.
pub const DEFAULT_ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];
/// Largest tolerated fraction of failed replicates.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `master`.
///
/// The SplitMix64 state after `index + 1` steps from `master`, pushed
/// through its output bijection. For a fixed master the map is injective in
/// `index`. Applying it repeatedly gives hierarchical seeds
/// (experiment, cell, dataset, replicate).
pub fn derive_replicate_seed(master: u64, replicate_index: u64) -> u64 {
    mix64(master.wrapping_add(replicate_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Runs `n` independent indexed tasks and returns results in index order.
pub trait Executor {
    /// `[f(0), f(1), ..., f(n-1)]`.
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs tasks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Bootstrap settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOptions {
    /// Requested number of replicates.
    pub replicates: usize,
    /// Master seed of the replicate streams.
    pub seed: u64,
    /// Settings for every fit, original and replicate.
    pub fit: FitOptions,
    /// Refit each replicate (the default). Without refitting the replicate
    /// statistic is computed at the original estimate.
    pub refit: bool,
    /// Levels for the reported critical values.
    pub alphas: Vec<f64>,
}

impl BootstrapOptions {
    /// `replicates` refitted replicates under `seed`, default fit settings.
    pub fn new(replicates: usize, seed: u64) -> Self {
        BootstrapOptions {
            replicates,
            seed,
            fit: FitOptions::default(),
            refit: true,
            alphas: DEFAULT_ALPHAS.to_vec(),
        }
    }

    /// Replace the fit settings.
    pub fn with_fit(mut self, fit: FitOptions) -> Self {
        self.fit = fit;
        self
    }
}

/// Everything the bootstrap test produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    /// Statistic on the observed data at the fitted parameters.
    pub v_obs: f64,
    /// `(1 + #{V*_b >= v_obs}) / (B_eff + 1)`.
    pub p_value: f64,
    /// Fit on the observed data.
    pub fit: FitResult,
    /// Requested replicates `B`.
    pub replicates: usize,
    /// Successful replicate statistics in replicate-index order.
    pub replicate_stats: Vec<f64>,
    /// Indices of replicates whose refit or statistic failed.
    pub failed_replicates: Vec<usize>,
    /// `(alpha, critical value)` pairs.
    pub critical_values: Vec<(f64, f64)>,
    /// Master seed.
    pub seed: u64,
    /// Whether replicates were refitted.
    pub refit: bool,
}

impl TestReport {
    /// Fitted parameters.
    pub fn theta_hat(&self) -> &BHParams {
        &self.fit.theta_hat
    }

    /// Number of failed replicates.
    pub fn failures(&self) -> usize {
        self.failed_replicates.len()
    }

    /// `B - failures`.
    pub fn effective_replicates(&self) -> usize {
        self.replicate_stats.len()
    }

    /// Reject at level `alpha` iff `p_value <= alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Add-one Monte Carlo p-value.
pub fn bootstrap_p_value(v_obs: f64, replicate_stats: &[f64]) -> f64 {
    let exceed = replicate_stats.iter().filter(|&&v| v >= v_obs).count();
    (1 + exceed) as f64 / (replicate_stats.len() + 1) as f64
}

/// Upper-`alpha` critical value: the `ceil((1 - alpha)(B + 1))`-th smallest
/// replicate, `+inf` when that rank exceeds `B`.
///
/// For a `v_obs` that ties no replicate, `v_obs >= critical_value` holds
/// exactly when `bootstrap_p_value(v_obs) <= alpha`.
pub fn critical_value(replicate_stats: &[f64], alpha: f64) -> f64 {
    let b = replicate_stats.len();
    // rank = B + 1 - floor(alpha (B+1)), with a guard against 0.05*200 = 9.999..
    let allowed = libm::floor(alpha * (b + 1) as f64 + 1e-9) as usize;
    let rank = (b + 1).saturating_sub(allowed);
    if rank == 0 {
        return f64::NEG_INFINITY;
    }
    if rank > b {
        return f64::INFINITY;
    }
    let mut sorted = replicate_stats.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[rank - 1]
}

/// One bootstrap replicate. `None` if sampling, refitting or the statistic
/// failed.
pub fn bootstrap_replicate(
    theta_hat: &BHParams,
    n: usize,
    w: &WeightSpec,
    opts: &BootstrapOptions,
    index: usize,
) -> Option<f64> {
    bootstrap_replicate_multi(theta_hat, n, core::slice::from_ref(w), opts, index)?
        .pop()
        .flatten()
}

/// One replicate evaluated under several weights.
///
/// The bootstrap sample and its refit do not depend on the weight, so they
/// are shared. Outer `None`: sampling or refitting failed. Inner `None`:
/// the statistic failed for that weight.
pub fn bootstrap_replicate_multi(
    theta_hat: &BHParams,
    n: usize,
    weights: &[WeightSpec],
    opts: &BootstrapOptions,
    index: usize,
) -> Option<Vec<Option<f64>>> {
    let mut rng = rng_from_seed(derive_replicate_seed(opts.seed, index as u64));
    let sample = sample_bhd(theta_hat, n, &mut rng).ok()?;
    let fit_seed: u64 = rng.random();
    let theta = if opts.refit {
        fit_mle(&sample, &opts.fit.clone().with_seed(fit_seed)).ok()?.theta_hat
    } else {
        *theta_hat
    };
    Some(weights.iter().map(|w| statistic_vnw(&sample, &theta, w).ok()).collect())
}

/// The bootstrap test on the calling thread.
pub fn run_bootstrap_test(s: &BivariateSample, w: &WeightSpec, opts: &BootstrapOptions) -> Result<TestReport, Error> {
    run_bootstrap_test_with(s, w, opts, &Sequential)
}

/// The bootstrap test with replicates dispatched through `exec`.
///
/// Fails if the original fit fails, if the observed statistic cannot be
/// computed, or if more than 5% of the replicates fail.
pub fn run_bootstrap_test_with<E: Executor>(
    s: &BivariateSample,
    w: &WeightSpec,
    opts: &BootstrapOptions,
    exec: &E,
) -> Result<TestReport, Error> {
    let mut reports = run_bootstrap_test_multi(s, core::slice::from_ref(w), opts, exec)?;
    reports.pop().expect("one weight in, one report out")
}

/// The bootstrap test for several weights sharing one set of replicates.
///
/// The outer error covers failures common to all weights (bootstrap size,
/// the original fit); each weight then gets its own report or error.
pub fn run_bootstrap_test_multi<E: Executor>(
    s: &BivariateSample,
    weights: &[WeightSpec],
    opts: &BootstrapOptions,
    exec: &E,
) -> Result<Vec<Result<TestReport, Error>>, Error> {
    if opts.replicates < MIN_REPLICATES {
        return Err(Error::BootstrapTooSmall(opts.replicates));
    }
    let fit = fit_mle(s, &opts.fit)?;
    let theta_hat = fit.theta_hat;
    let n = s.len();

    let results = exec.map_indexed(opts.replicates, |b| {
        bootstrap_replicate_multi(&theta_hat, n, weights, opts, b)
    });
    let limit = libm::floor(MAX_FAILURE_FRACTION * opts.replicates as f64) as usize;

    let reports = weights
        .iter()
        .enumerate()
        .map(|(wi, w)| {
            let v_obs = statistic_vnw(s, &theta_hat, w)?;
            let mut replicate_stats = Vec::with_capacity(results.len());
            let mut failed_replicates = Vec::new();
            for (b, r) in results.iter().enumerate() {
                match r.as_ref().and_then(|v| v[wi]) {
                    Some(v) => replicate_stats.push(v),
                    None => failed_replicates.push(b),
                }
            }
            if failed_replicates.len() > limit {
                return Err(Error::TooManyFailures {
                    failures: failed_replicates.len(),
                    total: opts.replicates,
                    limit,
                });
            }
            let p_value = bootstrap_p_value(v_obs, &replicate_stats);
            let critical_values = opts
                .alphas
                .iter()
                .map(|&a| (a, critical_value(&replicate_stats, a)))
                .collect();
            Ok(TestReport {
                v_obs,
                p_value,
                fit: fit.clone(),
                replicates: opts.replicates,
                replicate_stats,
                failed_replicates,
                critical_values,
                seed: opts.seed,
                refit: opts.refit,
            })
        })
        .collect();
    Ok(reports)
}
