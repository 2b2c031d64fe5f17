//! Poisson variates with a fixed generator-consumption contract.
//!
//! - `rate == 0`: returns 0 and draws nothing.
//! - `0 < rate < 10`: sequential-search inversion from one uniform.
//! - `rate >= 10`: transformed rejection (PTRS, Hörmann 1993), two uniforms
//!   per trial.
//!
//! Uniforms are `rng.random::<f64>()` in `[0, 1)`. Replaying the same
//! generator state therefore reproduces the same variates.

use rand::Rng;

const INVERSION_LIMIT: f64 = 10.0;

/// Draw one Poisson(`rate`) variate. `rate` must be finite and `>= 0`.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> u64 {
    debug_assert!(rate >= 0.0 && rate.is_finite());
    if rate <= 0.0 {
        0
    } else if rate < INVERSION_LIMIT {
        inversion(rng, rate)
    } else {
        ptrs(rng, rate)
    }
}

fn inversion<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = libm::exp(-rate);
    let mut cdf = p;
    // cdf can stall just below 1 in floating point; the bound is far past
    // any mass that matters for rate < 10
    while u >= cdf && k < 1000 {
        k += 1;
        p *= rate / k as f64;
        cdf += p;
    }
    k
}

fn ptrs<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> u64 {
    let slam = libm::sqrt(rate);
    let loglam = libm::log(rate);
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - libm::fabs(u);
        let k = libm::floor((2.0 * a / us + b) * u + rate + 0.43);
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = libm::log(v) + libm::log(inv_alpha) - libm::log(a / (us * us) + b);
        let rhs = -rate + k * loglam - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
