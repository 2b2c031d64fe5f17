//! Alternative families for power studies.
//!
//! Conventions (pgfs in terms of `u = t1 - 1`, `v = t2 - 1`, `w = t1 t2 - 1`):
//!
//! | family | pgf |
//! |---|---|
//! | `BB(m; p1,p2,p3)` | `(1 + (p1-p3) u + (p2-p3) v + p3 w)^m`, i.e. `m` Bernoulli pairs |
//! | `BP(l1,l2,l3)` | `exp(l1 u + l2 v + l3 w)` |
//! | `BLS(l1,l2,l3)` | `log(1 - l1 t1 - l2 t2 - l3 t1 t2) / log(1 - l1 - l2 - l3)` |
//! | `BNB(nu; g0,g1,g2)` | `(1 - g0 u - g1 v - g2 w)^(-nu)`, a gamma mixture of BP |
//! | `BNTA(l; l1,l2,l3)` | `exp(l (G_BP(t) - 1))`, a Poisson number of BP pairs |
//! | `BPP(p; a, b)` | `p G_BP(a)(t) + (1 - p) G_BP(b)(t)` |
//!
//! The Hermite null itself is included as [`AlternativeSpec::Hermite`] for
//! calibration runs.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::Error;
use crate::hermite::{poisson_decomposition, sample_bhd, BHParams};
use crate::poisson::sample_poisson;
use crate::sample::BivariateSample;
use crate::series::{exp_series, grow_table, log_series, power_series, PmfTable, Series2, Term};

/// Tail tolerance of the inversion sampler.
pub const INVERSION_TAIL_TOL: f64 = 1e-9;

/// A member of one of the alternative families.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family"))]
pub enum AlternativeSpec {
    /// Bivariate binomial: `m` iid Bernoulli pairs with
    /// `P(1,1) = p3`, `P(1,0) = p1 - p3`, `P(0,1) = p2 - p3`.
    #[cfg_attr(feature = "serde", serde(rename = "BB"))]
    Binomial {
        /// Trials.
        m: u32,
        /// `P(X1 = 1)` per trial.
        p1: f64,
        /// `P(X2 = 1)` per trial.
        p2: f64,
        /// `P(X1 = X2 = 1)` per trial.
        p3: f64,
    },
    /// Bivariate Poisson `(N1 + N3, N2 + N3)`.
    #[cfg_attr(feature = "serde", serde(rename = "BP"))]
    Poisson {
        /// Rate of `N1`.
        l1: f64,
        /// Rate of `N2`.
        l2: f64,
        /// Rate of the shared `N3`.
        l3: f64,
    },
    /// Bivariate logarithmic series.
    #[cfg_attr(feature = "serde", serde(rename = "BLS"))]
    LogSeries {
        /// Weight of `t1`.
        l1: f64,
        /// Weight of `t2`.
        l2: f64,
        /// Weight of `t1 t2`.
        l3: f64,
    },
    /// Bivariate negative binomial (gamma-mixed bivariate Poisson).
    #[cfg_attr(feature = "serde", serde(rename = "BNB"))]
    NegativeBinomial {
        /// Gamma shape, a positive integer.
        nu: u32,
        /// First marginal scale.
        g0: f64,
        /// Second marginal scale.
        g1: f64,
        /// Joint scale.
        g2: f64,
    },
    /// Bivariate Neyman type A: Poisson(`lambda`) many BP pairs, summed.
    #[cfg_attr(feature = "serde", serde(rename = "BNTA"))]
    NeymanTypeA {
        /// Rate of the number of clusters.
        lambda: f64,
        /// Cluster BP rate of `N1`.
        l1: f64,
        /// Cluster BP rate of `N2`.
        l2: f64,
        /// Cluster BP rate of `N3`.
        l3: f64,
    },
    /// Two-component bivariate Poisson mixture.
    #[cfg_attr(feature = "serde", serde(rename = "BPP"))]
    PoissonMixture {
        /// Weight of the first component.
        p: f64,
        /// BP rates of the first component.
        theta: [f64; 3],
        /// BP rates of the second component.
        lambda: [f64; 3],
    },
    /// The bivariate Hermite distribution, `[mu, sigma2, l1, l2, l3]`.
    #[cfg_attr(feature = "serde", serde(rename = "BH"))]
    Hermite {
        /// Parameter vector.
        params: [f64; 5],
    },
}

fn require(ok: bool, msg: &'static str) -> Result<(), Error> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidAlternative(msg))
    }
}

fn validate_bp(l: [f64; 3]) -> Result<(), Error> {
    require(l.iter().all(|v| v.is_finite()), "BP: rates must be finite")?;
    require(l[2] > 0.0, "BP: lambda3 > 0")?;
    require(l[0] > l[2], "BP: lambda1 > lambda3")?;
    require(l[1] > l[2], "BP: lambda2 > lambda3")
}

/// Check the family's constraints.
pub fn validate_alternative(spec: &AlternativeSpec) -> Result<(), Error> {
    use AlternativeSpec::*;
    match *spec {
        Binomial { m, p1, p2, p3 } => {
            require(m >= 1, "BB: m >= 1")?;
            require([p1, p2, p3].iter().all(|v| v.is_finite()), "BB: probabilities must be finite")?;
            require(p3 > 0.0, "BB: p3 > 0")?;
            require(p1 >= p3, "BB: p1 >= p3")?;
            require(p2 >= p3, "BB: p2 >= p3")?;
            require(p1 + p2 - p3 <= 1.0, "BB: p1 + p2 - p3 <= 1")
        }
        Poisson { l1, l2, l3 } => validate_bp([l1, l2, l3]),
        LogSeries { l1, l2, l3 } => {
            require([l1, l2, l3].iter().all(|v| v.is_finite() && *v >= 0.0), "BLS: weights must be >= 0")?;
            let s = l1 + l2 + l3;
            require(s > 0.0 && s < 1.0, "BLS: 0 < lambda1 + lambda2 + lambda3 < 1")
        }
        NegativeBinomial { nu, g0, g1, g2 } => {
            require(nu >= 1, "BNB: nu must be a positive integer")?;
            require([g0, g1, g2].iter().all(|v| v.is_finite()), "BNB: scales must be finite")?;
            require(g2 > 0.0, "BNB: gamma2 > 0")?;
            require(g0 > g2, "BNB: gamma0 > gamma2")?;
            require(g1 > g2, "BNB: gamma1 > gamma2")
        }
        NeymanTypeA { lambda, l1, l2, l3 } => {
            require(lambda.is_finite() && lambda > 0.0, "BNTA: lambda > 0")?;
            require([l1, l2, l3].iter().all(|v| v.is_finite() && *v >= 0.0), "BNTA: rates must be >= 0")?;
            let s = l1 + l2 + l3;
            require(s > 0.0 && s <= 1.0, "BNTA: 0 < lambda1 + lambda2 + lambda3 <= 1")
        }
        PoissonMixture { p, theta, lambda } => {
            require(p > 0.0 && p < 1.0, "BPP: 0 < p < 1")?;
            validate_bp(theta)?;
            validate_bp(lambda)
        }
        Hermite { params } => crate::hermite::validate_params(params).map(|_| ()),
    }
}

/// A pgf given as a composite of polynomials, from which the pmf block is
/// obtained by series recurrences.
#[derive(Debug, Clone, PartialEq)]
pub enum PgfSeries {
    /// `exp(c0 + sum terms)`.
    Exp {
        /// Constant term.
        c0: f64,
        /// Non-constant terms.
        terms: Vec<Term>,
    },
    /// `(q0 + sum terms)^alpha`.
    Power {
        /// Constant term.
        q0: f64,
        /// Non-constant terms.
        terms: Vec<Term>,
        /// Exponent.
        alpha: f64,
    },
    /// `log(q0 + sum terms) / norm`.
    Log {
        /// Constant term.
        q0: f64,
        /// Non-constant terms.
        terms: Vec<Term>,
        /// Normalizer.
        norm: f64,
    },
    /// `exp(rate (G(t) - 1))` for an inner series `G`.
    Compound {
        /// Poisson rate of the number of inner draws.
        rate: f64,
        /// Inner pgf.
        inner: alloc::boxed::Box<PgfSeries>,
    },
    /// `sum weight_i G_i(t)`.
    Mixture(Vec<(f64, PgfSeries)>),
}

impl PgfSeries {
    fn bp(l: [f64; 3]) -> Self {
        PgfSeries::Exp {
            c0: -(l[0] + l[1] + l[2]),
            terms: alloc::vec![Term::new(1, 0, l[0]), Term::new(0, 1, l[1]), Term::new(1, 1, l[2])],
        }
    }

    /// Taylor block up to `(rmax, smax)`.
    pub fn coefficients(&self, rmax: usize, smax: usize) -> Series2 {
        match self {
            PgfSeries::Exp { c0, terms } => exp_series(*c0, terms, rmax, smax),
            PgfSeries::Power { q0, terms, alpha } => power_series(*q0, terms, *alpha, rmax, smax),
            PgfSeries::Log { q0, terms, norm } => {
                let l = log_series(*q0, terms, rmax, smax);
                l.combine(1.0 / norm, &l, 0.0)
            }
            PgfSeries::Compound { rate, inner } => {
                let g = inner.coefficients(rmax, smax);
                let terms: Vec<Term> = g
                    .nonconstant_terms()
                    .into_iter()
                    .map(|t| Term::new(t.j, t.k, rate * t.coeff))
                    .collect();
                exp_series(rate * (g.get(0, 0) - 1.0), &terms, rmax, smax)
            }
            PgfSeries::Mixture(parts) => {
                let mut acc = Series2::zeros(rmax, smax);
                for (w, part) in parts {
                    acc = acc.combine(1.0, &part.coefficients(rmax, smax), *w);
                }
                acc
            }
        }
    }
}

/// The pmf block of `desc` up to `(rmax, smax)`.
pub fn pmf_from_pgf_series(desc: &PgfSeries, rmax: usize, smax: usize) -> PmfTable {
    PmfTable::from_series(desc.coefficients(rmax, smax))
}

/// Grow the block until at most `tol` of the mass is outside.
pub fn pmf_from_pgf_series_auto(desc: &PgfSeries, tol: f64) -> Result<PmfTable, Error> {
    grow_table(16, tol, |r, s| pmf_from_pgf_series(desc, r, s))
}

impl AlternativeSpec {
    /// Short family label as used in tables (`BB`, `BP`, ...).
    pub fn family(&self) -> &'static str {
        match self {
            AlternativeSpec::Binomial { .. } => "BB",
            AlternativeSpec::Poisson { .. } => "BP",
            AlternativeSpec::LogSeries { .. } => "BLS",
            AlternativeSpec::NegativeBinomial { .. } => "BNB",
            AlternativeSpec::NeymanTypeA { .. } => "BNTA",
            AlternativeSpec::PoissonMixture { .. } => "BPP",
            AlternativeSpec::Hermite { .. } => "BH",
        }
    }

    /// The pgf as a series descriptor.
    pub fn pgf_series(&self) -> PgfSeries {
        use AlternativeSpec::*;
        match *self {
            Binomial { m, p1, p2, p3 } => PgfSeries::Power {
                q0: 1.0 - p1 - p2 + p3,
                terms: alloc::vec![Term::new(1, 0, p1 - p3), Term::new(0, 1, p2 - p3), Term::new(1, 1, p3)],
                alpha: m as f64,
            },
            Poisson { l1, l2, l3 } => PgfSeries::bp([l1, l2, l3]),
            LogSeries { l1, l2, l3 } => PgfSeries::Log {
                q0: 1.0,
                terms: alloc::vec![Term::new(1, 0, -l1), Term::new(0, 1, -l2), Term::new(1, 1, -l3)],
                norm: libm::log(1.0 - l1 - l2 - l3),
            },
            NegativeBinomial { nu, g0, g1, g2 } => PgfSeries::Power {
                q0: 1.0 + g0 + g1 + g2,
                terms: alloc::vec![Term::new(1, 0, -g0), Term::new(0, 1, -g1), Term::new(1, 1, -g2)],
                alpha: -(nu as f64),
            },
            NeymanTypeA { lambda, l1, l2, l3 } => PgfSeries::Compound {
                rate: lambda,
                inner: alloc::boxed::Box::new(PgfSeries::bp([l1, l2, l3])),
            },
            PoissonMixture { p, theta, lambda } => {
                PgfSeries::Mixture(alloc::vec![(p, PgfSeries::bp(theta)), (1.0 - p, PgfSeries::bp(lambda))])
            }
            Hermite { params } => {
                let p = BHParams::new(params[0], params[1], params[2], params[3], params[4])
                    .expect("validated Hermite parameters");
                let d = poisson_decomposition(&p);
                PgfSeries::Exp {
                    c0: d.log_p00(),
                    terms: crate::hermite::PACKETS
                        .iter()
                        .zip(d.coefficients())
                        .filter(|(_, &c)| c != 0.0)
                        .map(|(&(j, k), &c)| Term::new(j as usize, k as usize, c))
                        .collect(),
                }
            }
        }
    }

    /// Closed-form pgf at `t`.
    pub fn pgf(&self, t: (f64, f64)) -> f64 {
        use AlternativeSpec::*;
        let (u, v, w) = (t.0 - 1.0, t.1 - 1.0, t.0 * t.1 - 1.0);
        let bp = |l: [f64; 3]| libm::exp(l[0] * u + l[1] * v + l[2] * w);
        match *self {
            Binomial { m, p1, p2, p3 } => libm::pow(1.0 + (p1 - p3) * u + (p2 - p3) * v + p3 * w, m as f64),
            Poisson { l1, l2, l3 } => bp([l1, l2, l3]),
            LogSeries { l1, l2, l3 } => {
                libm::log(1.0 - l1 * t.0 - l2 * t.1 - l3 * t.0 * t.1) / libm::log(1.0 - l1 - l2 - l3)
            }
            NegativeBinomial { nu, g0, g1, g2 } => libm::pow(1.0 - g0 * u - g1 * v - g2 * w, -(nu as f64)),
            NeymanTypeA { lambda, l1, l2, l3 } => libm::exp(lambda * (bp([l1, l2, l3]) - 1.0)),
            PoissonMixture { p, theta, lambda } => p * bp(theta) + (1.0 - p) * bp(lambda),
            Hermite { params } => {
                let p = BHParams::new(params[0], params[1], params[2], params[3], params[4])
                    .expect("validated Hermite parameters");
                crate::hermite::pgf_eval(&p, t)
            }
        }
    }

    /// Pmf table grown to `tol`. Binomial tables are exact at `(m, m)`.
    pub fn pmf_table(&self, tol: f64) -> Result<PmfTable, Error> {
        match *self {
            AlternativeSpec::Binomial { m, .. } => Ok(binomial_table(self, m as usize)),
            _ => pmf_from_pgf_series_auto(&self.pgf_series(), tol),
        }
    }
}

fn binomial_cells(p1: f64, p2: f64, p3: f64) -> [((u32, u32), f64); 4] {
    [
        ((1, 1), p3),
        ((1, 0), p1 - p3),
        ((0, 1), p2 - p3),
        ((0, 0), 1.0 - p1 - p2 + p3),
    ]
}

// m-fold convolution of the Bernoulli-pair cell table
fn binomial_table(spec: &AlternativeSpec, m: usize) -> PmfTable {
    let AlternativeSpec::Binomial { p1, p2, p3, .. } = *spec else {
        unreachable!("binomial_table called on another family")
    };
    let cells = binomial_cells(p1, p2, p3);
    let width = m + 1;
    let mut data = alloc::vec![0.0; width * width];
    data[0] = 1.0;
    for _ in 0..m {
        let mut next = alloc::vec![0.0; width * width];
        for r in 0..=m {
            for s in 0..=m {
                let f = data[r * width + s];
                if f == 0.0 {
                    continue;
                }
                for &((dx, dy), q) in &cells {
                    let (r2, s2) = (r + dx as usize, s + dy as usize);
                    if r2 <= m && s2 <= m {
                        next[r2 * width + s2] += f * q;
                    }
                }
            }
        }
        data = next;
    }
    PmfTable::from_series(Series2::from_dense(m, m, data))
}

fn sample_bp<R: Rng + ?Sized>(rng: &mut R, l: [f64; 3]) -> (u64, u64) {
    let n1 = sample_poisson(rng, l[0]);
    let n2 = sample_poisson(rng, l[1]);
    let n3 = sample_poisson(rng, l[2]);
    (n1 + n3, n2 + n3)
}

/// Draw `n` iid pairs from the family's constructive representation.
///
/// Generator consumption per pair: BB draws `m` uniforms; BP draws three
/// Poisson variates; BNTA draws the cluster count then three Poissons per
/// cluster; BNB draws one gamma then three Poissons; BPP draws one uniform
/// then three Poissons; BLS draws one uniform against its pmf table.
pub fn sample_alternative<R: Rng + ?Sized>(
    spec: &AlternativeSpec,
    n: usize,
    rng: &mut R,
) -> Result<BivariateSample, Error> {
    validate_alternative(spec)?;
    use AlternativeSpec::*;
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(n);
    match *spec {
        Binomial { m, p1, p2, p3 } => {
            let cells = binomial_cells(p1, p2, p3);
            for _ in 0..n {
                let (mut x, mut y) = (0u32, 0u32);
                for _ in 0..m {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    // falls through to (0,0) when u lands in the last cell
                    for &((dx, dy), q) in &cells[..3] {
                        acc += q;
                        if u < acc {
                            x += dx;
                            y += dy;
                            break;
                        }
                    }
                }
                pairs.push((x, y));
            }
        }
        Poisson { l1, l2, l3 } => {
            for _ in 0..n {
                let (x, y) = sample_bp(rng, [l1, l2, l3]);
                pairs.push((x as u32, y as u32));
            }
        }
        NeymanTypeA { lambda, l1, l2, l3 } => {
            for _ in 0..n {
                let k = sample_poisson(rng, lambda);
                let (mut x, mut y) = (0u64, 0u64);
                for _ in 0..k {
                    let (a, b) = sample_bp(rng, [l1, l2, l3]);
                    x += a;
                    y += b;
                }
                pairs.push((x as u32, y as u32));
            }
        }
        NegativeBinomial { nu, g0, g1, g2 } => {
            let gamma = Gamma::new(nu as f64, 1.0).map_err(|_| Error::InvalidAlternative("BNB: gamma shape"))?;
            for _ in 0..n {
                let g: f64 = gamma.sample(rng);
                let (x, y) = sample_bp(rng, [g * g0, g * g1, g * g2]);
                pairs.push((x as u32, y as u32));
            }
        }
        PoissonMixture { p, theta, lambda } => {
            for _ in 0..n {
                let u: f64 = rng.random();
                let l = if u < p { theta } else { lambda };
                let (x, y) = sample_bp(rng, l);
                pairs.push((x as u32, y as u32));
            }
        }
        LogSeries { .. } => {
            let table = spec.pmf_table(INVERSION_TAIL_TOL)?;
            let sampler = InversionSampler::new(&table);
            for _ in 0..n {
                pairs.push(sampler.draw(rng));
            }
        }
        Hermite { params } => {
            let p = BHParams::new(params[0], params[1], params[2], params[3], params[4])?;
            return sample_bhd(&p, n, rng);
        }
    }
    BivariateSample::new(pairs)
}

/// Discrete inversion over the cells of a pmf table.
///
/// The uniform is scaled by the table's total mass, so the (tiny) tail is
/// redistributed proportionally over the held cells.
#[derive(Debug, Clone)]
pub struct InversionSampler {
    cells: Vec<(u32, u32)>,
    cumulative: Vec<f64>,
}

impl InversionSampler {
    /// Cumulative table over the positive cells in row-major order.
    pub fn new(table: &PmfTable) -> Self {
        let mut cells = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for ((r, s), p) in table.cells() {
            if p > 0.0 {
                acc += p;
                cells.push((r as u32, s as u32));
                cumulative.push(acc);
            }
        }
        InversionSampler { cells, cumulative }
    }

    /// One draw from a single uniform.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.cells[i.min(self.cells.len() - 1)]
    }
}
