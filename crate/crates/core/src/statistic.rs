//! The weighted L2 distance between the empirical and the fitted pgf.
//!
//! For a sample `X_1..X_n` and parameters `p`,
//!
//! ```text
//! V = n * ∬_{[0,1]^2} (v_n(t) - v(t; p))^2 t1^a1 t2^a2 dt
//! ```
//!
//! where `v_n` is the empirical pgf. Expanding the square gives
//! `V = n (A - 2B + C)`. `A = ∬ v_n^2 w` is a finite sum of rational terms
//! and is evaluated exactly; `B` and `C` involve the model pgf and are
//! integrated with a tensor Gauss–Legendre rule, with a second rule of
//! twice the order as an error check.

use alloc::vec::Vec;

use crate::error::Error;
use crate::hermite::BHParams;
use crate::quadrature::WeightedTensorRule;
use crate::sample::BivariateSample;

/// Default nodes per axis.
pub const DEFAULT_QUAD_ORDER: usize = 32;
/// Default relative tolerance between the base and refined rules.
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;
const MAX_QUAD_ORDER: usize = 256;

/// Weight `w(t) = t1^a1 t2^a2` plus the quadrature settings used with it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    a1: f64,
    a2: f64,
    quad_order: usize,
    refine_tol: f64,
    base: WeightedTensorRule,
    refined: WeightedTensorRule,
}

impl WeightSpec {
    /// Weight exponents with the default order (32) and tolerance (1e-8).
    pub fn new(a1: f64, a2: f64) -> Result<Self, Error> {
        Self::with_order(a1, a2, DEFAULT_QUAD_ORDER)
    }

    /// Weight exponents and nodes per axis, `2 <= quad_order <= 256`.
    pub fn with_order(a1: f64, a2: f64, quad_order: usize) -> Result<Self, Error> {
        if !(a1.is_finite() && a2.is_finite()) || a1 < 0.0 || a2 < 0.0 {
            return Err(Error::InvalidWeight("exponents must be finite and >= 0"));
        }
        if !(2..=MAX_QUAD_ORDER).contains(&quad_order) {
            return Err(Error::InvalidWeight("quad_order must lie in [2, 256]"));
        }
        Ok(WeightSpec {
            a1,
            a2,
            quad_order,
            refine_tol: DEFAULT_REFINE_TOL,
            base: WeightedTensorRule::new(quad_order, a1, a2),
            refined: WeightedTensorRule::new(2 * quad_order, a1, a2),
        })
    }

    /// Replace the relative refinement tolerance.
    pub fn refine_tolerance(mut self, tol: f64) -> Self {
        self.refine_tol = tol;
        self
    }

    /// Exponent on `t1`.
    pub fn a1(&self) -> f64 {
        self.a1
    }
    /// Exponent on `t2`.
    pub fn a2(&self) -> f64 {
        self.a2
    }
    /// Nodes per axis of the base rule.
    pub fn quad_order(&self) -> usize {
        self.quad_order
    }
    /// Relative tolerance of the refinement check.
    pub fn refine_tol(&self) -> f64 {
        self.refine_tol
    }
    /// Base-order rule.
    pub fn rule(&self) -> &WeightedTensorRule {
        &self.base
    }
    /// Double-order rule.
    pub fn refined_rule(&self) -> &WeightedTensorRule {
        &self.refined
    }
}

/// Result of [`integrate_weighted`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Value at `quad_order` nodes per axis.
    pub value: f64,
    /// Value at twice that order.
    pub refined: f64,
}

impl Quadrature {
    /// `|value - refined|`.
    pub fn error_estimate(&self) -> f64 {
        libm::fabs(self.value - self.refined)
    }

    /// Fail if the two orders differ by more than `rel_tol` relative to the
    /// refined value.
    pub fn check(self, rel_tol: f64) -> Result<Self, Error> {
        if self.error_estimate() <= rel_tol * libm::fabs(self.refined) + 1e-15 {
            Ok(self)
        } else {
            Err(Error::QuadratureDisagreement {
                coarse: self.value,
                refined: self.refined,
            })
        }
    }
}

/// `∬ f(t) t1^a1 t2^a2 dt` over the unit square at the base and refined orders.
pub fn integrate_weighted<F: FnMut(f64, f64) -> f64>(mut f: F, w: &WeightSpec) -> Quadrature {
    Quadrature {
        value: w.base.integrate(&mut f),
        refined: w.refined.integrate(&mut f),
    }
}

/// Empirical pgf `(1/n) sum t1^x t2^y`, with `0^0 = 1`.
pub fn epgf_eval(s: &BivariateSample, t: (f64, f64)) -> f64 {
    let mut acc = 0.0;
    for c in s.cells() {
        acc += c.count as f64 * powi(t.0, c.x) * powi(t.1, c.y);
    }
    acc / s.len() as f64
}

#[inline]
fn powi(t: f64, e: u32) -> f64 {
    // f64::powi lives in std; repeated squaring keeps 0^0 = 1
    let mut base = t;
    let mut e = e;
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// `∬ v_n(t)^2 t1^a1 t2^a2 dt`, exactly:
/// `(1/n^2) sum_i sum_j 1 / ((x_i + x_j + a1 + 1)(y_i + y_j + a2 + 1))`.
pub fn empirical_term_closed_form(s: &BivariateSample, w: &WeightSpec) -> f64 {
    let cells = s.cells();
    let mut acc = 0.0;
    for (i, ci) in cells.iter().enumerate() {
        let wi = ci.count as f64;
        // diagonal once, off-diagonal pairs twice
        let dx = 2.0 * ci.x as f64 + w.a1 + 1.0;
        let dy = 2.0 * ci.y as f64 + w.a2 + 1.0;
        acc += wi * wi / (dx * dy);
        for cj in &cells[i + 1..] {
            let dx = (ci.x + cj.x) as f64 + w.a1 + 1.0;
            let dy = (ci.y + cj.y) as f64 + w.a2 + 1.0;
            acc += 2.0 * wi * cj.count as f64 / (dx * dy);
        }
    }
    let n = s.len() as f64;
    acc / (n * n)
}

/// The pieces of the statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticParts {
    /// `∬ v_n^2 w`, closed form.
    pub empirical: f64,
    /// `∬ v_n v w` by quadrature.
    pub cross: Quadrature,
    /// `∬ v^2 w` by quadrature.
    pub model: Quadrature,
    /// Sample size.
    pub n: usize,
}

impl StatisticParts {
    /// `n (A - 2B + C)` at the base order.
    pub fn value(&self) -> f64 {
        self.n as f64 * (self.empirical - 2.0 * self.cross.value + self.model.value)
    }

    /// `n (A - 2B + C)` at the refined order.
    pub fn refined_value(&self) -> f64 {
        self.n as f64 * (self.empirical - 2.0 * self.cross.refined + self.model.refined)
    }
}

fn cross_and_model(s: &BivariateSample, p: &BHParams, rule: &WeightedTensorRule) -> (f64, f64) {
    let xs = rule.x_nodes();
    let ys = rule.y_nodes();
    let max_x = s.max_x() as usize;
    // h[x][j] = sum over cells with first coordinate x of count * y_j^y
    let m = ys.len();
    let mut h: Vec<f64> = alloc::vec![0.0; (max_x + 1) * m];
    for c in s.cells() {
        for (j, &y) in ys.iter().enumerate() {
            h[c.x as usize * m + j] += c.count as f64 * powi(y, c.y);
        }
    }
    let inv_n = 1.0 / s.len() as f64;
    let mut vn_row = alloc::vec![0.0; m];
    let (mut cross, mut model) = (0.0, 0.0);
    for (&x, &wx) in xs.iter().zip(rule.x_weights()) {
        vn_row.iter_mut().for_each(|v| *v = 0.0);
        let mut px = 1.0;
        for hx in h.chunks_exact(m) {
            if px != 0.0 {
                for (v, &hv) in vn_row.iter_mut().zip(hx) {
                    *v += px * hv;
                }
            }
            px *= x;
        }
        let (mut cr, mut mo) = (0.0, 0.0);
        for ((&y, &wy), &vn) in ys.iter().zip(rule.y_weights()).zip(&vn_row) {
            let v = libm::exp(p.log_pgf(x, y));
            cr += wy * vn * inv_n * v;
            mo += wy * v * v;
        }
        cross += wx * cr;
        model += wx * mo;
    }
    (cross, model)
}

/// Closed-form empirical term plus both quadrature terms, unchecked.
pub fn statistic_parts(s: &BivariateSample, p: &BHParams, w: &WeightSpec) -> StatisticParts {
    let (cb, mb) = cross_and_model(s, p, &w.base);
    let (cr, mr) = cross_and_model(s, p, &w.refined);
    StatisticParts {
        empirical: empirical_term_closed_form(s, w),
        cross: Quadrature { value: cb, refined: cr },
        model: Quadrature { value: mb, refined: mr },
        n: s.len(),
    }
}

/// The test statistic `V`, with both quadrature terms checked against the
/// refined rule at the weight's tolerance.
pub fn statistic_vnw(s: &BivariateSample, p: &BHParams, w: &WeightSpec) -> Result<f64, Error> {
    let parts = statistic_parts(s, p, w);
    parts.cross.check(w.refine_tol)?;
    parts.model.check(w.refine_tol)?;
    Ok(parts.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_point() -> BivariateSample {
        BivariateSample::new(vec![(0, 0), (1, 2)]).unwrap()
    }

    #[test]
    fn epgf_examples() {
        assert_eq!(epgf_eval(&two_point(), (0.5, 0.5)), 0.5625);
        assert_eq!(epgf_eval(&two_point(), (1.0, 1.0)), 1.0);
        let zeros = BivariateSample::new(vec![(0, 0); 4]).unwrap();
        assert_eq!(epgf_eval(&zeros, (0.0, 0.0)), 1.0);
    }

    #[test]
    fn closed_form_examples() {
        let w = WeightSpec::new(0.0, 0.0).unwrap();
        assert!((empirical_term_closed_form(&two_point(), &w) - 0.35).abs() < 1e-15);
        let single = BivariateSample::new(vec![(0, 0)]).unwrap();
        assert_eq!(empirical_term_closed_form(&single, &w), 1.0);
    }

    #[test]
    fn weight_validation() {
        assert!(WeightSpec::new(-0.5, 0.0).is_err());
        assert!(WeightSpec::new(0.0, f64::NAN).is_err());
        assert!(WeightSpec::with_order(1.0, 1.0, 1).is_err());
        assert!(WeightSpec::with_order(1.0, 1.0, 257).is_err());
        assert!(WeightSpec::with_order(1.0, 1.0, 256).is_ok());
    }

    #[test]
    fn constant_integrals() {
        let w = WeightSpec::new(1.0, 1.0).unwrap();
        let q = integrate_weighted(|_, _| 1.0, &w);
        assert!((q.value - 0.25).abs() < 1e-14);
        let w = WeightSpec::new(5.0, 5.0).unwrap();
        let q = integrate_weighted(|_, _| 1.0, &w).check(1e-12).unwrap();
        assert!((q.value - 1.0 / 36.0).abs() < 1e-14);
    }

    #[test]
    fn check_reports_both_values() {
        let q = Quadrature { value: 1.0, refined: 1.1 };
        assert_eq!(
            q.check(1e-8),
            Err(Error::QuadratureDisagreement { coarse: 1.0, refined: 1.1 })
        );
    }
}
