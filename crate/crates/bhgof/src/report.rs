//! Serializable and printable views of a bootstrap test.

use std::fmt::Write as _;

use bhgof_core::bootstrap::TestReport;
use bhgof_core::hermite::BHParams;
use bhgof_core::mle::FitResult;
use serde::{Deserialize, Serialize};

/// Parameter vector with named fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsView {
    pub mu: f64,
    pub sigma2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl From<&BHParams> for ParamsView {
    fn from(p: &BHParams) -> Self {
        let [mu, sigma2, lambda1, lambda2, lambda3] = p.to_array();
        ParamsView { mu, sigma2, lambda1, lambda2, lambda3 }
    }
}

/// Output of `bhgof fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitView {
    pub n: usize,
    pub theta_hat: ParamsView,
    pub loglik: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub init_theta: ParamsView,
    pub init_loglik: f64,
    pub fix_lambda3: Option<f64>,
}

impl FitView {
    pub fn new(n: usize, fit: &FitResult, fix_lambda3: Option<f64>) -> Self {
        FitView {
            n,
            theta_hat: (&fit.theta_hat).into(),
            loglik: fit.loglik,
            converged: fit.converged,
            evaluations: fit.iterations,
            init_theta: (&fit.init_theta).into(),
            init_loglik: fit.init_loglik,
            fix_lambda3,
        }
    }

    pub fn to_text(&self) -> String {
        let t = &self.theta_hat;
        let mut out = String::new();
        let _ = writeln!(out, "n                {}", self.n);
        let _ = writeln!(
            out,
            "theta_hat        mu={:.6} sigma2={} lambda1={:.6} lambda2={:.6} lambda3={:.6}",
            t.mu, t.sigma2, t.lambda1, t.lambda2, t.lambda3
        );
        let _ = writeln!(out, "log-likelihood   {:.6}", self.loglik);
        let _ = writeln!(out, "converged        {} ({} evaluations)", self.converged, self.evaluations);
        out
    }
}

/// One upper-`alpha` bootstrap critical value and the decision at that level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub alpha: f64,
    /// `null` in JSON when `B` is too small for this level.
    pub value: Option<f64>,
    pub reject: bool,
}

/// Output of `bhgof test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestView {
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    pub v_obs: f64,
    pub p_value: f64,
    pub fit: FitView,
    pub replicates: usize,
    pub effective_replicates: usize,
    pub failed_replicates: Vec<usize>,
    pub refit: bool,
    pub seed: u64,
    pub critical_values: Vec<CriticalValue>,
    /// Replicate statistics in replicate order (failed replicates omitted).
    pub replicate_stats: Vec<f64>,
}

impl TestView {
    pub fn new(n: usize, (a1, a2): (f64, f64), r: &TestReport, fix_lambda3: Option<f64>) -> Self {
        TestView {
            n,
            a1,
            a2,
            v_obs: r.v_obs,
            p_value: r.p_value,
            fit: FitView::new(n, &r.fit, fix_lambda3),
            replicates: r.replicates,
            effective_replicates: r.effective_replicates(),
            failed_replicates: r.failed_replicates.clone(),
            refit: r.refit,
            seed: r.seed,
            critical_values: r
                .critical_values
                .iter()
                .map(|&(alpha, v)| CriticalValue {
                    alpha,
                    value: v.is_finite().then_some(v),
                    reject: r.rejects(alpha),
                })
                .collect(),
            replicate_stats: r.replicate_stats.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// One-row CSV summary with a header.
    pub fn to_csv(&self) -> String {
        let t = &self.fit.theta_hat;
        let mut out = String::from("n,a1,a2,v_obs,p_value,mu,sigma2,lambda1,lambda2,lambda3,loglik,replicates,failures,seed\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.a1,
            self.a2,
            self.v_obs,
            self.p_value,
            t.mu,
            t.sigma2,
            t.lambda1,
            t.lambda2,
            t.lambda3,
            self.fit.loglik,
            self.replicates,
            self.failed_replicates.len(),
            self.seed
        );
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "weight           (a1, a2) = ({}, {})", self.a1, self.a2);
        out.push_str(&self.fit.to_text());
        let _ = writeln!(out, "statistic        V = {:.6e}", self.v_obs);
        let _ = writeln!(
            out,
            "bootstrap        B = {} ({} used, {} failed), seed {}, {}",
            self.replicates,
            self.effective_replicates,
            self.failed_replicates.len(),
            self.seed,
            if self.refit { "refit" } else { "no refit" }
        );
        let _ = writeln!(out, "p-value          {:.4}", self.p_value);
        for cv in &self.critical_values {
            let value = cv.value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"));
            let verdict = if cv.reject { "reject" } else { "do not reject" };
            let _ = writeln!(out, "alpha = {:<5}     critical value {value}, {verdict}", cv.alpha);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bhgof_core::bootstrap::{run_bootstrap_test, BootstrapOptions};
    use bhgof_core::hermite::sample_bhd;
    use bhgof_core::rng_from_seed;
    use bhgof_core::statistic::WeightSpec;

    #[test]
    fn json_round_trip() {
        let p = BHParams::new(1.0, 0.8, 0.5, 0.5, 0.0).unwrap();
        let s = sample_bhd(&p, 30, &mut rng_from_seed(1)).unwrap();
        let r = run_bootstrap_test(&s, &WeightSpec::new(1.0, 1.0).unwrap(), &BootstrapOptions::new(99, 2)).unwrap();
        let view = TestView::new(30, (1.0, 1.0), &r, None);
        let back: TestView = serde_json::from_str(&view.to_json()).unwrap();
        assert_eq!(back, view);
        assert!(view.to_text().contains("p-value"));
        assert_eq!(view.to_csv().lines().count(), 2);
    }
}
