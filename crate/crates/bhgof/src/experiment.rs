//! Monte Carlo experiments: rejection rates under the null (type-I error)
//! and under alternatives (power).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context};
use bhgof_core::alternatives::{sample_alternative, validate_alternative, AlternativeSpec};
use bhgof_core::bootstrap::{derive_replicate_seed, mix64, run_bootstrap_test_multi, BootstrapOptions, Executor, MIN_REPLICATES};
use bhgof_core::mle::FitOptions;
use bhgof_core::statistic::WeightSpec;
use bhgof_core::rng_from_seed;
use serde::{Deserialize, Serialize};

/// Fraction of a cell's datasets allowed to fail before the cell is void.
pub const MAX_DATASET_FAILURE_FRACTION: f64 = 0.02;

/// The seven weight pairs of the type-I-error study.
pub const STUDY_WEIGHTS: [[f64; 2]; 7] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 5.0], [5.0, 1.0], [5.0, 5.0]];

/// The five weight pairs of the power study.
pub const POWER_WEIGHTS: [[f64; 2]; 5] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0, 5.0], [5.0, 5.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Type1,
    Power,
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Data-generating distributions. Type-I runs accept only `BH`.
    #[serde(default)]
    pub specs: Vec<AlternativeSpec>,
    #[serde(default = "default_ns")]
    pub n: Vec<usize>,
    /// Bootstrap replicates per dataset.
    #[serde(default = "default_b")]
    pub bootstrap: usize,
    /// Datasets per cell.
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub weights: Vec<[f64; 2]>,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads, 0 for one per CPU.
    #[serde(default)]
    pub workers: usize,
    /// Fit with `lambda3 = 0` pinned, for the data and every replicate.
    #[serde(default = "default_fix")]
    pub fix_lambda3: bool,
}

fn default_ns() -> Vec<usize> {
    vec![30, 50, 70]
}
fn default_b() -> usize {
    500
}
fn default_reps() -> usize {
    1000
}
fn default_alphas() -> Vec<f64> {
    vec![0.05, 0.10]
}
fn default_fix() -> bool {
    true
}

fn bh(mu: f64, s2: f64, l1: f64, l2: f64) -> AlternativeSpec {
    AlternativeSpec::Hermite { params: [mu, s2, l1, l2, 0.0] }
}

/// Null parameters of the type-I-error tables.
pub fn study_nulls() -> Vec<AlternativeSpec> {
    vec![
        bh(1.0, 0.8, 0.10, 0.20),
        bh(1.0, 0.8, 0.25, 0.25),
        bh(1.0, 0.8, 0.50, 0.20),
        bh(1.0, 0.8, 0.50, 0.50),
        bh(1.5, 1.0, 0.50, 0.50),
        bh(1.5, 1.0, 0.50, 0.75),
        bh(1.5, 1.0, 0.75, 0.25),
        bh(1.5, 1.0, 1.00, 0.25),
        bh(2.0, 1.0, 0.25, 0.75),
        bh(2.0, 1.0, 0.50, 0.25),
        bh(2.0, 1.0, 0.75, 0.25),
    ]
}

/// Alternatives of the power table.
pub fn study_alternatives() -> Vec<AlternativeSpec> {
    use AlternativeSpec::*;
    let d = 1.0 - (-1.0f64).exp();
    let bb = |m, p1, p2, p3| Binomial { m, p1, p2, p3 };
    let bp = |l1, l2, l3| Poisson { l1, l2, l3 };
    let bls = |l1, l2, l3| LogSeries { l1, l2, l3 };
    let bnb = |nu, g0, g1, g2| NegativeBinomial { nu, g0, g1, g2 };
    let bnta = |lambda, l1, l2, l3| NeymanTypeA { lambda, l1, l2, l3 };
    let bpp = |p, l2| PoissonMixture { p, theta: [0.2, 0.2, 0.1], lambda: [1.0, l2, 0.9] };
    vec![
        bb(1, 0.41, 0.02, 0.01),
        bb(1, 0.41, 0.03, 0.02),
        bb(2, 0.61, 0.01, 0.01),
        bb(1, 0.61, 0.03, 0.02),
        bb(2, 0.71, 0.01, 0.01),
        bp(1.00, 1.00, 0.25),
        bp(1.00, 1.00, 0.50),
        bp(1.00, 1.00, 0.75),
        bp(1.50, 1.00, 0.31),
        bp(1.50, 1.00, 0.92),
        bls(0.25, 0.15, 0.10),
        bls(5.0 * d / 7.0, d / 7.0, d / 7.0),
        bls(3.0 * d / 4.0, d / 8.0, d / 8.0),
        bls(7.0 * d / 9.0, d / 9.0, d / 9.0),
        bls(0.51, 0.01, 0.02),
        bnb(1, 0.92, 0.97, 0.01),
        bnb(1, 0.97, 0.97, 0.01),
        bnb(1, 0.97, 0.97, 0.02),
        bnb(1, 0.98, 0.98, 0.01),
        bnb(1, 0.99, 0.99, 0.01),
        bnta(0.21, 0.01, 0.01, 0.98),
        bnta(0.24, 0.01, 0.01, 0.98),
        bnta(0.26, 0.01, 0.01, 0.97),
        bnta(0.26, 0.01, 0.01, 0.98),
        bnta(0.28, 0.01, 0.01, 0.97),
        bpp(0.31, 1.0),
        bpp(0.31, 1.2),
        bpp(0.32, 1.0),
        bpp(0.33, 1.0),
        bpp(0.33, 1.1),
    ]
}

impl ExperimentConfig {
    /// Full type-I-error study.
    pub fn type1() -> Self {
        ExperimentConfig {
            mode: Mode::Type1,
            specs: study_nulls(),
            n: default_ns(),
            bootstrap: default_b(),
            reps: default_reps(),
            alphas: default_alphas(),
            weights: STUDY_WEIGHTS.to_vec(),
            master_seed: 0,
            workers: 0,
            fix_lambda3: true,
        }
    }

    /// Full power study.
    pub fn power() -> Self {
        ExperimentConfig {
            mode: Mode::Power,
            specs: study_alternatives(),
            n: vec![50],
            alphas: vec![0.05],
            weights: POWER_WEIGHTS.to_vec(),
            ..Self::type1()
        }
    }

    /// Parse a JSON config. Missing `specs` and `weights` take the study
    /// defaults for the mode.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).context("invalid experiment config")?;
        if cfg.specs.is_empty() {
            cfg.specs = match cfg.mode {
                Mode::Type1 => study_nulls(),
                Mode::Power => study_alternatives(),
            };
        }
        if cfg.weights.is_empty() {
            cfg.weights = match cfg.mode {
                Mode::Type1 => STUDY_WEIGHTS.to_vec(),
                Mode::Power => POWER_WEIGHTS.to_vec(),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.reps >= 1, "reps must be at least 1");
        ensure!(self.bootstrap >= MIN_REPLICATES, "bootstrap must be at least {MIN_REPLICATES}");
        ensure!(!self.specs.is_empty(), "no distributions to sample from");
        ensure!(!self.n.is_empty() && self.n.iter().all(|&n| n >= 1), "sample sizes must be positive");
        ensure!(!self.alphas.is_empty(), "no significance levels");
        ensure!(self.alphas.iter().all(|&a| a > 0.0 && a < 1.0), "significance levels must lie in (0, 1)");
        ensure!(!self.weights.is_empty(), "no weight pairs");
        for &[a1, a2] in &self.weights {
            WeightSpec::new(a1, a2).with_context(|| format!("weight ({a1}, {a2})"))?;
        }
        for spec in &self.specs {
            validate_alternative(spec).with_context(|| label(spec))?;
            if self.mode == Mode::Type1 && !matches!(spec, AlternativeSpec::Hermite { .. }) {
                bail!("type1 experiments sample from BH nulls only, got {}", label(spec));
            }
        }
        Ok(())
    }

    fn fit_options(&self) -> FitOptions {
        if self.fix_lambda3 {
            FitOptions::default().with_fixed_lambda3(0.0)
        } else {
            FitOptions::default()
        }
    }
}

/// Compact name of a distribution, e.g. `BB(1;0.41,0.02,0.01)`.
pub fn label(spec: &AlternativeSpec) -> String {
    use AlternativeSpec::*;
    let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    match spec {
        Binomial { m, p1, p2, p3 } => format!("BB({m};{})", list(&[*p1, *p2, *p3])),
        Poisson { l1, l2, l3 } => format!("BP({})", list(&[*l1, *l2, *l3])),
        LogSeries { l1, l2, l3 } => format!("BLS({})", list(&[*l1, *l2, *l3])),
        NegativeBinomial { nu, g0, g1, g2 } => format!("BNB({nu};{})", list(&[*g0, *g1, *g2])),
        NeymanTypeA { lambda, l1, l2, l3 } => format!("BNTA({lambda};{})", list(&[*l1, *l2, *l3])),
        PoissonMixture { p, theta, lambda } => format!("BPP({p};({}),({}))", list(theta), list(lambda)),
        Hermite { params } => format!("BH({})", list(params)),
    }
}

/// One cell: a distribution, a sample size, a weight and a level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub spec: String,
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
    pub rejections: usize,
    /// Datasets whose test completed.
    pub datasets: usize,
    pub failures: usize,
    /// Rejection fraction, absent when failures exceed the cap.
    pub rate: Option<f64>,
    /// Monte Carlo standard error of `rate`.
    pub se: Option<f64>,
    /// `rate` as a rounded percentage (power runs only).
    pub percent: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub mode: Mode,
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn empty(mode: Mode) -> Self {
        ResultTable { mode, metadata: BTreeMap::new(), rows: Vec::new() }
    }

    pub fn row(&self, spec: &str, n: usize, (a1, a2): (f64, f64), alpha: f64) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.spec == spec && r.n == n && r.a1 == a1 && r.a2 == a2 && r.alpha == alpha)
    }
}

fn cell_seed(master: u64, spec: usize, n: usize) -> u64 {
    mix64(derive_replicate_seed(master, spec as u64) ^ mix64(n as u64))
}

/// Seeds for one dataset: data, bootstrap master, fit restarts.
pub fn dataset_seeds(master: u64, spec: usize, n: usize, rep: usize) -> (u64, u64, u64) {
    let d = derive_replicate_seed(cell_seed(master, spec, n), rep as u64);
    (derive_replicate_seed(d, 0), derive_replicate_seed(d, 1), derive_replicate_seed(d, 2))
}

/// Per-weight p-values of one dataset, `None` where the test failed.
fn dataset_p_values<E: Executor + Sync>(
    spec: &AlternativeSpec,
    n: usize,
    seeds: (u64, u64, u64),
    weights: &[WeightSpec],
    cfg: &ExperimentConfig,
    exec: &E,
) -> Vec<Option<f64>> {
    let none = vec![None; weights.len()];
    let Ok(sample) = sample_alternative(spec, n, &mut rng_from_seed(seeds.0)) else {
        return none;
    };
    let mut opts = BootstrapOptions::new(cfg.bootstrap, seeds.1).with_fit(cfg.fit_options().with_seed(seeds.2));
    opts.alphas = cfg.alphas.clone();
    match run_bootstrap_test_multi(&sample, weights, &opts, exec) {
        Ok(reports) => reports.into_iter().map(|r| r.ok().map(|r| r.p_value)).collect(),
        Err(_) => none,
    }
}

/// Run the experiment described by `cfg`. Datasets are shared by all
/// weights of a cell; results do not depend on the number of workers.
pub fn run_experiment<E: Executor + Sync>(cfg: &ExperimentConfig, exec: &E) -> anyhow::Result<ResultTable> {
    cfg.validate()?;
    let start = Instant::now();
    let weights: Vec<WeightSpec> = cfg
        .weights
        .iter()
        .map(|&[a1, a2]| WeightSpec::new(a1, a2))
        .collect::<Result<_, _>>()?;
    let cap = (MAX_DATASET_FAILURE_FRACTION * cfg.reps as f64).floor() as usize;
    let mut table = ResultTable::empty(cfg.mode);

    for (si, spec) in cfg.specs.iter().enumerate() {
        for &n in &cfg.n {
            let pvals = exec.map_indexed(cfg.reps, |rep| {
                dataset_p_values(spec, n, dataset_seeds(cfg.master_seed, si, n, rep), &weights, cfg, exec)
            });
            for (wi, &[a1, a2]) in cfg.weights.iter().enumerate() {
                let done: Vec<f64> = pvals.iter().filter_map(|v| v[wi]).collect();
                let failures = cfg.reps - done.len();
                for &alpha in &cfg.alphas {
                    let rejections = done.iter().filter(|&&p| p <= alpha).count();
                    let valid = failures <= cap && !done.is_empty();
                    let rate = valid.then(|| rejections as f64 / done.len() as f64);
                    let se = rate.map(|p| (p * (1.0 - p) / done.len() as f64).sqrt());
                    let percent = match cfg.mode {
                        Mode::Power => rate.map(|p| (100.0 * p).round() as u32),
                        Mode::Type1 => None,
                    };
                    table.rows.push(Row {
                        spec: label(spec),
                        n,
                        a1,
                        a2,
                        alpha,
                        rejections,
                        datasets: done.len(),
                        failures,
                        rate,
                        se,
                        percent,
                    });
                }
            }
        }
    }

    let m = &mut table.metadata;
    m.insert("master_seed".into(), cfg.master_seed.to_string());
    m.insert("bootstrap".into(), cfg.bootstrap.to_string());
    m.insert("reps".into(), cfg.reps.to_string());
    m.insert("fix_lambda3".into(), cfg.fix_lambda3.to_string());
    m.insert("refit".into(), "true".into());
    m.insert("p_value".into(), "(1 + #{V* >= V}) / (B + 1)".into());
    m.insert("failure_cap".into(), cap.to_string());
    m.insert(
        "conventions".into(),
        "BP pgf exp(l1(t1-1)+l2(t2-1)+l3(t1t2-1)); BNB gamma(nu,1)-mixed BP; BLS log(1-l1t1-l2t2-l3t1t2)/log(1-l1-l2-l3)".into(),
    );
    m.insert("runtime_seconds".into(), format!("{:.1}", start.elapsed().as_secs_f64()));
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

const CSV_HEADER: &str = "spec,n,a1,a2,alpha,rejections,datasets,failures,rate,se,percent";

/// Long-format CSV: `# key: value` metadata lines, a header, one row per
/// cell.
pub fn table_to_csv(t: &ResultTable) -> String {
    let mut out = String::new();
    let mode = match t.mode {
        Mode::Type1 => "type1",
        Mode::Power => "power",
    };
    let _ = writeln!(out, "# mode: {mode}");
    for (k, v) in &t.metadata {
        let _ = writeln!(out, "# {k}: {v}");
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in &t.rows {
        w.serialize(r).expect("rows serialize");
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8"));
    out
}

/// Inverse of [`table_to_csv`].
pub fn table_from_csv(text: &str) -> anyhow::Result<ResultTable> {
    let mut mode = None;
    let mut metadata = BTreeMap::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix("# ") {
            let (k, v) = meta.split_once(": ").with_context(|| format!("bad metadata line `{line}`"))?;
            if k == "mode" {
                mode = Some(serde_json::from_value(serde_json::Value::String(v.into()))?);
            } else {
                metadata.insert(k.to_string(), v.to_string());
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mode = mode.context("missing `# mode:` line")?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    ensure!(reader.headers()?.iter().collect::<Vec<_>>().join(",") == CSV_HEADER, "unexpected CSV header");
    let rows = reader.deserialize().collect::<Result<Vec<Row>, _>>()?;
    Ok(ResultTable { mode, metadata, rows })
}

pub fn table_to_json(t: &ResultTable) -> String {
    serde_json::to_string_pretty(t).expect("plain data serializes")
}

/// Write the table to `path` in the chosen format.
pub fn emit_table(t: &ResultTable, path: &Path, format: TableFormat) -> anyhow::Result<()> {
    let text = match format {
        TableFormat::Csv => table_to_csv(t),
        TableFormat::Json => table_to_json(t),
    };
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::type1().validate().unwrap();
        ExperimentConfig::power().validate().unwrap();
        assert_eq!(study_alternatives().len(), 30);
    }

    #[test]
    fn minimal_json_config() {
        let cfg = ExperimentConfig::from_json(r#"{"mode": "type1"}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::type1());
        let cfg = ExperimentConfig::from_json(
            r#"{"mode": "power", "specs": [{"family": "BB", "m": 1, "p1": 0.41, "p2": 0.02, "p3": 0.01}], "n": [50]}"#,
        )
        .unwrap();
        assert_eq!(cfg.weights.len(), 5);
        assert_eq!(label(&cfg.specs[0]), "BB(1;0.41,0.02,0.01)");
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"mode": "type1", "bootstrap": 50}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"mode": "type1", "reps": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"mode": "type1", "specs": [{"family": "BP", "l1": 1, "l2": 1, "l3": 0.5}]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"mode": "power", "specs": [{"family": "BLS", "l1": 0.5, "l2": 0.3, "l3": 0.2}]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"mode": "type1", "typo": 1}"#).is_err());
    }

    #[test]
    fn dataset_seeds_distinct() {
        let mut seen = std::collections::HashSet::new();
        for spec in 0..5 {
            for n in [30, 50, 70] {
                for rep in 0..200 {
                    let (a, b, c) = dataset_seeds(9, spec, n, rep);
                    assert!(seen.insert(a) && seen.insert(b) && seen.insert(c));
                }
            }
        }
    }

    #[test]
    fn empty_table_csv_is_header_only() {
        let t = ResultTable::empty(Mode::Type1);
        let csv = table_to_csv(&t);
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(), [CSV_HEADER]);
        assert_eq!(table_from_csv(&csv).unwrap(), t);
    }
}
