use std::path::PathBuf;

use anyhow::{bail, Context};
use bhgof::experiment::{emit_table, run_experiment, table_to_csv, table_to_json, ExperimentConfig, Mode, TableFormat};
use bhgof::io;
use bhgof::parallel::PoolExecutor;
use bhgof::report::{FitView, TestView};
use bhgof_core::alternatives::{sample_alternative, AlternativeSpec};
use bhgof_core::bootstrap::{run_bootstrap_test_with, BootstrapOptions};
use bhgof_core::mle::{fit_mle, FitOptions};
use bhgof_core::statistic::WeightSpec;
use bhgof_core::{rng_from_seed, BivariateSample};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Goodness-of-fit testing for the bivariate Hermite distribution.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bootstrap goodness-of-fit test on a data set.
    Test(TestArgs),
    /// Maximum likelihood fit only.
    Fit(FitArgs),
    /// Draw a sample from a distribution.
    Sample(SampleArgs),
    /// Type-I-error study.
    Type1(ExperimentArgs),
    /// Power study.
    Power(ExperimentArgs),
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per CPU.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct DataArgs {
    /// File of `x,y` pairs, one per line.
    #[arg(long, conflicts_with = "table")]
    data: Option<PathBuf>,
    /// Contingency matrix: rows are y = 0, 1, ..., columns are x = 0, 1, ...
    /// Without --data or --table the bundled accident table is used.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Pin lambda3 (in the sigma2 = 1 scaling) to this value.
    #[arg(long, value_name = "V")]
    fix_lambda3: Option<f64>,
}

impl DataArgs {
    fn load(&self) -> anyhow::Result<BivariateSample> {
        Ok(match (&self.data, &self.table) {
            (Some(p), _) => io::ingest_pairs(p)?,
            (None, Some(p)) => io::ingest_contingency(p)?,
            (None, None) => io::accidents(),
        })
    }

    fn fit_options(&self, seed: u64) -> FitOptions {
        let opts = FitOptions::default().with_seed(seed);
        match self.fix_lambda3 {
            Some(v) => opts.with_fixed_lambda3(v),
            None => opts,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    #[arg(long, default_value_t = 1.0)]
    a2: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    /// Keep the original estimate in every replicate instead of refitting.
    #[arg(long)]
    no_refit: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SampleArgs {
    /// Distribution as JSON, e.g. '{"family":"BP","l1":1,"l2":1,"l3":0.25}'.
    #[arg(long, conflicts_with = "bh")]
    spec: Option<String>,
    /// Bivariate Hermite parameters mu,sigma2,lambda1,lambda2,lambda3.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    bh: Option<Vec<f64>>,
    #[arg(short, long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; the full study when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override bootstrap replicates per dataset.
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Override datasets per cell.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config), 0 for one per CPU.
    #[arg(long)]
    jobs: Option<usize>,
}

fn write_out(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_test(a: TestArgs) -> anyhow::Result<()> {
    let s = a.data.load()?;
    let w = WeightSpec::new(a.a1, a.a2)?;
    let mut opts = BootstrapOptions::new(a.bootstrap, a.common.seed).with_fit(a.data.fit_options(a.common.seed));
    opts.refit = !a.no_refit;
    let exec = PoolExecutor::new(a.common.jobs)?;
    let report = run_bootstrap_test_with(&s, &w, &opts, &exec)?;
    let view = TestView::new(s.len(), (a.a1, a.a2), &report, a.data.fix_lambda3);
    let text = match a.format {
        ReportFormat::Text => view.to_text(),
        ReportFormat::Json => view.to_json() + "\n",
        ReportFormat::Csv => view.to_csv(),
    };
    write_out(&a.common.out, &text)
}

fn run_fit(a: FitArgs) -> anyhow::Result<()> {
    let s = a.data.load()?;
    let fit = fit_mle(&s, &a.data.fit_options(a.common.seed))?;
    let view = FitView::new(s.len(), &fit, a.data.fix_lambda3);
    let text = match a.format {
        ReportFormat::Text => view.to_text(),
        ReportFormat::Json => serde_json::to_string_pretty(&view)? + "\n",
        ReportFormat::Csv => {
            let t = view.theta_hat;
            format!(
                "n,mu,sigma2,lambda1,lambda2,lambda3,loglik,converged\n{},{},{},{},{},{},{},{}\n",
                view.n, t.mu, t.sigma2, t.lambda1, t.lambda2, t.lambda3, view.loglik, view.converged
            )
        }
    };
    write_out(&a.common.out, &text)
}

fn run_sample(a: SampleArgs) -> anyhow::Result<()> {
    let spec: AlternativeSpec = match (&a.spec, &a.bh) {
        (Some(json), _) => serde_json::from_str(json).context("invalid --spec")?,
        (None, Some(p)) => {
            let params: [f64; 5] = p.as_slice().try_into().context("--bh takes five comma-separated values")?;
            AlternativeSpec::Hermite { params }
        }
        (None, None) => bail!("one of --spec or --bh is required"),
    };
    let s = sample_alternative(&spec, a.n, &mut rng_from_seed(a.common.seed))?;
    let text = match a.format {
        TableFormat::Csv => io::format_pairs(&s),
        TableFormat::Json => serde_json::to_string(&s.pairs())? + "\n",
    };
    write_out(&a.common.out, &text)
}

fn run_study(mode: Mode, a: ExperimentArgs) -> anyhow::Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => match mode {
            Mode::Type1 => ExperimentConfig::type1(),
            Mode::Power => ExperimentConfig::power(),
        },
    };
    if cfg.mode != mode {
        bail!("config is for a different experiment mode");
    }
    if let Some(b) = a.bootstrap {
        cfg.bootstrap = b;
    }
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    if let Some(j) = a.jobs {
        cfg.workers = j;
    }
    let exec = PoolExecutor::new(cfg.workers)?;
    let table = run_experiment(&cfg, &exec)?;
    match &a.out {
        Some(p) => emit_table(&table, p, a.format),
        None => {
            match a.format {
                TableFormat::Csv => print!("{}", table_to_csv(&table)),
                TableFormat::Json => println!("{}", table_to_json(&table)),
            }
            Ok(())
        }
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Test(a) => run_test(a),
        Command::Fit(a) => run_fit(a),
        Command::Sample(a) => run_sample(a),
        Command::Type1(a) => run_study(Mode::Type1, a),
        Command::Power(a) => run_study(Mode::Power, a),
    }
}
