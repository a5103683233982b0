//! Named experiments: configuration, seeding, ensemble runs and the files
//! they leave behind (a CSV of rows plus a JSON sidecar).

mod experiments;
mod output;
mod summary;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{load_bundle, meta_path, nested_path, write_bundle};
pub use summary::{summarize, CollapsePoint, Reduction, Summary, SummaryRow, DEFAULT_WINDOW};

use crate::error::{Error, Result};
use crate::model_library::{Boundary, ModelSpec, DEFAULT_XXZ_DELTA};

pub const FORMAT_VERSION: u32 = 1;
/// Largest chain the harness accepts.
pub const MAX_HARNESS_SITES: usize = 12;
/// Largest open chain for the master equation (density matrices are d x d).
pub const MAX_LINDBLAD_SITES: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    QfiScan,
    Lindblad,
    HaarSat,
    CfiScan,
    Mle,
    Discriminate,
    Bgue,
    Tracedist,
    Fidelity,
    Blackhole,
    XxzScan,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::QfiScan,
        ExperimentId::Lindblad,
        ExperimentId::HaarSat,
        ExperimentId::CfiScan,
        ExperimentId::Mle,
        ExperimentId::Discriminate,
        ExperimentId::Bgue,
        ExperimentId::Tracedist,
        ExperimentId::Fidelity,
        ExperimentId::Blackhole,
        ExperimentId::XxzScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::QfiScan => "qfi-scan",
            ExperimentId::Lindblad => "lindblad",
            ExperimentId::HaarSat => "haar-sat",
            ExperimentId::CfiScan => "cfi-scan",
            ExperimentId::Mle => "mle",
            ExperimentId::Discriminate => "discriminate",
            ExperimentId::Bgue => "bgue",
            ExperimentId::Tracedist => "tracedist",
            ExperimentId::Fidelity => "fidelity",
            ExperimentId::Blackhole => "blackhole",
            ExperimentId::XxzScan => "xxz-scan",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    /// `(desk, paper)` ensemble sizes. For mle and discriminate these count
    /// repetitions, for tracedist Haar samples.
    pub fn default_samples(self) -> (usize, usize) {
        match self {
            ExperimentId::QfiScan | ExperimentId::XxzScan => (50, 200),
            ExperimentId::CfiScan => (50, 400),
            ExperimentId::HaarSat => (100, 800),
            ExperimentId::Lindblad => (1, 1),
            ExperimentId::Mle => (5, 5),
            ExperimentId::Discriminate => (20, 20),
            ExperimentId::Bgue | ExperimentId::Blackhole => (1, 1),
            ExperimentId::Tracedist => (10_000, 10_000),
            ExperimentId::Fidelity => (50, 50),
        }
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Either an explicit list of times or `start, start + step, ..., stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Range { start: f64, stop: f64, step: f64 },
    Points(Vec<f64>),
}

impl TimeGrid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        TimeGrid::Range { start, stop, step }
    }

    pub fn points(&self) -> Vec<f64> {
        match self {
            TimeGrid::Points(p) => p.clone(),
            TimeGrid::Range { start, stop, step } => {
                let k = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=k).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        if let TimeGrid::Range { start, stop, step } = *self {
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                return config_err(path, format!("range {start}..{stop} step {step} is empty or not finite"));
            }
            if (stop - start) / step > 1e6 {
                return config_err(path, "more than a million points");
            }
        }
        let p = self.points();
        if p.is_empty() {
            return config_err(path, "no times");
        }
        if let Some(k) = p.iter().position(|t| !t.is_finite() || *t < 0.0) {
            return config_err(&format!("{path}[{k}]"), "times must be finite and non-negative");
        }
        if let Some(k) = p.windows(2).position(|w| !(w[1] > w[0])) {
            return config_err(&format!("{path}[{}]", k + 1), "times must be strictly increasing");
        }
        Ok(())
    }
}

/// Experiment-specific knobs; unused ones are ignored but still echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Lindblad dissipation rate.
    pub gamma: f64,
    /// Lindblad RK4 step.
    pub dt: f64,
    /// True time for mle and discriminate.
    pub t0: f64,
    /// Measurements per estimate.
    pub n_meas: Vec<usize>,
    /// Batches per discrimination run.
    pub trials: usize,
    pub kappa: f64,
    pub max_spread_fraction: f64,
    pub m0: f64,
    pub g_newton: f64,
    pub alpha: f64,
    /// Late-time window used by `summarize`.
    pub window: [f64; 2],
    /// Overrides the paper-scale sample count.
    pub paper_samples: Option<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            gamma: 1.0,
            dt: 0.01,
            t0: 10.0,
            n_meas: vec![50],
            trials: 10,
            kappa: 4.0,
            max_spread_fraction: 0.01,
            m0: 10.0,
            g_newton: 1.0,
            alpha: 1.0,
            window: DEFAULT_WINDOW,
            paper_samples: None,
        }
    }
}

/// One experiment run. Missing fields take per-experiment defaults; the
/// resolved form (every field filled) is what outputs echo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    /// Chain lengths.
    #[serde(default)]
    pub n: Vec<usize>,
    /// Subsystem sizes (leading sites). For bgue these are `n_S`, for
    /// lindblad the open-chain lengths, for fidelity `n_R`.
    #[serde(default)]
    pub n_a: Vec<usize>,
    #[serde(default)]
    pub t_grid: Option<TimeGrid>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub paper_scale: bool,
    #[serde(default)]
    pub params: Params,
}

fn config_err<T>(path: &str, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Config(format!("{path}: {msg}")))
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentConfig {
            experiment,
            model: None,
            n: Vec::new(),
            n_a: Vec::new(),
            t_grid: None,
            samples: None,
            master_seed: 0,
            out: None,
            paper_scale: false,
            params: Params::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fills every default and validates.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        use ExperimentId::*;
        let mut c = self.clone();
        let e = c.experiment;
        if c.model.is_none() {
            c.model = Some(match e {
                XxzScan => ModelSpec::Xxz {
                    delta: DEFAULT_XXZ_DELTA,
                    boundary: Boundary::Periodic,
                },
                _ => ModelSpec::default(),
            });
        }
        if c.n.is_empty() {
            c.n = match e {
                QfiScan | XxzScan | Discriminate | Tracedist => vec![8],
                CfiScan | HaarSat | Fidelity => vec![10],
                Mle | Bgue => vec![9],
                Lindblad | Blackhole => vec![],
            };
        }
        if c.n_a.is_empty() {
            let n0 = c.n.first().copied().unwrap_or(0);
            c.n_a = match e {
                QfiScan | XxzScan | HaarSat => (1..n0).collect(),
                CfiScan => vec![7],
                Lindblad => vec![4],
                Mle | Discriminate => vec![n0],
                Bgue => vec![3],
                Tracedist => vec![n0.saturating_sub(3)],
                Fidelity => vec![3, 8],
                Blackhole => vec![],
            };
        }
        if c.t_grid.is_none() {
            c.t_grid = match e {
                QfiScan | XxzScan | CfiScan => Some(TimeGrid::range(0.0, 20.0, 0.25)),
                HaarSat => Some(TimeGrid::range(15.0, 20.0, 0.5)),
                Lindblad => Some(TimeGrid::range(0.0, 60.0, 0.1)),
                Mle | Discriminate => Some(TimeGrid::range(0.0, 20.0, 0.05)),
                Bgue => Some(TimeGrid::range(0.0, 4.0, 0.05)),
                Blackhole => {
                    let tt = c.params.g_newton.powi(2) * c.params.m0.powi(3);
                    Some(TimeGrid::range(0.0, 0.99 * tt, 0.01 * tt))
                }
                Tracedist | Fidelity => None,
            };
        }
        if c.samples.is_none() || c.paper_scale {
            let (desk, paper) = e.default_samples();
            c.samples = Some(if c.paper_scale {
                c.params.paper_samples.unwrap_or(paper)
            } else {
                desk
            });
        }
        if c.out.is_none() {
            c.out = Some(PathBuf::from(format!("results/{}.csv", e.name())));
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        use ExperimentId::*;
        let e = self.experiment;
        let samples = self.samples.unwrap_or(1);
        if samples == 0 {
            return config_err("samples", "must be positive");
        }
        for (k, &n) in self.n.iter().enumerate() {
            if n < 2 {
                return config_err(&format!("n[{k}]"), format!("{n} sites is too few"));
            }
            if n > MAX_HARNESS_SITES {
                return config_err(&format!("n[{k}]"), format!("{n} exceeds the supported maximum {MAX_HARNESS_SITES}"));
            }
        }
        let n_required = !matches!(e, Lindblad | Blackhole);
        if n_required && self.n.is_empty() {
            return config_err("n", "needs at least one chain length");
        }
        let a_required = !matches!(e, Blackhole);
        if a_required && self.n_a.is_empty() {
            return config_err("n_a", "needs at least one subsystem size");
        }
        for (k, &a) in self.n_a.iter().enumerate() {
            let path = format!("n_a[{k}]");
            if a == 0 {
                return config_err(&path, "subsystem must be non-empty");
            }
            if e == Lindblad {
                if a < 2 {
                    return config_err(&path, "open chain needs at least two sites");
                }
                if a > MAX_LINDBLAD_SITES {
                    return config_err(&path, format!("{a} exceeds the Lindblad maximum {MAX_LINDBLAD_SITES}"));
                }
                continue;
            }
            for (j, &n) in self.n.iter().enumerate() {
                let too_big = match e {
                    Tracedist => a >= n,
                    Bgue => 2 * a >= n,
                    _ => a > n,
                };
                if too_big {
                    return config_err(&path, format!("{a} does not fit in n[{j}] = {n}"));
                }
            }
        }
        if let Some(g) = &self.t_grid {
            g.validate("t_grid")?;
            let p = g.points();
            if matches!(e, Mle | Discriminate) {
                if p.len() < 2 {
                    return config_err("t_grid", "the likelihood table needs two times");
                }
                if !(self.params.t0 >= p[0] && self.params.t0 <= *p.last().unwrap()) {
                    return config_err("params.t0", format!("{} outside the time grid", self.params.t0));
                }
            }
            if e == Lindblad && !p.is_empty() && p[0] != 0.0 {
                return config_err("t_grid[0]", "the master equation starts at t = 0");
            }
        }
        let p = &self.params;
        if !(p.gamma >= 0.0 && p.gamma.is_finite()) {
            return config_err("params.gamma", "must be non-negative");
        }
        if !(p.dt > 0.0 && p.dt <= 0.1) {
            return config_err("params.dt", format!("{} outside (0, 0.1]", p.dt));
        }
        if matches!(e, Mle | Discriminate) {
            if p.n_meas.is_empty() {
                return config_err("params.n_meas", "needs at least one sample size");
            }
            if let Some(k) = p.n_meas.iter().position(|&m| m == 0) {
                return config_err(&format!("params.n_meas[{k}]"), "must be positive");
            }
        }
        if e == Discriminate && p.trials < 3 {
            return config_err("params.trials", format!("{} < 3", p.trials));
        }
        if !(p.window[0] < p.window[1]) {
            return config_err("params.window", "lower end must be below the upper end");
        }
        if e == Blackhole && !(p.m0 > 0.0 && p.g_newton > 0.0 && p.alpha > 0.0) {
            return config_err("params", "m0, g_newton and alpha must be positive");
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.t_grid.as_ref().map(TimeGrid::points).unwrap_or_default()
    }

    pub fn sample_count(&self) -> usize {
        self.samples.unwrap_or(1)
    }
}

/// One output line. `(seed, stream)` names the random stream the row was
/// drawn from (`stream_rng(seed, stream)`); with the config's parameters
/// and the row's `(n, n_a, sample, t)` that regenerates it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub n_a: usize,
    pub sample: usize,
    pub seed: u64,
    pub stream: u64,
    pub t: Option<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub started_unix_ms: u128,
    pub wall_seconds: f64,
    pub threads: usize,
    pub version: String,
    pub tasks: usize,
    /// Tasks recovered from an earlier partial run.
    pub resumed_tasks: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultBundle {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// Nested per-task results (MLE local maxima and likelihood curves).
    pub nested: Vec<serde_json::Value>,
    pub meta: RunMeta,
}

impl ResultBundle {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Unit of parallel work; its rows are written together.
#[derive(Clone, Debug)]
pub(crate) struct Task {
    pub n: usize,
    pub n_a: usize,
    pub sample: usize,
    pub stream: u64,
    pub expected_rows: usize,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct TaskOutput {
    pub rows: Vec<Row>,
    pub nested: Option<serde_json::Value>,
}

/// Runs the experiment in memory.
pub fn run(config: &ExperimentConfig) -> Result<ResultBundle> {
    execute(config, None)
}

/// Runs the experiment and writes `out` (CSV), its sidecar and the nested
/// JSON. Tasks already complete in an existing file from the same config
/// are reused; every finished task is appended before the final rewrite.
pub fn run_to_path(config: &ExperimentConfig) -> Result<ResultBundle> {
    let c = config.resolve()?;
    let path = c.out.clone().expect("resolved config has an output path");
    execute(&c, Some(&path))
}

fn execute(config: &ExperimentConfig, path: Option<&Path>) -> Result<ResultBundle> {
    let c = config.resolve()?;
    let started = Instant::now();
    let started_unix_ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let prepared = experiments::Prepared::new(&c)?;
    let columns = prepared.columns();
    let tasks = prepared.tasks();

    let mut previous = match path {
        Some(p) => output::load_partial(p, &c, &columns)?,
        None => output::Partial::default(),
    };
    let mut outputs: Vec<Option<TaskOutput>> = tasks.iter().map(|t| previous.take(t)).collect();
    let resumed_tasks = outputs.iter().filter(|o| o.is_some()).count();
    let mut writer = match path {
        Some(p) => Some(output::Appender::open(p, &c, &columns, outputs.iter().flatten())?),
        None => None,
    };
    let pending: Vec<usize> = (0..tasks.len()).filter(|&k| outputs[k].is_none()).collect();
    let batch = 2 * rayon::current_num_threads().max(1);
    for chunk in pending.chunks(batch) {
        let done = chunk
            .par_iter()
            .map(|&k| prepared.execute(&tasks[k]).map(|o| (k, o)))
            .collect::<Result<Vec<_>>>()?;
        for (k, o) in done {
            if let Some(w) = writer.as_mut() {
                w.append(&o)?;
            }
            outputs[k] = Some(o);
        }
    }

    let mut rows = Vec::new();
    let mut nested = Vec::new();
    for o in outputs.into_iter().flatten() {
        rows.extend(o.rows);
        nested.extend(o.nested);
    }
    let bundle = ResultBundle {
        format_version: FORMAT_VERSION,
        config: c,
        columns,
        rows,
        nested,
        meta: RunMeta {
            started_unix_ms,
            wall_seconds: started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            tasks: tasks.len(),
            resumed_tasks,
        },
    };
    if let Some(p) = path {
        write_bundle(&bundle, p)?;
    }
    Ok(bundle)
}
