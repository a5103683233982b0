use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LikelihoodTable, SampleSet};
use crate::error::{invalid, Error, Result};
use crate::hilbert_core::DensityMatrix;
use crate::stats::{mean, median, variance};

/// `log(1e-300)`: floor applied to log-probabilities before interpolation.
pub const LOG_P_FLOOR: f64 = -690.7755278982137;
/// Golden-section tolerance on the time axis.
pub const REFINE_TOL: f64 = 1e-4;
/// Flat likelihood when `max l - min l < DEGENERATE_PER_SAMPLE * N`.
pub const DEGENERATE_PER_SAMPLE: f64 = 1e-6;
/// Report local maxima within this much of the global maximum.
const MAXIMA_WINDOW: f64 = 2.0;
/// Scan points per grid interval.
const SCAN_REFINE: usize = 4;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MleResult {
    pub t_est: f64,
    pub log_likelihood: f64,
    /// `(t, l(t))` at the scan points.
    pub loglik_curve: Vec<(f64, f64)>,
    /// Refined local maxima `(t, l)` above `global - 2`, by time.
    pub local_maxima: Vec<(f64, f64)>,
    /// `(t_est - t0)^2`.
    pub score: f64,
    pub degenerate: bool,
}

pub fn mle(samples: &SampleSet, table: &LikelihoodTable) -> Result<MleResult> {
    mle_in(samples, table, table.range())
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > REFINE_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Maximum-likelihood time within `range`: scan, then golden-section
/// refinement around every local maximum of the scan.
pub fn mle_in(samples: &SampleSet, table: &LikelihoodTable, range: (f64, f64)) -> Result<MleResult> {
    if samples.outcomes.is_empty() {
        return invalid("no samples");
    }
    let (lo, hi) = range;
    let (g0, g1) = table.range();
    if !(lo < hi) || lo < g0 - 1e-12 || hi > g1 + 1e-12 {
        return invalid(format!("search range [{lo}, {hi}] must lie inside the grid [{g0}, {g1}]"));
    }
    let counts = samples.counts(table.outcomes())?;
    let observed: Vec<(usize, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(xi, &c)| (xi, c as f64))
        .collect();
    if let Some(&(xi, _)) = observed.iter().find(|(xi, _)| table.impossible(*xi)) {
        return Err(Error::ImpossibleOutcome(xi));
    }
    let ell = |t: f64| -> f64 { observed.iter().map(|&(xi, c)| c * table.log_p(xi, t).0).sum() };

    let mut scan: Vec<f64> = vec![lo];
    for w in table.t_grid.windows(2) {
        for k in 1..=SCAN_REFINE {
            let t = w[0] + (w[1] - w[0]) * k as f64 / SCAN_REFINE as f64;
            if t > lo && t < hi {
                scan.push(t);
            }
        }
    }
    scan.push(hi);
    let curve: Vec<(f64, f64)> = scan.iter().map(|&t| (t, ell(t))).collect();
    let (lmin, lmax) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, l)| (a.min(l), b.max(l)));
    let n = samples.outcomes.len() as f64;
    let degenerate = lmax - lmin < DEGENERATE_PER_SAMPLE * n;

    let m = curve.len();
    let mut maxima: Vec<(f64, f64)> = Vec::new();
    for k in 0..m {
        let l = curve[k].1;
        let left = if k > 0 { curve[k - 1].1 } else { f64::NEG_INFINITY };
        let right = if k + 1 < m { curve[k + 1].1 } else { f64::NEG_INFINITY };
        if l >= left && l > right || l > left && l >= right {
            let a = curve[k.saturating_sub(1)].0;
            let b = curve[(k + 1).min(m - 1)].0;
            let (t, v) = golden_max(&ell, a, b);
            maxima.push(if v >= l { (t, v) } else { curve[k] });
        }
    }
    if maxima.is_empty() {
        // flat curve: every point ties
        maxima.push(curve[0]);
    }
    let best = maxima
        .iter()
        .cloned()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    maxima.retain(|&(_, l)| l > best.1 - MAXIMA_WINDOW);
    maxima.sort_by(|a, b| a.0.total_cmp(&b.0));
    maxima.dedup_by(|a, b| (a.0 - b.0).abs() < 2.0 * REFINE_TOL);
    Ok(MleResult {
        t_est: best.0,
        log_likelihood: best.1,
        loglik_curve: curve,
        local_maxima: maxima,
        score: (best.0 - samples.true_t0).powi(2),
        degenerate,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CramerRaoRow {
    pub n: usize,
    pub repetitions: usize,
    pub mean_estimate: f64,
    /// Sample variance of the estimates about their mean.
    pub variance: f64,
    /// Mean squared error about the true time.
    pub mse: f64,
    /// `1 / (N f(t0))`; infinite when `f = 0`.
    pub bound: f64,
    pub ratio: f64,
    pub degenerate_runs: usize,
    /// No finite bound or every run had a flat likelihood.
    pub unbounded: bool,
}

/// Repeats the estimation `repetitions` times for every `N`. Outcomes are
/// drawn from `p_true`, the exact distribution at `t0`; `fisher` is the
/// exact classical Fisher information there.
pub fn cramer_rao_experiment(
    table: &LikelihoodTable,
    p_true: &[f64],
    fisher: f64,
    t0: f64,
    n_list: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<CramerRaoRow>> {
    if repetitions < 2 {
        return invalid("need at least two repetitions");
    }
    if p_true.len() != table.outcomes() {
        return Err(Error::Dimension("true distribution does not match table".into()));
    }
    n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let runs = (0..repetitions)
                .into_par_iter()
                .map(|r| {
                    let s = SampleSet::draw(p_true, n, t0, seed, ((ni as u64) << 32) | r as u64)?;
                    mle(&s, table)
                })
                .collect::<Result<Vec<_>>>()?;
            let est: Vec<f64> = runs.iter().map(|r| r.t_est).collect();
            let degenerate_runs = runs.iter().filter(|r| r.degenerate).count();
            let bound = if fisher > 0.0 { 1.0 / (n as f64 * fisher) } else { f64::INFINITY };
            let var = variance(&est);
            Ok(CramerRaoRow {
                n,
                repetitions,
                mean_estimate: mean(&est),
                variance: var,
                mse: est.iter().map(|t| (t - t0).powi(2)).sum::<f64>() / est.len() as f64,
                bound,
                ratio: var / bound,
                degenerate_runs,
                unbounded: !bound.is_finite() || degenerate_runs == repetitions,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Evolving,
    Equilibrium,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DiscriminationConfig {
    pub n_per_trial: usize,
    pub trials: usize,
    /// Evolving requires `variance <= kappa / (N f(t_median))`.
    pub kappa: f64,
    /// ... and a spread below this fraction of the search range.
    pub max_spread_fraction: f64,
    pub seed: u64,
}

impl Default for DiscriminationConfig {
    fn default() -> Self {
        DiscriminationConfig {
            n_per_trial: 50,
            trials: 10,
            kappa: 4.0,
            max_spread_fraction: 0.01,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Discrimination {
    pub decision: Decision,
    /// Fraction of trials agreeing with the decision.
    pub confidence: f64,
    pub estimates: Vec<f64>,
    pub median: f64,
    pub variance: f64,
    /// `1 / (N f(median))` from the table.
    pub cr_variance: f64,
    pub degenerate_trials: usize,
}

/// Measures batches of copies of an unknown state, estimates the time in
/// every batch and asks whether the estimates cluster at the Cramer-Rao
/// width. Batch `k` draws its outcomes from copy `k mod copies.len()`.
pub fn discriminate_state(copies: &[DensityMatrix], table: &LikelihoodTable, cfg: DiscriminationConfig) -> Result<Discrimination> {
    if cfg.trials < 3 {
        return invalid(format!("need at least 3 trials, got {}", cfg.trials));
    }
    if copies.is_empty() || cfg.n_per_trial == 0 {
        return invalid("need copies and a positive batch size");
    }
    let probs = copies
        .iter()
        .map(|c| {
            if c.dim() != table.outcomes() {
                return Err(Error::Dimension("copy does not match the table's basis".into()));
            }
            table.basis.probabilities(c.matrix())
        })
        .collect::<Result<Vec<_>>>()?;
    let runs = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let s = SampleSet::draw(&probs[k % probs.len()], cfg.n_per_trial, f64::NAN, cfg.seed, k as u64)?;
            match mle(&s, table) {
                // an outcome the evolving model forbids cannot come from it
                Err(Error::ImpossibleOutcome(_)) => Ok(None),
                other => other.map(Some),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = table.range();
    let degenerate_trials = runs.iter().filter(|r| r.as_ref().map_or(true, |r| r.degenerate)).count();
    let estimates: Vec<f64> = runs.iter().flatten().map(|r| r.t_est).collect();
    let med = median(&estimates);
    let var = if estimates.len() >= 2 { variance(&estimates) } else { f64::INFINITY };
    let f = if med.is_finite() { table.fisher(med) } else { 0.0 };
    let cr_variance = if f > 0.0 { 1.0 / (cfg.n_per_trial as f64 * f) } else { f64::INFINITY };
    let evolving = degenerate_trials * 2 < cfg.trials
        && cr_variance.is_finite()
        && var <= cfg.kappa * cr_variance
        && var <= (cfg.max_spread_fraction * (hi - lo)).powi(2);
    let width = 3.0 * cr_variance.sqrt();
    let close = estimates.iter().filter(|t| (*t - med).abs() <= width).count() as f64 / cfg.trials as f64;
    Ok(Discrimination {
        decision: if evolving { Decision::Evolving } else { Decision::Equilibrium },
        confidence: if evolving { close } else { 1.0 - close },
        estimates,
        median: med,
        variance: var,
        cr_variance,
        degenerate_trials,
    })
}
