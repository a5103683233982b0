//! Time estimation from measurement records: Born tables on a time grid,
//! maximum likelihood, Cramer-Rao checks and the evolving-vs-equilibrium
//! discrimination protocol.

mod interp;
mod mle;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use interp::Pchip;
pub use mle::{
    cramer_rao_experiment, discriminate_state, mle, mle_in, CramerRaoRow, Decision,
    Discrimination, DiscriminationConfig, MleResult, DEGENERATE_PER_SAMPLE, LOG_P_FLOOR, REFINE_TOL,
};

use crate::dynamics::Evolver;
use crate::error::{invalid, Error, Result};
use crate::hilbert_core::random::sample_outcomes;
use crate::hilbert_core::{MeasurementBasis, Partition, PureState};
use crate::model_library::HamiltonianBundle;

/// Default largest allowed grid spacing.
pub const MAX_GRID_SPACING: f64 = 0.05;

/// Born probabilities `p_xi(t_k)` of one measurement on a time grid.
#[derive(Clone, Debug)]
pub struct LikelihoodTable {
    pub t_grid: Vec<f64>,
    pub basis_id: String,
    pub basis: MeasurementBasis,
    /// Rows are outcomes, columns grid times.
    pub probabilities: Array2<f64>,
    pub warnings: Vec<String>,
    log_interp: Vec<Pchip>,
}

impl LikelihoodTable {
    /// Validates, clamps tiny negatives and renormalizes each column.
    pub fn new(t_grid: Vec<f64>, mut probabilities: Array2<f64>, basis: MeasurementBasis, basis_id: &str) -> Result<Self> {
        if t_grid.len() < 2 || probabilities.ncols() != t_grid.len() {
            return Err(Error::Dimension("table needs one column per grid time and two times".into()));
        }
        if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("time grid must be strictly increasing");
        }
        let mut warnings = Vec::new();
        let spacing = t_grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if spacing > MAX_GRID_SPACING + 1e-12 {
            warnings.push(format!("grid spacing {spacing:.4} exceeds {MAX_GRID_SPACING}"));
        }
        for mut col in probabilities.columns_mut() {
            if col.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
                return invalid("probability table has negative or non-finite entries");
            }
            col.mapv_inplace(|p| p.max(0.0));
            let s = col.sum();
            if (s - 1.0).abs() > 1e-8 {
                return Err(Error::NotNormalized(s));
            }
            col.mapv_inplace(|p| p / s);
        }
        let log_interp = probabilities
            .rows()
            .into_iter()
            .map(|r| {
                let lp: Vec<f64> = r.iter().map(|&p| p.max(f64::MIN_POSITIVE).ln().max(LOG_P_FLOOR)).collect();
                Pchip::new(&t_grid, &lp)
            })
            .collect();
        Ok(LikelihoodTable {
            t_grid,
            basis_id: basis_id.to_string(),
            basis,
            probabilities,
            warnings,
            log_interp,
        })
    }

    pub fn outcomes(&self) -> usize {
        self.probabilities.nrows()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t_grid[0], *self.t_grid.last().expect("grid has two points"))
    }

    /// Interpolated `log p_xi(t)` and its time derivative.
    pub fn log_p(&self, xi: usize, t: f64) -> (f64, f64) {
        self.log_interp[xi].eval_with_derivative(t)
    }

    /// Classical Fisher information `sum p (d log p)^2` from the interpolant.
    pub fn fisher(&self, t: f64) -> f64 {
        (0..self.outcomes())
            .map(|xi| {
                let (lp, d) = self.log_p(xi, t);
                if lp <= LOG_P_FLOOR + 1e-9 {
                    0.0
                } else {
                    lp.exp() * d * d
                }
            })
            .sum()
    }

    /// Whether outcome `xi` has zero probability at every grid time.
    pub fn impossible(&self, xi: usize) -> bool {
        self.probabilities.row(xi).iter().all(|&p| p <= 1e-300)
    }
}

/// Born table for `psi0` evolved under `bundle` and measured on A.
pub fn likelihood_table(
    psi0: &PureState,
    bundle: &HamiltonianBundle,
    partition: &Partition,
    basis: &MeasurementBasis,
    t_grid: &[f64],
) -> Result<LikelihoodTable> {
    if partition.n_total() != psi0.n_sites() {
        return Err(Error::Dimension("partition does not match state".into()));
    }
    let ev = Evolver::new(bundle, psi0)?;
    let states = ev.states_at(t_grid)?;
    let d_a = partition.d_a();
    let mut probs = Array2::<f64>::zeros((d_a, t_grid.len()));
    for (k, psi) in states.iter().enumerate() {
        let p = match basis {
            MeasurementBasis::Computational => {
                let m = partition.reshape(psi.amplitudes())?;
                m.rows().into_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
            }
            MeasurementBasis::Custom(_) => basis.probabilities(&partition.reduce_pure(psi.amplitudes())?)?,
        };
        for (xi, v) in p.into_iter().enumerate() {
            probs[[xi, k]] = v;
        }
    }
    let id = match basis {
        MeasurementBasis::Computational => "computational",
        MeasurementBasis::Custom(_) => "custom",
    };
    LikelihoodTable::new(t_grid.to_vec(), probs, basis.clone(), id)
}

/// Outcomes `xi_1 ... xi_N`; the true time is stored only for scoring.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSet {
    pub outcomes: Vec<usize>,
    pub true_t0: f64,
    pub seed: u64,
}

impl SampleSet {
    /// Draws `count` outcomes from the exact distribution `p`.
    pub fn draw(p: &[f64], count: usize, true_t0: f64, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = crate::hilbert_core::stream_rng(seed, stream);
        Ok(SampleSet {
            outcomes: sample_outcomes(p, count, &mut rng)?,
            true_t0,
            seed,
        })
    }

    /// Histogram over `outcomes` outcomes.
    pub fn counts(&self, outcomes: usize) -> Result<Vec<usize>> {
        let mut c = vec![0usize; outcomes];
        for &x in &self.outcomes {
            if x >= outcomes {
                return invalid(format!("outcome {x} outside basis of size {outcomes}"));
            }
            c[x] += 1;
        }
        Ok(c)
    }
}

/// Uniform grid from `lo` to `hi` with spacing at most `max_spacing`.
pub fn uniform_grid(lo: f64, hi: f64, max_spacing: f64) -> Vec<f64> {
    let k = ((hi - lo) / max_spacing).ceil().max(1.0) as usize;
    (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
}
