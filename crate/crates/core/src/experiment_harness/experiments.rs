use std::collections::BTreeMap;

use rand::RngCore;
use serde_json::json;

use super::{ExperimentConfig, ExperimentId, Row, Task, TaskOutput};
use crate::analytic_predictions::{
    bgue_curves, bh_radiation_qfi, cfi_saturation, codeword_fidelity_ensemble, haar_saturation_fa, headline_saturation,
    outcome_ks_test, sample_outcome_probabilities, trace_distance_full, trace_distance_monte_carlo, trace_distance_sub,
    trace_distance_sub_limit, BgueSpec, BlackHoleSpec, CfiSaturation, RadiationQfi,
};
use crate::dynamics::{lindblad_apply, lindblad_gap, lindblad_rk4, Evolver, MAX_GAP_SITES};
use crate::error::{Error, Result};
use crate::estimation_lab::{
    discriminate_state, likelihood_table, mle, Decision, DiscriminationConfig, LikelihoodTable, SampleSet,
};
use crate::fisher_metrics::{qfi, subsystem_qfi, FisherOptions};
use crate::hilbert_core::{partial_trace, random_product_state, stream_rng, DensityMatrix, MeasurementBasis, Partition, PureState};
use crate::model_library::{boundary_depolarizing_jumps, HamiltonianBundle, LindbladSpec};

/// Stream of sample `sample` in slot `(n, n_a, k)`.
pub(crate) fn stream_of(n: usize, n_a: usize, k: usize, sample: usize) -> u64 {
    ((n as u64) << 56) | ((n_a as u64) << 48) | ((k as u64) << 40) | sample as u64
}

/// Seed handed to routines that manage their own streams.
pub(crate) fn derive_seed(master: u64, stream: u64) -> u64 {
    stream_rng(master, stream).next_u64()
}

/// Fixed initial state of the estimation experiments for chain length `n`.
const STATE_SLOT: usize = 0xff;

struct EstimationSetup {
    table: LikelihoodTable,
    p_true: Vec<f64>,
    rho_t0: DensityMatrix,
}

/// Everything shared by the tasks of one run: Hamiltonians with their
/// spectra, and per-(n, n_A) predictions.
pub(crate) struct Prepared {
    c: ExperimentConfig,
    times: Vec<f64>,
    bundles: BTreeMap<usize, HamiltonianBundle>,
    cfi_sat: BTreeMap<(usize, usize), CfiSaturation>,
    haar: BTreeMap<(usize, usize), [f64; 3]>,
    lindblad: BTreeMap<usize, (LindbladSpec, f64)>,
    estimation: BTreeMap<(usize, usize), EstimationSetup>,
    bgue: BTreeMap<(usize, usize), BgueSpec>,
}

fn nan_opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

impl Prepared {
    pub fn new(c: &ExperimentConfig) -> Result<Self> {
        use ExperimentId::*;
        let e = c.experiment;
        let model = c.model.clone().unwrap_or_default();
        let mut p = Prepared {
            c: c.clone(),
            times: c.times(),
            bundles: BTreeMap::new(),
            cfi_sat: BTreeMap::new(),
            haar: BTreeMap::new(),
            lindblad: BTreeMap::new(),
            estimation: BTreeMap::new(),
            bgue: BTreeMap::new(),
        };
        if !matches!(e, Lindblad | Blackhole | Tracedist) {
            for &n in &c.n {
                let b = model.build(n)?;
                if !matches!(e, Fidelity | Bgue) {
                    b.spectrum()?;
                }
                p.bundles.insert(n, b);
            }
        }
        for &n in &c.n {
            for &a in &c.n_a {
                match e {
                    CfiScan => {
                        let part = Partition::leading(n, a)?;
                        p.cfi_sat.insert((n, a), cfi_saturation(&p.bundles[&n], &part)?);
                    }
                    HaarSat => {
                        p.haar.insert((n, a), haar_predictions(&p.bundles[&n], n, a)?);
                    }
                    Mle | Discriminate => {
                        p.estimation.insert((n, a), estimation_setup(c, &p.bundles[&n], &p.times, n, a)?);
                    }
                    Bgue => {
                        p.bgue.insert((n, a), BgueSpec::new(&p.bundles[&n], a, c.master_seed)?);
                    }
                    _ => {}
                }
            }
        }
        if e == Lindblad {
            for &a in &c.n_a {
                let spec = boundary_depolarizing_jumps(a, c.params.gamma)?;
                let gap = if a <= MAX_GAP_SITES { lindblad_gap(&spec)? } else { f64::NAN };
                p.lindblad.insert(a, (spec, gap));
            }
        }
        Ok(p)
    }

    pub fn columns(&self) -> Vec<String> {
        use ExperimentId::*;
        let names: &[&str] = match self.c.experiment {
            QfiScan | XxzScan => &["f_a", "f_ent", "f_rot", "f_comp", "f_full", "energy", "variance", "rank"],
            CfiScan => &["f_comp", "f_a", "sat_subsystem", "sat_full", "sat_complement", "sat_gaussian"],
            HaarSat => &["f_a", "f_ent", "f_rot", "haar_headline", "haar_exact", "haar_thermo"],
            Lindblad => &["entropy", "qfi", "gap", "trace"],
            Mle => &["n_meas", "t0", "t_est", "abs_error", "log_likelihood", "degenerate", "local_maxima", "fisher_t0"],
            Discriminate => &["n_meas", "t0", "truth", "decision", "correct", "confidence", "variance", "cr_variance"],
            Bgue => &["f_s", "f_b", "f_ent", "f_rot", "f_s_plus", "f_s_minus", "f_b_plus", "h2"],
            Tracedist => &["td_full", "td_sub", "td_sub_limit", "mc_mean", "mc_std_err", "ks_statistic", "ks_p_value"],
            Fidelity => &["mean", "std_err", "predicted"],
            Blackhole => &["mass", "temperature", "variance", "s_black_hole", "s_radiation", "post_page", "log_f_r", "page_time"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Tasks in output order.
    pub fn tasks(&self) -> Vec<Task> {
        use ExperimentId::*;
        let c = &self.c;
        let s = c.sample_count();
        let nt = self.times.len();
        let mut tasks = Vec::new();
        let mut push = |n, n_a, k, sample, expected_rows| {
            tasks.push(Task {
                n,
                n_a,
                sample,
                stream: stream_of(n, n_a, k, sample),
                expected_rows,
            })
        };
        match c.experiment {
            QfiScan | XxzScan | CfiScan | HaarSat => {
                for &n in &c.n {
                    let k = c.n_a.iter().filter(|&&a| a <= n).count();
                    for sample in 0..s {
                        push(n, 0, 0, sample, k * nt);
                    }
                }
            }
            Lindblad => {
                for &a in &c.n_a {
                    for sample in 0..s {
                        push(a, a, 0, sample, nt);
                    }
                }
            }
            Mle => {
                for &n in &c.n {
                    for &a in &c.n_a {
                        for k in 0..c.params.n_meas.len() {
                            for sample in 0..s {
                                push(n, a, k, sample, 1);
                            }
                        }
                    }
                }
            }
            Discriminate => {
                for &n in &c.n {
                    for &a in &c.n_a {
                        for k in 0..c.params.n_meas.len() {
                            for truth in [1, 0] {
                                for sample in 0..s {
                                    push(n, a, 2 * k + truth, sample, 1);
                                }
                            }
                        }
                    }
                }
            }
            Bgue => {
                for &n in &c.n {
                    for &a in &c.n_a {
                        push(n, a, 0, 0, nt);
                    }
                }
            }
            Tracedist | Fidelity => {
                for &n in &c.n {
                    for &a in &c.n_a {
                        push(n, a, 0, 0, 1);
                    }
                }
            }
            Blackhole => push(0, 0, 0, 0, nt),
        }
        tasks
    }

    fn row(&self, task: &Task, n_a: usize, t: Option<f64>, values: Vec<f64>) -> Row {
        Row {
            n: task.n,
            n_a,
            sample: task.sample,
            seed: self.c.master_seed,
            stream: task.stream,
            t,
            values,
        }
    }

    pub fn execute(&self, task: &Task) -> Result<TaskOutput> {
        use ExperimentId::*;
        match self.c.experiment {
            QfiScan | XxzScan | CfiScan | HaarSat => self.scan(task),
            Lindblad => self.lindblad(task),
            Mle => self.mle(task),
            Discriminate => self.discriminate(task),
            Bgue => {
                let spec = &self.bgue[&(task.n, task.n_a)];
                let rows = bgue_curves(spec, &self.times)?
                    .into_iter()
                    .map(|q| {
                        let v = vec![q.f_s, q.f_b, q.f_ent, q.f_rot, q.f_s_plus, q.f_s_minus, q.f_b_plus, q.h2];
                        self.row(task, task.n_a, Some(q.t), v)
                    })
                    .collect();
                Ok(TaskOutput { rows, nested: None })
            }
            Tracedist => self.tracedist(task),
            Fidelity => {
                let seed = derive_seed(self.c.master_seed, task.stream);
                let part = Partition::leading(task.n, task.n_a)?;
                let r = codeword_fidelity_ensemble(&self.bundles[&task.n], &part, self.c.sample_count(), seed)?;
                let mut row = self.row(task, task.n_a, None, vec![r.mean, r.std_err, r.predicted]);
                row.seed = seed;
                Ok(TaskOutput {
                    rows: vec![row],
                    nested: None,
                })
            }
            Blackhole => self.blackhole(task),
        }
    }

    /// Closed-system ensemble: one random product state per task, all
    /// subsystem sizes and times.
    fn scan(&self, task: &Task) -> Result<TaskOutput> {
        let e = self.c.experiment;
        let bundle = &self.bundles[&task.n];
        let psi0 = random_product_state(task.n, &mut stream_rng(self.c.master_seed, task.stream))?;
        let states = Evolver::new(bundle, &psi0)?.states_at(&self.times)?;
        let opts = FisherOptions {
            with_eta: false,
            with_comp: matches!(e, ExperimentId::QfiScan | ExperimentId::XxzScan | ExperimentId::CfiScan),
            ..Default::default()
        };
        let mut rows = Vec::new();
        for &a in self.c.n_a.iter().filter(|&&a| a <= task.n) {
            let part = Partition::leading(task.n, a)?;
            for (psi, &t) in states.iter().zip(&self.times) {
                let r = subsystem_qfi(psi, bundle, &part, opts)?;
                let v = match e {
                    ExperimentId::CfiScan => {
                        let s = &self.cfi_sat[&(task.n, a)];
                        vec![nan_opt(r.f_comp), r.f_a, s.subsystem, s.full, s.complement, s.subsystem_gaussian]
                    }
                    ExperimentId::HaarSat => {
                        let h = self.haar[&(task.n, a)];
                        vec![r.f_a, r.f_ent, r.f_rot, h[0], h[1], h[2]]
                    }
                    _ => vec![r.f_a, r.f_ent, r.f_rot, nan_opt(r.f_comp), r.f_full, r.energy, r.variance, r.rank as f64],
                };
                rows.push(self.row(task, a, Some(t), v));
            }
        }
        Ok(TaskOutput { rows, nested: None })
    }

    fn lindblad(&self, task: &Task) -> Result<TaskOutput> {
        let (spec, gap) = &self.lindblad[&task.n_a];
        let psi0 = random_product_state(task.n_a, &mut stream_rng(self.c.master_seed, task.stream))?;
        let traj = lindblad_rk4(spec, &psi0.density(), &self.times, self.c.params.dt)?;
        let mut rows = Vec::new();
        for (rho, &t) in traj.states.iter().zip(&traj.times) {
            let drho = lindblad_apply(spec, rho.matrix())?;
            let f = qfi(rho, &drho)?.value;
            let tr: f64 = rho.matrix().diag().iter().map(|z| z.re).sum();
            rows.push(self.row(task, task.n_a, Some(t), vec![rho.entropy()?, f, *gap, tr]));
        }
        Ok(TaskOutput { rows, nested: None })
    }

    fn mle(&self, task: &Task) -> Result<TaskOutput> {
        let setup = &self.estimation[&(task.n, task.n_a)];
        let k = ((task.stream >> 40) & 0xff) as usize;
        let n_meas = self.c.params.n_meas[k];
        let t0 = self.c.params.t0;
        let samples = SampleSet::draw(&setup.p_true, n_meas, t0, self.c.master_seed, task.stream)?;
        let r = mle(&samples, &setup.table)?;
        let v = vec![
            n_meas as f64,
            t0,
            r.t_est,
            (r.t_est - t0).abs(),
            r.log_likelihood,
            if r.degenerate { 1.0 } else { 0.0 },
            r.local_maxima.len() as f64,
            setup.table.fisher(t0),
        ];
        let nested = json!({
            "n": task.n,
            "n_a": task.n_a,
            "n_meas": n_meas,
            "sample": task.sample,
            "stream": task.stream,
            "t_est": r.t_est,
            "local_maxima": r.local_maxima,
            "loglik_curve": r.loglik_curve,
        });
        Ok(TaskOutput {
            rows: vec![self.row(task, task.n_a, Some(t0), v)],
            nested: Some(nested),
        })
    }

    fn discriminate(&self, task: &Task) -> Result<TaskOutput> {
        let setup = &self.estimation[&(task.n, task.n_a)];
        let slot = ((task.stream >> 40) & 0xff) as usize;
        let (k, truth) = (slot / 2, slot % 2);
        let n_meas = self.c.params.n_meas[k];
        let p = &self.c.params;
        let copy = if truth == 1 {
            setup.rho_t0.clone()
        } else {
            DensityMatrix::maximally_mixed(task.n_a)
        };
        let seed = derive_seed(self.c.master_seed, task.stream);
        let d = discriminate_state(
            &[copy],
            &setup.table,
            DiscriminationConfig {
                n_per_trial: n_meas,
                trials: p.trials,
                kappa: p.kappa,
                max_spread_fraction: p.max_spread_fraction,
                seed,
            },
        )?;
        let decided = if d.decision == Decision::Evolving { 1.0 } else { 0.0 };
        let v = vec![
            n_meas as f64,
            p.t0,
            truth as f64,
            decided,
            if decided == truth as f64 { 1.0 } else { 0.0 },
            d.confidence,
            d.variance,
            d.cr_variance,
        ];
        let mut row = self.row(task, task.n_a, Some(p.t0), v);
        row.seed = seed;
        Ok(TaskOutput {
            rows: vec![row],
            nested: None,
        })
    }

    fn tracedist(&self, task: &Task) -> Result<TaskOutput> {
        let (n, n_abar) = (task.n, task.n - task.n_a);
        let d = (1u64 << n) as f64;
        let d_abar = (1u64 << n_abar) as f64;
        let s = self.c.sample_count();
        let seed = derive_seed(self.c.master_seed, task.stream);
        let mc = trace_distance_monte_carlo(n, n_abar, s, seed)?;
        let probs = sample_outcome_probabilities(n, n_abar, s, seed ^ 0x5bd1_e995)?;
        let ks = outcome_ks_test(&probs, d, d_abar)?;
        let v = vec![
            trace_distance_full(d)?,
            trace_distance_sub(d, d_abar)?,
            trace_distance_sub_limit(d_abar)?,
            mc.mean,
            mc.std_err,
            ks.statistic,
            ks.p_value,
        ];
        let mut row = self.row(task, task.n_a, None, v);
        row.seed = seed;
        Ok(TaskOutput {
            rows: vec![row],
            nested: None,
        })
    }

    fn blackhole(&self, task: &Task) -> Result<TaskOutput> {
        let p = &self.c.params;
        let spec = BlackHoleSpec::new(p.m0, p.g_newton, p.alpha)?;
        let page = spec.page_time();
        let mut rows = Vec::new();
        for &t in &self.times {
            let r = bh_radiation_qfi(&spec, t)?;
            let (post, log_f) = match r.qfi {
                RadiationQfi::Extensive { value } => (1.0, value.ln()),
                RadiationQfi::Suppressed { variance, exponent } => (0.0, variance.ln() - exponent),
            };
            let v = vec![r.mass, r.temperature, r.variance, r.s_black_hole, r.s_radiation, post, log_f, page];
            rows.push(self.row(task, 0, Some(t), v));
        }
        Ok(TaskOutput { rows, nested: None })
    }
}

/// `[headline, exact Haar average, thermodynamic limit]` for F_A.
fn haar_predictions(bundle: &HamiltonianBundle, n: usize, a: usize) -> Result<[f64; 3]> {
    if a >= n {
        return Ok([f64::NAN; 3]);
    }
    let part = Partition::leading(n, a)?;
    let head = headline_saturation(bundle, &part)?;
    if 2 * a <= n {
        let h = haar_saturation_fa(bundle, &part)?;
        Ok([head, h.f_s, h.f_s_thermo])
    } else {
        let h = haar_saturation_fa(bundle, &part.complement())?;
        Ok([head, h.f_b, h.f_b_thermo])
    }
}

fn estimation_setup(c: &ExperimentConfig, bundle: &HamiltonianBundle, times: &[f64], n: usize, a: usize) -> Result<EstimationSetup> {
    let psi0: PureState = random_product_state(n, &mut stream_rng(c.master_seed, stream_of(n, 0, STATE_SLOT, 0)))?;
    let part = Partition::leading(n, a)?;
    let table = likelihood_table(&psi0, bundle, &part, &MeasurementBasis::Computational, times)?;
    let psi_t0 = Evolver::new(bundle, &psi0)?.state_at(c.params.t0)?;
    let rho_t0 = partial_trace(&psi_t0, &part)?;
    let p_true = MeasurementBasis::Computational.probabilities(rho_t0.matrix())?;
    if p_true.len() != table.outcomes() {
        return Err(Error::Dimension("outcome count differs from table".into()));
    }
    Ok(EstimationSetup { table, p_true, rho_t0 })
}
