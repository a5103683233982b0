//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per check and exits non-zero if any check fails.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, LN_2};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{Binomial, Discrete};

use chronoscope::analytic_predictions::{
    bgue_f, bgue_point, cfi_saturation, codeword_fidelity_ensemble, haar_saturation_fa, outcome_ks_test,
    sample_outcome_probabilities, trace_distance_full, trace_distance_monte_carlo, trace_distance_sub, BgueSpec,
};
use chronoscope::dynamics::{
    fit_exponential_decay, lindblad_apply, lindblad_gap, lindblad_rk4, reduced_state_and_derivative, DecayWindow,
    Evolver,
};
use chronoscope::estimation_lab::{
    cramer_rao_experiment, discriminate_state, likelihood_table, mle, uniform_grid, Decision, DiscriminationConfig,
    SampleSet,
};
use chronoscope::experiment_harness::{run, summarize, ExperimentConfig, ExperimentId, Reduction};
use chronoscope::fisher_metrics::{bures_distance, qfi, subsystem_qfi, FisherOptions, FisherReport};
use chronoscope::hilbert_core::linalg::{dagger, hermitian_eig};
use chronoscope::hilbert_core::{random_product_state, stream_rng, DensityMatrix, MeasurementBasis, Partition, PureState};
use chronoscope::model_library::{
    boundary_depolarizing_jumps, build_mixed_field_ising, materialize_on, Boundary,
    HamiltonianBundle, Pauli, PauliTerm, CHAOTIC_G, CHAOTIC_H,
};
use chronoscope::stats::{linear_fit, mean, std_err};
use chronoscope::C64;

const SEED: u64 = 20240611;

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id.to_string(), pass));
    }
}

fn chaotic(n: usize) -> &'static HamiltonianBundle {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static HamiltonianBundle>>> = OnceLock::new();
    let mut m = CACHE.get_or_init(Default::default).lock().unwrap();
    m.entry(n).or_insert_with(|| {
        let b = build_mixed_field_ising(n, CHAOTIC_G, CHAOTIC_H, Boundary::Periodic).unwrap();
        b.spectrum().unwrap();
        Box::leak(Box::new(b))
    })
}

fn product(n: usize, stream: u64) -> PureState {
    random_product_state(n, &mut stream_rng(SEED, stream)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn late_times() -> Vec<f64> {
    (0..=10).map(|k| 15.0 + 0.5 * k as f64).collect()
}

/// Ensemble mean over samples of the per-sample late-window average.
fn late_mean(
    bundle: &HamiltonianBundle,
    part: &Partition,
    samples: usize,
    stream0: u64,
    opts: FisherOptions,
    pick: impl Fn(&FisherReport) -> f64,
) -> (f64, f64) {
    let times = late_times();
    let per: Vec<f64> = (0..samples)
        .map(|s| {
            let psi0 = product(bundle.n_sites(), stream0 + s as u64);
            let states = Evolver::new(bundle, &psi0).unwrap().states_at(&times).unwrap();
            mean(&states
                .iter()
                .map(|psi| pick(&subsystem_qfi(psi, bundle, part, opts).unwrap()))
                .collect::<Vec<_>>())
        })
        .collect();
    (mean(&per), std_err(&per))
}

fn c1(r: &mut Report) {
    let bundle = chaotic(8);
    let full = Partition::leading(8, 8).unwrap();
    let mut worst = 0.0f64;
    for s in 0..20 {
        let psi0 = product(8, 100 + s);
        let (_, var0) = bundle.energy_and_variance(psi0.amplitudes()).unwrap();
        let ev = Evolver::new(bundle, &psi0).unwrap();
        for t in [0.0, 1.0, 5.0, 10.0, 20.0] {
            let psi = ev.state_at(t).unwrap();
            // SLD formula on the projector against the moment formula at t = 0
            let (rho, drho) = reduced_state_and_derivative(&psi, bundle, &full).unwrap();
            let f = qfi(&rho, &drho).unwrap().value;
            worst = worst.max(rel(f, 4.0 * var0));
        }
    }
    r.check("C1 full-system QFI = 4 Var(H)", worst < 1e-7, format!("max relative deviation {worst:.2e} (tol 1e-7)"));
}

fn c2(r: &mut Report) {
    let bundle = chaotic(8);
    let (mut plus, mut minus, mut split, mut unc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for s in 0..5 {
        let ev = Evolver::new(bundle, &product(8, 200 + s)).unwrap();
        // the plus-sum rule needs a full-rank Schmidt spectrum, which the
        // product state at t = 0 lacks
        for t in [0.5, 1.0, 5.0, 10.0, 20.0] {
            let psi = ev.state_at(t).unwrap();
            for n_a in 1..8 {
                let p = Partition::leading(8, n_a).unwrap();
                let a = subsystem_qfi(&psi, bundle, &p, FisherOptions::default()).unwrap();
                let b = subsystem_qfi(&psi, bundle, &p.complement(), FisherOptions::default()).unwrap();
                let h2 = a.variance + a.energy * a.energy;
                plus = plus.max((a.f_plus + b.f_plus - 2.0 * h2).abs());
                minus = minus.max((a.f_minus_re - b.f_minus_re).abs().max((a.f_minus_im - b.f_minus_im).abs()));
                split = split.max((a.f_a - a.f_ent - a.f_rot).abs());
                let lhs = a.f_a / a.f_full + a.f_eta_complement.unwrap() * a.variance;
                unc = unc.max((lhs - 1.0).abs());
            }
        }
    }
    r.check("C2a F_S,+ + F_B,+ = 2<H^2>", plus < 1e-8, format!("max |dev| {plus:.2e} (tol 1e-8)"));
    r.check("C2b F_S,- = F_B,-", minus < 1e-8, format!("max |dev| {minus:.2e} (tol 1e-8)"));
    r.check("C2c F_A = F_ent + F_rot", split < 1e-8, format!("max |dev| {split:.2e} (tol 1e-8)"));
    r.check("C2d uncertainty relation", unc < 1e-6, format!("max |lhs - 1| {unc:.2e} (tol 1e-6)"));
}

fn gaussian_matrix<R: Rng>(d: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn c3(r: &mut Report) {
    let h = 5e-3;
    let mut worst = 0.0f64;
    for s in 0..10 {
        let mut rng = stream_rng(SEED, 300 + s);
        let g = gaussian_matrix(8, &mut rng);
        let w = g.dot(&dagger(&g.view()));
        let tr: f64 = w.diag().iter().map(|z| z.re).sum();
        let rho = w.mapv(|z| z / tr);
        let a = gaussian_matrix(8, &mut rng);
        let k = (&a + &dagger(&a.view())).mapv(|z| z * 0.5);
        let i = C64::new(0.0, 1.0);
        let drho = (k.dot(&rho) - rho.dot(&k)).mapv(|z| -i * z);
        let rho_dm = DensityMatrix::new(3, rho.clone()).unwrap();
        let sld = qfi(&rho_dm, &drho).unwrap().value;

        let (ev, v) = hermitian_eig(&k).unwrap();
        let rotate = |theta: f64| {
            let mut u = v.clone();
            for (j, mut col) in u.columns_mut().into_iter().enumerate() {
                let ph = C64::from_polar(1.0, -ev[j] * theta);
                col.mapv_inplace(|z| z * ph);
            }
            let u = u.dot(&dagger(&v.view()));
            DensityMatrix::new(3, u.dot(&rho).dot(&dagger(&u.view()))).unwrap()
        };
        let d = bures_distance(&rotate(-h), &rotate(h)).unwrap();
        let bures = 4.0 * d * d / (2.0 * h).powi(2);
        worst = worst.max(rel(sld, bures));
    }
    r.check("C3 SLD QFI = Bures oracle", worst < 1e-3, format!("max relative deviation {worst:.2e} (tol 1e-3)"));
}

fn c4(r: &mut Report) {
    let mut c = ExperimentConfig::new(ExperimentId::HaarSat);
    c.n = vec![10];
    c.n_a = (1..10).collect();
    c.samples = Some(100);
    c.master_seed = SEED;
    let b = run(&c).unwrap();
    let s = summarize(&b, Reduction::Mean, [15.0, 20.0]).unwrap();
    let small: Vec<_> = s.collapse.iter().filter(|p| p.n_a < 5).collect();
    let xs: Vec<f64> = small.iter().map(|p| p.x as f64).collect();
    let ys: Vec<f64> = small.iter().map(|p| p.log_value).collect();
    let fit = linear_fit(&xs, &ys).unwrap();
    // x = 2 n_A - n moves by 2 per added site, and d_A / d_abar by 4
    let per_site = 2.0 * fit.slope;
    let target = 4f64.ln();
    // the finite-size Haar average, whose slope includes the growth of var_A
    let exact: Vec<f64> = (1..5).map(|a| s.get(10, a, "haar_exact").unwrap().value.ln()).collect();
    let exact_fit = linear_fit(&(1..5).map(|a| a as f64).collect::<Vec<_>>(), &exact).unwrap();
    r.check(
        "C4a collapse slope log 4",
        rel(per_site, target) <= 0.15,
        format!(
            "d log F_A / d n_A = {per_site:.4} vs log 4 = {target:.4} (rel {:.3}, tol 0.15); slope in 2n_A-n {:.4}; finite-size Haar slope {:.4}",
            rel(per_site, target),
            fit.slope,
            exact_fit.slope
        ),
    );

    let bundle = chaotic(10);
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for a in 6..10 {
        let p = Partition::leading(10, a).unwrap();
        // 4 (Tr H_A^2 / d_A - (Tr H_A / d_A)^2) from the terms inside A
        let inside: Vec<PauliTerm> = bundle
            .terms()
            .iter()
            .filter(|t| t.ops.iter().all(|(site, _)| *site < a))
            .cloned()
            .collect();
        let ha = materialize_on(&inside, p.sites_a()).unwrap();
        let da = p.d_a() as f64;
        let tr: f64 = ha.diag().iter().map(|z| z.re).sum();
        let tr2: f64 = ha.iter().map(|z| z.norm_sqr()).sum();
        let pred = 4.0 * (tr2 / da - (tr / da).powi(2));
        let got = s.get(10, a, "f_a").unwrap().value;
        let headline = s.get(10, a, "haar_headline").unwrap().value;
        assert!(rel(headline, pred) < 1e-10, "headline column disagrees with the trace oracle");
        worst = worst.max(rel(got, pred));
        detail.push(format!("n_A={a}: {got:.3}/{pred:.3}"));
    }
    r.check(
        "C4b large-side saturation 4 var_A",
        worst <= 0.25,
        format!("{} (max rel {worst:.3}, tol 0.25)", detail.join(", ")),
    );
}

fn c5(r: &mut Report) {
    let bundle = chaotic(10);
    let p = Partition::leading(10, 8).unwrap();
    let times: Vec<f64> = (0..=80).map(|k| 0.25 * k as f64).collect();
    let samples = 50;
    let opts = FisherOptions {
        with_eta: false,
        with_comp: false,
        ..Default::default()
    };
    let mut fa = vec![Vec::new(); times.len()];
    let mut frot = vec![Vec::new(); times.len()];
    for s in 0..samples {
        let states = Evolver::new(bundle, &product(10, 500 + s)).unwrap().states_at(&times).unwrap();
        for (k, psi) in states.iter().enumerate() {
            let q = subsystem_qfi(psi, bundle, &p, opts).unwrap();
            fa[k].push(q.f_a);
            frot[k].push(q.f_rot);
        }
    }
    let m: Vec<f64> = fa.iter().map(|v| mean(v)).collect();
    let (k_min, &f_min) = m.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let late: Vec<usize> = (0..times.len()).filter(|&k| times[k] >= 15.0).collect();
    let late_f = mean(&late.iter().map(|&k| m[k]).collect::<Vec<_>>());
    let rise = late_f - f_min;
    let se_min = std_err(&fa[k_min]);
    let interior = k_min > 0 && k_min + 1 < times.len();
    r.check(
        "C5a interior minimum of F_A(t)",
        interior && rise > 3.0 * se_min,
        format!(
            "min {f_min:.3} at t* = {} (F_A(0) = {:.3}, late {late_f:.3}, rise {rise:.3} vs 3 se {:.3})",
            times[k_min],
            m[0],
            3.0 * se_min
        ),
    );
    let ratio = mean(&late.iter().map(|&k| mean(&frot[k]) / m[k]).collect::<Vec<_>>());
    r.check("C5b late F_rot / F_A > 0.9", ratio > 0.9, format!("late-window ratio {ratio:.4}"));
}

fn c6(r: &mut Report) {
    let opts = FisherOptions {
        with_eta: false,
        with_comp: false,
        ..Default::default()
    };
    let samples = 50;
    let mut integ = Vec::new();
    let mut chaos = Vec::new();
    for n in [8, 10] {
        let p = Partition::leading(n, 1).unwrap();
        let free = build_mixed_field_ising(n, CHAOTIC_G, 0.0, Boundary::Periodic).unwrap();
        integ.push(late_mean(&free, &p, samples, 600, opts, |q| q.f_a));
        chaos.push(late_mean(chaotic(n), &p, samples, 600, opts, |q| q.f_a));
    }
    let ri = integ[1].0 / integ[0].0;
    r.check(
        "C6a integrable late F_A independent of n",
        (ri - 1.0).abs() <= 0.2,
        format!("n=8 {:.4}, n=10 {:.4}, ratio {ri:.3} (tol 20%)", integ[0].0, integ[1].0),
    );
    let rc = chaos[0].0 / chaos[1].0;
    let haar: Vec<f64> = [8, 10]
        .iter()
        .map(|&n| haar_saturation_fa(chaotic(n), &Partition::leading(n, 1).unwrap()).unwrap().f_s)
        .collect();
    r.check(
        "C6b chaotic late F_A drops by >= 4",
        rc >= 4.0,
        format!(
            "n=8 {:.4} +- {:.4}, n=10 {:.4} +- {:.4}, factor {rc:.3}; Haar average factor {:.3}",
            chaos[0].0,
            chaos[0].1,
            chaos[1].0,
            chaos[1].1,
            haar[0] / haar[1]
        ),
    );
}

fn c7(r: &mut Report) {
    let spec = boundary_depolarizing_jumps(4, 1.0).unwrap();
    let gap = lindblad_gap(&spec).unwrap();
    let times: Vec<f64> = (0..=600).map(|k| 0.1 * k as f64).collect();
    let target = 4.0 * LN_2;
    let mut s_worst = 0.0f64;
    let mut rate_worst = 0.0f64;
    let mut detail = Vec::new();
    for s in 0..3 {
        let rho0 = product(4, 700 + s).density();
        let traj = lindblad_rk4(&spec, &rho0, &times, 0.01).unwrap();
        let f: Vec<f64> = traj
            .states
            .iter()
            .map(|rho| qfi(rho, &lindblad_apply(&spec, rho.matrix()).unwrap()).unwrap().value)
            .collect();
        s_worst = s_worst.max(rel(traj.states.last().unwrap().entropy().unwrap(), target));
        // 2 x gap is the asymptotic rate; the next generator mode is ~0.19
        // slower to die, so by t = 30 it is suppressed by e^-11. The early
        // window is reported for comparison
        let tail = fit_exponential_decay(&times, &f, DecayWindow::Times { t_lo: 30.0, t_hi: 50.0 });
        let early = fit_exponential_decay(&times, &f, DecayWindow::Fraction { upper: 1e-2, lower: 1e-6 });
        match (tail, early) {
            (Ok(t), Ok(e)) => {
                rate_worst = rate_worst.max(rel(t.rate, 2.0 * gap));
                detail.push(format!("{:.4} on [{:.1}, {:.1}] (early window {:.4})", t.rate, t.t_lo, t.t_hi, e.rate));
            }
            (t, e) => {
                rate_worst = f64::INFINITY;
                detail.push(format!("fit failed: {:?} / {:?}", t.err(), e.err()));
            }
        }
    }
    r.check(
        "C7a entropy saturates to n_A log 2",
        s_worst <= 0.02,
        format!("max rel deviation of S(t=60) from {target:.5}: {s_worst:.2e}"),
    );
    r.check(
        "C7b QFI decay rate = 2 x gap",
        rate_worst <= 0.1,
        format!("2 gap = {:.4}; fitted {} (max rel {rate_worst:.3}, tol 0.1)", 2.0 * gap, detail.join(", ")),
    );
}

fn c8(r: &mut Report) {
    let opts = FisherOptions {
        with_eta: false,
        with_comp: true,
        ..Default::default()
    };
    let samples = 20;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut detail = Vec::new();
    for n in [10, 11, 12] {
        let p = Partition::leading(n, 7).unwrap();
        let (f, se) = late_mean(chaotic(n), &p, samples, 800, opts, |q| q.f_comp.unwrap());
        let sat = cfi_saturation(chaotic(n), &p).unwrap();
        xs.push(p.n_abar() as f64);
        ys.push(f.ln());
        detail.push(format!(
            "n_abar={}: {f:.4} +- {se:.4} (Gaussian {:.4}, four-term {:.4})",
            p.n_abar(),
            sat.subsystem_gaussian,
            sat.subsystem
        ));
    }
    let slope = linear_fit(&xs, &ys).unwrap().slope;
    r.check(
        "C8a f_comp ~ 1/d_abar",
        rel(slope, -LN_2) <= 0.3,
        format!("{}; slope {slope:.4} vs -log 2 (rel {:.3}, tol 0.3)", detail.join(", "), rel(slope, -LN_2)),
    );

    let ns = [6usize, 8, 10];
    let mut fs = Vec::new();
    let mut detail = Vec::new();
    for &n in &ns {
        let p = Partition::leading(n, n).unwrap();
        let (f, _) = late_mean(chaotic(n), &p, samples, 900, opts, |q| q.f_comp.unwrap());
        let sat = cfi_saturation(chaotic(n), &p).unwrap().full;
        fs.push(f);
        detail.push(format!("n={n}: {f:.3} (random-state value {sat:.3})"));
    }
    // least squares through the origin
    let kappa = ns.iter().zip(&fs).map(|(&n, f)| n as f64 * f).sum::<f64>() / ns.iter().map(|&n| (n * n) as f64).sum::<f64>();
    let worst = ns.iter().zip(&fs).map(|(&n, &f)| rel(f, kappa * n as f64)).fold(0.0, f64::max);
    r.check(
        "C8b full-system f_comp ~ n",
        worst <= 0.25,
        format!("{}; slope {kappa:.3}, max rel {worst:.3} (tol 0.25)", detail.join(", ")),
    );
}

fn c9(r: &mut Report) {
    let mut worst = 0.0f64;
    for d in 2..=1024u32 {
        let oracle = 2.0 * (1.0 - 1.0 / d as f64).powi(d as i32);
        worst = worst.max(rel(trace_distance_full(d as f64).unwrap(), oracle));
    }
    let limit = trace_distance_full(1e15).unwrap();
    r.check(
        "C9a TD(d) = 2(1-1/d)^d and 2/e limit",
        worst < 1e-12 && (limit - 0.735759).abs() < 5e-7,
        format!("max rel {worst:.2e} over d = 2..1024; TD(1e15) = {limit:.7} vs 0.735759"),
    );
    let mc = trace_distance_monte_carlo(8, 3, 10_000, SEED).unwrap();
    let pred = trace_distance_sub(256.0, 8.0).unwrap();
    let z = (mc.mean - pred) / mc.std_err;
    r.check(
        "C9b subsystem TD Monte Carlo",
        z.abs() <= 3.0,
        format!("MC {:.5} +- {:.5} vs {pred:.5} (z = {z:.2})", mc.mean, mc.std_err),
    );
    let mut ps = Vec::new();
    for (n_abar, d_abar) in [(3usize, 8.0), (0, 1.0)] {
        let xs = sample_outcome_probabilities(8, n_abar, 10_000, SEED + 1).unwrap();
        ps.push((n_abar, outcome_ks_test(&xs, 256.0, d_abar).unwrap()));
    }
    r.check(
        "C9c outcome KS test at 1%",
        ps.iter().all(|(_, k)| k.p_value > 0.01),
        ps.iter()
            .map(|(a, k)| format!("n_abar={a}: D = {:.4}, p = {:.3}", k.statistic, k.p_value))
            .collect::<Vec<_>>()
            .join(", "),
    );
}

fn c10(r: &mut Report) {
    let bundle = chaotic(10);
    let small = codeword_fidelity_ensemble(bundle, &Partition::leading(10, 3).unwrap(), 50, SEED).unwrap();
    r.check(
        "C10a Holevo fidelity ~ 1 for n_R = 3",
        rel(small.mean, 1.0) <= 0.05,
        format!("{:.4} +- {:.4}", small.mean, small.std_err),
    );
    let big = codeword_fidelity_ensemble(bundle, &Partition::leading(10, 8).unwrap(), 50, SEED).unwrap();
    r.check(
        "C10b Holevo fidelity ~ n_B/n for n_R = 8",
        rel(big.mean, 0.2) <= 0.2,
        format!("{:.4} +- {:.4} vs 0.2 (rel {:.3}, tol 0.2)", big.mean, big.std_err, rel(big.mean, 0.2)),
    );
}

fn c11(r: &mut Report) {
    let bundle = chaotic(9);
    let spec = BgueSpec::new(bundle, 3, SEED).unwrap();
    let f1 = bgue_f(spec.d_b, 0.0)[0];
    let late = bgue_point(&spec, 1e3).unwrap();
    let haar = haar_saturation_fa(bundle, &Partition::leading(9, 3).unwrap()).unwrap();
    let (es, eb) = (rel(late.f_s, haar.f_s_flat), rel(late.f_b, haar.f_b_flat));
    r.check(
        "C11a f_1(0) = 1 and late limit = flat Haar",
        (f1 - 1.0).abs() < 1e-12 && es < 1e-6 && eb < 1e-6,
        format!(
            "f_1(0) = {f1}; F_S {:.6} vs {:.6} (rel {es:.1e}); F_B {:.6} vs {:.6} (rel {eb:.1e})",
            late.f_s, haar.f_s_flat, late.f_b, haar.f_b_flat
        ),
    );
    let mut drop = 0.0f64;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=400 {
        let q = bgue_point(&spec, 0.025 * k as f64).unwrap();
        drop = drop.max(prev - q.f_rot);
        prev = q.f_rot;
    }
    r.check(
        "C11b F_rot nondecreasing",
        drop <= 1e-12,
        format!("largest step-down {:.1e} on t = 0..10", drop.max(0.0)),
    );
}

/// Exact variance of `arccos sqrt(k/N)` for `k ~ Binomial(N, cos^2 t0)`.
fn binomial_oracle(n: u64, t0: f64) -> f64 {
    let b = Binomial::new(t0.cos().powi(2), n).unwrap();
    let est = |k: u64| (k as f64 / n as f64).sqrt().acos();
    let m: f64 = (0..=n).map(|k| b.pmf(k) * est(k)).sum();
    (0..=n).map(|k| b.pmf(k) * (est(k) - m).powi(2)).sum()
}

fn c12(r: &mut Report) {
    // |+> under Z, measured in the X basis: p_+(t) = cos^2 t, F = 4
    let qubit = HamiltonianBundle::from_terms(1, vec![PauliTerm::new(1.0, vec![(0, Pauli::Z)])]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::new(1, Array1::from(vec![C64::new(s, 0.0), C64::new(s, 0.0)])).unwrap();
    let x_basis = MeasurementBasis::custom(Array2::from_shape_vec((2, 2), vec![s, s, s, -s]).unwrap().mapv(|v| C64::new(v, 0.0))).unwrap();
    let grid = uniform_grid(0.0, FRAC_PI_2, 0.005);
    let table = likelihood_table(&plus, &qubit, &Partition::leading(1, 1).unwrap(), &x_basis, &grid).unwrap();
    let (t0, n, reps) = (0.4f64, 1000usize, 200usize);
    let p_true = [t0.cos().powi(2), t0.sin().powi(2)];
    let row = &cramer_rao_experiment(&table, &p_true, 4.0, t0, &[n], reps, SEED).unwrap()[0];
    let oracle = binomial_oracle(n as u64, t0) / row.bound;
    // sampling spread of a variance from `reps` draws
    let slack = 3.0 * (2.0 / (reps as f64 - 1.0)).sqrt();
    r.check(
        "C12a single-qubit variance in [1, 3] / (4N)",
        row.ratio >= 1.0 - slack && row.ratio <= 3.0 && (1.0 - 1e-3..=3.0).contains(&oracle),
        format!(
            "sampled ratio {:.3} (lower edge 1 - {slack:.2} for {reps} repetitions); exact binomial ratio {oracle:.4}",
            row.ratio
        ),
    );

    let bundle = chaotic(9);
    let full = Partition::leading(9, 9).unwrap();
    let psi0 = product(9, 1200);
    let grid = uniform_grid(0.0, 20.0, 0.05);
    let table = likelihood_table(&psi0, bundle, &full, &MeasurementBasis::Computational, &grid).unwrap();
    let rho = Evolver::new(bundle, &psi0).unwrap().state_at(10.0).unwrap().density();
    let p = MeasurementBasis::Computational.probabilities(rho.matrix()).unwrap();
    let est: Vec<f64> = (0..5)
        .map(|k| mle(&SampleSet::draw(&p, 50, 10.0, SEED, 1200 + k).unwrap(), &table).unwrap().t_est)
        .collect();
    let hits = est.iter().filter(|t| (*t - 10.0).abs() < 0.2).count();
    r.check(
        "C12b spin-chain MLE n = 9, N = 50",
        hits >= 4,
        format!("{hits}/5 within 0.2 of t0 = 10: {est:.3?}"),
    );

    let disc = |n: usize, n_a: usize, runs: u64| {
        let part = Partition::leading(n, n_a).unwrap();
        let psi0 = product(n, 1300 + n as u64);
        let table = likelihood_table(&psi0, chaotic(n), &part, &MeasurementBasis::Computational, &grid).unwrap();
        let evolved = Evolver::new(chaotic(n), &psi0).unwrap().state_at(10.0).unwrap();
        let rho = chronoscope::hilbert_core::partial_trace(&evolved, &part).unwrap();
        let mixed = DensityMatrix::maximally_mixed(n_a);
        let mut ok = [0usize; 2];
        for k in 0..runs {
            let cfg = DiscriminationConfig {
                seed: SEED + k,
                ..Default::default()
            };
            let e = discriminate_state(std::slice::from_ref(&rho), &table, cfg).unwrap();
            let q = discriminate_state(std::slice::from_ref(&mixed), &table, cfg).unwrap();
            ok[0] += (e.decision == Decision::Evolving) as usize;
            ok[1] += (q.decision == Decision::Equilibrium) as usize;
        }
        (ok, table.fisher(10.0))
    };
    let ([ev, eq], f) = disc(8, 8, 20);
    r.check(
        "C12c discrimination on the full system",
        ev >= 18 && eq >= 18,
        format!("evolving called evolving {ev}/20, equilibrium called equilibrium {eq}/20 (f_comp(t0) = {f:.2})"),
    );
    let ([ev, _], f) = disc(12, 4, 5);
    r.check(
        "C12d small f_comp case reads as equilibrium",
        ev == 0,
        format!("n = 12, n_A = 4: evolving state called evolving {ev}/5 (f_comp(t0) = {f:.4})"),
    );
}

fn main() {
    // `cargo test` passes harness flags; listing must not run the suite
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut r = Report { lines: Vec::new() };
    let criteria: [(&str, fn(&mut Report)); 12] = [
        ("C1", c1),
        ("C2", c2),
        ("C3", c3),
        ("C4", c4),
        ("C5", c5),
        ("C6", c6),
        ("C7", c7),
        ("C8", c8),
        ("C9", c9),
        ("C10", c10),
        ("C11", c11),
        ("C12", c12),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    for (name, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let t = Instant::now();
        f(&mut r);
        println!("     {name} took {:.1} s", t.elapsed().as_secs_f64());
    }
    let failed: Vec<&str> = r.lines.iter().filter(|(_, p)| !p).map(|(id, _)| id.as_str()).collect();
    println!("{} of {} checks passed", r.lines.len() - failed.len(), r.lines.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join("; "));
        std::process::exit(1);
    }
}
