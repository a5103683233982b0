use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::hilbert_core::{haar_state, stream_rng, Partition};
use crate::stats::{ks_p_value, ks_statistic, mean, std_err};

/// Average computational-basis trace distance between a Haar state on `d`
/// levels and the uniform distribution, `2 (1 - 1/d)^d`.
pub fn trace_distance_full(d: f64) -> Result<f64> {
    if !(d >= 1.0) {
        return invalid(format!("dimension {d} must be at least 1"));
    }
    if d.is_infinite() {
        return Ok(2.0 * (-1.0f64).exp());
    }
    Ok(2.0 * (d * (-1.0 / d).ln_1p()).exp())
}

/// Same quantity when only a factor of dimension `d / d_abar` is measured.
pub fn trace_distance_sub(d: f64, d_abar: f64) -> Result<f64> {
    if !(d_abar >= 1.0) || !(d >= d_abar) {
        return invalid(format!("need 1 <= d_abar <= d, got d = {d}, d_abar = {d_abar}"));
    }
    if d.is_infinite() {
        return trace_distance_sub_limit(d_abar);
    }
    if d == d_abar {
        return Ok(0.0);
    }
    let m = d - d_abar;
    let ln = std::f64::consts::LN_2 + (d_abar - 1.0) * d_abar.ln() + m * m.ln() + ln_gamma(d)
        - d * d.ln()
        - ln_gamma(d_abar)
        - ln_gamma(m);
    Ok(ln.exp())
}

/// `d -> infinity` at fixed `d_abar`: `2 d_abar^{d_abar - 1} e^{-d_abar} / Gamma(d_abar)`.
pub fn trace_distance_sub_limit(d_abar: f64) -> Result<f64> {
    if !(d_abar >= 1.0) || !d_abar.is_finite() {
        return invalid(format!("d_abar = {d_abar} must be finite and at least 1"));
    }
    Ok((std::f64::consts::LN_2 + (d_abar - 1.0) * d_abar.ln() - d_abar - ln_gamma(d_abar)).exp())
}

/// Density of one computational-basis outcome probability of a Haar state
/// restricted to A: Beta(d_abar, d - d_abar) on [0, 1].
pub fn outcome_density(lambda: f64, d: f64, d_abar: f64) -> Result<f64> {
    if !(d_abar >= 1.0) || !(d > d_abar) {
        return invalid(format!("need 1 <= d_abar < d, got d = {d}, d_abar = {d_abar}"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Ok(0.0);
    }
    let m = d - d_abar;
    let ln_norm = ln_gamma(d) - ln_gamma(m) - ln_gamma(d_abar);
    let pow = |e: f64, x: f64| if e == 0.0 { 0.0 } else { e * x.ln() };
    Ok((ln_norm + pow(m - 1.0, 1.0 - lambda) + pow(d_abar - 1.0, lambda)).exp())
}

fn outcome_distribution(d: f64, d_abar: f64) -> Result<Beta> {
    Beta::new(d_abar, d - d_abar).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Haar states on `n` sites; A is the leading `n - n_abar` sites.
fn haar_reduced_diagonals(n: usize, n_abar: usize, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n_abar >= n {
        return invalid("A must keep at least one site");
    }
    let p = Partition::leading(n, n - n_abar)?;
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let psi = haar_state(n, &mut stream_rng(seed, k as u64))?;
            let m = p.reshape(psi.amplitudes())?;
            Ok(m.rows().into_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect())
        })
        .collect()
}

/// Mean and standard error of the sampled trace distance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

pub fn trace_distance_monte_carlo(n: usize, n_abar: usize, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let rows = haar_reduced_diagonals(n, n_abar, samples, seed)?;
    let inv = 1.0 / (1usize << (n - n_abar)) as f64;
    let tds: Vec<f64> = rows.iter().map(|p| p.iter().map(|x| (x - inv).abs()).sum()).collect();
    Ok(MonteCarloEstimate {
        mean: mean(&tds),
        std_err: std_err(&tds),
        samples,
    })
}

/// `<0|Tr_abar |psi><psi| |0>` over independent Haar states.
pub fn sample_outcome_probabilities(n: usize, n_abar: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(haar_reduced_diagonals(n, n_abar, samples, seed)?
        .into_iter()
        .map(|r| r[0])
        .collect())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// KS test of sampled outcome probabilities against [`outcome_density`].
pub fn outcome_ks_test(samples: &[f64], d: f64, d_abar: f64) -> Result<KsOutcome> {
    if samples.is_empty() {
        return invalid("no samples");
    }
    let dist = outcome_distribution(d, d_abar)?;
    let statistic = ks_statistic(samples, |x| dist.cdf(x));
    Ok(KsOutcome {
        statistic,
        p_value: ks_p_value(statistic, samples.len()),
    })
}

/// Draw from the outcome density directly, for the convergence checks.
pub fn draw_outcomes<R: Rng + ?Sized>(d: f64, d_abar: f64, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    use rand::distributions::Distribution;
    let b = rand_distr::Beta::new(d_abar, d - d_abar).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((0..count).map(|_| b.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u64) -> f64 {
        (1..=k).map(|x| x as f64).product()
    }

    #[test]
    fn full_system_values() {
        assert!((trace_distance_full(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((trace_distance_full(f64::INFINITY).unwrap() - 0.735759).abs() < 1e-6);
        assert!((trace_distance_full(1024.0).unwrap() - 2.0 * (1.0 - 1.0 / 1024.0f64).powi(1024)).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_matches_factorials() {
        for d in 2u64..=20 {
            for da in 1..d {
                let m = d - da;
                let direct = 2.0 * (da as f64).powi(da as i32 - 1) * (m as f64).powi(m as i32) * factorial(d - 1)
                    / ((d as f64).powi(d as i32) * factorial(da - 1) * factorial(m - 1));
                let v = trace_distance_sub(d as f64, da as f64).unwrap();
                assert!((v - direct).abs() < 1e-12 * direct, "d={d} da={da}");
            }
        }
        assert!((trace_distance_sub(64.0, 1.0).unwrap() - trace_distance_full(64.0).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn large_d_abar_asymptotic() {
        let v = trace_distance_sub_limit(256.0).unwrap();
        let approx = 2.0 / (2.0 * std::f64::consts::PI * 256.0).sqrt();
        assert!((v / approx - 1.0).abs() < 0.01);
    }

    #[test]
    fn density_normalized_with_uniform_mean() {
        for (d, da) in [(256.0, 8.0), (16.0, 1.0), (64.0, 16.0)] {
            // composite Simpson
            let n = 40_000;
            let h = 1.0 / n as f64;
            let (mut z, mut m) = (0.0, 0.0);
            for k in 0..=n {
                let x = k as f64 * h;
                let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                let r = outcome_density(x, d, da).unwrap();
                z += w * r * h / 3.0;
                m += w * r * x * h / 3.0;
            }
            assert!((z - 1.0).abs() < 1e-8, "norm {z}");
            assert!((m - da / d).abs() < 1e-8, "mean {m}");
        }
    }
}
