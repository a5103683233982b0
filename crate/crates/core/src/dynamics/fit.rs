use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which part of a decaying curve the log-linear fit uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayWindow {
    /// From the first time the curve drops to `upper * y0` until the first
    /// time it drops to `lower * y0`.
    Fraction { upper: f64, lower: f64 },
    Times { t_lo: f64, t_hi: f64 },
}

impl Default for DecayWindow {
    fn default() -> Self {
        DecayWindow::Fraction {
            upper: 0.8,
            lower: 0.05,
        }
    }
}

/// `y ~ amplitude * exp(-rate * t)` on `[t_lo, t_hi]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: usize,
    pub r_squared: f64,
}

pub fn fit_exponential_decay(ts: &[f64], ys: &[f64], window: DecayWindow) -> Result<DecayFit> {
    if ts.len() != ys.len() {
        return Err(Error::Dimension("times and values differ in length".into()));
    }
    if ts.is_empty() {
        return invalid("empty curve");
    }
    let (t_lo, t_hi) = match window {
        DecayWindow::Times { t_lo, t_hi } => (t_lo, t_hi),
        DecayWindow::Fraction { upper, lower } => {
            if !(0.0 < lower && lower < upper) {
                return invalid("need 0 < lower < upper");
            }
            let y0 = ys[0];
            let first_below = |f: f64| ts.iter().zip(ys).find(|(_, &y)| y <= f * y0).map(|(&t, _)| t);
            let lo = first_below(upper).ok_or_else(|| Error::InvalidArgument("curve never reaches the upper level".into()))?;
            let hi = first_below(lower).ok_or_else(|| Error::InvalidArgument("curve never reaches the lower level".into()))?;
            (lo, hi)
        }
    };
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(&t, &y)| t >= t_lo && t <= t_hi && y > 0.0)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 4 {
        return invalid(format!("only {} positive points in the fit window", pts.len()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if stt == 0.0 {
        return invalid("fit window has a single time");
    }
    let slope = sty / stt;
    let r_squared = if syy > 0.0 { sty * sty / (stt * syy) } else { 1.0 };
    Ok(DecayFit {
        rate: -slope,
        amplitude: (my - slope * mt).exp(),
        t_lo,
        t_hi,
        points: pts.len(),
        r_squared,
    })
}
