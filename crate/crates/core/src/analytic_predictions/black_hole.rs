use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Evaporating black hole in Planck units with Newton's constant kept.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BlackHoleSpec {
    pub m0: f64,
    pub g_n: f64,
    /// Emission constant in `dM/dt = -alpha / (G M)^2`.
    pub alpha: f64,
    /// Spatial dimension of the radiation gas, used only for the
    /// radiation entropy that places the Page time.
    pub gas_dimension: f64,
}

impl BlackHoleSpec {
    pub fn new(m0: f64, g_n: f64, alpha: f64) -> Result<Self> {
        if !(m0 > 0.0) || !(g_n > 0.0) || !(alpha > 0.0) {
            return invalid("M0, G_N and alpha must be positive");
        }
        Ok(BlackHoleSpec {
            m0,
            g_n,
            alpha,
            gas_dimension: 3.0,
        })
    }

    /// `G_N^2 M0^3`.
    pub fn t_total(&self) -> f64 {
        self.g_n * self.g_n * self.m0.powi(3)
    }

    pub fn mass(&self, t: f64) -> f64 {
        (self.m0.powi(3) - t / (self.g_n * self.g_n)).max(0.0).cbrt()
    }

    pub fn temperature(&self, t: f64) -> f64 {
        1.0 / (8.0 * std::f64::consts::PI * self.g_n * self.mass(t))
    }

    /// Bekenstein-Hawking entropy `4 pi G M^2`.
    pub fn entropy_black_hole(&self, t: f64) -> f64 {
        4.0 * std::f64::consts::PI * self.g_n * self.mass(t).powi(2)
    }

    /// Thermal gas entropy `((d+1)/d) int dE / T` of the emitted radiation.
    pub fn entropy_radiation(&self, t: f64) -> f64 {
        let k = (self.gas_dimension + 1.0) / self.gas_dimension;
        k * (self.entropy_black_hole(0.0) - self.entropy_black_hole(t))
    }

    /// Time at which the two entropies cross.
    pub fn page_time(&self) -> f64 {
        let k = (self.gas_dimension + 1.0) / self.gas_dimension;
        let m2 = k / (1.0 + k) * self.m0 * self.m0;
        self.g_n * self.g_n * (self.m0.powi(3) - m2.powf(1.5))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RadiationQfi {
    /// `F_R ~ var * exp(-exponent)`, kept symbolic because it underflows.
    Suppressed { variance: f64, exponent: f64 },
    /// `F_R ~ var`.
    Extensive { value: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RadiationState {
    pub t: f64,
    pub mass: f64,
    pub temperature: f64,
    pub variance: f64,
    pub s_black_hole: f64,
    pub s_radiation: f64,
    pub qfi: RadiationQfi,
}

/// `var(H_R) = (alpha / G) log(1 / (1 - t / t_total))`; past the Page time
/// the radiation's QFI is of the order of this variance.
pub fn bh_radiation_qfi(spec: &BlackHoleSpec, t: f64) -> Result<RadiationState> {
    let tt = spec.t_total();
    if !(0.0..tt).contains(&t) {
        return invalid(format!("t = {t} outside [0, {tt})"));
    }
    let variance = spec.alpha / spec.g_n * -(-t / tt).ln_1p();
    let (sb, sr) = (spec.entropy_black_hole(t), spec.entropy_radiation(t));
    let qfi = if sr > sb {
        RadiationQfi::Extensive { value: variance }
    } else {
        RadiationQfi::Suppressed {
            variance,
            exponent: sb - sr,
        }
    };
    Ok(RadiationState {
        t,
        mass: spec.mass(t),
        temperature: spec.temperature(t),
        variance,
        s_black_hole: sb,
        s_radiation: sr,
        qfi,
    })
}
