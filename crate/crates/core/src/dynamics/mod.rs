//! Unitary evolution through the cached spectrum, the boundary-dissipated
//! master equation, and exponential fits to decaying curves.

mod fit;
mod lindblad;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

pub use fit::{fit_exponential_decay, DecayFit, DecayWindow};
pub use lindblad::{lindblad_apply, lindblad_gap, lindblad_rk4, vectorized_generator, MAX_GAP_SITES};

use crate::error::{Error, Result};
use crate::hilbert_core::linalg::dagger;
use crate::hilbert_core::{DensityMatrix, Partition, PureState};
use crate::model_library::{Eigenvectors, HamiltonianBundle, Spectrum};
use crate::C64;

/// States sampled on a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

/// Scalar curve on a time grid, the form written to disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Evolves one initial state to arbitrary times in O(d^2) per time.
pub struct Evolver<'a> {
    spectrum: &'a Spectrum,
    n_sites: usize,
    coeffs: Array1<C64>,
}

impl<'a> Evolver<'a> {
    pub fn new(bundle: &'a HamiltonianBundle, psi0: &PureState) -> Result<Self> {
        if psi0.dim() != bundle.dim() {
            return Err(Error::Dimension("state does not match Hamiltonian".into()));
        }
        let spectrum = bundle.spectrum()?;
        let coeffs = match &spectrum.vectors {
            Eigenvectors::Real(v) => {
                let (re, im) = split(psi0.amplitudes());
                let (cr, ci) = (v.t().dot(&re), v.t().dot(&im));
                join(&cr, &ci)
            }
            Eigenvectors::Complex(v) => dagger(&v.view()).dot(psi0.amplitudes()),
        };
        Ok(Evolver {
            spectrum,
            n_sites: psi0.n_sites(),
            coeffs,
        })
    }

    pub fn state_at(&self, t: f64) -> Result<PureState> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time {t} is not finite")));
        }
        let w: Array1<C64> = self
            .coeffs
            .iter()
            .zip(self.spectrum.energies.iter())
            .map(|(&c, &e)| c * C64::from_polar(1.0, -e * t))
            .collect();
        let amps = match &self.spectrum.vectors {
            Eigenvectors::Real(v) => {
                let (re, im) = split(&w);
                join(&v.dot(&re), &v.dot(&im))
            }
            Eigenvectors::Complex(v) => v.dot(&w),
        };
        Ok(PureState::from_raw(self.n_sites, amps))
    }

    /// All times at once through one matrix product.
    pub fn states_at(&self, times: &[f64]) -> Result<Vec<PureState>> {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite time".into()));
        }
        let d = self.coeffs.len();
        let mut w = Array2::<C64>::zeros((d, times.len()));
        for (k, &t) in times.iter().enumerate() {
            for i in 0..d {
                w[[i, k]] = self.coeffs[i] * C64::from_polar(1.0, -self.spectrum.energies[i] * t);
            }
        }
        let amps = match &self.spectrum.vectors {
            Eigenvectors::Real(v) => {
                let re = v.dot(&w.mapv(|z| z.re));
                let im = v.dot(&w.mapv(|z| z.im));
                ndarray::Zip::from(&re).and(&im).map_collect(|&a, &b| C64::new(a, b))
            }
            Eigenvectors::Complex(v) => v.dot(&w),
        };
        Ok(amps
            .axis_iter(Axis(1))
            .map(|col| PureState::from_raw(self.n_sites, col.to_owned()))
            .collect())
    }
}

fn split(v: &Array1<C64>) -> (Array1<f64>, Array1<f64>) {
    (v.mapv(|z| z.re), v.mapv(|z| z.im))
}

fn join(re: &Array1<f64>, im: &Array1<f64>) -> Array1<C64> {
    re.iter().zip(im.iter()).map(|(&a, &b)| C64::new(a, b)).collect()
}

/// `exp(-iHt) psi0`.
pub fn evolve(bundle: &HamiltonianBundle, psi0: &PureState, t: f64) -> Result<PureState> {
    Evolver::new(bundle, psi0)?.state_at(t)
}

/// `(rho_A, d rho_A / dt)` for a pure state evolving under `bundle`.
pub fn reduced_state_and_derivative(
    psi: &PureState,
    bundle: &HamiltonianBundle,
    partition: &Partition,
) -> Result<(DensityMatrix, Array2<C64>)> {
    if partition.n_total() != psi.n_sites() {
        return Err(Error::Dimension("partition size differs from state".into()));
    }
    let m = partition.reshape(psi.amplitudes())?;
    let phi = partition.reshape(&bundle.apply(psi.amplitudes())?)?;
    let rho = m.dot(&dagger(&m.view()));
    let x = phi.dot(&dagger(&m.view()));
    let i = C64::new(0.0, 1.0);
    let drho = (&x - &dagger(&x.view())).mapv(|z| -i * z);
    Ok((DensityMatrix::from_raw(partition.n_a(), rho), drho))
}
