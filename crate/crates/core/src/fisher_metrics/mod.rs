//! Quantum and classical Fisher information, Bures distance, fidelities,
//! subsystem decompositions and the optimal measurement basis.

mod basis;
mod subsystem;

use ndarray::{Array1, Array2};

pub use basis::{basis_entanglement_profile, optimal_basis, page_entropy, EntanglementProfile, OptimalBasis};
pub use subsystem::{conjugate_energy_qfi, subsystem_qfi, FisherOptions, FisherReport};

use crate::error::{invalid, Error, Result};
use crate::hilbert_core::linalg::{dagger, hermitian_eig, hermiticity_defect, max_abs, psd_sqrt, trace};
use crate::hilbert_core::{DensityMatrix, MeasurementBasis};
use crate::C64;

/// Default relative rank cutoff: eigenvalues below `1e-12 * max p` count as zero.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Outcomes below this probability are skipped in classical sums when
/// their derivative is below [`CFI_DP_FLOOR`], and rejected otherwise.
pub const CFI_P_FLOOR: f64 = 1e-15;
pub const CFI_DP_FLOOR: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct QfiResult {
    pub value: f64,
    /// Pairs of eigenvectors inside the support.
    pub f_ent: f64,
    /// Pairs with one vector in the support and one in the kernel.
    pub f_rot: f64,
    /// Symmetric logarithmic derivative.
    pub sld: Array2<C64>,
    /// Spectrum of rho after the rank cutoff, ascending.
    pub eigenvalues: Array1<f64>,
    pub cutoff: f64,
}

pub fn qfi(rho: &DensityMatrix, drho: &Array2<C64>) -> Result<QfiResult> {
    qfi_with_tol(rho.matrix(), drho, DEFAULT_REL_TOL)
}

/// `F = sum_{p_i + p_j > 0} 2 |<i|drho|j>|^2 / (p_i + p_j)`.
pub fn qfi_with_tol(rho: &Array2<C64>, drho: &Array2<C64>, rel_tol: f64) -> Result<QfiResult> {
    if !(rel_tol > 0.0) {
        return invalid(format!("rank tolerance {rel_tol} must be positive"));
    }
    check_derivative(rho, drho)?;
    let (mut p, u) = hermitian_eig(rho)?;
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * pmax;
    p.mapv_inplace(|x| if x > cutoff { x } else { 0.0 });
    let m = dagger(&u.view()).dot(drho).dot(&u);
    let d = p.len();
    let (mut f_ent, mut f_rot) = (0.0, 0.0);
    let mut l = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            let s = p[i] + p[j];
            if s <= 0.0 {
                continue;
            }
            let c = 2.0 / s;
            l[[i, j]] = m[[i, j]] * c;
            let term = c * m[[i, j]].norm_sqr();
            if p[i] > 0.0 && p[j] > 0.0 {
                f_ent += term;
            } else {
                f_rot += term;
            }
        }
    }
    let sld = u.dot(&l).dot(&dagger(&u.view()));
    Ok(QfiResult {
        value: f_ent + f_rot,
        f_ent,
        f_rot,
        sld,
        eigenvalues: p,
        cutoff,
    })
}

fn check_derivative(rho: &Array2<C64>, drho: &Array2<C64>) -> Result<()> {
    if rho.nrows() != rho.ncols() || drho.dim() != rho.dim() {
        return Err(Error::Dimension(format!(
            "rho {:?} and drho {:?}",
            rho.dim(),
            drho.dim()
        )));
    }
    let scale = max_abs(drho).max(1.0);
    if hermiticity_defect(drho) > 1e-8 * scale {
        return invalid("drho is not Hermitian");
    }
    if trace(drho).norm() > 1e-8 * scale {
        return invalid("drho is not traceless");
    }
    Ok(())
}

/// Classical Fisher information `sum (dp)^2 / p` of a measurement.
pub fn cfi(rho: &DensityMatrix, drho: &Array2<C64>, basis: &MeasurementBasis) -> Result<f64> {
    check_derivative(rho.matrix(), drho)?;
    let p = basis.diagonal(rho.matrix())?;
    let dp = basis.diagonal(drho)?;
    cfi_from_probabilities(&p, &dp)
}

pub fn cfi_from_probabilities(p: &[f64], dp: &[f64]) -> Result<f64> {
    if p.len() != dp.len() {
        return Err(Error::Dimension("probabilities and derivatives differ in length".into()));
    }
    let mut f = 0.0;
    for (k, (&pk, &dk)) in p.iter().zip(dp).enumerate() {
        if pk < CFI_P_FLOOR {
            if dk.abs() >= CFI_DP_FLOOR {
                return Err(Error::IllConditioned(format!(
                    "outcome {k}: p = {pk:.2e} with dp = {dk:.2e}"
                )));
            }
            continue;
        }
        f += dk * dk / pk;
    }
    Ok(f)
}

/// `Tr sqrt(sqrt(rho) sigma sqrt(rho))`.
pub fn root_fidelity(rho: &Array2<C64>, sigma: &Array2<C64>) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension("states differ in dimension".into()));
    }
    let r = psd_sqrt(rho)?;
    let mut inner = r.dot(sigma).dot(&r);
    crate::hilbert_core::linalg::hermitize(&mut inner);
    let (w, _) = hermitian_eig(&inner)?;
    Ok(w.iter().map(|&x| x.max(0.0).sqrt()).sum())
}

/// `sqrt(2) * sqrt(1 - Tr sqrt(sqrt(rho) sigma sqrt(rho)))`.
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = root_fidelity(rho.matrix(), sigma.matrix())?;
    Ok((2.0 * (1.0 - f).max(0.0)).sqrt())
}

/// `Tr sqrt(rho) sqrt(sigma)`.
pub fn holevo_fidelity(rho: &Array2<C64>, sigma: &Array2<C64>) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension("states differ in dimension".into()));
    }
    let a = psd_sqrt(rho)?;
    let b = psd_sqrt(sigma)?;
    Ok(trace(&a.dot(&b)).re)
}
