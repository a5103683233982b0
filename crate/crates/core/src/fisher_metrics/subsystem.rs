use ndarray::{s, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{cfi_from_probabilities, DEFAULT_REL_TOL};
use crate::error::{invalid, Error, Result};
use crate::hilbert_core::linalg::{dagger, thin_svd};
use crate::hilbert_core::{Partition, PureState};
use crate::model_library::HamiltonianBundle;
use crate::C64;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FisherOptions {
    pub rel_tol: f64,
    /// Also compute the complement's conjugate-energy QFI.
    pub with_eta: bool,
    /// Also compute the computational-basis CFI of A.
    pub with_comp: bool,
}

impl Default for FisherOptions {
    fn default() -> Self {
        FisherOptions {
            rel_tol: DEFAULT_REL_TOL,
            with_eta: true,
            with_comp: true,
        }
    }
}

/// Everything measured on subsystem A of a pure state at one time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FisherReport {
    pub f_a: f64,
    pub f_ent: f64,
    pub f_rot: f64,
    /// `F_{A,+}` built from `Tr_abar[H |psi><psi|]`. `F_{A,+} + F_{abar,+} = 2 <H^2>`
    /// only when the smaller side's reduced state has full rank; otherwise
    /// the weight of `H psi` on the joint kernel is missing from both sides.
    pub f_plus: f64,
    pub f_minus_re: f64,
    pub f_minus_im: f64,
    pub f_comp: Option<f64>,
    /// QFI of the complement about the conjugate-energy parameter.
    pub f_eta_complement: Option<f64>,
    /// `4 Var(H)`, the QFI of the whole chain.
    pub f_full: f64,
    pub energy: f64,
    pub variance: f64,
    pub rank: usize,
    pub rank_tolerance: f64,
}

/// Sums over Schmidt pairs for the derivative operator `D = a X + b X^dagger`
/// with `X = Phi Psi^dagger` (`Psi`, `Phi` are `d_keep x d_other` reshapes).
pub(crate) struct SchmidtSums {
    pub total: f64,
    pub ent: f64,
    pub rot: f64,
    pub plus: f64,
    pub minus: C64,
    pub rank: usize,
    pub cutoff: f64,
}

pub(crate) fn schmidt_sums(psi_m: &Array2<C64>, phi_m: &Array2<C64>, a: C64, b: C64, rel_tol: f64) -> Result<SchmidtSums> {
    if !(rel_tol > 0.0) {
        return invalid(format!("rank tolerance {rel_tol} must be positive"));
    }
    let (u, sv, vt) = thin_svd(psi_m)?;
    let d_keep = psi_m.nrows();
    let pmax = sv[0] * sv[0];
    let cutoff = rel_tol * pmax;
    let r = sv.iter().take_while(|&&x| x * x > cutoff).count();
    if r == 0 {
        return Err(Error::NotNormalized(0.0));
    }
    let s_r: Vec<f64> = sv.iter().take(r).cloned().collect();
    let p: Vec<f64> = s_r.iter().map(|x| x * x).collect();
    let u_r = u.slice(s![.., ..r]).to_owned();
    let v_r = dagger(&vt.slice(s![..r, ..]));
    let phi_v = phi_m.dot(&v_r);
    let u_dag = dagger(&u_r.view());
    let g = u_dag.dot(&phi_v);

    let x = Array2::from_shape_fn((r, r), |(i, j)| g[[i, j]] * s_r[j]);
    let (mut ent, mut plus, mut minus) = (0.0, 0.0, C64::new(0.0, 0.0));
    for i in 0..r {
        for j in 0..r {
            let w = 2.0 / (p[i] + p[j]);
            let m = a * x[[i, j]] + b * x[[j, i]].conj();
            ent += w * m.norm_sqr();
            plus += w * x[[i, j]].norm_sqr();
            minus += x[[i, j]] * x[[j, i]] * w;
        }
    }

    let mut rot = 0.0;
    if r < d_keep {
        // kernel components of Phi v_i; for retained i, P_null D u_i / s_i
        // is a * y_i plus a b-term that only survives when some Schmidt
        // values were cut
        let y = &phi_v - &u_r.dot(&g);
        let mut z = y.mapv(|v| v * a);
        if r < sv.len() {
            let w = psi_m.dot(&dagger(&phi_m.view()).dot(&u_r));
            let w_null = &w - &u_r.dot(&u_dag.dot(&w));
            for (i, mut col) in z.axis_iter_mut(Axis(1)).enumerate() {
                col.scaled_add(b / s_r[i], &w_null.column(i));
            }
        }
        plus += 2.0 * y.iter().map(|v| v.norm_sqr()).sum::<f64>();
        rot = 4.0 * z.iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    Ok(SchmidtSums {
        total: ent + rot,
        ent,
        rot,
        plus,
        minus,
        rank: r,
        cutoff,
    })
}

fn check(psi: &PureState, bundle: &HamiltonianBundle, partition: &Partition) -> Result<()> {
    if psi.dim() != bundle.dim() || partition.n_total() != psi.n_sites() {
        return Err(Error::Dimension("state, Hamiltonian and partition disagree".into()));
    }
    Ok(())
}

/// Time QFI of subsystem A and its decompositions.
pub fn subsystem_qfi(psi: &PureState, bundle: &HamiltonianBundle, partition: &Partition, opts: FisherOptions) -> Result<FisherReport> {
    check(psi, bundle, partition)?;
    let amps = psi.amplitudes();
    let hpsi = bundle.apply(amps)?;
    let energy: f64 = amps.iter().zip(hpsi.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    let h2: f64 = hpsi.iter().map(|z| z.norm_sqr()).sum();
    let variance = (h2 - energy * energy).max(0.0);

    let psi_m = partition.reshape(amps)?;
    let phi_m = partition.reshape(&hpsi)?;
    let i = C64::new(0.0, 1.0);
    let sums = schmidt_sums(&psi_m, &phi_m, -i, i, opts.rel_tol)?;

    let f_comp = if opts.with_comp {
        let d_a = psi_m.nrows();
        let mut p = vec![0.0; d_a];
        let mut dp = vec![0.0; d_a];
        for al in 0..d_a {
            let (row_psi, row_phi) = (psi_m.row(al), phi_m.row(al));
            p[al] = row_psi.iter().map(|z| z.norm_sqr()).sum();
            let xa: C64 = row_phi.iter().zip(row_psi.iter()).map(|(f, s)| f * s.conj()).sum();
            dp[al] = 2.0 * xa.im;
        }
        Some(cfi_from_probabilities(&p, &dp)?)
    } else {
        None
    };

    let f_eta_complement = if opts.with_eta && !variance_vanishes(variance, energy) {
        let centered = &hpsi - &amps.mapv(|z| z * energy);
        let comp = partition.complement();
        let sums = schmidt_sums(
            &comp.reshape(amps)?,
            &comp.reshape(&centered)?,
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            opts.rel_tol,
        )?;
        Some(sums.total / (4.0 * variance * variance))
    } else {
        None
    };

    Ok(FisherReport {
        f_a: sums.total,
        f_ent: sums.ent,
        f_rot: sums.rot,
        f_plus: sums.plus,
        f_minus_re: sums.minus.re,
        f_minus_im: sums.minus.im,
        f_comp,
        f_eta_complement,
        f_full: 4.0 * variance,
        energy,
        variance,
        rank: sums.rank,
        rank_tolerance: sums.cutoff,
    })
}

fn variance_vanishes(variance: f64, energy: f64) -> bool {
    variance <= 1e-14 * energy.abs().max(1.0).powi(2)
}

/// QFI of subsystem A about the parameter conjugate to energy,
/// generated by `Tr_abar{H - <H>, |psi><psi|}` and scaled by `1 / (4 Var(H)^2)`.
pub fn conjugate_energy_qfi(psi: &PureState, bundle: &HamiltonianBundle, partition: &Partition, rel_tol: f64) -> Result<f64> {
    check(psi, bundle, partition)?;
    let amps = psi.amplitudes();
    let hpsi = bundle.apply(amps)?;
    let energy: f64 = amps.iter().zip(hpsi.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    let h2: f64 = hpsi.iter().map(|z| z.norm_sqr()).sum();
    let variance = (h2 - energy * energy).max(0.0);
    if variance_vanishes(variance, energy) {
        return Err(Error::ZeroVariance);
    }
    let centered = &hpsi - &amps.mapv(|z| z * energy);
    let one = C64::new(1.0, 0.0);
    let sums = schmidt_sums(&partition.reshape(amps)?, &partition.reshape(&centered)?, one, one, rel_tol)?;
    Ok(sums.total / (4.0 * variance * variance))
}
