use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher_metrics::holevo_fidelity;
use crate::hilbert_core::{haar_state, stream_rng, Partition, PureState};
use crate::model_library::HamiltonianBundle;
use crate::stats::{mean, std_err};

/// Orthogonal partner `(H - <H>) psi / sigma` of `psi`.
pub fn conjugate_codeword(psi: &PureState, bundle: &HamiltonianBundle) -> Result<PureState> {
    let amps = psi.amplitudes();
    let hpsi = bundle.apply(amps)?;
    let (e, var) = bundle.energy_and_variance(amps)?;
    if var <= 1e-14 * e.abs().max(1.0).powi(2) {
        return Err(Error::ZeroVariance);
    }
    let xi = (&hpsi - &amps.mapv(|z| z * e)).mapv(|z| z / var.sqrt());
    PureState::normalized(psi.n_sites(), xi)
}

/// `1` while R (subsystem A) is no larger than the erased part, else `n_B / n`.
pub fn predicted_codeword_fidelity(partition: &Partition) -> f64 {
    if partition.n_a() <= partition.n_abar() {
        1.0
    } else {
        partition.n_abar() as f64 / partition.n_total() as f64
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CodewordFidelity {
    pub measured: f64,
    pub predicted: f64,
}

/// `Tr sqrt(rho_R) sqrt(sigma_R)` for the codewords `psi` and its partner,
/// R being subsystem A.
pub fn codeword_fidelity(psi: &PureState, bundle: &HamiltonianBundle, partition: &Partition) -> Result<CodewordFidelity> {
    let xi = conjugate_codeword(psi, bundle)?;
    let rho = partition.reduce_pure(psi.amplitudes())?;
    let sigma = partition.reduce_pure(xi.amplitudes())?;
    Ok(CodewordFidelity {
        measured: holevo_fidelity(&rho, &sigma)?,
        predicted: predicted_codeword_fidelity(partition),
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnsembleFidelity {
    pub mean: f64,
    pub std_err: f64,
    pub predicted: f64,
    pub samples: usize,
}

/// Average over Haar states; sample `k` uses stream `k` of `seed`.
pub fn codeword_fidelity_ensemble(
    bundle: &HamiltonianBundle,
    partition: &Partition,
    samples: usize,
    seed: u64,
) -> Result<EnsembleFidelity> {
    let n = bundle.n_sites();
    let vals = (0..samples)
        .into_par_iter()
        .map(|k| {
            let psi = haar_state(n, &mut stream_rng(seed, k as u64))?;
            Ok(codeword_fidelity(&psi, bundle, partition)?.measured)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EnsembleFidelity {
        mean: mean(&vals),
        std_err: std_err(&vals),
        predicted: predicted_codeword_fidelity(partition),
        samples,
    })
}
