use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{cfi_from_probabilities, qfi};
use crate::error::{invalid, Result};
use crate::hilbert_core::linalg::hermitian_eig;
use crate::hilbert_core::{schmidt, DensityMatrix, MeasurementBasis, Partition, PureState};
use crate::C64;

/// Eigenbasis of the SLD, which saturates the QFI.
#[derive(Clone, Debug)]
pub struct OptimalBasis {
    /// Basis vectors in the columns, ascending SLD eigenvalue.
    pub vectors: Array2<C64>,
    pub sld_eigenvalues: Array1<f64>,
    pub qfi: f64,
    pub cfi: f64,
}

impl OptimalBasis {
    pub fn measurement(&self) -> MeasurementBasis {
        MeasurementBasis::Custom(self.vectors.clone())
    }
}

/// Ties inside a degenerate SLD eigenspace are broken by whatever
/// orthonormal completion the eigensolver returns. Each vector is rotated
/// so its first largest-magnitude component is real and positive.
pub fn optimal_basis(rho: &DensityMatrix, drho: &Array2<C64>) -> Result<OptimalBasis> {
    let q = qfi(rho, drho)?;
    let (w, mut v) = hermitian_eig(&q.sld)?;
    for mut col in v.columns_mut() {
        let mut best = (0usize, 0.0f64);
        for (k, z) in col.iter().enumerate() {
            if z.norm() > best.1 * (1.0 + 1e-12) {
                best = (k, z.norm());
            }
        }
        if best.1 > 0.0 {
            let ph = col[best.0].conj() / best.1;
            col.mapv_inplace(|z| z * ph);
        }
    }
    let basis = MeasurementBasis::Custom(v.clone());
    let p = basis.diagonal(rho.matrix())?;
    let dp = basis.diagonal(drho)?;
    let cfi = cfi_from_probabilities(&p, &dp)?;
    Ok(OptimalBasis {
        vectors: v,
        sld_eigenvalues: w,
        qfi: q.value,
        cfi,
    })
}

/// Average Page entropy of a Haar state split `d_a x d_b` (natural log).
pub fn page_entropy(d_a: usize, d_b: usize) -> f64 {
    let (m, n) = if d_a <= d_b { (d_a, d_b) } else { (d_b, d_a) };
    let harmonic: f64 = ((n + 1)..=(m * n)).map(|k| 1.0 / k as f64).sum();
    harmonic - (m as f64 - 1.0) / (2.0 * n as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntanglementProfile {
    /// Number of leading sites of A on one side of each cut.
    pub cut_sizes: Vec<usize>,
    pub mean_entropy: Vec<f64>,
    pub page: Vec<f64>,
    /// `entropies[k][c]`: basis state k, cut c.
    pub entropies: Vec<Vec<f64>>,
    pub states_used: usize,
}

/// Entanglement of the basis states whose SLD eigenvalue exceeds
/// `rel_threshold * max |eigenvalue|`; the others span the kernel of the
/// SLD and are an arbitrary completion.
pub fn basis_entanglement_profile(
    basis: &OptimalBasis,
    n_sites: usize,
    cut_sizes: &[usize],
    rel_threshold: f64,
) -> Result<EntanglementProfile> {
    if basis.vectors.nrows() != 1usize << n_sites {
        return invalid("basis dimension does not match site count");
    }
    if cut_sizes.iter().any(|&c| c == 0 || c >= n_sites) {
        return invalid("cuts must leave sites on both sides");
    }
    let lmax = basis.sld_eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let parts: Vec<Partition> = cut_sizes
        .iter()
        .map(|&c| Partition::leading(n_sites, c))
        .collect::<Result<_>>()?;
    let mut entropies = Vec::new();
    for (k, col) in basis.vectors.columns().into_iter().enumerate() {
        if basis.sld_eigenvalues[k].abs() <= rel_threshold * lmax {
            continue;
        }
        let psi = PureState::normalized(n_sites, col.to_owned())?;
        let row = parts
            .iter()
            .map(|p| Ok(schmidt(&psi, p)?.entanglement_entropy()))
            .collect::<Result<Vec<f64>>>()?;
        entropies.push(row);
    }
    let used = entropies.len();
    let mean_entropy = (0..cut_sizes.len())
        .map(|c| entropies.iter().map(|r| r[c]).sum::<f64>() / used.max(1) as f64)
        .collect();
    let page = cut_sizes
        .iter()
        .map(|&c| page_entropy(1 << c, 1 << (n_sites - c)))
        .collect();
    Ok(EntanglementProfile {
        cut_sizes: cut_sizes.to_vec(),
        mean_entropy,
        page,
        entropies,
        states_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, reduced_state_and_derivative};
    use crate::hilbert_core::{random_product_state, stream_rng};
    use crate::model_library::{build_mixed_field_ising, Boundary, CHAOTIC_G, CHAOTIC_H};

    #[test]
    fn page_small_cases() {
        assert!((page_entropy(2, 2) - (1.0 / 3.0 + 1.0 / 4.0 - 0.25)).abs() < 1e-14);
        assert_eq!(page_entropy(1, 8), 0.0);
        assert_eq!(page_entropy(4, 16), page_entropy(16, 4));
    }

    #[test]
    fn optimal_basis_saturates_qfi() {
        let h = build_mixed_field_ising(6, CHAOTIC_G, CHAOTIC_H, Boundary::Periodic).unwrap();
        let psi0 = random_product_state(6, &mut stream_rng(7, 0)).unwrap();
        let psi = evolve(&h, &psi0, 3.0).unwrap();
        let p = Partition::leading(6, 4).unwrap();
        let (rho, drho) = reduced_state_and_derivative(&psi, &h, &p).unwrap();
        let b = optimal_basis(&rho, &drho).unwrap();
        assert!((b.cfi - b.qfi).abs() < 1e-6 * b.qfi);
        let prof = basis_entanglement_profile(&b, 4, &[1, 2], 1e-9).unwrap();
        assert!(prof.states_used > 0);
    }
}
