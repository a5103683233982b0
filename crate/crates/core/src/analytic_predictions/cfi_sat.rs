use serde::{Deserialize, Serialize};

use super::haar::tr_square;
use crate::error::{Error, Result};
use crate::hilbert_core::Partition;
use crate::model_library::HamiltonianBundle;

/// Late-time computational-basis CFI predicted for Haar-like states.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CfiSaturation {
    /// `(2/d) Tr H^2 - (2/d) sum_a H_aa^2`.
    pub full: f64,
    /// Measurement on A, the four-term expression for A the larger side.
    pub subsystem: f64,
    /// Measurement on the complement, the matching four-term expression.
    pub complement: f64,
    /// Leading order of the Gaussian-state average for a measurement on A:
    /// `2 / (d_A d_abar^2) (Tr H^2 - sum_a ||<a|H|a>||^2)`. Reduces to `full`
    /// at `d_abar = 1`; the four-term value is about twice as large.
    pub subsystem_gaussian: f64,
    /// Same for a measurement on the complement.
    pub complement_gaussian: f64,
}

/// `H_X = Tr_{other} H` for the four-term expressions; the diagonal blocks
/// `<a|H|a>` act on the traced side.
fn four_terms(h: &ndarray::Array2<crate::C64>, p: &Partition) -> Result<(f64, f64, f64, f64)> {
    let tr_h2 = tr_square(h);
    let h_a = p.reduce_operator(h)?;
    let tr_ha2 = tr_square(&h_a);
    let diag2: f64 = h_a.diag().iter().map(|z| z.re * z.re).sum();
    let mut blocks = 0.0;
    for a in 0..p.d_a() {
        for i in 0..p.d_abar() {
            let x = p.full_index(a, i);
            for j in 0..p.d_abar() {
                blocks += h[[x, p.full_index(a, j)]].norm_sqr();
            }
        }
    }
    Ok((tr_h2, tr_ha2, diag2, blocks))
}

pub fn cfi_saturation(bundle: &HamiltonianBundle, partition: &Partition) -> Result<CfiSaturation> {
    if partition.n_total() != bundle.n_sites() {
        return Err(Error::Dimension("partition size differs from Hamiltonian".into()));
    }
    let h = bundle.matrix();
    let d = h.nrows() as f64;
    let diag: f64 = h.diag().iter().map(|z| z.re * z.re).sum();
    let full = 2.0 / d * tr_square(h) - 2.0 / d * diag;

    let (da, db) = (partition.d_a() as f64, partition.d_abar() as f64);
    if partition.n_abar() == 0 || partition.n_a() == 0 {
        return Ok(CfiSaturation {
            full,
            subsystem: full,
            complement: full,
            subsystem_gaussian: full,
            complement_gaussian: full,
        });
    }
    let (t2, ha2, dg, bl) = four_terms(h, partition)?;
    let subsystem = 2.0 / (da * db * db) * t2 + 2.0 / (da * db.powi(3)) * ha2
        - 2.0 / (da * db.powi(3)) * dg
        - 2.0 / (da * db * db) * bl;
    let subsystem_gaussian = 2.0 / (da * db * db) * (t2 - bl);
    let (t2, hb2, dg, bl) = four_terms(h, &partition.complement())?;
    let complement = 2.0 / (da * da * db) * t2 + 2.0 / (da * da * db * db) * hb2
        - 2.0 / (da * da * db * db) * dg
        - 2.0 / (da * da * db) * bl;
    let complement_gaussian = 2.0 / (da * da * db) * (t2 - bl);
    Ok(CfiSaturation {
        full,
        subsystem,
        complement,
        subsystem_gaussian,
        complement_gaussian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher_metrics::{subsystem_qfi, FisherOptions};
    use crate::hilbert_core::{haar_state, stream_rng};
    use crate::model_library::{build_mixed_field_ising, Boundary, Pauli, PauliTerm, CHAOTIC_G, CHAOTIC_H};

    fn single(p: Pauli) -> HamiltonianBundle {
        HamiltonianBundle::from_terms(1, vec![PauliTerm::new(1.0, vec![(0, p)])]).unwrap()
    }

    #[test]
    fn single_qubit_values() {
        let p = Partition::leading(1, 1).unwrap();
        assert!(cfi_saturation(&single(Pauli::Z), &p).unwrap().full.abs() < 1e-15);
        assert!((cfi_saturation(&single(Pauli::X), &p).unwrap().full - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ising_full_value_counts_transverse_terms() {
        let h = build_mixed_field_ising(8, CHAOTIC_G, CHAOTIC_H, Boundary::Periodic).unwrap();
        let r = cfi_saturation(&h, &Partition::leading(8, 8).unwrap()).unwrap();
        assert!((r.full - 2.0 * 8.0 * CHAOTIC_G * CHAOTIC_G).abs() < 1e-10);
        let s = cfi_saturation(&h, &Partition::leading(8, 6).unwrap()).unwrap();
        assert!(s.subsystem > 0.0 && s.subsystem < r.full);
    }

    fn haar_mean_f_comp(h: &HamiltonianBundle, p: &Partition, samples: u64) -> f64 {
        let opts = FisherOptions {
            with_eta: false,
            with_comp: true,
            ..Default::default()
        };
        let v: Vec<f64> = (0..samples)
            .map(|k| {
                let psi = haar_state(h.n_sites(), &mut stream_rng(31, k)).unwrap();
                subsystem_qfi(&psi, h, p, opts).unwrap().f_comp.unwrap()
            })
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn haar_average_matches_full_system_value() {
        let h = build_mixed_field_ising(10, CHAOTIC_G, CHAOTIC_H, Boundary::Periodic).unwrap();
        let p = Partition::leading(10, 10).unwrap();
        let mc = haar_mean_f_comp(&h, &p, 20);
        let full = cfi_saturation(&h, &p).unwrap().full;
        assert!((mc / full - 1.0).abs() < 0.1, "{mc} vs {full}");
    }

    #[test]
    fn haar_average_matches_gaussian_subsystem_value() {
        // only the transverse field on A moves the A-basis weights
        let h = build_mixed_field_ising(9, CHAOTIC_G, CHAOTIC_H, Boundary::Periodic).unwrap();
        let p = Partition::leading(9, 6).unwrap();
        let s = cfi_saturation(&h, &p).unwrap();
        let by_hand = 2.0 * 6.0 * CHAOTIC_G * CHAOTIC_G / 8.0;
        assert!((s.subsystem_gaussian - by_hand).abs() < 1e-10);
        let mc = haar_mean_f_comp(&h, &p, 200);
        assert!((mc / s.subsystem_gaussian - 1.0).abs() < 0.1, "{mc} vs {}", s.subsystem_gaussian);
        assert!(s.subsystem > 1.5 * mc);
    }
}
