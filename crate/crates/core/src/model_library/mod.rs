//! Spin-chain Hamiltonians as Pauli-term lists, their dense matrices,
//! cached spectra, subsystem splits and the boundary-dissipation model.

mod pauli;

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

pub use pauli::{Pauli, PauliTerm};

use crate::error::{invalid, Error, Result};
use crate::hilbert_core::linalg::{hermitian_eig, is_real, real_symmetric_eig};
use crate::hilbert_core::{Partition, MAX_SITES};
use crate::C64;

/// Transverse field of the chaotic mixed-field Ising point.
pub const CHAOTIC_G: f64 = -1.05;
/// Longitudinal field of the chaotic mixed-field Ising point.
pub const CHAOTIC_H: f64 = 0.5;
pub const DEFAULT_XXZ_DELTA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Model family plus couplings; `build(n)` gives the Hamiltonian on `n` sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    MixedFieldIsing { g: f64, h: f64, boundary: Boundary },
    Xxz { delta: f64, boundary: Boundary },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::MixedFieldIsing {
            g: CHAOTIC_G,
            h: CHAOTIC_H,
            boundary: Boundary::Periodic,
        }
    }
}

impl ModelSpec {
    pub fn build(&self, n: usize) -> Result<HamiltonianBundle> {
        match *self {
            ModelSpec::MixedFieldIsing { g, h, boundary } => build_mixed_field_ising(n, g, h, boundary),
            ModelSpec::Xxz { delta, boundary } => build_xxz(n, delta, boundary),
        }
    }
}

/// Eigen-decomposition of a Hamiltonian. Real symmetric matrices keep real
/// eigenvectors, which halves memory and matrix-product cost.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Array1<f64>,
    pub vectors: Eigenvectors,
}

#[derive(Clone, Debug)]
pub enum Eigenvectors {
    Real(Array2<f64>),
    Complex(Array2<C64>),
}

/// Hamiltonian with its term list, dense matrix and a lazily computed spectrum.
#[derive(Debug)]
pub struct HamiltonianBundle {
    n_sites: usize,
    terms: Vec<PauliTerm>,
    matrix: Array2<C64>,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for HamiltonianBundle {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        HamiltonianBundle {
            n_sites: self.n_sites,
            terms: self.terms.clone(),
            matrix: self.matrix.clone(),
            spectrum,
        }
    }
}

impl HamiltonianBundle {
    pub fn from_terms(n_sites: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return invalid(format!("{n_sites} sites out of range"));
        }
        for t in &terms {
            if let Some(&(s, _)) = t.ops.iter().find(|(s, _)| *s >= n_sites) {
                return invalid(format!("term acts on site {s} of a {n_sites}-site chain"));
            }
        }
        let matrix = materialize(&terms, n_sites);
        Ok(HamiltonianBundle {
            n_sites,
            terms,
            matrix,
            spectrum: OnceLock::new(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Diagonalizes once and caches the result.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = if is_real(&self.matrix) {
            let (e, v) = real_symmetric_eig(&self.matrix.mapv(|z| z.re))?;
            Spectrum {
                energies: e,
                vectors: Eigenvectors::Real(v),
            }
        } else {
            let (e, v) = hermitian_eig(&self.matrix)?;
            Spectrum {
                energies: e,
                vectors: Eigenvectors::Complex(v),
            }
        };
        let _ = self.spectrum.set(s);
        Ok(self.spectrum.get().expect("spectrum just set"))
    }

    /// `H psi` from the term list, O(d * terms).
    pub fn apply(&self, psi: &Array1<C64>) -> Result<Array1<C64>> {
        if psi.len() != self.dim() {
            return Err(Error::Dimension("state does not match Hamiltonian".into()));
        }
        let mut out = Array1::zeros(psi.len());
        for t in &self.terms {
            t.apply_add(psi, &mut out);
        }
        Ok(out)
    }

    /// `(<H>, <H^2> - <H>^2)`.
    pub fn energy_and_variance(&self, psi: &Array1<C64>) -> Result<(f64, f64)> {
        let hpsi = self.apply(psi)?;
        let e: f64 = psi.iter().zip(hpsi.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let h2: f64 = hpsi.iter().map(|z| z.norm_sqr()).sum();
        Ok((e, (h2 - e * e).max(0.0)))
    }
}

/// Dense matrix of a sum of Pauli terms on `n` sites.
pub fn materialize(terms: &[PauliTerm], n: usize) -> Array2<C64> {
    let d = 1usize << n;
    let mut m = Array2::zeros((d, d));
    for t in terms {
        for x in 0..d {
            let (y, phase) = t.act(x);
            m[[y, x]] += phase * t.coeff;
        }
    }
    m
}

/// Dense matrix of terms supported inside `sites`, in the local ordering
/// used by [`Partition`] (k-th smallest site is bit k).
pub fn materialize_on(terms: &[PauliTerm], sites: &[usize]) -> Result<Array2<C64>> {
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    let local: Vec<PauliTerm> = terms
        .iter()
        .map(|t| {
            let ops = t
                .ops
                .iter()
                .map(|&(s, p)| {
                    sorted
                        .binary_search(&s)
                        .map(|k| (k, p))
                        .map_err(|_| Error::InvalidArgument(format!("term leaves the region at site {s}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PauliTerm { coeff: t.coeff, ops })
        })
        .collect::<Result<_>>()?;
    Ok(materialize(&local, sorted.len()))
}

fn bonds(n: usize, boundary: Boundary) -> Result<Vec<(usize, usize)>> {
    match boundary {
        Boundary::Open => Ok((0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()),
        Boundary::Periodic if n < 2 => invalid("periodic chain needs at least 2 sites"),
        Boundary::Periodic => Ok((0..n).map(|i| (i, (i + 1) % n)).collect()),
    }
}

/// `H = sum Z_i Z_{i+1} + g sum X_i + h sum Z_i`.
pub fn build_mixed_field_ising(n: usize, g: f64, h: f64, boundary: Boundary) -> Result<HamiltonianBundle> {
    if n == 0 {
        return invalid("chain needs at least one site");
    }
    let mut terms = Vec::new();
    for (i, j) in bonds(n, boundary)? {
        terms.push(PauliTerm::new(1.0, vec![(i, Pauli::Z), (j, Pauli::Z)]));
    }
    for i in 0..n {
        if g != 0.0 {
            terms.push(PauliTerm::new(g, vec![(i, Pauli::X)]));
        }
        if h != 0.0 {
            terms.push(PauliTerm::new(h, vec![(i, Pauli::Z)]));
        }
    }
    HamiltonianBundle::from_terms(n, terms)
}

/// `H = sum X_i X_{i+1} + Y_i Y_{i+1} + delta Z_i Z_{i+1}`.
pub fn build_xxz(n: usize, delta: f64, boundary: Boundary) -> Result<HamiltonianBundle> {
    if n == 0 {
        return invalid("chain needs at least one site");
    }
    let mut terms = Vec::new();
    for (i, j) in bonds(n, boundary)? {
        terms.push(PauliTerm::new(1.0, vec![(i, Pauli::X), (j, Pauli::X)]));
        terms.push(PauliTerm::new(1.0, vec![(i, Pauli::Y), (j, Pauli::Y)]));
        if delta != 0.0 {
            terms.push(PauliTerm::new(delta, vec![(i, Pauli::Z), (j, Pauli::Z)]));
        }
    }
    HamiltonianBundle::from_terms(n, terms)
}

/// `H = H_A (x) 1 + 1 (x) H_abar + H_int`.
#[derive(Clone, Debug)]
pub struct HamiltonianSplit {
    pub partition: Partition,
    /// Terms inside A, as a `d_a x d_a` matrix.
    pub h_a: Array2<C64>,
    /// Terms inside the complement, `d_abar x d_abar`.
    pub h_abar: Array2<C64>,
    pub terms_int: Vec<PauliTerm>,
}

impl HamiltonianSplit {
    /// Interaction terms as a full-chain matrix.
    pub fn h_int(&self) -> Array2<C64> {
        materialize(&self.terms_int, self.partition.n_total())
    }

    /// `H_A (x) 1 + 1 (x) H_abar + H_int` at full dimension.
    pub fn reassemble(&self) -> Result<Array2<C64>> {
        let a = self.partition.embed_a(&self.h_a)?;
        let b = self.partition.complement().embed_a(&self.h_abar)?;
        Ok(a + b + self.h_int())
    }
}

pub fn split_hamiltonian(bundle: &HamiltonianBundle, partition: &Partition) -> Result<HamiltonianSplit> {
    if partition.n_total() != bundle.n_sites() {
        return Err(Error::Dimension("partition size differs from Hamiltonian".into()));
    }
    let in_a = |s: usize| partition.sites_a().binary_search(&s).is_ok();
    let (mut ta, mut tb, mut ti) = (Vec::new(), Vec::new(), Vec::new());
    for t in bundle.terms() {
        let na = t.ops.iter().filter(|(s, _)| in_a(*s)).count();
        if t.ops.is_empty() || na == t.ops.len() {
            ta.push(t.clone());
        } else if na == 0 {
            tb.push(t.clone());
        } else {
            ti.push(t.clone());
        }
    }
    Ok(HamiltonianSplit {
        partition: partition.clone(),
        h_a: materialize_on(&ta, partition.sites_a())?,
        h_abar: materialize_on(&tb, partition.sites_abar())?,
        terms_int: ti,
    })
}

/// Jump operator; Pauli strings keep their term form so the integrator can
/// apply them as signed permutations.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub matrix: Array2<C64>,
    pub pauli: Option<PauliTerm>,
}

#[derive(Clone, Debug)]
pub struct LindbladSpec {
    pub hamiltonian: HamiltonianBundle,
    pub jumps: Vec<JumpOperator>,
    pub gamma: f64,
}

impl LindbladSpec {
    pub fn n_sites(&self) -> usize {
        self.hamiltonian.n_sites()
    }
}

/// Open chaotic Ising chain on `n_a` sites with X, Y, Z dephasing-type jumps
/// on the first and last site at rate `gamma`.
pub fn boundary_depolarizing_jumps(n_a: usize, gamma: f64) -> Result<LindbladSpec> {
    if n_a == 0 {
        return invalid("subsystem needs at least one site");
    }
    if !(gamma >= 0.0) {
        return invalid("gamma must be non-negative");
    }
    let hamiltonian = build_mixed_field_ising(n_a, CHAOTIC_G, CHAOTIC_H, Boundary::Open)?;
    let mut sites = vec![0, n_a - 1];
    sites.dedup();
    let mut jumps = Vec::new();
    for &s in &sites {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let term = PauliTerm::new(1.0, vec![(s, p)]);
            jumps.push(JumpOperator {
                matrix: materialize(std::slice::from_ref(&term), n_a),
                pauli: Some(term),
            });
        }
    }
    Ok(LindbladSpec {
        hamiltonian,
        jumps,
        gamma,
    })
}
