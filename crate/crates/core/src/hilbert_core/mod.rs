//! States, partitions, small linear algebra and seeded randomness.

pub mod linalg;
mod partition;
pub mod random;

use ndarray::{Array1, Array2, Axis};

pub use partition::{Partition, PartitionSpec, MAX_SITES};
pub use random::{born_sample, haar_state, haar_unitary, random_product_state, stream_rng};

use crate::error::{Error, Result};
use crate::C64;
use linalg::{dagger, hermitian_eig, hermiticity_defect, max_abs, thin_svd};

const NORM_TOL: f64 = 1e-10;

/// Normalized pure state of `n_sites` qubits.
#[derive(Clone, Debug)]
pub struct PureState {
    n_sites: usize,
    amps: Array1<C64>,
}

impl PureState {
    pub fn new(n_sites: usize, amps: Array1<C64>) -> Result<Self> {
        check_len(n_sites, amps.len())?;
        let n2 = norm_sqr(&amps);
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(PureState { n_sites, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(n_sites: usize, mut amps: Array1<C64>) -> Result<Self> {
        check_len(n_sites, amps.len())?;
        let n2 = norm_sqr(&amps);
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::NotNormalized(n2));
        }
        let s = 1.0 / n2.sqrt();
        amps.mapv_inplace(|z| z * s);
        Ok(PureState { n_sites, amps })
    }

    /// Computational basis state `|x>`.
    pub fn basis(n_sites: usize, x: usize) -> Result<Self> {
        let d = 1usize << n_sites;
        if x >= d {
            return Err(Error::InvalidArgument(format!("basis index {x} >= {d}")));
        }
        let mut amps = Array1::zeros(d);
        amps[x] = C64::new(1.0, 0.0);
        Ok(PureState { n_sites, amps })
    }

    pub(crate) fn from_raw(n_sites: usize, amps: Array1<C64>) -> Self {
        PureState { n_sites, amps }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn dim(&self) -> usize {
        self.amps.len()
    }
    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }
    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amps
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn density(&self) -> DensityMatrix {
        let col = self.amps.view().insert_axis(Axis(1));
        let mat = col.dot(&dagger(&col));
        DensityMatrix {
            n_sites: self.n_sites,
            mat,
        }
    }
}

fn check_len(n_sites: usize, len: usize) -> Result<()> {
    if n_sites > MAX_SITES || len != 1usize << n_sites {
        return Err(Error::Dimension(format!(
            "{len} amplitudes for {n_sites} sites"
        )));
    }
    Ok(())
}

pub fn norm_sqr(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Hermitian, positive semidefinite, unit-trace matrix on `n_sites` qubits.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n_sites: usize,
    mat: Array2<C64>,
}

impl DensityMatrix {
    pub fn new(n_sites: usize, mat: Array2<C64>) -> Result<Self> {
        let d = 1usize << n_sites;
        if mat.dim() != (d, d) {
            return Err(Error::Dimension(format!(
                "{:?} density matrix for {n_sites} sites",
                mat.dim()
            )));
        }
        if hermiticity_defect(&mat) > NORM_TOL {
            return Err(Error::InvalidArgument("density matrix not Hermitian".into()));
        }
        let tr = linalg::trace(&mat).re;
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("trace {tr} != 1")));
        }
        let (w, _) = hermitian_eig(&mat)?;
        if w[0] < -NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {:.3e}",
                w[0]
            )));
        }
        Ok(DensityMatrix { n_sites, mat })
    }

    pub(crate) fn from_raw(n_sites: usize, mat: Array2<C64>) -> Self {
        DensityMatrix { n_sites, mat }
    }

    pub fn maximally_mixed(n_sites: usize) -> Self {
        let d = 1usize << n_sites;
        let mat = Array2::from_diag(&Array1::from_elem(d, C64::new(1.0 / d as f64, 0.0)));
        DensityMatrix { n_sites, mat }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }
    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn entropy(&self) -> Result<f64> {
        linalg::von_neumann_entropy(&self.mat)
    }

    pub fn partial_trace(&self, partition: &Partition) -> Result<DensityMatrix> {
        if partition.n_total() != self.n_sites {
            return Err(Error::Dimension("partition size differs from state".into()));
        }
        let mat = partition.reduce_operator(&self.mat)?;
        Ok(DensityMatrix {
            n_sites: partition.n_a(),
            mat,
        })
    }
}

/// Reduced state of a pure state on subsystem A.
pub fn partial_trace(psi: &PureState, partition: &Partition) -> Result<DensityMatrix> {
    if partition.n_total() != psi.n_sites() {
        return Err(Error::Dimension("partition size differs from state".into()));
    }
    Ok(DensityMatrix {
        n_sites: partition.n_a(),
        mat: partition.reduce_pure(psi.amplitudes())?,
    })
}

/// Orthonormal measurement basis on a register of `n_sites` qubits.
#[derive(Clone, Debug)]
pub enum MeasurementBasis {
    Computational,
    /// Basis vectors in the columns.
    Custom(Array2<C64>),
}

impl MeasurementBasis {
    pub fn custom(vectors: Array2<C64>) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() {
            return Err(Error::Dimension("basis matrix must be square".into()));
        }
        let gram = dagger(&vectors.view()).dot(&vectors);
        let eye = Array2::<C64>::eye(vectors.nrows());
        if max_abs(&(gram - eye)) > 1e-8 {
            return Err(Error::InvalidArgument("basis is not orthonormal".into()));
        }
        Ok(MeasurementBasis::Custom(vectors))
    }

    /// Outcome probabilities `<xi|rho|xi>`, clamped at zero.
    pub fn probabilities(&self, rho: &Array2<C64>) -> Result<Vec<f64>> {
        Ok(self.diagonal(rho)?.into_iter().map(|p| p.max(0.0)).collect())
    }

    /// `<xi|op|xi>` for every basis vector, real part.
    pub fn diagonal(&self, op: &Array2<C64>) -> Result<Vec<f64>> {
        match self {
            MeasurementBasis::Computational => Ok(op.diag().iter().map(|z| z.re).collect()),
            MeasurementBasis::Custom(u) => {
                if u.nrows() != op.nrows() {
                    return Err(Error::Dimension("basis and operator differ in size".into()));
                }
                let ou = op.dot(u);
                Ok((0..u.ncols())
                    .map(|k| {
                        u.column(k)
                            .iter()
                            .zip(ou.column(k).iter())
                            .map(|(a, b)| (a.conj() * b).re)
                            .sum()
                    })
                    .collect())
            }
        }
    }
}

/// `psi = sum_k s_k |a_k> (x) |b_k>` with `s` descending.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Array1<f64>,
    /// `|a_k>` in the columns, `d_a x k`.
    pub vectors_a: Array2<C64>,
    /// `|b_k>` in the columns, `d_abar x k`.
    pub vectors_abar: Array2<C64>,
}

impl SchmidtDecomposition {
    pub fn entanglement_entropy(&self) -> f64 {
        let p: Vec<f64> = self.coefficients.iter().map(|s| s * s).collect();
        linalg::entropy_of_spectrum(&p)
    }
}

pub fn schmidt(psi: &PureState, partition: &Partition) -> Result<SchmidtDecomposition> {
    let m = partition.reshape(psi.amplitudes())?;
    let (u, s, vt) = thin_svd(&m)?;
    Ok(SchmidtDecomposition {
        coefficients: s,
        vectors_a: u,
        vectors_abar: vt.t().to_owned(),
    })
}
