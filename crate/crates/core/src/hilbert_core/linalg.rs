use ndarray::{Array1, Array2, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, JobSvd, SVDDC, UPLO};

use crate::error::{Error, Result};
use crate::C64;

/// Conjugate transpose.
pub fn dagger(m: &ArrayView2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Largest absolute entry of `m - m^dagger`.
pub fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_real(m: &Array2<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn check_square(m: &Array2<C64>, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Eigendecomposition of a Hermitian matrix, ascending eigenvalues,
/// eigenvectors in columns.
///
/// Real symmetric input goes through the real LAPACK driver.
pub fn hermitian_eig(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    check_square(m, "matrix")?;
    let scale = max_abs(m).max(1.0);
    let defect = hermiticity_defect(m);
    if defect > 1e-8 * scale {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    if is_real(m) {
        let re = m.mapv(|z| z.re);
        let (w, v) = real_symmetric_eig(&re)?;
        return Ok((w, v.mapv(|x| C64::new(x, 0.0))));
    }
    // column-major copy: LAPACK otherwise sees the conjugate of `m`
    let mut f = Array2::zeros(m.dim().f());
    f.assign(m);
    let (w, v) = f.eigh(UPLO::Lower)?;
    Ok((w, v))
}

pub fn real_symmetric_eig(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("matrix must be square".into()));
    }
    Ok(m.eigh(UPLO::Lower)?)
}

/// Thin SVD `m = u diag(s) vt` with singular values in descending order.
pub fn thin_svd(m: &Array2<C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>)> {
    let (u, s, vt) = m.svddc(JobSvd::Some)?;
    match (u, vt) {
        (Some(u), Some(vt)) => Ok((u, s, vt)),
        _ => Err(Error::Numerical("SVD returned no singular vectors".into())),
    }
}

/// Square root of a positive semidefinite matrix; small negative
/// eigenvalues from round-off are clamped to zero.
pub fn psd_sqrt(m: &Array2<C64>) -> Result<Array2<C64>> {
    let (w, v) = hermitian_eig(m)?;
    Ok(reconstruct(&v, &w.mapv(|x| x.max(0.0).sqrt())))
}

/// `v diag(w) v^dagger`.
pub fn reconstruct(v: &Array2<C64>, w: &Array1<f64>) -> Array2<C64> {
    let mut scaled = v.clone();
    for (mut col, &x) in scaled.axis_iter_mut(Axis(1)).zip(w.iter()) {
        col.mapv_inplace(|z| z * x);
    }
    scaled.dot(&dagger(&v.view()))
}

/// Shannon entropy (natural log) of a probability vector; zeros are skipped.
pub fn entropy_of_spectrum(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .sum()
}

pub fn von_neumann_entropy(rho: &Array2<C64>) -> Result<f64> {
    let (w, _) = hermitian_eig(rho)?;
    Ok(entropy_of_spectrum(w.as_slice().unwrap_or(&w.to_vec())))
}

/// `(m + m^dagger) / 2` in place.
pub fn hermitize(m: &mut Array2<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[[i, i]].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[[i, j]] + m[[j, i]].conj()) * 0.5;
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
    }
}

/// Kronecker product `a (x) b` with the index convention `(i_a, i_b) -> i_a + d_a * i_b`,
/// i.e. `a` acts on the low-order bits.
pub fn kron_low_high(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (da, db) = (a.nrows(), b.nrows());
    let mut out = Array2::zeros((da * db, da * db));
    for ib in 0..db {
        for jb in 0..db {
            let bv = b[[ib, jb]];
            if bv == C64::new(0.0, 0.0) {
                continue;
            }
            for ia in 0..da {
                for ja in 0..da {
                    out[[ia + da * ib, ja + da * jb]] = a[[ia, ja]] * bv;
                }
            }
        }
    }
    out
}
