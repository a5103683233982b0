use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert_core::{haar_state, haar_unitary, Partition, PureState};
use crate::model_library::{split_hamiltonian, HamiltonianBundle};
use crate::C64;

/// Traces of a full-chain operator that enter the random-state averages.
/// `S` is the smaller side of the cut, `B` the larger.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OperatorTraces {
    pub d_s: f64,
    pub d_b: f64,
    pub tr_h2: f64,
    pub tr_h: f64,
    /// `Tr_B[(Tr_S H)^2]`.
    pub tr_b_sq_of_tr_s: f64,
    /// `Tr_S[(Tr_B H)^2]`.
    pub tr_s_sq_of_tr_b: f64,
}

pub(crate) fn tr_square(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn tr_product(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += a[[i, j]] * b[[j, i]];
        }
    }
    s.re
}

impl OperatorTraces {
    /// `small` must be the smaller subsystem (ties allowed).
    pub fn new(h: &Array2<C64>, small: &Partition) -> Result<Self> {
        if small.n_a() > small.n_abar() {
            return Err(Error::InvalidArgument("partition A must be the smaller side".into()));
        }
        let tr_b_h = small.reduce_operator(h)?;
        let tr_s_h = small.complement().reduce_operator(h)?;
        Ok(OperatorTraces {
            d_s: small.d_a() as f64,
            d_b: small.d_abar() as f64,
            tr_h2: tr_square(h),
            tr_h: h.diag().iter().map(|z| z.re).sum(),
            tr_b_sq_of_tr_s: tr_square(&tr_s_h),
            tr_s_sq_of_tr_b: tr_square(&tr_b_h),
        })
    }
}

/// Coefficients `(flat, coefficient of I)` of the Haar averages of
/// `F_{S,+}` and `F_{S,-}`.
fn plus_minus(t: &OperatorTraces) -> ((f64, f64), (f64, f64)) {
    let (ds, db) = (t.d_s, t.d_b);
    let (is, ib) = (1.0 / ds, 1.0 / db);
    let den = (ds * ds - 1.0) * (db * db - 1.0);
    let k = ds * ds - 1.0;
    let (h2, h1sq, g7, g6) = (t.tr_h2, t.tr_h * t.tr_h, t.tr_b_sq_of_tr_s, t.tr_s_sq_of_tr_b);

    let plus_flat = (h2 * k * (1.0 - is * ib) + g6 * k * (is - ib)) / den;
    let plus_i = (h2 * (is - ib) + h1sq * (-is + ib) + g7 * (-1.0 + is * ib) + g6 * (1.0 - is * ib)) / (4.0 * den);

    let minus_flat = (-h2 * k * is * ib - h1sq * k * is * ib + g7 * k * is + g6 * k * is) / den;
    let minus_i = ((h2 + h1sq) * (is + ib) + (g7 + g6) * (-1.0 - is * ib)) / (4.0 * den);
    ((plus_flat, plus_i), (minus_flat, minus_i))
}

/// Marchenko-Pastur estimate of the average of
/// `sum_{jk} 2 (p_j - p_k)^2 / (p_j + p_k)` over the Schmidt spectrum.
pub fn schmidt_integral_mp(d_s: f64, d_b: f64) -> f64 {
    2.0 * d_s * d_s / d_b
}

/// Random-pure-state prediction for the late-time QFI of both sides of a cut.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HaarSaturation {
    pub n_s: usize,
    pub n_b: usize,
    pub integral: f64,
    pub f_s_flat: f64,
    pub f_s_nonflat: f64,
    pub f_s: f64,
    pub f_b_flat: f64,
    pub f_b_nonflat: f64,
    pub f_b: f64,
    /// `2 d_B^{-1} (Tr_S H_S^2 - (Tr_S H_S)^2 / d_S)`.
    pub f_s_thermo: f64,
    /// `4 (Tr_B H_B^2 / d_B - (Tr_B H_B)^2 / d_B^2)`.
    pub f_b_thermo: f64,
    pub traces: OperatorTraces,
}

/// Haar averages of `F_S`, `F_B` with the Schmidt integral set to its
/// Marchenko-Pastur value. Subsystem A of `partition` plays S and must be
/// the smaller side.
pub fn haar_saturation_fa(bundle: &HamiltonianBundle, partition: &Partition) -> Result<HaarSaturation> {
    if partition.n_a() > partition.n_abar() {
        return invalid(format!(
            "S must be the smaller side, got n_S = {} > {}",
            partition.n_a(),
            partition.n_abar()
        ));
    }
    let i = schmidt_integral_mp(partition.d_a() as f64, partition.d_abar() as f64);
    haar_saturation_with_integral(bundle, partition, i)
}

/// Same as [`haar_saturation_fa`] with an explicit Schmidt integral;
/// `small` is the smaller side.
pub fn haar_saturation_with_integral(bundle: &HamiltonianBundle, small: &Partition, integral: f64) -> Result<HaarSaturation> {
    if small.n_total() != bundle.n_sites() {
        return Err(Error::Dimension("partition size differs from Hamiltonian".into()));
    }
    if small.n_a() == 0 {
        return Err(Error::InvalidArgument("both sides of the cut must be non-empty".into()));
    }
    let t = OperatorTraces::new(bundle.matrix(), small)?;
    let ((pf, pi), (mf, mi)) = plus_minus(&t);
    let d = t.d_s * t.d_b;
    let f_s_flat = 2.0 * pf - 2.0 * mf;
    let f_s_nonflat = integral * (2.0 * pi - 2.0 * mi);
    let f_b_flat = 4.0 * t.tr_h2 / d - 2.0 * pf - 2.0 * mf;
    let f_b_nonflat = integral * (-2.0 * pi - 2.0 * mi);

    let split = split_hamiltonian(bundle, small)?;
    let local_var = |m: &Array2<C64>| {
        let dd = m.nrows() as f64;
        let tr: f64 = m.diag().iter().map(|z| z.re).sum();
        (tr_square(m), tr, dd)
    };
    let (s2, s1, ds) = local_var(&split.h_a);
    let (b2, b1, db) = local_var(&split.h_abar);
    Ok(HaarSaturation {
        n_s: small.n_a(),
        n_b: small.n_abar(),
        integral,
        f_s_flat,
        f_s_nonflat,
        f_s: f_s_flat + f_s_nonflat,
        f_b_flat,
        f_b_nonflat,
        f_b: f_b_flat + f_b_nonflat,
        f_s_thermo: 2.0 / db * (s2 - s1 * s1 / ds),
        f_b_thermo: 4.0 * (b2 / db - b1 * b1 / (db * db)),
        traces: t,
    })
}

/// Late-time QFI of A in the thermodynamic limit: the smaller side keeps
/// `2 (d_A/d_abar) var_A`, the larger side `4 var_A`, with
/// `var_A = Tr H_A^2 / d_A - (Tr H_A / d_A)^2` over the terms inside A.
pub fn headline_saturation(bundle: &HamiltonianBundle, partition: &Partition) -> Result<f64> {
    let split = split_hamiltonian(bundle, partition)?;
    let da = partition.d_a() as f64;
    let tr: f64 = split.h_a.diag().iter().map(|z| z.re).sum();
    let var = tr_square(&split.h_a) / da - (tr / da).powi(2);
    if partition.n_a() < partition.n_abar() {
        Ok(2.0 * da / partition.d_abar() as f64 * var)
    } else {
        Ok(4.0 * var)
    }
}

/// Finite-temperature version: `2 var e^{S_A - S_abar}` when `S_A < S_abar`,
/// else `4 var`. At equality the larger-side branch is used.
pub fn finite_temperature_fa(s_a: f64, s_abar: f64, var_h_a: f64) -> f64 {
    if s_a < s_abar {
        2.0 * var_h_a * (s_a - s_abar).exp()
    } else {
        4.0 * var_h_a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    /// Full Haar state; the Schmidt spectrum is Wishart distributed.
    Wishart,
    /// Schmidt values fixed to `1 / d_S`, Haar bases on both sides.
    Flat,
}

/// Random pure state `sum_i sqrt(p_i) V|i> (x) U|i~>` on `n_s + n_b` sites
/// with S the leading `n_s` sites.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HaarModelSpec {
    pub n_s: usize,
    pub n_b: usize,
    pub spectrum: SpectrumMode,
}

impl HaarModelSpec {
    pub fn new(n_s: usize, n_b: usize, spectrum: SpectrumMode) -> Result<Self> {
        if n_s == 0 || n_s > n_b {
            return invalid(format!("need 0 < n_S <= n_B, got {n_s}, {n_b}"));
        }
        Ok(HaarModelSpec { n_s, n_b, spectrum })
    }

    pub fn partition(&self) -> Result<Partition> {
        Partition::leading(self.n_s + self.n_b, self.n_s)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PureState> {
        let n = self.n_s + self.n_b;
        match self.spectrum {
            SpectrumMode::Wishart => haar_state(n, rng),
            SpectrumMode::Flat => {
                let (ds, db) = (1usize << self.n_s, 1usize << self.n_b);
                let v = haar_unitary(ds, rng);
                let u = haar_unitary(db, rng);
                let c = 1.0 / (ds as f64).sqrt();
                let m = Array2::from_shape_fn((ds, db), |(a, b)| {
                    (0..ds).map(|i| v[[a, i]] * u[[b, i]]).sum::<C64>() * c
                });
                PureState::normalized(n, self.partition()?.unreshape(&m)?)
            }
        }
    }
}
