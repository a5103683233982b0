use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::haar::{tr_product, tr_square};
use crate::error::{invalid, Error, Result};
use crate::hilbert_core::linalg::{hermiticity_defect, max_abs, trace};
use crate::hilbert_core::{random_product_state, stream_rng, Partition};
use crate::model_library::HamiltonianBundle;
use crate::C64;

/// Brownian-evolved late-time toy state: S (the leading `n_s` sites) is
/// maximally entangled with the range of `p_b` on the complement, and the
/// complement is scrambled by a Brownian unitary.
#[derive(Clone, Debug)]
pub struct BgueSpec {
    pub n_s: usize,
    pub d_s: f64,
    pub d_b: f64,
    /// Projector on B onto the subspace entangled with S at `t = 0`.
    pub p_b: Array2<C64>,
    /// `g_1 ... g_12` (index 0 holds `g_1`).
    pub g: [f64; 12],
}

impl BgueSpec {
    /// `P_B = 1_{B1} (x) |phi_0><phi_0|_{B2}` with `B1` the `n_s` sites
    /// after S and `phi_0` a random product state on the rest.
    pub fn new(bundle: &HamiltonianBundle, n_s: usize, seed: u64) -> Result<Self> {
        let n = bundle.n_sites();
        if n_s == 0 || 2 * n_s >= n {
            return invalid(format!("need 0 < 2 n_s < n, got n_s = {n_s}, n = {n}"));
        }
        let n_b2 = n - 2 * n_s;
        let phi0 = random_product_state(n_b2, &mut stream_rng(seed, 0))?;
        let d_b1 = 1usize << n_s;
        let d_b = 1usize << (n - n_s);
        let phi = phi0.amplitudes();
        // B index = b1 + d_b1 * b2 in the complement's local ordering
        let p_b = Array2::from_shape_fn((d_b, d_b), |(x, y)| {
            if x % d_b1 != y % d_b1 {
                C64::new(0.0, 0.0)
            } else {
                phi[x / d_b1] * phi[y / d_b1].conj()
            }
        });
        Self::with_projector(bundle, n_s, p_b)
    }

    pub fn with_projector(bundle: &HamiltonianBundle, n_s: usize, p_b: Array2<C64>) -> Result<Self> {
        let n = bundle.n_sites();
        let s = Partition::leading(n, n_s)?;
        let (d_s, d_b) = (s.d_a(), s.d_abar());
        if d_b <= 2 {
            return invalid("the Brownian moments need d_B > 2");
        }
        if p_b.dim() != (d_b, d_b) {
            return Err(Error::Dimension(format!("P_B must be {d_b} x {d_b}")));
        }
        if hermiticity_defect(&p_b) > 1e-10 || max_abs(&(p_b.dot(&p_b) - &p_b)) > 1e-10 {
            return invalid("P_B is not an orthogonal projector");
        }
        if (trace(&p_b).re - d_s as f64).abs() > 1e-8 {
            return invalid("Tr P_B must equal d_S");
        }
        let h = bundle.matrix();
        let b = s.complement();
        let p = b.embed_a(&p_b)?;
        let ph = p.dot(h);
        let x = s.reduce_operator(&ph)?;
        let tr_b_h = s.reduce_operator(h)?;
        let t = b.reduce_operator(h)?;
        let pt = p_b.dot(&t);
        let tr_h: f64 = trace(h).re;
        let tr_ph = trace(&ph).re;
        let g = [
            tr_square(h),
            tr_product(h, &h.dot(&p)),
            tr_product(&x, &x),
            tr_product(&ph, &ph),
            tr_product(&x, &tr_b_h),
            tr_square(&tr_b_h),
            tr_square(&t),
            tr_product(&pt, &t),
            tr_ph * tr_ph,
            tr_product(&pt, &pt),
            tr_ph * tr_h,
            tr_h * tr_h,
        ];
        Ok(BgueSpec {
            n_s,
            d_s: d_s as f64,
            d_b: d_b as f64,
            p_b,
            g,
        })
    }
}

/// `f_1(t) ... f_8(t)` of the Brownian second moment.
pub fn bgue_f(d_b: f64, t: f64) -> [f64; 8] {
    let d = d_b;
    let col = [
        1.0,
        (-t).exp(),
        (-(2.0 - 2.0 / d) * t).exp(),
        (-2.0 * t).exp(),
        (-(2.0 + 2.0 / d) * t).exp(),
    ];
    let m = [
        [0.0, 0.0, 0.25, 0.5, 0.25],
        [
            0.0,
            (d * d - 2.0) / (d * (d * d - 4.0)),
            -1.0 / (4.0 * (d - 2.0)),
            -1.0 / (2.0 * d),
            -1.0 / (4.0 * (d + 2.0)),
        ],
        [0.0, 0.0, -0.25, 0.0, 0.25],
        [0.0, -1.0 / (d * d - 4.0), 1.0 / (4.0 * (d - 2.0)), 0.0, -1.0 / (4.0 * (d + 2.0))],
        [
            1.0 / (d * d - 1.0),
            -2.0 / (d * d - 4.0),
            1.0 / (2.0 * (d - 1.0) * (d - 2.0)),
            0.0,
            1.0 / (2.0 * (d + 1.0) * (d + 2.0)),
        ],
        [0.0, 0.0, 0.25, -0.5, 0.25],
        [
            -1.0 / (d * d * d - d),
            4.0 / (d * (d * d - 4.0)),
            -1.0 / (2.0 * (d - 1.0) * (d - 2.0)),
            0.0,
            1.0 / (2.0 * (d + 1.0) * (d + 2.0)),
        ],
        [
            0.0,
            2.0 / (d * (d * d - 4.0)),
            -1.0 / (4.0 * (d - 2.0)),
            1.0 / (2.0 * d),
            -1.0 / (4.0 * (d + 2.0)),
        ],
    ];
    let mut f = [0.0; 8];
    for (fi, row) in f.iter_mut().zip(m.iter()) {
        *fi = row.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
    }
    f
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BguePoint {
    pub t: f64,
    pub f_s_plus: f64,
    pub f_s_minus: f64,
    pub h2: f64,
    pub f_s: f64,
    pub f_b_plus: f64,
    pub f_ent: f64,
    pub f_rot: f64,
    pub f_b: f64,
}

pub fn bgue_point(spec: &BgueSpec, t: f64) -> Result<BguePoint> {
    if !(t >= 0.0) {
        return invalid(format!("time {t} must be non-negative"));
    }
    let f = bgue_f(spec.d_b, t);
    let [g1, g2, g3, g4, g5, g6, g7, g8, g9, g10, g11, g12] = spec.g;
    let ds = spec.d_s;
    let (i1, i2) = (1.0 / ds, 1.0 / (ds * ds));
    let plus = i2 * g4 * f[0]
        + (2.0 * i1 * g2 + 2.0 * i2 * g5) * f[1]
        + 2.0 * i2 * g3 * f[2]
        + (4.0 * i2 * g2 + 4.0 * i1 * g5) * f[3]
        + (g1 + i1 * g6) * f[4]
        + i2 * g4 * f[5]
        + (i1 * g1 + g6) * f[6]
        + (2.0 * i1 * g2 + 2.0 * i2 * g5) * f[7];
    let alpha = i1 / (ds * ds - 1.0);
    let beta = -i1 / (ds * ds * ds - ds);
    let c1 = alpha * g3 + beta * g4 + beta * g9 + alpha * g10;
    let minus = c1 * f[0]
        + (2.0 * i2 * g5 + 2.0 * i2 * g8) * f[1]
        + 2.0 * (beta * g3 + alpha * g4 + alpha * g9 + beta * g10) * f[2]
        + (4.0 * i2 * g2 + 4.0 * i2 * g11) * f[3]
        + (i1 * g6 + i1 * g7) * f[4]
        + c1 * f[5]
        + (i1 * g1 + i1 * g12) * f[6]
        + (2.0 * i2 * g5 + 2.0 * i2 * g8) * f[7];
    let e = (-t).exp();
    let h2 = i2 * g2 * e + g1 * (1.0 - e) / (ds * spec.d_b);
    let f_s = 2.0 * plus - 2.0 * minus;
    let f_rot = 4.0 * h2 - 4.0 * plus;
    Ok(BguePoint {
        t,
        f_s_plus: plus,
        f_s_minus: minus,
        h2,
        f_s,
        f_b_plus: 2.0 * h2 - plus,
        f_ent: f_s,
        f_rot,
        f_b: f_s + f_rot,
    })
}

pub fn bgue_curves(spec: &BgueSpec, t_grid: &[f64]) -> Result<Vec<BguePoint>> {
    t_grid.iter().map(|&t| bgue_point(spec, t)).collect()
}
