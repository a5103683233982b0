use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::EigVals;

use super::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::hilbert_core::linalg::{dagger, hermitize, trace};
use crate::hilbert_core::DensityMatrix;
use crate::model_library::{JumpOperator, LindbladSpec};
use crate::C64;

const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Largest subsystem for which the d^2 x d^2 generator is diagonalized.
pub const MAX_GAP_SITES: usize = 4;

/// `K = -iH - (gamma/2) sum L^dagger L`, so that the generator reads
/// `K rho + rho K^dagger + gamma sum L rho L^dagger`.
fn effective_k(spec: &LindbladSpec) -> Array2<C64> {
    let i = C64::new(0.0, 1.0);
    let mut k = spec.hamiltonian.matrix().mapv(|z| -i * z);
    for j in &spec.jumps {
        let ldl = dagger(&j.matrix.view()).dot(&j.matrix);
        k = k - ldl.mapv(|z| z * (0.5 * spec.gamma));
    }
    k
}

fn add_sandwich(jump: &JumpOperator, rho: &Array2<C64>, scale: f64, out: &mut Array2<C64>) {
    match &jump.pauli {
        Some(term) => {
            let d = rho.nrows();
            let s = scale * term.coeff * term.coeff;
            let acts: Vec<(usize, C64)> = (0..d).map(|x| term.act(x)).collect();
            for x1 in 0..d {
                let (y1, p1) = acts[x1];
                for x2 in 0..d {
                    let (y2, p2) = acts[x2];
                    out[[y1, y2]] += p1 * p2.conj() * rho[[x1, x2]] * s;
                }
            }
        }
        None => {
            let l = &jump.matrix;
            let t = l.dot(rho).dot(&dagger(&l.view()));
            out.scaled_add(C64::new(scale, 0.0), &t);
        }
    }
}

struct Generator<'a> {
    spec: &'a LindbladSpec,
    k: Array2<C64>,
    k_dag: Array2<C64>,
}

impl<'a> Generator<'a> {
    fn new(spec: &'a LindbladSpec) -> Self {
        let k = effective_k(spec);
        let k_dag = dagger(&k.view());
        Generator { spec, k, k_dag }
    }

    fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mut out = self.k.dot(rho) + rho.dot(&self.k_dag);
        for j in &self.spec.jumps {
            add_sandwich(j, rho, self.spec.gamma, &mut out);
        }
        out
    }
}

/// Right-hand side of the master equation at `rho`.
pub fn lindblad_apply(spec: &LindbladSpec, rho: &Array2<C64>) -> Result<Array2<C64>> {
    let d = spec.hamiltonian.dim();
    if rho.dim() != (d, d) {
        return Err(Error::Dimension("density matrix does not match the model".into()));
    }
    Ok(Generator::new(spec).apply(rho))
}

/// Classical RK4 with step at most `dt`, reporting states at `t_grid`.
///
/// Aborts when the trace drifts by more than 1e-6.
pub fn lindblad_rk4(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt: f64,
) -> Result<Trajectory<DensityMatrix>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return invalid(format!("step {dt} must be positive"));
    }
    if rho0.n_sites() != spec.n_sites() {
        return Err(Error::Dimension("initial state does not match the model".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return invalid("time grid must be non-negative and nondecreasing");
    }
    let gen = Generator::new(spec);
    let mut rho = rho0.matrix().clone();
    let mut now = 0.0;
    let mut states = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - now;
        if span > 0.0 {
            let steps = (span / dt).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rk4_step(&gen, &mut rho, h);
            }
            hermitize(&mut rho);
            let drift = (trace(&rho).re - 1.0).abs();
            if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
                return Err(Error::Numerical(format!("trace drift {drift:.3e} at t = {target}")));
            }
            now = target;
        }
        states.push(DensityMatrix::from_raw(spec.n_sites(), rho.clone()));
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
    })
}

fn rk4_step(gen: &Generator, rho: &mut Array2<C64>, h: f64) {
    let half = C64::new(0.5 * h, 0.0);
    let k1 = gen.apply(rho);
    let mut tmp = rho.clone();
    tmp.scaled_add(half, &k1);
    let k2 = gen.apply(&tmp);
    tmp.assign(rho);
    tmp.scaled_add(half, &k2);
    let k3 = gen.apply(&tmp);
    tmp.assign(rho);
    tmp.scaled_add(C64::new(h, 0.0), &k3);
    let k4 = gen.apply(&tmp);
    let w = h / 6.0;
    rho.scaled_add(C64::new(w, 0.0), &k1);
    rho.scaled_add(C64::new(2.0 * w, 0.0), &k2);
    rho.scaled_add(C64::new(2.0 * w, 0.0), &k3);
    rho.scaled_add(C64::new(w, 0.0), &k4);
}

/// Column-stacked superoperator: `vec(rho)[i + d j] = rho[i, j]`.
pub fn vectorized_generator(spec: &LindbladSpec) -> Array2<C64> {
    let d = spec.hamiltonian.dim();
    let k = effective_k(spec);
    let mut g = Array2::<C64>::zeros((d * d, d * d));
    // vec(A rho B)[(i,j)] = sum_{k,l} A[i,k] B[l,j] rho[k,l]
    for i in 0..d {
        for j in 0..d {
            let row = i + d * j;
            for kk in 0..d {
                g[[row, kk + d * j]] += k[[i, kk]];
                g[[row, i + d * kk]] += k[[j, kk]].conj();
            }
        }
    }
    for jump in &spec.jumps {
        let l = &jump.matrix;
        for i in 0..d {
            for j in 0..d {
                let row = i + d * j;
                for kk in 0..d {
                    let a = l[[i, kk]];
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for ll in 0..d {
                        g[[row, kk + d * ll]] += a * l[[j, ll]].conj() * spec.gamma;
                    }
                }
            }
        }
    }
    g
}

/// Smallest decay rate `-Re(lambda)` over the nonzero generator eigenvalues.
pub fn lindblad_gap(spec: &LindbladSpec) -> Result<f64> {
    if spec.n_sites() > MAX_GAP_SITES {
        return invalid(format!(
            "generator diagonalization limited to {MAX_GAP_SITES} sites"
        ));
    }
    let g = vectorized_generator(spec);
    let mut f = Array2::zeros(g.dim().f());
    f.assign(&g);
    let ev: Array1<C64> = f.eigvals()?;
    let scale = ev.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
    ev.iter()
        .filter(|z| z.norm() > 1e-9 * scale)
        .map(|z| -z.re)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))))
        .ok_or_else(|| Error::Numerical("generator has no nonzero eigenvalue".into()))
}
