use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `coeff * prod_k P_k(site_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coeff: f64, ops: Vec<(usize, Pauli)>) -> Self {
        PauliTerm { coeff, ops }
    }

    /// Bits flipped by the string.
    pub fn flip_mask(&self) -> usize {
        self.ops
            .iter()
            .filter(|(_, p)| *p != Pauli::Z)
            .fold(0, |m, (s, _)| m | (1 << s))
    }

    /// `P|x> = phase |y>` for the bare string (coefficient not included).
    pub fn act(&self, x: usize) -> (usize, C64) {
        let mut y = x;
        let mut phase = C64::new(1.0, 0.0);
        for &(s, p) in &self.ops {
            let bit = (y >> s) & 1;
            match p {
                Pauli::X => y ^= 1 << s,
                Pauli::Y => {
                    y ^= 1 << s;
                    phase *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (y, phase)
    }

    /// `out += coeff * P psi`.
    pub fn apply_add(&self, psi: &Array1<C64>, out: &mut Array1<C64>) {
        for (x, &z) in psi.iter().enumerate() {
            let (y, ph) = self.act(x);
            out[y] += ph * z * self.coeff;
        }
    }
}
