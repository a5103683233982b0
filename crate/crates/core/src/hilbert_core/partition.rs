use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Split of an `n_total`-site chain into a subsystem A and its complement.
///
/// Sites are 0-based. Basis index `x` of the full chain has bit `i` equal to
/// the state of site `i`. Inside A the k-th smallest site of A becomes bit k
/// of the local index; the complement is ordered the same way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionSpec", into = "PartitionSpec")]
pub struct Partition {
    n_total: usize,
    sites_a: Vec<usize>,
    sites_abar: Vec<usize>,
    a_of: Vec<u32>,
    b_of: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub n_total: usize,
    pub sites_a: Vec<usize>,
}

impl TryFrom<PartitionSpec> for Partition {
    type Error = Error;
    fn try_from(s: PartitionSpec) -> Result<Self> {
        Partition::new(s.n_total, s.sites_a)
    }
}

impl From<Partition> for PartitionSpec {
    fn from(p: Partition) -> Self {
        PartitionSpec {
            n_total: p.n_total,
            sites_a: p.sites_a,
        }
    }
}

pub const MAX_SITES: usize = 24;

impl Partition {
    pub fn new(n_total: usize, mut sites_a: Vec<usize>) -> Result<Self> {
        if n_total == 0 || n_total > MAX_SITES {
            return invalid(format!("n_total = {n_total} out of range 1..={MAX_SITES}"));
        }
        sites_a.sort_unstable();
        for w in sites_a.windows(2) {
            if w[0] == w[1] {
                return invalid(format!("duplicate site {}", w[0]));
            }
        }
        if let Some(&s) = sites_a.last() {
            if s >= n_total {
                return invalid(format!("site {s} outside chain of {n_total} sites"));
            }
        }
        let sites_abar: Vec<usize> = (0..n_total).filter(|s| !sites_a.contains(s)).collect();
        let d = 1usize << n_total;
        let mut a_of = vec![0u32; d];
        let mut b_of = vec![0u32; d];
        for x in 0..d {
            a_of[x] = gather(x, &sites_a) as u32;
            b_of[x] = gather(x, &sites_abar) as u32;
        }
        Ok(Partition {
            n_total,
            sites_a,
            sites_abar,
            a_of,
            b_of,
        })
    }

    /// A = sites `start..start+len`.
    pub fn contiguous(n_total: usize, start: usize, len: usize) -> Result<Self> {
        Self::new(n_total, (start..start + len).collect())
    }

    /// A = the first `n_a` sites.
    pub fn leading(n_total: usize, n_a: usize) -> Result<Self> {
        Self::contiguous(n_total, 0, n_a)
    }

    pub fn complement(&self) -> Partition {
        Partition {
            n_total: self.n_total,
            sites_a: self.sites_abar.clone(),
            sites_abar: self.sites_a.clone(),
            a_of: self.b_of.clone(),
            b_of: self.a_of.clone(),
        }
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }
    pub fn n_a(&self) -> usize {
        self.sites_a.len()
    }
    pub fn n_abar(&self) -> usize {
        self.sites_abar.len()
    }
    pub fn d(&self) -> usize {
        1 << self.n_total
    }
    pub fn d_a(&self) -> usize {
        1 << self.n_a()
    }
    pub fn d_abar(&self) -> usize {
        1 << self.n_abar()
    }
    pub fn sites_a(&self) -> &[usize] {
        &self.sites_a
    }
    pub fn sites_abar(&self) -> &[usize] {
        &self.sites_abar
    }

    /// Local (A, complement) indices of a full basis index.
    pub fn split_index(&self, x: usize) -> (usize, usize) {
        (self.a_of[x] as usize, self.b_of[x] as usize)
    }

    pub fn full_index(&self, a: usize, b: usize) -> usize {
        scatter(a, &self.sites_a) | scatter(b, &self.sites_abar)
    }

    /// Amplitudes as a `d_a x d_abar` matrix.
    pub fn reshape(&self, psi: &Array1<C64>) -> Result<Array2<C64>> {
        if psi.len() != self.d() {
            return Err(Error::Dimension(format!(
                "state of length {} for {} sites",
                psi.len(),
                self.n_total
            )));
        }
        let mut m = Array2::zeros((self.d_a(), self.d_abar()));
        for (x, &z) in psi.iter().enumerate() {
            m[[self.a_of[x] as usize, self.b_of[x] as usize]] = z;
        }
        Ok(m)
    }

    pub fn unreshape(&self, m: &Array2<C64>) -> Result<Array1<C64>> {
        if m.dim() != (self.d_a(), self.d_abar()) {
            return Err(Error::Dimension("matrix shape does not match partition".into()));
        }
        let mut psi = Array1::zeros(self.d());
        for x in 0..self.d() {
            psi[x] = m[[self.a_of[x] as usize, self.b_of[x] as usize]];
        }
        Ok(psi)
    }

    /// `Tr_abar |psi><psi|`.
    pub fn reduce_pure(&self, psi: &Array1<C64>) -> Result<Array2<C64>> {
        let m = self.reshape(psi)?;
        Ok(m.dot(&super::linalg::dagger(&m.view())))
    }

    /// `Tr_abar rho` for an operator on the full chain.
    pub fn reduce_operator(&self, rho: &Array2<C64>) -> Result<Array2<C64>> {
        let d = self.d();
        if rho.dim() != (d, d) {
            return Err(Error::Dimension("operator does not match partition".into()));
        }
        let (da, db) = (self.d_a(), self.d_abar());
        let mut out = Array2::zeros((da, da));
        for b in 0..db {
            for a1 in 0..da {
                let x1 = self.full_index(a1, b);
                for a2 in 0..da {
                    out[[a1, a2]] += rho[[x1, self.full_index(a2, b)]];
                }
            }
        }
        Ok(out)
    }

    /// `O_A (x) 1` as a full-chain operator.
    pub fn embed_a(&self, op: &Array2<C64>) -> Result<Array2<C64>> {
        let da = self.d_a();
        if op.dim() != (da, da) {
            return Err(Error::Dimension("operator does not match subsystem A".into()));
        }
        let d = self.d();
        let mut out = Array2::zeros((d, d));
        for b in 0..self.d_abar() {
            for a1 in 0..da {
                for a2 in 0..da {
                    out[[self.full_index(a1, b), self.full_index(a2, b)]] = op[[a1, a2]];
                }
            }
        }
        Ok(out)
    }
}

fn gather(x: usize, sites: &[usize]) -> usize {
    sites
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &s)| acc | (((x >> s) & 1) << k))
}

fn scatter(local: usize, sites: &[usize]) -> usize {
    sites
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &s)| acc | (((local >> k) & 1) << s))
}
