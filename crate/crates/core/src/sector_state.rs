//! Lattice state restricted to the single-excitation sector.
//!
//! Site labels are 1-based: basis state `|n⟩` has qubit `n` excited and
//! every other qubit in its ground state. The density matrix is stored
//! densely; a pair operation touches two rows and two columns.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::LatticeError;
use crate::qchannel::{Mat2, C64};

/// Two neighbouring sites `(a, b)` with `b = a + 1`, or the ring closure `(N, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairIndex {
    a: usize,
    b: usize,
}

impl PairIndex {
    pub fn new(a: usize, b: usize, n_sites: usize) -> Result<Self, LatticeError> {
        for site in [a, b] {
            if site == 0 || site > n_sites {
                return Err(LatticeError::SiteOutOfRange { site, n_sites });
            }
        }
        let adjacent = b == a + 1 || (a == n_sites && b == 1 && n_sites > 1);
        if a == b || !adjacent {
            return Err(LatticeError::InvalidPair(a, b));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn contains(&self, site: usize) -> bool {
        self.a == site || self.b == site
    }

    fn zero_based(&self) -> (usize, usize) {
        (self.a - 1, self.b - 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorState {
    rho: DMatrix<C64>,
}

impl SectorState {
    /// Pure state `|site⟩⟨site|` on `n_sites` sites.
    pub fn basis_state(n_sites: usize, site: usize) -> Result<Self, LatticeError> {
        if site == 0 || site > n_sites {
            return Err(LatticeError::SiteOutOfRange { site, n_sites });
        }
        let mut rho = DMatrix::zeros(n_sites, n_sites);
        rho[(site - 1, site - 1)] = C64::new(1.0, 0.0);
        Ok(Self { rho })
    }

    /// Wraps an existing matrix. The caller is responsible for it being a
    /// valid (possibly sub-normalised) density matrix.
    pub fn from_matrix(rho: DMatrix<C64>) -> Self {
        assert!(rho.is_square(), "density matrix must be square");
        Self { rho }
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(populations: &[f64]) -> Self {
        let n = populations.len();
        let mut rho = DMatrix::zeros(n, n);
        for (i, &p) in populations.iter().enumerate() {
            rho[(i, i)] = C64::new(p, 0.0);
        }
        Self { rho }
    }

    pub fn n_sites(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.rho
    }

    /// Entry `ρ_{ab}` with 1-based site labels.
    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.rho[(a - 1, b - 1)]
    }

    pub fn population(&self, site: usize) -> f64 {
        self.rho[(site - 1, site - 1)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_sites()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n_sites()).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.n_sites();
        let mut max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    max = max.max(self.rho[(i, j)].norm());
                }
            }
        }
        max
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.n_sites();
        let mut max = 0.0f64;
        for i in 0..n {
            for j in i..n {
                max = max.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        max
    }

    /// Smallest eigenvalue of the Hermitian part. O(N³).
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Conjugates the pair block by `u`, extended as the identity elsewhere.
    pub fn pair_unitary(&mut self, pair: PairIndex, u: &Mat2) {
        let (a, b) = pair.zero_based();
        let n = self.n_sites();
        let (u11, u12, u21, u22) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        for j in 0..n {
            let (ra, rb) = (self.rho[(a, j)], self.rho[(b, j)]);
            self.rho[(a, j)] = u11 * ra + u12 * rb;
            self.rho[(b, j)] = u21 * ra + u22 * rb;
        }
        let (c11, c12, c21, c22) = (u11.conj(), u12.conj(), u21.conj(), u22.conj());
        for i in 0..n {
            let (ca, cb) = (self.rho[(i, a)], self.rho[(i, b)]);
            self.rho[(i, a)] = ca * c11 + cb * c12;
            self.rho[(i, b)] = ca * c21 + cb * c22;
        }
    }

    /// Local phase damping on both qubits of the pair: `ρ_ab` scales by
    /// `1 - ξ`, pair-to-rest coherences by `√(1 - ξ)`.
    pub fn pair_dephase(&mut self, pair: PairIndex, xi: f64) {
        if xi == 0.0 {
            return;
        }
        let (a, b) = pair.zero_based();
        let f = (1.0 - xi).sqrt();
        for m in 0..self.n_sites() {
            if m == a || m == b {
                continue;
            }
            for s in [a, b] {
                self.rho[(s, m)] *= f;
                self.rho[(m, s)] *= f;
            }
        }
        let f2 = 1.0 - xi;
        self.rho[(a, b)] *= f2;
        self.rho[(b, a)] *= f2;
    }

    /// Amplitude damping on the pair with Kraus operators `L0 ⊕ 1` and
    /// `L1 ⊕ 0`. Positive `η` pushes population onto `a`, negative onto `b`.
    pub fn pair_damp(&mut self, pair: PairIndex, eta: f64) {
        if eta == 0.0 {
            return;
        }
        let (a, b) = pair.zero_based();
        let (x, y) = if eta >= 0.0 { (a, b) } else { (b, a) };
        let s = eta.abs();
        let g = (1.0 - s).sqrt();
        let moved = self.rho[(y, y)] * s;
        for m in 0..self.n_sites() {
            if m == x || m == y {
                continue;
            }
            self.rho[(y, m)] *= g;
            self.rho[(m, y)] *= g;
        }
        self.rho[(x, y)] *= g;
        self.rho[(y, x)] *= g;
        self.rho[(x, x)] += moved;
        self.rho[(y, y)] *= 1.0 - s;
    }

    /// Zeroes row and column `site`.
    pub(crate) fn zero_site(&mut self, site: usize) {
        let r = site - 1;
        self.rho.row_mut(r).fill(C64::default());
        self.rho.column_mut(r).fill(C64::default());
    }

    /// Row-major CSV dump: one line per basis index, `re,im` pairs per entry.
    pub fn to_csv(&self) -> String {
        let n = self.n_sites();
        let mut out = String::with_capacity(n * n * 24);
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                let z = self.rho[(i, j)];
                write!(out, "{:e},{:e}", z.re, z.im).expect("write to string");
            }
            out.push('\n');
        }
        out
    }
}
