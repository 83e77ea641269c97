//! Dense complex linear algebra helpers.
//!
//! Everything here works on small dense matrices (dimension of a few hundred
//! at most). Functions of Hermitian operators go through a full
//! eigendecomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entrywise deviation `|m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition `M = V diag(values) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Decompose `m`. The input is symmetrized first, so roundoff-level
    /// anti-Hermitian parts are discarded.
    pub fn new(m: &CMatrix) -> Self {
        let sym = (m + m.adjoint()) * real(0.5);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
        let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let fk = f(self.values[k]);
            for r in 0..n {
                scaled[(r, k)] *= fk;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// `exp(-i M t)` applied to a vector without forming the propagator.
    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        let mut coeffs = self.vectors.adjoint() * psi;
        for k in 0..self.dim() {
            coeffs[k] *= C64::from_polar(1.0, -self.values[k] * t);
        }
        &self.vectors * coeffs
    }

    /// The unitary `exp(-i M t)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.map(|e| C64::from_polar(1.0, -e * t))
    }
}

/// Induced 1-norm (max column sum).
pub fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let eig = HermitianEigen::new(&gram);
    eig.values.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
}

/// `exp(-i H tau) psi` by a Taylor series summed to machine precision.
///
/// The interval is split so that each sub-step has `‖H τ‖₁ ≤ 1`, which keeps
/// the series well conditioned; each sub-step is unitary to roundoff.
pub fn expm_action(h: &CMatrix, tau: f64, psi: &CVector) -> CVector {
    let norm = one_norm(h) * tau.abs();
    let substeps = norm.ceil().max(1.0) as usize;
    let step = tau / substeps as f64;
    // row-wise nonzeros; the Hamiltonians here are banded
    let n = h.nrows();
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
    for j in 0..h.ncols() {
        for (i, row) in rows.iter_mut().enumerate() {
            let v = h[(i, j)];
            if v != ZERO {
                row.push((j, v));
            }
        }
    }
    let mut acc = psi.clone();
    let mut term = psi.clone();
    let mut next = psi.clone();
    for _ in 0..substeps {
        term.copy_from(&acc);
        for k in 1..80 {
            let scale = c(0.0, -step / k as f64);
            for (i, row) in rows.iter().enumerate() {
                next[i] = scale * row.iter().map(|&(j, v)| v * term[j]).sum::<C64>();
            }
            std::mem::swap(&mut term, &mut next);
            acc += &term;
            if term.norm() <= 1e-18 * acc.norm() {
                break;
            }
        }
    }
    acc
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Maximum entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
