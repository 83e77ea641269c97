//! Truncated qubit ⊗ oscillator Hilbert space.
//!
//! Joint basis ordering is fixed: index = q·(n_max+1) + n with q = 0 for
//! |g⟩ and q = 1 for |e⟩, n the Fock number. Qubit operators follow
//! σ = |g⟩⟨e|, σ_z = |e⟩⟨e| − |g⟩⟨g|, σ_y = iσ − iσ†, σ_x = iσ_zσ_y.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, c, real, CMatrix, CVector, HermitianEigen, C64, ONE, ZERO};

/// Highest Fock level kept in the field space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    n_max: usize,
}

pub const DEFAULT_N_MAX: usize = 40;

impl Truncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Truncation(format!("n_max must be >= 1, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn field_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn joint_dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Joint index of |q, n⟩.
    #[inline]
    pub fn index(&self, q: usize, n: usize) -> usize {
        q * (self.n_max + 1) + n
    }

    /// Fock levels on which the canonical commutator holds away from the
    /// truncation edge (n < n_max − 2).
    pub fn bulk_levels(&self) -> usize {
        self.n_max.saturating_sub(2)
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self { n_max: DEFAULT_N_MAX }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Qubit,
    Field,
    Joint,
}

/// Dense square operator tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: Space,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: Space, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let dim = matrix.nrows();
        let ok = match space {
            Space::Qubit => dim == 2,
            Space::Field => dim >= 2,
            Space::Joint => dim >= 4 && dim.is_multiple_of(2),
        };
        if !ok {
            return Err(Error::Dimension { expected: if space == Space::Qubit { 2 } else { dim + 1 }, found: dim });
        }
        Ok(Self { space, matrix })
    }

    pub(crate) fn from_parts(space: Space, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { space, matrix }
    }

    pub fn zeros(space: Space, dim: usize) -> Self {
        Self::from_parts(space, CMatrix::zeros(dim, dim))
    }

    pub fn identity(space: Space, dim: usize) -> Self {
        Self::from_parts(space, CMatrix::identity(dim, dim))
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self::from_parts(self.space, self.matrix.adjoint())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_parts(self.space, &self.matrix * factor)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    /// Spectral decomposition; fails if the operator is not Hermitian
    /// within `tol`.
    pub fn eigh(&self, tol: f64) -> Result<HermitianEigen> {
        let dev = self.hermitian_deviation();
        if dev > tol {
            return Err(Error::NonHermitian(dev));
        }
        Ok(HermitianEigen::new(&self.matrix))
    }

    /// Compression onto the bulk Fock subspace (n < `levels`) of a joint
    /// operator, keeping both qubit blocks.
    pub fn bulk_block(&self, trunc: Truncation, levels: usize) -> CMatrix {
        let idx = bulk_indices(trunc, levels);
        CMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }
}

/// Joint indices with Fock number below `levels`.
pub fn bulk_indices(trunc: Truncation, levels: usize) -> Vec<usize> {
    let levels = levels.min(trunc.field_dim());
    (0..2).flat_map(|q| (0..levels).map(move |n| trunc.index(q, n))).collect()
}

fn check_space(a: &Operator, b: &Operator) {
    assert!(
        a.space == b.space && a.dim() == b.dim(),
        "operator mismatch: {:?}/{} vs {:?}/{}",
        a.space,
        a.dim(),
        b.space,
        b.dim()
    );
}

impl Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        check_space(self, rhs);
        Operator::from_parts(self.space, &self.matrix + &rhs.matrix)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        &self + &rhs
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        check_space(self, rhs);
        Operator::from_parts(self.space, &self.matrix - &rhs.matrix)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        check_space(self, rhs);
        Operator::from_parts(self.space, &self.matrix * &rhs.matrix)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        &self * &rhs
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scaled(rhs)
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scaled(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scaled(real(rhs))
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scaled(real(rhs))
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scaled(real(-1.0))
    }
}

/// Annihilation and creation operators: a|n⟩ = √n|n−1⟩.
pub fn ladder_ops(trunc: Truncation) -> (Operator, Operator) {
    let d = trunc.field_dim();
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = real((n as f64).sqrt());
    }
    let adag = a.adjoint();
    (Operator::from_parts(Space::Field, a), Operator::from_parts(Space::Field, adag))
}

/// Dimensionless quadratures x = (a+a†)/√2, p = −i(a−a†)/√2.
pub fn quadrature_ops(trunc: Truncation) -> (Operator, Operator) {
    let (a, adag) = ladder_ops(trunc);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &adag) * s;
    let p = (&a - &adag) * c(0.0, -s);
    (x, p)
}

pub fn number_op(trunc: Truncation) -> Operator {
    let d = trunc.field_dim();
    Operator::from_parts(Space::Field, CMatrix::from_fn(d, d, |i, j| if i == j { real(i as f64) } else { ZERO }))
}

/// Photon-number parity diag((−1)ⁿ).
pub fn parity_op(trunc: Truncation) -> Operator {
    let d = trunc.field_dim();
    Operator::from_parts(
        Space::Field,
        CMatrix::from_fn(d, d, |i, j| if i == j { real(if i % 2 == 0 { 1.0 } else { -1.0 }) } else { ZERO }),
    )
}

pub fn field_identity(trunc: Truncation) -> Operator {
    Operator::identity(Space::Field, trunc.field_dim())
}

/// Qubit operator set for a drive phase φ.
#[derive(Clone, Debug)]
pub struct QubitOps {
    pub sigma: Operator,
    pub sigma_dag: Operator,
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub identity: Operator,
    /// |+⟩⟨+| with |±⟩ = (|g⟩ ± e^{−iφ}|e⟩)/√2.
    pub proj_plus: Operator,
    pub proj_minus: Operator,
    pub phi: f64,
}

fn qubit_matrix(m: [[C64; 2]; 2]) -> Operator {
    Operator::from_parts(Space::Qubit, CMatrix::from_fn(2, 2, |i, j| m[i][j]))
}

pub fn qubit_ops(phi: f64) -> QubitOps {
    let sigma = qubit_matrix([[ZERO, ONE], [ZERO, ZERO]]);
    let sigma_dag = sigma.dagger();
    let sz = qubit_matrix([[real(-1.0), ZERO], [ZERO, ONE]]);
    let sy = &sigma * c(0.0, 1.0) - &sigma_dag * c(0.0, 1.0);
    let sx = (&sz * &sy) * c(0.0, 1.0);
    let plus = SpinState::Plus.amplitudes(phi);
    let minus = SpinState::Minus.amplitudes(phi);
    let outer = |u: [C64; 2]| qubit_matrix([[u[0] * u[0].conj(), u[0] * u[1].conj()], [u[1] * u[0].conj(), u[1] * u[1].conj()]]);
    QubitOps {
        sigma,
        sigma_dag,
        sx,
        sy,
        sz,
        identity: Operator::identity(Space::Qubit, 2),
        proj_plus: outer(plus),
        proj_minus: outer(minus),
        phi,
    }
}

/// Initial qubit states used by the scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinState {
    Plus,
    Minus,
    Excited,
    Ground,
}

impl SpinState {
    /// Amplitudes (c_g, c_e). |±⟩ depend on the drive phase.
    pub fn amplitudes(self, phi: f64) -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            SpinState::Ground => [ONE, ZERO],
            SpinState::Excited => [ZERO, ONE],
            SpinState::Plus => [real(s), C64::from_polar(s, -phi)],
            SpinState::Minus => [real(s), C64::from_polar(-s, -phi)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinState::Plus => "plus",
            SpinState::Minus => "minus",
            SpinState::Excited => "e",
            SpinState::Ground => "g",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plus" | "+" => Some(SpinState::Plus),
            "minus" | "-" => Some(SpinState::Minus),
            "e" | "excited" => Some(SpinState::Excited),
            "g" | "ground" => Some(SpinState::Ground),
            _ => None,
        }
    }
}

fn check_coherent_guard(alpha: C64, trunc: Truncation) -> Result<()> {
    let limit = trunc.n_max() as f64 / 4.0;
    if alpha.norm_sqr() > limit {
        return Err(Error::Truncation(format!(
            "|alpha|^2 = {:.4} exceeds n_max/4 = {:.4}",
            alpha.norm_sqr(),
            limit
        )));
    }
    Ok(())
}

/// Field amplitudes of the coherent state |α⟩, renormalized after truncation.
pub fn coherent_state(alpha: C64, trunc: Truncation) -> Result<CVector> {
    check_coherent_guard(alpha, trunc)?;
    let d = trunc.field_dim();
    let mut v = CVector::zeros(d);
    v[0] = real((-alpha.norm_sqr() / 2.0).exp());
    for n in 1..d {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    let norm = v.norm();
    Ok(v.unscale(norm))
}

/// D(α) = exp(αa† − α*a), by exponentiating the anti-Hermitian generator.
pub fn displacement_op(alpha: C64, trunc: Truncation) -> Result<Operator> {
    check_coherent_guard(alpha, trunc)?;
    let (a, adag) = ladder_ops(trunc);
    // generator = αa† − α*a = −iH with H = i(αa† − α*a) Hermitian
    let h = (&adag * alpha - &a * alpha.conj()) * c(0.0, 1.0);
    let eig = HermitianEigen::new(h.matrix());
    Ok(Operator::from_parts(Space::Field, eig.propagator(1.0)))
}

/// q_op ⊗ f_op in the documented joint ordering.
pub fn tensor(q_op: &Operator, f_op: &Operator) -> Operator {
    assert_eq!(q_op.space, Space::Qubit, "left factor must be a qubit operator");
    assert_eq!(f_op.space, Space::Field, "right factor must be a field operator");
    Operator::from_parts(Space::Joint, linalg::kron(&q_op.matrix, &f_op.matrix))
}

/// Every elementary operator embedded in the joint space.
#[derive(Clone, Debug)]
pub struct JointOps {
    pub trunc: Truncation,
    pub qubit: QubitOps,
    pub a: Operator,
    pub adag: Operator,
    pub x: Operator,
    pub p: Operator,
    pub number: Operator,
    pub sigma: Operator,
    pub sigma_dag: Operator,
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub proj_plus: Operator,
    pub proj_minus: Operator,
    pub identity: Operator,
    /// Field quadrature x and p before embedding.
    pub field_x: Operator,
    pub field_p: Operator,
}

impl JointOps {
    pub fn new(trunc: Truncation, phi: f64) -> Self {
        let qubit = qubit_ops(phi);
        let fid = field_identity(trunc);
        let (a, adag) = ladder_ops(trunc);
        let (x, p) = quadrature_ops(trunc);
        let on_field = |f: &Operator| tensor(&qubit.identity, f);
        let on_qubit = |q: &Operator| tensor(q, &fid);
        Self {
            trunc,
            a: on_field(&a),
            adag: on_field(&adag),
            x: on_field(&x),
            p: on_field(&p),
            number: on_field(&number_op(trunc)),
            sigma: on_qubit(&qubit.sigma),
            sigma_dag: on_qubit(&qubit.sigma_dag),
            sx: on_qubit(&qubit.sx),
            sy: on_qubit(&qubit.sy),
            sz: on_qubit(&qubit.sz),
            proj_plus: on_qubit(&qubit.proj_plus),
            proj_minus: on_qubit(&qubit.proj_minus),
            identity: Operator::identity(Space::Joint, trunc.joint_dim()),
            field_x: x,
            field_p: p,
            qubit,
        }
    }

    pub fn dim(&self) -> usize {
        self.trunc.joint_dim()
    }
}

/// Pure state of the joint system.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitFieldState {
    trunc: Truncation,
    amplitudes: CVector,
}

pub const NORM_TOL: f64 = 1e-9;

impl QubitFieldState {
    /// Wrap amplitudes; the vector must already be normalized within 1e-9.
    pub fn new(trunc: Truncation, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != trunc.joint_dim() {
            return Err(Error::Dimension { expected: trunc.joint_dim(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { trunc, amplitudes })
    }

    /// Wrap amplitudes without the norm check. Used by propagators, whose
    /// output is checked separately.
    pub(crate) fn from_raw(trunc: Truncation, amplitudes: CVector) -> Self {
        debug_assert_eq!(amplitudes.len(), trunc.joint_dim());
        Self { trunc, amplitudes }
    }

    /// |spin⟩ ⊗ |α⟩.
    pub fn product(spin: [C64; 2], field: &CVector, trunc: Truncation) -> Result<Self> {
        if field.len() != trunc.field_dim() {
            return Err(Error::Dimension { expected: trunc.field_dim(), found: field.len() });
        }
        let qn = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
        let d = trunc.field_dim();
        let amps = CVector::from_fn(trunc.joint_dim(), |i, _| spin[i / d] * field[i % d] / qn);
        let norm = amps.norm();
        Self::new(trunc, amps.unscale(norm))
    }

    /// |spin, α⟩ with the spin label resolved against drive phase φ.
    pub fn spin_coherent(spin: SpinState, phi: f64, alpha: C64, trunc: Truncation) -> Result<Self> {
        Self::product(spin.amplitudes(phi), &coherent_state(alpha, trunc)?, trunc)
    }

    pub fn basis(trunc: Truncation, q: usize, n: usize) -> Self {
        assert!(q < 2 && n <= trunc.n_max());
        let mut v = CVector::zeros(trunc.joint_dim());
        v[trunc.index(q, n)] = ONE;
        Self { trunc, amplitudes: v }
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn amplitude(&self, q: usize, n: usize) -> C64 {
        self.amplitudes[self.trunc.index(q, n)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Euclidean distance ‖ψ − φ‖.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.amplitudes - &other.amplitudes).norm()
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        if op.dim() != self.amplitudes.len() {
            return Err(Error::Dimension { expected: self.amplitudes.len(), found: op.dim() });
        }
        Ok(Self::from_raw(self.trunc, op.apply(&self.amplitudes)))
    }

    /// Population in the two highest Fock levels (both qubit states).
    pub fn fock_tail(&self) -> f64 {
        let n_max = self.trunc.n_max();
        (0..2)
            .flat_map(|q| [n_max - 1, n_max].map(|n| self.amplitude(q, n).norm_sqr()))
            .sum()
    }

    /// Plain-text serialization: `# n_max=<int>` then `q n re im` per index.
    pub fn to_text(&self) -> String {
        let mut out = format!("# n_max={}\n", self.trunc.n_max());
        let d = self.trunc.field_dim();
        for (i, z) in self.amplitudes.iter().enumerate() {
            let _ = writeln!(out, "{} {} {:e} {:e}", i / d, i % d, z.re, z.im);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty state file".into() })?;
        let n_max: usize = header
            .trim()
            .strip_prefix("# n_max=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or(Error::Parse { line: 1, msg: "expected `# n_max=<int>` header".into() })?;
        let trunc = Truncation::new(n_max)?;
        let mut amps = CVector::zeros(trunc.joint_dim());
        let mut seen = vec![false; trunc.joint_dim()];
        for (ln, line) in lines {
            let bad = |msg: &str| Error::Parse { line: ln + 1, msg: msg.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad("expected `q n re im`"));
            }
            let q: usize = fields[0].parse().map_err(|_| bad("bad qubit index"))?;
            let n: usize = fields[1].parse().map_err(|_| bad("bad Fock index"))?;
            let re: f64 = fields[2].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = fields[3].parse().map_err(|_| bad("bad imaginary part"))?;
            if q > 1 || n > n_max {
                return Err(bad("index out of range"));
            }
            let i = trunc.index(q, n);
            if seen[i] {
                return Err(bad("duplicate basis index"));
            }
            seen[i] = true;
            amps[i] = c(re, im);
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse { line: 0, msg: "missing basis indices".into() });
        }
        Self::new(trunc, amps)
    }
}

/// Reduced state of the resonator mode.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDensityMatrix {
    matrix: CMatrix,
}

impl FieldDensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-9) and positivity
    /// (eigenvalues ≥ −1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > 1e-12 {
            return Err(Error::NonHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Validation(format!("density matrix trace {tr} differs from 1")));
        }
        let min_eig = HermitianEigen::new(&matrix).values.min();
        if min_eig < -1e-10 {
            return Err(Error::Validation(format!("density matrix has negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { matrix })
    }

    /// Pure state |v⟩⟨v|.
    pub fn pure(v: &CVector) -> Result<Self> {
        Self::new(v * v.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// ⟨v|ρ|v⟩.
    pub fn fidelity_with_pure(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        (&self.matrix * op.matrix()).trace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn t(n: usize) -> Truncation {
        Truncation::new(n).unwrap()
    }

    #[test]
    fn truncation_rejects_zero() {
        assert!(Truncation::new(0).is_err());
        assert_eq!(t(5).joint_dim(), 12);
    }

    #[test]
    fn ladder_matrix_elements() {
        let tr = t(8);
        let (a, adag) = ladder_ops(tr);
        assert_eq!(a.get(0, 1), ONE);
        assert!((a.get(2, 3) - real(3f64.sqrt())).norm() < 1e-15);
        assert_eq!(adag, a.dagger());
        let comm = a.commutator(&adag);
        for i in 0..tr.n_max() {
            for j in 0..tr.n_max() {
                let want = if i == j { ONE } else { ZERO };
                assert!((comm.get(i, j) - want).norm() < 1e-14);
            }
        }
        // edge entry of the truncated commutator is −n_max
        assert!((comm.get(8, 8) - real(-8.0)).norm() < 1e-14);
    }

    #[test]
    fn quadratures_are_canonical_in_bulk() {
        let tr = t(10);
        let (x, p) = quadrature_ops(tr);
        assert!(x.is_hermitian(1e-14) && p.is_hermitian(1e-14));
        let comm = x.commutator(&p);
        for i in 0..tr.n_max() {
            assert!((comm.get(i, i) - c(0.0, 1.0)).norm() < 1e-13);
        }
        let vac = coherent_state(ZERO, tr).unwrap();
        let x2 = &x * &x;
        assert!(vac.dotc(&x.apply(&vac)).norm() < 1e-15);
        assert!((vac.dotc(&x2.apply(&vac)).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn truncated_momentum_spectrum_is_symmetric() {
        let (_, p) = quadrature_ops(t(15));
        let eig = p.eigh(1e-14).unwrap();
        let n = eig.dim();
        for k in 0..n {
            assert!((eig.values[k] + eig.values[n - 1 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn qubit_conventions() {
        let q = qubit_ops(FRAC_PI_2);
        let flip = qubit_matrix([[ZERO, ONE], [ONE, ZERO]]);
        assert!((&q.sx - &flip).max_abs() < 1e-15);
        // σ_z|e⟩ = |e⟩, σ_z|g⟩ = −|g⟩
        assert_eq!(q.sz.get(1, 1), ONE);
        assert_eq!(q.sz.get(0, 0), real(-1.0));
        // σ_y = i|g⟩⟨e| − i|e⟩⟨g|
        assert_eq!(q.sy.get(0, 1), c(0.0, 1.0));
        assert_eq!(q.sy.get(1, 0), c(0.0, -1.0));
        let plus = CVector::from_row_slice(&SpinState::Plus.amplitudes(FRAC_PI_2));
        let image = q.sy.apply(&plus);
        assert!((image - &plus).norm() < 1e-15);
        let minus = CVector::from_row_slice(&SpinState::Minus.amplitudes(FRAC_PI_2));
        assert!((q.sy.apply(&minus) + &minus).norm() < 1e-15);
        assert!((&q.proj_plus + &q.proj_minus - q.identity.clone()).max_abs() < 1e-15);
    }

    #[test]
    fn coherent_state_moments() {
        let tr = t(40);
        let alpha = c(0.0, SQRT_2);
        let v = coherent_state(alpha, tr).unwrap();
        let (x, p) = quadrature_ops(tr);
        let n = number_op(tr);
        assert!(v.dotc(&x.apply(&v)).re.abs() < 1e-8);
        assert!((v.dotc(&p.apply(&v)).re - 2.0).abs() < 1e-8);
        // ⟨n⟩ = Σ n |c_n|² as an explicit Poisson series
        let mut series = 0.0;
        let mut weight = (-2.0f64).exp();
        for k in 0..200 {
            if k > 0 {
                weight *= 2.0 / k as f64;
            }
            series += k as f64 * weight;
        }
        assert!((v.dotc(&n.apply(&v)).re - series).abs() < 1e-9);
        assert!((series - 2.0).abs() < 1e-12);
        let (a, _) = ladder_ops(tr);
        let residual = a.apply(&v) - &v * alpha;
        assert!(residual.norm() < 1e-6);
    }

    #[test]
    fn coherent_guard() {
        assert!(coherent_state(c(2.0, 0.0), t(15)).is_err());
        assert!(coherent_state(c(2.0, 0.0), t(16)).is_ok());
        assert!(displacement_op(c(3.0, 0.0), t(20)).is_err());
    }

    #[test]
    fn displacement_is_unitary_and_displaces_vacuum() {
        let tr = t(40);
        let alpha = c(1.2, -0.7);
        let d = displacement_op(alpha, tr).unwrap();
        let u = d.matrix() * d.matrix().adjoint();
        assert!(linalg::max_abs(&(u - CMatrix::identity(41, 41))) < 1e-9);
        let vac = coherent_state(ZERO, tr).unwrap();
        let shifted = d.apply(&vac);
        assert!((shifted - coherent_state(alpha, tr).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn parity_and_tensor() {
        let tr = t(6);
        let par = parity_op(tr);
        assert_eq!(par.get(0, 0), ONE);
        assert_eq!(par.get(1, 1), real(-1.0));
        let q = qubit_ops(FRAC_PI_2);
        let (x, _) = quadrature_ops(tr);
        let a = tensor(&q.sz, &field_identity(tr));
        let b = tensor(&q.identity, &x);
        assert_eq!(a.space(), Space::Joint);
        assert!(a.commutator(&b).max_abs() < 1e-15);
        // index = q·(n_max+1) + n
        let e3 = QubitFieldState::basis(tr, 1, 3);
        assert_eq!(e3.amplitudes()[tr.index(1, 3)], ONE);
        assert_eq!(tr.index(1, 3), 10);
    }

    #[test]
    fn joint_operators_hermitian() {
        let ops = JointOps::new(t(12), FRAC_PI_2);
        for op in [&ops.x, &ops.p, &ops.sx, &ops.sy, &ops.sz, &ops.number, &ops.proj_plus] {
            assert!(op.hermitian_deviation() <= 1e-14);
        }
    }

    #[test]
    fn state_text_format() {
        let tr = t(3);
        let s = QubitFieldState::spin_coherent(SpinState::Plus, FRAC_PI_2, c(0.3, 0.1), tr).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("# n_max=3\n0 0 "));
        assert_eq!(text.lines().count(), 9);
        let back = QubitFieldState::from_text(&text).unwrap();
        assert_eq!(back, s);
        assert!(QubitFieldState::from_text("# n_max=1\n0 0 1 0\n").is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let v = coherent_state(c(0.5, 0.5), t(10)).unwrap();
        let rho = FieldDensityMatrix::pure(&v).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![real(1.5), real(-0.5)]));
        assert!(FieldDensityMatrix::new(bad).is_err());
    }
}
