//! Hamiltonians of the driven qubit–resonator system.
//!
//! Frames:
//! - lab: qubit splitting, resonator, Jaynes–Cummings coupling, two
//!   transversal qubit drives and one longitudinal resonator drive;
//! - L1: rotating with the resonator frequency ω (exact, no approximation);
//! - interaction: L1 further rotated by the strong drive term
//!   H₀ = −Ω(e^{iφ}σ + e^{−iφ}σ†);
//! - effective: the interaction picture after dropping the terms that rotate
//!   at multiples of 2Ω, which is the 1+1 Dirac Hamiltonian
//!   (λ/2)σ_z + (g/√2)σ_y p + √2 ξ x.
//!
//! Units: ħ = 1, frequencies in rad/ns, times in ns.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::hilbert::{JointOps, Operator, Space, Truncation};
use crate::linalg::{c, real, CMatrix, HermitianEigen, C64, ZERO};

/// Convert a frequency quoted as "2π × f MHz" into rad/ns.
pub fn two_pi_mhz(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e-3
}

/// Relative tolerance used when checking the resonance conditions.
const RESONANCE_TOL: f64 = 1e-9;

/// Drive and coupling parameters, all in rad/ns (phase in rad).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveParams {
    pub omega_q: f64,
    pub omega: f64,
    pub g: f64,
    /// Strong transversal drive amplitude Ω.
    pub big_omega: f64,
    /// Weak transversal drive amplitude λ (sets the simulated mass).
    pub lambda: f64,
    pub nu: f64,
    /// Longitudinal drive amplitude ξ (sets the potential slope).
    pub xi: f64,
    pub phi: f64,
}

/// Parameters of the simulated Dirac particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracParams {
    /// c = g/√2.
    pub c_sim: f64,
    /// mc² = λ/2.
    pub mass_energy: f64,
    /// Φ = √2 ξ x.
    pub potential_slope: f64,
}

impl DriveParams {
    /// Device values used throughout the figures: ω_q = ω = 2π×9 GHz,
    /// g = 2π×10 MHz, Ω = 2π×200 MHz, φ = π/2, ν = ω − 2Ω.
    pub fn standard(lambda: f64, xi: f64) -> Self {
        let omega = two_pi_mhz(9000.0);
        let big_omega = two_pi_mhz(200.0);
        Self {
            omega_q: omega,
            omega,
            g: two_pi_mhz(10.0),
            big_omega,
            lambda,
            nu: omega - 2.0 * big_omega,
            xi,
            phi: FRAC_PI_2,
        }
    }

    /// Same parameters with a different strong-drive amplitude, keeping
    /// ω − ν = 2Ω.
    pub fn with_big_omega(mut self, big_omega: f64) -> Self {
        self.big_omega = big_omega;
        self.nu = self.omega - 2.0 * big_omega;
        self
    }

    pub fn dirac(&self) -> DiracParams {
        DiracParams {
            c_sim: self.g / SQRT_2,
            mass_energy: self.lambda / 2.0,
            potential_slope: SQRT_2 * self.xi,
        }
    }

    /// Checks ω_q = ω, ω − ν = 2Ω and φ = π/2.
    pub fn check_symmetric_mode(&self) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= RESONANCE_TOL * a.abs().max(b.abs()).max(1.0);
        if !close(self.omega_q, self.omega) {
            return Err(Error::Config(format!(
                "resonance omega_q = omega violated ({} vs {})",
                self.omega_q, self.omega
            )));
        }
        if !close(self.omega - self.nu, 2.0 * self.big_omega) {
            return Err(Error::Config(format!(
                "resonance omega - nu = 2 Omega violated ({} vs {})",
                self.omega - self.nu,
                2.0 * self.big_omega
            )));
        }
        if !close(self.phi, FRAC_PI_2) {
            return Err(Error::Config(format!("drive phase must be pi/2, got {}", self.phi)));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_q", self.omega_q),
            ("omega", self.omega),
            ("g", self.g),
            ("Omega", self.big_omega),
            ("lambda", self.lambda),
            ("nu", self.nu),
            ("xi", self.xi),
            ("phi", self.phi),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
        }
        for (name, v) in [("g", self.g), ("Omega", self.big_omega), ("lambda", self.lambda), ("xi", self.xi)] {
            if v < 0.0 {
                return Err(Error::Validation(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// A term `amplitude · (e^{i(freq·t + phase)} op + h.c.)`.
#[derive(Clone, Debug)]
struct Drive {
    op: CMatrix,
    amplitude: f64,
    freq: f64,
    phase: f64,
}

/// H(t) = static + Σ drives, evaluated cheaply at arbitrary t.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    static_part: CMatrix,
    drives: Vec<Drive>,
    /// Fastest angular frequency present, used to validate time steps.
    fastest: f64,
}

impl DrivenHamiltonian {
    pub fn at(&self, t: f64) -> Operator {
        let mut m = self.static_part.clone();
        self.accumulate(t, &mut m);
        Operator::from_parts(Space::Joint, m)
    }

    /// Overwrite `out` with H(t).
    pub fn write_at(&self, t: f64, out: &mut CMatrix) {
        out.copy_from(&self.static_part);
        self.accumulate(t, out);
    }

    fn accumulate(&self, t: f64, out: &mut CMatrix) {
        for d in &self.drives {
            let z = C64::from_polar(d.amplitude, d.freq * t + d.phase);
            let n = out.nrows();
            for j in 0..n {
                for i in 0..n {
                    let v = d.op[(i, j)];
                    if v != ZERO {
                        out[(i, j)] += z * v;
                        out[(j, i)] += (z * v).conj();
                    }
                }
            }
        }
    }

    pub fn fastest_frequency(&self) -> f64 {
        self.fastest
    }

    pub fn is_time_independent(&self) -> bool {
        self.drives.iter().all(|d| d.amplitude == 0.0 || d.freq == 0.0)
    }
}

/// Convention for the rotation angle of the Foldy–Wouthuysen unitary
/// S = exp(−iθ(p)σ_x).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum AngleConvention {
    /// θ = atan(g p /(λ√2)), the operator atan applied literally.
    Literal,
    /// θ = ½ atan(√2 g p/λ), the exact block diagonalizer.
    #[default]
    HalfAngle,
}

impl AngleConvention {
    pub fn angle(self, g: f64, lambda: f64, p: f64) -> f64 {
        match self {
            AngleConvention::Literal => (g * p / (lambda * SQRT_2)).atan(),
            AngleConvention::HalfAngle => 0.5 * (SQRT_2 * g * p).atan2(lambda),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AngleConvention::Literal => "literal",
            AngleConvention::HalfAngle => "half-angle",
        }
    }
}

/// Result of testing both angle conventions against the analytic 2×2
/// diagonalization of every momentum block.
#[derive(Clone, Debug)]
pub struct AngleOracleReport {
    pub literal_residual: f64,
    pub half_angle_residual: f64,
    pub selected: Option<AngleConvention>,
}

/// Builds every Hamiltonian for one parameter set and truncation.
#[derive(Clone, Debug)]
pub struct Hamiltonians {
    params: DriveParams,
    ops: JointOps,
    sy_sign: f64,
    momentum: OnceLock<HermitianEigen>,
}

pub type Block = [[C64; 2]; 2];

pub(crate) fn pauli_block(id: C64, x: C64, y: C64, z: C64) -> Block {
    // id·1 + x σ_x + y σ_y + z σ_z in (g, e) ordering
    [[id - z, x + c(0.0, 1.0) * y], [x - c(0.0, 1.0) * y, id + z]]
}

impl Hamiltonians {
    pub fn new(params: DriveParams, trunc: Truncation) -> Self {
        Self { params, ops: JointOps::new(trunc, params.phi), sy_sign: 1.0, momentum: OnceLock::new() }
    }

    /// Fault injection for the invariant checker: flips the sign of σ_y in
    /// the effective and Dirac builders only. Observables are unaffected.
    pub fn with_corrupted_sigma_y(mut self) -> Self {
        self.sy_sign = -1.0;
        self
    }

    pub fn params(&self) -> &DriveParams {
        &self.params
    }

    pub fn ops(&self) -> &JointOps {
        &self.ops
    }

    pub fn truncation(&self) -> Truncation {
        self.ops.trunc
    }

    /// Spectral decomposition of the truncated field momentum.
    pub fn momentum_eigen(&self) -> &HermitianEigen {
        self.momentum.get_or_init(|| HermitianEigen::new(self.ops.field_p.matrix()))
    }

    /// Σ_k block(p_k) ⊗ |p_k⟩⟨p_k|, for a 2×2 function of the momentum
    /// eigenvalue.
    pub fn momentum_blocks<F: Fn(f64) -> Block>(&self, f: F) -> Operator {
        let eig = self.momentum_eigen();
        let d = eig.dim();
        let blocks: Vec<Block> = eig.values.iter().map(|&p| f(p)).collect();
        let mut out = CMatrix::zeros(2 * d, 2 * d);
        for qi in 0..2 {
            for qj in 0..2 {
                let mut scaled = eig.vectors.clone();
                for (k, b) in blocks.iter().enumerate() {
                    let z = b[qi][qj];
                    for r in 0..d {
                        scaled[(r, k)] *= z;
                    }
                }
                let field = &scaled * eig.vectors.adjoint();
                out.view_mut((qi * d, qj * d), (d, d)).copy_from(&field);
            }
        }
        Operator::from_parts(Space::Joint, out)
    }

    fn jc_term(&self) -> CMatrix {
        let o = &self.ops;
        (o.sigma_dag.matrix() * o.a.matrix() + o.sigma.matrix() * o.adag.matrix()) * real(-self.params.g)
    }

    /// H₀ = −Ω(e^{iφ}σ + e^{−iφ}σ†), the generator of the L1 → interaction map.
    pub fn interaction_generator(&self) -> Operator {
        let p = &self.params;
        let o = &self.ops;
        let m = (o.sigma.matrix() * C64::from_polar(1.0, p.phi) + o.sigma_dag.matrix() * C64::from_polar(1.0, -p.phi))
            * real(-p.big_omega);
        Operator::from_parts(Space::Joint, m)
    }

    /// Full driven Hamiltonian in the laboratory frame.
    pub fn lab_driven(&self) -> DrivenHamiltonian {
        let p = &self.params;
        let o = &self.ops;
        let static_part =
            o.sz.matrix() * real(p.omega_q / 2.0) + o.number.matrix() * real(p.omega) + self.jc_term();
        let mut drives = vec![
            Drive { op: o.sigma.matrix().clone(), amplitude: -p.big_omega, freq: p.omega, phase: p.phi },
            Drive { op: o.sigma.matrix().clone(), amplitude: -p.lambda, freq: p.nu, phase: p.phi },
            Drive { op: o.a.matrix().clone(), amplitude: p.xi, freq: p.omega, phase: 0.0 },
        ];
        drives.retain(|d| d.amplitude != 0.0);
        let fastest = [p.omega, p.omega_q, p.nu.abs()].into_iter().fold(0.0, f64::max);
        DrivenHamiltonian { static_part, drives, fastest }
    }

    /// Hamiltonian in the frame rotating at ω. A residual (ω_q − ω)/2 σ_z
    /// term is kept when the qubit is detuned.
    pub fn l1_driven(&self) -> DrivenHamiltonian {
        let p = &self.params;
        let o = &self.ops;
        let static_part = o.sz.matrix() * real((p.omega_q - p.omega) / 2.0)
            + self.jc_term()
            + self.interaction_generator().matrix()
            + (o.a.matrix() + o.adag.matrix()) * real(p.xi);
        let mut drives =
            vec![Drive { op: o.sigma.matrix().clone(), amplitude: -p.lambda, freq: p.nu - p.omega, phase: p.phi }];
        drives.retain(|d| d.amplitude != 0.0);
        let fastest = (2.0 * p.big_omega).max((p.nu - p.omega).abs()).max((p.omega_q - p.omega).abs());
        DrivenHamiltonian { static_part, drives, fastest }
    }

    /// Hamiltonian in the interaction picture with respect to H₀, written
    /// with the rotated-spin projectors. Requires ω_q = ω.
    pub fn interaction_driven(&self) -> Result<DrivenHamiltonian> {
        let p = &self.params;
        if (p.omega_q - p.omega).abs() > RESONANCE_TOL * p.omega.abs().max(1.0) {
            return Err(Error::Config("interaction frame requires omega_q = omega".into()));
        }
        let o = &self.ops;
        let pp = o.proj_plus.matrix();
        let pm = o.proj_minus.matrix();
        let plus_minus = self.ket_bra_pm();
        let minus_plus = plus_minus.adjoint();
        let a = o.a.matrix();
        let diff = pp - pm;
        let g_static = (&diff * a) * C64::from_polar(-p.g / 2.0, p.phi);
        let static_part = &g_static + g_static.adjoint() + (a + o.adag.matrix()) * real(p.xi);
        let two_omega = 2.0 * p.big_omega;
        let detune = p.nu - p.omega;
        let mut drives = vec![
            Drive { op: &plus_minus * a, amplitude: -p.g / 2.0, freq: -two_omega, phase: p.phi },
            Drive { op: &minus_plus * a, amplitude: p.g / 2.0, freq: two_omega, phase: p.phi },
            Drive { op: diff.clone(), amplitude: -p.lambda / 2.0, freq: detune, phase: 0.0 },
            Drive { op: plus_minus.clone(), amplitude: p.lambda / 2.0, freq: detune - two_omega, phase: 0.0 },
            Drive { op: minus_plus.clone(), amplitude: -p.lambda / 2.0, freq: detune + two_omega, phase: 0.0 },
        ];
        drives.retain(|d| d.amplitude != 0.0);
        let fastest = drives.iter().map(|d| d.freq.abs()).fold(0.0, f64::max);
        Ok(DrivenHamiltonian { static_part, drives, fastest })
    }

    /// |+⟩⟨−| on the joint space.
    fn ket_bra_pm(&self) -> CMatrix {
        use crate::hilbert::{field_identity, tensor, SpinState};
        let plus = SpinState::Plus.amplitudes(self.params.phi);
        let minus = SpinState::Minus.amplitudes(self.params.phi);
        let m = CMatrix::from_fn(2, 2, |i, j| plus[i] * minus[j].conj());
        tensor(&Operator::from_parts(Space::Qubit, m), &field_identity(self.truncation())).into_matrix()
    }

    pub fn build_lab(&self, t: f64) -> Operator {
        self.lab_driven().at(t)
    }

    pub fn build_l1(&self, t: f64) -> Operator {
        self.l1_driven().at(t)
    }

    pub fn build_interaction(&self, t: f64) -> Result<Operator> {
        Ok(self.interaction_driven()?.at(t))
    }

    /// Dirac Hamiltonian with a linear potential, (λ/2)σ_z + (g/√2)σ_y p + √2ξx.
    /// No resonance conditions are checked; see [`Self::build_effective`].
    pub fn klein(&self) -> Operator {
        let p = &self.params;
        let o = &self.ops;
        let m = o.sz.matrix() * real(p.lambda / 2.0)
            + (o.sy.matrix() * o.p.matrix()) * real(self.sy_sign * p.g * FRAC_1_SQRT_2)
            + o.x.matrix() * real(SQRT_2 * p.xi);
        Operator::from_parts(Space::Joint, m)
    }

    /// Free Dirac Hamiltonian H_D = (λ/2)σ_z + (g/√2)σ_y p (ξ ignored).
    pub fn dirac(&self) -> Operator {
        let p = &self.params;
        let o = &self.ops;
        let m = o.sz.matrix() * real(p.lambda / 2.0)
            + (o.sy.matrix() * o.p.matrix()) * real(self.sy_sign * p.g * FRAC_1_SQRT_2);
        Operator::from_parts(Space::Joint, m)
    }

    /// Effective Hamiltonian after the rotating-wave approximation.
    pub fn build_effective(&self) -> Result<Operator> {
        self.params.check_symmetric_mode()?;
        Ok(self.klein())
    }

    /// Second-order nonrelativistic limit σ_z (g²/2λ) p² + √2ξx.
    pub fn build_nonrel(&self) -> Result<Operator> {
        let p = &self.params;
        if p.lambda <= 0.0 {
            return Err(Error::DegenerateMass("nonrelativistic limit needs lambda > 0".into()));
        }
        let o = &self.ops;
        let p2 = o.p.matrix() * o.p.matrix();
        let m = (o.sz.matrix() * p2) * real(p.g * p.g / (2.0 * p.lambda)) + o.x.matrix() * real(SQRT_2 * p.xi);
        Ok(Operator::from_parts(Space::Joint, m))
    }

    fn require_mass(&self) -> Result<()> {
        let p = &self.params;
        if p.lambda < 0.0 {
            return Err(Error::Validation("lambda must be nonnegative".into()));
        }
        if p.lambda == 0.0 {
            let has_zero = self.momentum_eigen().values.iter().any(|v| v.abs() < 1e-12);
            if has_zero {
                return Err(Error::DegenerateMass("lambda = 0 and truncated p has a zero eigenvalue".into()));
            }
        }
        Ok(())
    }

    /// H_FW = σ_z √(λ²/4 + g²p²/2), via the momentum eigenbasis.
    pub fn build_fw_hamiltonian(&self) -> Result<Operator> {
        self.require_mass()?;
        let (g, lambda) = (self.params.g, self.params.lambda);
        Ok(self.momentum_blocks(|p| {
            let e = (lambda * lambda / 4.0 + g * g * p * p / 2.0).sqrt();
            pauli_block(ZERO, ZERO, ZERO, real(e))
        }))
    }

    /// S_FW = exp(−iθ(p)σ_x) for the chosen angle convention.
    pub fn build_fw_unitary(&self, convention: AngleConvention) -> Result<Operator> {
        if self.params.lambda <= 0.0 {
            return Err(Error::DegenerateMass("FW unitary needs lambda > 0".into()));
        }
        let (g, lambda) = (self.params.g, self.params.lambda);
        Ok(self.momentum_blocks(|p| {
            let th = convention.angle(g, lambda, p);
            pauli_block(real(th.cos()), real(-th.sin()) * c(0.0, 1.0), ZERO, ZERO)
        }))
    }

    /// Tests both angle conventions block by block: for each momentum
    /// eigenvalue p the block (λ/2)σ_z + (gp/√2)σ_y has eigenvalues ±E with
    /// E = √(λ²/4 + g²p²/2), so S h S† must equal E σ_z exactly.
    pub fn fw_angle_oracle(&self) -> Result<AngleOracleReport> {
        if self.params.lambda <= 0.0 {
            return Err(Error::DegenerateMass("FW unitary needs lambda > 0".into()));
        }
        let (g, lambda) = (self.params.g, self.params.lambda);
        let residual = |conv: AngleConvention| {
            let mut worst = 0.0_f64;
            for &p in self.momentum_eigen().values.iter() {
                let k = g * p * FRAC_1_SQRT_2;
                let m = lambda / 2.0;
                let e = (m * m + k * k).sqrt();
                let th = conv.angle(g, lambda, p);
                let s = CMatrix::from_fn(2, 2, |i, j| {
                    pauli_block(real(th.cos()), c(0.0, -th.sin()), ZERO, ZERO)[i][j]
                });
                let h = CMatrix::from_fn(2, 2, |i, j| pauli_block(ZERO, ZERO, real(k), real(m))[i][j]);
                let rotated = &s * h * s.adjoint();
                let target = CMatrix::from_fn(2, 2, |i, j| pauli_block(ZERO, ZERO, ZERO, real(e))[i][j]);
                worst = worst.max(crate::linalg::max_abs(&(rotated - target)));
            }
            worst
        };
        let literal = residual(AngleConvention::Literal);
        let half = residual(AngleConvention::HalfAngle);
        let selected = if half <= 1e-10 {
            Some(AngleConvention::HalfAngle)
        } else if literal <= 1e-10 {
            Some(AngleConvention::Literal)
        } else {
            None
        };
        Ok(AngleOracleReport { literal_residual: literal, half_angle_residual: half, selected })
    }
}
