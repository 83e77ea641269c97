//! Time evolution in every frame and the maps between frames.
//!
//! Time-independent generators are exponentiated through their spectral
//! decomposition. Driven Hamiltonians use the exponential midpoint rule
//! ψ(t+dt) = exp(−iH(t+dt/2)dt)ψ(t), with the exponential applied as a
//! Taylor series summed to machine precision, which is second order in dt
//! and unitary to roundoff.

use std::fmt;

use crate::error::{Error, Result};
use crate::hamiltonians::{AngleConvention, DriveParams, DrivenHamiltonian, Hamiltonians};
use crate::hilbert::{Operator, QubitFieldState, SpinState};
use crate::linalg::{expm_action, CMatrix, CVector, HermitianEigen, C64};

/// Minimum number of steps per period of the fastest frequency.
pub const STEPS_PER_PERIOD: f64 = 40.0;
/// Largest population allowed in the top two Fock levels.
pub const FOCK_TAIL_LIMIT: f64 = 1e-6;
/// Hermiticity tolerance when diagonalizing a generator.
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Frame {
    Lab,
    L1,
    Interaction,
    Effective,
    FwExact,
    FwLinearized,
}

impl Frame {
    pub const ALL: [Frame; 6] =
        [Frame::Lab, Frame::L1, Frame::Interaction, Frame::Effective, Frame::FwExact, Frame::FwLinearized];

    pub fn name(self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::L1 => "l1",
            Frame::Interaction => "interaction",
            Frame::Effective => "effective",
            Frame::FwExact => "fw_exact",
            Frame::FwLinearized => "fw_linearized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Frame::ALL.into_iter().find(|f| f.name() == s.trim())
    }

    pub fn is_time_dependent(self) -> bool {
        matches!(self, Frame::Lab | Frame::L1 | Frame::Interaction)
    }

    /// Default step: 1 ps in the lab frame, 10 ps elsewhere.
    pub fn default_dt(self) -> f64 {
        match self {
            Frame::Lab => 1e-3,
            _ => 1e-2,
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Uniform time grid with samples recorded every `stride` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64, stride: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Validation(format!("dt must be positive, got {dt}")));
        }
        if !t_start.is_finite() || !t_end.is_finite() || t_end < t_start {
            return Err(Error::Validation(format!("invalid time window [{t_start}, {t_end}]")));
        }
        if stride == 0 {
            return Err(Error::Validation("sample stride must be at least 1".into()));
        }
        let steps = (t_end - t_start) / dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::Validation(format!("window {} is not a multiple of dt = {dt}", t_end - t_start)));
        }
        Ok(Self { t_start, t_end, dt, stride })
    }

    /// Grid from 0 to `t_end` with samples roughly every `sample_dt`.
    pub fn sampled(t_end: f64, dt: f64, sample_dt: f64) -> Result<Self> {
        let stride = ((sample_dt / dt).round() as usize).max(1);
        Self::new(0.0, t_end, dt, stride)
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round() as usize
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t_start + step as f64 * self.dt
    }

    /// Step indices at which samples are recorded. The final step is always
    /// included.
    pub fn sample_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut steps: Vec<usize> = (0..=n).step_by(self.stride).collect();
        if *steps.last().unwrap() != n {
            steps.push(n);
        }
        steps
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.sample_steps().into_iter().map(|k| self.time(k)).collect()
    }

    /// Requires at least [`STEPS_PER_PERIOD`] steps per period of `freq`.
    pub fn check_resolves(&self, freq: f64) -> Result<()> {
        if freq <= 0.0 {
            return Ok(());
        }
        let limit = 2.0 * std::f64::consts::PI / freq / STEPS_PER_PERIOD;
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} does not resolve frequency {freq:.6} rad/ns (need dt <= {limit:.3e})",
                self.dt
            )));
        }
        Ok(())
    }
}

fn check_tail(psi: &QubitFieldState, t: f64) -> Result<()> {
    let tail = psi.fock_tail();
    if tail > FOCK_TAIL_LIMIT {
        return Err(Error::Truncation(format!(
            "population {tail:.3e} in the top two Fock levels at t = {t} ns exceeds {FOCK_TAIL_LIMIT:e}"
        )));
    }
    Ok(())
}

/// Reusable exp(−iHt) for a time-independent generator.
#[derive(Clone, Debug)]
pub struct StaticPropagator {
    eig: HermitianEigen,
}

impl StaticPropagator {
    pub fn new(h: &Operator) -> Result<Self> {
        Ok(Self { eig: h.eigh(HERMITIAN_TOL)? })
    }

    pub fn evolve(&self, psi: &QubitFieldState, t: f64) -> QubitFieldState {
        QubitFieldState::from_raw(psi.truncation(), self.eig.evolve(psi.amplitudes(), t))
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        self.eig.propagator(t)
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eig
    }
}

/// exp(−iHt)ψ₀ for a time-independent H.
pub fn propagate_ti(h: &Operator, psi0: &QubitFieldState, t: f64) -> Result<QubitFieldState> {
    if h.dim() != psi0.amplitudes().len() {
        return Err(Error::Dimension { expected: h.dim(), found: psi0.amplitudes().len() });
    }
    Ok(StaticPropagator::new(h)?.evolve(psi0, t))
}

/// Integrate a driven Hamiltonian over `grid`, returning the sampled states.
pub fn propagate_td(
    h: &DrivenHamiltonian,
    psi0: &QubitFieldState,
    grid: &TimeGrid,
) -> Result<Vec<(f64, QubitFieldState)>> {
    grid.check_resolves(h.fastest_frequency())?;
    let dim = psi0.amplitudes().len();
    let probe = h.at(grid.t_start);
    if probe.dim() != dim {
        return Err(Error::Dimension { expected: probe.dim(), found: dim });
    }
    let trunc = psi0.truncation();
    let mut buf = CMatrix::zeros(dim, dim);
    let mut psi: CVector = psi0.amplitudes().clone();
    let mut samples = Vec::new();
    let steps = grid.sample_steps();
    let mut next = 0;
    for k in 0..=grid.n_steps() {
        if next < steps.len() && steps[next] == k {
            let state = QubitFieldState::from_raw(trunc, psi.clone());
            check_tail(&state, grid.time(k))?;
            samples.push((grid.time(k), state));
            next += 1;
        }
        if k == grid.n_steps() {
            break;
        }
        h.write_at(grid.time(k) + 0.5 * grid.dt, &mut buf);
        psi = expm_action(&buf, grid.dt, &psi);
    }
    Ok(samples)
}

/// Phases of U₁ = exp(iωt(a†a + σ_z/2)) on the joint basis.
fn l1_phases(psi: &QubitFieldState, omega: f64, t: f64, sign: f64) -> QubitFieldState {
    let trunc = psi.truncation();
    let mut v = psi.amplitudes().clone();
    for q in 0..2 {
        let s = if q == 1 { 0.5 } else { -0.5 };
        for n in 0..trunc.field_dim() {
            let i = trunc.index(q, n);
            v[i] *= C64::from_polar(1.0, sign * omega * t * (n as f64 + s));
        }
    }
    QubitFieldState::from_raw(trunc, v)
}

pub fn lab_to_l1(psi: &QubitFieldState, t: f64, params: &DriveParams) -> QubitFieldState {
    l1_phases(psi, params.omega, t, 1.0)
}

pub fn l1_to_lab(psi: &QubitFieldState, t: f64, params: &DriveParams) -> QubitFieldState {
    l1_phases(psi, params.omega, t, -1.0)
}

/// exp(±iH₀t) with H₀ = −Ω(P₊ − P₋), applied qubit-locally.
fn interaction_rotation(psi: &QubitFieldState, t: f64, params: &DriveParams, sign: f64) -> QubitFieldState {
    let trunc = psi.truncation();
    let plus = SpinState::Plus.amplitudes(params.phi);
    let minus = SpinState::Minus.amplitudes(params.phi);
    // e^{iH₀t} = e^{−iΩt}P₊ + e^{iΩt}P₋
    let fp = C64::from_polar(1.0, -sign * params.big_omega * t);
    let fm = C64::from_polar(1.0, sign * params.big_omega * t);
    let u = [
        [fp * plus[0] * plus[0].conj() + fm * minus[0] * minus[0].conj(), fp * plus[0] * plus[1].conj() + fm * minus[0] * minus[1].conj()],
        [fp * plus[1] * plus[0].conj() + fm * minus[1] * minus[0].conj(), fp * plus[1] * plus[1].conj() + fm * minus[1] * minus[1].conj()],
    ];
    let d = trunc.field_dim();
    let v = psi.amplitudes();
    let mut out = CVector::zeros(2 * d);
    for n in 0..d {
        let (g, e) = (v[n], v[d + n]);
        out[n] = u[0][0] * g + u[0][1] * e;
        out[d + n] = u[1][0] * g + u[1][1] * e;
    }
    QubitFieldState::from_raw(trunc, out)
}

pub fn l1_to_interaction(psi: &QubitFieldState, t: f64, params: &DriveParams) -> QubitFieldState {
    interaction_rotation(psi, t, params, 1.0)
}

pub fn interaction_to_l1(psi: &QubitFieldState, t: f64, params: &DriveParams) -> QubitFieldState {
    interaction_rotation(psi, t, params, -1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FwMode {
    /// Conjugation by the exact block diagonalizer.
    Exact,
    /// Conjugation by exp(−i(g/(λ√2))σ_x p), first order in g/λ.
    Linearized,
}

/// U_FW(t) = S exp(−iH_D t) S† for a chosen FW rotation S.
#[derive(Clone, Debug)]
pub struct FwPropagator {
    s: CMatrix,
    dirac: HermitianEigen,
}

impl FwPropagator {
    pub fn new(ham: &Hamiltonians, mode: FwMode) -> Result<Self> {
        let p = ham.params();
        if p.lambda <= 0.0 {
            return Err(Error::DegenerateMass("FW evolution needs lambda > 0".into()));
        }
        if p.xi != 0.0 {
            return Err(Error::Config("FW evolution is defined for the free particle (xi = 0)".into()));
        }
        let dirac = ham.dirac().eigh(HERMITIAN_TOL)?;
        let s = match mode {
            FwMode::Exact => ham.build_fw_unitary(AngleConvention::default())?.into_matrix(),
            FwMode::Linearized => {
                // massless evolution under (g/√2)σ_x p for a time 1/λ
                let o = ham.ops();
                let gen = (&o.sx * &o.p) * (p.g / std::f64::consts::SQRT_2);
                gen.eigh(HERMITIAN_TOL)?.propagator(1.0 / p.lambda)
            }
        };
        Ok(Self { s, dirac })
    }

    pub fn rotation(&self) -> &CMatrix {
        &self.s
    }

    pub fn evolve(&self, psi: &QubitFieldState, t: f64) -> QubitFieldState {
        let rotated = self.s.adjoint() * psi.amplitudes();
        let evolved = self.dirac.evolve(&rotated, t);
        QubitFieldState::from_raw(psi.truncation(), &self.s * evolved)
    }
}

pub fn evolve_fw(ham: &Hamiltonians, psi0: &QubitFieldState, t: f64, mode: FwMode) -> Result<QubitFieldState> {
    Ok(FwPropagator::new(ham, mode)?.evolve(psi0, t))
}

/// Evolve an initial L1-frame state in `frame` and return the samples
/// expressed in the L1 frame.
pub fn evolve_in_frame(
    ham: &Hamiltonians,
    frame: Frame,
    psi0: &QubitFieldState,
    grid: &TimeGrid,
) -> Result<Vec<(f64, QubitFieldState)>> {
    let params = *ham.params();
    let from_interaction = |samples: Vec<(f64, QubitFieldState)>| -> Vec<(f64, QubitFieldState)> {
        samples.into_iter().map(|(t, s)| (t, interaction_to_l1(&s, t, &params))).collect()
    };
    let static_samples = |f: &dyn Fn(&QubitFieldState, f64) -> QubitFieldState| -> Result<Vec<(f64, QubitFieldState)>> {
        let psi_i = l1_to_interaction(psi0, grid.t_start, &params);
        let mut out = Vec::new();
        for t in grid.sample_times() {
            let s = f(&psi_i, t - grid.t_start);
            check_tail(&s, t)?;
            out.push((t, s));
        }
        Ok(out)
    };
    match frame {
        Frame::Lab => {
            let start = l1_to_lab(psi0, grid.t_start, &params);
            let samples = propagate_td(&ham.lab_driven(), &start, grid)?;
            Ok(samples.into_iter().map(|(t, s)| (t, lab_to_l1(&s, t, &params))).collect())
        }
        Frame::L1 => propagate_td(&ham.l1_driven(), psi0, grid),
        Frame::Interaction => {
            let start = l1_to_interaction(psi0, grid.t_start, &params);
            Ok(from_interaction(propagate_td(&ham.interaction_driven()?, &start, grid)?))
        }
        Frame::Effective => {
            let prop = StaticPropagator::new(&ham.build_effective()?)?;
            Ok(from_interaction(static_samples(&|s, t| prop.evolve(s, t))?))
        }
        Frame::FwExact | Frame::FwLinearized => {
            params.check_symmetric_mode()?;
            let mode = if frame == Frame::FwExact { FwMode::Exact } else { FwMode::Linearized };
            let prop = FwPropagator::new(ham, mode)?;
            Ok(from_interaction(static_samples(&|s, t| prop.evolve(s, t))?))
        }
    }
}
