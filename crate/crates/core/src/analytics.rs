//! Closed-form results for the free and linearly driven Dirac particle,
//! used as oracles for the numerical propagation.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::hamiltonians::{pauli_block, Block, Hamiltonians};
use crate::hilbert::{Operator, Space};
use crate::linalg::{c, operator_norm, real, CMatrix, HermitianEigen, C64, I, ONE, ZERO};
use crate::observables::Trajectory;

const HERMITIAN_TOL: f64 = 1e-10;

/// x̂(t) = x̂₀ + c²p H⁻¹ t + Ẑ(t) for the free Dirac Hamiltonian.
#[derive(Clone, Debug)]
pub struct HeisenbergPosition {
    pub x0_op: Operator,
    pub drift_op: Operator,
    /// (i/2) c (σ_y − c p H⁻¹) H⁻¹, so Ẑ(t) = prefactor (e^{−2iHt} − 1).
    zbw_prefactor: CMatrix,
    eig: HermitianEigen,
    pub mass_energy: f64,
    pub c_sim: f64,
}

impl HeisenbergPosition {
    pub fn new(ham: &Hamiltonians) -> Result<Self> {
        let d = ham.params().dirac();
        if d.mass_energy <= 0.0 {
            return Err(Error::SingularH);
        }
        let ops = ham.ops();
        let eig = ham.dirac().eigh(HERMITIAN_TOL)?;
        if eig.values.iter().any(|e| e.abs() < 1e-12) {
            return Err(Error::SingularH);
        }
        let h_inv = eig.map(|e| real(1.0 / e));
        let cs = d.c_sim;
        let p_hinv = ops.p.matrix() * &h_inv;
        let drift = &p_hinv * real(cs * cs);
        let prefactor = (ops.sy.matrix() - &p_hinv * real(cs)) * &h_inv * c(0.0, 0.5 * cs);
        Ok(Self {
            x0_op: ops.x.clone(),
            drift_op: Operator::from_parts(Space::Joint, drift),
            zbw_prefactor: prefactor,
            eig,
            mass_energy: d.mass_energy,
            c_sim: cs,
        })
    }

    /// Ẑ(t).
    pub fn zbw_op(&self, t: f64) -> Operator {
        let n = self.eig.dim();
        let u = self.eig.propagator(2.0 * t) - CMatrix::identity(n, n);
        Operator::from_parts(Space::Joint, &self.zbw_prefactor * u)
    }

    pub fn at(&self, t: f64) -> Operator {
        &(&self.x0_op + &(&self.drift_op * t)) + &self.zbw_op(t)
    }
}

pub fn x_heisenberg(ham: &Hamiltonians, t: f64) -> Result<Operator> {
    Ok(HeisenbergPosition::new(ham)?.at(t))
}

/// Projector onto the positive (`positive = true`) or negative energy
/// eigenspace of H_D.
pub fn energy_projector(ham: &Hamiltonians, positive: bool) -> Result<Operator> {
    let eig = ham.dirac().eigh(HERMITIAN_TOL)?;
    let m = eig.map(|e| if (e > 0.0) == positive { ONE } else { ZERO });
    Ok(Operator::from_parts(Space::Joint, m))
}

/// sinc(u) = sin u / u.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// (cos u − sinc u)/u², which tends to −1/3 at u = 0.
pub fn cos_minus_sinc_over_sq(u: f64) -> f64 {
    if u.abs() < 0.5 {
        // Σ_{k≥1} (−1)^k 2k u^{2k−2}/(2k+1)!
        let u2 = u * u;
        let mut sum = 0.0;
        let mut power = 1.0;
        let mut fact = 6.0; // (2k+1)! at k = 1
        for k in 1..=12 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * 2.0 * k as f64 * power / fact;
            power *= u2;
            fact *= (2 * k + 2) as f64 * (2 * k + 3) as f64;
        }
        sum
    } else {
        (u.cos() - sinc(u)) / (u * u)
    }
}

/// (cos u − sinc u)/u, which tends to 0 at u = 0.
pub fn cos_minus_sinc_over(u: f64) -> f64 {
    u * cos_minus_sinc_over_sq(u)
}

fn require_free(ham: &Hamiltonians) -> Result<()> {
    if ham.params().xi != 0.0 {
        return Err(Error::Config("free-particle result requires xi = 0".into()));
    }
    Ok(())
}

/// Expansion of exp(−iH_D t) in powers of λt around the massless propagator,
/// keeping terms up to `order`.
pub fn series_propagator(ham: &Hamiltonians, t: f64, order: usize) -> Result<Operator> {
    require_free(ham)?;
    if order > 3 {
        return Err(Error::Config(format!("series order {order} exceeds 3")));
    }
    let p = *ham.params();
    Ok(ham.momentum_blocks(|pk| {
        let u = p.g * t * pk * FRAC_1_SQRT_2;
        let a = p.lambda * t / 2.0;
        let mut terms: Vec<Block> = vec![pauli_block(real(u.cos()), ZERO, real(-u.sin()) * I, ZERO)];
        if order >= 1 {
            terms.push(pauli_block(ZERO, ZERO, ZERO, -I * a * sinc(u)));
        }
        if order >= 2 {
            let a2 = a * a;
            terms.push(pauli_block(
                real(-a2 * sinc(u) / 2.0),
                ZERO,
                -I * a2 * cos_minus_sinc_over(u) / 2.0,
                ZERO,
            ));
        }
        if order >= 3 {
            terms.push(pauli_block(ZERO, ZERO, ZERO, -I * a * a * a * cos_minus_sinc_over_sq(u) / 2.0));
        }
        let mut out = [[ZERO; 2]; 2];
        for b in terms {
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] += b[i][j];
                }
            }
        }
        out
    }))
}

/// Closed form exp(−iH_D t) = cos r − i(aσ_z + uσ_y) sinc r with
/// a = λt/2, u = gtp/√2, r = √(a² + u²).
pub fn dirac_propagator_closed(ham: &Hamiltonians, t: f64) -> Result<Operator> {
    require_free(ham)?;
    let p = *ham.params();
    Ok(ham.momentum_blocks(|pk| {
        let u = p.g * t * pk * FRAC_1_SQRT_2;
        let a = p.lambda * t / 2.0;
        let r = (a * a + u * u).sqrt();
        let s = sinc(r);
        pauli_block(real(r.cos()), ZERO, -I * u * s, -I * a * s)
    }))
}

/// X̂_FW(t) = x̂₀ + c²p H_D⁻¹ t + Δ̂.
#[derive(Clone, Debug)]
pub struct FWPositionOperator {
    pub delta_op: Operator,
    pub energy_op: Operator,
    pub x0_op: Operator,
    pub drift_op: Operator,
}

impl FWPositionOperator {
    pub fn new(ham: &Hamiltonians) -> Result<Self> {
        let d = ham.params().dirac();
        if d.mass_energy <= 0.0 {
            return Err(Error::SingularH);
        }
        let (cs, m) = (d.c_sim, d.mass_energy);
        let energy = |pk: f64| (cs * cs * pk * pk + m * m).sqrt();
        let delta_op = ham.momentum_blocks(|pk| {
            let e = energy(pk);
            let v = cs / (2.0 * e) - cs.powi(3) * pk * pk / (2.0 * e * e * (e + m));
            pauli_block(ZERO, real(v), ZERO, ZERO)
        });
        let energy_op = ham.momentum_blocks(|pk| pauli_block(real(energy(pk)), ZERO, ZERO, ZERO));
        let heis = HeisenbergPosition::new(ham)?;
        Ok(Self { delta_op, energy_op, x0_op: heis.x0_op, drift_op: heis.drift_op })
    }

    pub fn at(&self, t: f64) -> Operator {
        &(&self.x0_op + &(&self.drift_op * t)) + &self.delta_op
    }
}

pub fn fw_position(ham: &Hamiltonians, t: f64) -> Result<Operator> {
    Ok(FWPositionOperator::new(ham)?.at(t))
}

/// Short-time factorization of the propagator in a linear potential.
#[derive(Clone, Debug)]
pub struct KleinFactorization {
    pub approx: Operator,
    pub exact: Operator,
    /// Spectral-norm distance restricted to Fock levels below n_max − 2,
    /// where the truncated quadratures are canonical.
    pub error_norm: f64,
}

/// exp(−iH_D t)·exp(−i√2ξt x)·exp(i s (gξt²/2)σ_y) for a spin-phase sign `s`.
pub fn klein_factorization(ham: &Hamiltonians, t: f64, spin_phase_sign: f64) -> Result<KleinFactorization> {
    let p = *ham.params();
    let ops = ham.ops();
    let free = ham.dirac().eigh(HERMITIAN_TOL)?.propagator(t);
    let kick = (&ops.x * (SQRT_2 * p.xi)).eigh(HERMITIAN_TOL)?.propagator(t);
    let phase = ops.sy.eigh(HERMITIAN_TOL)?.propagator(-spin_phase_sign * p.g * p.xi * t * t / 2.0);
    let approx = free * kick * phase;
    let exact = ham.klein().eigh(HERMITIAN_TOL)?.propagator(t);
    let diff = Operator::from_parts(Space::Joint, &approx - &exact);
    let trunc = ham.truncation();
    let error_norm = operator_norm(&diff.bulk_block(trunc, trunc.bulk_levels()));
    Ok(KleinFactorization {
        approx: Operator::from_parts(Space::Joint, approx),
        exact: Operator::from_parts(Space::Joint, exact),
        error_norm,
    })
}

/// The factorization with the spin phase exp(−i(gξt²/2)σ_y) that cancels
/// the second-order commutator, which leaves an O(t³) remainder.
pub fn klein_short_time(ham: &Hamiltonians, t: f64) -> Result<(Operator, f64)> {
    let f = klein_factorization(ham, t, -1.0)?;
    Ok((f.approx, f.error_norm))
}

/// Dominant angular frequency (rad/ns) of ⟨x⟩(t) after a linear detrend,
/// from the Hann-windowed spectrum and a log-parabolic peak fit.
pub fn zbw_frequency(traj: &Trajectory) -> Result<f64> {
    dominant_frequency(&traj.times(), &traj.xs())
}

pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 16 {
        return Err(Error::NoPeak(format!("only {n} samples")));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0) {
            return Err(Error::NoPeak("samples are not uniformly spaced".into()));
        }
    }
    let tm = times.iter().sum::<f64>() / n as f64;
    let vm = values.iter().sum::<f64>() / n as f64;
    let sxx: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    let sxy: f64 = times.iter().zip(values).map(|(t, v)| (t - tm) * (v - vm)).sum();
    let slope = sxy / sxx;
    let resid: Vec<f64> = times.iter().zip(values).map(|(t, v)| v - vm - slope * (t - tm)).collect();
    let rms = (resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if rms < 1e-9 * scale {
        return Err(Error::NoPeak("detrended signal is flat".into()));
    }
    let hann: Vec<f64> = (0..n).map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / (n - 1) as f64).cos()).collect();
    let nbins = n / 2;
    let spectrum: Vec<f64> = (1..=nbins)
        .map(|k| {
            let w = 2.0 * PI * k as f64 / n as f64;
            let mut z = C64::new(0.0, 0.0);
            for (j, (r, h)) in resid.iter().zip(&hann).enumerate() {
                z += C64::from_polar(r * h, -w * j as f64);
            }
            z.norm()
        })
        .collect();
    let (imax, &peak) = spectrum.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let mut sorted = spectrum.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if peak < 5.0 * median {
        return Err(Error::NoPeak(format!("peak {peak:.3e} not above median {median:.3e}")));
    }
    let k = imax + 1;
    let mut offset = 0.0;
    if imax > 0 && imax + 1 < spectrum.len() {
        let (a, b, cc) = (spectrum[imax - 1].ln(), peak.ln(), spectrum[imax + 1].ln());
        let denom = a - 2.0 * b + cc;
        if denom.abs() > 0.0 {
            offset = 0.5 * (a - cc) / denom;
        }
    }
    let cycles = k as f64 + offset;
    if cycles < 8.0 {
        return Err(Error::NoPeak(format!("window covers only {cycles:.2} periods")));
    }
    Ok(2.0 * PI * cycles / (n as f64 * dt))
}
