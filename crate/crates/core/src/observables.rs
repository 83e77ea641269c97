//! Expectation values, reduced field states, Wigner functions and
//! trajectory records.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{FieldDensityMatrix, JointOps, Operator, QubitFieldState};
use crate::linalg::{c, CMatrix, C64, ZERO};

pub fn expectation(op: &Operator, psi: &QubitFieldState) -> Result<C64> {
    let v = psi.amplitudes();
    if op.dim() != v.len() {
        return Err(Error::Dimension { expected: op.dim(), found: v.len() });
    }
    Ok(v.dotc(&op.apply(v)))
}

/// Real part of ⟨ψ|A|ψ⟩ for a Hermitian A.
pub fn expectation_real(op: &Operator, psi: &QubitFieldState) -> Result<f64> {
    expectation(op, psi).map(|z| z.re)
}

/// Partial trace over the qubit.
pub fn reduce_field(psi: &QubitFieldState) -> Result<FieldDensityMatrix> {
    let trunc = psi.truncation();
    let d = trunc.field_dim();
    let v = psi.amplitudes();
    let mut rho = CMatrix::zeros(d, d);
    for q in 0..2 {
        let block = v.rows(q * d, d);
        rho += block * block.adjoint();
    }
    FieldDensityMatrix::new(rho)
}

/// Rectangular phase-space grid in quadrature units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl Default for WignerGrid {
    fn default() -> Self {
        Self { x_min: -6.0, x_max: 6.0, nx: 121, p_min: -6.0, p_max: 6.0, np: 121 }
    }
}

impl WignerGrid {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.np < 2 || !(self.x_min < self.x_max && self.p_min < self.p_max) {
            return Err(Error::Validation("Wigner grid needs at least 2 points on a nonempty range".into()));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + (self.p_max - self.p_min) * j as f64 / (self.np - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64 * (self.p_max - self.p_min) / (self.np - 1) as f64
    }
}

/// W sampled on a grid; `values[j * nx + i]` is W(x_i, p_j).
#[derive(Clone, Debug)]
pub struct WignerMap {
    pub grid: WignerGrid,
    pub values: Vec<f64>,
}

/// Largest |W| tolerated on the grid boundary.
pub const WIGNER_EDGE_TOL: f64 = 1e-4;

impl WignerMap {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Riemann sum of W over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn boundary_max(&self) -> f64 {
        let (nx, np) = (self.grid.nx, self.grid.np);
        let mut m = 0.0_f64;
        for i in 0..nx {
            m = m.max(self.at(i, 0).abs()).max(self.at(i, np - 1).abs());
        }
        for j in 0..np {
            m = m.max(self.at(0, j).abs()).max(self.at(nx - 1, j).abs());
        }
        m
    }
}

/// Matrix elements ⟨m|D(β)|n⟩ of the untruncated displacement operator for
/// m, n < dim, from aD = D(a + β).
pub fn displacement_elements(beta: C64, dim: usize) -> CMatrix {
    let mut d = CMatrix::zeros(dim, dim);
    let sqrt: Vec<f64> = (0..=dim).map(|k| (k as f64).sqrt()).collect();
    d[(0, 0)] = C64::from((-0.5 * beta.norm_sqr()).exp());
    for n in 0..dim {
        if n > 0 {
            // ⟨0|D|n⟩ = e^{−|β|²/2}(−β*)ⁿ/√n!
            d[(0, n)] = d[(0, n - 1)] * (-beta.conj()) / sqrt[n];
        }
        for m in 0..dim - 1 {
            let left = if n > 0 { d[(m, n - 1)] * sqrt[n] } else { ZERO };
            d[(m + 1, n)] = (left + beta * d[(m, n)]) / sqrt[m + 1];
        }
    }
    d
}

/// W(α) = (1/π) Tr[ρ D(2α) Π] at α = (x + ip)/√2.
pub fn wigner_point(rho: &FieldDensityMatrix, x: f64, p: f64) -> f64 {
    let m = rho.matrix();
    let dim = m.nrows();
    let beta = c(x, p) * std::f64::consts::SQRT_2;
    let d = displacement_elements(beta, dim);
    let mut acc = ZERO;
    for n in 0..dim {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for k in 0..dim {
            acc += m[(n, k)] * d[(k, n)] * sign;
        }
    }
    acc.re / PI
}

pub fn wigner_map(rho: &FieldDensityMatrix, grid: &WignerGrid) -> Result<WignerMap> {
    grid.validate()?;
    let values: Vec<f64> = (0..grid.np)
        .into_par_iter()
        .flat_map_iter(|j| {
            let p = grid.p(j);
            (0..grid.nx).map(move |i| wigner_point(rho, grid.x(i), p)).collect::<Vec<_>>()
        })
        .collect();
    let map = WignerMap { grid: *grid, values };
    let edge = map.boundary_max();
    if edge > WIGNER_EDGE_TOL {
        return Err(Error::GridTooSmall(edge));
    }
    Ok(map)
}

/// Covariance of the field quadratures (Var x, Var p, symmetrized Cov).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratures {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

impl Quadratures {
    /// Smallest variance over all rotated quadratures.
    pub fn min_principal_variance(&self) -> f64 {
        let tr = self.var_x + self.var_p;
        let det = self.var_x * self.var_p - self.cov_xp * self.cov_xp;
        0.5 * tr - (0.25 * tr * tr - det).max(0.0).sqrt()
    }
}

pub fn quadratures(ops: &JointOps, psi: &QubitFieldState) -> Result<Quadratures> {
    let mx = expectation_real(&ops.x, psi)?;
    let mp = expectation_real(&ops.p, psi)?;
    let xx = expectation_real(&(&ops.x * &ops.x), psi)?;
    let pp = expectation_real(&(&ops.p * &ops.p), psi)?;
    let sym = &(&ops.x * &ops.p) + &(&ops.p * &ops.x);
    let xp = 0.5 * expectation_real(&sym, psi)?;
    Ok(Quadratures { mean_x: mx, mean_p: mp, var_x: xx - mx * mx, var_p: pp - mp * mp, cov_xp: xp - mx * mp })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub x: f64,
    pub p: f64,
    pub sy: f64,
    pub sz: f64,
    pub norm: f64,
    pub fock_tail: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn from_states(ops: &JointOps, samples: &[(f64, QubitFieldState)]) -> Result<Self> {
        let records = samples
            .iter()
            .map(|(t, s)| {
                Ok(TrajectoryRecord {
                    t: *t,
                    x: expectation_real(&ops.x, s)?,
                    p: expectation_real(&ops.p, s)?,
                    sy: expectation_real(&ops.sy, s)?,
                    sz: expectation_real(&ops.sz, s)?,
                    norm: s.norm(),
                    fock_tail: s.fock_tail(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.x).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p).collect()
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    /// Largest |x_a(t) − x_b(t)| over common samples.
    pub fn max_x_deviation(&self, other: &Trajectory) -> f64 {
        self.records.iter().zip(&other.records).map(|(a, b)| (a.x - b.x).abs()).fold(0.0, f64::max)
    }
}

/// Evolve and record ⟨x⟩, ⟨p⟩, ⟨σ_y⟩, ⟨σ_z⟩, norm and Fock tail.
pub fn record_trajectory(
    ham: &crate::hamiltonians::Hamiltonians,
    frame: crate::propagation::Frame,
    psi0: &QubitFieldState,
    grid: &crate::propagation::TimeGrid,
) -> Result<Trajectory> {
    let samples = crate::propagation::evolve_in_frame(ham, frame, psi0, grid)?;
    Trajectory::from_states(ham.ops(), &samples)
}

fn write_header<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(w: &mut W, meta: &[(String, String)], traj: &Trajectory) -> Result<()> {
    write_header(w, meta)?;
    writeln!(w, "t,x,p,sy,sz,norm,fock_tail")?;
    for r in &traj.records {
        writeln!(
            w,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            r.t, r.x, r.p, r.sy, r.sz, r.norm, r.fock_tail
        )?;
    }
    Ok(())
}

pub fn write_wigner_csv<W: Write>(w: &mut W, meta: &[(String, String)], map: &WignerMap) -> Result<()> {
    write_header(w, meta)?;
    writeln!(w, "x,p,W")?;
    for j in 0..map.grid.np {
        for i in 0..map.grid.nx {
            writeln!(w, "{:.11e},{:.11e},{:.11e}", map.grid.x(i), map.grid.p(j), map.at(i, j))?;
        }
    }
    Ok(())
}
