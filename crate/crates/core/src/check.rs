//! Invariant suite behind `dirac-cqed check`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytics::{energy_projector, klein_short_time, series_propagator, HeisenbergPosition};
use crate::hamiltonians::{two_pi_mhz, AngleConvention, DriveParams, Hamiltonians};
use crate::hilbert::{coherent_state, displacement_op, FieldDensityMatrix, Operator, QubitFieldState, Space, Truncation};
use crate::linalg::{c, max_abs, operator_norm, real, CMatrix, CVector};
use crate::observables::{expectation_real, reduce_field, wigner_map, WignerGrid};
use crate::propagation::{l1_to_interaction, l1_to_lab, lab_to_l1, propagate_td, StaticPropagator, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckLevel {
    Fast,
    Full,
}

impl CheckLevel {
    pub fn n_max(self) -> usize {
        match self {
            CheckLevel::Fast => 20,
            CheckLevel::Full => 40,
        }
    }

    pub fn seeds(self) -> u64 {
        match self {
            CheckLevel::Fast => 3,
            CheckLevel::Full => 20,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckLevel::Fast => "fast",
            CheckLevel::Full => "full",
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Faults {
    /// Flip the sign of σ_y in the effective Hamiltonian.
    pub sigma_y_sign: bool,
}

#[derive(Clone, Debug)]
pub struct CheckEntry {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub threshold: String,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub level: CheckLevel,
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.entries.iter().filter(|e| !e.passed).map(|e| e.name).collect()
    }

    /// One tab-separated line per invariant.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let status = if e.passed { "pass" } else { "fail" };
            let _ = writeln!(out, "{}\t{}\tvalue={:.3e}\tthreshold={}\t{}", e.name, status, e.value, e.threshold, e.detail);
        }
        let _ = writeln!(
            out,
            "summary\t{}\tlevel={}\tpassed={}/{}",
            if self.all_passed() { "pass" } else { "fail" },
            self.level.name(),
            self.entries.iter().filter(|e| e.passed).count(),
            self.entries.len()
        );
        out
    }
}

struct Ctx {
    level: CheckLevel,
    trunc: Truncation,
    faults: Faults,
    entries: Vec<CheckEntry>,
}

fn g() -> f64 {
    two_pi_mhz(10.0)
}

/// Random normalized state supported on the lowest `levels` Fock states.
pub fn random_bulk_state(rng: &mut ChaCha8Rng, trunc: Truncation, levels: usize) -> QubitFieldState {
    let mut v = CVector::zeros(trunc.joint_dim());
    for q in 0..2 {
        for n in 0..levels.min(trunc.field_dim()) {
            v[trunc.index(q, n)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let norm = v.norm();
    QubitFieldState::new(trunc, v / real(norm)).expect("normalized")
}

impl Ctx {
    fn ham(&self, lambda: f64, xi: f64) -> Hamiltonians {
        let h = Hamiltonians::new(DriveParams::standard(lambda, xi), self.trunc);
        if self.faults.sigma_y_sign {
            h.with_corrupted_sigma_y()
        } else {
            h
        }
    }

    fn rng(&self, salt: u64, seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(salt.wrapping_mul(1_000_003).wrapping_add(seed))
    }

    fn record(&mut self, name: &'static str, value: f64, threshold: f64, detail: String) {
        let passed = value.is_finite() && value <= threshold;
        self.entries.push(CheckEntry { name, passed, value, threshold: format!("<={threshold:e}"), detail });
    }

    fn record_range(&mut self, name: &'static str, value: f64, lo: f64, hi: f64, detail: String) {
        let passed = value.is_finite() && (lo..=hi).contains(&value);
        self.entries.push(CheckEntry { name, passed, value, threshold: format!("[{lo},{hi}]"), detail });
    }

    fn record_error(&mut self, name: &'static str, err: crate::Error) {
        self.entries.push(CheckEntry {
            name,
            passed: false,
            value: f64::NAN,
            threshold: "-".into(),
            detail: format!("error: {err}"),
        });
    }
}

fn hermiticity(ctx: &mut Ctx) -> crate::Result<()> {
    let mut worst = 0.0_f64;
    for seed in 0..ctx.level.seeds() {
        let mut rng = ctx.rng(1, seed);
        let h = ctx.ham(4.0 * SQRT_2 * g(), g() / 2.0);
        let t = rng.random_range(0.0..60.0);
        worst = worst
            .max(h.build_lab(t).hermitian_deviation())
            .max(h.build_l1(t).hermitian_deviation())
            .max(h.build_interaction(t)?.hermitian_deviation());
        worst = worst
            .max(h.build_effective()?.hermitian_deviation())
            .max(h.build_nonrel()?.hermitian_deviation());
        worst = worst.max(h.build_fw_hamiltonian()?.hermitian_deviation());
    }
    ctx.record("hamiltonian_hermiticity", worst, 1e-12, "lab, l1, interaction, effective, nonrel, fw".into());
    Ok(())
}

/// Frame-change oracles: H_L1 = U₁ H U₁† − ω(N + σ_z/2) and
/// H_I = e^{iH₀t}(H_L1 − H₀)e^{−iH₀t}.
fn frame_chain(ctx: &mut Ctx) -> crate::Result<()> {
    let h = ctx.ham(SQRT_2 * g(), g() / 2.0);
    let p = *h.params();
    let ops = h.ops();
    let gen = &ops.number + &(&ops.sz * 0.5);
    let h0 = h.interaction_generator();
    let h0_eig = h0.eigh(1e-12)?;
    let mut worst_l1 = 0.0_f64;
    let mut worst_i = 0.0_f64;
    for seed in 0..ctx.level.seeds() {
        let mut rng = ctx.rng(2, seed);
        let t = rng.random_range(0.0..60.0);
        let u1 = CMatrix::from_diagonal(&gen.matrix().diagonal().map(|d| crate::linalg::C64::from_polar(1.0, p.omega * t * d.re)));
        let l1 = &u1 * h.build_lab(t).matrix() * u1.adjoint() - gen.matrix() * real(p.omega);
        worst_l1 = worst_l1.max(max_abs(&(l1 - h.build_l1(t).matrix())));
        let u = h0_eig.propagator(-t);
        let hi = &u * (h.build_l1(t).matrix() - h0.matrix()) * u.adjoint();
        worst_i = worst_i.max(max_abs(&(hi - h.build_interaction(t)?.matrix())));
    }
    ctx.record("lab_to_l1_conjugation", worst_l1, 1e-9, "U1 H_lab U1^dag + i dU1/dt U1^dag vs H_L1".into());
    ctx.record("l1_to_interaction_conjugation", worst_i, 1e-10, "exp(iH0 t)(H_L1 - H0)exp(-iH0 t) vs H_I".into());

    // harmonics of H_I are multiples of 2Ω below 8Ω, so a 16-point average over one period is exact
    let period = PI / p.big_omega;
    let m = 16;
    let driven = h.interaction_driven()?;
    let mut avg = CMatrix::zeros(ops.dim(), ops.dim());
    for k in 0..m {
        avg += driven.at(period * k as f64 / m as f64).matrix();
    }
    avg /= real(m as f64);
    let eff = Hamiltonians::new(p, ctx.trunc).build_effective()?;
    ctx.record("rwa_time_average", max_abs(&(avg - eff.matrix())), 1e-12, "period average of H_I vs H_eff".into());
    Ok(())
}

fn field_states(ctx: &mut Ctx) -> crate::Result<()> {
    let trunc = ctx.trunc;
    let a_field = crate::hilbert::ladder_ops(trunc).0;
    let mut eigen_res = 0.0_f64;
    let mut unitary = 0.0_f64;
    let mut wigner = 0.0_f64;
    let mut rt = 0.0_f64;
    let mut reduce = 0.0_f64;
    let params = DriveParams::standard(0.0, 0.0);
    let bound = (trunc.n_max() as f64 / 8.0).sqrt();
    for seed in 0..ctx.level.seeds() {
        let mut rng = ctx.rng(3, seed);
        let alpha = c(rng.random_range(-bound..bound), rng.random_range(-bound..bound)) * (1.0 / SQRT_2);
        let v = coherent_state(alpha, trunc)?;
        let resid = a_field.apply(&v) - &v * alpha;
        eigen_res = eigen_res.max(resid.norm());
        let d = displacement_op(alpha, trunc)?;
        unitary = unitary.max(max_abs(&(d.matrix() * d.matrix().adjoint() - CMatrix::identity(trunc.field_dim(), trunc.field_dim()))));
        if seed == 0 {
            let rho = FieldDensityMatrix::pure(&v)?;
            let grid = WignerGrid { nx: 61, np: 61, ..WignerGrid::default() };
            let map = wigner_map(&rho, &grid)?;
            let bounds = (map.max() - 1.0 / PI).max(-1.0 / PI - map.min()).max(0.0);
            wigner = wigner.max((map.integral() - 1.0).abs()).max(bounds);
        }
        let psi = random_bulk_state(&mut rng, trunc, 6);
        let back = QubitFieldState::from_text(&psi.to_text())?;
        rt = rt.max(back.distance(&psi));
        let t = rng.random_range(0.0..10.0);
        let rotated = l1_to_interaction(&psi, t, &params);
        let r0 = reduce_field(&psi)?;
        let r1 = reduce_field(&rotated)?;
        reduce = reduce.max(max_abs(&(r0.matrix() - r1.matrix())));
    }
    ctx.record("coherent_eigenvector", eigen_res, 1e-6, "|| (a - alpha)|alpha> ||".into());
    ctx.record("displacement_unitarity", unitary, 1e-10, "D D^dag - 1".into());
    ctx.record("wigner_normalization", wigner, 1e-6, "|int W - 1| and |W| <= 1/pi".into());
    ctx.record("state_text_roundtrip", rt, 1e-15, "to_text/from_text".into());
    ctx.record("reduced_field_qubit_local_invariance", reduce, 1e-13, "rho_field unchanged by the qubit-local frame map".into());
    Ok(())
}

fn dynamics(ctx: &mut Ctx) -> crate::Result<()> {
    let trunc = ctx.trunc;
    let mut norm = 0.0_f64;
    let mut energy = 0.0_f64;
    for seed in 0..ctx.level.seeds() {
        let mut rng = ctx.rng(4, seed);
        let h = ctx.ham(SQRT_2 * g(), g() / 2.0);
        let psi = random_bulk_state(&mut rng, trunc, 4);
        let samples = propagate_td(&h.l1_driven(), &psi, &TimeGrid::new(0.0, 2.0, 0.01, 20)?)?;
        for (_, s) in &samples {
            norm = norm.max((s.norm() - 1.0).abs());
        }
        let heff = h.build_effective()?;
        let prop = StaticPropagator::new(&heff)?;
        let e0 = expectation_real(&heff, &psi)?;
        for t in [5.0, 15.0, 30.0] {
            let e = expectation_real(&heff, &prop.evolve(&psi, t))?;
            energy = energy.max((e - e0).abs() / e0.abs().max(1e-3));
        }
    }
    ctx.record("norm_conservation", norm, 1e-9, "L1 midpoint propagation".into());
    ctx.record("energy_conservation", energy, 1e-9, "<H_eff> under exp(-i H_eff t)".into());
    Ok(())
}

/// d⟨x⟩/dt = (g/√2)⟨σ_y⟩ and d⟨p⟩/dt = −√2ξ under H_eff, checked by central
/// differences of the propagated state.
fn ehrenfest(ctx: &mut Ctx) -> crate::Result<()> {
    let mut worst = 0.0_f64;
    for seed in 0..ctx.level.seeds() {
        let mut rng = ctx.rng(5, seed);
        let lambda = [0.0, SQRT_2 * g(), 4.0 * SQRT_2 * g()][(seed % 3) as usize];
        let xi = g() / 2.0;
        let h = ctx.ham(lambda, xi);
        let ops = h.ops();
        let base = QubitFieldState::spin_coherent(crate::SpinState::Plus, ops.qubit.phi, c(0.0, 0.0), ctx.trunc)?;
        let noise = random_bulk_state(&mut rng, ctx.trunc, 3);
        let v = base.amplitudes() + noise.amplitudes() * real(0.3);
        let psi = QubitFieldState::new(ctx.trunc, &v / real(v.norm()))?;
        let prop = StaticPropagator::new(&h.build_effective()?)?;
        let t = rng.random_range(1.0..10.0);
        let dt = 1e-3;
        let (a, b, mid) = (prop.evolve(&psi, t - dt), prop.evolve(&psi, t + dt), prop.evolve(&psi, t));
        let dx = (expectation_real(&ops.x, &b)? - expectation_real(&ops.x, &a)?) / (2.0 * dt);
        let dp = (expectation_real(&ops.p, &b)? - expectation_real(&ops.p, &a)?) / (2.0 * dt);
        let want_x = g() / SQRT_2 * expectation_real(&ops.sy, &mid)?;
        let want_p = -SQRT_2 * xi;
        worst = worst.max((dx - want_x).abs() / want_x.abs().max(1e-6));
        worst = worst.max((dp - want_p).abs() / want_p.abs());
    }
    ctx.record("ehrenfest_relations", worst, 1e-3, "d<x>/dt = (g/sqrt2)<sigma_y>, d<p>/dt = -sqrt2 xi".into());
    Ok(())
}

fn zitterbewegung(ctx: &mut Ctx) -> crate::Result<()> {
    let mut equiv = 0.0_f64;
    let mut zbw = 0.0_f64;
    for (k, lambda) in [SQRT_2 * g(), 4.0 * SQRT_2 * g()].into_iter().enumerate() {
        let h = ctx.ham(lambda, 0.0);
        let heis = HeisenbergPosition::new(&Hamiltonians::new(*h.params(), ctx.trunc))?;
        let prop = StaticPropagator::new(&h.dirac())?;
        let proj = energy_projector(&h, true)?;
        for seed in 0..ctx.level.seeds() {
            let mut rng = ctx.rng(6 + k as u64, seed);
            let psi = random_bulk_state(&mut rng, ctx.trunc, 4);
            let t = rng.random_range(0.0..20.0);
            let schr = expectation_real(&h.ops().x, &prop.evolve(&psi, t))?;
            equiv = equiv.max((expectation_real(&heis.at(t), &psi)? - schr).abs());
            let v = proj.apply(psi.amplitudes());
            let pos = QubitFieldState::new(ctx.trunc, &v / real(v.norm()))?;
            zbw = zbw.max(expectation_real(&heis.zbw_op(t), &pos)?.abs());
        }
    }
    ctx.record("heisenberg_schrodinger_equivalence", equiv, 1e-6, "<x(t)> closed form vs propagation".into());
    ctx.record("zbw_vanishes_on_positive_energy", zbw, 1e-8, "<Z(t)> on P+ psi".into());
    Ok(())
}

fn fw(ctx: &mut Ctx) -> crate::Result<()> {
    let h = Hamiltonians::new(DriveParams::standard(4.0 * SQRT_2 * g(), 0.0), ctx.trunc);
    let report = h.fw_angle_oracle()?;
    let conv = report.selected.unwrap_or(AngleConvention::Literal);
    let s = h.build_fw_unitary(conv)?;
    let rotated = &(&s * &h.dirac()) * &s.dagger();
    let diff = Operator::new(Space::Joint, rotated.matrix() - h.build_fw_hamiltonian()?.matrix())?;
    let value = operator_norm(&diff.bulk_block(ctx.trunc, ctx.trunc.bulk_levels()));
    let chosen = report.selected.map(|c| c.name()).unwrap_or("none");
    ctx.record(
        "fw_angle_convention",
        value,
        1e-9,
        format!(
            "selected={chosen} literal_residual={:.3e} half_angle_residual={:.3e}",
            report.literal_residual, report.half_angle_residual
        ),
    );
    Ok(())
}

fn expansions(ctx: &mut Ctx) -> crate::Result<()> {
    let trunc = ctx.trunc;
    let t = 4.0;
    let bulk = |m: &CMatrix| {
        let op = Operator::new(Space::Joint, m.clone()).expect("square");
        operator_norm(&op.bulk_block(trunc, trunc.bulk_levels()))
    };
    let err = |lambda: f64, order: usize| -> crate::Result<f64> {
        let h = Hamiltonians::new(DriveParams::standard(lambda, 0.0), trunc);
        let exact = propagate_exact(&h, t)?;
        Ok(bulk(&(series_propagator(&h, t, order)?.matrix() - exact)))
    };
    let mut worst_margin = f64::INFINITY;
    let mut detail = String::new();
    for order in 1..=3 {
        let (l1, l2) = (0.1 / t, 0.05 / t);
        let measured = (err(l1, order)? / err(l2, order)?).log2();
        worst_margin = worst_margin.min(measured - (order as f64 + 0.8));
        let _ = write!(detail, "order{order}={measured:.3} ");
    }
    ctx.record_range("series_convergence_order", worst_margin, 0.0, f64::INFINITY, detail.trim().to_string());
    let h = Hamiltonians::new(DriveParams::standard(SQRT_2 * g(), g() / 2.0), trunc);
    let ratio = klein_short_time(&h, 2.0)?.1 / klein_short_time(&h, 1.0)?.1;
    ctx.record_range("klein_factorization_third_order", ratio, 6.5, 9.5, "error(2t)/error(t)".into());
    Ok(())
}

fn propagate_exact(h: &Hamiltonians, t: f64) -> crate::Result<CMatrix> {
    Ok(h.dirac().eigh(1e-10)?.propagator(t))
}

fn integrator(ctx: &mut Ctx) -> crate::Result<()> {
    let trunc = Truncation::new(12)?;
    let h = Hamiltonians::new(DriveParams::standard(SQRT_2 * g(), 0.0), trunc);
    let psi = QubitFieldState::spin_coherent(crate::SpinState::Plus, h.params().phi, c(0.5, 0.0), trunc)?;
    let driven = h.l1_driven();
    let run = |dt: f64| -> crate::Result<QubitFieldState> {
        Ok(propagate_td(&driven, &psi, &TimeGrid::new(0.0, 2.0, dt, usize::MAX)?)?.pop().unwrap().1)
    };
    let reference = run(0.0005)?;
    let e1 = run(0.02)?.distance(&reference);
    let e2 = run(0.01)?.distance(&reference);
    ctx.record_range("midpoint_convergence_order", (e1 / e2).log2(), 1.8, 2.2, "dt 0.02 -> 0.01".into());

    // lab and L1 propagation agree after mapping frames
    let small = Truncation::new(8)?;
    let h = Hamiltonians::new(DriveParams::standard(SQRT_2 * g(), g() / 2.0), small);
    let psi = QubitFieldState::spin_coherent(crate::SpinState::Plus, h.params().phi, c(0.2, 0.1), small)?;
    let t = 1.0;
    let grid = TimeGrid::new(0.0, t, 1e-4, usize::MAX)?;
    let l1 = propagate_td(&h.l1_driven(), &psi, &grid)?.pop().unwrap().1;
    let lab = propagate_td(&h.lab_driven(), &l1_to_lab(&psi, 0.0, h.params()), &grid)?.pop().unwrap().1;
    let dist = lab_to_l1(&lab, t, h.params()).distance(&l1);
    ctx.record("lab_l1_equivalence", dist, 1e-5, format!("n_max=8, t={t} ns, dt=1e-4 ns"));
    Ok(())
}

pub fn run_checks(level: CheckLevel, faults: Faults) -> CheckReport {
    let trunc = Truncation::new(level.n_max()).expect("nonzero");
    let mut ctx = Ctx { level, trunc, faults, entries: Vec::new() };
    type Step = fn(&mut Ctx) -> crate::Result<()>;
    let mut steps: Vec<(&'static str, Step)> = vec![
        ("hamiltonian_hermiticity", hermiticity),
        ("frame_chain", frame_chain),
        ("field_states", field_states),
        ("dynamics", dynamics),
        ("ehrenfest_relations", ehrenfest),
        ("zitterbewegung", zitterbewegung),
        ("fw_angle_convention", fw),
        ("expansions", expansions),
    ];
    if level == CheckLevel::Full {
        steps.push(("integrator", integrator));
    }
    for (name, step) in steps {
        if let Err(e) = step(&mut ctx) {
            ctx.record_error(name, e);
        }
    }
    CheckReport { level, entries: ctx.entries }
}
