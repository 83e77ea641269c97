//! Figure scenarios, the configuration format and the scenario runner.
//!
//! Config files are line oriented:
//!
//! ```text
//! # comment
//! scenario = fig3e
//! n_max = 40
//! Omega = 2pi*200MHz
//! frames = l1, effective
//! ```
//!
//! Frequencies are raw rad/ns or `2pi*<x>MHz` / `2pi*<x>GHz`. Keys set
//! explicitly override the values bound by `scenario`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analytics::series_propagator;
use crate::error::{Error, Result};
use crate::hamiltonians::{two_pi_mhz, DriveParams, Hamiltonians};
use crate::hilbert::{QubitFieldState, SpinState, Truncation, DEFAULT_N_MAX};
use crate::linalg::{c, operator_norm, C64};
use crate::observables::{
    quadratures, reduce_field, wigner_map, write_trajectory_csv, write_wigner_csv, Quadratures, Trajectory,
    TrajectoryRecord, WignerGrid,
};
use crate::propagation::{evolve_in_frame, Frame, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig1d,
    Fig1e,
    Fig1f,
    Fig2Massless,
    Fig2Intermediate,
    Fig2Heavy,
    Fig2Fw,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig3e,
    Fig3f,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Output {
    Trajectory,
    Wigner,
    SeriesCheck,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::Trajectory => "trajectory",
            Output::Wigner => "wigner",
            Output::SeriesCheck => "series_check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Output::Trajectory, Output::Wigner, Output::SeriesCheck].into_iter().find(|o| o.name() == s)
    }
}

/// Mass in units of g.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mass {
    Zero,
    Intermediate,
    Heavy,
}

impl Mass {
    pub fn lambda(self, g: f64) -> f64 {
        match self {
            Mass::Zero => 0.0,
            Mass::Intermediate => SQRT_2 * g,
            Mass::Heavy => 4.0 * SQRT_2 * g,
        }
    }
}

/// Parameters a scenario binds.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub mass: Mass,
    pub xi_over_g: f64,
    pub spin: SpinState,
    /// Initial coherent amplitude; √2 i gives ⟨p⟩ = 2.
    pub alpha: C64,
    pub t_end: f64,
    pub frames: Vec<Frame>,
    pub outputs: Vec<Output>,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 16] = [
        ScenarioId::Fig1a,
        ScenarioId::Fig1b,
        ScenarioId::Fig1c,
        ScenarioId::Fig1d,
        ScenarioId::Fig1e,
        ScenarioId::Fig1f,
        ScenarioId::Fig2Massless,
        ScenarioId::Fig2Intermediate,
        ScenarioId::Fig2Heavy,
        ScenarioId::Fig2Fw,
        ScenarioId::Fig3a,
        ScenarioId::Fig3b,
        ScenarioId::Fig3c,
        ScenarioId::Fig3d,
        ScenarioId::Fig3e,
        ScenarioId::Fig3f,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Fig1a => "fig1a",
            ScenarioId::Fig1b => "fig1b",
            ScenarioId::Fig1c => "fig1c",
            ScenarioId::Fig1d => "fig1d",
            ScenarioId::Fig1e => "fig1e",
            ScenarioId::Fig1f => "fig1f",
            ScenarioId::Fig2Massless => "fig2_massless",
            ScenarioId::Fig2Intermediate => "fig2_intermediate",
            ScenarioId::Fig2Heavy => "fig2_heavy",
            ScenarioId::Fig2Fw => "fig2_fw",
            ScenarioId::Fig3a => "fig3a",
            ScenarioId::Fig3b => "fig3b",
            ScenarioId::Fig3c => "fig3c",
            ScenarioId::Fig3d => "fig3d",
            ScenarioId::Fig3e => "fig3e",
            ScenarioId::Fig3f => "fig3f",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ScenarioId::ALL.into_iter().find(|id| id.name() == s)
    }

    pub fn is_fig2_rwa(self) -> bool {
        matches!(self, ScenarioId::Fig2Massless | ScenarioId::Fig2Intermediate | ScenarioId::Fig2Heavy)
    }

    pub fn binding(self) -> Binding {
        use ScenarioId::*;
        let kick = c(0.0, SQRT_2);
        let zero = c(0.0, 0.0);
        let (mass, spin, alpha) = match self {
            Fig1a | Fig3a | Fig2Massless => (Mass::Zero, SpinState::Plus, zero),
            Fig1b | Fig3b => (Mass::Zero, SpinState::Plus, kick),
            Fig1c | Fig3c | Fig2Intermediate => (Mass::Intermediate, SpinState::Plus, zero),
            Fig1d | Fig3d => (Mass::Intermediate, SpinState::Plus, kick),
            Fig1e | Fig3e | Fig2Heavy | Fig2Fw => (Mass::Heavy, SpinState::Excited, zero),
            Fig1f | Fig3f => (Mass::Heavy, SpinState::Excited, kick),
        };
        let (xi_over_g, t_end, frames, outputs) = match self {
            Fig1a | Fig1b | Fig1c | Fig1d | Fig1e | Fig1f => {
                (0.0, 60.0, vec![Frame::L1], vec![Output::Trajectory, Output::Wigner])
            }
            Fig2Massless | Fig2Intermediate | Fig2Heavy => {
                (0.0, 30.0, vec![Frame::L1, Frame::Effective], vec![Output::Trajectory])
            }
            Fig2Fw => (0.0, 30.0, vec![Frame::FwLinearized, Frame::FwExact], vec![Output::Trajectory]),
            _ => (0.5, 60.0, vec![Frame::L1], vec![Output::Trajectory, Output::Wigner]),
        };
        Binding { mass, xi_over_g, spin, alpha, t_end, frames, outputs }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub scenario: Option<ScenarioId>,
    pub params: DriveParams,
    pub spin: SpinState,
    pub alpha: C64,
    pub frames: Vec<Frame>,
    pub t_end: f64,
    /// Integration step; each frame's default when unset.
    pub dt: Option<f64>,
    pub sample_dt: f64,
    pub n_max: usize,
    pub outputs: Vec<Output>,
    pub wigner_grid: WignerGrid,
    /// Strong-drive amplitudes for `sweep-rwa`.
    pub sweep_omegas: Vec<f64>,
}

const KEYS: &[&str] = &[
    "scenario",
    "name",
    "omega_q",
    "omega",
    "g",
    "Omega",
    "lambda",
    "nu",
    "xi",
    "phi",
    "spin",
    "alpha",
    "frame",
    "frames",
    "t_end",
    "dt",
    "sample_dt",
    "n_max",
    "outputs",
    "wigner_range",
    "wigner_points",
    "sweep_omegas",
];

const CUSTOM_REQUIRED: &[&str] = &["omega", "g", "Omega", "lambda", "xi", "spin", "alpha", "t_end"];

impl ScenarioConfig {
    pub fn from_scenario(id: ScenarioId) -> Self {
        let b = id.binding();
        let base = DriveParams::standard(0.0, 0.0);
        let params = DriveParams::standard(b.mass.lambda(base.g), b.xi_over_g * base.g);
        Self {
            name: id.name().to_string(),
            scenario: Some(id),
            params,
            spin: b.spin,
            alpha: b.alpha,
            frames: b.frames,
            t_end: b.t_end,
            dt: None,
            sample_dt: 0.1,
            n_max: DEFAULT_N_MAX,
            outputs: b.outputs,
            wigner_grid: WignerGrid::default(),
            sweep_omegas: [50.0, 100.0, 200.0, 400.0].iter().map(|&f| two_pi_mhz(f)).collect(),
        }
    }

    pub fn grid(&self, frame: Frame) -> Result<TimeGrid> {
        let dt = self.dt.unwrap_or(frame.default_dt());
        TimeGrid::sampled(self.t_end, dt, self.sample_dt)
    }

    pub fn truncation(&self) -> Result<Truncation> {
        Truncation::new(self.n_max)
    }

    pub fn initial_state(&self) -> Result<QubitFieldState> {
        QubitFieldState::spin_coherent(self.spin, self.params.phi, self.alpha, self.truncation()?)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.frames.is_empty() {
            return Err(Error::Validation("at least one frame is required".into()));
        }
        if self.n_max < 2 {
            return Err(Error::Validation("n_max must be at least 2".into()));
        }
        if !(self.t_end > 0.0 && self.sample_dt > 0.0) {
            return Err(Error::Validation("t_end and sample_dt must be positive".into()));
        }
        for &f in &self.frames {
            self.grid(f)?;
            if matches!(f, Frame::Effective | Frame::FwExact | Frame::FwLinearized) {
                self.params
                    .check_symmetric_mode()
                    .map_err(|e| Error::Validation(format!("frame {f} needs the resonance conditions: {e}")))?;
            }
            if matches!(f, Frame::FwExact | Frame::FwLinearized) {
                if self.params.lambda <= 0.0 {
                    return Err(Error::Validation(format!("frame {f} needs lambda > 0")));
                }
                if self.params.xi != 0.0 {
                    return Err(Error::Validation(format!("frame {f} needs xi = 0")));
                }
            }
            if f == Frame::Interaction && self.params.omega_q != self.params.omega {
                return Err(Error::Validation("interaction frame needs omega_q = omega".into()));
            }
        }
        if self.outputs.contains(&Output::SeriesCheck) && self.params.xi != 0.0 {
            return Err(Error::Validation("series_check needs xi = 0".into()));
        }
        self.wigner_grid.validate()?;
        Ok(())
    }
}

/// Parse a frequency: raw rad/ns, `2pi*<x>MHz` or `2pi*<x>GHz`.
pub fn parse_frequency(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("2pi*") {
        let rest = rest.trim();
        if let Some(v) = rest.strip_suffix("MHz") {
            return v.trim().parse::<f64>().ok().map(two_pi_mhz);
        }
        if let Some(v) = rest.strip_suffix("GHz") {
            return v.trim().parse::<f64>().ok().map(|f| two_pi_mhz(1e3 * f));
        }
        return None;
    }
    s.parse::<f64>().ok()
}

/// Parse `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| c(re, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().ok()?,
    };
    Some(c(re.parse::<f64>().ok()?, im))
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    s.split(',').map(|item| f(item.trim())).collect()
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse { line: line_no, msg: format!("expected `key = value`, got `{line}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse { line: line_no, msg: format!("unknown key `{key}`") });
        }
        if value.is_empty() {
            return Err(Error::Parse { line: line_no, msg: format!("empty value for `{key}`") });
        }
        if let Some((first, _)) = entries.get(key) {
            return Err(Error::Parse { line: line_no, msg: format!("duplicate key `{key}` (first on line {first})") });
        }
        entries.insert(key.to_string(), (line_no, value.to_string()));
    }
    if entries.is_empty() {
        return Err(Error::Parse { line: 1, msg: "missing scenario or params".into() });
    }
    let bad = |key: &str, what: &str| -> Error {
        let (line, value) = &entries[key];
        Error::Parse { line: *line, msg: format!("invalid {what} for `{key}`: `{value}`") }
    };
    let mut cfg = match entries.get("scenario") {
        Some((line, v)) => {
            let id = ScenarioId::parse(v)
                .ok_or_else(|| Error::Parse { line: *line, msg: format!("unknown scenario `{v}`") })?;
            ScenarioConfig::from_scenario(id)
        }
        None => {
            if let Some(missing) = CUSTOM_REQUIRED.iter().find(|k| !entries.contains_key(**k)) {
                return Err(Error::Validation(format!("missing required key `{missing}` (no scenario given)")));
            }
            let mut cfg = ScenarioConfig::from_scenario(ScenarioId::Fig1a);
            cfg.name = "custom".into();
            cfg.scenario = None;
            cfg
        }
    };
    let freq = |key: &str| -> Result<Option<f64>> {
        match entries.get(key) {
            Some((_, v)) => parse_frequency(v).map(Some).ok_or_else(|| bad(key, "frequency")),
            None => Ok(None),
        }
    };
    let number = |key: &str| -> Result<Option<f64>> {
        match entries.get(key) {
            Some((_, v)) => v.parse::<f64>().map(Some).map_err(|_| bad(key, "number")),
            None => Ok(None),
        }
    };
    let p = &mut cfg.params;
    if let Some(v) = freq("omega")? {
        p.omega = v;
        p.omega_q = v;
        p.nu = v - 2.0 * p.big_omega;
    }
    if let Some(v) = freq("Omega")? {
        p.big_omega = v;
        p.nu = p.omega - 2.0 * v;
    }
    if let Some(v) = freq("omega_q")? {
        p.omega_q = v;
    }
    if let Some(v) = freq("nu")? {
        p.nu = v;
    }
    if let Some(v) = freq("g")? {
        p.g = v;
    }
    if let Some(v) = freq("lambda")? {
        p.lambda = v;
    }
    if let Some(v) = freq("xi")? {
        p.xi = v;
    }
    if let Some(v) = number("phi")? {
        p.phi = v;
    } else if cfg.scenario.is_none() {
        p.phi = FRAC_PI_2;
    }
    if let Some((_, v)) = entries.get("name") {
        cfg.name = v.clone();
    }
    if let Some((_, v)) = entries.get("spin") {
        cfg.spin = SpinState::parse(v).ok_or_else(|| bad("spin", "spin state"))?;
    }
    if let Some((_, v)) = entries.get("alpha") {
        cfg.alpha = parse_complex(v).ok_or_else(|| bad("alpha", "complex number"))?;
    }
    if entries.contains_key("frame") && entries.contains_key("frames") {
        return Err(bad("frames", "combination (use either `frame` or `frames`)"));
    }
    for key in ["frame", "frames"] {
        if let Some((_, v)) = entries.get(key) {
            cfg.frames = parse_list(v, Frame::parse).ok_or_else(|| bad(key, "frame list"))?;
        }
    }
    if let Some((_, v)) = entries.get("outputs") {
        cfg.outputs = parse_list(v, Output::parse).ok_or_else(|| bad("outputs", "output list"))?;
    }
    if let Some(v) = number("t_end")? {
        cfg.t_end = v;
    }
    if let Some(v) = number("dt")? {
        cfg.dt = Some(v);
    }
    if let Some(v) = number("sample_dt")? {
        cfg.sample_dt = v;
    }
    if let Some((_, v)) = entries.get("n_max") {
        cfg.n_max = v.parse().map_err(|_| bad("n_max", "integer"))?;
    }
    if let Some(v) = number("wigner_range")? {
        cfg.wigner_grid.x_min = -v;
        cfg.wigner_grid.x_max = v;
        cfg.wigner_grid.p_min = -v;
        cfg.wigner_grid.p_max = v;
    }
    if let Some((_, v)) = entries.get("wigner_points") {
        let n: usize = v.parse().map_err(|_| bad("wigner_points", "integer"))?;
        cfg.wigner_grid.nx = n;
        cfg.wigner_grid.np = n;
    }
    if let Some((_, v)) = entries.get("sweep_omegas") {
        cfg.sweep_omegas = parse_list(v, parse_frequency).ok_or_else(|| bad("sweep_omegas", "frequency list"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Summary of one frame's run.
#[derive(Clone, Debug)]
pub struct FrameSummary {
    pub frame: Frame,
    pub trajectory: Trajectory,
    pub final_quadratures: Quadratures,
    pub final_purity: f64,
    pub wigner_min: Option<f64>,
    pub wigner_max: Option<f64>,
    pub max_norm_drift: f64,
    pub max_fock_tail: f64,
}

impl FrameSummary {
    pub fn final_record(&self) -> &TrajectoryRecord {
        self.trajectory.last().expect("trajectory has at least the initial sample")
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub name: String,
    pub files: Vec<PathBuf>,
    pub frames: Vec<FrameSummary>,
}

fn metadata(cfg: &ScenarioConfig, frame: Option<Frame>, grid: Option<&TimeGrid>) -> Vec<(String, String)> {
    let p = &cfg.params;
    let mut m = vec![("scenario".to_string(), cfg.name.clone())];
    if let Some(f) = frame {
        m.push(("frame".into(), f.name().into()));
    }
    m.push(("n_max".into(), cfg.n_max.to_string()));
    if let Some(g) = grid {
        m.push(("dt".into(), format!("{:e}", g.dt)));
        m.push(("t_end".into(), format!("{:e}", g.t_end)));
    }
    for (k, v) in [
        ("omega_q", p.omega_q),
        ("omega", p.omega),
        ("g", p.g),
        ("Omega", p.big_omega),
        ("lambda", p.lambda),
        ("nu", p.nu),
        ("xi", p.xi),
        ("phi", p.phi),
    ] {
        m.push((k.into(), format!("{v:.11e}")));
    }
    m.push(("spin".into(), cfg.spin.name().into()));
    m.push(("alpha".into(), format!("{:.11e}{:+.11e}i", cfg.alpha.re, cfg.alpha.im)));
    m
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run_frame(cfg: &ScenarioConfig, ham: &Hamiltonians, frame: Frame, out_dir: &Path) -> Result<(FrameSummary, Vec<PathBuf>)> {
    let grid = cfg.grid(frame)?;
    let psi0 = cfg.initial_state()?;
    let samples = evolve_in_frame(ham, frame, &psi0, &grid)?;
    let trajectory = Trajectory::from_states(ham.ops(), &samples)?;
    let last = &samples.last().expect("grid has at least one sample").1;
    let final_quadratures = quadratures(ham.ops(), last)?;
    let rho = reduce_field(last)?;
    let mut files = Vec::new();
    let meta = metadata(cfg, Some(frame), Some(&grid));
    if cfg.outputs.contains(&Output::Trajectory) {
        let path = out_dir.join(format!("{}_{}_trajectory.csv", cfg.name, frame.name()));
        let mut w = create(&path)?;
        write_trajectory_csv(&mut w, &meta, &trajectory)?;
        w.flush()?;
        files.push(path);
    }
    let (mut wmin, mut wmax) = (None, None);
    if cfg.outputs.contains(&Output::Wigner) {
        let map = wigner_map(&rho, &cfg.wigner_grid)?;
        wmin = Some(map.min());
        wmax = Some(map.max());
        let path = out_dir.join(format!("{}_{}_wigner.csv", cfg.name, frame.name()));
        let mut w = create(&path)?;
        write_wigner_csv(&mut w, &meta, &map)?;
        w.flush()?;
        files.push(path);
    }
    let max_norm_drift = trajectory.records.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max);
    let max_fock_tail = trajectory.records.iter().map(|r| r.fock_tail).fold(0.0, f64::max);
    let summary = FrameSummary {
        frame,
        trajectory,
        final_quadratures,
        final_purity: rho.purity(),
        wigner_min: wmin,
        wigner_max: wmax,
        max_norm_drift,
        max_fock_tail,
    };
    Ok((summary, files))
}

/// Errors of the order-0..3 series against the exact free propagator at ten
/// times across the window, bulk-restricted operator norm.
pub fn series_errors(ham: &Hamiltonians, t_end: f64) -> Result<Vec<(f64, [f64; 4])>> {
    let trunc = ham.truncation();
    let eig = ham.dirac().eigh(1e-10)?;
    (1..=10)
        .map(|k| {
            let t = t_end * k as f64 / 10.0;
            let exact = eig.propagator(t);
            let mut errs = [0.0; 4];
            for (order, e) in errs.iter_mut().enumerate() {
                let s = series_propagator(ham, t, order)?;
                let diff = crate::hilbert::Operator::new(crate::hilbert::Space::Joint, s.matrix() - &exact)?;
                *e = operator_norm(&diff.bulk_block(trunc, trunc.bulk_levels()));
            }
            Ok((t, errs))
        })
        .collect()
}

pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let ham = Hamiltonians::new(cfg.params, cfg.truncation()?);
    let results: Vec<Result<(FrameSummary, Vec<PathBuf>)>> =
        cfg.frames.par_iter().map(|&f| run_frame(cfg, &ham, f, out_dir)).collect();
    let mut frames = Vec::new();
    let mut files = Vec::new();
    for r in results {
        let (s, f) = r?;
        frames.push(s);
        files.extend(f);
    }
    if cfg.outputs.contains(&Output::SeriesCheck) {
        let path = out_dir.join(format!("{}_series.csv", cfg.name));
        let mut w = create(&path)?;
        for (k, v) in metadata(cfg, None, None) {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "t,order0,order1,order2,order3")?;
        for (t, e) in series_errors(&ham, cfg.t_end)? {
            writeln!(w, "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}", t, e[0], e[1], e[2], e[3])?;
        }
        w.flush()?;
        files.push(path);
    }
    Ok(RunReport { name: cfg.name.clone(), files, frames })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaRow {
    pub big_omega: f64,
    pub nu: f64,
    pub max_deviation: f64,
}

/// max_t |⟨x⟩_L1 − ⟨x⟩_eff| for each strong-drive amplitude.
pub fn sweep_rwa(cfg: &ScenarioConfig, omegas: &[f64]) -> Result<Vec<RwaRow>> {
    match cfg.scenario {
        Some(id) if id.is_fig2_rwa() => {}
        _ => return Err(Error::Validation("sweep-rwa needs a fig2 scenario with an L1 comparison".into())),
    }
    let psi0 = cfg.initial_state()?;
    omegas
        .par_iter()
        .map(|&om| {
            let params = cfg.params.with_big_omega(om);
            let ham = Hamiltonians::new(params, cfg.truncation()?);
            let l1 = evolve_in_frame(&ham, Frame::L1, &psi0, &cfg.grid(Frame::L1)?)?;
            let eff = evolve_in_frame(&ham, Frame::Effective, &psi0, &cfg.grid(Frame::Effective)?)?;
            let a = Trajectory::from_states(ham.ops(), &l1)?;
            let b = Trajectory::from_states(ham.ops(), &eff)?;
            if a.times() != b.times() {
                return Err(Error::Validation("sweep-rwa needs a common sample grid for both frames".into()));
            }
            Ok(RwaRow { big_omega: om, nu: params.nu, max_deviation: a.max_x_deviation(&b) })
        })
        .collect()
}

pub fn write_rwa_csv<W: Write>(w: &mut W, cfg: &ScenarioConfig, rows: &[RwaRow]) -> Result<()> {
    for (k, v) in metadata(cfg, None, None) {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "Omega_MHz,Omega,nu,max_deviation")?;
    for r in rows {
        let mhz = r.big_omega / two_pi_mhz(1.0);
        writeln!(w, "{:.11e},{:.11e},{:.11e},{:.11e}", mhz, r.big_omega, r.nu, r.max_deviation)?;
    }
    Ok(())
}
