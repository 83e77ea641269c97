use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dirac_cqed::check::{run_checks, CheckLevel, Faults};
use dirac_cqed::scenarios::{parse_config, run_scenario, sweep_rwa, write_rwa_csv, ScenarioConfig, ScenarioId};
use dirac_cqed::Error;

#[derive(Parser)]
#[command(name = "dirac-cqed", version, about = "Dirac particle dynamics in a driven qubit-resonator system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Directory for CSV output
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Fock truncation (overrides the config)
    #[arg(long)]
    nmax: Option<usize>,
    /// Integration step in ns (overrides the config)
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the invariant suite
    Check {
        /// n_max = 40 and 20 seeds instead of n_max = 20 and 3 seeds
        #[arg(long)]
        full: bool,
        /// Flip the sign of sigma_y in the effective Hamiltonian
        #[arg(long)]
        inject_sigma_y_fault: bool,
    },
    /// Compare L1 and effective dynamics for several strong-drive amplitudes
    SweepRwa {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the built-in scenarios
    ListScenarios,
}

fn load(path: &Path, o: &Overrides) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(n) = o.nmax {
        cfg.n_max = n;
    }
    if let Some(dt) = o.dt {
        cfg.dt = Some(dt);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(path: &Path, o: &Overrides) -> Result<(), Error> {
    let cfg = load(path, o)?;
    let report = run_scenario(&cfg, &o.out_dir)?;
    let mut out = std::io::stdout().lock();
    for f in &report.frames {
        let r = f.final_record();
        let q = &f.final_quadratures;
        writeln!(
            out,
            "{} {}: t={:.3} x={:.6} p={:.6} var_x={:.6} var_p={:.6} min_var={:.6} purity={:.6} norm_drift={:.2e} fock_tail={:.2e}",
            report.name,
            f.frame,
            r.t,
            r.x,
            r.p,
            q.var_x,
            q.var_p,
            q.min_principal_variance(),
            f.final_purity,
            f.max_norm_drift,
            f.max_fock_tail
        )?;
        if let (Some(lo), Some(hi)) = (f.wigner_min, f.wigner_max) {
            writeln!(out, "{} {}: wigner_min={lo:.6} wigner_max={hi:.6}", report.name, f.frame)?;
        }
    }
    for file in &report.files {
        writeln!(out, "wrote {}", file.display())?;
    }
    Ok(())
}

fn sweep(path: &Path, o: &Overrides) -> Result<(), Error> {
    let cfg = load(path, o)?;
    let rows = sweep_rwa(&cfg, &cfg.sweep_omegas)?;
    std::fs::create_dir_all(&o.out_dir)?;
    let file = o.out_dir.join(format!("{}_rwa_sweep.csv", cfg.name));
    let mut w = std::io::BufWriter::new(std::fs::File::create(&file)?);
    write_rwa_csv(&mut w, &cfg, &rows)?;
    w.flush()?;
    let mut out = std::io::stdout().lock();
    for r in &rows {
        writeln!(out, "Omega={:.6} rad/ns max_deviation={:.6e}", r.big_omega, r.max_deviation)?;
    }
    writeln!(out, "wrote {}", file.display())?;
    Ok(())
}

fn list() -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    for id in ScenarioId::ALL {
        let b = id.binding();
        let frames: Vec<&str> = b.frames.iter().map(|f| f.name()).collect();
        writeln!(
            out,
            "{}\tmass={:?}\txi/g={}\tspin={}\talpha={}{:+}i\tt_end={}\tframes={}",
            id,
            b.mass,
            b.xi_over_g,
            b.spin,
            b.alpha.re,
            b.alpha.im,
            b.t_end,
            frames.join(",")
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => run(&config, &overrides),
        Command::SweepRwa { config, overrides } => sweep(&config, &overrides),
        Command::ListScenarios => list(),
        Command::Check { full, inject_sigma_y_fault } => {
            let level = if full { CheckLevel::Full } else { CheckLevel::Fast };
            let report = run_checks(level, Faults { sigma_y_sign: inject_sigma_y_fault });
            if let Err(e) = std::io::stdout().lock().write_all(report.render().as_bytes()) {
                return ExitCode::from(Error::from(e).exit_code() as u8);
            }
            if !report.all_passed() {
                return ExitCode::from(4);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
