//! Command-line front end: `run`, `sweep` and `diag`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{RawConfig, RunConfig};
use crate::diagnostics::{continuity_oracle, diagnose, tail_fit};
use crate::error::{Error, Result};
use crate::integrator::{integrate_with_guard, ProfileTrajectory};
use crate::output;
use crate::sweep::{classify, run_sweep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "shrinkers",
    version,
    about = "Integrate, sweep and diagnose self-similar profiles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one launch; write trajectory.csv and report.txt.
    Run(CommonArgs),
    /// Classify a parameter grid; write results.csv, phase maps and a summary.
    Sweep(CommonArgs),
    /// Integrate one launch and write the full diagnostics report.
    Diag(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the `out` key).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (overrides the `threads` key).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Override a configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        for pair in &self.set {
            raw.set_pair(pair)?;
        }
        let mut cfg = RunConfig::from_raw(&raw)?;
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Error::Config("--threads must be at least 1".into()));
            }
            cfg.threads = Some(t);
        }
        Ok(cfg)
    }
}

/// Parse `args` (including the program name) and execute; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(written) => {
            for p in written {
                println!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Run a parsed command; returns the files written.
pub fn execute(command: &Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Run(a) => cmd_run(&a.resolve()?),
        Command::Sweep(a) => cmd_sweep(&a.resolve()?),
        Command::Diag(a) => cmd_diag(&a.resolve()?),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn integrate_fixed(cfg: &RunConfig) -> Result<ProfileTrajectory> {
    let start = cfg.launch().map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })?;
    let spec = &cfg.spec;
    Ok(integrate_with_guard(
        &start,
        &spec.consts,
        &spec.integrator,
        spec.guard_eps,
    ))
}

fn header(cfg: &RunConfig) -> String {
    let s = &cfg.spec;
    let c = &s.consts;
    let i = &s.integrator;
    let mut out = String::new();
    let _ = writeln!(out, "regime = {}", s.regime.label());
    if s.regime == crate::sweep::Regime::Cavitating {
        let _ = writeln!(out, "velocity = {}", s.velocity.label());
        let _ = writeln!(out, "alpha = {}", output::fmt_num(s.alpha));
    }
    let _ = writeln!(out, "p0 = {}", output::fmt_num(s.p0));
    let _ = writeln!(out, "theta0 = {}", output::fmt_num(s.theta0));
    let _ = writeln!(out, "delta = {}", output::fmt_num(s.delta));
    let _ = writeln!(
        out,
        "constants = c_v {} r_gas {} kappa {} mu {} lambda {} d {}",
        output::fmt_num(c.c_v),
        output::fmt_num(c.r_gas),
        output::fmt_num(c.kappa),
        output::fmt_num(c.mu),
        output::fmt_num(c.lambda),
        c.d
    );
    let _ = writeln!(
        out,
        "tolerances = rtol {} atol {} r_max {} blowup_threshold {}",
        output::fmt_num(i.rtol),
        output::fmt_num(i.atol),
        output::fmt_num(i.r_max),
        output::fmt_num(i.blowup_threshold)
    );
    out
}

pub fn cmd_run(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let traj = integrate_fixed(cfg)?;
    let dir = out_dir(cfg)?;
    let mut written = Vec::new();
    write(
        &dir,
        "trajectory.csv",
        &output::trajectory_csv(&traj, cfg.samples)?,
        &mut written,
    )?;

    let mut report = header(cfg);
    report.push_str(&output::trajectory_summary(
        &traj,
        classify(&traj, cfg.spec.dead_band),
    ));
    if cfg.gamma_given {
        report.push_str(&diag_section(&traj, cfg));
    } else {
        let d = &cfg.diagnostics;
        match continuity_oracle(&traj, &cfg.spec.consts, d) {
            Ok(o) => {
                let _ = writeln!(
                    report,
                    "continuity_oracle_max_relerr = {}",
                    output::fmt_num(o.max_rel_err)
                );
            }
            Err(e) => {
                let _ = writeln!(report, "continuity_oracle_max_relerr = undefined ({e})");
            }
        }
        match tail_fit(&traj, d) {
            Ok(t) => report.push_str(&output::tail_report(&t)),
            Err(e) => {
                let _ = writeln!(report, "tail_fit = failed ({e})");
            }
        }
    }
    write(&dir, "report.txt", &report, &mut written)?;
    Ok(written)
}

fn diag_section(traj: &ProfileTrajectory, cfg: &RunConfig) -> String {
    match diagnose(traj, &cfg.spec.consts, &cfg.diagnostics, cfg.samples) {
        Ok(rep) => output::diagnostics_report(&rep),
        Err(e) => format!("diagnostics = failed ({e})\n"),
    }
}

pub fn cmd_diag(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dcfg = cfg.require_diagnostics()?;
    let traj = integrate_fixed(cfg)?;
    let dir = out_dir(cfg)?;
    let mut written = Vec::new();
    let mut report = header(cfg);
    report.push_str(&output::trajectory_summary(
        &traj,
        classify(&traj, cfg.spec.dead_band),
    ));
    match diagnose(&traj, &cfg.spec.consts, dcfg, cfg.samples) {
        Ok(rep) => {
            report.push_str(&output::diagnostics_report(&rep));
            write(&dir, "diagnostics.txt", &report, &mut written)?;
            write(
                &dir,
                "weights.csv",
                &output::weights_csv(&rep),
                &mut written,
            )?;
        }
        Err(e) => {
            let _ = writeln!(report, "diagnostics = failed ({e})");
            write(&dir, "diagnostics.txt", &report, &mut written)?;
        }
    }
    Ok(written)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let spec = &cfg.spec;
    let results = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?
            .install(|| run_sweep(spec))?,
        None => run_sweep(spec)?,
    };
    let dir = out_dir(cfg)?;
    let mut written = Vec::new();
    write(
        &dir,
        "results.csv",
        &output::sweep_csv(&results),
        &mut written,
    )?;
    let nk = spec.shape()[2];
    for k in 0..nk {
        let name = if nk == 1 {
            "phase.ppm".to_string()
        } else {
            format!("phase_k{k}.ppm")
        };
        write(
            &dir,
            &name,
            &output::phase_ppm(spec, &results, k),
            &mut written,
        )?;
    }
    write(
        &dir,
        "sweep_summary.txt",
        &output::sweep_summary(spec, &results),
        &mut written,
    )?;
    Ok(written)
}
