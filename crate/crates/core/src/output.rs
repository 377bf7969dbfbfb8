//! Text serialization: CSV tables, P3 pixmaps and plain-text reports.
//!
//! All writers build `String`s; the CLI owns file I/O. Numbers go through
//! [`fmt_num`] so that every file is byte-deterministic.

use std::fmt::Write as _;

use crate::diagnostics::{DiagnosticsReport, TailFit, TailValue};
use crate::error::Result;
use crate::integrator::ProfileTrajectory;
use crate::sweep::{class_counts, majority_class, CellResult, Classification, SweepSpec};

/// Shortest decimal string that parses back to `x`.
///
/// Plain notation for `1e-5 <= |x| < 1e16`, otherwise scientific
/// (`1.5e-7`, `2e20`). Zero (of either sign) is `0`; non-finite values are
/// `NaN`, `inf` and `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if !x.is_finite() || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub const TRAJECTORY_HEADER: &str = "r,P,U,V,Theta,S,log10P";
pub const SWEEP_HEADER: &str = "i,j,k,p0,theta0,alpha,class,r_end,u_end,steps,termination";

/// Trajectory sampled at `samples` uniform radii over its span.
///
/// `log10P` is left empty where `P <= 0`.
pub fn trajectory_csv(traj: &ProfileTrajectory, samples: usize) -> Result<String> {
    let (a, b) = (traj.r_start(), traj.r_end());
    let n = samples.max(1);
    let mut out = String::with_capacity(64 * (n + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for idx in 0..n {
        let r = if idx + 1 == n && n > 1 {
            b
        } else if n == 1 {
            a
        } else {
            a + (b - a) * idx as f64 / (n - 1) as f64
        };
        let s = traj.dense_eval(r)?;
        let log_p = if s.p > 0.0 {
            fmt_num(s.p.log10())
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_num(r),
            fmt_num(s.p),
            fmt_num(s.u),
            fmt_num(s.v),
            fmt_num(s.theta),
            fmt_num(s.s),
            log_p
        );
    }
    Ok(out)
}

pub fn sweep_csv(results: &[CellResult]) -> String {
    let mut out = String::with_capacity(96 * (results.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for c in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.index[0],
            c.index[1],
            c.index[2],
            fmt_num(c.p0),
            fmt_num(c.theta0),
            fmt_num(c.alpha),
            c.classification.label(),
            fmt_num(c.r_end),
            fmt_num(c.u_end),
            c.steps,
            c.termination.label()
        );
    }
    out
}

/// Phase map of the `k`-th slice: axis 1 left to right, axis 2 bottom to top.
pub fn phase_ppm(spec: &SweepSpec, results: &[CellResult], k: usize) -> String {
    let [ni, nj, _] = spec.shape();
    let mut grid = vec![Classification::SolverError; ni * nj];
    for c in results.iter().filter(|c| c.index[2] == k) {
        grid[c.index[1] * ni + c.index[0]] = c.classification;
    }
    let mut out = format!("P3\n{ni} {nj}\n255\n");
    for j in (0..nj).rev() {
        for i in 0..ni {
            let [r, g, b] = grid[j * ni + i].rgb();
            let _ = writeln!(out, "{r} {g} {b}");
        }
    }
    out
}

pub fn sweep_summary(spec: &SweepSpec, results: &[CellResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "regime = {}", spec.regime.label());
    let _ = writeln!(out, "delta = {}", fmt_num(spec.delta));
    let _ = writeln!(out, "velocity = {}", spec.velocity.label());
    let [ni, nj, nk] = spec.shape();
    let _ = writeln!(out, "grid = {ni} x {nj} x {nk}");
    for a in &spec.axes {
        let _ = writeln!(
            out,
            "axis {} = {} .. {} ({} points)",
            a.name.label(),
            fmt_num(a.min),
            fmt_num(a.max),
            a.count
        );
    }
    let counts = class_counts(results);
    for (c, n) in Classification::ALL.iter().zip(counts) {
        let _ = writeln!(out, "count {} = {n}", c.label());
    }
    if let Some(m) = majority_class(results) {
        let _ = writeln!(out, "majority = {}", m.label());
    }
    let anomalies: Vec<&CellResult> = results.iter().filter(|c| c.stability.is_some()).collect();
    let _ = writeln!(out, "anomalies = {}", anomalies.len());
    for c in anomalies {
        let stable = match c.stability {
            Some(true) => "stable",
            _ => "unstable",
        };
        let _ = writeln!(
            out,
            "anomaly ({},{},{}) p0={} theta0={} alpha={} class={} delta/10={}",
            c.index[0],
            c.index[1],
            c.index[2],
            fmt_num(c.p0),
            fmt_num(c.theta0),
            fmt_num(c.alpha),
            c.classification.label(),
            stable
        );
    }
    out
}

/// Terminal summary of a single integration.
pub fn trajectory_summary(traj: &ProfileTrajectory, class: Classification) -> String {
    let mut out = String::new();
    let s = traj.launch();
    let e = traj.terminal_state();
    let _ = writeln!(out, "termination = {}", traj.termination().label());
    let _ = writeln!(out, "classification = {}", class.label());
    let _ = writeln!(out, "r_start = {}", fmt_num(traj.r_start()));
    let _ = writeln!(out, "r_end = {}", fmt_num(traj.r_end()));
    let _ = writeln!(out, "steps = {}", traj.step_count());
    let _ = writeln!(out, "rejected = {}", traj.rejected_count());
    for (label, st) in [("launch", s), ("final", e)] {
        let _ = writeln!(
            out,
            "{label} = P {} U {} V {} Theta {} S {}",
            fmt_num(st.p),
            fmt_num(st.u),
            fmt_num(st.v),
            fmt_num(st.theta),
            fmt_num(st.s)
        );
    }
    let fmt_opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_else(|| "none".to_string());
    let _ = writeln!(
        out,
        "first_negative_P = {}",
        fmt_opt(traj.first_negative_density())
    );
    let _ = writeln!(
        out,
        "first_negative_Theta = {}",
        fmt_opt(traj.first_negative_temperature())
    );
    out
}

fn tail_line(out: &mut String, name: &str, t: &TailValue) {
    let _ = writeln!(
        out,
        "tail {name} = {} (drift {})",
        fmt_num(t.mean),
        fmt_num(t.drift)
    );
}

pub fn tail_report(tail: &TailFit) -> String {
    let mut out = String::new();
    match tail {
        TailFit::NotApplicable(t) => {
            let _ = writeln!(out, "tail_fit = not_applicable ({})", t.label());
        }
        TailFit::Fit {
            p_inf,
            u_inf,
            theta_inf,
            r_lo,
            r_hi,
        } => {
            let _ = writeln!(out, "tail_fit = [{}, {}]", fmt_num(*r_lo), fmt_num(*r_hi));
            tail_line(&mut out, "P_inf", p_inf);
            tail_line(&mut out, "U_inf (r U)", u_inf);
            tail_line(&mut out, "Theta_inf (r^2 Theta)", theta_inf);
        }
    }
    out
}

pub fn diagnostics_report(rep: &DiagnosticsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "range = [{}, {}]",
        fmt_num(rep.r_lo),
        fmt_num(rep.r_hi)
    );

    let w = &rep.weights;
    let _ = writeln!(
        out,
        "weights head [0, delta] from launch ansatz = {}",
        fmt_num(w.head)
    );
    if let (Some(z), Some(wv)) = (w.z.last(), w.w.last()) {
        let _ = writeln!(out, "Z(r_end) = {}", fmt_num(*z));
        let _ = writeln!(out, "W(r_end) = {}", fmt_num(*wv));
    }

    let s = &rep.smallness;
    let _ = writeln!(
        out,
        "smallness sup over [{}, {}] = {} (Theta term {}, U term {})",
        fmt_num(s.r_lo),
        fmt_num(s.r_hi),
        fmt_num(s.combined),
        fmt_num(s.theta_term),
        fmt_num(s.u_term)
    );
    for (g, q) in &rep.smallness_curve {
        let _ = writeln!(out, "smallness gamma={} = {}", fmt_num(*g), fmt_num(*q));
    }

    let e = &rep.energy;
    for i in &e.integrals {
        let flag = match i.divergent {
            Some(true) => "divergent",
            Some(false) => "bounded",
            None => "undetermined",
        };
        let _ = writeln!(
            out,
            "energy {} = {} ({flag})",
            i.quantity.label(),
            fmt_num(i.value)
        );
    }
    let _ = writeln!(
        out,
        "energy cubic term uses epsilon = 1/R on the computed range"
    );
    let _ = writeln!(out, "identity_d = {}", fmt_num(e.identity_d));

    match rep.p_oracle_max_relerr {
        Some(x) => {
            let _ = writeln!(out, "continuity_oracle_max_relerr = {}", fmt_num(x));
        }
        None => {
            let _ = writeln!(
                out,
                "continuity_oracle_max_relerr = undefined (singularity)"
            );
        }
    }
    out.push_str(&tail_report(&rep.tail));
    out
}

/// `r,Z,W` table of the sampled weights.
pub fn weights_csv(rep: &DiagnosticsReport) -> String {
    let w = &rep.weights;
    let mut out = String::from("r,Z,W\n");
    for ((r, z), wv) in w.radii.iter().zip(&w.z).zip(&w.w) {
        let _ = writeln!(out, "{},{},{}", fmt_num(*r), fmt_num(*z), fmt_num(*wv));
    }
    out
}
