//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed on each run.
//! The process exits non-zero when any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{alt_consts, oracle_rhs, reference_consts, rel_diff};
use shrinkers::cli::{execute, Command, CommonArgs};
use shrinkers::diagnostics::{
    continuity_oracle, energy_report, smallness_functional, weights, DiagnosticsConfig,
    RadialProfile, SyntheticProfile,
};
use shrinkers::initdata::{
    cavitating_state_with, smooth_state, CavitatingParams, SmoothParams, VelocityInterpretation,
};
use shrinkers::integrator::{integrate, integrate_system, FnSystem, IntegratorConfig};
use shrinkers::model::{
    residual_continuity, residual_momentum, residual_temperature, rhs, PhysConsts, ProfileState,
    RhsDerivative, DEFAULT_GUARD_EPS,
};
use shrinkers::sweep::{majority_class, Axis, AxisName, Classification, Regime, SweepSpec};
use shrinkers::{ProfileTrajectory, TerminationKind};

// Pinned tolerances.
const STATIONARY_TOL: f64 = 1e-10;
const ORDER_TARGET: f64 = 5.0;
const ORDER_TOL: f64 = 0.2;
const ORACLE_REL_TOL: f64 = 1e-12;
const RESIDUAL_FACTOR: f64 = 100.0;
const CONTINUITY_TOL: f64 = 1e-6;
const CORRUPTION: f64 = 0.01;
const CORRUPTION_DETECT: f64 = 5e-3;
const SMOOTH_POSITIVE_FRACTION: f64 = 0.95;
const WEIGHT_RATIO_TOL: f64 = 1e-10;
const SMALLNESS_EXPECTED: f64 = 21.031_052_619_074_6;
const SMALLNESS_TOL: f64 = 1e-9;
/// Uniform samples over the final half of a trajectory for shape checks.
const SHAPE_SAMPLES: usize = 201;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Outcome {
    fn new(id: u32, name: &'static str, start: Instant, budget: Option<Duration>) -> Self {
        Self {
            id,
            name,
            pass: false,
            detail: String::new(),
            elapsed: start.elapsed(),
            budget,
        }
    }

    fn finish(mut self, checks_pass: bool, detail: String) -> Self {
        let in_time = self.budget.is_none_or(|b| self.elapsed <= b);
        self.pass = checks_pass && in_time;
        self.detail = detail;
        if !in_time {
            self.detail.push_str("; over time budget");
        }
        self
    }
}

fn secs(s: f64) -> Option<Duration> {
    Some(Duration::from_secs_f64(s))
}

/// A trajectory kept for the continuity-oracle criterion.
struct Kept {
    family: &'static str,
    consts: PhysConsts,
    traj: ProfileTrajectory,
}

fn stationary() -> (Outcome, Vec<Kept>) {
    let start = Instant::now();
    let mut kept = Vec::new();
    let mut worst = 0.0_f64;
    let mut all_reached = true;
    for consts in [reference_consts(), alt_consts()] {
        for p0 in [0.1, 1.0, 10.0] {
            let init = ProfileState {
                r: 1e-3,
                p: p0,
                u: 0.0,
                v: 0.0,
                theta: 0.0,
                s: 0.0,
            };
            let traj = integrate(&init, &consts, &IntegratorConfig::default());
            all_reached &= traj.termination() == TerminationKind::ReachedRMax;
            for step in traj.steps() {
                for (a, b) in step.y_right.iter().zip(init.components()) {
                    worst = worst.max((a - b).abs());
                }
            }
            kept.push(Kept {
                family: "stationary",
                consts,
                traj,
            });
        }
    }
    let out = Outcome::new(1, "stationarity", start, secs(1.0));
    let detail = format!(
        "max component change {worst:e} (tol {STATIONARY_TOL:e}), all reached r_max: {all_reached}"
    );
    (
        out.finish(worst <= STATIONARY_TOL && all_reached, detail),
        kept,
    )
}

fn order() -> Outcome {
    let start = Instant::now();
    let lambda = -10.0_f64;
    let hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let exact = lambda.exp();
    let mut pts = Vec::new();
    for h in hs {
        let cfg = IntegratorConfig {
            fixed_step: Some(h),
            r_max: 1.0,
            h_init: h,
            blowup_threshold: 1e300,
            ..Default::default()
        };
        let sys = FnSystem(move |_r: f64, y: &[f64; 1]| [lambda * y[0]]);
        let traj = integrate_system(&sys, 0.0, [1.0], &cfg);
        let err = ((traj.y_end()[0] - exact) / exact).abs();
        pts.push((h.ln(), err.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let out = Outcome::new(2, "integrator order", start, secs(1.0));
    out.finish(
        (slope - ORDER_TARGET).abs() <= ORDER_TOL,
        format!("observed order {slope:.4} on y' = -10 y (target {ORDER_TARGET} +/- {ORDER_TOL})"),
    )
}

fn random_state(rng: &mut StdRng) -> ProfileState {
    loop {
        let s = ProfileState {
            r: rng.gen_range(0.05..10.0),
            p: rng.gen_range(0.0..10.0),
            u: rng.gen_range(-10.0..10.0),
            v: rng.gen_range(-10.0..10.0),
            theta: rng.gen_range(-10.0..10.0),
            s: rng.gen_range(-10.0..10.0),
        };
        // Admissible and away from the continuity singularity.
        if s.transport_speed().abs() > 1e-2 * s.r {
            return s;
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let consts = reference_consts();
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let s = random_state(&mut rng);
        let got = rhs(&s, &consts, DEFAULT_GUARD_EPS).unwrap().components();
        worst = worst.max(rel_diff(&got, &oracle_rhs(&s, &consts)));
    }
    let out = Outcome::new(3, "rhs oracle equivalence", start, secs(1.0));
    out.finish(
        worst <= ORACLE_REL_TOL,
        format!("1000 random states, max relative deviation {worst:e} (tol {ORACLE_REL_TOL:e})"),
    )
}

fn reference_cavitating() -> (PhysConsts, IntegratorConfig, ProfileTrajectory) {
    let consts = reference_consts();
    let cfg = IntegratorConfig::default();
    let init = cavitating_state_with(
        &CavitatingParams {
            delta: 1e-3,
            p_delta: 0.5,
            alpha: 0.1,
            theta0: 1.0,
        },
        VelocityInterpretation::default(),
    )
    .unwrap();
    let traj = integrate(&init, &consts, &cfg);
    (consts, cfg, traj)
}

fn reference_smooth() -> ProfileTrajectory {
    let consts = reference_consts();
    let init = smooth_state(
        &SmoothParams {
            delta: 1e-5,
            p0: 1.0,
            theta0: 1.0,
        },
        &consts,
    )
    .unwrap();
    integrate(&init, &consts, &IntegratorConfig::default())
}

fn residual_consistency() -> (Outcome, Vec<Kept>) {
    let start = Instant::now();
    let (consts, cfg, traj) = reference_cavitating();
    let mut worst = (0.0_f64, 0.0_f64, "");
    let mut samples = 0usize;
    let mut violations = 0usize;
    for step in traj.steps() {
        let right = step.r_right.min(traj.r_end());
        for k in 1..=5 {
            let r = step.r_left + (right - step.r_left) * k as f64 / 6.0;
            let state = traj.dense_eval(r).unwrap();
            let deriv = RhsDerivative::from_components(&traj.eval_derivative(r).unwrap());
            let bound = RESIDUAL_FACTOR * (cfg.rtol * state.norm() + cfg.atol);
            for (name, res) in [
                ("continuity", residual_continuity(&state, &deriv, &consts)),
                ("momentum", residual_momentum(&state, &deriv, &consts)),
                ("temperature", residual_temperature(&state, &deriv, &consts)),
            ] {
                let ratio = res.unwrap().abs() / bound;
                samples += 1;
                if ratio > 1.0 {
                    violations += 1;
                }
                if ratio > worst.0 {
                    worst = (ratio, r, name);
                }
            }
        }
    }
    let out = Outcome::new(4, "residual consistency", start, secs(5.0));
    let detail = format!(
        "{} steps, {violations}/{samples} residual samples above bound; worst residual/bound {:.3e} ({} at r = {:.4e})",
        traj.step_count(),
        worst.0,
        worst.2,
        worst.1
    );
    let kept = vec![Kept {
        family: "reference cavitating",
        consts,
        traj,
    }];
    (out.finish(violations == 0, detail), kept)
}

/// Profile with `P` scaled by `1 + CORRUPTION` away from the launch radius.
struct CorruptedDensity<'a>(&'a ProfileTrajectory);

impl RadialProfile for CorruptedDensity<'_> {
    fn r_start(&self) -> f64 {
        self.0.r_start()
    }
    fn r_end(&self) -> f64 {
        self.0.r_end()
    }
    fn state_at(&self, r: f64) -> shrinkers::Result<ProfileState> {
        let mut s = self.0.dense_eval(r)?;
        if r > self.0.r_start() {
            s.p *= 1.0 + CORRUPTION;
        }
        Ok(s)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
    fn termination(&self) -> Option<TerminationKind> {
        Some(self.0.termination())
    }
}

fn continuity(kept: &[Kept]) -> Outcome {
    let start = Instant::now();
    let dcfg = DiagnosticsConfig::new(4.0);
    let mut families: Vec<(&str, usize, f64)> = Vec::new();
    let mut all_ok = true;
    for k in kept {
        if k.traj.termination().is_failure() {
            continue;
        }
        let err = continuity_oracle(&k.traj, &k.consts, &dcfg)
            .map(|o| o.max_rel_err)
            .unwrap_or(f64::INFINITY);
        all_ok &= err <= CONTINUITY_TOL;
        match families.iter_mut().find(|f| f.0 == k.family) {
            Some(f) => {
                f.1 += 1;
                f.2 = f.2.max(err);
            }
            None => families.push((k.family, 1, err)),
        }
    }

    let consts = reference_consts();
    let smooth = reference_smooth();
    let (_, _, cav) = reference_cavitating();
    let mut detected = true;
    let mut sens = Vec::new();
    for (name, traj) in [("smooth", &smooth), ("cavitating", &cav)] {
        let err = continuity_oracle(&CorruptedDensity(traj), &consts, &dcfg)
            .map(|o| o.max_rel_err)
            .unwrap_or(0.0);
        detected &= err >= CORRUPTION_DETECT;
        sens.push(format!("{name} {err:.3e}"));
    }

    let mut detail = families
        .iter()
        .map(|(f, n, e)| format!("{f} ({n} runs) max {e:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    detail.push_str(&format!(
        " [tol {CONTINUITY_TOL:e}]; 1% corruption detected: {} (>= {CORRUPTION_DETECT:e})",
        sens.join(", ")
    ));
    Outcome::new(5, "continuity quadrature oracle", start, None).finish(all_ok && detected, detail)
}

/// Sampled strict monotonicity over the final half of the span: `+1`
/// increasing, `-1` decreasing, `0` neither.
fn final_half_trend(traj: &ProfileTrajectory, component: usize) -> i8 {
    let (a, b) = (traj.r_start(), traj.r_end());
    let lo = a + 0.5 * (b - a);
    let xs: Vec<f64> = (0..SHAPE_SAMPLES)
        .map(|i| {
            let r = if i + 1 == SHAPE_SAMPLES {
                b
            } else {
                lo + (b - lo) * i as f64 / (SHAPE_SAMPLES - 1) as f64
            };
            traj.eval(r).unwrap()[component]
        })
        .collect();
    if xs.windows(2).all(|w| w[1] > w[0]) {
        1
    } else if xs.windows(2).all(|w| w[1] < w[0]) {
        -1
    } else {
        0
    }
}

const P: usize = 0;
const U: usize = 1;
const THETA: usize = 3;

fn cavitating_reproduction() -> (Outcome, Vec<Kept>) {
    let start = Instant::now();
    let mut kept = Vec::new();
    let mut cells = 0usize;
    let mut not_negative = 0usize;
    let (mut u_bad, mut t_bad, mut p_bad) = (0usize, 0usize, 0usize);
    for delta in [1e-3, 1e-6] {
        let mut spec = SweepSpec::new(Regime::Cavitating);
        spec.delta = delta;
        spec.axes = vec![
            Axis::new(AxisName::P0, 0.1, 1.0, 10),
            Axis::new(AxisName::Theta0, 0.5, 2.0, 3),
            Axis::new(AxisName::Alpha, 0.05, 0.5, 3),
        ];
        // The grid is {0.5, 1, 2} x {0.05, 0.1, 0.5}: not linear, so set cells directly.
        let theta_values = [0.5, 1.0, 2.0];
        let alpha_values = [0.05, 0.1, 0.5];
        for mut cell in spec.cells() {
            cell.theta0 = theta_values[cell.index[1]];
            cell.alpha = alpha_values[cell.index[2]];
            let traj = spec.integrate_cell(&cell, delta).unwrap();
            cells += 1;
            if shrinkers::classify(&traj, spec.dead_band) != Classification::NegativeSign {
                not_negative += 1;
            }
            u_bad += usize::from(final_half_trend(&traj, U) != -1);
            t_bad += usize::from(final_half_trend(&traj, THETA) != -1);
            p_bad += usize::from(final_half_trend(&traj, P) != 1);
            kept.push(Kept {
                family: "cavitating grid",
                consts: spec.consts,
                traj,
            });
        }
    }
    let detail = format!(
        "{cells} cells: {not_negative} not NegativeSign; over the final half, U not strictly decreasing in {u_bad}, Theta not strictly decreasing in {t_bad}, P not strictly increasing in {p_bad}"
    );
    let ok = not_negative == 0 && u_bad == 0 && t_bad == 0 && p_bad == 0;
    let out = Outcome::new(6, "cavitating reproduction", start, secs(120.0));
    (out.finish(ok, detail), kept)
}

fn smooth_reproduction() -> (Outcome, Vec<Kept>) {
    let start = Instant::now();
    let mut kept = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for delta in [1e-5, 1e-8] {
        let mut spec = SweepSpec::new(Regime::Smooth);
        spec.delta = delta;
        spec.axes = vec![
            Axis::new(AxisName::P0, 0.3, 10.0, 8),
            Axis::new(AxisName::Theta0, 0.3, 10.0, 8),
        ];
        let results = shrinkers::run_sweep(&spec).unwrap();
        let positive = results
            .iter()
            .filter(|c| c.classification == Classification::PositiveSign)
            .count();
        let frac = positive as f64 / results.len() as f64;
        let majority = majority_class(&results);
        let anomalies: Vec<_> = results
            .iter()
            .filter(|c| Some(c.classification) != majority)
            .collect();
        let flagged = anomalies.iter().all(|c| c.stability.is_some());
        let (mut shape_bad, mut u_bad, mut t_bad, mut p_bad) = (0, 0, 0, 0);
        for cell in spec.cells() {
            let traj = spec.integrate_cell(&cell, delta).unwrap();
            if shrinkers::classify(&traj, spec.dead_band) == Classification::PositiveSign {
                let u = final_half_trend(&traj, U) == 1;
                let t = final_half_trend(&traj, THETA) == 1;
                let p = final_half_trend(&traj, P) == -1;
                u_bad += usize::from(!u);
                t_bad += usize::from(!t);
                p_bad += usize::from(!p);
                shape_bad += usize::from(!(u && t && p));
            }
            kept.push(Kept {
                family: "smooth grid",
                consts: spec.consts,
                traj,
            });
        }
        ok &= frac >= SMOOTH_POSITIVE_FRACTION && flagged && shape_bad == 0;
        parts.push(format!(
            "delta {delta:e}: PositiveSign {positive}/{} ({:.1}%), anomalies {} all flagged: {flagged}, shape failures {shape_bad} (U {u_bad}, Theta {t_bad}, P {p_bad})",
            results.len(),
            100.0 * frac,
            anomalies.len()
        ));
    }
    let out = Outcome::new(7, "smooth reproduction", start, secs(300.0));
    (out.finish(ok, parts.join("; ")), kept)
}

fn diagnostics_identities() -> Outcome {
    let start = Instant::now();
    let consts = reference_consts();
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let factor = consts.kappa / (consts.c_v * consts.nu());
    let mut worst_ratio = 0.0_f64;
    for n in 0..10 {
        let init = if n % 2 == 0 {
            smooth_state(
                &SmoothParams {
                    delta: 1e-5,
                    p0: rng.gen_range(0.3..10.0),
                    theta0: rng.gen_range(0.3..10.0),
                },
                &consts,
            )
        } else {
            cavitating_state_with(
                &CavitatingParams {
                    delta: 1e-3,
                    p_delta: rng.gen_range(0.1..1.0),
                    alpha: rng.gen_range(0.05..0.5),
                    theta0: rng.gen_range(0.5..2.0),
                },
                VelocityInterpretation::default(),
            )
        }
        .unwrap();
        let traj = integrate(&init, &consts, &IntegratorConfig::default());
        let w = weights(&traj, &consts, 101, 1e-8).unwrap();
        for (z, wv) in w.z.iter().zip(&w.w) {
            let dev = (wv - factor * z).abs() / wv.abs().max(f64::MIN_POSITIVE);
            worst_ratio = worst_ratio.max(dev);
        }
    }

    let mut planar = consts;
    planar.d = 2;
    let mut identity_zero = true;
    for (a, b) in [(0.1, 3.0), (1.0, 20.0), (1e-3, 1.0)] {
        let prof = SyntheticProfile::new(a, b, |r| ProfileState {
            r,
            p: 1.0 + r * r,
            u: (2.0 * r).sin() / (1.0 + r),
            v: 0.0,
            theta: 1.0 + r.cos(),
            s: 0.0,
        });
        let rep = energy_report(&prof, &planar, &DiagnosticsConfig::new(4.0)).unwrap();
        identity_zero &= rep.identity_d == 0.0;
    }

    let single = SyntheticProfile::new(1.0, 1.0, |r| ProfileState {
        r,
        p: 1.0,
        u: 0.0,
        v: 0.0,
        theta: 1.0,
        s: 0.0,
    });
    let q = smallness_functional(&single, &consts, &DiagnosticsConfig::new(4.0)).unwrap();
    let q_rel = (q - SMALLNESS_EXPECTED).abs() / SMALLNESS_EXPECTED;

    let detail = format!(
        "W vs kappa/(C_V nu) Z max relative deviation {worst_ratio:e} (tol {WEIGHT_RATIO_TOL:e}); identity_d exactly 0 for d = 2: {identity_zero}; smallness {q} vs {SMALLNESS_EXPECTED} (relative {q_rel:e}, tol {SMALLNESS_TOL:e})"
    );
    Outcome::new(8, "diagnostics identities", start, None).finish(
        worst_ratio <= WEIGHT_RATIO_TOL && identity_zero && q_rel <= SMALLNESS_TOL,
        detail,
    )
}

fn sweep_files(dir: &Path, threads: usize, set: &[&str]) -> Vec<(String, Vec<u8>)> {
    let args = CommonArgs {
        config: None,
        out: Some(dir.to_path_buf()),
        threads: Some(threads),
        set: set.iter().map(|s| s.to_string()).collect(),
    };
    let mut written = execute(&Command::Sweep(args)).unwrap();
    written.sort();
    written
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read(&p).unwrap())
        })
        .collect()
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let configs: [&[&str]; 2] = [
        &[
            "regime=smooth",
            "axis1=p0 0.3 10 4",
            "axis2=theta0 0.3 10 4",
        ],
        &[
            "regime=cavitating",
            "axis1=p0 0.1 1 3",
            "axis2=theta0 0.5 2 2",
            "axis3=alpha 0.05 0.5 2",
        ],
    ];
    let mut identical = true;
    let mut files = 0;
    for (n, set) in configs.iter().enumerate() {
        let a = sweep_files(&tmp.path().join(format!("{n}-a")), 1, set);
        let b = sweep_files(&tmp.path().join(format!("{n}-b")), 1, set);
        let c = sweep_files(&tmp.path().join(format!("{n}-c")), 4, set);
        identical &= a == b && a == c;
        files += a.len();
    }
    Outcome::new(9, "sweep determinism", start, None).finish(
        identical,
        format!("{files} output files byte-identical across repeated runs and 1 vs 4 threads: {identical}"),
    )
}

fn main() {
    let mut outcomes = Vec::new();
    let (c1, mut kept) = stationary();
    outcomes.push(c1);
    outcomes.push(order());
    outcomes.push(oracle_equivalence());
    let (c4, k4) = residual_consistency();
    outcomes.push(c4);
    kept.extend(k4);
    let (c6, k6) = cavitating_reproduction();
    kept.extend(k6);
    let (c7, k7) = smooth_reproduction();
    kept.extend(k7);
    kept.push(Kept {
        family: "reference smooth",
        consts: reference_consts(),
        traj: reference_smooth(),
    });
    outcomes.push(continuity(&kept));
    outcomes.push(c6);
    outcomes.push(c7);
    outcomes.push(diagnostics_identities());
    outcomes.push(determinism());
    outcomes.sort_by_key(|o| o.id);

    println!();
    for o in &outcomes {
        let budget = o
            .budget
            .map(|b| format!(", budget {:.0} s", b.as_secs_f64()))
            .unwrap_or_default();
        println!(
            "criterion {} {} {}: {} [{:.2} s{budget}]",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.detail,
            o.elapsed.as_secs_f64()
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!(
        "\nacceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
