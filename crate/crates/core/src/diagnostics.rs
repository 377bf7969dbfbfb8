//! Integral and asymptotic diagnostics evaluated along a radial profile.
//!
//! Everything here works on any [`RadialProfile`]: integrated trajectories
//! as well as closed-form synthetic profiles used for testing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrator::{ProfileTrajectory, TerminationKind};
use crate::model::{PhysConsts, ProfileState};
use crate::quadrature::{integrate_pieces, QuadOptions};

/// Number of checkpoints used by [`continuity_oracle`].
pub const ORACLE_CHECKPOINTS: usize = 50;
/// Samples per dense-output piece when taking suprema.
const SUP_SAMPLES_PER_PIECE: usize = 8;
/// Samples over the tail window in [`tail_fit`].
const TAIL_SAMPLES: usize = 64;

/// A radial profile that can be evaluated anywhere on `[r_start, r_end]`.
pub trait RadialProfile {
    fn r_start(&self) -> f64;
    fn r_end(&self) -> f64;
    fn state_at(&self, r: f64) -> Result<ProfileState>;
    /// Radii where the profile may be non-smooth, including both ends.
    fn breakpoints(&self) -> Vec<f64>;
    /// How the underlying integration ended, if there was one.
    fn termination(&self) -> Option<TerminationKind> {
        None
    }
}

impl RadialProfile for ProfileTrajectory {
    fn r_start(&self) -> f64 {
        ProfileTrajectory::r_start(self)
    }

    fn r_end(&self) -> f64 {
        ProfileTrajectory::r_end(self)
    }

    fn state_at(&self, r: f64) -> Result<ProfileState> {
        self.dense_eval(r)
    }

    fn breakpoints(&self) -> Vec<f64> {
        ProfileTrajectory::breakpoints(self)
    }

    fn termination(&self) -> Option<TerminationKind> {
        Some(ProfileTrajectory::termination(self))
    }
}

/// Profile given by a closure, split into `pieces` equal panels.
pub struct SyntheticProfile<F> {
    pub r_start: f64,
    pub r_end: f64,
    pub pieces: usize,
    pub f: F,
}

impl<F: Fn(f64) -> ProfileState> SyntheticProfile<F> {
    pub fn new(r_start: f64, r_end: f64, f: F) -> Self {
        Self {
            r_start,
            r_end,
            pieces: 16,
            f,
        }
    }
}

impl<F: Fn(f64) -> ProfileState> RadialProfile for SyntheticProfile<F> {
    fn r_start(&self) -> f64 {
        self.r_start
    }

    fn r_end(&self) -> f64 {
        self.r_end
    }

    fn state_at(&self, r: f64) -> Result<ProfileState> {
        if !(r >= self.r_start && r <= self.r_end) {
            return Err(Error::OutOfRange {
                r,
                lo: self.r_start,
                hi: self.r_end,
            });
        }
        Ok((self.f)(r))
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.r_end <= self.r_start {
            return vec![self.r_start];
        }
        let n = self.pieces.max(1);
        (0..=n)
            .map(|i| {
                if i == n {
                    self.r_end
                } else {
                    self.r_start + (self.r_end - self.r_start) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub gamma: f64,
    pub quad_rtol: f64,
    pub tail_window: f64,
    /// Floor for the denominator of the continuity-oracle relative error.
    pub oracle_floor: f64,
    /// Extra γ values for the smallness curve.
    pub gamma_grid: Vec<f64>,
}

impl DiagnosticsConfig {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            quad_rtol: 1e-8,
            tail_window: 0.2,
            oracle_floor: 1e-10,
            gamma_grid: Vec::new(),
        }
    }

    pub fn validate(&self, consts: &PhysConsts) -> Result<()> {
        let d = f64::from(consts.d);
        if !(self.gamma > d) || !self.gamma.is_finite() {
            return Err(Error::invalid(format!(
                "gamma must exceed the dimension {d}, got {}",
                self.gamma
            )));
        }
        if let Some(g) = self
            .gamma_grid
            .iter()
            .find(|g| !(**g > d) || !g.is_finite())
        {
            return Err(Error::invalid(format!(
                "gamma grid value {g} does not exceed {d}"
            )));
        }
        if !(self.tail_window > 0.0 && self.tail_window < 1.0) {
            return Err(Error::invalid("tail_window must lie in (0, 1)"));
        }
        if !(self.quad_rtol > 0.0 && self.quad_rtol < 1.0) {
            return Err(Error::invalid("quad_rtol must lie in (0, 1)"));
        }
        if !(self.oracle_floor > 0.0) {
            return Err(Error::invalid("oracle_floor must be positive"));
        }
        Ok(())
    }

    fn quad(&self) -> QuadOptions {
        QuadOptions::with_rtol(self.quad_rtol)
    }
}

/// Surface measure of the unit sphere in `R^d`.
pub fn sphere_area(d: u32) -> f64 {
    let half = f64::from(d) / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(d)
}

/// `Γ(d/2)` for a positive integer `d`.
fn gamma_half_integer(d: u32) -> f64 {
    let (mut x, mut g) = if d % 2 == 0 {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = f64::from(d) / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Breakpoints of `profile` clipped to `[a, b]`, both ends included.
fn breaks_within(all: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![a];
    out.extend(all.iter().copied().filter(|&x| x > a && x < b));
    out.push(b);
    out
}

fn integral_over(
    profile: &impl RadialProfile,
    breaks: &[f64],
    a: f64,
    b: f64,
    opts: &QuadOptions,
    g: impl Fn(&ProfileState) -> f64,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let pieces = breaks_within(breaks, a, b);
    let f = |r: f64| profile.state_at(r).map(|s| g(&s)).unwrap_or(f64::NAN);
    integrate_pieces(f, &pieces, opts).map(|q| q.value)
}

/// Z and W sampled at uniform radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub radii: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    /// Contribution of `[0, δ]` to `∫ P (r/2 + U)`, taken from the linear
    /// launch ansatz `U(r) = U(δ) r / δ`, `P(r) = P(δ)`.
    pub head: f64,
}

/// `Z(r) = C_V/κ ∫₀ʳ P (r₁/2 + U) dr₁` and `W(r)` with `1/ν` in place of `C_V/κ`.
pub fn weights(
    profile: &impl RadialProfile,
    consts: &PhysConsts,
    samples: usize,
    quad_rtol: f64,
) -> Result<Weights> {
    if samples == 0 {
        return Err(Error::invalid("weights need at least one sample"));
    }
    let (a, b) = (profile.r_start(), profile.r_end());
    let launch = profile.state_at(a)?;
    let head = launch.p * a * (a / 2.0 + launch.u) / 2.0;
    let radii = uniform(a, b, samples);
    let breaks = profile.breakpoints();
    let opts = QuadOptions::with_rtol(quad_rtol);

    let zf = consts.c_v / consts.kappa;
    let wf = 1.0 / consts.nu();
    let mut acc = head;
    let mut prev = a;
    let mut z = Vec::with_capacity(samples);
    let mut w = Vec::with_capacity(samples);
    for &r in &radii {
        acc += integral_over(profile, &breaks, prev, r, &opts, |s| {
            s.p * s.transport_speed()
        })?;
        prev = r;
        z.push(zf * acc);
        w.push(wf * acc);
    }
    Ok(Weights { radii, z, w, head })
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Sampled suprema entering the smallness functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessSup {
    /// `sup [P Θ / min(ν, κ) + P r |U| / max(ν, κ)]`.
    pub combined: f64,
    pub theta_term: f64,
    pub u_term: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl SmallnessSup {
    /// Value of the functional at `gamma`.
    pub fn value(&self, gamma: f64, consts: &PhysConsts) -> f64 {
        self.combined * smallness_factor(gamma, consts)
    }
}

/// `(γ + ν/κ)^{ln γ}`.
pub fn smallness_factor(gamma: f64, consts: &PhysConsts) -> f64 {
    (gamma + consts.nu() / consts.kappa).powf(gamma.ln())
}

/// Radii at which suprema are sampled: every breakpoint plus interior points.
fn sup_radii(profile: &impl RadialProfile) -> Vec<f64> {
    let breaks = profile.breakpoints();
    let mut out = Vec::with_capacity(breaks.len() * SUP_SAMPLES_PER_PIECE + 1);
    out.push(breaks[0]);
    for w in breaks.windows(2) {
        for k in 1..SUP_SAMPLES_PER_PIECE {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / SUP_SAMPLES_PER_PIECE as f64);
        }
        out.push(w[1]);
    }
    out
}

pub fn smallness_sup(profile: &impl RadialProfile, consts: &PhysConsts) -> Result<SmallnessSup> {
    let lo = consts.nu().min(consts.kappa);
    let hi = consts.nu().max(consts.kappa);
    let mut sup = SmallnessSup {
        combined: 0.0,
        theta_term: 0.0,
        u_term: 0.0,
        r_lo: profile.r_start(),
        r_hi: profile.r_end(),
    };
    for r in sup_radii(profile) {
        let s = profile.state_at(r)?;
        let t = s.p * s.theta / lo;
        let u = s.p * s.r * s.u.abs() / hi;
        if !(t.is_finite() && u.is_finite()) {
            return Err(Error::NonFinite {
                what: "smallness functional",
            });
        }
        sup.theta_term = sup.theta_term.max(t);
        sup.u_term = sup.u_term.max(u);
        sup.combined = sup.combined.max(t + u);
    }
    Ok(sup)
}

/// Smallness functional at `cfg.gamma` over the computed range.
pub fn smallness_functional(
    profile: &impl RadialProfile,
    consts: &PhysConsts,
    cfg: &DiagnosticsConfig,
) -> Result<f64> {
    cfg.validate(consts)?;
    Ok(smallness_sup(profile, consts)?.value(cfg.gamma, consts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyQuantity {
    AbsTheta,
    PTheta,
    PThetaU,
    PU2,
    H1,
    ScaledCubic,
}

impl EnergyQuantity {
    pub const ALL: [EnergyQuantity; 6] = [
        EnergyQuantity::AbsTheta,
        EnergyQuantity::PTheta,
        EnergyQuantity::PThetaU,
        EnergyQuantity::PU2,
        EnergyQuantity::H1,
        EnergyQuantity::ScaledCubic,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            EnergyQuantity::AbsTheta => "|Theta|",
            EnergyQuantity::PTheta => "P|Theta|",
            EnergyQuantity::PThetaU => "P|Theta U|",
            EnergyQuantity::PU2 => "P U^2",
            EnergyQuantity::H1 => "U^2 + U'^2 + (d-1)U^2/r^2",
            EnergyQuantity::ScaledCubic => "(1/R) P|U|^3",
        }
    }

    fn density(&self, s: &ProfileState, d: u32) -> f64 {
        match self {
            EnergyQuantity::AbsTheta => s.theta.abs(),
            EnergyQuantity::PTheta => s.p * s.theta.abs(),
            EnergyQuantity::PThetaU => s.p * (s.theta * s.u).abs(),
            EnergyQuantity::PU2 => s.p * s.u * s.u,
            EnergyQuantity::H1 => {
                s.u * s.u + s.v * s.v + f64::from(d - 1) * s.u * s.u / (s.r * s.r)
            }
            EnergyQuantity::ScaledCubic => s.p * s.u.abs().powi(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyIntegral {
    pub quantity: EnergyQuantity,
    pub value: f64,
    /// `None` when the span is too short for two dyadic chunks above `δ`.
    pub divergent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub integrals: Vec<EnergyIntegral>,
    /// `(1 - d/2) ∫ P (C_V Θ + U²/2) ω_d r^{d-1} dr`.
    pub identity_d: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl EnergyReport {
    pub fn get(&self, q: EnergyQuantity) -> &EnergyIntegral {
        self.integrals
            .iter()
            .find(|e| e.quantity == q)
            .expect("every quantity is reported")
    }
}

/// Energy integrals on `[δ, R]` with measure `ω_d r^{d-1} dr`.
///
/// The divergence flag compares the last dyadic chunk `[R/2, R]` with
/// `[R/4, R/2]`; for the scaled cubic term it compares the scaled integral
/// up to `R` with the one up to `R/2`.
pub fn energy_report(
    profile: &impl RadialProfile,
    consts: &PhysConsts,
    cfg: &DiagnosticsConfig,
) -> Result<EnergyReport> {
    let d = consts.d;
    let omega = sphere_area(d);
    let (a, b) = (profile.r_start(), profile.r_end());
    let breaks = profile.breakpoints();
    let opts = cfg.quad();
    let measure = move |s: &ProfileState| omega * s.r.powi(d as i32 - 1);
    let dyadic = b / 4.0 >= a && b > a;

    let mut integrals = Vec::with_capacity(EnergyQuantity::ALL.len());
    for q in EnergyQuantity::ALL {
        let g = |s: &ProfileState| q.density(s, d) * measure(s);
        let (value, divergent) = if dyadic {
            let head = integral_over(profile, &breaks, a, b / 4.0, &opts, g)?;
            let c1 = integral_over(profile, &breaks, b / 4.0, b / 2.0, &opts, g)?;
            let c2 = integral_over(profile, &breaks, b / 2.0, b, &opts, g)?;
            let total = head + c1 + c2;
            if q == EnergyQuantity::ScaledCubic {
                let at_half = (head + c1) / (b / 2.0);
                let at_end = total / b;
                (at_end, Some(at_end > 0.0 && at_end >= at_half))
            } else {
                (total, Some(c2 > 0.0 && c2 >= c1))
            }
        } else {
            let total = integral_over(profile, &breaks, a, b, &opts, g)?;
            if q == EnergyQuantity::ScaledCubic {
                (total / b, None)
            } else {
                (total, None)
            }
        };
        integrals.push(EnergyIntegral {
            quantity: q,
            value,
            divergent,
        });
    }

    let factor = 1.0 - f64::from(d) / 2.0;
    let identity_d = if factor == 0.0 {
        0.0
    } else {
        factor
            * integral_over(profile, &breaks, a, b, &opts, |s| {
                s.p * (consts.c_v * s.theta + 0.5 * s.u * s.u) * measure(s)
            })?
    };
    Ok(EnergyReport {
        integrals,
        identity_d,
        r_lo: a,
        r_hi: b,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub max_rel_err: f64,
    /// Worst checkpoint radius.
    pub worst_r: f64,
    pub checkpoints: Vec<f64>,
}

/// Compare `P` with `P(δ) exp(-∫ (U' + (d-1)U/s) / (s/2 + U) ds)`.
pub fn continuity_oracle(
    profile: &impl RadialProfile,
    consts: &PhysConsts,
    cfg: &DiagnosticsConfig,
) -> Result<OracleResult> {
    if matches!(
        profile.termination(),
        Some(TerminationKind::SingularityEvent(_))
    ) {
        return Err(Error::invalid(
            "continuity oracle is undefined on a trajectory that hit the r/2 + U = 0 singularity",
        ));
    }
    let (a, b) = (profile.r_start(), profile.r_end());
    let p0 = profile.state_at(a)?.p;
    let breaks = profile.breakpoints();
    let opts = cfg.quad();
    let checkpoints: Vec<f64> = if b > a {
        (1..=ORACLE_CHECKPOINTS)
            .map(|k| {
                if k == ORACLE_CHECKPOINTS {
                    b
                } else {
                    a + (b - a) * k as f64 / ORACLE_CHECKPOINTS as f64
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut acc = 0.0;
    let mut prev = a;
    let mut worst = (0.0_f64, a);
    for &r in &checkpoints {
        acc += integral_over(profile, &breaks, prev, r, &opts, |s| {
            s.divergence(consts) / s.transport_speed()
        })?;
        prev = r;
        let oracle = p0 * (-acc).exp();
        let num = profile.state_at(r)?.p;
        let err = (num - oracle).abs() / oracle.abs().max(cfg.oracle_floor);
        if !err.is_finite() {
            return Err(Error::NonFinite {
                what: "continuity oracle",
            });
        }
        if err > worst.0 {
            worst = (err, r);
        }
    }
    Ok(OracleResult {
        max_rel_err: worst.0,
        worst_r: worst.1,
        checkpoints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailValue {
    pub mean: f64,
    /// `(max - min) / |mean|`, or `max - min` when the mean is zero.
    pub drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailFit {
    /// The trajectory ended in an event, so there is no tail to fit.
    NotApplicable(TerminationKind),
    Fit {
        p_inf: TailValue,
        u_inf: TailValue,
        theta_inf: TailValue,
        r_lo: f64,
        r_hi: f64,
    },
}

fn tail_value(xs: &[f64]) -> TailValue {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let spread = hi - lo;
    TailValue {
        mean,
        drift: if mean == 0.0 {
            spread
        } else {
            spread / mean.abs()
        },
    }
}

/// Mean and drift of `P`, `rU` and `r²Θ` over the last `tail_window` of the span.
pub fn tail_fit(profile: &impl RadialProfile, cfg: &DiagnosticsConfig) -> Result<TailFit> {
    if let Some(t) = profile
        .termination()
        .filter(|t| *t != TerminationKind::ReachedRMax)
    {
        return Ok(TailFit::NotApplicable(t));
    }
    let (a, b) = (profile.r_start(), profile.r_end());
    let lo = b - cfg.tail_window * (b - a);
    let mut ps = Vec::with_capacity(TAIL_SAMPLES);
    let mut us = Vec::with_capacity(TAIL_SAMPLES);
    let mut ts = Vec::with_capacity(TAIL_SAMPLES);
    for r in uniform(lo, b, TAIL_SAMPLES) {
        let s = profile.state_at(r)?;
        ps.push(s.p);
        us.push(r * s.u);
        ts.push(r * r * s.theta);
    }
    Ok(TailFit::Fit {
        p_inf: tail_value(&ps),
        u_inf: tail_value(&us),
        theta_inf: tail_value(&ts),
        r_lo: lo,
        r_hi: b,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub r_lo: f64,
    pub r_hi: f64,
    pub weights: Weights,
    pub smallness: SmallnessSup,
    pub smallness_q: f64,
    /// `(γ, value)` over `gamma` followed by the configured grid.
    pub smallness_curve: Vec<(f64, f64)>,
    pub energy: EnergyReport,
    pub tail: TailFit,
    /// `None` when the trajectory ended at the continuity singularity.
    pub p_oracle_max_relerr: Option<f64>,
}

/// Run every diagnostic on `profile`.
pub fn diagnose(
    profile: &impl RadialProfile,
    consts: &PhysConsts,
    cfg: &DiagnosticsConfig,
    samples: usize,
) -> Result<DiagnosticsReport> {
    cfg.validate(consts)?;
    let weights = weights(profile, consts, samples, cfg.quad_rtol)?;
    let smallness = smallness_sup(profile, consts)?;
    let smallness_curve = std::iter::once(cfg.gamma)
        .chain(cfg.gamma_grid.iter().copied())
        .map(|g| (g, smallness.value(g, consts)))
        .collect();
    let p_oracle_max_relerr = match continuity_oracle(profile, consts, cfg) {
        Ok(o) => Some(o.max_rel_err),
        Err(Error::InvalidParameter(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(DiagnosticsReport {
        r_lo: profile.r_start(),
        r_hi: profile.r_end(),
        weights,
        smallness_q: smallness.value(cfg.gamma, consts),
        smallness,
        smallness_curve,
        energy: energy_report(profile, consts, cfg)?,
        tail: tail_fit(profile, cfg)?,
        p_oracle_max_relerr,
    })
}
