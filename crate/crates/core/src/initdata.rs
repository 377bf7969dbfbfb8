//! Launch data at `r = δ` for the cavitating and smooth regimes.

use crate::error::{Error, Result};
use crate::model::{PhysConsts, ProfileState};

pub const DEFAULT_CAVITATING_DELTA: f64 = 1e-3;
pub const DEFAULT_SMOOTH_DELTA: f64 = 1e-5;

/// How the cavitating velocity parameter `α` enters the launch state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityInterpretation {
    /// `U(δ) = -α δ`, `U'(δ) = -α`.
    AlphaSlope,
    /// `U(δ) = -α`, `U'(δ) = -α`: the launch velocity itself is held at `-α`.
    #[default]
    FixedVelocity,
}

impl VelocityInterpretation {
    pub fn label(&self) -> &'static str {
        match self {
            VelocityInterpretation::AlphaSlope => "slope",
            VelocityInterpretation::FixedVelocity => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitatingParams {
    pub delta: f64,
    pub p_delta: f64,
    pub alpha: f64,
    pub theta0: f64,
}

impl CavitatingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.p_delta.is_finite() && self.alpha.is_finite())
            || !self.theta0.is_finite()
        {
            return Err(Error::NonFinite {
                what: "cavitating parameters",
            });
        }
        if self.delta <= 0.0 || self.p_delta <= 0.0 {
            return Err(Error::invalid(
                "cavitating launch needs delta > 0 and p_delta > 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothParams {
    pub delta: f64,
    pub p0: f64,
    pub theta0: f64,
}

impl SmoothParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.p0.is_finite() && self.theta0.is_finite()) {
            return Err(Error::NonFinite {
                what: "smooth parameters",
            });
        }
        if self.delta <= 0.0 || self.p0 <= 0.0 || self.theta0 <= 0.0 {
            return Err(Error::invalid(
                "smooth launch needs delta, p0 and theta0 > 0",
            ));
        }
        Ok(())
    }
}

/// Cavitating launch `(δ, P_δ, -αδ, -α, Θ₀, 0)`.
pub fn cavitating_state(params: &CavitatingParams) -> Result<ProfileState> {
    cavitating_state_with(params, VelocityInterpretation::AlphaSlope)
}

pub fn cavitating_state_with(
    params: &CavitatingParams,
    velocity: VelocityInterpretation,
) -> Result<ProfileState> {
    params.validate()?;
    let u = match velocity {
        VelocityInterpretation::AlphaSlope => -params.alpha * params.delta,
        VelocityInterpretation::FixedVelocity => -params.alpha,
    };
    Ok(ProfileState {
        r: params.delta,
        p: params.p_delta,
        u,
        v: -params.alpha,
        theta: params.theta0,
        s: 0.0,
    })
}

/// Leading coefficients `(A, B)` of `U ≈ A r³`, `Θ ≈ Θ₀ + B r²` near the origin.
pub fn smooth_coefficients(p0: f64, theta0: f64, consts: &PhysConsts) -> (f64, f64) {
    let rpt = consts.r_gas * p0 * theta0;
    let a =
        consts.r_gas * p0 * p0 * theta0 * consts.c_v / (30.0 * consts.kappa * (consts.nu() + rpt));
    let b = consts.c_v * p0 * theta0 / (6.0 * consts.kappa);
    (a, b)
}

/// Smooth launch: the expansions and their derivatives evaluated at `δ`.
pub fn smooth_state(params: &SmoothParams, consts: &PhysConsts) -> Result<ProfileState> {
    params.validate()?;
    let (a, b) = smooth_coefficients(params.p0, params.theta0, consts);
    let d = params.delta;
    Ok(ProfileState {
        r: d,
        p: params.p0,
        u: a * d * d * d,
        v: 3.0 * a * d * d,
        theta: params.theta0 + b * d * d,
        s: 2.0 * b * d,
    })
}
