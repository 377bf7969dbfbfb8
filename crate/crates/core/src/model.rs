//! Radial profile equations for backward self-similar solutions.
//!
//! The profiles `P(r)`, `U(r)`, `Θ(r)` solve a coupled system that is first
//! order in `P` and second order in `U` and `Θ`. The solver works with the
//! first-order state `(P, U, U', Θ, Θ')` and the explicit right-hand side
//! obtained by solving the continuity equation for `P'` and substituting it
//! into the momentum and temperature equations.
//!
//! The residual evaluators return the raw left-minus-right value of each
//! scalar equation for an arbitrary (state, derivative) pair, so that any
//! candidate profile (dense output, tabulated data) can be checked against
//! the equations without going through [`rhs`].

use crate::error::{Error, Result};
use crate::integrator::{OdeSystem, RhsFault};

/// Default singularity guard, relative to `r`.
pub const DEFAULT_GUARD_EPS: f64 = 1e-10;

/// Constitutive constants and spatial dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConsts {
    /// Heat constant `C_V`.
    pub c_v: f64,
    /// Ideal gas constant `R`.
    pub r_gas: f64,
    /// Thermal conductivity.
    pub kappa: f64,
    /// Shear viscosity.
    pub mu: f64,
    /// Second Lamé coefficient.
    pub lambda: f64,
    /// Spatial dimension.
    pub d: u32,
}

impl PhysConsts {
    pub fn new(c_v: f64, r_gas: f64, kappa: f64, mu: f64, lambda: f64, d: u32) -> Result<Self> {
        let consts = Self {
            c_v,
            r_gas,
            kappa,
            mu,
            lambda,
            d,
        };
        consts.validate()?;
        Ok(consts)
    }

    /// Reference constant set:
    /// `C_V = R = κ = λ = 1`, `μ = 2`, `d = 3`.
    pub fn reference() -> Self {
        Self {
            c_v: 1.0,
            r_gas: 1.0,
            kappa: 1.0,
            mu: 2.0,
            lambda: 1.0,
            d: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.c_v, self.r_gas, self.kappa, self.mu, self.lambda];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "physical constants",
            });
        }
        if self.c_v <= 0.0 || self.r_gas <= 0.0 || self.kappa <= 0.0 {
            return Err(Error::invalid("c_v, r_gas and kappa must be positive"));
        }
        if self.mu <= 0.0 {
            return Err(Error::invalid("mu must be positive"));
        }
        if self.d == 0 {
            return Err(Error::invalid("dimension d must be at least 1"));
        }
        if 2.0 * self.mu + f64::from(self.d) * self.lambda < 0.0 {
            return Err(Error::invalid(
                "Lamé condition 2·mu + d·lambda >= 0 violated",
            ));
        }
        Ok(())
    }

    /// Longitudinal viscosity `2μ + λ`.
    pub fn nu(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// `d - 1` as a float, the coefficient of every curvature term.
    pub fn curvature(&self) -> f64 {
        f64::from(self.d) - 1.0
    }
}

impl Default for PhysConsts {
    fn default() -> Self {
        Self::reference()
    }
}

/// First-order profile state at radius `r`.
///
/// `p` and `theta` are physically nonnegative, but nothing here enforces it:
/// trajectories with `Θ → -∞` are legitimate outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub r: f64,
    /// Density `P`.
    pub p: f64,
    /// Velocity `U`.
    pub u: f64,
    /// `U'`.
    pub v: f64,
    /// Temperature `Θ`.
    pub theta: f64,
    /// `Θ'`.
    pub s: f64,
}

impl ProfileState {
    pub fn from_components(r: f64, y: &[f64; 5]) -> Self {
        Self {
            r,
            p: y[0],
            u: y[1],
            v: y[2],
            theta: y[3],
            s: y[4],
        }
    }

    /// Components in solver order `(P, U, U', Θ, Θ')`.
    pub fn components(&self) -> [f64; 5] {
        [self.p, self.u, self.v, self.theta, self.s]
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.components().iter().all(|x| x.is_finite())
    }

    /// Max-norm of the five components.
    pub fn norm(&self) -> f64 {
        self.components()
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// `r/2 + U`, the characteristic speed of the continuity equation.
    pub fn transport_speed(&self) -> f64 {
        0.5 * self.r + self.u
    }

    /// Radial divergence `U' + (d-1) U / r`.
    pub fn divergence(&self, consts: &PhysConsts) -> f64 {
        self.v + consts.curvature() * self.u / self.r
    }
}

/// Derivatives of the [`ProfileState`] components with respect to `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsDerivative {
    pub dp: f64,
    pub du: f64,
    pub dv: f64,
    pub dtheta: f64,
    pub ds: f64,
}

impl RhsDerivative {
    pub fn from_components(y: &[f64; 5]) -> Self {
        Self {
            dp: y[0],
            du: y[1],
            dv: y[2],
            dtheta: y[3],
            ds: y[4],
        }
    }

    pub fn components(&self) -> [f64; 5] {
        [self.dp, self.du, self.dv, self.dtheta, self.ds]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|x| x.is_finite())
    }

    pub fn zero() -> Self {
        Self::from_components(&[0.0; 5])
    }
}

fn check_inputs(state: &ProfileState) -> Result<()> {
    if !state.is_finite() {
        return Err(Error::NonFinite {
            what: "profile state",
        });
    }
    if state.r <= 0.0 {
        return Err(Error::invalid(format!(
            "radius must be positive, got {}",
            state.r
        )));
    }
    Ok(())
}

/// Explicit first-order right-hand side of the profile system.
///
/// Fails with [`Error::Singularity`] when `|r/2 + U| <= guard_eps · r`, where
/// the continuity equation can no longer be solved for `P'`.
pub fn rhs(state: &ProfileState, consts: &PhysConsts, guard_eps: f64) -> Result<RhsDerivative> {
    check_inputs(state)?;
    let ProfileState {
        r,
        p,
        u,
        v,
        theta,
        s,
    } = *state;
    let c = state.transport_speed();
    if c.abs() <= guard_eps * r {
        return Err(Error::Singularity { r, gap: c.abs() });
    }
    let k = consts.curvature();
    let div = state.divergence(consts);

    let dp = -p * div / c;
    let dv = (0.5 * p * u + p * c * v + consts.r_gas * (dp * theta + p * s)) / consts.nu()
        - k * v / r
        + k * u / (r * r);
    let dissipation = 2.0 * consts.mu * (v * v + k * u * u / (r * r)) + consts.lambda * div * div;
    let ds = (consts.c_v * p * theta + consts.c_v * p * c * s + consts.r_gas * p * theta * div
        - dissipation)
        / consts.kappa
        - k * s / r;

    let out = RhsDerivative {
        dp,
        du: v,
        dv,
        dtheta: s,
        ds,
    };
    if !out.is_finite() {
        return Err(Error::NonFinite {
            what: "right-hand side",
        });
    }
    Ok(out)
}

fn finite_residual(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what: "residual" })
    }
}

fn check_residual_inputs(state: &ProfileState, deriv: &RhsDerivative) -> Result<()> {
    check_inputs(state)?;
    if !deriv.is_finite() {
        return Err(Error::NonFinite { what: "derivative" });
    }
    Ok(())
}

/// `½ r P' + P' U + P (U' + (d-1) U / r)`.
pub fn residual_continuity(
    state: &ProfileState,
    deriv: &RhsDerivative,
    consts: &PhysConsts,
) -> Result<f64> {
    check_residual_inputs(state, deriv)?;
    let value = 0.5 * state.r * deriv.dp + deriv.dp * state.u + state.p * state.divergence(consts);
    finite_residual(value)
}

/// Reduced momentum equation:
/// `½PU + P(r/2 + U)U' + (PRΘ)' - (2μ+λ)(U'' + (d-1)U'/r - (d-1)U/r²)`.
pub fn residual_momentum(
    state: &ProfileState,
    deriv: &RhsDerivative,
    consts: &PhysConsts,
) -> Result<f64> {
    check_residual_inputs(state, deriv)?;
    let ProfileState {
        r,
        p,
        u,
        v,
        theta,
        s,
    } = *state;
    let k = consts.curvature();
    let pressure_gradient = consts.r_gas * (deriv.dp * theta + p * s);
    let viscous = consts.nu() * (deriv.dv + k * v / r - k * u / (r * r));
    let value = 0.5 * p * u + p * state.transport_speed() * v + pressure_gradient - viscous;
    finite_residual(value)
}

/// Reduced temperature equation, left side minus viscous dissipation:
/// `C_V PΘ + ½C_V rPΘ' + C_V PUΘ' + PRΘ div U - κ(Θ'' + (d-1)Θ'/r)
///  - 2μ(U'² + (d-1)U²/r²) - λ(div U)²`.
pub fn residual_temperature(
    state: &ProfileState,
    deriv: &RhsDerivative,
    consts: &PhysConsts,
) -> Result<f64> {
    check_residual_inputs(state, deriv)?;
    let ProfileState {
        r,
        p,
        u,
        v,
        theta,
        s,
    } = *state;
    let k = consts.curvature();
    let div = state.divergence(consts);
    let lhs = consts.c_v * p * theta
        + 0.5 * consts.c_v * r * p * s
        + consts.c_v * p * u * s
        + p * consts.r_gas * theta * div
        - consts.kappa * (deriv.ds + k * s / r);
    let rhs = 2.0 * consts.mu * (v * v + k * u * u / (r * r)) + consts.lambda * div * div;
    finite_residual(lhs - rhs)
}

/// The profile system as a five-dimensional [`OdeSystem`].
#[derive(Debug, Clone, Copy)]
pub struct ProfileSystem {
    pub consts: PhysConsts,
    pub guard_eps: f64,
}

impl ProfileSystem {
    pub fn new(consts: PhysConsts) -> Self {
        Self {
            consts,
            guard_eps: DEFAULT_GUARD_EPS,
        }
    }

    pub fn with_guard(consts: PhysConsts, guard_eps: f64) -> Self {
        Self { consts, guard_eps }
    }
}

impl OdeSystem<5> for ProfileSystem {
    fn eval(&self, r: f64, y: &[f64; 5]) -> std::result::Result<[f64; 5], RhsFault> {
        let state = ProfileState::from_components(r, y);
        match rhs(&state, &self.consts, self.guard_eps) {
            Ok(d) => Ok(d.components()),
            Err(Error::Singularity { .. }) => Err(RhsFault::Singular),
            Err(_) => Err(RhsFault::NonFinite),
        }
    }

    /// `P` and `Θ`.
    fn sign_watch(&self) -> &'static [usize] {
        &[0, 3]
    }
}
