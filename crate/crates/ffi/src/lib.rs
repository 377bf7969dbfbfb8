//! C ABI over the `shrinkers` crate.
//!
//! Every function returns an [`NspStatus`]; outputs go through pointers.
//! On failure the message is kept per thread and read back with
//! [`nsp_last_error_message`]. Trajectories are opaque handles owned by the
//! caller and released with [`nsp_trajectory_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use shrinkers::initdata::{cavitating_state_with, smooth_state, CavitatingParams, SmoothParams};
use shrinkers::integrator::integrate_with_guard;
use shrinkers::model::{rhs, PhysConsts, ProfileState};
use shrinkers::{
    classify, Classification, Error, IntegratorConfig, ProfileTrajectory, TerminationKind,
    VelocityInterpretation,
};

/// Result code of every call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Singularity = 3,
    NonFinite = 4,
    OutOfRange = 5,
    QuadratureFailure = 6,
    Config = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NspConsts {
    pub c_v: f64,
    pub r_gas: f64,
    pub kappa: f64,
    pub mu: f64,
    pub lambda: f64,
    pub d: u32,
}

/// `(r, P, U, U', Θ, Θ')`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NspState {
    pub r: f64,
    pub p: f64,
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    pub s: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NspDerivative {
    pub dp: f64,
    pub du: f64,
    pub dv: f64,
    pub dtheta: f64,
    pub ds: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NspIntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub r_max: f64,
    pub blowup_threshold: f64,
    pub max_steps: u64,
    /// Half-width of the excluded band around `r/2 + U = 0`, relative to `r`.
    pub guard_eps: f64,
}

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NspVelocity {
    /// `U(δ) = -α`.
    Fixed = 0,
    /// `U(δ) = -α δ`.
    Slope = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NspCavitatingParams {
    pub delta: f64,
    pub p_delta: f64,
    pub alpha: f64,
    pub theta0: f64,
    pub velocity: NspVelocity,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NspSmoothParams {
    pub delta: f64,
    pub p0: f64,
    pub theta0: f64,
}

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NspTermination {
    ReachedRMax = 0,
    Blowup = 1,
    Singularity = 2,
    StepUnderflow = 3,
    StepBudget = 4,
    NonFinite = 5,
}

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NspClassification {
    Negative = 0,
    Positive = 1,
    SolverError = 2,
    Indeterminate = 3,
}

/// Opaque integrated profile.
pub struct NspTrajectory(ProfileTrajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NspStatus {
    match e {
        Error::Singularity { .. } => NspStatus::Singularity,
        Error::NonFinite { .. } => NspStatus::NonFinite,
        Error::OutOfRange { .. } => NspStatus::OutOfRange,
        Error::QuadratureFailure { .. } => NspStatus::QuadratureFailure,
        Error::InvalidParameter(_) => NspStatus::InvalidParameter,
        Error::Config(_) => NspStatus::Config,
        Error::Io { .. } => NspStatus::Io,
    }
}

struct Fail(NspStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(NspStatus::NullPointer, format!("null pointer: {what}"))
}

/// Run `f`, translating errors and panics into status codes.
fn guarded(f: impl FnOnce() -> Result<(), Fail> + UnwindSafe) -> NspStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NspStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            NspStatus::Panic
        }
    }
}

unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, what: &str, value: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn to_consts(c: &NspConsts) -> Result<PhysConsts, Fail> {
    Ok(PhysConsts::new(
        c.c_v, c.r_gas, c.kappa, c.mu, c.lambda, c.d,
    )?)
}

fn to_state(s: &NspState) -> ProfileState {
    ProfileState {
        r: s.r,
        p: s.p,
        u: s.u,
        v: s.v,
        theta: s.theta,
        s: s.s,
    }
}

fn from_state(s: &ProfileState) -> NspState {
    NspState {
        r: s.r,
        p: s.p,
        u: s.u,
        v: s.v,
        theta: s.theta,
        s: s.s,
    }
}

fn to_integrator(c: &NspIntegratorConfig) -> Result<(IntegratorConfig, f64), Fail> {
    let cfg = IntegratorConfig {
        rtol: c.rtol,
        atol: c.atol,
        h_init: c.h_init,
        h_min: c.h_min,
        h_max: c.h_max,
        r_max: c.r_max,
        blowup_threshold: c.blowup_threshold,
        max_steps: usize::try_from(c.max_steps)
            .map_err(|_| Fail(NspStatus::InvalidParameter, "max_steps too large".into()))?,
        fixed_step: None,
    };
    cfg.validate()?;
    if !(c.guard_eps.is_finite() && c.guard_eps >= 0.0) {
        return Err(Fail(
            NspStatus::InvalidParameter,
            "guard_eps must be finite and >= 0".into(),
        ));
    }
    Ok((cfg, c.guard_eps))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nsp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Reference constants `C_V = R = κ = λ = 1`, `μ = 2`, `d = 3`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsp_consts_default(out: *mut NspConsts) -> NspStatus {
    guarded(|| {
        let c = PhysConsts::reference();
        write(
            out,
            "out",
            NspConsts {
                c_v: c.c_v,
                r_gas: c.r_gas,
                kappa: c.kappa,
                mu: c.mu,
                lambda: c.lambda,
                d: c.d,
            },
        )
    })
}

/// Default tolerances, step bounds and events.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsp_integrator_config_default(out: *mut NspIntegratorConfig) -> NspStatus {
    guarded(|| {
        let c = IntegratorConfig::default();
        write(
            out,
            "out",
            NspIntegratorConfig {
                rtol: c.rtol,
                atol: c.atol,
                h_init: c.h_init,
                h_min: c.h_min,
                h_max: c.h_max,
                r_max: c.r_max,
                blowup_threshold: c.blowup_threshold,
                max_steps: c.max_steps as u64,
                guard_eps: shrinkers::model::DEFAULT_GUARD_EPS,
            },
        )
    })
}

/// Right-hand side of the profile system at `state`.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn nsp_rhs(
    state: *const NspState,
    consts: *const NspConsts,
    guard_eps: f64,
    out: *mut NspDerivative,
) -> NspStatus {
    guarded(|| {
        let s = to_state(read(state, "state")?);
        let c = to_consts(read(consts, "consts")?)?;
        let d = rhs(&s, &c, guard_eps)?;
        write(
            out,
            "out",
            NspDerivative {
                dp: d.dp,
                du: d.du,
                dv: d.dv,
                dtheta: d.dtheta,
                ds: d.ds,
            },
        )
    })
}

unsafe fn integrate_from(
    start: ProfileState,
    consts: PhysConsts,
    cfg: *const NspIntegratorConfig,
    out: *mut *mut NspTrajectory,
) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let (cfg, guard) = to_integrator(read(cfg, "config")?)?;
    let traj = integrate_with_guard(&start, &consts, &cfg, guard);
    out.write(Box::into_raw(Box::new(NspTrajectory(traj))));
    Ok(())
}

/// Integrate from a cavitating launch. Integration failures are not errors:
/// they are reported by [`nsp_trajectory_termination`].
///
/// # Safety
/// Pointers must be null or valid; `*out` receives a handle to free with
/// [`nsp_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn nsp_integrate_cavitating(
    params: *const NspCavitatingParams,
    consts: *const NspConsts,
    config: *const NspIntegratorConfig,
    out: *mut *mut NspTrajectory,
) -> NspStatus {
    guarded(|| {
        let p = read(params, "params")?;
        let c = to_consts(read(consts, "consts")?)?;
        let velocity = match p.velocity {
            NspVelocity::Fixed => VelocityInterpretation::FixedVelocity,
            NspVelocity::Slope => VelocityInterpretation::AlphaSlope,
        };
        let start = cavitating_state_with(
            &CavitatingParams {
                delta: p.delta,
                p_delta: p.p_delta,
                alpha: p.alpha,
                theta0: p.theta0,
            },
            velocity,
        )?;
        integrate_from(start, c, config, out)
    })
}

/// Integrate from a smooth launch.
///
/// # Safety
/// As [`nsp_integrate_cavitating`].
#[no_mangle]
pub unsafe extern "C" fn nsp_integrate_smooth(
    params: *const NspSmoothParams,
    consts: *const NspConsts,
    config: *const NspIntegratorConfig,
    out: *mut *mut NspTrajectory,
) -> NspStatus {
    guarded(|| {
        let p = read(params, "params")?;
        let c = to_consts(read(consts, "consts")?)?;
        let start = smooth_state(
            &SmoothParams {
                delta: p.delta,
                p0: p.p0,
                theta0: p.theta0,
            },
            &c,
        )?;
        integrate_from(start, c, config, out)
    })
}

/// Release a trajectory. Null is ignored.
///
/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nsp_trajectory_free(traj: *mut NspTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Dense-output state at `r`.
///
/// # Safety
/// `traj` must be a live handle or null; `out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn nsp_trajectory_eval(
    traj: *const NspTrajectory,
    r: f64,
    out: *mut NspState,
) -> NspStatus {
    guarded(|| {
        let t = read(traj, "trajectory")?;
        let s = t.0.dense_eval(r)?;
        write(out, "out", from_state(&s))
    })
}

/// First and last radius covered.
///
/// # Safety
/// As [`nsp_trajectory_eval`].
#[no_mangle]
pub unsafe extern "C" fn nsp_trajectory_span(
    traj: *const NspTrajectory,
    r_start: *mut f64,
    r_end: *mut f64,
) -> NspStatus {
    guarded(|| {
        let t = read(traj, "trajectory")?;
        write(r_start, "r_start", t.0.r_start())?;
        write(r_end, "r_end", t.0.r_end())
    })
}

/// Why the integration stopped and where. `radius` is `r_max` when it was reached.
///
/// # Safety
/// As [`nsp_trajectory_eval`].
#[no_mangle]
pub unsafe extern "C" fn nsp_trajectory_termination(
    traj: *const NspTrajectory,
    kind: *mut NspTermination,
    radius: *mut f64,
) -> NspStatus {
    guarded(|| {
        let t = read(traj, "trajectory")?;
        let term = t.0.termination();
        let k = match term {
            TerminationKind::ReachedRMax => NspTermination::ReachedRMax,
            TerminationKind::BlowupEvent(_) => NspTermination::Blowup,
            TerminationKind::SingularityEvent(_) => NspTermination::Singularity,
            TerminationKind::StepSizeUnderflow(_) => NspTermination::StepUnderflow,
            TerminationKind::StepBudgetExhausted(_) => NspTermination::StepBudget,
            TerminationKind::NonFinite(_) => NspTermination::NonFinite,
        };
        write(kind, "kind", k)?;
        write(radius, "radius", term.radius().unwrap_or(t.0.r_end()))
    })
}

/// Number of accepted steps.
///
/// # Safety
/// As [`nsp_trajectory_eval`].
#[no_mangle]
pub unsafe extern "C" fn nsp_trajectory_step_count(
    traj: *const NspTrajectory,
    out: *mut u64,
) -> NspStatus {
    guarded(|| {
        let t = read(traj, "trajectory")?;
        write(out, "out", t.0.step_count() as u64)
    })
}

/// Sign classification of the terminal velocity.
///
/// # Safety
/// As [`nsp_trajectory_eval`].
#[no_mangle]
pub unsafe extern "C" fn nsp_classify(
    traj: *const NspTrajectory,
    dead_band: f64,
    out: *mut NspClassification,
) -> NspStatus {
    guarded(|| {
        let t = read(traj, "trajectory")?;
        if !(dead_band.is_finite() && dead_band >= 0.0) {
            return Err(Fail(
                NspStatus::InvalidParameter,
                "dead_band must be finite and >= 0".into(),
            ));
        }
        let c = match classify(&t.0, dead_band) {
            Classification::NegativeSign => NspClassification::Negative,
            Classification::PositiveSign => NspClassification::Positive,
            Classification::SolverError => NspClassification::SolverError,
            Classification::Indeterminate => NspClassification::Indeterminate,
        };
        write(out, "out", c)
    })
}
