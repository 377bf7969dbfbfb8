//! Adaptive Dormand-Prince 5(4) integration with dense output and
//! terminal events.
//!
//! The stepper is generic over the state dimension so that manufactured
//! scalar problems can exercise it independently of the profile model.
//! Every way an integration can stop is encoded in [`TerminationKind`];
//! [`integrate_system`] never fails.

mod dopri;

use crate::error::{Error, Result};
use crate::model::{PhysConsts, ProfileState, ProfileSystem};

/// Why a right-hand side could not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsFault {
    /// The state is on (or inside the guard band of) a singular set.
    Singular,
    NonFinite,
}

/// A first-order system `y' = f(r, y)` of dimension `N`.
pub trait OdeSystem<const N: usize> {
    fn eval(&self, r: f64, y: &[f64; N]) -> std::result::Result<[f64; N], RhsFault>;

    /// Components whose first crossing from nonnegative to negative is
    /// recorded in the trajectory.
    fn sign_watch(&self) -> &'static [usize] {
        &[]
    }
}

/// Adapter turning a plain closure into an [`OdeSystem`].
pub struct FnSystem<F>(pub F);

impl<F, const N: usize> OdeSystem<N> for FnSystem<F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn eval(&self, r: f64, y: &[f64; N]) -> std::result::Result<[f64; N], RhsFault> {
        let dy = (self.0)(r, y);
        if dy.iter().all(|x| x.is_finite()) {
            Ok(dy)
        } else {
            Err(RhsFault::NonFinite)
        }
    }
}

const SAFETY: f64 = 0.9;
const GROW_MAX: f64 = 5.0;
const SHRINK_MIN: f64 = 0.2;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;
/// Relative width at which event bisection stops.
const EVENT_RTOL: f64 = 1e-12;
/// Relative step size below which a singular stage counts as reaching the singularity.
const SINGULAR_STEP_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub r_max: f64,
    /// The integration stops once `max |y_i|` reaches this value.
    pub blowup_threshold: f64,
    /// Cap on attempted steps, accepted or rejected.
    pub max_steps: usize,
    /// When set, take uniform steps of this size with no error control.
    /// Only meant for convergence-order checks.
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: 1e-10,
            h_min: 1e-14,
            h_max: 1.0,
            r_max: 50.0,
            blowup_threshold: 1e6,
            max_steps: 1_000_000,
            fixed_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            self.rtol,
            self.atol,
            self.h_init,
            self.h_min,
            self.h_max,
            self.r_max,
            self.blowup_threshold,
        ];
        if reals.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::invalid(
                "rtol, atol, h_init, h_min, h_max, r_max and blowup_threshold must be positive and finite",
            ));
        }
        if !(self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return Err(Error::invalid(
                "step bounds must satisfy h_min <= h_init <= h_max",
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        if let Some(h) = self.fixed_step {
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::invalid("fixed_step must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminationKind {
    ReachedRMax,
    BlowupEvent(f64),
    SingularityEvent(f64),
    StepSizeUnderflow(f64),
    StepBudgetExhausted(f64),
    NonFinite(f64),
}

impl TerminationKind {
    /// Event or stop radius; `None` for [`TerminationKind::ReachedRMax`].
    pub fn radius(&self) -> Option<f64> {
        match *self {
            TerminationKind::ReachedRMax => None,
            TerminationKind::BlowupEvent(r)
            | TerminationKind::SingularityEvent(r)
            | TerminationKind::StepSizeUnderflow(r)
            | TerminationKind::StepBudgetExhausted(r)
            | TerminationKind::NonFinite(r) => Some(r),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TerminationKind::ReachedRMax => "reached_r_max",
            TerminationKind::BlowupEvent(_) => "blowup",
            TerminationKind::SingularityEvent(_) => "singularity",
            TerminationKind::StepSizeUnderflow(_) => "step_underflow",
            TerminationKind::StepBudgetExhausted(_) => "step_budget",
            TerminationKind::NonFinite(_) => "non_finite",
        }
    }

    /// Terminations that signal a failed integration rather than a result.
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            TerminationKind::SingularityEvent(_)
                | TerminationKind::StepSizeUnderflow(_)
                | TerminationKind::StepBudgetExhausted(_)
                | TerminationKind::NonFinite(_)
        )
    }
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<const N: usize> {
    pub r_left: f64,
    pub r_right: f64,
    pub y_left: [f64; N],
    pub y_right: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    fn theta(&self, r: f64) -> f64 {
        (r - self.r_left) / (self.r_right - self.r_left)
    }

    /// Interpolated state; exact at both endpoints.
    pub fn eval(&self, r: f64) -> [f64; N] {
        if r == self.r_left {
            return self.y_left;
        }
        if r == self.r_right {
            return self.y_right;
        }
        let t = self.theta(r);
        let t1 = 1.0 - t;
        let [c0, c1, c2, c3, c4] = &self.cont;
        std::array::from_fn(|i| c0[i] + t * (c1[i] + t1 * (c2[i] + t * (c3[i] + t1 * c4[i]))))
    }

    /// Derivative of the interpolant with respect to `r`.
    pub fn eval_derivative(&self, r: f64) -> [f64; N] {
        let h = self.r_right - self.r_left;
        let t = self.theta(r);
        let t1 = 1.0 - t;
        let [_, c1, c2, c3, c4] = &self.cont;
        std::array::from_fn(|i| {
            let q4 = c3[i] + t1 * c4[i];
            let q3 = c2[i] + t * q4;
            let q2 = c1[i] + t1 * q3;
            let dq3 = q4 - t * c4[i];
            let dq2 = -q3 + t1 * dq3;
            (q2 + t * dq2) / h
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignCrossing {
    pub component: usize,
    pub r: f64,
}

/// Dense record of an integration from the launch radius outward.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    r0: f64,
    y0: [f64; N],
    steps: Vec<Step<N>>,
    termination: TerminationKind,
    r_end: f64,
    y_end: [f64; N],
    rejected: usize,
    sign_crossings: Vec<SignCrossing>,
}

impl<const N: usize> Trajectory<N> {
    fn new(r0: f64, y0: [f64; N]) -> Self {
        Self {
            r0,
            y0,
            steps: Vec::new(),
            termination: TerminationKind::ReachedRMax,
            r_end: r0,
            y_end: y0,
            rejected: 0,
            sign_crossings: Vec::new(),
        }
    }

    pub fn r_start(&self) -> f64 {
        self.r0
    }

    pub fn y_start(&self) -> &[f64; N] {
        &self.y0
    }

    /// Terminal radius: `r_max` or the event radius.
    pub fn r_end(&self) -> f64 {
        self.r_end
    }

    pub fn y_end(&self) -> &[f64; N] {
        &self.y_end
    }

    pub fn termination(&self) -> TerminationKind {
        self.termination
    }

    pub fn steps(&self) -> &[Step<N>] {
        &self.steps
    }

    /// Number of accepted steps.
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn rejected_count(&self) -> usize {
        self.rejected
    }

    pub fn sign_crossings(&self) -> &[SignCrossing] {
        &self.sign_crossings
    }

    pub fn first_sign_crossing(&self, component: usize) -> Option<f64> {
        self.sign_crossings
            .iter()
            .find(|c| c.component == component)
            .map(|c| c.r)
    }

    /// Step boundaries inside `[r_start, r_end]`, both ends included.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.r0);
        for s in &self.steps {
            if s.r_right < self.r_end {
                out.push(s.r_right);
            }
        }
        if self.r_end > self.r0 {
            out.push(self.r_end);
        }
        out
    }

    fn locate(&self, r: f64) -> Result<&Step<N>> {
        if !(r >= self.r0 && r <= self.r_end) || self.steps.is_empty() {
            return Err(Error::OutOfRange {
                r,
                lo: self.r0,
                hi: self.r_end,
            });
        }
        let idx = self.steps.partition_point(|s| s.r_right < r);
        Ok(&self.steps[idx.min(self.steps.len() - 1)])
    }

    /// Dense-output value at `r`, exact at stored step endpoints.
    pub fn eval(&self, r: f64) -> Result<[f64; N]> {
        if r == self.r0 {
            return Ok(self.y0);
        }
        if r == self.r_end {
            return Ok(self.y_end);
        }
        self.locate(r).map(|s| s.eval(r))
    }

    pub fn eval_derivative(&self, r: f64) -> Result<[f64; N]> {
        self.locate(r).map(|s| s.eval_derivative(r))
    }
}

struct Trial<const N: usize> {
    y_new: [f64; N],
    k_new: [f64; N],
    err: f64,
    cont: [[f64; N]; 5],
}

/// `y + h Σ_j w_j k_j` over the first `w.len()` stages.
fn combine<const N: usize>(y: &[f64; N], h: f64, w: &[f64], k: &[[f64; N]]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * w.iter().zip(k).map(|(w, k)| w * k[i]).sum::<f64>())
}

fn max_norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn try_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    r: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    cfg: &IntegratorConfig,
) -> std::result::Result<Trial<N>, RhsFault> {
    use dopri::{A, B, C, D, E};

    let mut k: [[f64; N]; 7] = [[0.0; N]; 7];
    k[0] = *k1;
    for stage in 1..6 {
        let ys = combine(y, h, &A[stage][..stage], &k[..stage]);
        if ys.iter().any(|x| !x.is_finite()) {
            return Err(RhsFault::NonFinite);
        }
        k[stage] = sys.eval(r + C[stage] * h, &ys)?;
    }
    let y_new = combine(y, h, &B, &k[..6]);
    if y_new.iter().any(|x| !x.is_finite()) {
        return Err(RhsFault::NonFinite);
    }
    k[6] = sys.eval(r + h, &y_new)?;

    let mut err = 0.0_f64;
    for i in 0..N {
        let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let scale = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
        err = err.max(e.abs() / scale);
    }
    if !err.is_finite() {
        return Err(RhsFault::NonFinite);
    }

    let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
    let bspl: [f64; N] = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
    let c3: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]);
    let c4: [f64; N] = std::array::from_fn(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>());
    Ok(Trial {
        y_new,
        k_new: k[6],
        err,
        cont: [*y, ydiff, bspl, c3, c4],
    })
}

/// Smallest `r` in `(lo, hi]` with `fired(r)`, assuming `!fired(lo)` and `fired(hi)`.
fn bisect(mut lo: f64, mut hi: f64, fired: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        if hi - lo <= EVENT_RTOL * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fired(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn fault_termination(fault: RhsFault, r: f64) -> TerminationKind {
    match fault {
        RhsFault::Singular => TerminationKind::SingularityEvent(r),
        RhsFault::NonFinite => TerminationKind::NonFinite(r),
    }
}

/// Integrate `sys` outward from `(r0, y0)` until `cfg.r_max` or an event.
///
/// `cfg` is assumed valid (see [`IntegratorConfig::validate`]).
pub fn integrate_system<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    r0: f64,
    y0: [f64; N],
    cfg: &IntegratorConfig,
) -> Trajectory<N> {
    let mut traj = Trajectory::new(r0, y0);
    let finish = |traj: &mut Trajectory<N>, kind: TerminationKind| {
        traj.termination = kind;
    };

    if !r0.is_finite() || y0.iter().any(|x| !x.is_finite()) {
        finish(&mut traj, TerminationKind::NonFinite(r0));
        return traj;
    }
    for &c in sys.sign_watch() {
        if y0[c] < 0.0 {
            traj.sign_crossings.push(SignCrossing {
                component: c,
                r: r0,
            });
        }
    }
    if max_norm(&y0) >= cfg.blowup_threshold {
        finish(&mut traj, TerminationKind::BlowupEvent(r0));
        return traj;
    }
    let mut k1 = match sys.eval(r0, &y0) {
        Ok(k) => k,
        Err(fault) => {
            finish(&mut traj, fault_termination(fault, r0));
            return traj;
        }
    };

    let mut r = r0;
    let mut y = y0;
    let mut h = match cfg.fixed_step {
        Some(h) => h,
        None => cfg.h_init.min(cfg.h_max),
    };
    let mut facold = 1e-4_f64;
    let mut last_rejected = false;
    let mut attempts = 0usize;

    loop {
        if r >= cfg.r_max {
            finish(&mut traj, TerminationKind::ReachedRMax);
            break;
        }
        if attempts >= cfg.max_steps {
            finish(&mut traj, TerminationKind::StepBudgetExhausted(r));
            break;
        }
        attempts += 1;

        let remaining = cfg.r_max - r;
        let (step_h, hits_end) = match cfg.fixed_step {
            // Grid points r0 + n h, so rounding does not accumulate.
            Some(hf) => {
                let target = r0 + (traj.steps.len() + 1) as f64 * hf;
                if target >= cfg.r_max - 1e-9 * hf {
                    (remaining, true)
                } else {
                    (target - r, false)
                }
            }
            None if h >= remaining * (1.0 - 1e-12) => (remaining, true),
            None => (h, false),
        };

        let trial = match try_step(sys, r, &y, &k1, step_h, cfg) {
            Ok(t) => t,
            Err(fault) => {
                traj.rejected += 1;
                if cfg.fixed_step.is_some() {
                    finish(&mut traj, fault_termination(fault, r));
                    break;
                }
                h = step_h * 0.25;
                let floor = match fault {
                    RhsFault::Singular => cfg.h_min.max(SINGULAR_STEP_RTOL * r.abs()),
                    RhsFault::NonFinite => cfg.h_min,
                };
                if h < floor {
                    finish(&mut traj, fault_termination(fault, r));
                    break;
                }
                last_rejected = true;
                continue;
            }
        };

        if cfg.fixed_step.is_none() && trial.err > 1.0 {
            traj.rejected += 1;
            let g = (SAFETY * trial.err.powf(-PI_ALPHA)).max(SHRINK_MIN);
            h = step_h * g;
            if h < cfg.h_min || r + h == r {
                finish(&mut traj, TerminationKind::StepSizeUnderflow(r));
                break;
            }
            last_rejected = true;
            continue;
        }

        let r_new = if hits_end { cfg.r_max } else { r + step_h };
        let step = Step {
            r_left: r,
            r_right: r_new,
            y_left: y,
            y_right: trial.y_new,
            cont: trial.cont,
        };

        let mut event: Option<TerminationKind> = None;
        let mut r_stop = r_new;
        if max_norm(&trial.y_new) >= cfg.blowup_threshold {
            let re = bisect(r, r_new, |x| {
                max_norm(&step.eval(x)) >= cfg.blowup_threshold
            });
            event = Some(TerminationKind::BlowupEvent(re));
            r_stop = re;
        }
        for &c in sys.sign_watch() {
            if traj.first_sign_crossing(c).is_none() && y[c] >= 0.0 && trial.y_new[c] < 0.0 {
                let rc = bisect(r, r_new, |x| step.eval(x)[c] < 0.0);
                if rc <= r_stop {
                    traj.sign_crossings.push(SignCrossing {
                        component: c,
                        r: rc,
                    });
                }
            }
        }

        traj.steps.push(step);
        if let Some(kind) = event {
            let last = traj.steps.last().expect("step just pushed");
            traj.y_end = last.eval(r_stop);
            traj.r_end = r_stop;
            finish(&mut traj, kind);
            return traj;
        }

        r = r_new;
        y = trial.y_new;
        k1 = trial.k_new;
        traj.r_end = r;
        traj.y_end = y;

        if cfg.fixed_step.is_none() {
            let mut g = if trial.err == 0.0 {
                GROW_MAX
            } else {
                SAFETY * trial.err.powf(-PI_ALPHA) * facold.powf(PI_BETA)
            };
            g = g.clamp(SHRINK_MIN, GROW_MAX);
            if last_rejected {
                g = g.min(1.0);
            }
            facold = trial.err.max(1e-4);
            if !hits_end {
                h = (step_h * g).min(cfg.h_max);
            }
        }
        last_rejected = false;
    }
    traj
}

/// Trajectory of the five-component profile system.
pub type ProfileTrajectory = Trajectory<5>;

impl Trajectory<5> {
    /// Launch state at `r = δ`.
    pub fn launch(&self) -> ProfileState {
        ProfileState::from_components(self.r0, &self.y0)
    }

    pub fn terminal_state(&self) -> ProfileState {
        ProfileState::from_components(self.r_end, &self.y_end)
    }

    /// Profile state from dense output.
    pub fn dense_eval(&self, r: f64) -> Result<ProfileState> {
        self.eval(r).map(|y| ProfileState::from_components(r, &y))
    }

    pub fn first_negative_density(&self) -> Option<f64> {
        self.first_sign_crossing(0)
    }

    pub fn first_negative_temperature(&self) -> Option<f64> {
        self.first_sign_crossing(3)
    }
}

/// Integrate the profile equations from the launch state `initial`.
pub fn integrate(
    initial: &ProfileState,
    consts: &PhysConsts,
    cfg: &IntegratorConfig,
) -> ProfileTrajectory {
    integrate_with_guard(initial, consts, cfg, crate::model::DEFAULT_GUARD_EPS)
}

pub fn integrate_with_guard(
    initial: &ProfileState,
    consts: &PhysConsts,
    cfg: &IntegratorConfig,
    guard_eps: f64,
) -> ProfileTrajectory {
    let sys = ProfileSystem::with_guard(*consts, guard_eps);
    integrate_system(&sys, initial.r, initial.components(), cfg)
}
