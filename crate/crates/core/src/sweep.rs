//! Parameter grids of launches, trajectory classification and phase data.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::initdata::{
    cavitating_state_with, smooth_state, CavitatingParams, SmoothParams, VelocityInterpretation,
    DEFAULT_CAVITATING_DELTA,
};
use crate::integrator::{
    integrate_with_guard, IntegratorConfig, ProfileTrajectory, TerminationKind,
};
use crate::model::{PhysConsts, ProfileState, DEFAULT_GUARD_EPS};

pub const DEFAULT_DEAD_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classification {
    NegativeSign,
    PositiveSign,
    SolverError,
    Indeterminate,
}

impl Classification {
    pub const ALL: [Classification; 4] = [
        Classification::NegativeSign,
        Classification::PositiveSign,
        Classification::SolverError,
        Classification::Indeterminate,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Classification::NegativeSign => "negative",
            Classification::PositiveSign => "positive",
            Classification::SolverError => "solver_error",
            Classification::Indeterminate => "indeterminate",
        }
    }

    /// Phase-map color.
    pub fn rgb(&self) -> [u8; 3] {
        match self {
            Classification::NegativeSign => [0, 0, 255],
            Classification::PositiveSign => [255, 0, 0],
            Classification::SolverError => [0, 255, 0],
            Classification::Indeterminate => [255, 255, 255],
        }
    }
}

/// Sign of `U` at the event radius, or at `r_max` for completed runs.
pub fn classify(traj: &ProfileTrajectory, dead_band: f64) -> Classification {
    classify_terminal(traj.termination(), traj.y_end()[1], dead_band)
}

fn classify_terminal(termination: TerminationKind, u_end: f64, dead_band: f64) -> Classification {
    if termination.is_failure() {
        Classification::SolverError
    } else if u_end > dead_band {
        Classification::PositiveSign
    } else if u_end < -dead_band {
        Classification::NegativeSign
    } else {
        Classification::Indeterminate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Cavitating,
    Smooth,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Cavitating => "cavitating",
            Regime::Smooth => "smooth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    P0,
    Theta0,
    Alpha,
}

impl AxisName {
    pub fn label(&self) -> &'static str {
        match self {
            AxisName::P0 => "p0",
            AxisName::Theta0 => "theta0",
            AxisName::Alpha => "alpha",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "p0" => Some(AxisName::P0),
            "theta0" => Some(AxisName::Theta0),
            "alpha" => Some(AxisName::Alpha),
            _ => None,
        }
    }
}

/// Linearly spaced parameter range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: AxisName, min: f64, max: f64, count: usize) -> Self {
        Self {
            name,
            min,
            max,
            count,
        }
    }

    /// Grid values. A density or temperature range starting at 0 is shifted
    /// by one grid step so that the degenerate value 0 is never launched.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let half_open = self.min == 0.0 && self.name != AxisName::Alpha;
        let n = self.count;
        let span = self.max - self.min;
        (0..n)
            .map(|i| {
                if half_open {
                    self.min + span * (i + 1) as f64 / n as f64
                } else if i + 1 == n {
                    self.max
                } else {
                    self.min + span * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub regime: Regime,
    /// Up to three axes in grid-index order `i`, `j`, `k`.
    pub axes: Vec<Axis>,
    /// Values for parameters without an axis.
    pub p0: f64,
    pub theta0: f64,
    pub alpha: f64,
    pub delta: f64,
    pub consts: PhysConsts,
    pub integrator: IntegratorConfig,
    pub velocity: VelocityInterpretation,
    pub dead_band: f64,
    pub guard_eps: f64,
    /// Rerun anomalous cells at `delta / 10`.
    pub stability_check: bool,
}

impl SweepSpec {
    pub fn new(regime: Regime) -> Self {
        Self {
            regime,
            axes: Vec::new(),
            p0: 1.0,
            theta0: 1.0,
            alpha: 0.1,
            delta: match regime {
                Regime::Cavitating => DEFAULT_CAVITATING_DELTA,
                Regime::Smooth => crate::initdata::DEFAULT_SMOOTH_DELTA,
            },
            consts: PhysConsts::reference(),
            integrator: IntegratorConfig::default(),
            velocity: VelocityInterpretation::default(),
            dead_band: DEFAULT_DEAD_BAND,
            guard_eps: DEFAULT_GUARD_EPS,
            stability_check: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.consts.validate()?;
        self.integrator.validate()?;
        if self.axes.len() > 3 {
            return Err(Error::invalid("at most three sweep axes"));
        }
        for (n, a) in self.axes.iter().enumerate() {
            if a.count == 0 {
                return Err(Error::invalid(format!(
                    "axis {} has zero points",
                    a.name.label()
                )));
            }
            if !(a.min.is_finite() && a.max.is_finite()) || a.min > a.max {
                return Err(Error::invalid(format!(
                    "axis {} needs finite min <= max",
                    a.name.label()
                )));
            }
            if self.axes[..n].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid(format!(
                    "axis {} given twice",
                    a.name.label()
                )));
            }
            if self.regime == Regime::Smooth && a.name == AxisName::Alpha {
                return Err(Error::invalid("the smooth regime has no alpha parameter"));
            }
        }
        if !(self.dead_band >= 0.0) || !(self.guard_eps > 0.0) {
            return Err(Error::invalid("dead_band must be >= 0 and guard_eps > 0"));
        }
        // Every cell must be a valid launch.
        for cell in self.cells() {
            self.launch(&cell, self.delta)?;
        }
        Ok(())
    }

    /// Grid shape `(ni, nj, nk)`; missing axes have extent 1.
    pub fn shape(&self) -> [usize; 3] {
        let mut s = [1; 3];
        for (n, a) in self.axes.iter().enumerate() {
            s[n] = a.count;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All cells in row-major order of `(i, j, k)`.
    pub fn cells(&self) -> Vec<Cell> {
        let [ni, nj, nk] = self.shape();
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = Vec::with_capacity(ni * nj * nk);
        for i in 0..ni {
            for j in 0..nj {
                for k in 0..nk {
                    let mut cell = Cell {
                        index: [i, j, k],
                        p0: self.p0,
                        theta0: self.theta0,
                        alpha: self.alpha,
                    };
                    for (n, a) in self.axes.iter().enumerate() {
                        let v = values[n][[i, j, k][n]];
                        match a.name {
                            AxisName::P0 => cell.p0 = v,
                            AxisName::Theta0 => cell.theta0 = v,
                            AxisName::Alpha => cell.alpha = v,
                        }
                    }
                    out.push(cell);
                }
            }
        }
        out
    }

    /// Launch state of `cell` at radius `delta`.
    pub fn launch(&self, cell: &Cell, delta: f64) -> Result<ProfileState> {
        match self.regime {
            Regime::Cavitating => cavitating_state_with(
                &CavitatingParams {
                    delta,
                    p_delta: cell.p0,
                    alpha: cell.alpha,
                    theta0: cell.theta0,
                },
                self.velocity,
            ),
            Regime::Smooth => smooth_state(
                &SmoothParams {
                    delta,
                    p0: cell.p0,
                    theta0: cell.theta0,
                },
                &self.consts,
            ),
        }
    }

    /// Integrate a single cell from radius `delta`.
    pub fn integrate_cell(&self, cell: &Cell, delta: f64) -> Result<ProfileTrajectory> {
        let start = self.launch(cell, delta)?;
        Ok(integrate_with_guard(
            &start,
            &self.consts,
            &self.integrator,
            self.guard_eps,
        ))
    }
}

/// Parameter values of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: [usize; 3],
    pub p0: f64,
    pub theta0: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResult {
    pub index: [usize; 3],
    pub p0: f64,
    pub theta0: f64,
    pub alpha: f64,
    pub classification: Classification,
    pub r_end: f64,
    /// `U` at the classification radius.
    pub u_end: f64,
    pub steps: usize,
    pub termination: TerminationKind,
    /// For anomalous cells: whether the class survives a rerun at `delta / 10`.
    pub stability: Option<bool>,
}

fn run_cell(spec: &SweepSpec, cell: &Cell, delta: f64) -> CellResult {
    let mut out = CellResult {
        index: cell.index,
        p0: cell.p0,
        theta0: cell.theta0,
        alpha: cell.alpha,
        classification: Classification::SolverError,
        r_end: delta,
        u_end: f64::NAN,
        steps: 0,
        termination: TerminationKind::NonFinite(delta),
        stability: None,
    };
    if let Ok(traj) = spec.integrate_cell(cell, delta) {
        out.classification = classify(&traj, spec.dead_band);
        out.r_end = traj.r_end();
        out.u_end = traj.y_end()[1];
        out.steps = traj.step_count();
        out.termination = traj.termination();
    }
    out
}

/// Integrate and classify every cell, in row-major order.
///
/// Runs on the current rayon pool; the result does not depend on the number
/// of threads.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let cells = spec.cells();
    let mut results: Vec<CellResult> = cells
        .par_iter()
        .map(|c| run_cell(spec, c, spec.delta))
        .collect();

    if spec.stability_check {
        if let Some(majority) = majority_class(&results) {
            let anomalous: Vec<usize> = (0..results.len())
                .filter(|&n| results[n].classification != majority)
                .collect();
            let rerun: Vec<Classification> = anomalous
                .par_iter()
                .map(|&n| run_cell(spec, &cells[n], spec.delta / 10.0).classification)
                .collect();
            for (&n, class) in anomalous.iter().zip(rerun) {
                results[n].stability = Some(class == results[n].classification);
            }
        }
    }
    Ok(results)
}

/// Most frequent class; ties go to the earlier entry of [`Classification::ALL`].
pub fn majority_class(results: &[CellResult]) -> Option<Classification> {
    let counts = class_counts(results);
    Classification::ALL
        .iter()
        .zip(counts)
        .filter(|(_, n)| *n > 0)
        .fold(
            None,
            |best: Option<(Classification, usize)>, (c, n)| match best {
                Some((_, m)) if m >= n => best,
                _ => Some((*c, n)),
            },
        )
        .map(|(c, _)| c)
}

/// Cell counts in the order of [`Classification::ALL`].
pub fn class_counts(results: &[CellResult]) -> [usize; 4] {
    let mut counts = [0; 4];
    for r in results {
        let n = Classification::ALL
            .iter()
            .position(|c| *c == r.classification)
            .expect("listed");
        counts[n] += 1;
    }
    counts
}
