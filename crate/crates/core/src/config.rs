//! Flat `key = value` configuration files.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Later assignments (including `--set` overrides) replace earlier ones.
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsConfig;
use crate::error::{Error, Result};
use crate::initdata::{VelocityInterpretation, DEFAULT_CAVITATING_DELTA, DEFAULT_SMOOTH_DELTA};
use crate::integrator::IntegratorConfig;
use crate::model::{PhysConsts, ProfileState, DEFAULT_GUARD_EPS};
use crate::sweep::{Axis, AxisName, Cell, Regime, SweepSpec, DEFAULT_DEAD_BAND};

pub const KNOWN_KEYS: &[&str] = &[
    "regime",
    "delta",
    "p0",
    "theta0",
    "alpha",
    "velocity",
    "axis1",
    "axis2",
    "axis3",
    "c_v",
    "r_gas",
    "kappa",
    "mu",
    "lambda",
    "d",
    "rtol",
    "atol",
    "h_init",
    "h_min",
    "h_max",
    "r_max",
    "blowup_threshold",
    "max_steps",
    "guard_eps",
    "dead_band",
    "stability_check",
    "gamma",
    "gamma_grid",
    "quad_rtol",
    "tail_window",
    "samples",
    "out",
    "threads",
];

/// Parsed but uninterpreted assignments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            raw.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, strip(e))))?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Apply a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{pair}' is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("key '{key}': '{v}' is not a number")))
            })
            .transpose()
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key).map(|v| parse_count(key, v)).transpose()
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn parse_count(key: &str, v: &str) -> Result<usize> {
    if let Ok(n) = v.parse::<usize>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= 9.0e15 => Ok(x as usize),
        _ => Err(Error::Config(format!(
            "key '{key}': '{v}' is not a nonnegative integer"
        ))),
    }
}

fn parse_axis(key: &str, v: &str) -> Result<Axis> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    let bad = || {
        Error::Config(format!(
            "key '{key}': expected `name min max count`, got '{v}'"
        ))
    };
    if parts.len() != 4 {
        return Err(bad());
    }
    let name = AxisName::parse(parts[0]).ok_or_else(|| {
        Error::Config(format!(
            "key '{key}': axis name must be p0, theta0 or alpha, got '{}'",
            parts[0]
        ))
    })?;
    let min = parts[1].parse().map_err(|_| bad())?;
    let max = parts[2].parse().map_err(|_| bad())?;
    let count = parse_count(key, parts[3])?;
    Ok(Axis::new(name, min, max, count))
}

/// Fully interpreted configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: SweepSpec,
    /// Diagnostics settings. Without a configured `gamma` the stored value
    /// is only a stand-in; see [`RunConfig::require_diagnostics`].
    pub diagnostics: DiagnosticsConfig,
    pub gamma_given: bool,
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let regime = match raw.get("regime") {
            None => return Err(Error::Config("missing required key 'regime'".into())),
            Some("cavitating") => Regime::Cavitating,
            Some("smooth") => Regime::Smooth,
            Some(other) => {
                return Err(Error::Config(format!(
                    "key 'regime': expected cavitating or smooth, got '{other}'"
                )))
            }
        };
        let mut spec = SweepSpec::new(regime);
        spec.delta = raw.real_or(
            "delta",
            match regime {
                Regime::Cavitating => DEFAULT_CAVITATING_DELTA,
                Regime::Smooth => DEFAULT_SMOOTH_DELTA,
            },
        )?;
        spec.p0 = raw.real_or(
            "p0",
            match regime {
                Regime::Cavitating => 0.5,
                Regime::Smooth => 1.0,
            },
        )?;
        spec.theta0 = raw.real_or("theta0", 1.0)?;
        spec.alpha = raw.real_or("alpha", 0.1)?;
        spec.velocity = match raw.get("velocity") {
            None => VelocityInterpretation::default(),
            Some("fixed") => VelocityInterpretation::FixedVelocity,
            Some("slope") => VelocityInterpretation::AlphaSlope,
            Some(other) => {
                return Err(Error::Config(format!(
                    "key 'velocity': expected fixed or slope, got '{other}'"
                )))
            }
        };
        for key in ["axis1", "axis2", "axis3"] {
            if let Some(v) = raw.get(key) {
                if spec.axes.len() + 1 != key[4..].parse::<usize>().expect("axis key") {
                    return Err(Error::Config(format!(
                        "key '{key}' given without the preceding axes"
                    )));
                }
                spec.axes.push(parse_axis(key, v)?);
            }
        }

        let reference = PhysConsts::reference();
        spec.consts = PhysConsts {
            c_v: raw.real_or("c_v", reference.c_v)?,
            r_gas: raw.real_or("r_gas", reference.r_gas)?,
            kappa: raw.real_or("kappa", reference.kappa)?,
            mu: raw.real_or("mu", reference.mu)?,
            lambda: raw.real_or("lambda", reference.lambda)?,
            d: match raw.count("d")? {
                None => reference.d,
                Some(d) => u32::try_from(d)
                    .map_err(|_| Error::Config(format!("key 'd': {d} is too large")))?,
            },
        };

        let def = IntegratorConfig::default();
        spec.integrator = IntegratorConfig {
            rtol: raw.real_or("rtol", def.rtol)?,
            atol: raw.real_or("atol", def.atol)?,
            h_init: raw.real_or("h_init", def.h_init)?,
            h_min: raw.real_or("h_min", def.h_min)?,
            h_max: raw.real_or("h_max", def.h_max)?,
            r_max: raw.real_or("r_max", def.r_max)?,
            blowup_threshold: raw.real_or("blowup_threshold", def.blowup_threshold)?,
            max_steps: raw.count("max_steps")?.unwrap_or(def.max_steps),
            fixed_step: None,
        };
        spec.guard_eps = raw.real_or("guard_eps", DEFAULT_GUARD_EPS)?;
        spec.dead_band = raw.real_or("dead_band", DEFAULT_DEAD_BAND)?;
        spec.stability_check = match raw.get("stability_check") {
            None | Some("true") => true,
            Some("false") => false,
            Some(other) => {
                return Err(Error::Config(format!(
                    "key 'stability_check': expected true or false, got '{other}'"
                )))
            }
        };

        let mut diagnostics = DiagnosticsConfig::new(f64::NAN);
        diagnostics.quad_rtol = raw.real_or("quad_rtol", diagnostics.quad_rtol)?;
        diagnostics.tail_window = raw.real_or("tail_window", diagnostics.tail_window)?;
        if let Some(g) = raw.get("gamma_grid") {
            diagnostics.gamma_grid = g
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        Error::Config(format!("key 'gamma_grid': '{s}' is not a number"))
                    })
                })
                .collect::<Result<_>>()?;
        }
        let gamma = raw.real("gamma")?;
        // Validate everything except gamma with a stand-in above the dimension.
        let mut probe = diagnostics.clone();
        probe.gamma = gamma.unwrap_or(f64::from(spec.consts.d) + 1.0);
        probe
            .validate(&spec.consts)
            .map_err(|e| Error::Config(strip(e)))?;
        diagnostics.gamma = probe.gamma;

        let samples = raw.count("samples")?.unwrap_or(501);
        if samples == 0 {
            return Err(Error::Config("key 'samples' must be at least 1".into()));
        }
        let threads = raw.count("threads")?;
        if threads == Some(0) {
            return Err(Error::Config("key 'threads' must be at least 1".into()));
        }

        spec.validate().map_err(|e| Error::Config(strip(e)))?;
        Ok(RunConfig {
            spec,
            diagnostics,
            gamma_given: gamma.is_some(),
            samples,
            out: raw.get("out").map(PathBuf::from),
            threads,
        })
    }

    /// Diagnostics settings for the smallness functional, which needs `gamma`.
    pub fn require_diagnostics(&self) -> Result<&DiagnosticsConfig> {
        if self.gamma_given {
            Ok(&self.diagnostics)
        } else {
            Err(Error::Config("missing required key 'gamma'".into()))
        }
    }

    /// Launch state for the fixed parameters (axes ignored).
    pub fn launch(&self) -> Result<ProfileState> {
        let cell = Cell {
            index: [0; 3],
            p0: self.spec.p0,
            theta0: self.spec.theta0,
            alpha: self.spec.alpha,
        };
        self.spec.launch(&cell, self.spec.delta)
    }
}
