//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.
//!
//! The integration range may be given as a list of breakpoints; each piece
//! seeds the interval pool so that kinks at step boundaries of a dense
//! output never sit inside a single panel.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 0.0,
            max_panels: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_value = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_value += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_value * half.abs(),
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    integrate_pieces(f, &[a, b], opts)
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, splitting at every breakpoint.
///
/// `breaks` must be nondecreasing; zero-width pieces are skipped.
pub fn integrate_pieces(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let mut pool: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    if pool.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }

    loop {
        let value: f64 = pool.iter().map(|p| p.value).sum();
        let error: f64 = pool.iter().map(|p| p.error).sum();
        let abs_value: f64 = pool.iter().map(|p| p.abs_value).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure {
                a: breaks[0],
                b: breaks[breaks.len() - 1],
                estimate: error,
            });
        }
        let tol = opts
            .atol
            .max(opts.rtol * value.abs())
            .max(50.0 * f64::EPSILON * abs_value);
        if error <= tol {
            return Ok(QuadResult { value, error });
        }
        if pool.len() >= opts.max_panels {
            return Err(Error::QuadratureFailure {
                a: breaks[0],
                b: breaks[breaks.len() - 1],
                estimate: error,
            });
        }
        let (worst, _) = pool
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let p = pool.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split further in floating point.
            return Err(Error::QuadratureFailure {
                a: p.a,
                b: p.b,
                estimate: error,
            });
        }
        pool.push(gk15(&f, p.a, mid));
        pool.push(gk15(&f, mid, p.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_high_degree_polynomials() {
        let r = integrate(|x| x.powi(22), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        let r = integrate(
            f64::sin,
            0.0,
            std::f64::consts::PI,
            &QuadOptions::with_rtol(1e-12),
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn handles_kinks_at_breakpoints() {
        let f = |x: f64| (x - 0.3).abs();
        let r = integrate_pieces(f, &[0.0, 0.3, 1.0], &QuadOptions::with_rtol(1e-13)).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(
            |x: f64| 1.0 / x.sqrt(),
            0.0,
            1.0,
            &QuadOptions::with_rtol(1e-9),
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn zero_integrand() {
        let r = integrate(|_| 0.0, 1.0, 5.0, &QuadOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        let r = integrate_pieces(|_| 1.0, &[2.0, 2.0], &QuadOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn non_finite_integrand_fails() {
        let r = integrate(|_| f64::NAN, 0.0, 1.0, &QuadOptions::default());
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
