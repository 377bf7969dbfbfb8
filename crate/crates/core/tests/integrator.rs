mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shrinkers::initdata::{cavitating_state_with, smooth_state, CavitatingParams, SmoothParams};
use shrinkers::integrator::FnSystem;
use shrinkers::{
    integrate, integrate_system, IntegratorConfig, TerminationKind, VelocityInterpretation,
};

use common::reference_consts;

fn cfg(rtol: f64, atol: f64, r_max: f64) -> IntegratorConfig {
    IntegratorConfig {
        rtol,
        atol,
        h_init: 1e-6,
        r_max,
        ..IntegratorConfig::default()
    }
}

#[test]
fn exponential_decay_final_value() {
    let c = cfg(1e-8, 1e-12, 5.0);
    let t = integrate_system(&FnSystem(|_r: f64, y: &[f64; 1]| [-y[0]]), 0.0, [1.0], &c);
    assert_eq!(t.termination(), TerminationKind::ReachedRMax);
    assert_eq!(t.r_end(), 5.0);
    let exact = (-5.0f64).exp();
    assert!(
        (t.y_end()[0] - exact).abs() <= 10.0 * c.rtol * exact,
        "{}",
        t.y_end()[0]
    );
}

#[test]
fn dense_output_at_random_radii() {
    let c = cfg(1e-8, 1e-12, 5.0);
    let t = integrate_system(&FnSystem(|_r: f64, y: &[f64; 1]| [-y[0]]), 0.0, [1.0], &c);
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let r: f64 = rng.gen_range(0.0..5.0);
        let exact = (-r).exp();
        let got = t.eval(r).unwrap()[0];
        assert!(
            (got - exact).abs() <= 100.0 * c.rtol * exact,
            "r = {r}: {got} vs {exact}"
        );
    }
    assert!(t.eval(5.5).is_err());
}

#[test]
fn growth_stops_at_threshold() {
    let c = IntegratorConfig {
        blowup_threshold: 1e6,
        ..cfg(1e-8, 1e-12, 50.0)
    };
    let t = integrate_system(&FnSystem(|_r: f64, y: &[f64; 1]| [y[0]]), 0.0, [1.0], &c);
    let TerminationKind::BlowupEvent(r) = t.termination() else {
        panic!("expected blow-up, got {:?}", t.termination());
    };
    let expected = 1e6f64.ln();
    assert!(
        (r - expected).abs() < 1e-6,
        "event at {r}, expected {expected}"
    );
}

#[test]
fn dense_output_reproduces_step_endpoints() {
    let t = integrate_system(
        &FnSystem(|r: f64, y: &[f64; 2]| [y[1], -y[0] + r.sin()]),
        0.0,
        [1.0, 0.0],
        &cfg(1e-9, 1e-12, 10.0),
    );
    let mut prev_right = None;
    for s in t.steps() {
        assert!(s.r_right > s.r_left);
        assert_eq!(s.eval(s.r_left), s.y_left);
        assert_eq!(s.eval(s.r_right), s.y_right);
        if let Some(p) = prev_right {
            assert_eq!(p, s.y_left);
        }
        prev_right = Some(s.y_right);
    }
}

#[test]
fn profile_runs_are_deterministic() {
    let consts = reference_consts();
    let c = IntegratorConfig::default();
    let cav = cavitating_state_with(
        &CavitatingParams {
            delta: 1e-3,
            p_delta: 0.5,
            alpha: 0.1,
            theta0: 1.0,
        },
        VelocityInterpretation::FixedVelocity,
    )
    .unwrap();
    let smooth = smooth_state(
        &SmoothParams {
            delta: 1e-5,
            p0: 1.0,
            theta0: 1.0,
        },
        &consts,
    )
    .unwrap();
    for start in [cav, smooth] {
        let a = integrate(&start, &consts, &c);
        let b = integrate(&start, &consts, &c);
        assert_eq!(a, b);
    }
}

/// Final-state error of a manufactured problem with a known solution.
fn final_error(problem: usize, rtol: f64, atol: f64) -> f64 {
    let c = cfg(rtol, atol, 4.0);
    match problem {
        0 => {
            let t = integrate_system(
                &FnSystem(|_r: f64, y: &[f64; 1]| [-2.0 * y[0]]),
                0.0,
                [1.0],
                &c,
            );
            (t.y_end()[0] - (-8.0f64).exp()).abs()
        }
        1 => {
            let t = integrate_system(
                &FnSystem(|_r: f64, y: &[f64; 2]| [y[1], -y[0]]),
                0.0,
                [0.0, 1.0],
                &c,
            );
            (t.y_end()[0] - 4.0f64.sin())
                .abs()
                .max((t.y_end()[1] - 4.0f64.cos()).abs())
        }
        _ => {
            // y = 1 / (1 + r²)
            let t = integrate_system(
                &FnSystem(|r: f64, y: &[f64; 1]| [-2.0 * r * y[0] * y[0]]),
                0.0,
                [1.0],
                &c,
            );
            (t.y_end()[0] - 1.0 / 17.0).abs()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn halving_tolerances_never_hurts(problem in 0usize..3, exp in 4.0f64..9.0) {
        let rtol = 10f64.powf(-exp);
        let atol = rtol * 1e-2;
        let coarse = final_error(problem, rtol, atol);
        let fine = final_error(problem, rtol / 2.0, atol / 2.0);
        prop_assert!(fine <= coarse, "problem {problem}, rtol {rtol}: {fine} > {coarse}");
    }

    #[test]
    fn blowup_event_lands_on_threshold(rate in 0.5f64..5.0, y0 in 0.1f64..10.0, log_thr in 2.0f64..8.0) {
        let threshold = 10f64.powf(log_thr);
        let c = IntegratorConfig { blowup_threshold: threshold, ..cfg(1e-8, 1e-12, 1e3) };
        let t = integrate_system(&FnSystem(move |_r: f64, y: &[f64; 1]| [rate * y[0]]), 0.0, [y0], &c);
        prop_assert!(matches!(t.termination(), TerminationKind::BlowupEvent(_)));
        let norm = t.y_end()[0].abs();
        prop_assert!((norm - threshold).abs() <= 1e-6 * threshold, "{norm} vs {threshold}");
    }

    #[test]
    fn identical_inputs_identical_trajectories(y0 in -5.0f64..5.0, k in 0.1f64..3.0) {
        let sys = FnSystem(move |r: f64, y: &[f64; 2]| [y[1], -k * y[0] + r.cos()]);
        let c = cfg(1e-8, 1e-10, 6.0);
        prop_assert_eq!(integrate_system(&sys, 0.0, [y0, 0.0], &c), integrate_system(&sys, 0.0, [y0, 0.0], &c));
    }
}
