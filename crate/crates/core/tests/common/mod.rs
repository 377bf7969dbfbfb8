//! Helpers shared by the integration tests.

#![allow(dead_code)]

use shrinkers::model::{PhysConsts, ProfileState};
use twofloat::TwoFloat;

/// `C_V = R = κ = λ = 1`, `μ = 2`, `d = 3`.
pub fn reference_consts() -> PhysConsts {
    PhysConsts::new(1.0, 1.0, 1.0, 2.0, 1.0, 3).unwrap()
}

/// `C_V = R = κ = μ = 1`, `λ = 0`, `d = 1`.
pub fn alt_consts() -> PhysConsts {
    PhysConsts::new(1.0, 1.0, 1.0, 1.0, 0.0, 1).unwrap()
}

/// Double-double: about 32 significant digits, enough to make the
/// cancellation in the energy equation harmless at f64 output precision.
type Q = TwoFloat;

fn q(x: f64) -> Q {
    Q::from(x)
}

/// Unreduced equations: continuity, momentum and total energy in
/// conservative form, evaluated with trial values `x = (P', U'', Θ'')`.
fn conservative_residuals(s: &ProfileState, c: &PhysConsts, x: &[Q; 3]) -> [Q; 3] {
    let (r, p, u, v, th, ts) = (q(s.r), q(s.p), q(s.u), q(s.v), q(s.theta), q(s.s));
    let (cv, rg, kappa, mu, lambda) = (q(c.c_v), q(c.r_gas), q(c.kappa), q(c.mu), q(c.lambda));
    let k = q(f64::from(c.d - 1));
    let two = q(2.0);
    let half = q(0.5);
    let nu = two * mu + lambda;
    let (dp, ddu, ddth) = (x[0], x[1], x[2]);

    let e1 = half * r * dp + dp * u + p * (v + k * u / r);

    let pu_prime = dp * u + p * v;
    let pu2_prime = dp * u * u + two * p * u * v;
    let prt_prime = rg * (dp * th + p * ts);
    let lap = ddu + k / r * v - k / (r * r) * u;
    let e2 =
        half * p * u + half * r * pu_prime + pu2_prime + k / r * p * u * u + prt_prime - nu * lap;

    let e = half * u * u + cv * th;
    let e_prime = u * v + cv * ts;
    let pe_prime = dp * e + p * e_prime;
    let flux = u * p * e + u * p * rg * th;
    let flux_prime =
        v * p * e + u * dp * e + u * p * e_prime + rg * (v * p * th + u * dp * th + u * p * ts);
    let div = v + k * u / r;
    let work = two * mu * (v * v + k * u * u / (r * r)) + lambda * div * div + nu * lap * u;
    let e3 = p * e + half * r * pe_prime + flux_prime + k / r * flux
        - kappa * (ddth + k / r * ts)
        - work;
    [e1, e2, e3]
}

/// Derivatives obtained by solving the unreduced equations in double-double
/// arithmetic: the residual is affine in `(P', U'', Θ'')`, so one 3x3 solve
/// suffices.
pub fn oracle_rhs(s: &ProfileState, c: &PhysConsts) -> [f64; 5] {
    let zero = [q(0.0); 3];
    let b = conservative_residuals(s, c, &zero);
    let mut m = [[q(0.0); 3]; 3];
    for j in 0..3 {
        let mut e = zero;
        e[j] = q(1.0);
        let col = conservative_residuals(s, c, &e);
        for i in 0..3 {
            m[i][j] = col[i] - b[i];
        }
    }
    let x = solve3(m, [-b[0], -b[1], -b[2]]);
    [f64::from(x[0]), s.v, f64::from(x[1]), s.s, f64::from(x[2])]
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[Q; 3]; 3], mut b: [Q; 3]) -> [Q; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                let t = f * m[col][k];
                m[row][k] -= t;
            }
            let t = f * b[col];
            b[row] -= t;
        }
    }
    let mut x = [q(0.0); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Max over components of `|a - b| / max(|b|, 1)`.
pub fn rel_diff(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}
