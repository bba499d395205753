//! Complex Gamma, log-Gamma, digamma and Gamma ratios.
//!
//! `gamma` uses a Lanczos approximation (g = 7, nine coefficients) with the
//! reflection formula on the left half-plane. `log_gamma` and `digamma` are
//! computed independently from their asymptotic series after an upward
//! recurrence shift, so the two families can be checked against each other.

use crate::{Error, Result, C64};
use alloc::format;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Distance below which an argument counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// B_{2k} for k = 1..=10.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174_611.0 / 330.0,
];

fn nonpositive_integer_distance(z: C64) -> f64 {
    if z.re > 0.5 {
        return f64::INFINITY;
    }
    let n = z.re.round().min(0.0);
    (z - C64::new(n, 0.0)).norm()
}

fn check_pole(z: C64) -> Result<()> {
    if nonpositive_integer_distance(z) < POLE_TOL {
        Err(Error::PoleAtNonPositiveInteger(format!("{z}")))
    } else {
        Ok(())
    }
}

fn lanczos_right(z: C64) -> C64 {
    // Valid for Re z >= 0.5.
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let log_part = (z + 0.5) * t.ln() - t;
    (2.0 * PI).sqrt() * log_part.exp() * x
}

/// Γ(z).
pub fn gamma(z: C64) -> Result<C64> {
    check_pole(z)?;
    if z.re < 0.5 {
        let s = (z * PI).sin();
        Ok(PI / (s * lanczos_right(1.0 - z)))
    } else {
        Ok(lanczos_right(z))
    }
}

fn stirling_log_gamma(z: C64) -> C64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = C64::new(0.0, 0.0);
    for (k, &b) in BERNOULLI.iter().enumerate() {
        let k = (k + 1) as f64;
        series += term * (b / (2.0 * k * (2.0 * k - 1.0)));
        term *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series
}

/// Principal branch of log Γ(z), analytic on ℂ ∖ (−∞, 0].
pub fn log_gamma(z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::BranchCut(format!("{z}")));
    }
    const SHIFT_TO: f64 = 10.0;
    let mut w = z;
    let mut acc = C64::new(0.0, 0.0);
    while w.re < SHIFT_TO {
        acc += w.ln();
        w += 1.0;
    }
    Ok(stirling_log_gamma(w) - acc)
}

/// ψ(z) = Γ′(z)/Γ(z).
pub fn digamma(z: C64) -> Result<C64> {
    check_pole(z)?;
    const SHIFT_TO: f64 = 10.0;
    let mut w = z;
    let mut acc = C64::new(0.0, 0.0);
    while w.re <= SHIFT_TO {
        acc += w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut term = inv2;
    let mut series = C64::new(0.0, 0.0);
    for (k, &b) in BERNOULLI.iter().take(8).enumerate() {
        let k2 = 2.0 * (k + 1) as f64;
        series += term * (b / k2);
        term *= inv2;
    }
    Ok(w.ln() - 0.5 * inv - series - acc)
}

/// A logarithm of Γ(x) valid off the poles, used only through differences.
fn log_gamma_any(x: C64) -> Result<C64> {
    check_pole(x)?;
    if x.re >= 0.5 {
        log_gamma(x)
    } else {
        let s = (x * PI).sin();
        Ok(C64::new(PI.ln(), 0.0) - s.ln() - log_gamma(1.0 - x)?)
    }
}

/// Γ(u−a)/Γ(u−b), evaluated in log space so that large |u| does not overflow.
pub fn gamma_ratio(u: C64, a: C64, b: C64) -> Result<C64> {
    let x = u - a;
    let y = u - b;
    check_pole(x)?;
    check_pole(y)?;
    if x == y {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok((log_gamma_any(x)? - log_gamma_any(y)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn trivial_values() {
        assert!(close(gamma(c64(1.0, 0.0)).unwrap(), c64(1.0, 0.0), 1e-14));
        assert!(close(gamma(c64(0.5, 0.0)).unwrap(), c64(PI.sqrt(), 0.0), 1e-14));
        assert!(log_gamma(c64(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma(c64(2.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(close(digamma(c64(1.0, 0.0)).unwrap(), c64(-EULER_GAMMA, 0.0), 1e-14));
        assert!(close(digamma(c64(2.0, 0.0)).unwrap(), c64(1.0 - EULER_GAMMA, 0.0), 1e-14));
        assert!(close(gamma_ratio(c64(5.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)).unwrap(), c64(1.0, 0.0), 0.0));
        assert!(close(gamma_ratio(c64(3.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)).unwrap(), c64(0.5, 0.0), 1e-14));
    }

    #[test]
    fn poles_and_cuts_are_rejected() {
        assert!(matches!(gamma(c64(-3.0, 0.0)), Err(Error::PoleAtNonPositiveInteger(_))));
        assert!(matches!(gamma(c64(0.0, 0.0)), Err(Error::PoleAtNonPositiveInteger(_))));
        assert!(matches!(digamma(c64(-1.0, 1e-13)), Err(Error::PoleAtNonPositiveInteger(_))));
        assert!(matches!(log_gamma(c64(-2.5, 0.0)), Err(Error::BranchCut(_))));
        assert!(gamma_ratio(c64(1.0, 0.0), c64(1.0, 0.0), c64(0.3, 0.0)).is_err());
    }
}
