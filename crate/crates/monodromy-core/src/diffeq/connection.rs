//! The connection matrix `S(u) = φ⁺(u)⁻¹φ⁻(u)`, a rational function of
//! `z = e^{2πiu}` regular at `0` and `∞`.

use super::FundamentalPair;
use crate::branch::exp2pi;
use crate::ratmat::fit::{fit_with_poles, origin_radius_avoiding, Circle};
use crate::ratmat::matrix::POLE_CLUSTER_TOL;
use crate::ratmat::RationalMatrix;
use crate::{linalg, Error, Mat, Result, C64, I};
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

pub const FIT_TOL: f64 = 1e-7;
pub const PERIODICITY_TOL: f64 = 1e-9;
pub const DEFAULT_FIT_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionReport {
    pub fit_residual: f64,
    pub periodicity: f64,
    /// Largest of `|S(∞) − e^{πiA₀}|` and `|S(0) − e^{−πiA₀}|`.
    pub limit_error: f64,
    /// Radius of the sampling circle in `z`.
    pub radius: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct ConnectionData {
    pub s: RationalMatrix,
    pub s_inf: Mat,
    pub s_zero: Mat,
    pub report: ConnectionReport,
}

/// Images `e^{2πip}` of `u`-plane poles, with orders added over
/// classes of poles that differ by integers.
pub fn congruence_poles(poles: &[(C64, usize)]) -> Vec<(C64, usize)> {
    let mut out: Vec<(C64, usize, C64)> = Vec::new();
    for &(p, m) in poles {
        match out.iter_mut().find(|(_, _, rep)| {
            let d = p - rep;
            (d - d.re.round()).norm() <= POLE_CLUSTER_TOL
        }) {
            Some(slot) => slot.1 += m,
            None => out.push((exp2pi(p), m, p)),
        }
    }
    out.into_iter().map(|(z, m, _)| (z, m)).collect()
}

/// Radius of an origin-centred `z`-circle keeping the widest gap from the
/// moduli `|e^{2πip}|` of the given `u`-plane points.
pub fn sampling_radius(points: &[C64]) -> f64 {
    let iv: Vec<(f64, f64)> = points.iter().map(|p| (-2.0 * PI * p.im, -2.0 * PI * p.im)).collect();
    origin_radius_avoiding(&iv)
}

/// `u` with `e^{2πiu} = z` and `Re u ∈ (−1/2, 1/2]`.
pub fn u_of_z(z: C64) -> C64 {
    z.ln() / (I * 2.0 * PI)
}

/// `S(u)` evaluated from the fundamental solutions.
pub fn s_direct(pair: &FundamentalPair, u: C64) -> Result<Mat> {
    Ok(pair.phi_plus_inv(u)? * pair.phi_minus(u)?)
}

/// `connection_matrix`: sample `S` on a horizontal line of width one,
/// fit the rational function of `z` with the denominator forced by the
/// poles of `A`, and check periodicity and the limits `S(∞) = e^{πiA₀}`,
/// `S(0) = e^{−πiA₀}`.
pub fn connection_matrix(pair: &FundamentalPair) -> Result<ConnectionData> {
    connection_matrix_with(pair, DEFAULT_FIT_NODES)
}

pub fn connection_matrix_with(pair: &FundamentalPair, nodes: usize) -> Result<ConnectionData> {
    let sys = pair.system();
    let n = sys.dim();
    let zpoles = congruence_poles(sys.poles());
    let degree: usize = zpoles.iter().map(|p| p.1).sum();
    let radius = sampling_radius(&sys.sigma());
    let circle = Circle::new(C64::new(0.0, 0.0), radius);
    let fit = fit_with_poles(|z| s_direct(pair, u_of_z(z)), n, n, &zpoles, degree, circle, nodes)?;
    if fit.residual > FIT_TOL {
        return Err(Error::FitResidualTooLarge(fit.residual));
    }
    let y = -radius.ln() / (2.0 * PI);
    let mut periodicity = 0.0f64;
    for j in 0..5 {
        let u = C64::new(j as f64 / 5.0 + 0.03, y);
        let a = s_direct(pair, u)?;
        let b = s_direct(pair, u + 1.0)?;
        periodicity = periodicity.max(linalg::max_diff(&a, &b) / linalg::max_abs(&a).max(1.0));
    }
    if periodicity > PERIODICITY_TOL {
        return Err(Error::PeriodicityViolation(periodicity));
    }
    let s = fit.matrix;
    let s_inf = s.value_at_infinity()?;
    let s_zero = s.value_at_zero()?;
    let want_inf = linalg::expm(&(&sys.a0 * (I * PI)));
    let want_zero = linalg::expm(&(&sys.a0 * (-I * PI)));
    let limit_error = linalg::max_diff(&s_inf, &want_inf).max(linalg::max_diff(&s_zero, &want_zero));
    Ok(ConnectionData {
        s,
        s_inf,
        s_zero,
        report: ConnectionReport { fit_residual: fit.residual, periodicity, limit_error, radius, nodes },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::diffeq::{fundamental_solutions, DifferenceSystem};
    use crate::ratmat::RationalScalar;

    #[test]
    fn congruent_poles_share_a_z_pole() {
        let z = congruence_poles(&[(c64(0.2, 0.0), 1), (c64(1.2, 0.0), 2), (c64(0.5, 0.0), 1)]);
        assert_eq!(z.len(), 2);
        assert_eq!(z[0].1, 3);
    }

    #[test]
    fn identity_system_has_trivial_connection() {
        let sys = DifferenceSystem::new(RationalMatrix::identity(2)).unwrap();
        let pair = fundamental_solutions(&sys, 64, 8).unwrap();
        let s = connection_matrix(&pair).unwrap();
        let v = s.s.eval(c64(0.3, 0.7)).unwrap();
        assert!(linalg::max_diff(&v, &linalg::identity(2)) < 1e-13);
    }

    #[test]
    fn scalar_closed_form() {
        let (a, b) = (c64(0.15, 0.05), c64(0.62, -0.1));
        let sys = DifferenceSystem::new(RationalMatrix::scalar(RationalScalar::ratio(a, b))).unwrap();
        let pair = fundamental_solutions(&sys, 64, 12).unwrap();
        let s = connection_matrix(&pair).unwrap();
        let (alpha, beta) = (exp2pi(a), exp2pi(b));
        for k in 0..10 {
            let z = C64::from_polar(0.3 + 0.4 * k as f64, k as f64);
            let want = (I * PI * (b - a)).exp() * (z - alpha) / (z - beta);
            assert!((s.s.eval(z).unwrap()[(0, 0)] - want).norm() < 1e-9);
        }
        assert!(s.report.limit_error < 1e-9);
    }
}
