//! Reconstruction of rational matrices from point values.

use super::matrix::{RationalMatrix, POLE_CLUSTER_TOL};
use super::scalar::RationalScalar;
use crate::{linalg, poly, Error, Mat, Result, C64};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Fit residual above which the caller's degree bounds are considered wrong.
pub const DEGREE_TOO_LOW: f64 = 1e-6;
/// Condition number above which the linearized fit is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn point(&self, theta: f64) -> C64 {
        self.center + C64::from_polar(self.radius, theta)
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub matrix: RationalMatrix,
    /// Largest sample misfit relative to the largest sample value.
    pub residual: f64,
    pub condition: f64,
}

/// Smallest circle (about the centroid) containing `points`, padded.
pub fn enclosing_circle(points: &[C64], pad: f64) -> Circle {
    if points.is_empty() {
        return Circle::new(C64::new(0.0, 0.0), pad.max(1.0));
    }
    let c = points.iter().fold(C64::new(0.0, 0.0), |a, &b| a + b) / points.len() as f64;
    let r = points.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    Circle::new(c, r + pad)
}

/// A radius for an origin-centred circle whose log-modulus keeps the
/// largest possible distance from every forbidden interval `[lo, hi]`
/// (intervals given in `ln|z|`). Outside the span of all intervals the
/// distance is capped at one unit of `ln|z|`.
pub fn origin_radius_avoiding(forbidden: &[(f64, f64)]) -> f64 {
    if forbidden.is_empty() {
        return 1.0;
    }
    let mut iv: Vec<(f64, f64)> = forbidden.to_vec();
    iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    // Merge overlaps.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in iv {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let mut best = (merged[0].0 - 1.0, 1.0);
    let top = merged[merged.len() - 1].1;
    if best.1 <= 1.0 {
        best = (top + 1.0, 1.0);
        // Prefer the side closer to the unit circle.
        if (merged[0].0 - 1.0).abs() < (top + 1.0).abs() {
            best = (merged[0].0 - 1.0, 1.0);
        }
    }
    for w in merged.windows(2) {
        let half = 0.5 * (w[1].0 - w[0].1);
        if half > best.1 {
            best = (0.5 * (w[0].1 + w[1].0), half);
        }
    }
    best.0.exp()
}

fn pow2_at_least(n: usize) -> usize {
    let mut m = 1;
    while m < n {
        m <<= 1;
    }
    m
}

/// Pairwise (tree) summation of complex numbers.
pub fn pairwise_sum(v: &[C64]) -> C64 {
    match v.len() {
        0 => C64::new(0.0, 0.0),
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Fit with a known denominator `∏(z − p)^m`: the numerator
/// `f(z)·D(z)` is a polynomial of degree ≤ `num_degree`, recovered by a
/// discrete Fourier transform on `circle`. Numerator roots that meet a
/// denominator root within [`POLE_CLUSTER_TOL`] cancel.
pub fn fit_with_poles<F>(
    f: F,
    rows: usize,
    cols: usize,
    poles: &[(C64, usize)],
    num_degree: usize,
    circle: Circle,
    nodes: usize,
) -> Result<Fit>
where
    F: Fn(C64) -> Result<Mat>,
{
    let den: Vec<C64> = poles.iter().flat_map(|&(p, m)| core::iter::repeat(p).take(m)).collect();
    let m = pow2_at_least(nodes.max(4 * (num_degree + 1)).max(16));
    let mut samples: Vec<Mat> = Vec::with_capacity(m);
    let mut values_max = 0.0f64;
    for k in 0..m {
        let z = circle.point(2.0 * PI * k as f64 / m as f64);
        let fz = f(z)?;
        values_max = values_max.max(linalg::max_abs(&fz));
        let dz = den.iter().fold(C64::new(1.0, 0.0), |a, &p| a * (z - p));
        samples.push(fz * dz);
    }
    // Coefficients in t = (z − c)/ρ by DFT.
    let mut coeffs: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); num_degree + 1]; rows * cols];
    let mut alias = 0.0f64;
    let mut num_max = 0.0f64;
    let upper = (m / 2).max(num_degree + 1);
    for i in 0..rows {
        for j in 0..cols {
            let e = i * cols + j;
            for d in 0..upper.min(m) {
                let terms: Vec<C64> = (0..m)
                    .map(|k| samples[k][(i, j)] * C64::from_polar(1.0, -2.0 * PI * (d * k) as f64 / m as f64))
                    .collect();
                let c = pairwise_sum(&terms) / m as f64;
                if d <= num_degree {
                    coeffs[e][d] = c;
                    num_max = num_max.max(c.norm());
                } else {
                    alias = alias.max(c.norm());
                }
            }
        }
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for e in 0..rows * cols {
        let own = coeffs[e].iter().fold(0.0f64, |a, c| a.max(c.norm()));
        if own <= 1e-13 * num_max || own == 0.0 {
            entries.push(RationalScalar::zero());
            continue;
        }
        let p = poly::trim(&coeffs[e], 1e-11);
        let deg = p.len() - 1;
        let lead = p[deg] / circle.radius.powi(deg as i32);
        // Divide out known poles that are numerator roots before root
        // finding, so repeated cancellations stay exact.
        let (p, poles) = deflate_known(&p, &den, circle);
        let zeros: Vec<C64> = poly::roots(&p).into_iter().map(|t| circle.center + t * circle.radius).collect();
        entries.push(RationalScalar::new(lead, zeros, poles).with_cancel(POLE_CLUSTER_TOL));
    }
    let matrix = RationalMatrix::from_entries(rows, cols, entries);
    // Off-grid misfit.
    let mut misfit = 0.0f64;
    for k in 0..16 {
        let z = circle.point(2.0 * PI * (k as f64 + 0.5) / 16.0 + 0.1);
        let want = f(z)?;
        misfit = misfit.max(linalg::max_diff(&matrix.eval_unchecked(z), &want));
    }
    let scale = values_max.max(1e-300);
    let residual = (misfit / scale).max(if num_max > 0.0 { alias / num_max } else { 0.0 });
    Ok(Fit { matrix, residual, condition: 1.0 })
}

/// Circle enclosing every pole with room to spare, for fits whose
/// numerator degree equals the denominator degree.
pub fn pole_enclosing_circle(poles: &[(C64, usize)]) -> Circle {
    let pts: Vec<C64> = poles.iter().map(|p| p.0).collect();
    let c = enclosing_circle(&pts, 0.0);
    let pad = (0.5 * c.radius).max(0.5);
    Circle::new(if pts.is_empty() { C64::new(0.0, 0.0) } else { c.center }, c.radius + pad)
}

/// Known-pole fit of a scalar function regular at infinity, on
/// [`pole_enclosing_circle`]; fails with `FitResidualTooLarge` above `tol`.
pub fn fit_scalar_with_poles<F>(f: F, poles: &[(C64, usize)], tol: f64) -> Result<RationalScalar>
where
    F: Fn(C64) -> Result<C64>,
{
    let degree: usize = poles.iter().map(|p| p.1).sum();
    let circle = pole_enclosing_circle(poles);
    let fit = fit_with_poles(|z| Ok(Mat::from_element(1, 1, f(z)?)), 1, 1, poles, degree, circle, 64)?;
    if fit.residual > tol {
        return Err(Error::FitResidualTooLarge(fit.residual));
    }
    Ok(fit.matrix.entry(0, 0).clone())
}

/// Matrix analogue of [`fit_scalar_with_poles`].
pub fn fit_matrix_with_poles<F>(f: F, rows: usize, cols: usize, poles: &[(C64, usize)], tol: f64) -> Result<RationalMatrix>
where
    F: Fn(C64) -> Result<Mat>,
{
    let degree: usize = poles.iter().map(|p| p.1).sum();
    let circle = pole_enclosing_circle(poles);
    let fit = fit_with_poles(f, rows, cols, poles, degree, circle, 64)?;
    if fit.residual > tol {
        return Err(Error::FitResidualTooLarge(fit.residual));
    }
    Ok(fit.matrix)
}

/// Relative remainder below which a known pole is taken as a numerator root.
const DEFLATION_TOL: f64 = 1e-8;

fn deflate_known(p: &[C64], den: &[C64], circle: Circle) -> (Vec<C64>, Vec<C64>) {
    let mut p = p.to_vec();
    let mut kept = Vec::with_capacity(den.len());
    for &d in den {
        if p.len() < 2 {
            kept.push(d);
            continue;
        }
        let t = (d - circle.center) / circle.radius;
        let (q, rem, scale) = poly::divide_linear(&p, t);
        if rem.norm() <= DEFLATION_TOL * scale {
            p = q;
        } else {
            kept.push(d);
        }
    }
    (p, kept)
}

/// Least-squares rational fit with a common denominator of degree
/// `deg_den` and numerators of degree `deg_num` (`rf_fit`).
pub fn rf_fit(samples: &[(C64, Mat)], deg_num: usize, deg_den: usize) -> Result<Fit> {
    let needed = 2 * (deg_num + deg_den) + 2;
    if samples.len() < needed {
        return Err(Error::InvalidInput(alloc::format!(
            "rf_fit needs at least {needed} samples, got {}",
            samples.len()
        )));
    }
    let (rows, cols) = samples[0].1.shape();
    let pts: Vec<C64> = samples.iter().map(|s| s.0).collect();
    let circle = {
        let c = enclosing_circle(&pts, 0.0);
        Circle::new(c.center, if c.radius > 0.0 { c.radius } else { 1.0 })
    };
    let t: Vec<C64> = pts.iter().map(|z| (z - circle.center) / circle.radius).collect();
    let k = t.len();
    let vn = Mat::from_fn(k, deg_num + 1, |r, c| t[r].powi(c as i32));
    let vq = Mat::from_fn(k, deg_den + 1, |r, c| t[r].powi(c as i32));
    let qr = vn.clone().qr();
    let qn = qr.q();
    let proj = Mat::identity(k, k) - &qn * qn.adjoint();
    let entries = rows * cols;
    let mut stacked = Mat::zeros(k * entries, deg_den + 1);
    let mut value_max = 0.0f64;
    for e in 0..entries {
        let (i, j) = (e / cols, e % cols);
        let fe = Mat::from_fn(k, 1, |r, _| samples[r].1[(i, j)]);
        value_max = value_max.max(linalg::max_abs(&fe));
        let block = &proj * Mat::from_fn(k, deg_den + 1, |r, c| fe[(r, 0)] * vq[(r, c)]);
        stacked.view_mut((e * k, 0), (k, deg_den + 1)).copy_from(&block);
    }
    let (q, smax, second, _) = linalg::null_vector(&stacked);
    let condition = if deg_den == 0 { 1.0 } else if second > 0.0 { smax / second } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let qvals: Vec<C64> = (0..k).map(|r| (0..=deg_den).map(|c| vq[(r, c)] * q[c]).sum()).collect();
    let qpoly = poly::trim(&q, 1e-12);
    let poles_t = poly::roots(&qpoly);
    let poles: Vec<C64> = poles_t.iter().map(|p| circle.center + p * circle.radius).collect();
    let qlead = qpoly[qpoly.len() - 1] / circle.radius.powi(qpoly.len() as i32 - 1);
    let r_inv_qt = |rhs: &Mat| -> Result<Mat> {
        let r = qr.r();
        linalg::solve(&r, &(qn.adjoint() * rhs))
    };
    let mut out = Vec::with_capacity(entries);
    let mut num_sizes = Vec::with_capacity(entries);
    let mut nums = Vec::with_capacity(entries);
    for e in 0..entries {
        let (i, j) = (e / cols, e % cols);
        let rhs = Mat::from_fn(k, 1, |r, _| samples[r].1[(i, j)] * qvals[r]);
        let n = r_inv_qt(&rhs)?;
        let coeffs: Vec<C64> = n.iter().cloned().collect();
        num_sizes.push(coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm())));
        nums.push(coeffs);
    }
    let num_max = num_sizes.iter().cloned().fold(0.0, f64::max);
    for e in 0..entries {
        if num_sizes[e] <= 1e-13 * num_max || num_sizes[e] == 0.0 {
            out.push(RationalScalar::zero());
            continue;
        }
        let p = poly::trim(&nums[e], 1e-11);
        let deg = p.len() - 1;
        let lead = p[deg] / circle.radius.powi(deg as i32);
        let zeros: Vec<C64> = poly::roots(&p).into_iter().map(|z| circle.center + z * circle.radius).collect();
        out.push(RationalScalar::new(lead / qlead, zeros, poles.clone()).with_cancel(POLE_CLUSTER_TOL));
    }
    let matrix = RationalMatrix::from_entries(rows, cols, out);
    let mut misfit = 0.0f64;
    for (z, f) in samples {
        misfit = misfit.max(linalg::max_diff(&matrix.eval_unchecked(*z), f));
    }
    let residual = misfit / value_max.max(1.0);
    if residual > DEGREE_TOO_LOW {
        return Err(Error::DegreeTooLow(residual));
    }
    Ok(Fit { matrix, residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn circle_samples(f: impl Fn(C64) -> C64, n: usize, r: f64) -> Vec<(C64, Mat)> {
        (0..n)
            .map(|k| {
                let z = C64::from_polar(r, 2.0 * PI * k as f64 / n as f64);
                (z, Mat::from_element(1, 1, f(z)))
            })
            .collect()
    }

    #[test]
    fn constant_fit() {
        let s = circle_samples(|_| c64(1.0, 0.0), 8, 1.0);
        let fit = rf_fit(&s, 0, 0).unwrap();
        assert!((fit.matrix.entry(0, 0).eval(c64(3.0, 1.0)).unwrap() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn recovers_planted_zero_and_pole() {
        let (alpha, beta) = (c64(0.4, 0.3), c64(-0.2, 0.9));
        let s = circle_samples(|z| (z - alpha) / (z - beta), 40, 2.0);
        let fit = rf_fit(&s, 1, 1).unwrap();
        let e = fit.matrix.entry(0, 0);
        assert!((e.zeros[0] - alpha).norm() < 1e-9);
        assert!((e.poles[0] - beta).norm() < 1e-9);
    }

    #[test]
    fn known_pole_fit_recovers_zero() {
        let (alpha, beta) = (c64(0.4, 0.3), c64(-0.2, 0.9));
        let f = |z: C64| Ok(Mat::from_element(1, 1, c64(2.0, 1.0) * (z - alpha) / (z - beta)));
        let fit = fit_with_poles(f, 1, 1, &[(beta, 1)], 1, Circle::new(c64(0.0, 0.0), 2.0), 32).unwrap();
        let e = fit.matrix.entry(0, 0);
        assert!((e.zeros[0] - alpha).norm() < 1e-12);
        assert!((e.scale - c64(2.0, 1.0)).norm() < 1e-12);
        assert!(fit.residual < 1e-13);
    }

    #[test]
    fn origin_radius_sits_in_the_widest_gap() {
        let r = origin_radius_avoiding(&[(-0.1, 0.1), (2.9, 3.1)]);
        assert!((r.ln() - 1.5).abs() < 1e-12);
    }
}
