//! Jordan curves made of disjoint circles and trapezoidal quadrature on them.

use super::fit::Circle;
use crate::{linalg, Error, Mat, Result, C64};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

pub const DEFAULT_NODES: usize = 256;
/// Largest radius of a contour circle.
pub const MAX_RADIUS: f64 = 0.25;
/// Separation below which an include/exclude pair is considered congruent.
pub const SEPARATION_TOL: f64 = 1e-6;
/// Node-doubling change above which quadrature is declared unconverged.
pub const QUAD_TOL: f64 = 1e-7;

/// Disjoint union of circles, each traversed counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanCurve {
    pub components: Vec<Circle>,
    pub node_count: usize,
    /// Smallest distance from a circle to an excluded translate.
    pub margin: f64,
}

impl JordanCurve {
    pub fn empty(node_count: usize) -> Self {
        Self { components: Vec::new(), node_count, margin: f64::INFINITY }
    }

    pub fn with_nodes(&self, node_count: usize) -> Self {
        Self { node_count, ..self.clone() }
    }

    /// Whether `u` lies strictly inside one of the circles.
    pub fn encloses(&self, u: C64) -> bool {
        self.components.iter().any(|c| (u - c.center).norm() < c.radius)
    }
}

/// Circles enclosing every point of `include` and no nonzero integer
/// translate of `include ∪ exclude`. `radius_scale` multiplies the default
/// radius `min(0.25, separation/4)`.
pub fn build_contour(include: &[C64], exclude: &[C64], radius_scale: f64, node_count: usize) -> Result<JordanCurve> {
    if include.is_empty() {
        return Ok(JordanCurve::empty(node_count));
    }
    let all: Vec<C64> = include.iter().chain(exclude.iter()).copied().collect();
    let span = all
        .iter()
        .flat_map(|p| all.iter().map(move |q| (p.re - q.re).abs()))
        .fold(0.0f64, f64::max);
    let nmax = span.ceil() as i64 + 2;
    let forbidden: Vec<C64> = all
        .iter()
        .flat_map(|q| (-nmax..=nmax).filter(|&n| n != 0).map(move |n| q + n as f64))
        .collect();
    let mut sep = f64::INFINITY;
    for p in include {
        for f in &forbidden {
            let d = (p - f).norm();
            if d <= SEPARATION_TOL {
                return Err(Error::NonCongruentViolation(format!(
                    "{p} is an integer translate of {} (distance {d:.3e})",
                    f - (f.re - p.re).round()
                )));
            }
            sep = sep.min(d);
        }
    }
    // Distinct include points get disjoint disks.
    let centers: Vec<C64> = crate::poly::cluster(include, super::matrix::POLE_CLUSTER_TOL)
        .into_iter()
        .map(|(c, _)| c)
        .collect();
    for (k, a) in centers.iter().enumerate() {
        for b in &centers[k + 1..] {
            sep = sep.min((a - b).norm());
        }
    }
    let r = MAX_RADIUS.min(sep / 4.0) * radius_scale;
    // Start with one disk per point and merge overlapping disks.
    let mut disks: Vec<(C64, f64)> = centers.iter().map(|&p| (p, r)).collect();
    loop {
        let mut merged = false;
        'outer: for a in 0..disks.len() {
            for b in (a + 1)..disks.len() {
                let (ca, ra) = disks[a];
                let (cb, rb) = disks[b];
                let d = (ca - cb).norm();
                if d < ra + rb {
                    let (c, rad) = if d + rb <= ra {
                        (ca, ra)
                    } else if d + ra <= rb {
                        (cb, rb)
                    } else {
                        let rad = 0.5 * (d + ra + rb);
                        let c = ca + (cb - ca) * ((rad - ra) / d);
                        (c, rad)
                    };
                    disks[a] = (c, rad);
                    disks.swap_remove(b);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    let mut margin = f64::INFINITY;
    for &(c, rad) in &disks {
        for f in &forbidden {
            margin = margin.min((f - c).norm() - rad);
        }
    }
    if margin <= SEPARATION_TOL {
        return Err(Error::NonCongruentViolation(format!(
            "merged contour comes within {margin:.3e} of an excluded translate"
        )));
    }
    disks.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap_or(core::cmp::Ordering::Equal));
    Ok(JordanCurve {
        components: disks.into_iter().map(|(c, rad)| Circle::new(c, rad)).collect(),
        node_count,
        margin,
    })
}

/// Pairwise sum of equally shaped matrices.
pub fn pairwise_sum_mat(v: &[Mat]) -> Option<Mat> {
    match v.len() {
        0 => None,
        1 => Some(v[0].clone()),
        n => {
            let (a, b) = v.split_at(n / 2);
            Some(pairwise_sum_mat(a)? + pairwise_sum_mat(b)?)
        }
    }
}

/// `∮_C f(u) du = (1/2πi)∫_C f(u) du` by the trapezoidal rule, together with
/// the change against the rule on half the nodes.
pub fn quad_contour_delta<F>(f: F, curve: &JordanCurve, rows: usize, cols: usize) -> Result<(Mat, f64)>
where
    F: Fn(C64) -> Result<Mat>,
{
    let n = curve.node_count.max(2);
    let mut fine_parts = Vec::with_capacity(curve.components.len());
    let mut coarse_parts = Vec::with_capacity(curve.components.len());
    for c in &curve.components {
        let mut terms = Vec::with_capacity(n);
        for k in 0..n {
            let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            terms.push(f(c.center + e * c.radius)? * (e * c.radius));
        }
        let even: Vec<Mat> = terms.iter().step_by(2).cloned().collect();
        fine_parts.push(pairwise_sum_mat(&terms).expect("nonempty") * C64::new(1.0 / n as f64, 0.0));
        coarse_parts.push(pairwise_sum_mat(&even).expect("nonempty") * C64::new(2.0 / n as f64, 0.0));
    }
    let fine = pairwise_sum_mat(&fine_parts).unwrap_or_else(|| Mat::zeros(rows, cols));
    let coarse = pairwise_sum_mat(&coarse_parts).unwrap_or_else(|| Mat::zeros(rows, cols));
    let delta = linalg::max_diff(&fine, &coarse);
    Ok((fine, delta))
}

/// [`quad_contour_delta`] failing with `NotConverged` when the half-node
/// rule disagrees by more than [`QUAD_TOL`] relative to the result size.
pub fn quad_contour<F>(f: F, curve: &JordanCurve, rows: usize, cols: usize) -> Result<Mat>
where
    F: Fn(C64) -> Result<Mat>,
{
    let (v, delta) = quad_contour_delta(f, curve, rows, cols)?;
    if delta > QUAD_TOL * linalg::max_abs(&v).max(1.0) {
        return Err(Error::NotConverged(delta));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn scalar(v: C64) -> Mat {
        Mat::from_element(1, 1, v)
    }

    #[test]
    fn residue_of_simple_pole() {
        let p = c64(0.3, 0.1);
        let curve = build_contour(&[p], &[], 1.0, 64).unwrap();
        let v = quad_contour(|u| Ok(scalar(1.0 / (u - p))), &curve, 1, 1).unwrap();
        assert!((v[(0, 0)] - 1.0).norm() < 1e-14);
        let w = quad_contour(|u| Ok(scalar(u * u / (u - p))), &curve, 1, 1).unwrap();
        assert!((w[(0, 0)] - p * p).norm() < 1e-14);
        let z = quad_contour(|_| Ok(scalar(c64(1.0, 0.0))), &curve, 1, 1).unwrap();
        assert!(z[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn congruent_points_are_rejected() {
        let e = build_contour(&[c64(0.3, 0.0), c64(1.3, 0.0)], &[], 1.0, 64).unwrap_err();
        assert_eq!(e.name(), "NonCongruentViolation");
    }

    #[test]
    fn two_disks_for_separated_points() {
        let (a, b) = (c64(0.1, 0.0), c64(0.25, 0.0));
        let curve = build_contour(&[a, b], &[], 1.0, 64).unwrap();
        assert_eq!(curve.components.len(), 2);
        let bound = ((a - b).re - (a - b).re.round()).abs() / 4.0;
        for c in &curve.components {
            assert!(c.radius <= bound + 1e-15);
        }
    }
}
