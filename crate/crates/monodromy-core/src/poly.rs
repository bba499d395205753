//! Dense univariate complex polynomials (coefficients in ascending order).

use crate::{linalg, Mat, C64};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub fn eval(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default())
        .collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|&c| c * s).collect()
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        p = mul(&p, &[-r, C64::new(1.0, 0.0)]);
    }
    p
}

/// Synthetic division `p(x) = (x − r)·q(x) + rem`, returning `(q, rem)`
/// and the evaluation scale `Σ|p_k||r|^k` against which `rem` is judged.
pub fn divide_linear(p: &[C64], r: C64) -> (Vec<C64>, C64, f64) {
    let deg = p.len().saturating_sub(1);
    if p.is_empty() {
        return (Vec::new(), C64::new(0.0, 0.0), 0.0);
    }
    let mut q = vec![C64::new(0.0, 0.0); deg];
    let mut carry = C64::new(0.0, 0.0);
    for k in (1..=deg).rev() {
        carry = p[k] + r * carry;
        q[k - 1] = carry;
    }
    let rem = p[0] + r * carry;
    let scale = p.iter().rev().fold(0.0f64, |acc, c| acc * r.norm() + c.norm());
    (q, rem, scale)
}

/// Drop leading coefficients below `rel_tol` times the largest coefficient.
pub fn trim(p: &[C64], rel_tol: f64) -> Vec<C64> {
    let big = p.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let mut n = p.len();
    while n > 0 && p[n - 1].norm() <= rel_tol * big {
        n -= 1;
    }
    p[..n].to_vec()
}

/// Roots of a polynomial with nonzero leading coefficient: companion-matrix
/// eigenvalues followed by a few guarded Newton steps on the original
/// coefficients.
pub fn roots(p: &[C64]) -> Vec<C64> {
    let deg = p.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    if deg == 1 {
        return vec![-p[0] / lead];
    }
    let mut comp = Mat::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -p[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    let mut rs = linalg::eigenvalues(&comp);
    let dp = derivative(p);
    for r in rs.iter_mut() {
        for _ in 0..3 {
            let f = eval(p, *r);
            let df = eval(&dp, *r);
            if df.norm() == 0.0 {
                break;
            }
            let cand = *r - f / df;
            if eval(p, cand).norm() < f.norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }
    rs
}

/// Group nearly equal points (within `tol`) and return (mean, multiplicity).
pub fn cluster(points: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut used = vec![false; points.len()];
    let mut out = Vec::new();
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![points[i]];
        // Grow the cluster transitively.
        let mut k = 0;
        while k < members.len() {
            let c = members[k];
            for j in 0..points.len() {
                if !used[j] && (points[j] - c).norm() <= tol {
                    used[j] = true;
                    members.push(points[j]);
                }
            }
            k += 1;
        }
        let n = members.len();
        let mean = members.iter().fold(C64::new(0.0, 0.0), |a, &b| a + b) / n as f64;
        out.push((mean, n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn roots_of_planted_polynomial() {
        let planted = [c64(0.3, 0.1), c64(-1.0, 2.0), c64(4.0, 0.0)];
        let p = scale(&from_roots(&planted), c64(2.0, -1.0));
        let mut found = roots(&p);
        for r in planted {
            let (k, _) = found
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - r).norm().partial_cmp(&(b.1 - r).norm()).unwrap())
                .unwrap();
            assert!((found[k] - r).norm() < 1e-12);
            found.remove(k);
        }
    }

    #[test]
    fn clustering_merges_jitter() {
        let pts = [c64(1.0, 0.0), c64(1.0 + 1e-9, 0.0), c64(2.0, 0.0)];
        let cl = cluster(&pts, 1e-7);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].1, 2);
    }
}
