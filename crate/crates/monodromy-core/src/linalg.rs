//! Dense complex linear algebra on top of nalgebra: inverses, exponentials,
//! nilpotent logarithms, eigenvalues, resolvent integrals.

use crate::{Error, Mat, Result, C64};
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

pub fn scalar(n: usize, s: C64) -> Mat {
    Mat::identity(n, n) * s
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// Largest entry modulus of `a - b`.
pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Induced ∞-norm (maximum absolute row sum).
pub fn norm_inf(m: &Mat) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }
    m.clone().lu().try_inverse().ok_or(Error::SingularFamily)
}

/// Solve `a x = b`.
pub fn solve(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.nrows() == 0 {
        return Ok(b.clone());
    }
    a.clone().lu().solve(b).ok_or(Error::SingularFamily)
}

/// Matrix exponential by scaling and squaring with a [6/6] Padé approximant.
pub fn expm(a: &Mat) -> Mat {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = norm_inf(a);
    let mut s = 0i32;
    if norm > 0.5 {
        s = (norm / 0.5).log2().ceil() as i32;
    }
    let scaled = a * C64::new(0.5f64.powi(s), 0.0);
    // Padé [6/6] coefficients c_k = (12-k)! 6! / (12! k! (6-k)!).
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15_840.0,
        1.0 / 665_280.0,
    ];
    let mut num = Mat::zeros(n, n);
    let mut den = Mat::zeros(n, n);
    let mut power = identity(n);
    for (k, &c) in C.iter().enumerate() {
        num += &power * C64::new(c, 0.0);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        den += &power * C64::new(sign * c, 0.0);
        power = &power * &scaled;
    }
    let mut r = solve(&den, &num).expect("Padé denominator is invertible for small norms");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// exp of a nilpotent matrix by its finite series.
pub fn exp_nilpotent(n_mat: &Mat) -> Mat {
    let n = n_mat.nrows();
    let mut out = identity(n);
    let mut term = identity(n);
    for k in 1..=n {
        term = &term * n_mat / C64::new(k as f64, 0.0);
        out += &term;
    }
    out
}

/// log of a unipotent matrix by the finite series in `m - 1`.
pub fn log_unipotent(m: &Mat) -> Mat {
    let n = m.nrows();
    let x = m - identity(n);
    let mut out = Mat::zeros(n, n);
    let mut power = identity(n);
    for k in 1..=n {
        power = &power * &x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out += &power * C64::new(sign / k as f64, 0.0);
    }
    out
}

/// Eigenvalues via complex Schur decomposition.
pub fn eigenvalues(m: &Mat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return alloc::vec![m[(0, 0)]];
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .unwrap_or_else(|| nalgebra::linalg::Schur::new(m.clone()));
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Singular values, descending.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// 2-norm condition number.
pub fn condition_number(m: &Mat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Orthonormal basis (columns) of the dominant `rank`-dimensional column space.
pub fn range_basis(m: &Mat, rank: usize) -> Mat {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut out = Mat::zeros(m.nrows(), rank);
    for (c, &k) in idx.iter().take(rank).enumerate() {
        out.set_column(c, &u.column(k));
    }
    out
}

/// Right singular vector for the smallest singular value, together with the
/// largest and the two smallest singular values.
pub fn null_vector(m: &Mat) -> (Vec<C64>, f64, f64, f64) {
    let ncols = m.ncols();
    // Pad to at least square so the thin SVD exposes all right vectors.
    let work = if m.nrows() < ncols {
        let mut w = Mat::zeros(ncols, ncols);
        w.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        w
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let s = &svd.singular_values;
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(core::cmp::Ordering::Equal));
    let smallest = *idx.last().expect("nonempty");
    let v: Vec<C64> = (0..ncols).map(|j| vt[(smallest, j)].conj()).collect();
    let largest = s[idx[0]];
    let second = if idx.len() >= 2 { s[idx[idx.len() - 2]] } else { largest };
    (v, largest, second, s[smallest])
}

/// f(X) by the Cauchy integral over the circle |v − center| = radius, which
/// must enclose the spectrum of X inside the domain where f is holomorphic.
pub fn holomorphic_calculus<F>(f: F, x: &Mat, center: C64, radius: f64, nodes: usize) -> Result<Mat>
where
    F: Fn(C64) -> Result<C64>,
{
    let n = x.nrows();
    let mut acc = Mat::zeros(n, n);
    for k in 0..nodes {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        let v = center + e * radius;
        let resolvent = inverse(&(scalar(n, v) - x))?;
        // (1/2πi) ∮ f(v) (v − X)^{-1} dv with dv = i r e dθ.
        acc += resolvent * (f(v)? * e * radius / nodes as f64);
    }
    Ok(acc)
}

/// Riesz projector onto the generalized eigenspaces of X with eigenvalues
/// inside the given circle.
pub fn riesz_projector(x: &Mat, center: C64, radius: f64, nodes: usize) -> Result<Mat> {
    holomorphic_calculus(|_| Ok(C64::new(1.0, 0.0)), x, center, radius, nodes)
}

/// Kronecker product.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Column-stacking vectorization.
pub fn vec_of(m: &Mat) -> Mat {
    Mat::from_iterator(m.nrows() * m.ncols(), 1, m.iter().cloned())
}

pub fn unvec(v: &Mat, rows: usize, cols: usize) -> Mat {
    Mat::from_iterator(rows, cols, v.iter().cloned())
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(r, c);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), b.shape()).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = Mat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![c64(1.0, 0.5), c64(-2.0, 3.0)]));
        let e = expm(&d);
        assert!((e[(0, 0)] - c64(1.0, 0.5).exp()).norm() < 1e-13);
        assert!((e[(1, 1)] - c64(-2.0, 3.0).exp()).norm() < 1e-13);
        let mut n = Mat::zeros(2, 2);
        n[(0, 1)] = c64(3.0, 1.0);
        assert!(max_diff(&expm(&n), &exp_nilpotent(&n)) < 1e-14);
        assert!(max_diff(&log_unipotent(&exp_nilpotent(&n)), &n) < 1e-14);
    }

    #[test]
    fn cauchy_calculus_matches_exponential() {
        let m = Mat::from_row_slice(2, 2, &[c64(0.3, 0.1), c64(1.0, 0.0), c64(0.0, 0.0), c64(-0.2, 0.0)]);
        let f = holomorphic_calculus(|v| Ok(v.exp()), &m, c64(0.0, 0.0), 2.0, 64).unwrap();
        assert!(max_diff(&f, &expm(&m)) < 1e-13);
    }
}
