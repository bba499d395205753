//! Rational functions of one complex variable: scalars, matrices,
//! reconstruction from samples, and contour quadrature.

pub mod contour;
pub mod fit;
pub mod matrix;
pub mod scalar;

pub use contour::{build_contour, quad_contour, JordanCurve};
pub use fit::{fit_with_poles, rf_fit, Circle, Fit};
pub use matrix::RationalMatrix;
pub use scalar::RationalScalar;

use crate::{Error, Result};
use alloc::vec::Vec;

/// Minor of `m` with row `skip_r` and column `skip_c` removed.
fn minor(m: &RationalMatrix, skip_r: usize, skip_c: usize) -> RationalMatrix {
    let n = m.rows();
    let idx = |k: usize, skip: usize| if k < skip { k } else { k + 1 };
    RationalMatrix::from_fn(n - 1, n - 1, |i, j| m.entry(idx(i, skip_r), idx(j, skip_c)).clone())
}

/// Determinant by cofactor expansion along the sparsest row, exact in the
/// factored representation up to root finding of sums.
pub fn det(m: &RationalMatrix) -> RationalScalar {
    let n = m.rows();
    assert!(m.is_square(), "determinant of a non-square matrix");
    match n {
        0 => RationalScalar::one(),
        1 => m.entry(0, 0).clone(),
        _ => {
            let row = (0..n)
                .max_by_key(|&i| (0..n).filter(|&j| m.entry(i, j).is_zero()).count())
                .unwrap_or(0);
            let mut acc = RationalScalar::zero();
            for j in 0..n {
                let e = m.entry(row, j);
                if e.is_zero() {
                    continue;
                }
                let term = e.mul(&det(&minor(m, row, j)));
                acc = if (row + j) % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Inverse through the adjugate. Fails with `SingularFamily` when the
/// determinant vanishes identically.
pub fn rm_inverse(m: &RationalMatrix) -> Result<RationalMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
    }
    let n = m.rows();
    let d = det(m);
    if d.is_zero() {
        return Err(Error::SingularFamily);
    }
    let dinv = d.inv()?;
    if n == 1 {
        return Ok(RationalMatrix::scalar(dinv));
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // adj(M)_{ij} = (−1)^{i+j} det(minor_{ji}).
            let c = det(&minor(m, j, i));
            let c = if (i + j) % 2 == 0 { c } else { c.neg() };
            entries.push(c.mul(&dinv));
        }
    }
    Ok(RationalMatrix::from_entries(n, n, entries))
}

/// Zeros of `det m`, i.e. the poles of `m⁻¹`.
pub fn zero_set(m: &RationalMatrix) -> Vec<crate::C64> {
    det(m).zeros
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{c64, linalg};

    #[test]
    fn inverse_of_diagonal_ratio() {
        let (a, b) = (c64(0.2, 0.1), c64(-0.4, 0.3));
        let m = RationalMatrix::diagonal(alloc::vec![RationalScalar::ratio(a, b), RationalScalar::one()]);
        let inv = rm_inverse(&m).unwrap();
        assert_eq!(inv.entry(0, 0).zeros.len(), 1);
        assert!((inv.entry(0, 0).zeros[0] - b).norm() < 1e-14);
        assert!((inv.entry(0, 0).poles[0] - a).norm() < 1e-14);
        let u = c64(1.7, -0.6);
        let prod = inv.eval(u).unwrap() * m.eval(u).unwrap();
        assert!(linalg::max_diff(&prod, &linalg::identity(2)) < 1e-14);
    }

    #[test]
    fn singular_family_detected() {
        let r = RationalScalar::ratio(c64(1.0, 0.0), c64(2.0, 0.0));
        let m = RationalMatrix::from_fn(2, 2, |_, _| r.clone());
        assert_eq!(rm_inverse(&m).unwrap_err().name(), "SingularFamily");
    }
}
