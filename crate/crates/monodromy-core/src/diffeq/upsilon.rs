//! The formal solution `Υ(u)u^{A₀}`, `Υ(u) = 1 + Υ₁u⁻¹ + Υ₂u⁻² + …`.

use super::{DifferenceSystem, RESONANCE_TOL};
use crate::{linalg, Error, Mat, Result, C64};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Truncated asymptotic series `Σ_{j<k} Υ_j u^{-j}`.
#[derive(Debug, Clone)]
pub struct Upsilon {
    pub coeffs: Vec<Mat>,
}

impl Upsilon {
    pub fn eval(&self, u: C64) -> Mat {
        let w = u.inv();
        let n = self.coeffs[0].nrows();
        let mut acc = Mat::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc
    }
}

/// `binom(−k, j) = (−1)^j C(k+j−1, j)`.
fn binom_neg(k: usize, j: usize) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let mut c = 1.0;
    for t in 0..j {
        c *= (k + t) as f64 / (t + 1) as f64;
    }
    if j % 2 == 1 {
        -c
    } else {
        c
    }
}

/// Coefficients of `(1 + w)^{−A₀} = Σ_r (−1)^r A₀(A₀+1)⋯(A₀+r−1)/r! w^r`.
fn power_series_neg(a0: &Mat, k: usize) -> Vec<Mat> {
    let n = a0.nrows();
    let mut out = Vec::with_capacity(k);
    let mut term = linalg::identity(n);
    out.push(term.clone());
    for r in 1..k {
        let shifted = a0 + linalg::identity(n) * C64::new((r - 1) as f64, 0.0);
        term = term * shifted * C64::new(-1.0 / r as f64, 0.0);
        out.push(term.clone());
    }
    out
}

/// Solve `(ad(A₀) + s)Y = R` through the Kronecker form.
fn solve_shifted_ad(a0: &Mat, s: f64, rhs: &Mat, order: usize) -> Result<Mat> {
    let n = a0.nrows();
    let ev = linalg::eigenvalues(a0);
    let mut gap = f64::INFINITY;
    for x in &ev {
        for y in &ev {
            gap = gap.min((x - y + s).norm());
        }
    }
    if gap < RESONANCE_TOL {
        return Err(Error::ResonantSystem { order, gap });
    }
    let id = linalg::identity(n);
    // vec(A₀Y − YA₀ + sY) = (I⊗A₀ − A₀ᵀ⊗I + s) vec(Y), column-major.
    let op = linalg::kron(&id, a0) - linalg::kron(&a0.transpose(), &id)
        + linalg::identity(n * n) * C64::new(s, 0.0);
    let y = linalg::solve(&op, &linalg::vec_of(rhs))?;
    Ok(linalg::unvec(&y, n, n))
}

/// `Υ₀ … Υ_{k−1}` from the Taylor coefficients `T₀ = 1, T₁ = A₀, …` of
/// `A` at infinity (at least `k + 1` of them), solving the recursion
/// `Υ(u+1) = A(u)Υ(u)(1+1/u)^{−A₀}` order by order. For commuting data
/// the right-hand side lies in the commutative algebra and the solve
/// reduces to a division.
pub fn upsilon_from_taylor(taylor: &[Mat], a0: &Mat, abelian: bool, k: usize) -> Result<Vec<Mat>> {
    let n = a0.nrows();
    let k = k.max(1);
    assert!(taylor.len() > k, "need k + 1 Taylor coefficients");
    let b = power_series_neg(a0, k + 1);
    let mut ys: Vec<Mat> = vec![linalg::identity(n)];
    for order in 2..=k {
        // Order `order` in w = 1/u determines Υ_{order−1}.
        let mut rhs = Mat::zeros(n, n);
        for (j, y) in ys.iter().enumerate() {
            rhs += y * C64::new(binom_neg(j, order - j), 0.0);
        }
        for m in 0..=order {
            for (l, y) in ys.iter().enumerate() {
                if m + l > order {
                    break;
                }
                let r = order - m - l;
                rhs -= &taylor[m] * y * &b[r];
            }
        }
        let s = (order - 1) as f64;
        let y = if abelian { rhs / C64::new(s, 0.0) } else { solve_shifted_ad(a0, s, &rhs, order)? };
        ys.push(y);
    }
    Ok(ys)
}

/// `upsilon_series`: the first `k` coefficients of Υ for `sys`.
pub fn upsilon_series(sys: &DifferenceSystem, k: usize) -> Result<Vec<Mat>> {
    if !sys.abelian && !sys.certificate.is_valid() {
        return Err(Error::ResonantSystem { order: 0, gap: sys.certificate.min_gap });
    }
    let taylor = sys.a.taylor_infinity(k + 1)?;
    upsilon_from_taylor(&taylor, &sys.a0, sys.abelian, k)
}

/// `‖Υ(u+1) − A(u)Υ(u)(1+1/u)^{−A₀}‖` for a truncated series.
pub fn recursion_residual(sys: &DifferenceSystem, ups: &Upsilon, u: C64) -> Result<f64> {
    let lhs = ups.eval(u + 1.0);
    let corr = linalg::expm(&(&sys.a0 * (-(C64::new(1.0, 0.0) + u.inv()).ln())));
    let rhs = sys.eval(u)? * ups.eval(u) * corr;
    Ok(linalg::max_diff(&lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::{RationalMatrix, RationalScalar};
    use crate::c64;

    #[test]
    fn binomials() {
        assert_eq!(binom_neg(1, 1), -1.0);
        assert_eq!(binom_neg(2, 2), 3.0);
        assert_eq!(binom_neg(0, 3), 0.0);
    }

    #[test]
    fn trivial_system_has_trivial_series() {
        let sys = DifferenceSystem::new(RationalMatrix::identity(2)).unwrap();
        let ys = upsilon_series(&sys, 3).unwrap();
        assert_eq!(ys.len(), 3);
        assert!(linalg::max_abs(&ys[1]) == 0.0 && linalg::max_abs(&ys[2]) == 0.0);
    }

    #[test]
    fn residual_decays_with_the_truncation_order() {
        let sys = DifferenceSystem::new(RationalMatrix::scalar(RationalScalar::ratio(c64(0.3, 0.0), c64(0.7, 0.2))))
            .unwrap();
        for k in [2usize, 3, 4] {
            let ups = Upsilon { coeffs: upsilon_series(&sys, k).unwrap() };
            let r50 = recursion_residual(&sys, &ups, c64(50.0, 0.0)).unwrap();
            let r100 = recursion_residual(&sys, &ups, c64(100.0, 0.0)).unwrap();
            let slope = (r50 / r100).log2();
            assert!((slope - (k + 1) as f64).abs() < 0.2, "k={k} slope={slope}");
        }
    }
}
