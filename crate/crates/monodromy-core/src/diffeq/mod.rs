//! Abelian additive difference equations `φ(u+1) = A(u)φ(u)`: formal
//! solutions, canonical fundamental solutions, connection matrices and the
//! inverse monodromy problem.

mod connection;
mod fundamental;
mod inverse;
mod joint;
mod upsilon;

pub use connection::{connection_matrix, connection_matrix_with, congruence_poles, ConnectionData, ConnectionReport};
pub use fundamental::{fundamental_solutions, FundamentalPair, FundamentalReport, DEFAULT_TRUNCATION, DEFAULT_UPSILON_ORDER};
pub use inverse::{
    derivative_operator, inverse_abelian, inverse_semisimple, inverse_unipotent, log_connection, semisimple_block,
    unipotent_block, InverseReport, InverseResult, UnipotentData,
};
pub use joint::{
    block_eigenvalue, check_commuting, family_decomposition, joint_decomposition, joint_family_decomposition, jordan_split,
    JointBlock, JointDecomposition,
};
pub use upsilon::{recursion_residual, upsilon_from_taylor, upsilon_series, Upsilon};

use crate::ratmat::{self, RationalMatrix};
use crate::sample::{Sampler, DEFAULT_SEED};
use crate::{linalg, poly, Error, Mat, Result, C64};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Relative commutator size below which two values are taken to commute.
pub const COMMUTE_TOL: f64 = 1e-10;
/// Distance from `ℤ×` below which an eigenvalue difference is resonant.
pub const RESONANCE_TOL: f64 = 1e-6;

/// Margin of the eigenvalue differences of `ad(A₀)` from the nonzero
/// integers on the algebra generated by the coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonResonance {
    pub min_gap: f64,
}

impl NonResonance {
    pub fn is_valid(&self) -> bool {
        self.min_gap >= RESONANCE_TOL
    }
}

/// `A(u) = 1 + A₀u⁻¹ + A₁u⁻² + …` together with derived data.
#[derive(Debug, Clone)]
pub struct DifferenceSystem {
    pub a: RationalMatrix,
    pub a0: Mat,
    pub abelian: bool,
    pub certificate: NonResonance,
    poles: Vec<(C64, usize)>,
    zeros: Vec<C64>,
}

/// Relative size of `[X, Y]`.
pub fn relative_commutator(x: &Mat, y: &Mat) -> f64 {
    let scale = (linalg::max_abs(x) * linalg::max_abs(y)).max(1e-300);
    linalg::max_abs(&linalg::commutator(x, y)) / scale
}

/// Distance of `x` from the nonzero integers.
pub fn dist_nonzero_integers(x: C64) -> f64 {
    let f = x.re.floor();
    [f, f + 1.0, -1.0, 1.0]
        .into_iter()
        .filter(|&n| n != 0.0)
        .map(|n| (x - n).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Sample points (a seeded box around the poles, kept 0.1 away from them).
pub(crate) fn sample_points(avoid: &[C64], count: usize, seed: u64) -> Vec<C64> {
    let mut s = Sampler::new(seed);
    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (-2.0f64, 2.0f64, -2.0f64, 2.0f64);
    for p in avoid {
        lo_re = lo_re.min(p.re - 1.0);
        hi_re = hi_re.max(p.re + 1.0);
        lo_im = lo_im.min(p.im - 1.0);
        hi_im = hi_im.max(p.im + 1.0);
    }
    (0..count).map(|_| s.complex_avoiding((lo_re, hi_re), (lo_im, hi_im), avoid, 0.1)).collect()
}

impl DifferenceSystem {
    /// Validate `A(∞) = 1`, extract `A₀`, test commutativity at seeded
    /// sample pairs and certify non-resonance.
    pub fn new(a: RationalMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput("coefficient matrix must be square".into()));
        }
        let n = a.rows();
        let t = a.taylor_infinity(2)?;
        let dev = linalg::max_diff(&t[0], &linalg::identity(n));
        if dev > 1e-10 {
            return Err(Error::InvalidInput(alloc::format!("A(∞) differs from the identity by {dev:.3e}")));
        }
        let a0 = t[1].clone();
        let poles = a.poles();
        let zeros: Vec<C64> = poly::cluster(&ratmat::zero_set(&a), ratmat::matrix::POLE_CLUSTER_TOL)
            .into_iter()
            .map(|(z, _)| z)
            .collect();
        let avoid: Vec<C64> = poles.iter().map(|p| p.0).chain(zeros.iter().copied()).collect();
        let pts = sample_points(&avoid, 40, DEFAULT_SEED);
        let mut worst = 0.0f64;
        for pair in pts.chunks(2) {
            let (x, y) = (a.eval(pair[0])?, a.eval(pair[1])?);
            worst = worst.max(relative_commutator(&x, &y));
        }
        let abelian = worst < COMMUTE_TOL;
        let certificate = if abelian {
            // ad(A₀) vanishes on the commutative algebra generated by A(u).
            NonResonance { min_gap: f64::INFINITY }
        } else {
            let ev = linalg::eigenvalues(&a0);
            let mut gap = f64::INFINITY;
            for x in &ev {
                for y in &ev {
                    gap = gap.min(dist_nonzero_integers(x - y));
                }
            }
            NonResonance { min_gap: gap }
        };
        Ok(Self { a, a0, abelian, certificate, poles, zeros })
    }

    /// Require an abelian system.
    pub fn new_abelian(a: RationalMatrix) -> Result<Self> {
        let s = Self::new(a)?;
        if !s.abelian {
            return Err(Error::NotAbelian(f64::NAN));
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn eval(&self, u: C64) -> Result<Mat> {
        self.a.eval(u)
    }

    /// Poles of `A(u)` (the set 𝒫) with the largest entry order.
    pub fn poles(&self) -> &[(C64, usize)] {
        &self.poles
    }

    /// Poles of `A(u)⁻¹` (the set 𝒵).
    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    /// 𝒫 ∪ 𝒵.
    pub fn sigma(&self) -> Vec<C64> {
        self.poles.iter().map(|p| p.0).chain(self.zeros.iter().copied()).collect()
    }
}

/// `v^{X} = exp(X log v)` with the principal logarithm.
pub fn principal_power(x: &Mat, v: C64) -> Mat {
    if x.iter().all(|c| c.norm() == 0.0) {
        return linalg::identity(x.nrows());
    }
    linalg::expm(&(x * v.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::ratmat::RationalScalar;

    #[test]
    fn scalar_system_metadata() {
        let (a, b) = (c64(0.2, 0.0), c64(0.7, 0.1));
        let sys = DifferenceSystem::new(RationalMatrix::scalar(RationalScalar::ratio(a, b))).unwrap();
        assert!(sys.abelian);
        assert!((sys.a0[(0, 0)] - (b - a)).norm() < 1e-15);
        assert_eq!(sys.poles().len(), 1);
        assert!((sys.zeros()[0] - a).norm() < 1e-15);
    }

    #[test]
    fn identity_at_infinity_is_required() {
        let r = RationalMatrix::scalar(RationalScalar::constant(c64(2.0, 0.0)));
        assert!(DifferenceSystem::new(r).is_err());
    }

    #[test]
    fn integer_distance() {
        assert!((dist_nonzero_integers(c64(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((dist_nonzero_integers(c64(2.1, 0.0)) - 0.1).abs() < 1e-12);
        assert!((dist_nonzero_integers(c64(-0.9, 0.0)) - 0.1).abs() < 1e-12);
    }
}
