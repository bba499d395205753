//! Logarithm domains `Π` with branch maps `log_Π : ℂ× → Π`, normalised so
//! that `exp(2πi·log_Π z) = z`.

use crate::{Error, Result, C64};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Tolerance for membership at the closed edge of a strip.
const EDGE_TOL: f64 = 1e-9;
/// Tolerance for non-congruence of stored logarithms.
pub const NONCONGRUENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum BranchMode {
    /// For non-real `ħ`: `{sħ + t : s ∈ ℝ, t ∈ [left, left+1)}`.
    /// For real `ħ`: `{u : Re u ∈ [left, left+1)}`.
    StandardStrip { left: f64 },
    /// A finite set of admissible logarithms.
    Custom(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogBranch {
    pub hbar: C64,
    pub mode: BranchMode,
}

/// `e^{2πiu}`.
pub fn exp2pi(u: C64) -> C64 {
    (C64::new(0.0, 2.0 * PI) * u).exp()
}

impl LogBranch {
    /// The strip with its default left edge: `0` for non-real `ħ`, `−|ħ|`
    /// for real `ħ`.
    pub fn standard(hbar: C64) -> Self {
        let left = if is_real(hbar) { -hbar.re.abs() } else { 0.0 };
        Self::strip(hbar, left)
    }

    pub fn strip(hbar: C64, left: f64) -> Self {
        Self { hbar, mode: BranchMode::StandardStrip { left } }
    }

    pub fn custom(hbar: C64, points: Vec<C64>) -> Self {
        Self { hbar, mode: BranchMode::Custom(points) }
    }

    /// Real coordinate `t` of `u` across the strip.
    fn transverse(&self, u: C64) -> f64 {
        if is_real(self.hbar) {
            u.re
        } else {
            let s = u.im / self.hbar.im;
            u.re - s * self.hbar.re
        }
    }

    pub fn contains(&self, u: C64) -> bool {
        match &self.mode {
            BranchMode::StandardStrip { left } => {
                let t = self.transverse(u);
                t >= left - EDGE_TOL && t < left + 1.0 - EDGE_TOL
            }
            BranchMode::Custom(points) => points.iter().any(|p| (p - u).norm() <= EDGE_TOL.sqrt()),
        }
    }

    /// `log_Π z`.
    pub fn log(&self, z: C64) -> Result<C64> {
        if z.norm() == 0.0 || !z.norm().is_finite() {
            return Err(Error::BranchOutOfDomain(format!("{z} has no logarithm")));
        }
        let w = z.ln() / C64::new(0.0, 2.0 * PI);
        match &self.mode {
            BranchMode::StandardStrip { left } => {
                let t = self.transverse(w);
                let n = (left - t + EDGE_TOL).ceil();
                let out = w + n;
                if self.contains(out) {
                    Ok(out)
                } else {
                    Err(Error::BranchOutOfDomain(format!("log of {z} misses the strip")))
                }
            }
            BranchMode::Custom(points) => points
                .iter()
                .copied()
                .find(|p| (exp2pi(*p) - z).norm() <= 1e-9 * z.norm().max(1.0))
                .ok_or_else(|| Error::BranchOutOfDomain(format!("no admissible logarithm of {z}"))),
        }
    }

    pub fn exp(&self, u: C64) -> C64 {
        exp2pi(u)
    }

    /// Pairwise differences of `points` must avoid nonzero integers.
    pub fn check_noncongruent(points: &[C64]) -> Result<()> {
        for (k, a) in points.iter().enumerate() {
            for b in &points[k + 1..] {
                let d = a - b;
                let n = d.re.round();
                if n != 0.0 && (d - n).norm() < NONCONGRUENCE_TOL {
                    return Err(Error::NonCongruentPi(format!("{a} and {b} differ by {n}")));
                }
            }
        }
        Ok(())
    }

    /// Self-test of the branch on its own admissible points.
    pub fn validate(&self) -> Result<()> {
        match &self.mode {
            BranchMode::StandardStrip { .. } => Ok(()),
            BranchMode::Custom(points) => Self::check_noncongruent(points),
        }
    }
}

pub(crate) fn is_real(h: C64) -> bool {
    h.im.abs() <= 1e-14 * h.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn strip_log_inverts_exp() {
        let b = LogBranch::standard(c64(0.3, 0.0));
        for a in [0.1, 0.25, 0.35, -0.2, 0.69] {
            let u = c64(a, 0.05);
            assert!((b.log(exp2pi(u)).unwrap() - u).norm() < 1e-13);
        }
        let c = LogBranch::standard(c64(0.3, 0.4));
        let u = c64(0.5, 0.2) + c64(0.3, 0.4) * 2.0;
        assert!((c.log(exp2pi(u)).unwrap() - u).norm() < 1e-12);
    }

    #[test]
    fn point_outside_strip_is_not_contained() {
        let b = LogBranch::standard(c64(0.3, 0.0));
        assert!(b.contains(c64(0.1, 0.0)));
        assert!(!b.contains(c64(1.1, 0.0)));
    }

    #[test]
    fn custom_branch() {
        let b = LogBranch::custom(c64(0.3, 0.0), alloc::vec![c64(2.1, 0.0)]);
        assert!((b.log(exp2pi(c64(0.1, 0.0))).unwrap() - 2.1).norm() < 1e-15);
        assert!(b.log(c64(-1.0, 0.0)).is_err());
        assert!(LogBranch::check_noncongruent(&[c64(0.1, 0.0), c64(1.1, 0.0)]).is_err());
    }
}
