use crate::{poly, Error, Result, C64};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Zeros and poles closer than this cancel.
pub const CANCEL_TOL: f64 = 1e-9;

/// Evaluation refuses points closer than this to a pole.
pub const NEAR_POLE_TOL: f64 = 1e-10;

/// `scale · ∏(u − zeros) / ∏(u − poles)`.
///
/// The zero function is `scale = 0` with empty root lists.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalScalar {
    pub scale: C64,
    pub zeros: Vec<C64>,
    pub poles: Vec<C64>,
}

impl Default for RationalScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl RationalScalar {
    pub fn zero() -> Self {
        Self { scale: C64::new(0.0, 0.0), zeros: Vec::new(), poles: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self { scale: c, zeros: Vec::new(), poles: Vec::new() }.normalized()
    }

    /// `(u − a)/(u − b)`.
    pub fn ratio(a: C64, b: C64) -> Self {
        Self::new(C64::new(1.0, 0.0), vec![a], vec![b])
    }

    /// `c/(u − p)^order`.
    pub fn pole_term(c: C64, p: C64, order: usize) -> Self {
        Self::new(c, Vec::new(), vec![p; order])
    }

    pub fn new(scale: C64, zeros: Vec<C64>, poles: Vec<C64>) -> Self {
        let mut r = Self { scale, zeros, poles };
        r.cancel(CANCEL_TOL);
        r.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.scale == C64::new(0.0, 0.0) {
            self.zeros.clear();
            self.poles.clear();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.scale == C64::new(0.0, 0.0)
    }

    /// Remove zero/pole pairs closer than `tol`.
    pub fn cancel(&mut self, tol: f64) {
        let mut i = 0;
        while i < self.zeros.len() {
            let z = self.zeros[i];
            let best = self
                .poles
                .iter()
                .enumerate()
                .map(|(k, p)| (k, (p - z).norm()))
                .filter(|&(_, d)| d <= tol)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
            if let Some((k, _)) = best {
                self.poles.swap_remove(k);
                self.zeros.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }

    pub fn with_cancel(mut self, tol: f64) -> Self {
        self.cancel(tol);
        self
    }

    /// Distance from `u` to the nearest pole.
    pub fn pole_distance(&self, u: C64) -> f64 {
        self.poles.iter().map(|p| (p - u).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn eval_unchecked(&self, u: C64) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let mut v = self.scale;
        for z in &self.zeros {
            v *= u - z;
        }
        for p in &self.poles {
            v /= u - p;
        }
        v
    }

    pub fn eval(&self, u: C64) -> Result<C64> {
        let d = self.pole_distance(u);
        if d <= NEAR_POLE_TOL {
            return Err(Error::NearPole { distance: d });
        }
        Ok(self.eval_unchecked(u))
    }

    /// `deg(denominator) − deg(numerator)`; non-negative iff regular at ∞.
    pub fn order_at_infinity(&self) -> isize {
        if self.is_zero() {
            return isize::MAX;
        }
        self.poles.len() as isize - self.zeros.len() as isize
    }

    pub fn value_at_infinity(&self) -> Result<C64> {
        match self.order_at_infinity() {
            0 => Ok(self.scale),
            o if o > 0 => Ok(C64::new(0.0, 0.0)),
            _ => Err(Error::NotRegular),
        }
    }

    pub fn value_at_zero(&self) -> Result<C64> {
        if self.poles.iter().any(|p| p.norm() <= NEAR_POLE_TOL) {
            return Err(Error::NotRegular);
        }
        Ok(self.eval_unchecked(C64::new(0.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        Self::new(self.scale * other.scale, zeros, poles)
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { scale: self.scale * c, zeros: self.zeros.clone(), poles: self.poles.clone() }.normalized()
    }

    pub fn neg(&self) -> Self {
        self.scaled(C64::new(-1.0, 0.0))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::SingularFamily);
        }
        Ok(Self { scale: self.scale.inv(), zeros: self.poles.clone(), poles: self.zeros.clone() })
    }

    /// Numerator coefficients `scale·∏(u − z)`, ascending.
    pub fn numerator(&self) -> Vec<C64> {
        poly::scale(&poly::from_roots(&self.zeros), self.scale)
    }

    /// Monic denominator `∏(u − p)`, ascending.
    pub fn denominator(&self) -> Vec<C64> {
        poly::from_roots(&self.poles)
    }

    /// Sum over a common denominator; the new numerator is factored
    /// numerically.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // lcm of the two pole multisets.
        let mut matched = vec![false; self.poles.len()];
        let mut only_other = Vec::new();
        for &p in &other.poles {
            let hit = self
                .poles
                .iter()
                .enumerate()
                .find(|(k, q)| !matched[*k] && (*q - p).norm() <= CANCEL_TOL)
                .map(|(k, _)| k);
            match hit {
                Some(k) => matched[k] = true,
                None => only_other.push(p),
            }
        }
        let only_self: Vec<C64> =
            self.poles.iter().zip(&matched).filter(|(_, m)| !**m).map(|(p, _)| *p).collect();
        // Zeros shared by both terms are zeros of the sum; keeping them out of
        // the root finder avoids the precision loss of repeated roots.
        let mut zmatched = vec![false; other.zeros.len()];
        let mut common = Vec::new();
        let mut rest_self = Vec::new();
        for &z in &self.zeros {
            let hit = other
                .zeros
                .iter()
                .enumerate()
                .find(|(k, w)| !zmatched[*k] && (*w - z).norm() <= CANCEL_TOL)
                .map(|(k, _)| k);
            match hit {
                Some(k) => {
                    zmatched[k] = true;
                    common.push(z);
                }
                None => rest_self.push(z),
            }
        }
        let rest_other: Vec<C64> =
            other.zeros.iter().zip(&zmatched).filter(|(_, m)| !**m).map(|(z, _)| *z).collect();
        let na = poly::scale(&poly::from_roots(&rest_self), self.scale);
        let nb = poly::scale(&poly::from_roots(&rest_other), other.scale);
        let na = poly::mul(&na, &poly::from_roots(&only_other));
        let nb = poly::mul(&nb, &poly::from_roots(&only_self));
        let big = na.iter().chain(nb.iter()).fold(0.0f64, |a, c| a.max(c.norm()));
        let sum = poly::add(&na, &nb);
        let sum = poly::trim(&sum, 1e-14);
        if sum.is_empty() || big == 0.0 {
            return Self::zero();
        }
        let mut poles = self.poles.clone();
        poles.extend(only_other);
        let lead = *sum.last().expect("nonempty");
        let mut zeros = poly::roots(&sum);
        zeros.extend(common);
        Self::new(lead, zeros, poles)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// `u ↦ R(u − a)`.
    pub fn shift(&self, a: C64) -> Self {
        Self {
            scale: self.scale,
            zeros: self.zeros.iter().map(|z| z + a).collect(),
            poles: self.poles.iter().map(|p| p + a).collect(),
        }
    }

    /// `z ↦ R(z/α)`.
    pub fn dilate(&self, alpha: C64) -> Result<Self> {
        if alpha.norm() == 0.0 {
            return Err(Error::ZeroDilation);
        }
        let excess = self.zeros.len() as i32 - self.poles.len() as i32;
        Ok(Self {
            scale: self.scale * alpha.powi(-excess),
            zeros: self.zeros.iter().map(|z| z * alpha).collect(),
            poles: self.poles.iter().map(|p| p * alpha).collect(),
        })
    }

    /// First `k` coefficients of the expansion in `u^{-1}` at ∞.
    pub fn taylor_infinity(&self, k: usize) -> Result<Vec<C64>> {
        if self.is_zero() {
            return Ok(vec![C64::new(0.0, 0.0); k]);
        }
        let order = self.order_at_infinity();
        if order < 0 {
            return Err(Error::NotRegular);
        }
        let order = order as usize;
        // In w = 1/u: scale · w^{order} · ∏(1 − z w) / ∏(1 − p w).
        let mut series = series_from_roots(&self.zeros, k);
        for &p in &self.poles {
            series = series_div_linear(&series, p, k);
        }
        let mut out = vec![C64::new(0.0, 0.0); k];
        for j in 0..k {
            if j >= order {
                out[j] = self.scale * series[j - order];
            }
        }
        Ok(out)
    }

    /// First `k` coefficients of the expansion in `u` at 0.
    pub fn taylor_zero(&self, k: usize) -> Result<Vec<C64>> {
        if self.is_zero() {
            return Ok(vec![C64::new(0.0, 0.0); k]);
        }
        if self.poles.iter().any(|p| p.norm() <= NEAR_POLE_TOL) {
            return Err(Error::NotRegular);
        }
        // Numerator as an exact polynomial, denominator as 1/∏(u − p).
        let mut series: Vec<C64> = self.numerator();
        series.resize(k.max(series.len()), C64::new(0.0, 0.0));
        series.truncate(k);
        for &p in &self.poles {
            // 1/(u − p) = −(1/p) Σ (u/p)^n.
            let inv = p.inv();
            let mut next = vec![C64::new(0.0, 0.0); k];
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..k {
                acc = acc * inv + series[j];
                next[j] = -acc * inv;
            }
            series = next;
        }
        Ok(series)
    }
}

/// Coefficients of ∏(1 − r w) truncated to `k` terms.
fn series_from_roots(roots: &[C64], k: usize) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); k.max(1)];
    s[0] = C64::new(1.0, 0.0);
    for &r in roots {
        for j in (1..s.len()).rev() {
            let prev = s[j - 1];
            s[j] -= r * prev;
        }
    }
    s.truncate(k);
    s
}

/// Divide a truncated series in w by (1 − p w).
fn series_div_linear(s: &[C64], p: C64, k: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); k];
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..k {
        acc = acc * p + s.get(j).copied().unwrap_or_default();
        out[j] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn taylor_at_infinity_of_ratio() {
        let (a, b) = (c64(0.3, 0.1), c64(-0.7, 0.2));
        let r = RationalScalar::ratio(a, b);
        let t = r.taylor_infinity(3).unwrap();
        assert!((t[0] - 1.0).norm() < 1e-15);
        assert!((t[1] - (b - a)).norm() < 1e-15);
        assert!((t[2] - b * (b - a)).norm() < 1e-15);
    }

    #[test]
    fn ratio_at_shifted_point() {
        let b = c64(0.4, -0.2);
        let r = RationalScalar::ratio(b - 1.0, b);
        assert!((r.eval(b + 1.0).unwrap() - 2.0).norm() < 1e-15);
    }

    #[test]
    fn add_recovers_partial_fractions() {
        let p = RationalScalar::pole_term(c64(1.0, 0.0), c64(0.5, 0.0), 1);
        let q = RationalScalar::pole_term(c64(-1.0, 0.0), c64(-0.5, 0.0), 1);
        let s = p.add(&q);
        for u in [c64(0.1, 0.3), c64(2.0, -1.0)] {
            let want = (u - 0.5).inv() - (u + 0.5).inv();
            assert!((s.eval(u).unwrap() - want).norm() < 1e-14);
        }
        assert!(s.sub(&s).is_zero());
    }

    #[test]
    fn taylor_at_zero_matches_direct_series() {
        let r = RationalScalar::new(c64(2.0, 0.0), vec![c64(0.0, 0.0)], vec![c64(0.5, 0.5)]);
        let t = r.taylor_zero(4).unwrap();
        let u = c64(0.002, 0.001);
        let sum: C64 = t.iter().enumerate().map(|(j, c)| c * u.powi(j as i32)).sum();
        assert!((sum - r.eval(u).unwrap()).norm() < 1e-6);
        assert!(t[0].norm() < 1e-15);
    }

    #[test]
    fn dilation_moves_roots() {
        let r = RationalScalar::ratio(c64(1.0, 0.0), c64(2.0, 0.0));
        let alpha = c64(0.0, 2.0);
        let d = r.dilate(alpha).unwrap();
        let z = c64(0.3, 0.7);
        assert!((d.eval(z).unwrap() - r.eval(z / alpha).unwrap()).norm() < 1e-14);
        assert!(matches!(r.dilate(c64(0.0, 0.0)), Err(Error::ZeroDilation)));
    }
}
