use super::scalar::RationalScalar;
use crate::{poly, Error, Mat, Result, C64};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Distinct poles closer than this are treated as one pole.
pub const POLE_CLUSTER_TOL: f64 = 1e-7;

/// Matrix-valued rational function stored entrywise in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RationalScalar>,
}

impl RationalMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<RationalScalar>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must match shape");
        Self { rows, cols, entries }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> RationalScalar) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| RationalScalar::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { RationalScalar::one() } else { RationalScalar::zero() })
    }

    pub fn constant(m: &Mat) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| RationalScalar::constant(m[(i, j)]))
    }

    pub fn scalar(r: RationalScalar) -> Self {
        Self { rows: 1, cols: 1, entries: vec![r] }
    }

    pub fn diagonal(d: Vec<RationalScalar>) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (k, r) in d.into_iter().enumerate() {
            m.entries[k * n + k] = r;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalScalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, r: RationalScalar) {
        self.entries[i * self.cols + j] = r;
    }

    pub fn entries(&self) -> &[RationalScalar] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn map(&self, f: impl Fn(&RationalScalar) -> RationalScalar) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&RationalScalar) -> Result<RationalScalar>) -> Result<Self> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    /// Distance from `u` to the nearest pole of any entry.
    pub fn pole_distance(&self, u: C64) -> f64 {
        self.entries.iter().map(|e| e.pole_distance(u)).fold(f64::INFINITY, f64::min)
    }

    pub fn eval_unchecked(&self, u: C64) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval_unchecked(u))
    }

    /// Entrywise evaluation (`rf_eval`).
    pub fn eval(&self, u: C64) -> Result<Mat> {
        let d = self.pole_distance(u);
        if d <= super::scalar::NEAR_POLE_TOL {
            return Err(Error::NearPole { distance: d });
        }
        Ok(self.eval_unchecked(u))
    }

    /// Distinct poles with the largest order attained by any entry.
    pub fn poles(&self) -> Vec<(C64, usize)> {
        let mut out: Vec<(C64, usize)> = Vec::new();
        for e in &self.entries {
            for (p, m) in poly::cluster(&e.poles, POLE_CLUSTER_TOL) {
                match out.iter_mut().find(|(q, _)| (*q - p).norm() <= POLE_CLUSTER_TOL) {
                    Some(slot) => slot.1 = slot.1.max(m),
                    None => out.push((p, m)),
                }
            }
        }
        out
    }

    /// Distinct pole locations.
    pub fn pole_set(&self) -> Vec<C64> {
        self.poles().into_iter().map(|(p, _)| p).collect()
    }

    pub fn is_regular_at_infinity(&self) -> bool {
        self.entries.iter().all(|e| e.order_at_infinity() >= 0)
    }

    pub fn value_at_infinity(&self) -> Result<Mat> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.entry(i, j).value_at_infinity()?;
            }
        }
        Ok(m)
    }

    pub fn value_at_zero(&self) -> Result<Mat> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.entry(i, j).value_at_zero()?;
            }
        }
        Ok(m)
    }

    /// First `k` matrix coefficients of the expansion at ∞ (in `u^{-1}`).
    pub fn taylor_infinity(&self, k: usize) -> Result<Vec<Mat>> {
        let mut out = vec![Mat::zeros(self.rows, self.cols); k];
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (n, c) in self.entry(i, j).taylor_infinity(k)?.into_iter().enumerate() {
                    out[n][(i, j)] = c;
                }
            }
        }
        Ok(out)
    }

    /// First `k` matrix coefficients of the expansion at 0.
    pub fn taylor_zero(&self, k: usize) -> Result<Vec<Mat>> {
        let mut out = vec![Mat::zeros(self.rows, self.cols); k];
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (n, c) in self.entry(i, j).taylor_zero(k)?.into_iter().enumerate() {
                    out[n][(i, j)] = c;
                }
            }
        }
        Ok(out)
    }

    /// `u ↦ R(u − a)`.
    pub fn shift(&self, a: C64) -> Self {
        self.map(|e| e.shift(a))
    }

    /// `z ↦ R(z/α)`.
    pub fn dilate(&self, alpha: C64) -> Result<Self> {
        self.try_map(|e| e.dilate(alpha))
    }

    pub fn scaled(&self, c: C64) -> Self {
        self.map(|e| e.scaled(c))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Matrix product with exact pole bookkeeping; sums are refactored.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = RationalScalar::zero();
            for k in 0..self.cols {
                let a = self.entry(i, k);
                let b = other.entry(k, j);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            acc
        })
    }

    /// Left multiplication by a constant matrix.
    pub fn left_constant(&self, c: &Mat) -> Self {
        assert_eq!(c.ncols(), self.rows);
        Self::from_fn(c.nrows(), self.cols, |i, j| {
            let mut acc = RationalScalar::zero();
            for k in 0..self.rows {
                let w = c[(i, k)];
                if w.norm() == 0.0 {
                    continue;
                }
                acc = acc.add(&self.entry(k, j).scaled(w));
            }
            acc
        })
    }

    /// Right multiplication by a constant matrix.
    pub fn right_constant(&self, c: &Mat) -> Self {
        assert_eq!(self.cols, c.nrows());
        Self::from_fn(self.rows, c.ncols(), |i, j| {
            let mut acc = RationalScalar::zero();
            for k in 0..self.cols {
                let w = c[(k, j)];
                if w.norm() == 0.0 {
                    continue;
                }
                acc = acc.add(&self.entry(i, k).scaled(w));
            }
            acc
        })
    }

    /// Scalar function times a constant matrix.
    pub fn scalar_times(r: &RationalScalar, c: &Mat) -> Self {
        Self::from_fn(c.nrows(), c.ncols(), |i, j| r.scaled(c[(i, j)]))
    }

    /// Block-diagonal sum.
    pub fn block_diag(blocks: &[&RationalMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.entry(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.entry(j, i).clone())
    }

    /// Replace entries whose size is below `tol` relative to the largest
    /// entry (measured at the given probe points) by exact zeros.
    pub fn drop_negligible(&self, probes: &[C64], tol: f64) -> Self {
        let sizes: Vec<f64> = self
            .entries
            .iter()
            .map(|e| probes.iter().map(|&u| e.eval_unchecked(u).norm()).fold(0.0, f64::max))
            .collect();
        let big = sizes.iter().cloned().fold(0.0, f64::max);
        self.map_indexed(|k, e| if sizes[k] <= tol * big { RationalScalar::zero() } else { e.clone() })
    }

    fn map_indexed(&self, f: impl Fn(usize, &RationalScalar) -> RationalScalar) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().enumerate().map(|(k, e)| f(k, e)).collect(),
        }
    }

    /// Largest entry count of zeros or poles, a crude complexity measure.
    pub fn max_degree(&self) -> usize {
        self.entries.iter().map(|e| e.zeros.len().max(e.poles.len())).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn constant_identity_evaluates_to_identity() {
        let r = RationalMatrix::identity(3);
        assert_eq!(r.eval(c64(0.3, 9.0)).unwrap(), Mat::identity(3, 3));
    }

    #[test]
    fn near_pole_is_rejected() {
        let r = RationalMatrix::scalar(RationalScalar::ratio(c64(0.0, 0.0), c64(1.0, 0.0)));
        assert!(matches!(r.eval(c64(1.0, 1e-12)), Err(Error::NearPole { .. })));
    }

    #[test]
    fn product_matches_pointwise_product() {
        let a = RationalMatrix::from_fn(2, 2, |i, j| {
            RationalScalar::ratio(c64(i as f64, 0.1), c64(j as f64 + 0.5, -0.2))
        });
        let b = a.transpose();
        let ab = a.mul(&b);
        let u = c64(1.7, 0.4);
        let want = a.eval(u).unwrap() * b.eval(u).unwrap();
        let d = crate::linalg::max_diff(&ab.eval(u).unwrap(), &want);
        assert!(d < 1e-13, "{d}");
    }
}
