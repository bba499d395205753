//! Joint generalized eigenspaces of commuting families and the
//! multiplicative Jordan decomposition `M = M_S·M_U` of rational families.

use super::{relative_commutator, sample_points, COMMUTE_TOL};
use crate::ratmat::fit::{fit_matrix_with_poles, fit_scalar_with_poles};
use crate::ratmat::{RationalMatrix, RationalScalar};
use crate::sample::{Sampler, DEFAULT_SEED};
use crate::{linalg, poly, Error, Mat, Result, C64};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Relative radius within which eigenvalues of a random combination are
/// merged into one cluster.
const CLUSTER_TOL: f64 = 1e-5;
/// Clusters closer than this (relative) make the split ambiguous.
const AMBIGUITY_TOL: f64 = 1e-3;
/// Largest admissible condition number of the block basis.
pub const BASIS_CONDITION_MAX: f64 = 1e8;
/// Residual of the block structure accepted at validation samples.
pub const VALIDATION_TOL: f64 = 1e-7;
pub const FIT_TOL: f64 = 1e-8;

/// One joint generalized eigenspace: columns `p` span it, rows `q` are
/// the matching rows of the inverse basis.
#[derive(Debug, Clone)]
pub struct JointBlock {
    pub p: Mat,
    pub q: Mat,
}

impl JointBlock {
    pub fn dim(&self) -> usize {
        self.p.ncols()
    }

    /// `Q M P`.
    pub fn restrict(&self, m: &Mat) -> Mat {
        &self.q * m * &self.p
    }

    /// Generalized eigenvalue `tr(Q M P)/dim`.
    pub fn eigenvalue(&self, m: &Mat) -> C64 {
        self.restrict(m).trace() / self.dim() as f64
    }

    /// `P Q`, the projector onto the block along the others.
    pub fn projector(&self) -> Mat {
        &self.p * &self.q
    }
}

#[derive(Debug, Clone)]
pub struct JointDecomposition {
    pub blocks: Vec<JointBlock>,
    pub condition: f64,
}

impl JointDecomposition {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    /// Largest failure of `m` to be block diagonal with a single
    /// eigenvalue per block, relative to `|m|`.
    pub fn residual(&self, m: &Mat) -> f64 {
        let scale = linalg::max_abs(m).max(1e-300);
        let mut worst = 0.0f64;
        for (a, ba) in self.blocks.iter().enumerate() {
            for (b, bb) in self.blocks.iter().enumerate() {
                let blk = &ba.q * m * &bb.p;
                if a != b {
                    worst = worst.max(linalg::max_abs(&blk) / scale);
                } else {
                    let d = ba.dim();
                    let nil = blk.clone() - linalg::identity(d) * ba.eigenvalue(m);
                    let mut pow = linalg::identity(d);
                    for _ in 0..d {
                        pow = pow * &nil;
                    }
                    worst = worst.max((linalg::max_abs(&pow) / scale.powi(d as i32)).powf(1.0 / d as f64));
                }
            }
        }
        worst
    }
}

fn try_decompose(values: &[Mat], sampler: &mut Sampler) -> Result<JointDecomposition> {
    let n = values[0].nrows();
    let mut x = Mat::zeros(n, n);
    for v in values {
        x += v * sampler.coefficient();
    }
    let ev = linalg::eigenvalues(&x);
    let scale = ev.iter().map(|e| e.norm()).fold(0.0, f64::max).max(linalg::max_abs(&x)).max(1e-300);
    let clusters = poly::cluster(&ev, CLUSTER_TOL * scale);
    for (k, a) in clusters.iter().enumerate() {
        for b in &clusters[k + 1..] {
            if (a.0 - b.0).norm() < AMBIGUITY_TOL * scale {
                return Err(Error::ClusterAmbiguity(format!(
                    "eigenvalue clusters {} and {} are not separated",
                    a.0, b.0
                )));
            }
        }
    }
    let mut bases = Vec::with_capacity(clusters.len());
    for (k, &(c, m)) in clusters.iter().enumerate() {
        let gap = clusters
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, o)| (o.0 - c).norm())
            .fold(f64::INFINITY, f64::min);
        let spread = ev.iter().filter(|e| (*e - c).norm() <= CLUSTER_TOL * scale * 2.0).map(|e| (e - c).norm()).fold(0.0, f64::max);
        let radius = if gap.is_finite() { gap / 2.0 } else { spread + scale };
        let p = linalg::riesz_projector(&x, c, radius, 128)?;
        bases.push((linalg::range_basis(&p, m), m));
    }
    let mut basis = Mat::zeros(n, n);
    let mut col = 0;
    for (b, m) in &bases {
        basis.view_mut((0, col), (n, *m)).copy_from(b);
        col += m;
    }
    if col != n {
        return Err(Error::ClusterAmbiguity(format!("clusters cover {col} of {n} dimensions")));
    }
    let condition = linalg::condition_number(&basis);
    if condition > BASIS_CONDITION_MAX {
        return Err(Error::ClusterAmbiguity(format!("block basis condition {condition:.3e}")));
    }
    let inv = linalg::inverse(&basis)?;
    let mut blocks = Vec::with_capacity(bases.len());
    let mut row = 0;
    for (b, m) in bases {
        blocks.push(JointBlock { p: b, q: inv.rows(row, m).into_owned() });
        row += m;
    }
    Ok(JointDecomposition { blocks, condition })
}

/// Joint generalized eigenspaces of commuting matrices: cluster the
/// spectrum of a random combination, take Riesz projectors, and check the
/// block structure on every input.
pub fn joint_decomposition(values: &[Mat], seed: u64) -> Result<JointDecomposition> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    let n = values[0].nrows();
    if n == 0 {
        return Ok(JointDecomposition { blocks: Vec::new(), condition: 1.0 });
    }
    let mut sampler = Sampler::new(seed);
    let mut last = Error::ClusterAmbiguity("no attempt".into());
    for _ in 0..3 {
        match try_decompose(values, &mut sampler) {
            Ok(d) => {
                let worst = values.iter().map(|v| d.residual(v)).fold(0.0, f64::max);
                if worst <= VALIDATION_TOL {
                    return Ok(d);
                }
                last = Error::ClusterAmbiguity(format!("block structure residual {worst:.3e}"));
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Require `[M(u), M(v)] ≈ 0` at seeded samples.
pub fn check_commuting(m: &RationalMatrix, seed: u64) -> Result<f64> {
    let avoid = m.pole_set();
    let pts = sample_points(&avoid, 20, seed);
    let mut worst = 0.0f64;
    for pair in pts.chunks(2) {
        worst = worst.max(relative_commutator(&m.eval(pair[0])?, &m.eval(pair[1])?));
    }
    if worst > COMMUTE_TOL {
        return Err(Error::NotCommuting(worst));
    }
    Ok(worst)
}

/// Decomposition of a commuting rational family, built at three samples
/// plus `extra` constants and validated at ten more samples.
pub fn family_decomposition(m: &RationalMatrix, extra: &[Mat], seed: u64) -> Result<JointDecomposition> {
    let avoid: Vec<C64> = m.pole_set().into_iter().chain(crate::ratmat::zero_set(m)).collect();
    let pts = sample_points(&avoid, 13, seed ^ 0x9e37);
    let mut values: Vec<Mat> = pts[..3].iter().map(|&u| m.eval(u)).collect::<Result<_>>()?;
    values.extend(extra.iter().cloned());
    let d = joint_decomposition(&values, seed)?;
    for &u in &pts[3..] {
        let r = d.residual(&m.eval(u)?);
        if r > VALIDATION_TOL {
            return Err(Error::ClusterAmbiguity(format!("validation residual {r:.3e} at {u}")));
        }
    }
    Ok(d)
}

/// Joint decomposition of several commuting rational families of the
/// same size, built at three common samples and validated at ten more.
pub fn joint_family_decomposition(ms: &[&RationalMatrix], seed: u64) -> Result<JointDecomposition> {
    let Some(first) = ms.first() else {
        return Err(Error::InvalidInput("empty family".into()));
    };
    let n = first.rows();
    if n == 0 {
        return Ok(JointDecomposition { blocks: Vec::new(), condition: 1.0 });
    }
    let mut avoid: Vec<C64> = Vec::new();
    for m in ms {
        avoid.extend(m.pole_set());
        avoid.extend(crate::ratmat::zero_set(m));
    }
    let pts = sample_points(&avoid, 13, seed ^ 0x9e37);
    let mut values = Vec::with_capacity(3 * ms.len());
    for &u in &pts[..3] {
        for m in ms {
            values.push(m.eval(u)?);
        }
    }
    for a in &values {
        for b in &values {
            let c = relative_commutator(a, b);
            if c > COMMUTE_TOL {
                return Err(Error::NotCommuting(c));
            }
        }
    }
    let d = joint_decomposition(&values, seed)?;
    for &u in &pts[3..] {
        for m in ms {
            let r = d.residual(&m.eval(u)?);
            if r > VALIDATION_TOL {
                return Err(Error::ClusterAmbiguity(format!("validation residual {r:.3e} at {u}")));
            }
        }
    }
    Ok(d)
}

/// Rational eigenvalue of `m` on block `b`, fitted with the poles of `m`.
pub fn block_eigenvalue(m: &RationalMatrix, block: &JointBlock) -> Result<RationalScalar> {
    let poles = m.poles();
    fit_scalar_with_poles(|u| Ok(block.eigenvalue(&m.eval(u)?)), &poles, FIT_TOL)
}

/// `jordan_split`: `M = M_S·M_U` with `M_S` semisimple and `M_U`
/// unipotent, both rational and commuting with `M`.
pub fn jordan_split(m: &RationalMatrix) -> Result<(RationalMatrix, RationalMatrix)> {
    let n = m.rows();
    check_commuting(m, DEFAULT_SEED)?;
    let d = family_decomposition(m, &[], DEFAULT_SEED)?;
    let lambdas: Vec<RationalScalar> = d.blocks.iter().map(|b| block_eigenvalue(m, b)).collect::<Result<_>>()?;
    let poles = m.poles();
    let ms_eval = |u: C64| -> Result<Mat> {
        let mut acc = Mat::zeros(n, n);
        for (b, l) in d.blocks.iter().zip(&lambdas) {
            acc += b.projector() * l.eval(u)?;
        }
        Ok(acc)
    };
    let ms = fit_matrix_with_poles(ms_eval, n, n, &poles, FIT_TOL)?;
    let mut upoles = poles.clone();
    for l in &lambdas {
        for (z, k) in poly::cluster(&l.zeros, crate::ratmat::matrix::POLE_CLUSTER_TOL) {
            upoles.push((z, k));
        }
    }
    let mu_eval = |u: C64| -> Result<Mat> {
        let mu = m.eval(u)?;
        let mut acc = Mat::zeros(n, n);
        for (b, l) in d.blocks.iter().zip(&lambdas) {
            acc += &b.p * b.restrict(&mu) * &b.q / l.eval(u)?;
        }
        Ok(acc)
    };
    let mu = fit_matrix_with_poles(mu_eval, n, n, &upoles, FIT_TOL)?;
    Ok((ms, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn diagonal_family_splits_trivially() {
        let m = RationalMatrix::diagonal(alloc::vec![
            RationalScalar::ratio(c64(0.2, 0.0), c64(0.6, 0.0)),
            RationalScalar::ratio(c64(-0.3, 0.1), c64(0.1, 0.4)),
        ]);
        let (ms, mu) = jordan_split(&m).unwrap();
        let u = c64(1.3, -0.4);
        assert!(linalg::max_diff(&ms.eval(u).unwrap(), &m.eval(u).unwrap()) < 1e-10);
        assert!(linalg::max_diff(&mu.eval(u).unwrap(), &linalg::identity(2)) < 1e-10);
    }

    #[test]
    fn constant_jordan_block() {
        let lam = c64(2.0, 0.5);
        let mut j = Mat::identity(2, 2) * lam;
        j[(0, 1)] = c64(1.0, 0.0);
        let m = RationalMatrix::constant(&j);
        let (ms, mu) = jordan_split(&m).unwrap();
        let u = c64(0.1, 0.2);
        assert!(linalg::max_diff(&ms.eval(u).unwrap(), &(Mat::identity(2, 2) * lam)) < 1e-9);
        let mut want = Mat::identity(2, 2);
        want[(0, 1)] = lam.inv();
        assert!(linalg::max_diff(&mu.eval(u).unwrap(), &want) < 1e-9);
    }
}
