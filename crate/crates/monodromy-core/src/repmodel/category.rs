//! Pole sets `σ(V)` and the membership tests defining `Rep^Π` and `Rep^Ω`.

use super::{BlockMap, LoopModule, WeightModule};
use crate::branch::LogBranch;
use crate::diffeq::{block_eigenvalue, joint_family_decomposition};
use crate::ratmat::{self, matrix::POLE_CLUSTER_TOL, RationalMatrix};
use crate::sample::DEFAULT_SEED;
use crate::{poly, Result, C64};
use alloc::vec::Vec;

/// Either kind of module.
#[derive(Debug, Clone, Copy)]
pub enum ModuleRef<'a> {
    Yangian(&'a WeightModule),
    Loop(&'a LoopModule),
}

fn distinct(points: Vec<C64>) -> Vec<C64> {
    poly::cluster(&points, POLE_CLUSTER_TOL).into_iter().map(|(p, _)| p).collect()
}

fn diagonal_points(blocks: &BlockMap) -> Vec<C64> {
    blocks.values().flat_map(|b| b.pole_set().into_iter().chain(ratmat::zero_set(b))).collect()
}

fn off_diagonal_points(a: &BlockMap, b: &BlockMap) -> Vec<C64> {
    a.values().chain(b.values()).flat_map(|m| m.pole_set()).collect()
}

/// `sigma_set`: poles of `ξᵢ(u)^{±1}` and `x±ᵢ(u)` (resp. `Ψᵢ(z)^{±1}`
/// and `𝒳±ᵢ(z)`), clustered.
pub fn sigma_set(m: ModuleRef<'_>) -> Vec<C64> {
    match m {
        ModuleRef::Yangian(v) => {
            let mut pts = diagonal_points(&v.xi);
            pts.extend(off_diagonal_points(&v.xplus, &v.xminus));
            distinct(pts)
        }
        ModuleRef::Loop(w) => {
            let mut pts = diagonal_points(&w.psi);
            pts.extend(off_diagonal_points(&w.xp, &w.xm));
            distinct(pts)
        }
    }
}

/// The equivalent membership conditions, evaluated separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryReport {
    /// `σ(V)` lies in the domain.
    pub sigma: bool,
    /// Poles of the diagonal fields and their inverses lie in the domain.
    pub diagonal_fields: bool,
    /// Zeros and poles of the joint eigenvalues lie in the domain.
    pub eigenvalues: bool,
    /// Points of `σ(V)` outside the domain.
    pub outside: Vec<C64>,
}

impl CategoryReport {
    /// The three conditions are equivalent; disagreement is a numerical
    /// fault.
    pub fn consistent(&self) -> bool {
        self.sigma == self.diagonal_fields && self.diagonal_fields == self.eigenvalues
    }

    pub fn member(&self) -> bool {
        self.sigma && self.consistent()
    }
}

/// Zeros and poles of the joint eigenvalues on every weight space.
fn eigenvalue_points(blocks: &BlockMap, rank: usize, weights: usize) -> Result<Vec<C64>> {
    let mut out = Vec::new();
    for mu in 0..weights {
        let fields: Vec<&RationalMatrix> = (0..rank).filter_map(|i| blocks.get(&(i, mu))).collect();
        if fields.is_empty() {
            continue;
        }
        let d = joint_family_decomposition(&fields, DEFAULT_SEED)?;
        for b in &d.blocks {
            for f in &fields {
                let e = block_eigenvalue(f, b)?;
                out.extend(e.zeros.iter().copied());
                out.extend(e.poles.iter().copied());
            }
        }
    }
    Ok(distinct(out))
}

/// `category_test`: membership of `V` in `Rep^Π` (resp. `Rep^Ω`).
pub fn category_test(m: ModuleRef<'_>, branch: &LogBranch) -> Result<CategoryReport> {
    let (sigma, diag, eig, inside): (Vec<C64>, Vec<C64>, Vec<C64>, &dyn Fn(C64) -> bool) = match m {
        ModuleRef::Yangian(v) => (
            sigma_set(m),
            distinct(diagonal_points(&v.xi)),
            eigenvalue_points(&v.xi, v.cartan().rank(), v.weights().len())?,
            &|u| branch.contains(u),
        ),
        ModuleRef::Loop(w) => (
            sigma_set(m),
            distinct(diagonal_points(&w.psi)),
            eigenvalue_points(&w.psi, w.cartan().rank(), w.weights().len())?,
            &|z| branch.log(z).is_ok(),
        ),
    };
    let outside: Vec<C64> = sigma.iter().copied().filter(|&p| !inside(p)).collect();
    Ok(CategoryReport {
        sigma: outside.is_empty(),
        diagonal_fields: diag.iter().all(|&p| inside(p)),
        eigenvalues: eig.iter().all(|&p| inside(p)),
        outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::repmodel::{sl2_eval_module, CartanData};

    #[test]
    fn two_dimensional_sigma() {
        let (a, h) = (c64(0.1, 0.0), c64(0.3, 0.0));
        let v = sl2_eval_module(2, a, h).unwrap();
        let s = sigma_set(ModuleRef::Yangian(&v));
        assert_eq!(s.len(), 3);
        for p in [a, a - h, a + h] {
            assert!(s.iter().any(|x| (x - p).norm() < 1e-9), "{p} missing from {s:?}");
        }
    }

    #[test]
    fn membership_follows_the_root() {
        let h = c64(0.3, 0.0);
        let branch = LogBranch::standard(h);
        let inside = sl2_eval_module(2, c64(0.1, 0.0), h).unwrap();
        let r = category_test(ModuleRef::Yangian(&inside), &branch).unwrap();
        assert!(r.member() && r.consistent());
        let outside = sl2_eval_module(2, c64(1.1, 0.0), h).unwrap();
        let r = category_test(ModuleRef::Yangian(&outside), &branch).unwrap();
        assert!(!r.member() && r.consistent());
        let empty = WeightModule::zero(CartanData::sl2(), h).unwrap();
        assert!(category_test(ModuleRef::Yangian(&empty), &branch).unwrap().member());
    }
}
