//! Built-in sl₂ evaluation modules, direct sums and shift automorphisms.

use super::{screen_hbar, screen_q, BlockMap, CartanData, LoopModule, Weight, WeightLattice, WeightModule};
use crate::ratmat::{RationalMatrix, RationalScalar};
use crate::{Error, Result, C64};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

fn sl2_lattice(n: usize) -> Result<WeightLattice> {
    let m = n as i64 - 1;
    let weights = (0..n as i64)
        .map(|j| Weight { label: (m - 2 * j).to_string(), values: alloc::vec![m - 2 * j], dim: 1 })
        .collect();
    WeightLattice::new(CartanData::sl2(), weights)
}

/// `sl2_eval_module`: the `n`-dimensional evaluation module with
/// Drinfeld polynomial `∏_{k=0}^{n−2}(u − a − kħ)`.
///
/// In the basis `v_0, …, v_m` (`m = n−1`, `v_j` of weight `m − 2j`) with
/// `p_j = a + (m−j)ħ`:
/// `x⁺(u)v_j = ħ j(m−j+1)/(u−p_j)·v_{j−1}`, `x⁻(u)v_j = ħ/(u−p_{j+1})·v_{j+1}`
/// and `ξ(u)v_j = (1 + ħ[(j+1)(m−j)/(u−p_{j+1}) − j(m−j+1)/(u−p_j)])v_j`.
pub fn sl2_eval_module(n: usize, a: C64, hbar: C64) -> Result<WeightModule> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("evaluation module dimension {n} is below 2")));
    }
    screen_hbar(hbar)?;
    let lattice = sl2_lattice(n)?;
    let m = n - 1;
    let p = |j: usize| a + hbar * (m - j) as f64;
    let one = |s: RationalScalar| RationalMatrix::scalar(s);
    let mut xi = BlockMap::new();
    let mut xplus = BlockMap::new();
    let mut xminus = BlockMap::new();
    for j in 0..=m {
        let mut e = RationalScalar::one();
        if j < m {
            e = e.add(&RationalScalar::pole_term(hbar * ((j + 1) * (m - j)) as f64, p(j + 1), 1));
        }
        if j > 0 {
            e = e.add(&RationalScalar::pole_term(-hbar * (j * (m - j + 1)) as f64, p(j), 1));
        }
        xi.insert((0, j), one(e));
        if j > 0 {
            xplus.insert((0, j), one(RationalScalar::pole_term(hbar * (j * (m - j + 1)) as f64, p(j), 1)));
        }
        if j < m {
            xminus.insert((0, j), one(RationalScalar::pole_term(hbar, p(j + 1), 1)));
        }
    }
    WeightModule::new(lattice, hbar, xi, xplus, xminus)
}

/// Two-dimensional loop module with `l`-highest weight root `α`:
/// `Ψ(z) = q⁻¹(q²z − α)/(z − α)` on the top weight,
/// `Ψ(z) = q⁻¹(z − q²α)/(z − α)` on the bottom one and
/// `𝒳±(z) = z/(z − α)`.
pub fn sl2_eval_loop_module(alpha: C64, q: C64, hbar: Option<C64>) -> Result<LoopModule> {
    screen_q(q)?;
    if alpha.norm() == 0.0 {
        return Err(Error::InvalidInput("loop root must be nonzero".into()));
    }
    let lattice = sl2_lattice(2)?;
    let q2 = q * q;
    let one = |s: RationalScalar| RationalMatrix::scalar(s);
    let mut psi = BlockMap::new();
    psi.insert((0, 0), one(RationalScalar::new(q, alloc::vec![alpha / q2], alloc::vec![alpha])));
    psi.insert((0, 1), one(RationalScalar::new(q.inv(), alloc::vec![alpha * q2], alloc::vec![alpha])));
    let x = RationalScalar::new(C64::new(1.0, 0.0), alloc::vec![C64::new(0.0, 0.0)], alloc::vec![alpha]);
    let mut xp = BlockMap::new();
    xp.insert((0, 1), one(x.clone()));
    let mut xm = BlockMap::new();
    xm.insert((0, 0), one(x));
    LoopModule::new(lattice, q, hbar, psi, xp, xm)
}

/// Block-diagonal combination of two block maps over the merged lattice.
fn sum_blocks(
    lat: &WeightLattice,
    (la, ba): (&WeightLattice, &BlockMap),
    (lb, bb): (&WeightLattice, &BlockMap),
    sign: i64,
) -> BlockMap {
    let mut out = BlockMap::new();
    let part = |l: &WeightLattice, b: &BlockMap, i: usize, mu: usize| -> Option<RationalMatrix> {
        let src = l.index_of(&lat.weights[mu].values);
        let tgt_values = if sign == 0 {
            Some(lat.weights[mu].values.clone())
        } else {
            lat.neighbour(mu, i, sign).map(|t| lat.weights[t].values.clone())
        }?;
        let rows = l.index_of(&tgt_values).map_or(0, |t| l.weights[t].dim);
        let cols = src.map_or(0, |s| l.weights[s].dim);
        Some(src.and_then(|s| b.get(&(i, s)).cloned()).unwrap_or_else(|| {
            if sign == 0 {
                RationalMatrix::identity(cols)
            } else {
                RationalMatrix::zeros(rows, cols)
            }
        }))
    };
    let keys: Vec<(usize, usize)> = ba
        .keys()
        .map(|&(i, mu)| (i, lat.index_of(&la.weights[mu].values).expect("merged lattice")))
        .chain(bb.keys().map(|&(i, mu)| (i, lat.index_of(&lb.weights[mu].values).expect("merged lattice"))))
        .collect();
    for (i, mu) in keys {
        if out.contains_key(&(i, mu)) {
            continue;
        }
        if let (Some(x), Some(y)) = (part(la, ba, i, mu), part(lb, bb, i, mu)) {
            out.insert((i, mu), RationalMatrix::block_diag(&[&x, &y]));
        }
    }
    out
}

fn merge_lattices(a: &WeightLattice, b: &WeightLattice) -> Result<WeightLattice> {
    if a.cartan != b.cartan {
        return Err(Error::InvalidInput("direct sum of modules over different Cartan data".into()));
    }
    let mut weights = a.weights.clone();
    for w in &b.weights {
        match weights.iter_mut().find(|x| x.values == w.values) {
            Some(x) => x.dim += w.dim,
            None => weights.push(w.clone()),
        }
    }
    WeightLattice::new(a.cartan.clone(), weights)
}

/// `V ⊕ W`, block diagonal on every weight space.
pub fn direct_sum(v: &WeightModule, w: &WeightModule) -> Result<WeightModule> {
    if (v.hbar - w.hbar).norm() > 1e-14 {
        return Err(Error::InvalidInput("direct sum of modules with different hbar".into()));
    }
    let lat = merge_lattices(&v.lattice, &w.lattice)?;
    let a = &v.lattice;
    let b = &w.lattice;
    let xi = sum_blocks(&lat, (a, &v.xi), (b, &w.xi), 0);
    let xplus = sum_blocks(&lat, (a, &v.xplus), (b, &w.xplus), 1);
    let xminus = sum_blocks(&lat, (a, &v.xminus), (b, &w.xminus), -1);
    WeightModule::new(lat, v.hbar, xi, xplus, xminus)
}

/// Loop-side direct sum.
pub fn direct_sum_loop(v: &LoopModule, w: &LoopModule) -> Result<LoopModule> {
    if (v.q - w.q).norm() > 1e-14 {
        return Err(Error::InvalidInput("direct sum of modules with different q".into()));
    }
    let lat = merge_lattices(&v.lattice, &w.lattice)?;
    let a = &v.lattice;
    let b = &w.lattice;
    let psi = sum_blocks(&lat, (a, &v.psi), (b, &w.psi), 0);
    let xp = sum_blocks(&lat, (a, &v.xp), (b, &w.xp), 1);
    let xm = sum_blocks(&lat, (a, &v.xm), (b, &w.xm), -1);
    LoopModule::new(lat, v.q, v.hbar.or(w.hbar), psi, xp, xm)
}

fn map_blocks(b: &BlockMap, f: impl Fn(&RationalMatrix) -> Result<RationalMatrix>) -> Result<BlockMap> {
    b.iter().map(|(k, m)| Ok((*k, f(m)?))).collect()
}

/// `shift_module`: the pullback along `τ_a`, `y(u) ↦ y(u − a)`.
pub fn shift_module(v: &WeightModule, a: C64) -> Result<WeightModule> {
    let f = |m: &RationalMatrix| Ok(m.shift(a));
    Ok(WeightModule {
        lattice: v.lattice.clone(),
        hbar: v.hbar,
        xi: map_blocks(&v.xi, f)?,
        xplus: map_blocks(&v.xplus, f)?,
        xminus: map_blocks(&v.xminus, f)?,
    })
}

/// `shift_loop`: the pullback along `τ_α`, `Y(z) ↦ Y(α⁻¹z)`.
pub fn shift_loop(w: &LoopModule, alpha: C64) -> Result<LoopModule> {
    if alpha.norm() == 0.0 {
        return Err(Error::ZeroDilation);
    }
    let f = |m: &RationalMatrix| m.dilate(alpha);
    Ok(LoopModule {
        lattice: w.lattice.clone(),
        q: w.q,
        hbar: w.hbar,
        psi: map_blocks(&w.psi, f)?,
        xp: map_blocks(&w.xp, f)?,
        xm: map_blocks(&w.xm, f)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn two_dimensional_highest_weight_eigenvalue() {
        let (a, h) = (c64(0.1, 0.0), c64(0.3, 0.0));
        let v = sl2_eval_module(2, a, h).unwrap();
        for &u in &[c64(0.7, 0.4), c64(-1.3, 2.0)] {
            let top = v.xi[&(0, 0)].eval(u).unwrap()[(0, 0)];
            assert!((top - (u + h - a) / (u - a)).norm() < 1e-14);
            let bottom = v.xi[&(0, 1)].eval(u).unwrap()[(0, 0)];
            assert!((bottom - (u - h - a) / (u - a)).norm() < 1e-14);
        }
    }

    #[test]
    fn shift_matches_moved_root() {
        let h = c64(0.3, 0.0);
        let v = sl2_eval_module(3, c64(0.2, 0.0), h).unwrap();
        let b = c64(0.15, -0.1);
        let s = shift_module(&v, b).unwrap();
        let w = sl2_eval_module(3, c64(0.2, 0.0) + b, h).unwrap();
        let u = c64(1.7, 0.9);
        for (k, m) in &s.xi {
            let d = crate::linalg::max_diff(&m.eval(u).unwrap(), &w.xi[k].eval(u).unwrap());
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn direct_sum_dimensions() {
        let h = c64(0.3, 0.0);
        let v = sl2_eval_module(2, c64(0.1, 0.0), h).unwrap();
        let w = sl2_eval_module(3, c64(0.25, 0.0), h).unwrap();
        let s = direct_sum(&v, &w).unwrap();
        assert_eq!(s.dim(), 5);
        assert_eq!(s.weights().len(), 5);
        let one = s.lattice.index_of(&[1]).unwrap();
        assert_eq!(s.xi[&(0, one)].shape(), (1, 1));
        assert_eq!(s.xplus[&(0, s.lattice.index_of(&[0]).unwrap())].shape(), (1, 1));
        assert_eq!(s.xplus[&(0, s.lattice.index_of(&[-1]).unwrap())].shape(), (1, 1));
        let t = direct_sum(&v, &sl2_eval_module(2, c64(0.25, 0.0), h).unwrap()).unwrap();
        assert_eq!(t.xplus[&(0, t.lattice.index_of(&[-1]).unwrap())].shape(), (2, 2));
    }

    #[test]
    fn rational_hbar_is_rejected() {
        assert!(matches!(sl2_eval_module(2, c64(0.0, 0.0), c64(0.25, 0.0)), Err(Error::RationalHbar(_))));
    }
}
