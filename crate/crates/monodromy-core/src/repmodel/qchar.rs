//! q-characters on both sides and the exponential map between them.
//!
//! A joint eigenvalue `β(u)` (resp. `γ(z)`) is factored as
//! `Q(u+ħd)/Q(u)·R(u)/R(u+ħd)` (resp. `q^{deg R − deg Q}Q(q²z)/Q(z)·R(z)/R(q²z)`)
//! by sorting its zeros and poles into shift ladders. On one ladder the
//! points sit at positions `k` (`base + kħd`, resp. `base·q_i^{2k}`); with
//! `D(k)` the zero count minus the pole count, the exponent of the
//! variable at position `k+1` is `Σ_{j≤k} D(j)`.

use super::{BlockMap, LoopModule, WeightLattice, WeightModule};
use crate::branch::{exp2pi, LogBranch};
use crate::diffeq::{block_eigenvalue, joint_family_decomposition};
use crate::ratmat::{RationalMatrix, RationalScalar};
use crate::sample::DEFAULT_SEED;
use crate::{Error, Result, C64};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Matching tolerance for ladder positions.
pub const LADDER_TOL: f64 = 1e-7;
/// Largest ladder offset searched on the multiplicative side; with
/// `qⁿ ≠ 1` for `n ≤ 16` the offsets `|k| ≤ 4` are unambiguous.
const MULTIPLICATIVE_REACH: i64 = 4;
/// Largest ladder offset searched on the additive side.
const ADDITIVE_REACH: i64 = 64;

/// One variable `X_{i,a}^{±1}` (resp. `Y_{i,α}^{±1}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub i: usize,
    pub location: C64,
    pub exp: i32,
}

/// `mult · e(μ) · ∏ factors`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTerm {
    pub label: String,
    pub weight: Vec<i64>,
    pub monomial: Vec<Monomial>,
    pub mult: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QCharacter {
    pub terms: Vec<QTerm>,
}

fn monomials_match(a: &[Monomial], b: &[Monomial], tol: f64) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = alloc::vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(k, y)| !used[*k] && y.i == x.i && y.exp == x.exp)
            .map(|(k, y)| (k, (y.location - x.location).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap_or(core::cmp::Ordering::Equal))?;
        if best.1 > tol {
            return None;
        }
        used[best.0] = true;
        worst = worst.max(best.1);
    }
    Some(worst)
}

impl QCharacter {
    pub fn total_dim(&self) -> usize {
        self.terms.iter().map(|t| t.mult).sum()
    }

    /// Largest location error of a multiset matching of the terms with
    /// matching tolerance `tol`, or `None` when no matching exists.
    pub fn distance(&self, other: &Self, tol: f64) -> Option<f64> {
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut used = alloc::vec![false; other.terms.len()];
        let mut worst = 0.0f64;
        for t in &self.terms {
            let best = other
                .terms
                .iter()
                .enumerate()
                .filter(|(k, s)| !used[*k] && s.weight == t.weight && s.mult == t.mult)
                .filter_map(|(k, s)| monomials_match(&t.monomial, &s.monomial, tol).map(|d| (k, d)))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap_or(core::cmp::Ordering::Equal))?;
            used[best.0] = true;
            worst = worst.max(best.1);
        }
        Some(worst)
    }

    /// Merge terms with equal weight and monomial.
    fn push_merged(&mut self, term: QTerm) {
        for t in &mut self.terms {
            if t.weight == term.weight && monomials_match(&t.monomial, &term.monomial, LADDER_TOL).is_some() {
                t.mult += term.mult;
                return;
            }
        }
        self.terms.push(term);
    }
}

/// Shift structure of a ladder.
#[derive(Debug, Clone, Copy)]
enum Step {
    /// `x ↦ x + s`.
    Additive(C64),
    /// `x ↦ x·s`.
    Multiplicative(C64),
}

impl Step {
    fn at(&self, base: C64, k: i64) -> C64 {
        match *self {
            Step::Additive(s) => base + s * k as f64,
            Step::Multiplicative(s) => base * s.powi(k as i32),
        }
    }

    /// Offset `k` with `x = at(base, k)`, choosing the closest candidate.
    fn offset(&self, base: C64, x: C64) -> Option<i64> {
        let (lo, hi) = match *self {
            Step::Additive(s) => {
                let t = ((x - base) / s).re.round() as i64;
                (t - 1, t + 1)
            }
            Step::Multiplicative(_) => (-MULTIPLICATIVE_REACH, MULTIPLICATIVE_REACH),
        };
        let reach = if matches!(self, Step::Additive(_)) { ADDITIVE_REACH } else { MULTIPLICATIVE_REACH };
        (lo.max(-reach)..=hi.min(reach))
            .map(|k| (k, (self.at(base, k) - x).norm() / x.norm().max(1.0)))
            .filter(|(_, d)| *d <= LADDER_TOL)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal))
            .map(|(k, _)| k)
    }
}

/// `ladder_factor` on raw data: the exponent of each variable location.
fn ladders(zeros: &[C64], poles: &[C64], step: Step) -> Result<Vec<(C64, i32)>> {
    let mut classes: Vec<(C64, Vec<(i64, i32, C64)>)> = Vec::new();
    for (x, d) in zeros.iter().map(|z| (*z, 1)).chain(poles.iter().map(|p| (*p, -1))) {
        match classes.iter_mut().find_map(|(b, pts)| step.offset(*b, x).map(|k| (pts, k))) {
            Some((pts, k)) => pts.push((k, d, x)),
            None => classes.push((x, alloc::vec![(0, d, x)])),
        }
    }
    let mut out = Vec::new();
    for (base, pts) in classes {
        let lo = pts.iter().map(|p| p.0).min().expect("nonempty class");
        let hi = pts.iter().map(|p| p.0).max().expect("nonempty class");
        let total: i32 = pts.iter().map(|p| p.1).sum();
        if total != 0 {
            return Err(Error::FactorizationFailure(format!(
                "ladder through {base} has {total:+} more zeros than poles"
            )));
        }
        let mut n = 0i32;
        for k in lo..hi {
            n += pts.iter().filter(|p| p.0 == k).map(|p| p.1).sum::<i32>();
            if n != 0 {
                let loc = pts.iter().find(|p| p.0 == k + 1).map_or_else(|| step.at(base, k + 1), |p| p.2);
                out.push((loc, n));
            }
        }
    }
    Ok(out)
}

/// Factor one eigenvalue into `Q`/`R` ladders: returns
/// `(location, exponent)` pairs, positive for roots of `Q`.
pub fn ladder_factor(e: &RationalScalar, step: C64, multiplicative: bool) -> Result<Vec<(C64, i32)>> {
    let s = if multiplicative { Step::Multiplicative(step) } else { Step::Additive(step) };
    ladders(&e.zeros, &e.poles, s)
}

fn expand(i: usize, pairs: &[(C64, i32)]) -> Vec<Monomial> {
    let mut out = Vec::new();
    for &(loc, n) in pairs {
        for _ in 0..n.unsigned_abs() {
            out.push(Monomial { i, location: loc, exp: n.signum() });
        }
    }
    out
}

/// Shared driver: joint eigenvalues per weight, factored per index.
fn character(
    lattice: &WeightLattice,
    blocks: &BlockMap,
    mut factor: impl FnMut(usize, &RationalScalar, i64) -> Result<Vec<(C64, i32)>>,
) -> Result<QCharacter> {
    let rank = lattice.cartan.rank();
    let mut chi = QCharacter::default();
    for (mu, w) in lattice.weights.iter().enumerate() {
        if w.dim == 0 {
            continue;
        }
        if rank == 0 {
            chi.push_merged(QTerm { label: w.label.clone(), weight: w.values.clone(), monomial: Vec::new(), mult: w.dim });
            continue;
        }
        let fields: Vec<&RationalMatrix> = (0..rank).map(|i| &blocks[&(i, mu)]).collect();
        let d = joint_family_decomposition(&fields, DEFAULT_SEED)?;
        for b in &d.blocks {
            let mut monomial = Vec::new();
            for (i, f) in fields.iter().enumerate() {
                let e = block_eigenvalue(f, b)?;
                let pairs = factor(i, &e, w.values[i])?;
                let degree: i32 = pairs.iter().map(|p| p.1).sum();
                if degree as i64 != w.values[i] {
                    return Err(Error::FactorizationFailure(format!(
                        "weight {} has mu(alpha_{i}) = {} but the ladders have degree {degree}",
                        w.label, w.values[i]
                    )));
                }
                monomial.extend(expand(i, &pairs));
            }
            chi.push_merged(QTerm { label: w.label.clone(), weight: w.values.clone(), monomial, mult: b.dim() });
        }
    }
    Ok(chi)
}

/// `qchar_yangian`: `χ_q^Y(V) = Σ dim V[μ,β]·m(μ,β)`.
pub fn qchar_yangian(v: &WeightModule) -> Result<QCharacter> {
    let c = v.cartan().clone();
    character(&v.lattice, &v.xi, |i, e, _| {
        let lead = e.value_at_infinity()?;
        if (lead - 1.0).norm() > LADDER_TOL {
            return Err(Error::FactorizationFailure(format!("eigenvalue tends to {lead} at infinity, not 1")));
        }
        ladder_factor(e, v.hbar * c.d[i] as f64, false)
    })
}

/// `qchar_qloop`: `χ_q^U(𝒱) = Σ dim 𝒱[μ,γ]·M(μ,γ)`.
pub fn qchar_qloop(w: &LoopModule) -> Result<QCharacter> {
    let c = w.cartan().clone();
    character(&w.lattice, &w.psi, |i, e, mu| {
        let qi = c.q_i(w.q, i);
        let want = qi.powi(mu as i32);
        let lead = e.value_at_infinity()?;
        if (lead - want).norm() > LADDER_TOL {
            return Err(Error::FactorizationFailure(format!("eigenvalue tends to {lead} at infinity, expected {want}")));
        }
        ladder_factor(e, qi * qi, true)
    })
}

/// `e_pi_map`: `X_{i,a} ↦ Y_{i,e^{2πia}}`, identity on weights.
pub fn e_pi_map(chi: &QCharacter, branch: &LogBranch) -> Result<QCharacter> {
    let mut seen: Vec<(C64, C64)> = Vec::new();
    let mut out = QCharacter::default();
    for t in &chi.terms {
        let mut monomial = Vec::with_capacity(t.monomial.len());
        for m in &t.monomial {
            if !branch.contains(m.location) {
                return Err(Error::LocationOutsideDomain(format!("{}", m.location)));
            }
            let z = exp2pi(m.location);
            if let Some((a, _)) = seen.iter().find(|(a, y)| (a - m.location).norm() > 1e-9 && (y - z).norm() <= 1e-9) {
                return Err(Error::NonCongruentPi(format!("{a} and {} have the same exponential", m.location)));
            }
            seen.push((m.location, z));
            monomial.push(Monomial { i: m.i, location: z, exp: m.exp });
        }
        out.terms.push(QTerm { monomial, ..t.clone() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::repmodel::{direct_sum, sl2_eval_loop_module, sl2_eval_module, CartanData, Weight};

    #[test]
    fn two_dimensional_character() {
        let (a, h) = (c64(0.2, 0.0), c64(0.3, 0.0));
        let chi = qchar_yangian(&sl2_eval_module(2, a, h).unwrap()).unwrap();
        assert_eq!(chi.terms.len(), 2);
        let top = chi.terms.iter().find(|t| t.weight == [1]).unwrap();
        assert_eq!(top.monomial.len(), 1);
        assert_eq!(top.monomial[0].exp, 1);
        assert!((top.monomial[0].location - a).norm() < 1e-9);
        let bottom = chi.terms.iter().find(|t| t.weight == [-1]).unwrap();
        assert_eq!(bottom.monomial[0].exp, -1);
        assert!((bottom.monomial[0].location - (a + h)).norm() < 1e-9);
    }

    #[test]
    fn three_dimensional_ladders() {
        let (a, h) = (c64(0.2, 0.0), c64(0.3, 0.0));
        let chi = qchar_yangian(&sl2_eval_module(3, a, h).unwrap()).unwrap();
        assert_eq!(chi.total_dim(), 3);
        let top = chi.terms.iter().find(|t| t.weight == [2]).unwrap();
        let mut locs: Vec<f64> = top.monomial.iter().map(|m| m.location.re).collect();
        locs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((locs[0] - 0.2).abs() < 1e-9 && (locs[1] - 0.5).abs() < 1e-9);
        let mid = chi.terms.iter().find(|t| t.weight == [0]).unwrap();
        assert_eq!(mid.monomial.len(), 2);
        assert_eq!(mid.monomial.iter().map(|m| m.exp).sum::<i32>(), 0);
    }

    #[test]
    fn trivial_and_sum() {
        let h = c64(0.3, 0.0);
        let lat = WeightLattice::new(CartanData::sl2(), alloc::vec![Weight { label: "0".into(), values: alloc::vec![0], dim: 1 }]).unwrap();
        let mut xi = BlockMap::new();
        xi.insert((0, 0), RationalMatrix::identity(1));
        let triv = WeightModule::new(lat, h, xi, BlockMap::new(), BlockMap::new()).unwrap();
        let chi = qchar_yangian(&triv).unwrap();
        assert_eq!(chi.terms.len(), 1);
        assert!(chi.terms[0].monomial.is_empty());
        let v = sl2_eval_module(2, c64(0.2, 0.0), h).unwrap();
        let w = sl2_eval_module(2, c64(0.35, 0.0), h).unwrap();
        let s = qchar_yangian(&direct_sum(&v, &w).unwrap()).unwrap();
        let mut union = qchar_yangian(&v).unwrap();
        union.terms.extend(qchar_yangian(&w).unwrap().terms);
        assert!(s.distance(&union, 1e-8).is_some());
    }

    #[test]
    fn loop_character_matches_exponentiated_yangian_one() {
        let (a, h) = (c64(0.2, 0.0), c64(0.3, 0.0));
        let q = C64::from_polar(1.0, core::f64::consts::PI * h.re);
        let chi_u = qchar_qloop(&sl2_eval_loop_module(exp2pi(a), q, Some(h)).unwrap()).unwrap();
        let chi_y = qchar_yangian(&sl2_eval_module(2, a, h).unwrap()).unwrap();
        let mapped = e_pi_map(&chi_y, &LogBranch::standard(h)).unwrap();
        let d = mapped.distance(&chi_u, 1e-6).unwrap();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn unbalanced_ladder_fails() {
        let e = RationalScalar::new(c64(1.0, 0.0), alloc::vec![c64(0.0, 0.0)], alloc::vec![c64(0.7, 0.0)]);
        assert!(matches!(ladder_factor(&e, c64(0.3, 0.0), false), Err(Error::FactorizationFailure(_))));
    }

    #[test]
    fn e_pi_of_origin() {
        let chi = QCharacter {
            terms: alloc::vec![QTerm { label: "1".into(), weight: alloc::vec![1], monomial: alloc::vec![Monomial { i: 0, location: c64(0.0, 0.0), exp: 1 }], mult: 1 }],
        };
        let m = e_pi_map(&chi, &LogBranch::standard(c64(0.3, 0.0))).unwrap();
        assert!((m.terms[0].monomial[0].location - 1.0).norm() < 1e-15);
        assert!(e_pi_map(&QCharacter::default(), &LogBranch::standard(c64(0.3, 0.0))).unwrap().terms.is_empty());
    }
}
