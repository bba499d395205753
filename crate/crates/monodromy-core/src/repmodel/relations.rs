//! Numerical checks of the field relations of both algebras.
//!
//! Every relation is evaluated on the whole space at seeded sample points,
//! as an identity between rational functions. Residuals are relative:
//! `|lhs − rhs| / max(1, largest term)`.

use super::{LoopModule, WeightModule};
use crate::sample::Sampler;
use crate::{linalg, Error, Mat, Result, C64};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Sample points are kept at least this far (relative on the loop side)
/// from poles of the fields and of their shifted arguments.
const SAMPLE_CLEARANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationStatus {
    Checked,
    /// The relation has no instances (rank one Serre relations).
    Vacuous,
    /// The relation is not verified (Serre relations in rank ≥ 2).
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationEntry {
    pub name: String,
    pub residual: f64,
    pub status: RelationStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    pub entries: Vec<RelationEntry>,
    pub tol: f64,
    pub samples: usize,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().filter(|e| e.status == RelationStatus::Checked).map(|e| e.residual).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() < self.tol
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.residual)
    }

    /// The report itself when it passes, `RelationCheckFailed` naming the
    /// worst relation otherwise.
    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            return Ok(self);
        }
        let worst = self
            .entries
            .iter()
            .filter(|e| e.status == RelationStatus::Checked)
            .max_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap_or(core::cmp::Ordering::Equal))
            .expect("a failing report has a checked entry");
        Err(Error::RelationCheckFailed { relation: worst.name.clone(), residual: worst.residual })
    }
}

/// Accumulates the worst residual per relation.
struct Tally {
    names: Vec<&'static str>,
    worst: Vec<f64>,
}

impl Tally {
    fn new(names: &[&'static str]) -> Self {
        Self { names: names.to_vec(), worst: alloc::vec![0.0; names.len()] }
    }

    fn record(&mut self, name: &str, diff: &Mat, terms: &[&Mat]) {
        let scale = terms.iter().map(|t| linalg::max_abs(t)).fold(1.0, f64::max);
        let r = if diff.is_empty() { 0.0 } else { linalg::max_abs(diff) / scale };
        let k = self.names.iter().position(|n| *n == name).expect("known relation");
        if !(r <= self.worst[k]) {
            self.worst[k] = if r.is_nan() { f64::INFINITY } else { r };
        }
    }

    fn finish(self, serre: &'static str, rank: usize, tol: f64, samples: usize) -> RelationReport {
        let mut entries: Vec<RelationEntry> = self
            .names
            .iter()
            .zip(self.worst)
            .map(|(n, r)| RelationEntry { name: n.to_string(), residual: r, status: RelationStatus::Checked })
            .collect();
        let status = if rank <= 1 { RelationStatus::Vacuous } else { RelationStatus::Skipped };
        entries.push(RelationEntry { name: serre.to_string(), residual: 0.0, status });
        RelationReport { entries, tol, samples }
    }
}

fn comm(a: &Mat, b: &Mat) -> Mat {
    linalg::commutator(a, b)
}

/// Seeded `u`-plane sample avoiding the given points.
pub(crate) fn u_samples(avoid: &[C64], count: usize, seed: u64) -> Vec<C64> {
    let mut s = Sampler::new(seed);
    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (-1.5f64, 1.5f64, -1.5f64, 1.5f64);
    for p in avoid {
        lo_re = lo_re.min(p.re - 1.0);
        hi_re = hi_re.max(p.re + 1.0);
        lo_im = lo_im.min(p.im - 1.0);
        hi_im = hi_im.max(p.im + 1.0);
    }
    (0..count).map(|_| s.complex_avoiding((lo_re, hi_re), (lo_im, hi_im), avoid, SAMPLE_CLEARANCE)).collect()
}

/// `check_yangian_relations`: (𝒴0)–(𝒴5) at `samples` seeded pairs `(u, v)`.
pub fn check_yangian_relations(v: &WeightModule, samples: usize, tol: f64, seed: u64) -> Result<RelationReport> {
    let names = ["Y0", "Y1", "Y2", "Y3", "Y4", "Y5"];
    let mut tally = Tally::new(&names);
    let c = v.cartan();
    let rank = c.rank();
    let h = v.hbar;
    if v.dim() == 0 {
        return Ok(tally.finish("Y6", rank, tol, samples));
    }
    let half_a = |i: usize, j: usize| h * (c.d[i] as f64 * c.a[i][j] as f64 / 2.0);
    let poles = v.block_poles();
    let mut avoid = poles.clone();
    for i in 0..rank {
        for j in 0..rank {
            let a = half_a(i, j);
            avoid.extend(poles.iter().flat_map(|p| [p + a, p - a]));
        }
    }
    let coweights: Vec<Mat> = (0..rank).map(|k| v.lattice.coweight_matrix(k)).collect();
    // (𝒴0): the u⁻¹ coefficient of ξᵢ(u) is ħ dᵢ αᵢ∨.
    for i in 0..rank {
        let lead = v.xi_leading_full(i)?;
        let want = &coweights[i] * (h * c.d[i] as f64);
        tally.record("Y0", &(&lead - &want), &[&lead, &want]);
    }
    let lead_x: Vec<[Mat; 2]> = (0..rank).map(|i| Ok([v.x_leading_full(i, 1)?, v.x_leading_full(i, -1)?])).collect::<Result<_>>()?;
    let pts = u_samples(&avoid, 2 * samples, seed);
    for pair in pts.chunks(2) {
        let (u, w) = (pair[0], pair[1]);
        let xi_u: Vec<Mat> = (0..rank).map(|i| v.xi_full(i, u)).collect::<Result<_>>()?;
        let xi_w: Vec<Mat> = (0..rank).map(|i| v.xi_full(i, w)).collect::<Result<_>>()?;
        let x_u: Vec<[Mat; 2]> = (0..rank).map(|i| Ok([v.x_full(i, 1, u)?, v.x_full(i, -1, u)?])).collect::<Result<_>>()?;
        let x_w: Vec<[Mat; 2]> = (0..rank).map(|i| Ok([v.x_full(i, 1, w)?, v.x_full(i, -1, w)?])).collect::<Result<_>>()?;
        for i in 0..rank {
            for j in 0..rank {
                let t = comm(&xi_u[i], &xi_w[j]);
                tally.record("Y1", &t, &[&xi_u[i], &xi_w[j]]);
            }
            for k in 0..rank {
                for (s, sign) in [(0usize, 1.0f64), (1, -1.0)] {
                    let lhs = comm(&coweights[k], &x_u[i][s]);
                    let rhs = &x_u[i][s] * C64::new(sign * c.root_value(i, k) as f64, 0.0);
                    tally.record("Y2", &(&lhs - &rhs), &[&lhs, &rhs]);
                }
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                let a = half_a(i, j);
                for (s, sign) in [(0usize, 1.0f64), (1, -1.0)] {
                    let a_s = a * sign;
                    // (𝒴3)
                    let x_shift = v.x_full(j, if s == 0 { 1 } else { -1 }, u - a_s)?;
                    let l = &xi_u[i] * &x_w[j][s] * (u - w - a_s);
                    let r1 = &x_w[j][s] * &xi_u[i] * (u - w + a_s);
                    let r2 = &x_shift * &xi_u[i] * (a_s * 2.0);
                    tally.record("Y3", &(&l - &r1 + &r2), &[&l, &r1, &r2]);
                    // (𝒴4)
                    let l = &x_u[i][s] * &x_w[j][s] * (u - w - a_s);
                    let r1 = &x_w[j][s] * &x_u[i][s] * (u - w + a_s);
                    let r2 = comm(&lead_x[i][s], &x_w[j][s]) - comm(&x_u[i][s], &lead_x[j][s]);
                    tally.record("Y4", &(&l - &r1 - &r2), &[&l, &r1, &r2]);
                }
                // (𝒴5)
                let l = comm(&x_u[i][0], &x_w[j][1]) * (u - w);
                let r = if i == j { (&xi_u[i] - &xi_w[i]) * (-h) } else { Mat::zeros(l.nrows(), l.ncols()) };
                tally.record("Y5", &(&l - &r), &[&l, &r]);
            }
        }
    }
    Ok(tally.finish("Y6", rank, tol, samples))
}

/// Seeded `z`-plane samples: half in the annulus spanned by the poles,
/// a quarter near `0` and a quarter near `∞`.
pub(crate) fn z_samples(avoid: &[C64], count: usize, seed: u64) -> Vec<C64> {
    let mut s = Sampler::new(seed);
    let mods: Vec<f64> = avoid.iter().map(|p| p.norm()).filter(|m| *m > 0.0).collect();
    let lo = mods.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mods.iter().cloned().fold(0.0, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo.ln(), hi.ln()) } else { (0.0, 0.0) };
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let (a, b) = match k % 4 {
            0 | 1 => (lo - 0.7, hi + 0.7),
            2 => (lo - 4.0, lo - 2.0),
            _ => (hi + 2.0, hi + 4.0),
        };
        let mut best = (C64::new(1.0, 0.0), -1.0);
        for _ in 0..500 {
            let z = C64::from_polar(s.real(a, b).exp(), s.real(0.0, 2.0 * PI));
            let d = avoid.iter().map(|p| (p - z).norm() / p.norm().max(z.norm())).fold(f64::INFINITY, f64::min);
            if d >= SAMPLE_CLEARANCE {
                best = (z, d);
                break;
            }
            if d > best.1 {
                best = (z, d);
            }
        }
        out.push(best.0);
    }
    out
}

/// `check_qloop_relations`: (𝒬𝒧0)–(𝒬𝒧5) at `samples` seeded pairs
/// `(z, w)`, including points near `0` and `∞` where the identities
/// govern the expansions at `z = 0`.
pub fn check_qloop_relations(wm: &LoopModule, samples: usize, tol: f64, seed: u64) -> Result<RelationReport> {
    let names = ["QL0", "QL1", "QL2", "QL3", "QL4", "QL5"];
    let mut tally = Tally::new(&names);
    let c = wm.cartan();
    let rank = c.rank();
    let q = wm.q;
    if wm.dim() == 0 {
        return Ok(tally.finish("QL6", rank, tol, samples));
    }
    let qpow = |i: usize, e: i64| c.q_i(q, i).powi(e as i32);
    let poles = wm.block_poles();
    let mut avoid = poles.clone();
    for i in 0..rank {
        for j in 0..rank {
            let f = qpow(i, c.a[i][j]);
            avoid.extend(poles.iter().flat_map(|p| [p * f, p / f]));
        }
    }
    let n = wm.dim();
    let coweights: Vec<Mat> = (0..rank).map(|k| wm.lattice.coweight_matrix(k)).collect();
    let k_of = |k: usize, scale: i64| -> Mat {
        let mut m = Mat::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = q.powi((scale * coweights[k][(r, r)].re.round() as i64) as i32);
        }
        m
    };
    let mut psi0 = Vec::with_capacity(rank);
    for i in 0..rank {
        let (inf, zero) = wm.psi_limits_full(i)?;
        let want_inf = k_of(i, c.d[i] as i64);
        let want_zero = k_of(i, -(c.d[i] as i64));
        tally.record("QL0", &(&inf - &want_inf), &[&inf, &want_inf]);
        tally.record("QL0", &(&zero - &want_zero), &[&zero, &want_zero]);
        psi0.push(zero);
    }
    let x0: Vec<[Mat; 2]> = (0..rank).map(|i| Ok([wm.x_infinity_full(i, 1)?, wm.x_infinity_full(i, -1)?])).collect::<Result<_>>()?;
    let pts = z_samples(&avoid, 2 * samples, seed);
    for pair in pts.chunks(2) {
        let (z, w) = (pair[0], pair[1]);
        let psi_z: Vec<Mat> = (0..rank).map(|i| wm.psi_full(i, z)).collect::<Result<_>>()?;
        let psi_w: Vec<Mat> = (0..rank).map(|i| wm.psi_full(i, w)).collect::<Result<_>>()?;
        let x_z: Vec<[Mat; 2]> = (0..rank).map(|i| Ok([wm.x_full(i, 1, z)?, wm.x_full(i, -1, z)?])).collect::<Result<_>>()?;
        let x_w: Vec<[Mat; 2]> = (0..rank).map(|i| Ok([wm.x_full(i, 1, w)?, wm.x_full(i, -1, w)?])).collect::<Result<_>>()?;
        for i in 0..rank {
            for j in 0..rank {
                let t = comm(&psi_z[i], &psi_w[j]);
                tally.record("QL1", &t, &[&psi_z[i], &psi_w[j]]);
            }
            for k in 0..rank {
                let kk = k_of(k, 1);
                let kinv = k_of(k, -1);
                for (s, sign) in [(0usize, 1i64), (1, -1)] {
                    let lhs = &kk * &x_z[i][s] * &kinv;
                    let rhs = &x_z[i][s] * q.powi((sign * c.root_value(i, k)) as i32);
                    tally.record("QL2", &(&lhs - &rhs), &[&lhs, &rhs]);
                }
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                for (s, sign) in [(0usize, 1i64), (1, -1)] {
                    let f = qpow(i, sign * c.a[i][j]);
                    let finv = qpow(i, -sign * c.a[i][j]);
                    // (𝒬𝒧3)
                    let x_dil = wm.x_full(j, sign, finv * z)?;
                    let l = &psi_z[i] * &x_w[j][s] * (z - f * w);
                    let r1 = &x_w[j][s] * &psi_z[i] * (f * z - w);
                    let r2 = &x_dil * &psi_z[i] * ((f - finv) * f * w);
                    tally.record("QL3", &(&l - &r1 + &r2), &[&l, &r1, &r2]);
                    // (𝒬𝒧4)
                    let l1 = &x_z[i][s] * &x_w[j][s] * (z - f * w);
                    let l2 = &x_w[j][s] * &x_z[i][s] * (f * z - w);
                    let r1 = (&x0[i][s] * &x_w[j][s] - &x_w[j][s] * &x0[i][s] * f) * z;
                    let r2 = (&x0[j][s] * &x_z[i][s] - &x_z[i][s] * &x0[j][s] * f) * w;
                    tally.record("QL4", &(&l1 - &l2 - &r1 - &r2), &[&l1, &l2, &r1, &r2]);
                }
                // (𝒬𝒧5)
                let l = comm(&x_z[i][0], &x_w[j][1]) * (z - w);
                let r = if i == j {
                    let qi = c.q_i(q, i);
                    (&psi_w[i] * z - &psi_z[i] * w - &psi0[i] * (z - w)) / (qi - qi.inv())
                } else {
                    Mat::zeros(n, n)
                };
                tally.record("QL5", &(&l - &r), &[&l, &r]);
            }
        }
    }
    Ok(tally.finish("QL6", rank, tol, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::ratmat::RationalScalar;
    use crate::repmodel::{direct_sum, sl2_eval_loop_module, sl2_eval_module};

    #[test]
    fn evaluation_modules_satisfy_yangian_relations() {
        let h = c64(0.3, 0.0);
        for n in 2..=4 {
            let v = sl2_eval_module(n, c64(0.2, 0.0), h).unwrap();
            let r = check_yangian_relations(&v, 30, 1e-9, 1).unwrap();
            assert!(r.passed(), "n = {n}: {r:?}");
        }
        let s = direct_sum(&sl2_eval_module(2, c64(0.1, 0.0), h).unwrap(), &sl2_eval_module(3, c64(0.45, 0.1), h).unwrap()).unwrap();
        assert!(check_yangian_relations(&s, 20, 1e-9, 2).unwrap().passed());
    }

    #[test]
    fn perturbed_xi_is_detected() {
        let h = c64(0.3, 0.0);
        let mut v = sl2_eval_module(2, c64(0.1, 0.0), h).unwrap();
        let e = v.xi[&(0, 0)].entry(0, 0).add(&RationalScalar::pole_term(c64(1e-3, 0.0), c64(0.1, 0.0), 1));
        v.xi.insert((0, 0), crate::ratmat::RationalMatrix::scalar(e));
        let r = check_yangian_relations(&v, 30, 1e-9, 1).unwrap();
        let y3 = r.residual("Y3").unwrap();
        assert!(y3 > 1e-5 && y3 < 1e-1, "{y3}");
        assert!(!r.passed());
    }

    #[test]
    fn planted_loop_module_satisfies_relations() {
        let h = 0.3;
        let q = C64::from_polar(1.0, PI * h);
        let w = sl2_eval_loop_module(crate::branch::exp2pi(c64(0.1, 0.0)), q, Some(c64(h, 0.0))).unwrap();
        let r = check_qloop_relations(&w, 30, 1e-10, 3).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn perturbed_psi_is_detected() {
        let q = C64::from_polar(1.0, PI * 0.3);
        let alpha = crate::branch::exp2pi(c64(0.1, 0.0));
        let mut w = sl2_eval_loop_module(alpha, q, None).unwrap();
        let mut e = w.psi[&(0, 0)].entry(0, 0).clone();
        e.zeros[0] *= 1.0 + 1e-4;
        w.psi.insert((0, 0), crate::ratmat::RationalMatrix::scalar(e));
        let r = check_qloop_relations(&w, 30, 1e-10, 3).unwrap();
        assert!(r.residual("QL3").unwrap() > 1e-6);
    }

    #[test]
    fn trivial_loop_module_passes() {
        let q = C64::from_polar(1.0, PI * 0.3);
        let w = super::super::LoopModule::zero(super::super::CartanData::sl2(), q, None).unwrap();
        assert!(check_qloop_relations(&w, 5, 1e-12, 0).unwrap().passed());
    }
}
