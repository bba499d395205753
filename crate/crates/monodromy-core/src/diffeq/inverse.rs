//! Inverse monodromy for commuting data: recover `A(u)` from its
//! connection matrix `S(z)` and `A₀`, given a branch map `log_Π`.

use super::connection::connection_matrix;
use super::joint::{block_eigenvalue, joint_decomposition, JointBlock, JointDecomposition};
use super::{fundamental_solutions, relative_commutator, sample_points, DifferenceSystem};
use super::{COMMUTE_TOL, DEFAULT_TRUNCATION, DEFAULT_UPSILON_ORDER};
use crate::branch::{exp2pi, LogBranch};
use crate::ratmat::fit::fit_matrix_with_poles;
use crate::ratmat::matrix::POLE_CLUSTER_TOL;
use crate::ratmat::{RationalMatrix, RationalScalar};
use crate::sample::DEFAULT_SEED;
use crate::{linalg, poly, specfun, Error, Mat, Result, C64, I};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

pub const CONSISTENCY_TOL: f64 = 1e-8;
pub const RELATION_TOL: f64 = 1e-8;
pub const UNIPOTENT_TOL: f64 = 1e-9;
pub const ROUNDTRIP_TOL: f64 = 1e-7;
const QUAD_NODES: usize = 128;

/// Logarithmic data of a unipotent connection matrix and the pieces of
/// its additive factorization.
#[derive(Debug, Clone)]
pub struct UnipotentData {
    /// Poles `δ_k` of `S(z)` carrying nonzero coefficients.
    pub deltas: Vec<C64>,
    /// `d_k = log_Π δ_k`.
    pub ds: Vec<C64>,
    /// `coeffs[k][r−1] = C_{r,k}` in `log S(z) = πiA₀ + Σ C_{r,k}/(z−δ_k)^r`.
    pub coeffs: Vec<Vec<Mat>>,
    pub n0: Mat,
    /// `|Σ C_{r,k}(−δ_k)^{−r} + 2πiA₀|`, relative to `max(1, |A₀|)`.
    pub relation_residual: f64,
}

/// Coefficients of `P_r(x) = ∏_{j=1}^{r−1}(x/(2πij) + 1)`, ascending.
pub fn derivative_operator(r: usize) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for j in 1..r {
        p = poly::mul(&p, &[C64::new(1.0, 0.0), (I * 2.0 * PI * j as f64).inv()]);
    }
    p
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `∂^m ψ(w)` through the Cauchy integral of the digamma function.
fn digamma_derivative(w: C64, m: usize) -> Result<C64> {
    if m == 0 {
        return specfun::digamma(w);
    }
    let nearest_pole = w.re.round().min(0.0);
    let dist = (w - nearest_pole).norm();
    let rho = (dist / 2.0).min(0.25);
    let nodes = 64;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..nodes {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        acc += specfun::digamma(w + e * rho)? / (e * rho).powi(m as i32);
    }
    Ok(acc * factorial(m) / nodes as f64)
}

impl UnipotentData {
    /// `E(u) = −(1/2πi) Σ (−δ_k)^{−r} P_r(∂_u)(1/(u−d_k)) C_{r,k}`.
    pub fn exponent(&self, u: C64) -> Mat {
        let n = self.n0.nrows();
        let mut acc = Mat::zeros(n, n);
        for (k, cs) in self.coeffs.iter().enumerate() {
            let (delta, d) = (self.deltas[k], self.ds[k]);
            for (ri, c) in cs.iter().enumerate() {
                let r = ri + 1;
                let p = derivative_operator(r);
                let mut op = C64::new(0.0, 0.0);
                for (m, pm) in p.iter().enumerate() {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    op += pm * sign * factorial(m) * (u - d).powi(-(m as i32) - 1);
                }
                acc += c * ((-delta).powi(-(r as i32)) * op);
            }
        }
        acc * (-(I * 2.0 * PI).inv())
    }

    /// `A_U(u) = exp(E(u))`, a finite series.
    pub fn coefficient(&self, u: C64) -> Mat {
        linalg::exp_nilpotent(&self.exponent(u))
    }

    /// `φ^±(u) = ∓πiA₀/2 + Σ φ^±_r(u, d_k) C_{r,k}`; `sign = +1` for `φ⁺`.
    pub fn additive_solution(&self, u: C64, sign: f64) -> Result<Mat> {
        let mut acc = &self.n0 * (-sign * I * PI / 2.0);
        for (k, cs) in self.coeffs.iter().enumerate() {
            let (delta, d) = (self.deltas[k], self.ds[k]);
            let v = u - d;
            for (ri, c) in cs.iter().enumerate() {
                let r = ri + 1;
                let p = derivative_operator(r);
                let mut val = C64::new(sign / 2.0, 0.0);
                for (m, pm) in p.iter().enumerate() {
                    let dpsi = if sign > 0.0 {
                        digamma_derivative(v, m)?
                    } else {
                        let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                        digamma_derivative(1.0 - v, m)? * s
                    };
                    val += pm * dpsi / (I * PI);
                }
                acc += c * (-(-delta).powi(-(r as i32)) / 2.0 * val);
            }
        }
        Ok(acc)
    }

    /// Largest pole order of `A_U` at each `d_k`.
    pub fn pole_orders(&self) -> Vec<(C64, usize)> {
        let n = self.n0.nrows();
        self.coeffs
            .iter()
            .zip(&self.ds)
            .map(|(cs, &d)| (d, cs.len() * n.saturating_sub(1).max(1)))
            .collect()
    }
}

/// Semisimple block: `λ(z) = c∏(z−α)/∏(z−β)` ↦ `∏(u−a)/∏(u−b)` with
/// `a = log_Π α`, `b = log_Π β`, subject to `Σb − Σa = μ`.
pub fn semisimple_block(lambda: &RationalScalar, mu: C64, branch: &LogBranch) -> Result<RationalScalar> {
    let a: Vec<C64> = lambda.zeros.iter().map(|&z| branch.log(z)).collect::<Result<_>>()?;
    let b: Vec<C64> = lambda.poles.iter().map(|&z| branch.log(z)).collect::<Result<_>>()?;
    let sum = b.iter().fold(C64::new(0.0, 0.0), |s, x| s + x) - a.iter().fold(C64::new(0.0, 0.0), |s, x| s + x);
    let dev = (sum - mu).norm();
    if dev > CONSISTENCY_TOL * mu.norm().max(1.0) {
        return Err(Error::ConsistencyViolation(dev));
    }
    Ok(RationalScalar::new(C64::new(1.0, 0.0), a, b))
}

/// Residue coefficients and branch data of `log S_U(z)`.
pub fn unipotent_block<F>(s_u: F, candidates: &[(C64, usize)], n0: &Mat, branch: &LogBranch) -> Result<UnipotentData>
where
    F: Fn(C64) -> Result<Mat>,
{
    let n = n0.nrows();
    let mut deltas = Vec::new();
    let mut ds = Vec::new();
    let mut coeffs = Vec::new();
    let scale = linalg::max_abs(n0).max(1.0);
    if n > 1 {
        for (k, &(delta, order)) in candidates.iter().enumerate() {
            let sep = candidates
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, c)| (c.0 - delta).norm())
                .fold(f64::INFINITY, f64::min);
            let rho = (sep / 3.0).min(delta.norm() / 2.0).min(0.5 * delta.norm().max(1e-300));
            let bound = (order * (n - 1)).max(1);
            let mut cs = Vec::with_capacity(bound);
            let mut samples = Vec::with_capacity(QUAD_NODES);
            for j in 0..QUAD_NODES {
                let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / QUAD_NODES as f64);
                let z = delta + e * rho;
                samples.push((e * rho, linalg::log_unipotent(&s_u(z)?)));
            }
            for r in 1..=bound {
                let mut acc = Mat::zeros(n, n);
                for (w, l) in &samples {
                    acc += l * (w.powi(r as i32) / QUAD_NODES as f64);
                }
                cs.push(acc);
            }
            while cs.last().is_some_and(|c| linalg::max_abs(c) <= 1e-11 * scale) {
                cs.pop();
            }
            if !cs.is_empty() {
                deltas.push(delta);
                ds.push(branch.log(delta)?);
                coeffs.push(cs);
            }
        }
    }
    let mut sum = n0 * (I * 2.0 * PI);
    for (k, cs) in coeffs.iter().enumerate() {
        for (ri, c) in cs.iter().enumerate() {
            sum += c * (-deltas[k]).powi(-(ri as i32) - 1);
        }
    }
    let relation_residual = linalg::max_abs(&sum) / scale;
    if relation_residual > RELATION_TOL {
        return Err(Error::RelationViolation(relation_residual));
    }
    Ok(UnipotentData { deltas, ds, coeffs, n0: n0.clone(), relation_residual })
}

/// Inputs checked and split into joint blocks.
struct Prepared {
    decomposition: JointDecomposition,
    lambdas: Vec<RationalScalar>,
    mus: Vec<C64>,
    nilpotents: Vec<Mat>,
}

fn z_samples(s: &RationalMatrix, count: usize) -> Vec<C64> {
    let avoid: Vec<C64> = s.pole_set().into_iter().chain(crate::ratmat::zero_set(s)).chain([C64::new(0.0, 0.0)]).collect();
    sample_points(&avoid, count, DEFAULT_SEED ^ 0x51)
}

fn prepare(s: &RationalMatrix, a0: &Mat, branch: &LogBranch) -> Result<Prepared> {
    branch.validate()?;
    let n = s.rows();
    if a0.shape() != (n, n) {
        return Err(Error::InvalidInput("A0 and S have different sizes".into()));
    }
    let pts = z_samples(s, 13);
    let vals: Vec<Mat> = pts.iter().map(|&z| s.eval(z)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (k, v) in vals.iter().enumerate() {
        worst = worst.max(relative_commutator(v, &vals[(k + 1) % vals.len()]));
        if linalg::max_abs(a0) > 0.0 {
            worst = worst.max(relative_commutator(v, a0));
        }
    }
    if worst > COMMUTE_TOL {
        return Err(Error::NotCommuting(worst));
    }
    let mut family: Vec<Mat> = vals[..3].to_vec();
    family.push(a0.clone());
    let decomposition = joint_decomposition(&family, DEFAULT_SEED)?;
    for v in &vals[3..] {
        let r = decomposition.residual(v);
        if r > super::joint::VALIDATION_TOL {
            return Err(Error::ClusterAmbiguity(format!("validation residual {r:.3e}")));
        }
    }
    let lambdas: Vec<RationalScalar> =
        decomposition.blocks.iter().map(|b| block_eigenvalue(s, b)).collect::<Result<_>>()?;
    let mut mus = Vec::new();
    let mut nilpotents = Vec::new();
    for b in &decomposition.blocks {
        let ra = b.restrict(a0);
        let mu = ra.trace() / b.dim() as f64;
        nilpotents.push(ra - linalg::identity(b.dim()) * mu);
        mus.push(mu);
    }
    Ok(Prepared { decomposition, lambdas, mus, nilpotents })
}

/// Unipotent part of `S` on a block, `Q S P / λ`.
fn unipotent_part<'a>(s: &'a RationalMatrix, b: &'a JointBlock, l: &'a RationalScalar) -> impl Fn(C64) -> Result<Mat> + 'a {
    move |z| Ok(b.restrict(&s.eval(z)?) / l.eval(z)?)
}

fn unipotent_candidates(s: &RationalMatrix, l: &RationalScalar) -> Vec<(C64, usize)> {
    let mut c: Vec<(C64, usize)> = s.poles();
    for (z, m) in poly::cluster(&l.zeros, POLE_CLUSTER_TOL) {
        match c.iter_mut().find(|p| (p.0 - z).norm() <= POLE_CLUSTER_TOL) {
            Some(slot) => slot.1 = slot.1.max(m),
            None => c.push((z, m)),
        }
    }
    c
}

/// Assemble `A(u) = Σ_b P_b A_b(u) Q_b` as a rational matrix.
fn assemble(blocks: &[JointBlock], parts: &[(RationalScalar, Option<UnipotentData>)], n: usize) -> Result<DifferenceSystem> {
    let mut poles: Vec<(C64, usize)> = Vec::new();
    let mut push = |p: C64, m: usize| match poles.iter_mut().find(|q| (q.0 - p).norm() <= POLE_CLUSTER_TOL) {
        Some(slot) => slot.1 = slot.1.max(m),
        None => poles.push((p, m)),
    };
    for (ss, uni) in parts {
        let mut local: Vec<(C64, usize)> = poly::cluster(&ss.poles, POLE_CLUSTER_TOL);
        if let Some(u) = uni {
            for (d, m) in u.pole_orders() {
                match local.iter_mut().find(|q| (q.0 - d).norm() <= POLE_CLUSTER_TOL) {
                    Some(slot) => slot.1 += m,
                    None => local.push((d, m)),
                }
            }
        }
        for (p, m) in local {
            push(p, m);
        }
    }
    let eval = |u: C64| -> Result<Mat> {
        let mut acc = Mat::zeros(n, n);
        for (b, (ss, uni)) in blocks.iter().zip(parts) {
            let mut blk = linalg::identity(b.dim()) * ss.eval(u)?;
            if let Some(un) = uni {
                blk *= un.coefficient(u);
            }
            acc += &b.p * blk * &b.q;
        }
        Ok(acc)
    };
    let a = fit_matrix_with_poles(eval, n, n, &poles, 1e-9)?;
    DifferenceSystem::new(a)
}

#[derive(Debug, Clone)]
pub struct InverseReport {
    pub consistency: f64,
    pub relation_residual: f64,
    /// `|S_forward − S|` at sample points, relative.
    pub forward_residual: f64,
    /// Branch logarithms produced (zeros, poles and unipotent points).
    pub logs: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct InverseResult {
    pub system: DifferenceSystem,
    /// Joint blocks of `S` and `A₀`; unipotent data is in block coordinates.
    pub blocks: Vec<JointBlock>,
    pub unipotent: Vec<Option<UnipotentData>>,
    pub report: InverseReport,
}

impl InverseResult {
    /// `φ⁻(u) − φ⁺(u)` of the additive factorizations, in the original
    /// coordinates; equals `log S(e^{2πiu})` when `S` is unipotent.
    pub fn additive_difference(&self, u: C64) -> Result<Mat> {
        let n = self.system.dim();
        let mut acc = Mat::zeros(n, n);
        for (b, data) in self.blocks.iter().zip(&self.unipotent) {
            if let Some(d) = data {
                let diff = d.additive_solution(u, -1.0)? - d.additive_solution(u, 1.0)?;
                acc += &b.p * diff * &b.q;
            }
        }
        Ok(acc)
    }
}

fn forward_residual(sys: &DifferenceSystem, s: &RationalMatrix) -> Result<f64> {
    let pair = fundamental_solutions(sys, DEFAULT_TRUNCATION, DEFAULT_UPSILON_ORDER)?;
    let conn = connection_matrix(&pair)?;
    let mut worst = 0.0f64;
    for z in z_samples(s, 20) {
        let a = conn.s.eval(z)?;
        let b = s.eval(z)?;
        worst = worst.max(linalg::max_diff(&a, &b) / linalg::max_abs(&b).max(1.0));
    }
    Ok(worst)
}

fn solve(s: &RationalMatrix, a0: &Mat, branch: &LogBranch, mode: Mode) -> Result<InverseResult> {
    let n = s.rows();
    if n == 0 {
        return Err(Error::InvalidInput("empty connection matrix".into()));
    }
    let prep = prepare(s, a0, branch)?;
    let mut parts = Vec::new();
    let mut logs = Vec::new();
    let mut relation = 0.0f64;
    let mut consistency = 0.0f64;
    for (k, b) in prep.decomposition.blocks.iter().enumerate() {
        let l = &prep.lambdas[k];
        let mu = prep.mus[k];
        if mode == Mode::Unipotent {
            let dev = (l.value_at_infinity()? - 1.0).norm();
            if mu.norm() > UNIPOTENT_TOL || dev > UNIPOTENT_TOL || !l.zeros.is_empty() || !l.poles.is_empty() {
                return Err(Error::NotUnipotent(dev.max(mu.norm())));
            }
        }
        let ss = semisimple_block(l, mu, branch)?;
        let sum_b: C64 = ss.poles.iter().sum();
        let sum_a: C64 = ss.zeros.iter().sum();
        consistency = consistency.max((sum_b - sum_a - mu).norm());
        logs.extend(ss.zeros.iter().copied());
        logs.extend(ss.poles.iter().copied());
        let uni = if b.dim() > 1 {
            let nil = &prep.nilpotents[k];
            if mode == Mode::Semisimple {
                let j = unipotent_part(s, b, l);
                let probe = j(z_samples(s, 1)[0])?;
                let dev = linalg::max_diff(&probe, &linalg::identity(b.dim()));
                if dev > UNIPOTENT_TOL || linalg::max_abs(nil) > UNIPOTENT_TOL {
                    return Err(Error::Unsupported(format!("connection matrix is not semisimple ({dev:.3e})")));
                }
                None
            } else {
                let data = unipotent_block(unipotent_part(s, b, l), &unipotent_candidates(s, l), nil, branch)?;
                relation = relation.max(data.relation_residual);
                logs.extend(data.ds.iter().copied());
                if data.coeffs.is_empty() {
                    None
                } else {
                    Some(data)
                }
            }
        } else {
            None
        };
        parts.push((ss, uni));
    }
    let mut distinct = Vec::new();
    for x in &logs {
        if !distinct.iter().any(|y: &C64| (y - x).norm() <= POLE_CLUSTER_TOL) {
            distinct.push(*x);
        }
    }
    LogBranch::check_noncongruent(&distinct)?;
    let system = assemble(&prep.decomposition.blocks, &parts, n)?;
    let forward = forward_residual(&system, s)?;
    if forward > ROUNDTRIP_TOL {
        return Err(Error::FitResidualTooLarge(forward));
    }
    let unipotent = parts.into_iter().map(|(_, u)| u).collect();
    Ok(InverseResult {
        system,
        blocks: prep.decomposition.blocks,
        unipotent,
        report: InverseReport { consistency, relation_residual: relation, forward_residual: forward, logs: distinct },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Semisimple,
    Unipotent,
    General,
}

/// `inverse_semisimple`: `S` must be semisimple.
pub fn inverse_semisimple(s: &RationalMatrix, a0: &Mat, branch: &LogBranch) -> Result<InverseResult> {
    solve(s, a0, branch, Mode::Semisimple)
}

/// `inverse_unipotent`: `S` unipotent and `A₀` nilpotent.
pub fn inverse_unipotent(s: &RationalMatrix, a0: &Mat, branch: &LogBranch) -> Result<InverseResult> {
    solve(s, a0, branch, Mode::Unipotent)
}

/// `inverse_abelian`: split `S` into joint blocks, factor the semisimple
/// and unipotent parts of each and recombine.
pub fn inverse_abelian(s: &RationalMatrix, a0: &Mat, branch: &LogBranch) -> Result<InverseResult> {
    solve(s, a0, branch, Mode::General)
}

/// `log S(z)` for the checks: `u` with `z = e^{2πiu}`.
pub fn log_connection(s: &RationalMatrix, u: C64) -> Result<Mat> {
    Ok(linalg::log_unipotent(&s.eval(exp2pi(u))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn nilpotent() -> Mat {
        let mut n = Mat::zeros(2, 2);
        n[(0, 1)] = c64(1.0, 0.0);
        n
    }

    #[test]
    fn operator_polynomial() {
        let p = derivative_operator(3);
        assert_eq!(p.len(), 3);
        let want = (I * 2.0 * PI).inv() + (I * 4.0 * PI).inv();
        assert!((p[1] - want).norm() < 1e-15);
    }

    #[test]
    fn digamma_derivative_matches_trigamma_at_one() {
        let t = digamma_derivative(c64(1.0, 0.0), 1).unwrap();
        assert!((t.re - PI * PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_round_trip() {
        let (a1, b1, a2, b2) = (c64(0.1, 0.05), c64(0.4, 0.0), c64(0.55, -0.1), c64(0.3, 0.2));
        let a = RationalMatrix::diagonal(vec![RationalScalar::ratio(a1, b1), RationalScalar::ratio(a2, b2)]);
        let sys = DifferenceSystem::new(a).unwrap();
        let pair = fundamental_solutions(&sys, 64, 12).unwrap();
        let conn = connection_matrix(&pair).unwrap();
        let branch = LogBranch::strip(c64(0.3, 0.0), -0.3);
        let inv = inverse_abelian(&conn.s, &sys.a0, &branch).unwrap();
        let u = c64(1.7, 0.3);
        let d = linalg::max_diff(&inv.system.eval(u).unwrap(), &sys.eval(u).unwrap());
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn jordan_block_round_trip() {
        let d = c64(0.2, 0.1);
        let c = c64(0.3, 0.0);
        let a = RationalMatrix::identity(2).add(&RationalMatrix::scalar_times(&RationalScalar::pole_term(c, d, 1), &nilpotent()));
        let sys = DifferenceSystem::new(a).unwrap();
        assert!(sys.abelian);
        let pair = fundamental_solutions(&sys, 64, 12).unwrap();
        let conn = connection_matrix(&pair).unwrap();
        let branch = LogBranch::strip(c64(0.3, 0.0), -0.3);
        let inv = inverse_unipotent(&conn.s, &sys.a0, &branch).unwrap();
        let u = c64(1.7, 0.3);
        let dd = linalg::max_diff(&inv.system.eval(u).unwrap(), &sys.eval(u).unwrap());
        assert!(dd < 1e-8, "{dd}");
        assert!(inv.unipotent[0].is_some());
        for u in [c64(0.37, 0.4), c64(-0.8, -0.3)] {
            let lhs = inv.additive_difference(u).unwrap();
            let rhs = log_connection(&conn.s, u).unwrap();
            assert!(linalg::max_diff(&lhs, &rhs) < 1e-7);
        }
    }
}
