//! Canonical fundamental solutions `φ±`.
//!
//! Route one is a finite product matched to the asymptotic tail:
//! `φ⁺(u) = A(u)⁻¹⋯A(u+N−1)⁻¹ Υ(u+N)(u+N)^{A₀}` and
//! `φ⁻(u) = A(u−1)⋯A(u−N) Υ(u−N)(−(u−N))^{A₀}`.
//!
//! Route two (commuting data only) splits off Gamma prefactors,
//! `φ⁺ = Γ(u)/Γ(u−A₀)·φ̄⁺` and `φ⁻ = Γ(1−u+A₀)/Γ(1−u)·φ̄⁻`, where `φ̄±`
//! solve the system with `Ā(u) = (1 − A₀/u)A(u) = 1 + O(u⁻²)`.

use super::upsilon::{upsilon_from_taylor, Upsilon};
use super::{principal_power, DifferenceSystem};
use crate::sample::{Sampler, DEFAULT_SEED};
use crate::{linalg, specfun, Error, Mat, Result, C64};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub const DEFAULT_TRUNCATION: usize = 64;
pub const DEFAULT_UPSILON_ORDER: usize = 12;
/// Probe points closer than this to a singular translate are rejected.
pub const POLE_HIT_TOL: f64 = 1e-9;
/// Largest admissible change of `φ±` when the truncation is doubled.
pub const DOUBLING_TOL: f64 = 1e-7;

/// Evaluators for `φ±` of one system with fixed truncation data.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    sys: DifferenceSystem,
    pub truncation: usize,
    pub upsilon_order: usize,
    upsilon: Upsilon,
    /// Route-two data: `Ῡ` for `Ā` (commuting systems only).
    upsilon_bar: Option<Upsilon>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalReport {
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub doubling_delta: f64,
    pub route_delta: Option<f64>,
    pub probes: usize,
}

/// `fundamental_solutions`: build `φ±` with product length `n` and `k`
/// asymptotic coefficients.
pub fn fundamental_solutions(sys: &DifferenceSystem, n: usize, k: usize) -> Result<FundamentalPair> {
    if n < 50 {
        return Err(Error::InvalidInput(alloc::format!("truncation {n} is below 50")));
    }
    if !sys.abelian && !sys.certificate.is_valid() {
        return Err(Error::ResonantSystem { order: 0, gap: sys.certificate.min_gap });
    }
    let a0_zero = linalg::max_abs(&sys.a0) == 0.0;
    if !sys.abelian && !a0_zero {
        return Err(Error::Unsupported("non-abelian systems are supported only with A0 = 0".into()));
    }
    let taylor = sys.a.taylor_infinity(k + 1)?;
    let upsilon = Upsilon { coeffs: upsilon_from_taylor(&taylor, &sys.a0, sys.abelian, k)? };
    let upsilon_bar = if sys.abelian {
        let dim = sys.dim();
        let mut bar = Vec::with_capacity(taylor.len());
        for (m, t) in taylor.iter().enumerate() {
            let prev = if m == 0 { Mat::zeros(dim, dim) } else { &sys.a0 * &taylor[m - 1] };
            bar.push(t - prev);
        }
        let zero = Mat::zeros(dim, dim);
        Some(Upsilon { coeffs: upsilon_from_taylor(&bar, &zero, true, k)? })
    } else {
        None
    };
    Ok(FundamentalPair { sys: sys.clone(), truncation: n, upsilon_order: k, upsilon, upsilon_bar })
}

impl FundamentalPair {
    pub fn system(&self) -> &DifferenceSystem {
        &self.sys
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    /// Same system with a different product length.
    pub fn with_truncation(&self, n: usize) -> Result<Self> {
        fundamental_solutions(&self.sys, n, self.upsilon_order)
    }

    /// Distance from `u + offsets` to 𝒫 ∪ 𝒵.
    fn guard(&self, u: C64, offsets: impl Iterator<Item = i64>) -> Result<()> {
        let sigma = self.sys.sigma();
        let mut d = f64::INFINITY;
        for n in offsets {
            let v = u + n as f64;
            for p in &sigma {
                d = d.min((v - p).norm());
            }
        }
        if d < POLE_HIT_TOL {
            return Err(Error::PoleHit { distance: d });
        }
        Ok(())
    }

    fn a_at(&self, v: C64) -> Result<Mat> {
        self.sys.a.eval(v).map_err(|e| match e {
            Error::NearPole { distance } => Error::PoleHit { distance },
            other => other,
        })
    }

    fn inv(m: &Mat) -> Result<Mat> {
        linalg::inverse(m).map_err(|_| Error::PoleHit { distance: 0.0 })
    }

    /// `φ⁺(u)`.
    pub fn phi_plus(&self, u: C64) -> Result<Mat> {
        let n = self.truncation;
        self.guard(u, 0..n as i64)?;
        let v = u + n as f64;
        let mut acc = self.upsilon.eval(v) * principal_power(&self.sys.a0, v);
        for j in (0..n).rev() {
            acc = Self::inv(&self.a_at(u + j as f64)?)? * acc;
        }
        Ok(acc)
    }

    /// `φ⁺(u)⁻¹` as a product of coefficient values.
    pub fn phi_plus_inv(&self, u: C64) -> Result<Mat> {
        let n = self.truncation;
        self.guard(u, 0..n as i64)?;
        let v = u + n as f64;
        let mut acc = principal_power(&(-&self.sys.a0), v) * Self::inv(&self.upsilon.eval(v))?;
        for j in (0..n).rev() {
            acc *= self.a_at(u + j as f64)?;
        }
        Ok(acc)
    }

    /// `φ⁻(u)`.
    pub fn phi_minus(&self, u: C64) -> Result<Mat> {
        let n = self.truncation;
        self.guard(u, (1..=n as i64).map(|j| -j))?;
        let v = u - n as f64;
        let mut acc = self.upsilon.eval(v) * principal_power(&self.sys.a0, -v);
        for j in (1..=n).rev() {
            acc = self.a_at(u - j as f64)? * acc;
        }
        Ok(acc)
    }

    /// `φ⁻(u)⁻¹`.
    pub fn phi_minus_inv(&self, u: C64) -> Result<Mat> {
        let n = self.truncation;
        self.guard(u, (1..=n as i64).map(|j| -j))?;
        let v = u - n as f64;
        let mut acc = principal_power(&(-&self.sys.a0), -v) * Self::inv(&self.upsilon.eval(v))?;
        for j in (1..=n).rev() {
            acc *= Self::inv(&self.a_at(u - j as f64)?)?;
        }
        Ok(acc)
    }

    fn a_bar(&self, v: C64) -> Result<Mat> {
        let dim = self.dim();
        Ok((linalg::identity(dim) - &self.sys.a0 * v.inv()) * self.a_at(v)?)
    }

    /// `f(A₀)` by the Cauchy integral around the spectrum of `A₀`.
    fn gamma_prefactor(&self, f: impl Fn(C64) -> Result<C64>) -> Result<Mat> {
        let ev = linalg::eigenvalues(&self.sys.a0);
        let c = ev.iter().fold(C64::new(0.0, 0.0), |a, &b| a + b) / ev.len().max(1) as f64;
        let r = ev.iter().map(|x| (x - c).norm()).fold(0.0, f64::max) + 1.0;
        linalg::holomorphic_calculus(f, &self.sys.a0, c, r, 128)
    }

    /// Route-two value of `φ⁺(u)`; `None` for non-commuting systems.
    pub fn phi_plus_gamma(&self, u: C64) -> Result<Option<Mat>> {
        let Some(bar) = &self.upsilon_bar else { return Ok(None) };
        let n = self.truncation;
        self.guard(u, 0..n as i64)?;
        let mut acc = bar.eval(u + n as f64);
        for j in (0..n).rev() {
            acc = Self::inv(&self.a_bar(u + j as f64)?)? * acc;
        }
        let pre = self.gamma_prefactor(|x| specfun::gamma_ratio(u, C64::new(0.0, 0.0), x))?;
        Ok(Some(pre * acc))
    }

    /// Route-two value of `φ⁻(u)`.
    pub fn phi_minus_gamma(&self, u: C64) -> Result<Option<Mat>> {
        let Some(bar) = &self.upsilon_bar else { return Ok(None) };
        let n = self.truncation;
        self.guard(u, (1..=n as i64).map(|j| -j))?;
        let mut acc = bar.eval(u - n as f64);
        for j in (1..=n).rev() {
            acc = self.a_bar(u - j as f64)? * acc;
        }
        let w = C64::new(1.0, 0.0) - u;
        let pre = self.gamma_prefactor(|x| specfun::gamma_ratio(w, -x, C64::new(0.0, 0.0)))?;
        Ok(Some(pre * acc))
    }

    /// Seeded probe points on `Re u = ±N/2`, `|Im u| ≤ 3`.
    pub fn probe_points(&self, count: usize, seed: u64) -> (Vec<C64>, Vec<C64>) {
        let mut s = Sampler::new(seed);
        let half = self.truncation as f64 / 2.0;
        let sigma = self.sys.sigma();
        let mut shifted = |sign: f64| -> Vec<C64> {
            let avoid: Vec<C64> = sigma
                .iter()
                .flat_map(|p| (-(self.truncation as i64 * 2)..=(self.truncation as i64 * 2)).map(move |n| p + n as f64))
                .filter(|q| (q.re - sign * half).abs() < 1.5)
                .collect();
            (0..count)
                .map(|_| {
                    let mut u = C64::new(sign * half, s.real(-3.0, 3.0));
                    for _ in 0..50 {
                        let d = avoid.iter().map(|p| (p - u).norm()).fold(f64::INFINITY, f64::min);
                        if d > 0.05 {
                            break;
                        }
                        u.im += 0.1;
                    }
                    u
                })
                .collect()
        };
        let plus = shifted(1.0);
        let minus = shifted(-1.0);
        (plus, minus)
    }

    /// Residuals, doubling delta and (for commuting systems) route
    /// agreement at 20 probe points. Fails with `TruncationInsufficient`
    /// when doubling `N` moves `φ±` by more than [`DOUBLING_TOL`].
    pub fn certify(&self) -> Result<FundamentalReport> {
        let (plus, minus) = self.probe_points(10, DEFAULT_SEED);
        let doubled = self.with_truncation(self.truncation * 2)?;
        let rel = |a: &Mat, b: &Mat| linalg::max_diff(a, b) / linalg::max_abs(b).max(1.0);
        let (mut rp, mut rm, mut dd) = (0.0f64, 0.0f64, 0.0f64);
        let mut route: Option<f64> = None;
        for &u in &plus {
            let p0 = self.phi_plus(u)?;
            let p1 = self.phi_plus(u + 1.0)?;
            rp = rp.max(rel(&(self.a_at(u)? * &p0), &p1));
            dd = dd.max(rel(&doubled.phi_plus(u)?, &p0));
            if let Some(g) = self.phi_plus_gamma(u)? {
                route = Some(route.unwrap_or(0.0).max(rel(&g, &p0)));
            }
        }
        for &u in &minus {
            let m0 = self.phi_minus(u)?;
            let m1 = self.phi_minus(u + 1.0)?;
            rm = rm.max(rel(&(self.a_at(u)? * &m0), &m1));
            dd = dd.max(rel(&doubled.phi_minus(u)?, &m0));
            if let Some(g) = self.phi_minus_gamma(u)? {
                route = Some(route.unwrap_or(0.0).max(rel(&g, &m0)));
            }
        }
        if dd > DOUBLING_TOL {
            return Err(Error::TruncationInsufficient(dd));
        }
        Ok(FundamentalReport {
            residual_plus: rp,
            residual_minus: rm,
            doubling_delta: dd,
            route_delta: route,
            probes: plus.len() + minus.len(),
        })
    }
}
