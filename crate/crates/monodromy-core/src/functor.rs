//! The functors `F` (Yangian modules to quantum loop modules) and `G`
//! (back), their round trips and shift compatibility.
//!
//! For each `(i, μ)` the commuting field `ξᵢ(u)_μ` defines the difference
//! equation `φ(u+1) = ξᵢ(u)_μ φ(u)`; its connection matrix is `Ψᵢ(z)_μ`.
//! With the half products `g⁻ᵢ(u) = φ⁻ᵢ(u)` and `g⁺ᵢ(u) = φ⁺ᵢ(u+1)⁻¹`,
//! taken on the target weight space of `x±ᵢ`,
//!
//! `𝒳±_{i,k} = c±ᵢ ∮ e^{2πiku} g±ᵢ(u) x±ᵢ(u) du`,
//! `𝒳±ᵢ(z) = c±ᵢ ∮ z/(z − e^{2πiu}) g±ᵢ(u) x±ᵢ(u) du`,
//!
//! where `∮` is `1/2πi` times the integral over circles around the poles
//! of `x±ᵢ` that avoid all nonzero integer translates of the poles and
//! zeros of the adjacent `ξᵢ` blocks. `G` recovers `ξᵢ` from the inverse
//! monodromy problem with `A₀ = ħdᵢμ(αᵢ∨)` and
//!
//! `x±ᵢ(u) = (1/c±ᵢ) ∫ g±ᵢ(v)⁻¹ 𝒳±ᵢ(e^{2πiv}) dv/(u − v)`
//!
//! over circles around the branch logarithms of the poles of `𝒳±ᵢ`.

use crate::branch::{exp2pi, LogBranch};
use crate::diffeq::{
    connection_matrix_with, fundamental_solutions, inverse_abelian, DifferenceSystem, FundamentalPair, DEFAULT_TRUNCATION,
    DEFAULT_UPSILON_ORDER,
};
use crate::ratmat::contour::{build_contour, pairwise_sum_mat, JordanCurve, QUAD_TOL};
use crate::ratmat::fit::{fit_with_poles, origin_radius_avoiding, pole_enclosing_circle, Circle};
use crate::ratmat::RationalMatrix;
use crate::repmodel::{
    category_test, check_qloop_relations, check_yangian_relations, shift_loop, shift_module, u_samples, z_samples, BlockMap,
    CartanData, LoopModule, ModuleRef, RelationReport, WeightLattice, WeightModule,
};
use crate::sample::DEFAULT_SEED;
use crate::{linalg, specfun, Error, Mat, Result, C64, I};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Tolerance of the mandatory relation checks and of the round trips.
pub const FUNCTOR_TOL: f64 = 1e-6;
/// Agreement of fitted fields with the quadrature modes.
pub const TAYLOR_TOL: f64 = 1e-7;
/// Relative tolerance on `c⁺ᵢc⁻ᵢ = dᵢΓ(ħdᵢ)²`.
pub const SPLIT_TOL: f64 = 1e-12;
/// Misfit allowed in the rational fits of the loop and Yangian fields.
pub const FIELD_FIT_TOL: f64 = 1e-8;
pub const DEFAULT_MODES: usize = 4;
pub const DEFAULT_NODES: usize = 256;
pub const DEFAULT_RELATION_SAMPLES: usize = 30;
/// Sample count of the rational fits.
const FIT_NODES: usize = 64;

/// Parameters shared by `F` and `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctorConfig {
    pub hbar: C64,
    pub c_plus: Vec<C64>,
    pub c_minus: Vec<C64>,
    /// Trapezoidal nodes per contour circle.
    pub nodes: usize,
    /// Loop modes `𝒳±_{i,k}` for `|k| ≤ modes`.
    pub modes: usize,
    /// Yangian modes `x±_{i,r}` for `r ≤ yangian_modes`.
    pub yangian_modes: usize,
    /// Factor applied to the default contour radii.
    pub radius_scale: f64,
    pub truncation: usize,
    pub upsilon_order: usize,
    pub branch: LogBranch,
    pub relation_samples: usize,
    pub relation_tol: f64,
    pub seed: u64,
}

impl FunctorConfig {
    /// Defaults with `c⁺ᵢ = c⁻ᵢ = √dᵢ·Γ(dᵢħ)` and the standard strip.
    pub fn new(cartan: &CartanData, hbar: C64) -> Result<Self> {
        let c = cartan
            .d
            .iter()
            .map(|&d| Ok(specfun::gamma(hbar * d as f64)? * (d as f64).sqrt()))
            .collect::<Result<Vec<C64>>>()?;
        Ok(Self {
            hbar,
            c_plus: c.clone(),
            c_minus: c,
            nodes: DEFAULT_NODES,
            modes: DEFAULT_MODES,
            yangian_modes: DEFAULT_MODES,
            radius_scale: 1.0,
            truncation: DEFAULT_TRUNCATION,
            upsilon_order: DEFAULT_UPSILON_ORDER,
            branch: LogBranch::standard(hbar),
            relation_samples: DEFAULT_RELATION_SAMPLES,
            relation_tol: FUNCTOR_TOL,
            seed: DEFAULT_SEED,
        })
    }

    /// `(c⁺ᵢ, c⁻ᵢ) ↦ (t·c⁺ᵢ, t⁻¹·c⁻ᵢ)` for every `i`.
    pub fn rebalanced(&self, t: C64) -> Self {
        Self {
            c_plus: self.c_plus.iter().map(|c| c * t).collect(),
            c_minus: self.c_minus.iter().map(|c| c / t).collect(),
            ..self.clone()
        }
    }

    pub fn validate(&self, cartan: &CartanData) -> Result<()> {
        let r = cartan.rank();
        if self.c_plus.len() != r || self.c_minus.len() != r {
            return Err(Error::InvalidInput(format!("functor constants given for {} indices, rank is {r}", self.c_plus.len())));
        }
        for i in 0..r {
            let d = cartan.d[i] as f64;
            let want = specfun::gamma(self.hbar * d)?.powi(2) * d;
            let got = self.c_plus[i] * self.c_minus[i];
            if (got - want).norm() > SPLIT_TOL * want.norm() {
                return Err(Error::InvalidInput(format!("c+ c- = {got} for index {i}, expected d Gamma(hbar d)^2 = {want}")));
            }
        }
        if self.nodes < 8 || self.radius_scale <= 0.0 || self.radius_scale > 1.0 {
            return Err(Error::InvalidInput("contour needs at least 8 nodes and a radius scale in (0, 1]".into()));
        }
        Ok(())
    }
}

/// `g±ᵢ(u)_μ` for one block, backed by the fundamental solutions of
/// `φ(u+1) = ξᵢ(u)_μ φ(u)`.
#[derive(Debug, Clone)]
pub struct GFactors {
    pair: FundamentalPair,
}

impl GFactors {
    pub fn from_system(sys: &DifferenceSystem, cfg: &FunctorConfig) -> Result<Self> {
        if !sys.abelian {
            return Err(Error::NotAbelian(f64::NAN));
        }
        if !sys.certificate.is_valid() {
            return Err(Error::ResonantSystem { order: 0, gap: sys.certificate.min_gap });
        }
        Ok(Self { pair: fundamental_solutions(sys, cfg.truncation, cfg.upsilon_order)? })
    }

    pub fn from_field(xi: &RationalMatrix, cfg: &FunctorConfig) -> Result<Self> {
        Self::from_system(&DifferenceSystem::new(xi.clone())?, cfg)
    }

    pub fn pair(&self) -> &FundamentalPair {
        &self.pair
    }

    /// `g⁺(u) = φ⁺(u+1)⁻¹`.
    pub fn g_plus(&self, u: C64) -> Result<Mat> {
        self.pair.phi_plus_inv(u + 1.0)
    }

    pub fn g_plus_inv(&self, u: C64) -> Result<Mat> {
        self.pair.phi_plus(u + 1.0)
    }

    /// `g⁻(u) = φ⁻(u)`.
    pub fn g_minus(&self, u: C64) -> Result<Mat> {
        self.pair.phi_minus(u)
    }

    pub fn g_minus_inv(&self, u: C64) -> Result<Mat> {
        self.pair.phi_minus_inv(u)
    }

    fn g(&self, sign: i64, u: C64) -> Result<Mat> {
        if sign > 0 {
            self.g_plus(u)
        } else {
            self.g_minus(u)
        }
    }

    fn g_inv(&self, sign: i64, u: C64) -> Result<Mat> {
        if sign > 0 {
            self.g_plus_inv(u)
        } else {
            self.g_minus_inv(u)
        }
    }

    /// Largest relative misfit of `S(u) = g⁺(u)ξ(u)g⁻(u)` at `points`.
    pub fn recombination_residual(&self, s: &RationalMatrix, points: &[C64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &u in points {
            let want = s.eval(exp2pi(u))?;
            let got = self.g_plus(u)? * self.pair.system().eval(u)? * self.g_minus(u)?;
            worst = worst.max(linalg::max_diff(&got, &want) / linalg::max_abs(&want).max(1.0));
        }
        Ok(worst)
    }
}

/// `g_factors`: the half products of `ξᵢ(u)_μ`.
pub fn g_factors(v: &WeightModule, i: usize, mu: usize, cfg: &FunctorConfig) -> Result<GFactors> {
    let xi = v
        .xi
        .get(&(i, mu))
        .ok_or_else(|| Error::InvalidInput(format!("no xi block ({i}, {mu})")))?;
    GFactors::from_field(xi, cfg)
}

/// Modes of the off-diagonal fields, indexed by `(i, source weight)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeTable {
    /// Loop side: `k ∈ [−k_max, k_max]` stored at `k + k_max`.
    /// Yangian side: `r ∈ [0, k_max]` stored at `r`.
    pub k_max: usize,
    pub symmetric: bool,
    pub plus: BTreeMap<(usize, usize), Vec<Mat>>,
    pub minus: BTreeMap<(usize, usize), Vec<Mat>>,
}

impl ModeTable {
    pub fn get(&self, i: usize, mu: usize, sign: i64, k: i64) -> Option<&Mat> {
        let table = if sign > 0 { &self.plus } else { &self.minus };
        let idx = if self.symmetric { k + self.k_max as i64 } else { k };
        if idx < 0 {
            return None;
        }
        table.get(&(i, mu)).and_then(|v| v.get(idx as usize))
    }
}

/// Quadrature diagnostics aggregated over blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMeta {
    /// Smallest distance from a contour circle to an excluded translate.
    pub margin: f64,
    pub largest_radius: f64,
    pub circles: usize,
    pub nodes: usize,
    /// Largest change of a quadrature under halving the nodes.
    pub quad_delta: f64,
    pub fit_residual: f64,
    pub taylor_residual: f64,
}

impl Default for QuadratureMeta {
    fn default() -> Self {
        Self { margin: f64::INFINITY, largest_radius: 0.0, circles: 0, nodes: 0, quad_delta: 0.0, fit_residual: 0.0, taylor_residual: 0.0 }
    }
}

impl QuadratureMeta {
    fn merge(&mut self, o: &Self) {
        self.margin = self.margin.min(o.margin);
        self.largest_radius = self.largest_radius.max(o.largest_radius);
        self.circles += o.circles;
        self.nodes = self.nodes.max(o.nodes);
        self.quad_delta = self.quad_delta.max(o.quad_delta);
        self.fit_residual = self.fit_residual.max(o.fit_residual);
        self.taylor_residual = self.taylor_residual.max(o.taylor_residual);
    }

    fn from_curve(c: &JordanCurve) -> Self {
        Self {
            margin: c.margin,
            largest_radius: c.components.iter().map(|x| x.radius).fold(0.0, f64::max),
            circles: c.components.len(),
            nodes: c.node_count,
            ..Self::default()
        }
    }
}

/// Output of `apply_F`.
#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub module: LoopModule,
    pub modes: ModeTable,
    pub relations: RelationReport,
    pub meta: QuadratureMeta,
}

impl ForwardOutput {
    /// `[𝒳⁺_{i,k}, 𝒳⁻_{i,l}]` on `V_μ` from the quadrature modes.
    pub fn bracket(&self, i: usize, mu: usize, k: i64, l: i64) -> Mat {
        let lat = &self.module.lattice;
        let n = lat.weights[mu].dim;
        let mut out = Mat::zeros(n, n);
        if let Some(lo) = lat.neighbour(mu, i, -1) {
            if let (Some(p), Some(m)) = (self.modes.get(i, lo, 1, k), self.modes.get(i, mu, -1, l)) {
                out += p * m;
            }
        }
        if let Some(hi) = lat.neighbour(mu, i, 1) {
            if let (Some(m), Some(p)) = (self.modes.get(i, hi, -1, l), self.modes.get(i, mu, 1, k)) {
                out -= m * p;
            }
        }
        out
    }
}

/// Output of `apply_G`.
#[derive(Debug, Clone)]
pub struct BackwardOutput {
    pub module: WeightModule,
    /// `x±_{i,r}` by quadrature.
    pub modes: ModeTable,
    pub relations: RelationReport,
    pub meta: QuadratureMeta,
    /// Branch logarithms of all `Ψ` zeros and poles, per block.
    pub logs: BTreeMap<(usize, usize), Vec<C64>>,
}

/// An integrand sampled once on the nodes of a contour.
struct Sampled {
    points: Vec<C64>,
    weights: Vec<C64>,
    values: Vec<Mat>,
    rows: usize,
    cols: usize,
}

impl Sampled {
    fn new(curve: &JordanCurve, rows: usize, cols: usize, f: impl Fn(C64) -> Result<Mat>) -> Result<Self> {
        let n = curve.node_count.max(4).next_multiple_of(2);
        let mut s = Self { points: Vec::new(), weights: Vec::new(), values: Vec::new(), rows, cols };
        for c in &curve.components {
            for k in 0..n {
                let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                let u = c.center + e * c.radius;
                s.points.push(u);
                s.weights.push(e * (c.radius / n as f64));
                s.values.push(f(u)?);
            }
        }
        Ok(s)
    }

    /// `∮ kernel(u) f(u) du` and the change against every other node.
    fn integrate(&self, kernel: impl Fn(C64) -> C64) -> (Mat, f64) {
        let terms: Vec<Mat> = (0..self.points.len())
            .map(|k| &self.values[k] * (self.weights[k] * kernel(self.points[k])))
            .collect();
        let zero = || Mat::zeros(self.rows, self.cols);
        let fine = pairwise_sum_mat(&terms).unwrap_or_else(zero);
        let even: Vec<Mat> = terms.into_iter().step_by(2).collect();
        let coarse = pairwise_sum_mat(&even).map(|m| m * C64::new(2.0, 0.0)).unwrap_or_else(zero);
        let delta = linalg::max_diff(&fine, &coarse);
        (fine, delta)
    }

    fn integrate_checked(&self, kernel: impl Fn(C64) -> C64, meta: &mut QuadratureMeta) -> Result<Mat> {
        let (v, delta) = self.integrate(kernel);
        let rel = delta / linalg::max_abs(&v).max(1.0);
        meta.quad_delta = meta.quad_delta.max(rel);
        if rel > QUAD_TOL {
            return Err(Error::NotConverged(delta));
        }
        Ok(v)
    }
}

fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

fn diagonal_keys(lat: &WeightLattice) -> Vec<(usize, usize)> {
    let mut keys = Vec::new();
    for i in 0..lat.cartan.rank() {
        for (mu, w) in lat.weights.iter().enumerate() {
            if w.dim > 0 {
                keys.push((i, mu));
            }
        }
    }
    keys
}

fn off_diagonal_keys(lat: &WeightLattice, blocks: &BlockMap, sign: i64) -> Result<Vec<(usize, usize, usize)>> {
    blocks
        .keys()
        .map(|&(i, mu)| {
            let nu = lat
                .neighbour(mu, i, sign)
                .ok_or_else(|| Error::InvalidInput(format!("block ({i}, {mu}) maps to a missing weight")))?;
            Ok((i, mu, nu))
        })
        .collect()
}

fn sigma_of(factors: &BTreeMap<(usize, usize), GFactors>, keys: &[(usize, usize)]) -> Vec<C64> {
    keys.iter().filter_map(|k| factors.get(k)).flat_map(|g| g.pair().system().sigma()).collect()
}

fn relative_dev(a: &Mat, b: &Mat) -> f64 {
    linalg::max_diff(a, b) / linalg::max_abs(b).max(1.0)
}

/// One off-diagonal block of `F`: the rational field and its modes.
fn forward_block(
    x: &RationalMatrix,
    g: &GFactors,
    sign: i64,
    c: C64,
    exclude: &[C64],
    cfg: &FunctorConfig,
) -> Result<(RationalMatrix, Vec<Mat>, QuadratureMeta)> {
    let (rows, cols) = x.shape();
    let k_max = cfg.modes as i64;
    if x.is_zero() {
        let modes = (0..=2 * k_max).map(|_| Mat::zeros(rows, cols)).collect();
        return Ok((RationalMatrix::zeros(rows, cols), modes, QuadratureMeta::default()));
    }
    let poles = x.poles();
    let include: Vec<C64> = poles.iter().map(|p| p.0).collect();
    let curve = build_contour(&include, exclude, cfg.radius_scale, cfg.nodes)?;
    let mut meta = QuadratureMeta::from_curve(&curve);
    let sampled = Sampled::new(&curve, rows, cols, |u| Ok(g.g(sign, u)? * x.eval(u)? * c))?;
    let mut modes = Vec::with_capacity(2 * cfg.modes + 1);
    for k in -k_max..=k_max {
        modes.push(sampled.integrate_checked(|u| exp2pi(u * k as f64), &mut meta)?);
    }
    let zpoles = crate::diffeq::congruence_poles(&poles);
    let degree: usize = zpoles.iter().map(|p| p.1).sum();
    let bands: Vec<(f64, f64)> = curve
        .components
        .iter()
        .map(|d| (-2.0 * PI * (d.center.im + d.radius), -2.0 * PI * (d.center.im - d.radius)))
        .collect();
    let circle = Circle::new(C64::new(0.0, 0.0), origin_radius_avoiding(&bands));
    let fit = fit_with_poles(
        |z| Ok(sampled.integrate(|u| z / (z - exp2pi(u))).0),
        rows,
        cols,
        &zpoles,
        degree,
        circle,
        FIT_NODES,
    )?;
    meta.fit_residual = fit.residual;
    if fit.residual > FIELD_FIT_TOL {
        return Err(Error::FitResidualTooLarge(fit.residual));
    }
    let field = fit.matrix;
    let at_inf = field.taylor_infinity(cfg.modes + 1)?;
    let at_zero = field.taylor_zero(cfg.modes + 1)?;
    let mut taylor = 0.0f64;
    for k in 0..=cfg.modes {
        taylor = taylor.max(relative_dev(&at_inf[k], &modes[cfg.modes + k]));
        if k > 0 {
            taylor = taylor.max(relative_dev(&(-&at_zero[k]), &modes[cfg.modes - k]));
        }
    }
    meta.taylor_residual = taylor;
    if taylor > TAYLOR_TOL {
        return Err(Error::FitResidualTooLarge(taylor));
    }
    Ok((field, modes, meta))
}

/// `apply_F`: the loop module attached to `V`.
pub fn apply_f(v: &WeightModule, cfg: &FunctorConfig) -> Result<ForwardOutput> {
    let cartan = v.cartan();
    cfg.validate(cartan)?;
    if (cfg.hbar - v.hbar).norm() > 1e-14 {
        return Err(Error::InvalidInput(format!("module has hbar {} but the configuration has {}", v.hbar, cfg.hbar)));
    }
    let q = (I * PI * v.hbar).exp();
    let lat = &v.lattice;
    check_yangian_relations(v, cfg.relation_samples, cfg.relation_tol, cfg.seed)?.into_result()?;
    let keys = diagonal_keys(lat);
    let factors: BTreeMap<(usize, usize), GFactors> =
        keys.iter().copied().zip(par_map(&keys, |k| GFactors::from_field(&v.xi[k], cfg))?).collect();
    let psi: BlockMap = keys
        .iter()
        .copied()
        .zip(par_map(&keys, |k| Ok(connection_matrix_with(factors[k].pair(), FIT_NODES)?.s))?)
        .collect();
    let mut meta = QuadratureMeta::default();
    let mut modes = ModeTable { k_max: cfg.modes, symmetric: true, ..ModeTable::default() };
    let mut fields = [BlockMap::new(), BlockMap::new()];
    for (slot, (sign, blocks)) in [(1i64, &v.xplus), (-1i64, &v.xminus)].into_iter().enumerate() {
        let items = off_diagonal_keys(lat, blocks, sign)?;
        let out = par_map(&items, |&(i, mu, nu)| {
            let exclude = sigma_of(&factors, &[(i, mu), (i, nu)]);
            let c = if sign > 0 { cfg.c_plus[i] } else { cfg.c_minus[i] };
            forward_block(&blocks[&(i, mu)], &factors[&(i, nu)], sign, c, &exclude, cfg)
        })?;
        for (&(i, mu, _), (field, m, bm)) in items.iter().zip(out) {
            meta.merge(&bm);
            fields[slot].insert((i, mu), field);
            if sign > 0 {
                modes.plus.insert((i, mu), m);
            } else {
                modes.minus.insert((i, mu), m);
            }
        }
    }
    let [xp, xm] = fields;
    let module = LoopModule::new(lat.clone(), q, Some(v.hbar), psi, xp, xm)?;
    let relations = check_qloop_relations(&module, cfg.relation_samples, cfg.relation_tol, cfg.seed)?.into_result()?;
    Ok(ForwardOutput { module, modes, relations, meta })
}

/// One off-diagonal block of `G`.
fn backward_block(
    x: &RationalMatrix,
    g: &GFactors,
    sign: i64,
    c: C64,
    exclude: &[C64],
    cfg: &FunctorConfig,
) -> Result<(RationalMatrix, Vec<Mat>, QuadratureMeta)> {
    let (rows, cols) = x.shape();
    if x.is_zero() {
        let modes = (0..=cfg.yangian_modes).map(|_| Mat::zeros(rows, cols)).collect();
        return Ok((RationalMatrix::zeros(rows, cols), modes, QuadratureMeta::default()));
    }
    let upoles = x
        .poles()
        .into_iter()
        .map(|(z, m)| Ok((cfg.branch.log(z)?, m)))
        .collect::<Result<Vec<(C64, usize)>>>()?;
    let include: Vec<C64> = upoles.iter().map(|p| p.0).collect();
    let curve = build_contour(&include, exclude, cfg.radius_scale, cfg.nodes)?;
    let mut meta = QuadratureMeta::from_curve(&curve);
    let scale = I * (2.0 * PI) / c;
    let sampled = Sampled::new(&curve, rows, cols, |v| Ok(g.g_inv(sign, v)? * x.eval(exp2pi(v))? * scale))?;
    let mut modes = Vec::with_capacity(cfg.yangian_modes + 1);
    for r in 0..=cfg.yangian_modes {
        let m = sampled.integrate_checked(|v| v.powi(r as i32), &mut meta)?;
        modes.push(m / cfg.hbar);
    }
    let degree: usize = upoles.iter().map(|p| p.1).sum();
    let fit = fit_with_poles(
        |u| Ok(sampled.integrate(|v| (u - v).inv()).0),
        rows,
        cols,
        &upoles,
        degree - 1,
        pole_enclosing_circle(&upoles),
        FIT_NODES,
    )?;
    meta.fit_residual = fit.residual;
    if fit.residual > FIELD_FIT_TOL {
        return Err(Error::FitResidualTooLarge(fit.residual));
    }
    let field = fit.matrix;
    let at_inf = field.taylor_infinity(cfg.yangian_modes + 2)?;
    let mut taylor = 0.0f64;
    for r in 0..=cfg.yangian_modes {
        taylor = taylor.max(relative_dev(&at_inf[r + 1], &(&modes[r] * cfg.hbar)));
    }
    meta.taylor_residual = taylor;
    if taylor > TAYLOR_TOL {
        return Err(Error::FitResidualTooLarge(taylor));
    }
    Ok((field, modes, meta))
}

fn require_member(m: ModuleRef<'_>, branch: &LogBranch) -> Result<()> {
    let report = category_test(m, branch)?;
    if report.member() {
        return Ok(());
    }
    Err(Error::BranchOutOfDomain(match report.outside.first() {
        Some(p) => format!("{p}"),
        None => "membership tests disagree".into(),
    }))
}

/// `apply_G`: the Yangian module attached to `W ∈ Rep^Ω`.
pub fn apply_g(w: &LoopModule, cfg: &FunctorConfig) -> Result<BackwardOutput> {
    let cartan = w.cartan();
    cfg.validate(cartan)?;
    let q = (I * PI * cfg.hbar).exp();
    if (w.q - q).norm() > 1e-12 {
        return Err(Error::InvalidInput(format!("module has q = {} but exp(i pi hbar) = {q}", w.q)));
    }
    cfg.branch.validate()?;
    require_member(ModuleRef::Loop(w), &cfg.branch)?;
    let lat = &w.lattice;
    let keys = diagonal_keys(lat);
    let recovered = par_map(&keys, |&(i, mu)| {
        let n = lat.weights[mu].dim;
        let shift = cfg.hbar * (cartan.d[i] as f64 * lat.weights[mu].values[i] as f64);
        let a0 = linalg::scalar(n, shift);
        let inv = inverse_abelian(&w.psi[&(i, mu)], &a0, &cfg.branch)?;
        let g = GFactors::from_system(&inv.system, cfg)?;
        Ok((inv.system.a, g, inv.report.logs))
    })?;
    let mut xi = BlockMap::new();
    let mut factors = BTreeMap::new();
    let mut logs = BTreeMap::new();
    for (k, (a, g, l)) in keys.iter().zip(recovered) {
        xi.insert(*k, a);
        factors.insert(*k, g);
        logs.insert(*k, l);
    }
    let mut meta = QuadratureMeta::default();
    let mut modes = ModeTable { k_max: cfg.yangian_modes, symmetric: false, ..ModeTable::default() };
    let mut fields = [BlockMap::new(), BlockMap::new()];
    for (slot, (sign, blocks)) in [(1i64, &w.xp), (-1i64, &w.xm)].into_iter().enumerate() {
        let items = off_diagonal_keys(lat, blocks, sign)?;
        let out = par_map(&items, |&(i, mu, nu)| {
            let exclude = sigma_of(&factors, &[(i, mu), (i, nu)]);
            let c = if sign > 0 { cfg.c_plus[i] } else { cfg.c_minus[i] };
            backward_block(&blocks[&(i, mu)], &factors[&(i, nu)], sign, c, &exclude, cfg)
        })?;
        for (&(i, mu, _), (field, m, bm)) in items.iter().zip(out) {
            meta.merge(&bm);
            fields[slot].insert((i, mu), field);
            if sign > 0 {
                modes.plus.insert((i, mu), m);
            } else {
                modes.minus.insert((i, mu), m);
            }
        }
    }
    let [xplus, xminus] = fields;
    let module = WeightModule::new(lat.clone(), cfg.hbar, xi, xplus, xminus)?;
    let relations = check_yangian_relations(&module, cfg.relation_samples, cfg.relation_tol, cfg.seed)?.into_result()?;
    Ok(BackwardOutput { module, modes, relations, meta, logs })
}

/// Largest blockwise deviation between two modules at seeded samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub deviation: f64,
    /// Block attaining the deviation, e.g. `xi(0,1)`.
    pub worst: String,
    pub samples: usize,
    pub tol: f64,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.deviation < self.tol
    }
}

struct Worst {
    value: f64,
    name: String,
}

fn compare_maps(
    (la, a): (&WeightLattice, &BlockMap),
    (lb, b): (&WeightLattice, &BlockMap),
    what: &str,
    points: &[C64],
    worst: &mut Worst,
) -> Result<()> {
    for (&(i, mu), x) in a {
        let label = &la.weights[mu].label;
        let y = lb.index_of(&la.weights[mu].values).and_then(|nu| b.get(&(i, nu)));
        for &p in points {
            let xv = x.eval(p)?;
            let yv = match y {
                Some(y) => y.eval(p)?,
                None => Mat::zeros(xv.nrows(), xv.ncols()),
            };
            let d = relative_dev(&yv, &xv);
            if d > worst.value || worst.name.is_empty() {
                worst.value = worst.value.max(d);
                if d >= worst.value {
                    worst.name = format!("{what}({i},{label})");
                }
            }
        }
    }
    Ok(())
}

fn same_shape(la: &WeightLattice, lb: &WeightLattice) -> Result<()> {
    let ok = la.weights.len() == lb.weights.len()
        && la.weights.iter().all(|w| lb.index_of(&w.values).is_some_and(|k| lb.weights[k].dim == w.dim));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput("modules have different weight spaces".into()))
    }
}

/// Blockwise comparison of two Yangian modules.
pub fn compare_yangian(a: &WeightModule, b: &WeightModule, samples: usize, seed: u64) -> Result<ComparisonReport> {
    same_shape(&a.lattice, &b.lattice)?;
    let mut avoid = a.block_poles();
    avoid.extend(b.block_poles());
    let points = u_samples(&avoid, samples, seed);
    let mut worst = Worst { value: 0.0, name: String::new() };
    let (la, lb) = (&a.lattice, &b.lattice);
    compare_maps((la, &a.xi), (lb, &b.xi), "xi", &points, &mut worst)?;
    compare_maps((la, &a.xplus), (lb, &b.xplus), "xplus", &points, &mut worst)?;
    compare_maps((la, &a.xminus), (lb, &b.xminus), "xminus", &points, &mut worst)?;
    compare_maps((lb, &b.xplus), (la, &a.xplus), "xplus", &points, &mut worst)?;
    compare_maps((lb, &b.xminus), (la, &a.xminus), "xminus", &points, &mut worst)?;
    Ok(ComparisonReport { deviation: worst.value, worst: worst.name, samples, tol: FUNCTOR_TOL })
}

/// Blockwise comparison of two loop modules.
pub fn compare_loop(a: &LoopModule, b: &LoopModule, samples: usize, seed: u64) -> Result<ComparisonReport> {
    same_shape(&a.lattice, &b.lattice)?;
    let mut avoid = a.block_poles();
    avoid.extend(b.block_poles());
    let points = z_samples(&avoid, samples, seed);
    let mut worst = Worst { value: 0.0, name: String::new() };
    let (la, lb) = (&a.lattice, &b.lattice);
    compare_maps((la, &a.psi), (lb, &b.psi), "psi", &points, &mut worst)?;
    compare_maps((la, &a.xp), (lb, &b.xp), "xp", &points, &mut worst)?;
    compare_maps((la, &a.xm), (lb, &b.xm), "xm", &points, &mut worst)?;
    compare_maps((lb, &b.xp), (la, &a.xp), "xp", &points, &mut worst)?;
    compare_maps((lb, &b.xm), (la, &a.xm), "xm", &points, &mut worst)?;
    Ok(ComparisonReport { deviation: worst.value, worst: worst.name, samples, tol: FUNCTOR_TOL })
}

/// `roundtrip_report`: `G(F(V))` against `V`.
pub fn roundtrip_report(v: &WeightModule, cfg: &FunctorConfig) -> Result<ComparisonReport> {
    require_member(ModuleRef::Yangian(v), &cfg.branch)?;
    let f = apply_f(v, cfg)?;
    let g = apply_g(&f.module, cfg)?;
    compare_yangian(v, &g.module, cfg.relation_samples, cfg.seed)
}

/// `roundtrip_report_loop`: `F(G(W))` against `W`.
pub fn roundtrip_report_loop(w: &LoopModule, cfg: &FunctorConfig) -> Result<ComparisonReport> {
    let g = apply_g(w, cfg)?;
    let f = apply_f(&g.module, cfg)?;
    compare_loop(w, &f.module, cfg.relation_samples, cfg.seed)
}

/// `shift_compat_report`: `F(τ_a^*V)` against `τ_{e^{2πia}}^*F(V)`.
pub fn shift_compat_report(v: &WeightModule, a: C64, cfg: &FunctorConfig) -> Result<ComparisonReport> {
    let shifted = apply_f(&shift_module(v, a)?, cfg)?;
    let image = shift_loop(&apply_f(v, cfg)?.module, exp2pi(a))?;
    compare_loop(&shifted.module, &image, cfg.relation_samples, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::repmodel::{direct_sum, sl2_eval_module};
    use crate::specfun::gamma;

    fn cfg(h: C64) -> FunctorConfig {
        FunctorConfig::new(&CartanData::sl2(), h).unwrap()
    }

    #[test]
    fn highest_weight_half_products_are_gamma_ratios() {
        let (a, h) = (c64(0.1, 0.0), c64(0.3, 0.0));
        let v = sl2_eval_module(2, a, h).unwrap();
        let g = g_factors(&v, 0, 0, &cfg(h)).unwrap();
        for &u in &[c64(0.4, 0.3), c64(-0.2, -0.6), c64(1.3, 0.1)] {
            let plus = gamma(u + 1.0 - a).unwrap() / gamma(u + 1.0 + h - a).unwrap();
            let minus = gamma(1.0 - u + a).unwrap() / gamma(1.0 - u - h + a).unwrap();
            assert!((g.g_plus(u).unwrap()[(0, 0)] - plus).norm() < 1e-10);
            assert!((g.g_minus(u).unwrap()[(0, 0)] - minus).norm() < 1e-10);
        }
    }

    #[test]
    fn trivial_field_has_trivial_half_products() {
        let g = GFactors::from_field(&RationalMatrix::identity(2), &cfg(c64(0.3, 0.0))).unwrap();
        let u = c64(0.37, -0.2);
        assert!(linalg::max_diff(&g.g_plus(u).unwrap(), &linalg::identity(2)) < 1e-14);
        assert!(linalg::max_diff(&g.g_minus(u).unwrap(), &linalg::identity(2)) < 1e-14);
    }

    #[test]
    fn recombination_on_a_two_dimensional_block() {
        let h = c64(0.3, 0.0);
        let v = direct_sum(&sl2_eval_module(2, c64(0.1, 0.0), h).unwrap(), &sl2_eval_module(2, c64(0.25, 0.0), h).unwrap()).unwrap();
        let mu = v.lattice.index_of(&[-1]).unwrap();
        let g = g_factors(&v, 0, mu, &cfg(h)).unwrap();
        let s = connection_matrix_with(g.pair(), FIT_NODES).unwrap().s;
        let pts = [c64(0.45, 0.3), c64(-0.6, -0.2), c64(0.05, 0.7)];
        assert!(g.recombination_residual(&s, &pts).unwrap() < 1e-8);
    }

    #[test]
    fn zero_module_maps_to_zero_module() {
        let h = c64(0.3, 0.0);
        let v = WeightModule::zero(CartanData::sl2(), h).unwrap();
        let f = apply_f(&v, &cfg(h)).unwrap();
        assert_eq!(f.module.dim(), 0);
        let g = apply_g(&f.module, &cfg(h)).unwrap();
        assert_eq!(g.module.dim(), 0);
    }

    #[test]
    fn split_must_have_the_right_product() {
        let h = c64(0.3, 0.0);
        let mut c = cfg(h);
        assert!(c.validate(&CartanData::sl2()).is_ok());
        assert!(c.rebalanced(c64(2.0, 1.0)).validate(&CartanData::sl2()).is_ok());
        c.c_plus[0] *= 1.01;
        assert!(matches!(c.validate(&CartanData::sl2()), Err(Error::InvalidInput(_))));
    }
}
