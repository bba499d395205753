//! Finite-dimensional modules on both sides of the correspondence.
//!
//! A [`WeightModule`] stores the Yangian fields `ξᵢ(u)`, `x±ᵢ(u)` as
//! rational blocks between weight spaces; a [`LoopModule`] stores the
//! quantum loop fields `Ψᵢ(z)`, `𝒳±ᵢ(z)` the same way. Modules are
//! immutable values; every operation returns a new one.

mod builtin;
mod category;
mod qchar;
mod relations;

pub use builtin::{direct_sum, direct_sum_loop, shift_loop, shift_module, sl2_eval_loop_module, sl2_eval_module};
pub use category::{category_test, sigma_set, CategoryReport, ModuleRef};
pub use qchar::{e_pi_map, ladder_factor, qchar_qloop, qchar_yangian, Monomial, QCharacter, QTerm, LADDER_TOL};
pub use relations::{
    check_qloop_relations, check_yangian_relations, RelationEntry, RelationReport, RelationStatus,
};
pub(crate) use relations::{u_samples, z_samples};

use crate::ratmat::RationalMatrix;
use crate::{Error, Mat, Result, C64};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Largest denominator `p` for which `ħ` is compared against `k/p`.
pub const HBAR_DENOMINATOR_BOUND: i64 = 8;
/// Largest `n` for which `qⁿ = 1` is tested.
pub const Q_ORDER_BOUND: i32 = 16;
/// Distance below which `ħ` or `qⁿ` counts as rational or trivial.
pub const SCREEN_TOL: f64 = 1e-10;

/// Blocks keyed by `(i, source weight index)`.
pub type BlockMap = BTreeMap<(usize, usize), RationalMatrix>;

/// Symmetrisable generalized Cartan matrix `a_ij = α_j(α_i∨)` with
/// symmetrising integers `d_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanData {
    pub a: Vec<Vec<i64>>,
    pub d: Vec<u32>,
}

impl CartanData {
    pub fn new(a: Vec<Vec<i64>>, d: Vec<u32>) -> Result<Self> {
        let n = a.len();
        if d.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("Cartan matrix and d must have matching sizes".into()));
        }
        for i in 0..n {
            if a[i][i] != 2 {
                return Err(Error::InvalidInput(format!("a[{i}][{i}] = {} is not 2", a[i][i])));
            }
            if d[i] == 0 {
                return Err(Error::InvalidInput(format!("d[{i}] must be positive")));
            }
            for j in 0..n {
                if i != j && a[i][j] > 0 {
                    return Err(Error::InvalidInput(format!("a[{i}][{j}] = {} is positive", a[i][j])));
                }
                if d[i] as i64 * a[i][j] != d[j] as i64 * a[j][i] {
                    return Err(Error::InvalidInput(format!("diag(d)·a is not symmetric at ({i}, {j})")));
                }
            }
        }
        let g = d.iter().fold(0u32, |g, &x| gcd(g, x));
        if n > 0 && g != 1 {
            return Err(Error::InvalidInput(format!("d has common factor {g}")));
        }
        Ok(Self { a, d })
    }

    pub fn sl2() -> Self {
        Self { a: alloc::vec![alloc::vec![2]], d: alloc::vec![1] }
    }

    pub fn rank(&self) -> usize {
        self.a.len()
    }

    /// `α_i(α_k∨) = a_ki`.
    pub fn root_value(&self, i: usize, k: usize) -> i64 {
        self.a[k][i]
    }

    /// `q_i = q^{d_i}`.
    pub fn q_i(&self, q: C64, i: usize) -> C64 {
        q.powi(self.d[i] as i32)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A weight space: label, values `μ(α_k∨)` and dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weight {
    pub label: String,
    pub values: Vec<i64>,
    pub dim: usize,
}

/// `ħ` must be nonzero and not numerically `k/p` with `p ≤ 8`.
pub fn screen_hbar(hbar: C64) -> Result<()> {
    if hbar.norm() < SCREEN_TOL {
        return Err(Error::RationalHbar("hbar vanishes".into()));
    }
    if hbar.im.abs() > SCREEN_TOL {
        return Ok(());
    }
    for p in 1..=HBAR_DENOMINATOR_BOUND {
        let x = hbar.re * p as f64;
        if (x - x.round()).abs() < SCREEN_TOL {
            return Err(Error::RationalHbar(format!("{} = {}/{p}", hbar.re, x.round())));
        }
    }
    Ok(())
}

/// `q` must be nonzero with `qⁿ ≠ 1` for `1 ≤ n ≤ 16`.
pub fn screen_q(q: C64) -> Result<()> {
    if q.norm() < SCREEN_TOL {
        return Err(Error::RootOfUnity("q vanishes".into()));
    }
    for n in 1..=Q_ORDER_BOUND {
        if (q.powi(n) - 1.0).norm() < SCREEN_TOL {
            return Err(Error::RootOfUnity(format!("q^{n} = 1")));
        }
    }
    Ok(())
}

/// Shared weight bookkeeping of both module kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLattice {
    pub cartan: CartanData,
    pub weights: Vec<Weight>,
}

impl WeightLattice {
    pub fn new(cartan: CartanData, weights: Vec<Weight>) -> Result<Self> {
        for (k, w) in weights.iter().enumerate() {
            if w.values.len() != cartan.rank() {
                return Err(Error::InvalidInput(format!("weight {} has {} values, rank is {}", w.label, w.values.len(), cartan.rank())));
            }
            if weights[..k].iter().any(|o| o.values == w.values) {
                return Err(Error::InvalidInput(format!("weight {} is listed twice", w.label)));
            }
        }
        Ok(Self { cartan, weights })
    }

    pub fn index_of(&self, values: &[i64]) -> Option<usize> {
        self.weights.iter().position(|w| w.values == values)
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.weights.iter().position(|w| w.label == label)
    }

    /// Index of `μ ± α_i`.
    pub fn neighbour(&self, mu: usize, i: usize, sign: i64) -> Option<usize> {
        let target: Vec<i64> = self.weights[mu]
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v + sign * self.cartan.root_value(i, k))
            .collect();
        self.index_of(&target)
    }

    pub fn total_dim(&self) -> usize {
        self.weights.iter().map(|w| w.dim).sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weights.len());
        let mut acc = 0;
        for w in &self.weights {
            out.push(acc);
            acc += w.dim;
        }
        out
    }

    /// `h = α_k∨` as a diagonal matrix on the whole space.
    pub fn coweight_matrix(&self, k: usize) -> Mat {
        let n = self.total_dim();
        let mut m = Mat::zeros(n, n);
        let mut row = 0;
        for w in &self.weights {
            for _ in 0..w.dim {
                m[(row, row)] = C64::new(w.values[k] as f64, 0.0);
                row += 1;
            }
        }
        m
    }

    /// Check the shape of diagonal (`sign = 0`) or raising/lowering blocks.
    fn check_blocks(&self, blocks: &BlockMap, sign: i64, what: &str) -> Result<()> {
        for (&(i, mu), b) in blocks {
            if i >= self.cartan.rank() || mu >= self.weights.len() {
                return Err(Error::InvalidInput(format!("{what} block ({i}, {mu}) is out of range")));
            }
            let target = if sign == 0 {
                Some(mu)
            } else {
                self.neighbour(mu, i, sign)
            };
            let Some(t) = target else {
                return Err(Error::InvalidInput(format!("{what} block ({i}, {}) maps to a missing weight", self.weights[mu].label)));
            };
            if b.shape() != (self.weights[t].dim, self.weights[mu].dim) {
                return Err(Error::InvalidInput(format!(
                    "{what} block ({i}, {}) has shape {:?}, expected {:?}",
                    self.weights[mu].label,
                    b.shape(),
                    (self.weights[t].dim, self.weights[mu].dim)
                )));
            }
        }
        Ok(())
    }

    /// Assemble a full operator from blocks with index `i`.
    fn assemble(&self, blocks: &BlockMap, i: usize, sign: i64, default_identity: bool, u: C64) -> Result<Mat> {
        let n = self.total_dim();
        let off = self.offsets();
        let mut m = Mat::zeros(n, n);
        for (mu, w) in self.weights.iter().enumerate() {
            if w.dim == 0 {
                continue;
            }
            match blocks.get(&(i, mu)) {
                Some(b) => {
                    let t = if sign == 0 { mu } else { self.neighbour(mu, i, sign).expect("validated") };
                    m.view_mut((off[t], off[mu]), (self.weights[t].dim, w.dim)).copy_from(&b.eval(u)?);
                }
                None if default_identity => {
                    m.view_mut((off[mu], off[mu]), (w.dim, w.dim)).fill_with_identity();
                }
                None => {}
            }
        }
        Ok(m)
    }

    /// Same, from constant blocks produced by `f`.
    fn assemble_with(&self, blocks: &BlockMap, i: usize, sign: i64, f: impl Fn(&RationalMatrix) -> Result<Mat>) -> Result<Mat> {
        let n = self.total_dim();
        let off = self.offsets();
        let mut m = Mat::zeros(n, n);
        for (mu, w) in self.weights.iter().enumerate() {
            if let Some(b) = blocks.get(&(i, mu)) {
                let t = if sign == 0 { mu } else { self.neighbour(mu, i, sign).expect("validated") };
                m.view_mut((off[t], off[mu]), (self.weights[t].dim, w.dim)).copy_from(&f(b)?);
            }
        }
        Ok(m)
    }
}

/// Yangian-side module: fields `ξᵢ(u)_μ`, `x±ᵢ(u)_μ` with the convention
/// `ξᵢ(u) = 1 + ħΣ ξ_{i,r}u^{−r−1}`, `x±ᵢ(u) = ħΣ x±_{i,r}u^{−r−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightModule {
    pub lattice: WeightLattice,
    pub hbar: C64,
    pub xi: BlockMap,
    pub xplus: BlockMap,
    pub xminus: BlockMap,
}

impl WeightModule {
    pub fn new(lattice: WeightLattice, hbar: C64, xi: BlockMap, xplus: BlockMap, xminus: BlockMap) -> Result<Self> {
        screen_hbar(hbar)?;
        lattice.check_blocks(&xi, 0, "xi")?;
        lattice.check_blocks(&xplus, 1, "xplus")?;
        lattice.check_blocks(&xminus, -1, "xminus")?;
        for i in 0..lattice.cartan.rank() {
            for (mu, w) in lattice.weights.iter().enumerate() {
                if w.dim > 0 && !xi.contains_key(&(i, mu)) {
                    return Err(Error::InvalidInput(format!("xi block ({i}, {}) is missing", w.label)));
                }
            }
        }
        for (what, blocks) in [("xi", &xi), ("xplus", &xplus), ("xminus", &xminus)] {
            for (&(i, mu), b) in blocks.iter() {
                let expect_identity = what == "xi";
                let v = b.value_at_infinity().map_err(|_| {
                    Error::InvalidInput(format!("{what} block ({i}, {}) is not regular at infinity", lattice.weights[mu].label))
                })?;
                let d = crate::linalg::max_diff(&v, &if expect_identity { crate::linalg::identity(v.nrows()) } else { Mat::zeros(v.nrows(), v.ncols()) });
                if d > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "{what} block ({i}, {}) has wrong value at infinity (off by {d:.3e})",
                        lattice.weights[mu].label
                    )));
                }
            }
        }
        Ok(Self { lattice, hbar, xi, xplus, xminus })
    }

    /// The module with no weights.
    pub fn zero(cartan: CartanData, hbar: C64) -> Result<Self> {
        Self::new(WeightLattice::new(cartan, Vec::new())?, hbar, BlockMap::new(), BlockMap::new(), BlockMap::new())
    }

    pub fn cartan(&self) -> &CartanData {
        &self.lattice.cartan
    }

    pub fn weights(&self) -> &[Weight] {
        &self.lattice.weights
    }

    pub fn dim(&self) -> usize {
        self.lattice.total_dim()
    }

    /// `ξᵢ(u)` on the whole space.
    pub fn xi_full(&self, i: usize, u: C64) -> Result<Mat> {
        self.lattice.assemble(&self.xi, i, 0, true, u)
    }

    /// `x±ᵢ(u)` on the whole space (`sign = ±1`).
    pub fn x_full(&self, i: usize, sign: i64, u: C64) -> Result<Mat> {
        let blocks = if sign > 0 { &self.xplus } else { &self.xminus };
        self.lattice.assemble(blocks, i, sign, false, u)
    }

    /// `ħ x±_{i,0}`, the `u⁻¹` coefficient of `x±ᵢ(u)`.
    pub fn x_leading_full(&self, i: usize, sign: i64) -> Result<Mat> {
        let blocks = if sign > 0 { &self.xplus } else { &self.xminus };
        self.lattice.assemble_with(blocks, i, sign, |b| Ok(b.taylor_infinity(2)?[1].clone()))
    }

    /// `ħ ξ_{i,0}`, the `u⁻¹` coefficient of `ξᵢ(u)`.
    pub fn xi_leading_full(&self, i: usize) -> Result<Mat> {
        self.lattice.assemble_with(&self.xi, i, 0, |b| Ok(b.taylor_infinity(2)?[1].clone()))
    }

    /// Every pole of every block.
    pub fn block_poles(&self) -> Vec<C64> {
        self.xi.values().chain(self.xplus.values()).chain(self.xminus.values()).flat_map(|b| b.pole_set()).collect()
    }
}

/// Quantum-loop-side module: fields `Ψᵢ(z)_μ`, `𝒳±ᵢ(z)_μ`, with `K_h`
/// acting on `V_μ` by `q^{μ(h)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopModule {
    pub lattice: WeightLattice,
    pub q: C64,
    /// `ħ` with `q = e^{πiħ}`, when known.
    pub hbar: Option<C64>,
    pub psi: BlockMap,
    pub xp: BlockMap,
    pub xm: BlockMap,
}

impl LoopModule {
    pub fn new(lattice: WeightLattice, q: C64, hbar: Option<C64>, psi: BlockMap, xp: BlockMap, xm: BlockMap) -> Result<Self> {
        screen_q(q)?;
        lattice.check_blocks(&psi, 0, "Psi")?;
        lattice.check_blocks(&xp, 1, "Xp")?;
        lattice.check_blocks(&xm, -1, "Xm")?;
        for i in 0..lattice.cartan.rank() {
            for (mu, w) in lattice.weights.iter().enumerate() {
                if w.dim > 0 && !psi.contains_key(&(i, mu)) {
                    return Err(Error::InvalidInput(format!("Psi block ({i}, {}) is missing", w.label)));
                }
            }
        }
        for (&(i, mu), b) in psi.iter() {
            let label = &lattice.weights[mu].label;
            let inf = b.value_at_infinity().map_err(|_| Error::InvalidInput(format!("Psi block ({i}, {label}) is not regular at infinity")))?;
            let zero = b.value_at_zero().map_err(|_| Error::InvalidInput(format!("Psi block ({i}, {label}) is not regular at zero")))?;
            let d = crate::linalg::max_diff(&(inf * zero), &crate::linalg::identity(b.rows()));
            if d > 1e-8 {
                return Err(Error::InvalidInput(format!("Psi block ({i}, {label}) has Psi(inf)·Psi(0) off the identity by {d:.3e}")));
            }
        }
        for (what, blocks) in [("Xp", &xp), ("Xm", &xm)] {
            for (&(i, mu), b) in blocks.iter() {
                b.value_at_infinity()
                    .and_then(|_| b.value_at_zero())
                    .map_err(|_| Error::InvalidInput(format!("{what} block ({i}, {}) must be regular at 0 and infinity", lattice.weights[mu].label)))?;
            }
        }
        Ok(Self { lattice, q, hbar, psi, xp, xm })
    }

    pub fn zero(cartan: CartanData, q: C64, hbar: Option<C64>) -> Result<Self> {
        Self::new(WeightLattice::new(cartan, Vec::new())?, q, hbar, BlockMap::new(), BlockMap::new(), BlockMap::new())
    }

    pub fn cartan(&self) -> &CartanData {
        &self.lattice.cartan
    }

    pub fn weights(&self) -> &[Weight] {
        &self.lattice.weights
    }

    pub fn dim(&self) -> usize {
        self.lattice.total_dim()
    }

    pub fn psi_full(&self, i: usize, z: C64) -> Result<Mat> {
        self.lattice.assemble(&self.psi, i, 0, true, z)
    }

    pub fn x_full(&self, i: usize, sign: i64, z: C64) -> Result<Mat> {
        let blocks = if sign > 0 { &self.xp } else { &self.xm };
        self.lattice.assemble(blocks, i, sign, false, z)
    }

    /// `𝒳±_{i,0} = 𝒳±ᵢ(∞)`.
    pub fn x_infinity_full(&self, i: usize, sign: i64) -> Result<Mat> {
        let blocks = if sign > 0 { &self.xp } else { &self.xm };
        self.lattice.assemble_with(blocks, i, sign, |b| b.value_at_infinity())
    }

    /// `Ψᵢ(∞)` and `Ψᵢ(0)` on the whole space.
    pub fn psi_limits_full(&self, i: usize) -> Result<(Mat, Mat)> {
        let a = self.lattice.assemble_with(&self.psi, i, 0, |b| b.value_at_infinity())?;
        let b = self.lattice.assemble_with(&self.psi, i, 0, |b| b.value_at_zero())?;
        Ok((a, b))
    }

    pub fn block_poles(&self) -> Vec<C64> {
        self.psi.values().chain(self.xp.values()).chain(self.xm.values()).flat_map(|b| b.pole_set()).collect()
    }
}
