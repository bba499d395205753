//! JSON formats for rational matrices, difference systems, connection data,
//! modules on both sides and q-characters.
//!
//! Complex numbers are `{re, im}` objects; dense matrices are row-major
//! arrays of rows. Block maps are keyed by `"i,label"`, where `i` indexes
//! the Cartan data and `label` names the source weight space.

use crate::error::CliError;
use monodromy_core::diffeq::{ConnectionData, DifferenceSystem};
use monodromy_core::ratmat::{RationalMatrix, RationalScalar};
use monodromy_core::repmodel::{BlockMap, CartanData, LoopModule, Monomial, QCharacter, Weight, WeightLattice, WeightModule};
use monodromy_core::{Mat, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        C64::new(z.re, z.im)
    }
}

fn complex_list(v: &[C64]) -> Vec<ComplexJson> {
    v.iter().copied().map(ComplexJson::from).collect()
}

fn c64_list(v: &[ComplexJson]) -> Vec<C64> {
    v.iter().copied().map(C64::from).collect()
}

pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn matrix_to_json(m: &Mat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

pub fn matrix_from_json(m: &MatrixJson) -> Result<Mat, CliError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input("matrix rows have different lengths".into()));
    }
    Ok(Mat::from_fn(rows, cols, |i, j| m[i][j].into()))
}

/// `scale·∏(u − zeros)/∏(u − poles)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarJson {
    pub zeros: Vec<ComplexJson>,
    pub poles: Vec<ComplexJson>,
    pub scale: ComplexJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalMatrixJson {
    pub dim_out: usize,
    pub dim_in: usize,
    pub entries: Vec<Vec<ScalarJson>>,
}

impl From<&RationalScalar> for ScalarJson {
    fn from(r: &RationalScalar) -> Self {
        Self { zeros: complex_list(&r.zeros), poles: complex_list(&r.poles), scale: r.scale.into() }
    }
}

impl From<&ScalarJson> for RationalScalar {
    fn from(s: &ScalarJson) -> Self {
        RationalScalar::new(s.scale.into(), c64_list(&s.zeros), c64_list(&s.poles))
    }
}

impl From<&RationalMatrix> for RationalMatrixJson {
    fn from(m: &RationalMatrix) -> Self {
        let entries = (0..m.rows()).map(|i| (0..m.cols()).map(|j| ScalarJson::from(m.entry(i, j))).collect()).collect();
        Self { dim_out: m.rows(), dim_in: m.cols(), entries }
    }
}

impl TryFrom<&RationalMatrixJson> for RationalMatrix {
    type Error = CliError;

    fn try_from(m: &RationalMatrixJson) -> Result<Self, CliError> {
        if m.entries.len() != m.dim_out || m.entries.iter().any(|r| r.len() != m.dim_in) {
            return Err(CliError::Input(format!(
                "rational matrix entries do not match the declared shape {}x{}",
                m.dim_out, m.dim_in
            )));
        }
        let entries = m.entries.iter().flatten().map(RationalScalar::from).collect();
        Ok(RationalMatrix::from_entries(m.dim_out, m.dim_in, entries))
    }
}

/// `{A, abelian}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    #[serde(rename = "A")]
    pub a: RationalMatrixJson,
    pub abelian: bool,
}

impl SystemJson {
    pub fn from_system(sys: &DifferenceSystem) -> Self {
        Self { a: (&sys.a).into(), abelian: sys.abelian }
    }

    /// Validated system; a declared abelian flag is verified.
    pub fn to_system(&self) -> Result<DifferenceSystem, CliError> {
        let a = RationalMatrix::try_from(&self.a)?;
        let sys = if self.abelian { DifferenceSystem::new_abelian(a)? } else { DifferenceSystem::new(a)? };
        Ok(sys)
    }
}

/// `S(z)` with its limits; `A0` is carried along so the file can be fed
/// back to the inverse problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionJson {
    #[serde(rename = "S")]
    pub s: RationalMatrixJson,
    #[serde(rename = "S_inf", default, skip_serializing_if = "Option::is_none")]
    pub s_inf: Option<MatrixJson>,
    #[serde(rename = "S_zero", default, skip_serializing_if = "Option::is_none")]
    pub s_zero: Option<MatrixJson>,
    #[serde(rename = "A0", default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<MatrixJson>,
}

impl ConnectionJson {
    pub fn from_data(c: &ConnectionData, a0: &Mat) -> Self {
        Self {
            s: (&c.s).into(),
            s_inf: Some(matrix_to_json(&c.s_inf)),
            s_zero: Some(matrix_to_json(&c.s_zero)),
            a0: Some(matrix_to_json(a0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanJson {
    #[serde(rename = "I")]
    pub index: Vec<String>,
    pub aij: Vec<Vec<i64>>,
    pub d: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightJson {
    pub label: String,
    pub alpha_check_values: Vec<i64>,
    pub dim: usize,
}

pub type BlocksJson = BTreeMap<String, RationalMatrixJson>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YangianBlocksJson {
    pub xi: BlocksJson,
    pub xplus: BlocksJson,
    pub xminus: BlocksJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopBlocksJson {
    #[serde(rename = "Psi")]
    pub psi: BlocksJson,
    #[serde(rename = "Xp")]
    pub xp: BlocksJson,
    #[serde(rename = "Xm")]
    pub xm: BlocksJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightModuleJson {
    pub cartan: CartanJson,
    pub hbar: ComplexJson,
    pub weights: Vec<WeightJson>,
    pub blocks: YangianBlocksJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopModuleJson {
    pub cartan: CartanJson,
    pub q: ComplexJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<ComplexJson>,
    pub weights: Vec<WeightJson>,
    pub blocks: LoopBlocksJson,
}

fn cartan_to_json(c: &CartanData) -> CartanJson {
    CartanJson { index: (1..=c.rank()).map(|i| i.to_string()).collect(), aij: c.a.clone(), d: c.d.clone() }
}

fn lattice_to_json(l: &WeightLattice) -> (CartanJson, Vec<WeightJson>) {
    let weights = l
        .weights
        .iter()
        .map(|w| WeightJson { label: w.label.clone(), alpha_check_values: w.values.clone(), dim: w.dim })
        .collect();
    (cartan_to_json(&l.cartan), weights)
}

fn lattice_from_json(c: &CartanJson, weights: &[WeightJson]) -> Result<WeightLattice, CliError> {
    if c.index.len() != c.aij.len() {
        return Err(CliError::Input(format!("index set has {} labels but aij has {} rows", c.index.len(), c.aij.len())));
    }
    let cartan = CartanData::new(c.aij.clone(), c.d.clone())?;
    let weights = weights
        .iter()
        .map(|w| Weight { label: w.label.clone(), values: w.alpha_check_values.clone(), dim: w.dim })
        .collect();
    Ok(WeightLattice::new(cartan, weights)?)
}

fn blocks_to_json(l: &WeightLattice, b: &BlockMap) -> BlocksJson {
    b.iter().map(|(&(i, mu), m)| (format!("{i},{}", l.weights[mu].label), m.into())).collect()
}

fn blocks_from_json(l: &WeightLattice, b: &BlocksJson, what: &str) -> Result<BlockMap, CliError> {
    let mut out = BlockMap::new();
    for (key, m) in b {
        let (i, label) = key
            .split_once(',')
            .ok_or_else(|| CliError::Input(format!("{what} key {key:?} is not of the form \"i,label\"")))?;
        let i: usize = i.trim().parse().map_err(|_| CliError::Input(format!("{what} key {key:?} has a bad index")))?;
        if i >= l.cartan.rank() {
            return Err(CliError::Input(format!("{what} key {key:?} has index beyond the rank")));
        }
        let mu = l
            .index_of_label(label)
            .ok_or_else(|| CliError::Input(format!("{what} key {key:?} names an unknown weight")))?;
        out.insert((i, mu), RationalMatrix::try_from(m)?);
    }
    Ok(out)
}

impl From<&WeightModule> for WeightModuleJson {
    fn from(v: &WeightModule) -> Self {
        let (cartan, weights) = lattice_to_json(&v.lattice);
        let l = &v.lattice;
        Self {
            cartan,
            hbar: v.hbar.into(),
            weights,
            blocks: YangianBlocksJson {
                xi: blocks_to_json(l, &v.xi),
                xplus: blocks_to_json(l, &v.xplus),
                xminus: blocks_to_json(l, &v.xminus),
            },
        }
    }
}

impl TryFrom<&WeightModuleJson> for WeightModule {
    type Error = CliError;

    fn try_from(j: &WeightModuleJson) -> Result<Self, CliError> {
        let l = lattice_from_json(&j.cartan, &j.weights)?;
        let xi = blocks_from_json(&l, &j.blocks.xi, "xi")?;
        let xplus = blocks_from_json(&l, &j.blocks.xplus, "xplus")?;
        let xminus = blocks_from_json(&l, &j.blocks.xminus, "xminus")?;
        Ok(WeightModule::new(l, j.hbar.into(), xi, xplus, xminus)?)
    }
}

impl From<&LoopModule> for LoopModuleJson {
    fn from(w: &LoopModule) -> Self {
        let (cartan, weights) = lattice_to_json(&w.lattice);
        let l = &w.lattice;
        Self {
            cartan,
            q: w.q.into(),
            hbar: w.hbar.map(Into::into),
            weights,
            blocks: LoopBlocksJson {
                psi: blocks_to_json(l, &w.psi),
                xp: blocks_to_json(l, &w.xp),
                xm: blocks_to_json(l, &w.xm),
            },
        }
    }
}

impl TryFrom<&LoopModuleJson> for LoopModule {
    type Error = CliError;

    fn try_from(j: &LoopModuleJson) -> Result<Self, CliError> {
        let l = lattice_from_json(&j.cartan, &j.weights)?;
        let psi = blocks_from_json(&l, &j.blocks.psi, "Psi")?;
        let xp = blocks_from_json(&l, &j.blocks.xp, "Xp")?;
        let xm = blocks_from_json(&l, &j.blocks.xm, "Xm")?;
        Ok(LoopModule::new(l, j.q.into(), j.hbar.map(Into::into), psi, xp, xm)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialJson {
    pub i: usize,
    pub location: ComplexJson,
    pub exp: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTermJson {
    pub mu: String,
    pub monomial: Vec<MonomialJson>,
    pub mult: usize,
}

pub fn qchar_to_json(chi: &QCharacter) -> Vec<QTermJson> {
    chi.terms
        .iter()
        .map(|t| QTermJson {
            mu: t.label.clone(),
            monomial: t
                .monomial
                .iter()
                .map(|m: &Monomial| MonomialJson { i: m.i, location: m.location.into(), exp: m.exp })
                .collect(),
            mult: t.mult,
        })
        .collect()
}

/// Any input file the commands accept.
#[derive(Debug, Clone)]
pub enum Document {
    Yangian(WeightModule),
    Loop(LoopModule),
    System(DifferenceSystem),
    Connection(ConnectionJson),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Yangian(_) => "Yangian module",
            Document::Loop(_) => "loop module",
            Document::System(_) => "difference system",
            Document::Connection(_) => "connection data",
        }
    }
}

fn parse_as<T: for<'de> Deserialize<'de>>(v: serde_json::Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Input(format!("malformed {what}: {e}")))
}

/// Recognise a document by its top-level keys.
pub fn parse_document(text: &str) -> Result<Document, CliError> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| CliError::Input("top-level JSON value must be an object".into()))?;
    if obj.contains_key("q") {
        let j: LoopModuleJson = parse_as(v, "loop module")?;
        Ok(Document::Loop(LoopModule::try_from(&j)?))
    } else if obj.contains_key("cartan") {
        let j: WeightModuleJson = parse_as(v, "Yangian module")?;
        Ok(Document::Yangian(WeightModule::try_from(&j)?))
    } else if obj.contains_key("S") {
        Ok(Document::Connection(parse_as(v, "connection data")?))
    } else if obj.contains_key("A") {
        let j: SystemJson = parse_as(v, "difference system")?;
        Ok(Document::System(j.to_system()?))
    } else {
        Err(CliError::Input("unrecognised document: expected a module, a system or connection data".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use monodromy_core::c64;
    use monodromy_core::repmodel::{sl2_eval_loop_module, sl2_eval_module};

    #[test]
    fn weight_module_round_trip() {
        let v = sl2_eval_module(3, c64(0.2, 0.05), c64(0.3, 0.0)).unwrap();
        let text = serde_json::to_string(&WeightModuleJson::from(&v)).unwrap();
        match parse_document(&text).unwrap() {
            Document::Yangian(w) => {
                let u = c64(0.9, 1.3);
                for (k, m) in &v.xi {
                    let d = monodromy_core::linalg::max_diff(&m.eval(u).unwrap(), &w.xi[k].eval(u).unwrap());
                    assert!(d < 1e-12);
                }
                assert_eq!(v.xplus.len(), w.xplus.len());
            }
            other => panic!("parsed as {}", other.kind()),
        }
    }

    #[test]
    fn loop_module_round_trip() {
        let q = (c64(0.0, std::f64::consts::PI * 0.3)).exp();
        let w = sl2_eval_loop_module(C64::from_polar(1.0, 0.9), q, Some(c64(0.3, 0.0))).unwrap();
        let text = serde_json::to_string(&LoopModuleJson::from(&w)).unwrap();
        let Document::Loop(back) = parse_document(&text).unwrap() else { panic!("not a loop module") };
        assert_eq!(back.hbar, w.hbar);
        let z = c64(0.4, -1.1);
        let d = monodromy_core::linalg::max_diff(&w.psi[&(0, 0)].eval(z).unwrap(), &back.psi[&(0, 0)].eval(z).unwrap());
        assert!(d < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_an_input_error() {
        let bad = r#"{"A": {"dim_out": 2, "dim_in": 2, "entries": [[{"zeros": [], "poles": [], "scale": {"re": 1, "im": 0}}]]}, "abelian": true}"#;
        assert!(matches!(parse_document(bad), Err(CliError::Input(_))));
        assert!(matches!(parse_document("[1, 2]"), Err(CliError::Input(_))));
        assert!(matches!(parse_document("{\"x\": 1}"), Err(CliError::Input(_))));
    }
}
