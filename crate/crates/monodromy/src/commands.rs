//! The subcommands: forward and inverse monodromy, the functors, q-characters
//! and pole maps. Each produces a [`Report`] and optionally an artifact.

use crate::error::CliError;
use crate::json::{
    matrix_from_json, qchar_to_json, ComplexJson, ConnectionJson, Document, LoopModuleJson, SystemJson, WeightModuleJson,
};
use crate::plot::{Marker, PoleMap};
use crate::report::{relation_rows, Check, ContourMetadata, Report};
use monodromy_core::branch::{BranchMode, LogBranch};
use monodromy_core::diffeq::{
    connection_matrix_with, fundamental_solutions, inverse_abelian, DifferenceSystem, DEFAULT_TRUNCATION,
    DEFAULT_UPSILON_ORDER,
};
use monodromy_core::functor::{
    apply_f, apply_g, roundtrip_report, roundtrip_report_loop, shift_compat_report, FunctorConfig, DEFAULT_NODES,
    DEFAULT_RELATION_SAMPLES, FIELD_FIT_TOL, FUNCTOR_TOL, TAYLOR_TOL,
};
use monodromy_core::ratmat::contour::{build_contour, QUAD_TOL};
use monodromy_core::ratmat::RationalMatrix;
use monodromy_core::repmodel::{
    e_pi_map, qchar_qloop, qchar_yangian, sigma_set, LoopModule, ModuleRef, QCharacter, WeightModule,
};
use monodromy_core::sample::DEFAULT_SEED;
use monodromy_core::C64;
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Residual bound of `φ±(u+1) = A(u)φ±(u)` at the probe points.
pub const FUNDAMENTAL_RESIDUAL_TOL: f64 = 1e-8;
/// Change of `φ±` allowed when the truncation is doubled.
pub const DOUBLING_TOL: f64 = 1e-7;
/// Agreement of the product route with the Gamma-prefactor route.
pub const ROUTE_TOL: f64 = 1e-7;
/// Misfit of the rational fit of `S(z)`.
pub const CONNECTION_FIT_TOL: f64 = 1e-7;
/// `|S(u+1) − S(u)|`, relative.
pub const PERIODICITY_TOL: f64 = 1e-9;
/// `S(∞) = e^{πiA₀}` and `S(0) = e^{−πiA₀}`.
pub const LIMIT_TOL: f64 = 1e-8;
/// Consistency of the branch logarithms in the inverse problem.
pub const CONSISTENCY_TOL: f64 = 1e-8;
/// Residue-sum relations of the unipotent part.
pub const RESIDUE_RELATION_TOL: f64 = 1e-8;
/// Connection matrix of the recovered system against the input.
pub const INVERSE_ROUNDTRIP_TOL: f64 = 1e-7;
/// Multiset agreement of the two q-characters in the diagram check.
pub const DIAGRAM_TOL: f64 = 1e-8;

/// Where the logarithm domain comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchSpec {
    Strip,
    File(PathBuf),
}

impl std::str::FromStr for BranchSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "strip" {
            Ok(BranchSpec::Strip)
        } else if s.is_empty() {
            Err("branch must be \"strip\" or a file path".into())
        } else {
            Ok(BranchSpec::File(PathBuf::from(s)))
        }
    }
}

/// Branch file: a strip with an explicit left edge, or a finite list of
/// admissible logarithms.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchFile {
    #[serde(default)]
    left: Option<f64>,
    #[serde(default)]
    points: Option<Vec<ComplexJson>>,
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hbar: Option<C64>,
    pub branch: BranchSpec,
    pub seed: u64,
    pub nodes: usize,
    pub truncation: usize,
    pub tol: f64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hbar: None,
            branch: BranchSpec::Strip,
            seed: DEFAULT_SEED,
            nodes: DEFAULT_NODES,
            truncation: DEFAULT_TRUNCATION,
            tol: FUNCTOR_TOL,
            samples: DEFAULT_RELATION_SAMPLES,
        }
    }
}

/// Parse `re,im` (or a bare real number).
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("{t:?} is not a number"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("{s:?} is not of the form re,im")),
    }
}

impl RunConfig {
    fn as_json(&self) -> Value {
        json!({
            "hbar": self.hbar.map(ComplexJson::from),
            "branch": match &self.branch {
                BranchSpec::Strip => "strip".to_string(),
                BranchSpec::File(p) => p.display().to_string(),
            },
            "seed": self.seed,
            "nodes": self.nodes,
            "truncation": self.truncation,
            "tol": self.tol,
            "samples": self.samples,
        })
    }

    /// `ħ` of the run: the module's value, checked against `--hbar`.
    fn resolve_hbar(&self, from_input: Option<C64>) -> Result<C64, CliError> {
        match (self.hbar, from_input) {
            (Some(a), Some(b)) if (a - b).norm() > 1e-12 => {
                Err(CliError::Input(format!("--hbar {a} disagrees with the input's hbar {b}")))
            }
            (_, Some(h)) | (Some(h), None) => Ok(h),
            (None, None) => Err(CliError::Input("hbar is not known; pass --hbar re,im".into())),
        }
    }

    pub fn branch_for(&self, hbar: C64) -> Result<LogBranch, CliError> {
        match &self.branch {
            BranchSpec::Strip => Ok(LogBranch::standard(hbar)),
            BranchSpec::File(path) => {
                let text = read_input(path)?;
                let f: BranchFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("malformed branch file {}: {e}", path.display())))?;
                let b = match (f.left, f.points) {
                    (Some(left), None) => LogBranch::strip(hbar, left),
                    (None, Some(points)) => LogBranch::custom(hbar, points.into_iter().map(C64::from).collect()),
                    _ => return Err(CliError::Input("branch file needs exactly one of \"left\" and \"points\"".into())),
                };
                b.validate()?;
                Ok(b)
            }
        }
    }

    fn functor_config(&self, cartan: &monodromy_core::repmodel::CartanData, hbar: C64) -> Result<FunctorConfig, CliError> {
        let mut fc = FunctorConfig::new(cartan, hbar)?;
        fc.nodes = self.nodes;
        fc.truncation = self.truncation;
        fc.relation_tol = self.tol;
        fc.relation_samples = self.samples;
        fc.seed = self.seed;
        fc.branch = self.branch_for(hbar)?;
        fc.validate(cartan)?;
        Ok(fc)
    }
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<Document, CliError> {
    crate::json::parse_document(&read_input(path)?)
}

/// Output of a command besides its report.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Json(Value),
    Svg(String),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub artifact: Option<Artifact>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.report.passed() {
            crate::error::EXIT_PASS
        } else {
            crate::error::EXIT_NUMERIC
        }
    }
}

/// Run `body`; numerical failures become a failed report, input errors
/// propagate.
fn execute(
    command: &str,
    cfg: &RunConfig,
    body: impl FnOnce(&mut Report) -> Result<Option<Artifact>, CliError>,
) -> Result<Outcome, CliError> {
    let mut report = Report::new(command, cfg.as_json());
    match body(&mut report) {
        Ok(artifact) => {
            report.finish();
            Ok(Outcome { report, artifact })
        }
        Err(CliError::Numeric(e)) => {
            report.fail(e.name(), e.to_string());
            Ok(Outcome { report, artifact: None })
        }
        Err(other) => Err(other),
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("artifact serializes")
}

fn expect_system(doc: Document) -> Result<DifferenceSystem, CliError> {
    match doc {
        Document::System(s) => Ok(s),
        other => Err(CliError::Input(format!("expected a difference system, got {}", other.kind()))),
    }
}

fn expect_yangian(doc: Document) -> Result<WeightModule, CliError> {
    match doc {
        Document::Yangian(v) => Ok(v),
        other => Err(CliError::Input(format!("expected a Yangian module, got {}", other.kind()))),
    }
}

fn expect_loop(doc: Document) -> Result<LoopModule, CliError> {
    match doc {
        Document::Loop(w) => Ok(w),
        other => Err(CliError::Input(format!("expected a loop module, got {}", other.kind()))),
    }
}

/// `forward`: fundamental solutions and the connection matrix of a system.
pub fn monodromy_forward(doc: Document, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = expect_system(doc)?;
    execute("forward", cfg, |r| {
        let pair = fundamental_solutions(&sys, cfg.truncation, DEFAULT_UPSILON_ORDER)?;
        let cert = pair.certify()?;
        r.check(Check::at_most("fundamental_residual_plus", cert.residual_plus, FUNDAMENTAL_RESIDUAL_TOL));
        r.check(Check::at_most("fundamental_residual_minus", cert.residual_minus, FUNDAMENTAL_RESIDUAL_TOL));
        r.check(Check::at_most("truncation_doubling", cert.doubling_delta, DOUBLING_TOL));
        if let Some(d) = cert.route_delta {
            r.check(Check::at_most("route_agreement", d, ROUTE_TOL));
        }
        let conn = connection_matrix_with(&pair, 64)?;
        r.check(Check::at_most("connection_fit", conn.report.fit_residual, CONNECTION_FIT_TOL));
        r.check(Check::at_most("periodicity", conn.report.periodicity, PERIODICITY_TOL));
        r.check(Check::at_most("limits", conn.report.limit_error, LIMIT_TOL));
        Ok(Some(Artifact::Json(to_value(&ConnectionJson::from_data(&conn, &sys.a0)))))
    })
}

/// `inverse`: the abelian inverse monodromy problem for `S(z)` and `A₀`.
pub fn monodromy_inverse(doc: Document, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Document::Connection(c) = doc else {
        return Err(CliError::Input(format!("expected connection data, got {}", doc.kind())));
    };
    let s = RationalMatrix::try_from(&c.s)?;
    let a0 = matrix_from_json(c.a0.as_ref().ok_or_else(|| CliError::Input("connection data lacks \"A0\"".into()))?)?;
    if a0.nrows() != s.rows() || a0.ncols() != s.cols() || !s.is_square() {
        return Err(CliError::Input("S and A0 must be square of the same size".into()));
    }
    let hbar = cfg.resolve_hbar(None)?;
    let branch = cfg.branch_for(hbar)?;
    execute("inverse", cfg, |r| {
        let res = inverse_abelian(&s, &a0, &branch)?;
        r.check(Check::at_most("consistency", res.report.consistency, CONSISTENCY_TOL));
        r.check(Check::at_most("residue_relations", res.report.relation_residual, RESIDUE_RELATION_TOL));
        r.check(Check::at_most("forward_roundtrip", res.report.forward_residual, INVERSE_ROUNDTRIP_TOL));
        Ok(Some(Artifact::Json(to_value(&SystemJson::from_system(&res.system)))))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctorMode {
    F,
    G,
    Roundtrip,
    Shift,
}

fn functor_checks(r: &mut Report, meta: &monodromy_core::functor::QuadratureMeta) {
    r.check(Check::at_most("quadrature_doubling", meta.quad_delta, QUAD_TOL));
    r.check(Check::at_most("field_fit", meta.fit_residual, FIELD_FIT_TOL));
    r.check(Check::at_most("taylor_consistency", meta.taylor_residual, TAYLOR_TOL));
    r.contour_metadata = Some(ContourMetadata::from(meta));
}

/// `functor F|G|roundtrip|shift`.
pub fn functor(mode: FunctorMode, doc: Document, shift: Option<C64>, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let name = match mode {
        FunctorMode::F => "functor F",
        FunctorMode::G => "functor G",
        FunctorMode::Roundtrip => "functor roundtrip",
        FunctorMode::Shift => "functor shift",
    };
    match (mode, doc) {
        (FunctorMode::F, doc) => {
            let v = expect_yangian(doc)?;
            let fc = cfg.functor_config(v.cartan(), cfg.resolve_hbar(Some(v.hbar))?)?;
            execute(name, cfg, |r| {
                let out = apply_f(&v, &fc)?;
                r.relations = relation_rows(&out.relations);
                r.check(Check::at_most("qloop_relations", out.relations.max_residual(), cfg.tol));
                functor_checks(r, &out.meta);
                Ok(Some(Artifact::Json(to_value(&LoopModuleJson::from(&out.module)))))
            })
        }
        (FunctorMode::G, doc) => {
            let w = expect_loop(doc)?;
            let fc = cfg.functor_config(w.cartan(), cfg.resolve_hbar(w.hbar)?)?;
            execute(name, cfg, |r| {
                let out = apply_g(&w, &fc)?;
                r.relations = relation_rows(&out.relations);
                r.check(Check::at_most("yangian_relations", out.relations.max_residual(), cfg.tol));
                functor_checks(r, &out.meta);
                Ok(Some(Artifact::Json(to_value(&WeightModuleJson::from(&out.module)))))
            })
        }
        (FunctorMode::Roundtrip, Document::Yangian(v)) => {
            let fc = cfg.functor_config(v.cartan(), cfg.resolve_hbar(Some(v.hbar))?)?;
            execute(name, cfg, |r| {
                let c = roundtrip_report(&v, &fc)?;
                r.check(Check::at_most("roundtrip_deviation", c.deviation, cfg.tol));
                Ok(Some(Artifact::Json(json!({ "deviation": c.deviation, "worst": c.worst, "samples": c.samples }))))
            })
        }
        (FunctorMode::Roundtrip, Document::Loop(w)) => {
            let fc = cfg.functor_config(w.cartan(), cfg.resolve_hbar(w.hbar)?)?;
            execute(name, cfg, |r| {
                let c = roundtrip_report_loop(&w, &fc)?;
                r.check(Check::at_most("roundtrip_deviation", c.deviation, cfg.tol));
                Ok(Some(Artifact::Json(json!({ "deviation": c.deviation, "worst": c.worst, "samples": c.samples }))))
            })
        }
        (FunctorMode::Roundtrip, other) => Err(CliError::Input(format!("expected a module, got {}", other.kind()))),
        (FunctorMode::Shift, doc) => {
            let v = expect_yangian(doc)?;
            let a = shift.ok_or_else(|| CliError::Input("functor shift needs --by re,im".into()))?;
            let fc = cfg.functor_config(v.cartan(), cfg.resolve_hbar(Some(v.hbar))?)?;
            execute(name, cfg, |r| {
                let c = shift_compat_report(&v, a, &fc)?;
                r.check(Check::at_most("shift_deviation", c.deviation, cfg.tol));
                Ok(Some(Artifact::Json(json!({
                    "shift": ComplexJson::from(a),
                    "deviation": c.deviation,
                    "worst": c.worst,
                    "samples": c.samples,
                }))))
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Yangian,
    Loop,
}

/// `qchar`: the q-character on either side, optionally sent through `e_Π`,
/// and the commutative-diagram check `e_Π(χ^Y(V)) = χ^U(F(V))`.
pub fn qchar(doc: Document, side: Side, map_e_pi: bool, check_diagram: bool, cfg: &RunConfig) -> Result<Outcome, CliError> {
    if check_diagram && !matches!(doc, Document::Yangian(_)) {
        return Err(CliError::Input("--check-diagram needs a Yangian module".into()));
    }
    let dim = match &doc {
        Document::Yangian(v) => v.dim(),
        Document::Loop(w) => w.dim(),
        other => return Err(CliError::Input(format!("expected a module, got {}", other.kind()))),
    };
    let (hbar, cartan) = match &doc {
        Document::Yangian(v) => (cfg.resolve_hbar(Some(v.hbar)), v.cartan().clone()),
        Document::Loop(w) => (cfg.resolve_hbar(w.hbar), w.cartan().clone()),
        _ => unreachable!("rejected above"),
    };
    let needs_hbar = map_e_pi || check_diagram || (side == Side::Loop && matches!(doc, Document::Yangian(_)));
    let fc = if needs_hbar { Some(cfg.functor_config(&cartan, hbar?)?) } else { None };
    execute("qchar", cfg, |r| {
        let image = |v: &WeightModule| -> Result<LoopModule, CliError> {
            Ok(apply_f(v, fc.as_ref().expect("functor config"))?.module)
        };
        let chi: QCharacter = match (&doc, side) {
            (Document::Yangian(v), Side::Yangian) => {
                let chi = qchar_yangian(v)?;
                if map_e_pi {
                    e_pi_map(&chi, &fc.as_ref().expect("functor config").branch)?
                } else {
                    chi
                }
            }
            (Document::Yangian(v), Side::Loop) => qchar_qloop(&image(v)?)?,
            (Document::Loop(w), Side::Loop) => qchar_qloop(w)?,
            (Document::Loop(_), Side::Yangian) => {
                return Err(CliError::Input("a loop module has no Yangian q-character; use --side U".into()))
            }
            _ => unreachable!("rejected above"),
        };
        r.check(Check::at_most("multiplicity_sum", chi.total_dim().abs_diff(dim) as f64, 0.0));
        if check_diagram {
            let Document::Yangian(v) = &doc else { unreachable!("rejected above") };
            let left = e_pi_map(&qchar_yangian(v)?, &fc.as_ref().expect("functor config").branch)?;
            let right = qchar_qloop(&image(v)?)?;
            let d = left.distance(&right, DIAGRAM_TOL).unwrap_or(f64::INFINITY);
            r.check(Check::at_most("diagram", d, DIAGRAM_TOL));
        }
        Ok(Some(Artifact::Json(to_value(&qchar_to_json(&chi)))))
    })
}

/// `plot`: SVG pole map of a module, a system or connection data.
pub fn plot(doc: Document, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut map = PoleMap::default();
    match &doc {
        Document::Yangian(v) => {
            map.title = format!("sigma of a {}-dimensional Yangian module", v.dim());
            map.points = sigma_set(ModuleRef::Yangian(v)).into_iter().map(|p| (p, Marker::Sigma)).collect();
            let exclude: Vec<C64> = v.xi.values().flat_map(|b| {
                let mut pts = b.pole_set();
                pts.extend(monodromy_core::ratmat::zero_set(b));
                pts
            }).collect();
            for b in v.xplus.values().chain(v.xminus.values()) {
                if let Ok(curve) = build_contour(&b.pole_set(), &exclude, 1.0, cfg.nodes) {
                    for c in curve.components {
                        if !map.circles.iter().any(|&(z, r)| (z - c.center).norm() < 1e-12 && (r - c.radius).abs() < 1e-12) {
                            map.circles.push((c.center, c.radius));
                        }
                    }
                }
            }
            map.strip = Some(cfg.branch_for(cfg.resolve_hbar(Some(v.hbar))?)?);
        }
        Document::Loop(w) => {
            map.title = format!("sigma of a {}-dimensional loop module", w.dim());
            map.points = sigma_set(ModuleRef::Loop(w)).into_iter().map(|p| (p, Marker::Sigma)).collect();
            map.unit_circle = true;
        }
        Document::System(sys) => {
            map.title = format!("poles and zeros of a {}x{} system", sys.dim(), sys.dim());
            map.points = sys.poles().iter().map(|p| (p.0, Marker::Pole)).collect();
            map.points.extend(sys.zeros().iter().map(|&z| (z, Marker::Zero)));
            if let Some(h) = cfg.hbar {
                map.strip = Some(cfg.branch_for(h)?);
            }
        }
        Document::Connection(c) => {
            let s = RationalMatrix::try_from(&c.s)?;
            map.title = "poles of a connection matrix".into();
            map.points = s.pole_set().into_iter().map(|p| (p, Marker::Pole)).collect();
            map.unit_circle = true;
        }
    }
    if let Some(BranchMode::Custom(_)) = map.strip.as_ref().map(|b| &b.mode) {
        map.strip = None;
    }
    execute("plot", cfg, |r| {
        r.output = Some(json!({ "markers": map.points.len(), "circles": map.circles.len() }));
        Ok(Some(Artifact::Svg(map.render())))
    })
}

/// `bootstrap`: regenerate the fixture set into `dir`.
pub fn bootstrap(dir: &Path, cfg: &RunConfig) -> Result<Outcome, CliError> {
    execute("bootstrap", cfg, |r| {
        let files = crate::fixtures::build(r)?;
        if r.checks.iter().all(|c| c.passed) {
            crate::fixtures::write_all(dir, &files)?;
        }
        r.output = Some(json!({ "files": files.keys().collect::<Vec<_>>() }));
        Ok(None)
    })
}
