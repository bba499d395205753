//! Bundled input fixtures and the derived values that accompany them.
//!
//! `bootstrap` rebuilds every file from the closed-form constructors and
//! runs the construction oracles before writing anything.

use crate::error::CliError;
use crate::json::{qchar_to_json, ComplexJson, LoopModuleJson, SystemJson, WeightModuleJson};
use crate::report::{Check, Report};
use monodromy_core::branch::LogBranch;
use monodromy_core::diffeq::DifferenceSystem;
use monodromy_core::ratmat::{RationalMatrix, RationalScalar};
use monodromy_core::repmodel::{
    check_yangian_relations, direct_sum, e_pi_map, qchar_yangian, sigma_set, sl2_eval_loop_module, sl2_eval_module,
    CartanData, ModuleRef, WeightModule,
};
use monodromy_core::{c64, C64};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;

/// `ħ` of every bundled module.
pub const FIXTURE_HBAR: f64 = 0.3;
/// Residual bound of the closed-form evaluation modules.
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Highest-weight eigenvalue against `(u + ħ − a)/(u − a)`.
pub const EIGENVALUE_TOL: f64 = 1e-12;

const ORACLE_SEED: u64 = 7;
const ORACLE_SAMPLES: usize = 30;

fn hbar() -> C64 {
    c64(FIXTURE_HBAR, 0.0)
}

fn q() -> C64 {
    (C64::new(0.0, std::f64::consts::PI) * hbar()).exp()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("fixture serializes");
    s.push('\n');
    s
}

/// Evaluation modules, sums and their roots, by file stem.
fn yangian_fixtures() -> monodromy_core::Result<Vec<(&'static str, WeightModule, Vec<C64>)>> {
    let h = hbar();
    let v = |n, a: f64| sl2_eval_module(n, c64(a, 0.0), h);
    Ok(vec![
        ("v2_a0.1", v(2, 0.1)?, vec![c64(0.1, 0.0)]),
        ("v2_a0.2", v(2, 0.2)?, vec![c64(0.2, 0.0)]),
        ("v3_a0.2", v(3, 0.2)?, vec![c64(0.2, 0.0)]),
        ("sum_v2_a0.1_v2_a0.25", direct_sum(&v(2, 0.1)?, &v(2, 0.25)?)?, vec![c64(0.1, 0.0), c64(0.25, 0.0)]),
        ("sum_v2_a0.2_v2_a0.35", direct_sum(&v(2, 0.2)?, &v(2, 0.35)?)?, vec![c64(0.2, 0.0), c64(0.35, 0.0)]),
        ("congruent_v2_a0.1_v2_a1.1", direct_sum(&v(2, 0.1)?, &v(2, 1.1)?)?, vec![c64(0.1, 0.0), c64(1.1, 0.0)]),
        ("empty", WeightModule::zero(CartanData::sl2(), h)?, Vec::new()),
    ])
}

fn scalar_system(zeros: &[C64], poles: &[C64]) -> monodromy_core::Result<DifferenceSystem> {
    DifferenceSystem::new(RationalMatrix::scalar(RationalScalar::new(c64(1.0, 0.0), zeros.to_vec(), poles.to_vec())))
}

/// `A(u) = 1 + A₀/u + B/u²` with `A₀ = diag(1, 0)` off-diagonal `B`: the
/// eigenvalues of `ad(A₀)` include `±1`.
fn resonant_system() -> monodromy_core::Result<DifferenceSystem> {
    let one = RationalScalar::one();
    let a = RationalMatrix::from_entries(
        2,
        2,
        vec![
            RationalScalar::new(c64(1.0, 0.0), vec![c64(-1.0, 0.0)], vec![c64(0.0, 0.0)]),
            RationalScalar::pole_term(c64(1.0, 0.0), c64(0.0, 0.0), 2),
            RationalScalar::pole_term(c64(1.0, 0.0), c64(0.0, 0.0), 2),
            one,
        ],
    );
    DifferenceSystem::new(a)
}

fn system_fixtures() -> monodromy_core::Result<Vec<(&'static str, DifferenceSystem)>> {
    Ok(vec![
        ("system_scalar", scalar_system(&[c64(0.15, 0.05)], &[c64(0.62, -0.1)])?),
        ("system_identity", DifferenceSystem::new(RationalMatrix::identity(2))?),
        ("system_resonant", resonant_system()?),
        (
            "system_three_poles",
            scalar_system(
                &[c64(0.1, 0.0), c64(0.35, 0.2), c64(-0.2, 0.1)],
                &[c64(0.5, 0.0), c64(0.2, -0.3), c64(0.05, 0.4)],
            )?,
        ),
    ])
}

/// Every fixture file, by name, with the oracle checks that gate them.
pub fn build(report: &mut Report) -> Result<BTreeMap<String, String>, CliError> {
    let mut files = BTreeMap::new();
    let branch = LogBranch::standard(hbar());
    let mut expected = serde_json::Map::new();
    let mut worst_relation = 0.0f64;
    let mut worst_eigen = 0.0f64;
    let probes = [c64(0.7, 0.4), c64(-1.3, 2.0), c64(2.1, -0.9)];
    for (stem, v, roots) in yangian_fixtures()? {
        if v.dim() > 0 {
            let rel = check_yangian_relations(&v, ORACLE_SAMPLES, CONSTRUCTION_TOL, ORACLE_SEED)?;
            worst_relation = worst_relation.max(rel.max_residual());
        }
        if v.dim() == 2 {
            let a = roots[0];
            for &u in &probes {
                let top = v.xi[&(0, 0)].eval(u)?[(0, 0)];
                worst_eigen = worst_eigen.max((top - (u + hbar() - a) / (u - a)).norm());
            }
        }
        let sigma: Vec<ComplexJson> = sigma_set(ModuleRef::Yangian(&v)).into_iter().map(Into::into).collect();
        let chi = qchar_yangian(&v)?;
        let mut entry = json!({
            "dim": v.dim(),
            "drinfeld_roots": roots.iter().copied().map(ComplexJson::from).collect::<Vec<_>>(),
            "sigma": sigma,
            "qchar_yangian": qchar_to_json(&chi),
        });
        if let Ok(image) = e_pi_map(&chi, &branch) {
            entry["qchar_loop_expected"] = serde_json::to_value(qchar_to_json(&image)).expect("character serializes");
        }
        expected.insert(stem.to_string(), entry);
        files.insert(format!("{stem}.json"), pretty(&serde_json::to_value(WeightModuleJson::from(&v)).expect("module serializes")));
    }
    let alpha = C64::from_polar(1.0, 0.9);
    let w = sl2_eval_loop_module(alpha, q(), Some(hbar()))?;
    files.insert(
        "loop_alpha_0.9.json".into(),
        pretty(&serde_json::to_value(LoopModuleJson::from(&w)).expect("module serializes")),
    );
    expected.insert(
        "loop_alpha_0.9".into(),
        json!({ "dim": w.dim(), "root": ComplexJson::from(alpha), "root_log": ComplexJson::from(branch.log(alpha)?) }),
    );
    for (stem, sys) in system_fixtures()? {
        files.insert(format!("{stem}.json"), pretty(&serde_json::to_value(SystemJson::from_system(&sys)).expect("system serializes")));
    }
    files.insert("branch_left.json".into(), pretty(&json!({ "left": -FIXTURE_HBAR })));
    files.insert("expected.json".into(), pretty(&Value::Object(expected)));
    report.check(Check::at_most("construction_relations", worst_relation, CONSTRUCTION_TOL));
    report.check(Check::at_most("highest_weight_eigenvalue", worst_eigen, EIGENVALUE_TOL));
    Ok(files)
}

/// Write the fixture set into `dir`.
pub fn write_all(dir: &Path, files: &BTreeMap<String, String>) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in files {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}
