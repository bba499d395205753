use monodromy_core::branch::{exp2pi, LogBranch};
use monodromy_core::functor::*;
use monodromy_core::repmodel::*;
use monodromy_core::sample::Sampler;
use monodromy_core::{c64, linalg, Error, Mat, C64, I};
use std::f64::consts::PI;

fn cfg(h: C64) -> FunctorConfig {
    FunctorConfig::new(&CartanData::sl2(), h).unwrap()
}

fn hbar() -> C64 {
    c64(0.3, 0.0)
}

fn v(a: f64) -> WeightModule {
    sl2_eval_module(2, c64(a, 0.0), hbar()).unwrap()
}

#[test]
fn highest_weight_loop_eigenvalue() {
    let f = apply_f(&v(0.1), &cfg(hbar())).unwrap();
    let q = (I * PI * hbar()).exp();
    let alpha = exp2pi(c64(0.1, 0.0));
    let mut s = Sampler::new(7);
    let top = f.module.lattice.index_of(&[1]).unwrap();
    for _ in 0..30 {
        let z = s.complex_avoiding((-3.0, 3.0), (-3.0, 3.0), &[alpha], 0.05);
        let want = (q * q * z - alpha) / (q * (z - alpha));
        let got = f.module.psi[&(0, top)].eval(z).unwrap()[(0, 0)];
        assert!((got - want).norm() < 1e-6, "{z}: {got} vs {want}");
    }
}

#[test]
fn zero_mode_bracket_matches_psi_limits() {
    let h = hbar();
    let q = (I * PI * h).exp();
    for module in [v(0.1), sl2_eval_module(3, c64(0.2, 0.0), h).unwrap(), direct_sum(&v(0.1), &v(0.25)).unwrap()] {
        let f = apply_f(&module, &cfg(h)).unwrap();
        for mu in 0..f.module.weights().len() {
            let b = f.bracket(0, mu, 0, 0);
            let p = &f.module.psi[&(0, mu)];
            let want = (p.value_at_infinity().unwrap() - p.value_at_zero().unwrap()) / (q - q.inv());
            assert!(linalg::max_diff(&b, &want) < 1e-6, "weight {mu}: {b} vs {want}");
        }
    }
}

#[test]
fn images_satisfy_loop_relations() {
    let h = hbar();
    let cases = [
        v(0.1),
        direct_sum(&v(0.1), &v(0.25)).unwrap(),
        sl2_eval_module(3, c64(0.2, 0.0), h).unwrap(),
        sl2_eval_module(4, c64(-0.1, 0.05), h).unwrap(),
    ];
    for m in &cases {
        let f = apply_f(m, &cfg(h)).unwrap();
        assert!(f.relations.max_residual() < 1e-6, "{:?}", f.relations);
        assert_eq!(f.relations.samples, 30);
    }
}

#[test]
fn psi_values_at_infinity() {
    let h = hbar();
    let q = (I * PI * h).exp();
    let m = direct_sum(&v(0.1), &sl2_eval_module(3, c64(0.3, 0.1), h).unwrap()).unwrap();
    let f = apply_f(&m, &cfg(h)).unwrap();
    for (k, w) in f.module.weights().iter().enumerate() {
        let inf = f.module.psi[&(0, k)].value_at_infinity().unwrap();
        let det = inf.determinant();
        let want = q.powi((w.values[0] * w.dim as i64) as i32);
        assert!((det - want).norm() < 1e-8);
    }
}

#[test]
fn psi_fields_commute() {
    let m = direct_sum(&v(0.1), &v(0.25)).unwrap();
    let f = apply_f(&m, &cfg(hbar())).unwrap();
    let mu = f.module.lattice.index_of(&[-1]).unwrap();
    let p = &f.module.psi[&(0, mu)];
    let (x, y) = (p.eval(c64(0.4, 1.3)).unwrap(), p.eval(c64(-2.0, 0.5)).unwrap());
    assert!(linalg::max_abs(&linalg::commutator(&x, &y)) < 1e-8);
}

#[test]
fn congruent_input_is_rejected() {
    let m = direct_sum(&v(0.1), &v(1.1)).unwrap();
    assert!(matches!(apply_f(&m, &cfg(hbar())), Err(Error::NonCongruentViolation(_))));
}

#[test]
fn yangian_round_trips() {
    let h = hbar();
    for m in [v(0.1), direct_sum(&v(0.1), &v(0.25)).unwrap(), sl2_eval_module(3, c64(0.05, 0.0), h).unwrap()] {
        let r = roundtrip_report(&m, &cfg(h)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.samples, 30);
    }
}

#[test]
fn round_trip_with_complex_hbar() {
    let h = c64(0.3, 0.12);
    let m = sl2_eval_module(2, c64(0.2, 0.05), h).unwrap();
    let r = roundtrip_report(&m, &cfg(h)).unwrap();
    assert!(r.deviation < 1e-6, "{r:?}");
}

#[test]
fn outside_the_strip_is_rejected() {
    let r = roundtrip_report(&v(0.9), &cfg(hbar()));
    assert!(matches!(r, Err(Error::BranchOutOfDomain(_))), "{r:?}");
}

#[test]
fn planted_loop_module_recovers_its_drinfeld_root() {
    let h = hbar();
    let q = (I * PI * h).exp();
    let alpha = C64::from_polar(1.0, 0.9);
    let w = sl2_eval_loop_module(alpha, q, Some(h)).unwrap();
    let g = apply_g(&w, &cfg(h)).unwrap();
    let a = LogBranch::standard(h).log(alpha).unwrap();
    let top = g.module.lattice.index_of(&[1]).unwrap();
    let poles = g.module.xi[&(0, top)].pole_set();
    assert_eq!(poles.len(), 1);
    assert!((poles[0] - a).norm() < 1e-8, "{poles:?} vs {a}");
    let oracle = sl2_eval_module(2, a, h).unwrap();
    assert!(compare_yangian(&oracle, &g.module, 30, 3).unwrap().deviation < 1e-6);
    let r = roundtrip_report_loop(&w, &cfg(h)).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn loop_round_trip_of_a_sum() {
    let h = hbar();
    let q = (I * PI * h).exp();
    let a = sl2_eval_loop_module(C64::from_polar(1.0, 0.6), q, Some(h)).unwrap();
    let b = sl2_eval_loop_module(C64::from_polar(0.8, 2.0), q, Some(h)).unwrap();
    let r = roundtrip_report_loop(&direct_sum_loop(&a, &b).unwrap(), &cfg(h)).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn shift_compatibility() {
    let h = hbar();
    let m = v(0.1);
    let exact = shift_compat_report(&m, c64(0.0, 0.0), &cfg(h)).unwrap();
    assert!(exact.deviation < 1e-12, "{exact:?}");
    for a in [c64(0.05, 0.0), c64(0.5, 0.2)] {
        let r = shift_compat_report(&m, a, &cfg(h)).unwrap();
        assert!(r.passed(), "{a}: {r:?}");
    }
}

fn all_modes(t: &ModeTable) -> Vec<&Mat> {
    t.plus.values().chain(t.minus.values()).flatten().collect()
}

#[test]
fn modes_do_not_depend_on_the_contour() {
    let h = hbar();
    let m = direct_sum(&v(0.1), &v(0.25)).unwrap();
    let base = apply_f(&m, &cfg(h)).unwrap();
    let small = apply_f(&m, &FunctorConfig { radius_scale: 0.5, ..cfg(h) }).unwrap();
    let fine = apply_f(&m, &FunctorConfig { nodes: 512, ..cfg(h) }).unwrap();
    for other in [&small, &fine] {
        for (x, y) in all_modes(&base.modes).into_iter().zip(all_modes(&other.modes)) {
            assert!(linalg::max_diff(x, y) < 1e-8);
        }
    }
}

#[test]
fn rebalancing_the_constants_rescales_the_raising_fields() {
    let h = hbar();
    let t = c64(1.7, -0.4);
    let m = sl2_eval_module(3, c64(0.2, 0.0), h).unwrap();
    let base = apply_f(&m, &cfg(h)).unwrap();
    let moved = apply_f(&m, &cfg(h).rebalanced(t)).unwrap();
    for (k, x) in &base.module.xp {
        let y = &moved.module.xp[k];
        let z = c64(0.3, 2.0);
        assert!(linalg::max_diff(&(x.eval(z).unwrap() * t), &y.eval(z).unwrap()) < 1e-8);
    }
    for (k, x) in &base.module.xm {
        let z = c64(-1.1, 0.4);
        assert!(linalg::max_diff(&(x.eval(z).unwrap() / t), &moved.module.xm[k].eval(z).unwrap()) < 1e-8);
    }
    for mu in 0..3 {
        assert!(linalg::max_diff(&base.bracket(0, mu, 1, -1), &moved.bracket(0, mu, 1, -1)) < 1e-8);
    }
}
