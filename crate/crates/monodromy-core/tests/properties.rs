use monodromy_core::branch::exp2pi;
use monodromy_core::diffeq::{connection_matrix, fundamental_solutions, inverse_abelian, DifferenceSystem};
use monodromy_core::functor::*;
use monodromy_core::ratmat::{build_contour, quad_contour, RationalMatrix, RationalScalar};
use monodromy_core::repmodel::*;
use monodromy_core::specfun::{gamma, gamma_ratio};
use monodromy_core::{c64, linalg, Mat, C64, I};
use proptest::prelude::*;
use std::f64::consts::PI;

fn complex(re: core::ops::Range<f64>, im: core::ops::Range<f64>) -> impl Strategy<Value = C64> {
    (re, im).prop_map(|(a, b)| c64(a, b))
}

fn dist_to_integers(u: C64) -> f64 {
    (u - c64(u.re.round(), 0.0)).norm()
}

fn hbar() -> C64 {
    c64(0.3, 0.0)
}

fn cfg() -> FunctorConfig {
    FunctorConfig::new(&CartanData::sl2(), hbar()).unwrap()
}

fn scalar_strategy() -> impl Strategy<Value = RationalScalar> {
    (
        complex(-2.0..2.0, -2.0..2.0),
        prop::collection::vec(complex(-2.0..2.0, -2.0..2.0), 0..3),
        prop::collection::vec(complex(-2.0..2.0, -2.0..2.0), 0..3),
    )
        .prop_filter("nonzero scale", |(c, _, _)| c.norm() > 0.1)
        .prop_map(|(c, z, p)| RationalScalar::new(c, z, p))
}

fn far_from_poles(u: C64, fs: &[&RationalScalar]) -> bool {
    fs.iter().all(|f| f.pole_distance(u) > 0.2)
}

fn rel_close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

proptest! {
    #[test]
    fn gamma_reflection(u in complex(-5.0..5.0, -5.0..5.0)) {
        prop_assume!(dist_to_integers(u) > 0.05);
        let lhs = gamma(u).unwrap() * gamma(C64::new(1.0, 0.0) - u).unwrap() * (u * PI).sin() / PI;
        prop_assert!((lhs - 1.0).norm() < 1e-12, "{u}: {lhs}");
    }

    #[test]
    fn gamma_recurrence(u in complex(-5.0..5.0, -5.0..5.0)) {
        prop_assume!(dist_to_integers(u) > 0.05);
        let g = gamma(u).unwrap();
        let g1 = gamma(u + 1.0).unwrap();
        prop_assert!(rel_close(g1, u * g, 1e-12), "{u}: {g1} vs {}", u * g);
    }

    #[test]
    fn gamma_ratio_reciprocity(u in complex(-3.0..3.0, 0.5..3.0), a in complex(-1.0..1.0, -0.4..0.4), b in complex(-1.0..1.0, -0.4..0.4)) {
        let r = gamma_ratio(u, a, b).unwrap();
        let s = gamma_ratio(u, b, a).unwrap();
        prop_assert!((r * s - 1.0).norm() < 1e-10, "{r} * {s}");
    }

    #[test]
    fn scalar_arithmetic_matches_pointwise(f in scalar_strategy(), g in scalar_strategy(), u in complex(-3.0..3.0, -3.0..3.0), a in complex(-1.0..1.0, -1.0..1.0)) {
        prop_assume!(far_from_poles(u, &[&f, &g]) && f.pole_distance(u - a) > 0.2);
        let (fu, gu) = (f.eval(u).unwrap(), g.eval(u).unwrap());
        prop_assert!(rel_close(f.mul(&g).eval(u).unwrap(), fu * gu, 1e-9));
        prop_assert!(rel_close(f.add(&g).eval(u).unwrap(), fu + gu, 1e-8));
        prop_assert!(rel_close(f.shift(a).eval(u).unwrap(), f.eval(u - a).unwrap(), 1e-9));
    }

    #[test]
    fn analytic_integrand_has_zero_contour_integral(
        poles in prop::collection::vec(complex(-2.0..2.0, -2.0..2.0), 1..4),
        k in 0i32..4,
    ) {
        let curve = build_contour(&poles, &[], 1.0, 256).unwrap();
        let v = quad_contour(|u| Ok(Mat::from_element(1, 1, (u * 0.5).exp() * u.powi(k))), &curve, 1, 1).unwrap();
        prop_assert!(v[(0, 0)].norm() < 1e-10, "{}", v[(0, 0)]);
    }

    #[test]
    fn planted_ladders_factor_back(
        roots in prop::collection::vec((-1.0f64..1.0, prop::sample::select(vec![-2i32, -1, 1, 2])), 1..4),
    ) {
        let h = hbar();
        let planted: Vec<(C64, i32)> = roots.iter().enumerate().map(|(j, &(re, n))| (c64(re, 1.5 * j as f64), n)).collect();
        let mut zeros = Vec::new();
        let mut poles = Vec::new();
        for &(a, n) in &planted {
            for _ in 0..n.unsigned_abs() {
                if n > 0 {
                    zeros.push(a - h);
                    poles.push(a);
                } else {
                    zeros.push(a);
                    poles.push(a - h);
                }
            }
        }
        let e = RationalScalar::new(c64(1.0, 0.0), zeros, poles);
        let mut got = ladder_factor(&e, h, false).unwrap();
        got.sort_by(|x, y| x.0.im.partial_cmp(&y.0.im).unwrap());
        prop_assert_eq!(got.len(), planted.len());
        for ((loc, n), (want_loc, want_n)) in got.iter().zip(&planted) {
            prop_assert!((loc - want_loc).norm() < 1e-12);
            prop_assert_eq!(n, want_n);
        }
    }

    #[test]
    fn direct_sum_character_is_the_union(a in -1.0f64..1.0, b in -1.0f64..1.0, n in 2usize..4) {
        let h = hbar();
        let v = sl2_eval_module(n, c64(a, 0.0), h).unwrap();
        let w = sl2_eval_module(2, c64(b, 0.7), h).unwrap();
        let sum = qchar_yangian(&direct_sum(&v, &w).unwrap()).unwrap();
        let mut union = qchar_yangian(&v).unwrap();
        union.terms.extend(qchar_yangian(&w).unwrap().terms);
        prop_assert_eq!(sum.total_dim(), n + 2);
        let d = sum.distance(&union, 1e-9);
        prop_assert!(d.is_some_and(|d| d < 1e-9), "{d:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn shift_of_evaluation_module(n in 2usize..4, a in complex(-1.0..1.0, -1.0..1.0), b in complex(-1.0..1.0, -1.0..1.0)) {
        let h = hbar();
        let moved = shift_module(&sl2_eval_module(n, a, h).unwrap(), b).unwrap();
        let direct = sl2_eval_module(n, a + b, h).unwrap();
        let c = compare_yangian(&moved, &direct, 10, 5).unwrap();
        prop_assert!(c.deviation < 1e-10, "{}: {}", c.worst, c.deviation);
    }

    #[test]
    fn scalar_connection_closed_form(a in complex(-0.4..0.9, -0.3..0.3), b in complex(-0.4..0.9, -0.3..0.3)) {
        prop_assume!((a - b).norm() > 0.05);
        let sys = DifferenceSystem::new(RationalMatrix::scalar(RationalScalar::ratio(a, b))).unwrap();
        let pair = fundamental_solutions(&sys, 64, 12).unwrap();
        let s = connection_matrix(&pair).unwrap();
        let (alpha, beta) = (exp2pi(a), exp2pi(b));
        for k in 0..6 {
            let z = C64::from_polar(0.4 + 0.5 * k as f64, 1.3 * k as f64 + 0.2);
            prop_assume!((z - beta).norm() > 0.05);
            let want = (I * PI * (b - a)).exp() * (z - alpha) / (z - beta);
            let got = s.s.eval(z).unwrap()[(0, 0)];
            prop_assert!(rel_close(got, want, 1e-8), "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn forward_then_inverse_recovers_the_system(a1 in complex(-0.2..0.6, -0.2..0.2), b1 in complex(-0.2..0.6, -0.2..0.2), a2 in complex(-0.2..0.6, -0.2..0.2), b2 in complex(-0.2..0.6, -0.2..0.2)) {
        prop_assume!((a1 - b1).norm() > 0.05 && (a2 - b2).norm() > 0.05);
        let a = RationalMatrix::diagonal(vec![RationalScalar::ratio(a1, b1), RationalScalar::ratio(a2, b2)]);
        let sys = DifferenceSystem::new(a).unwrap();
        let pair = fundamental_solutions(&sys, 64, 12).unwrap();
        let conn = connection_matrix(&pair).unwrap();
        let branch = monodromy_core::branch::LogBranch::strip(hbar(), -0.3);
        let inv = inverse_abelian(&conn.s, &sys.a0, &branch).unwrap();
        for u in [c64(1.7, 0.3), c64(-1.2, 1.1)] {
            let d = linalg::max_diff(&inv.system.eval(u).unwrap(), &sys.eval(u).unwrap());
            prop_assert!(d < 1e-7, "{u}: {d}");
        }
    }

    #[test]
    fn psi_fields_commute_after_f(a in 0.0f64..0.4, b in 0.0f64..0.4, z in complex(-2.0..2.0, -2.0..2.0)) {
        prop_assume!((a - b).abs() > 0.05);
        let m = direct_sum(&sl2_eval_module(2, c64(a, 0.0), hbar()).unwrap(), &sl2_eval_module(2, c64(b, 0.0), hbar()).unwrap()).unwrap();
        let f = apply_f(&m, &cfg()).unwrap();
        let w = z + c64(0.3, 0.7);
        let (Ok(x), Ok(y)) = (f.module.psi_full(0, z), f.module.psi_full(0, w)) else {
            return Err(TestCaseError::reject("sample on a pole"));
        };
        let c = linalg::commutator(&x, &y);
        prop_assert!(linalg::max_abs(&c) < 1e-8 * linalg::max_abs(&x).max(1.0) * linalg::max_abs(&y).max(1.0));
    }

    #[test]
    fn f_is_invariant_under_rebalanced_constants(a in 0.0f64..0.4, t in complex(0.5..2.0, -0.5..0.5)) {
        let m = sl2_eval_module(2, c64(a, 0.0), hbar()).unwrap();
        let base = apply_f(&m, &cfg()).unwrap();
        let moved = apply_f(&m, &cfg().rebalanced(t)).unwrap();
        let z = c64(0.3, 2.0);
        for (k, p) in &base.module.psi {
            prop_assert!(linalg::max_diff(&p.eval(z).unwrap(), &moved.module.psi[k].eval(z).unwrap()) < 1e-8);
        }
        for mu in 0..2 {
            prop_assert!(linalg::max_diff(&base.bracket(0, mu, 1, -1), &moved.bracket(0, mu, 1, -1)) < 1e-8);
        }
    }

    #[test]
    fn g_inverts_f(a in 0.0f64..0.4) {
        let m = sl2_eval_module(2, c64(a, 0.0), hbar()).unwrap();
        let r = roundtrip_report(&m, &cfg()).unwrap();
        prop_assert!(r.passed(), "{}: {}", r.worst, r.deviation);
    }
}
