use nalgebra::DMatrix;
use proptest::prelude::*;

use regrisk::benchmarks::{ide, ide_at_k, rss, BinomialRisk};
use regrisk::data::{m2a_by, moment_aggregates};
use regrisk::eta::{build_eta_table, eta_normal, eta_t, eta_t_exact, EtaIndex};
use regrisk::mc::pointwise_divergence;
use regrisk::quadrature::QuadOptions;
use regrisk::risk::{expand, to_aggregated, validity_n_min, Aggregates, Homogeneous, MomentSummary, XPreset};
use regrisk::scalar::{parse_rational, rational_to_f64, ratio, Rational};
use regrisk::{ErrorModel, Execution, RiskExpansion};

fn index() -> impl Strategy<Value = EtaIndex> {
    (0u8..=1, 0u8..=2, 0u8..=4, 0u8..=4).prop_map(|(i, j, k, l)| EtaIndex::new(i, j, k, l))
}

fn nonneg_rational() -> impl Strategy<Value = Rational> {
    (0i64..=400, 1i64..=12).prop_map(|(n, d)| ratio(n, d))
}

fn symmetric_tables() -> Vec<regrisk::EtaTable> {
    vec![
        build_eta_table(&ErrorModel::normal(), 1e-10).unwrap(),
        build_eta_table(&ErrorModel::student_t_exact(ratio(5, 1)).unwrap(), 1e-10).unwrap(),
        build_eta_table(&ErrorModel::student_t_exact(ratio(21, 5)).unwrap(), 1e-10).unwrap(),
    ]
}

fn float_expansion(p: u32, q: [f64; 3]) -> RiskExpansion {
    let main = (p as f64 + 2.0) / 2.0;
    let q_ref = q[0] - q[1] + q[2];
    RiskExpansion {
        p,
        main,
        q,
        q_exact: None,
        coeff_error: 0.0,
        validity_n_min: validity_n_min(main, q_ref, p),
        q_full_dimension: q,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_entries_vanish_on_odd_parity(ix in index()) {
        let v = eta_normal(ix);
        if ix.i == 1 || (ix.k + ix.l) % 2 == 1 {
            prop_assert_eq!(v, ratio(0, 1));
        }
    }

    #[test]
    fn t_exact_and_float_paths_agree(ix in index(), num in 5i64..40, den in 1i64..4) {
        let nu = ratio(num, den);
        let nf = rational_to_f64(&nu);
        match (eta_t_exact(ix, &nu), eta_t(ix, nf)) {
            (Ok(a), Ok(b)) => {
                let a = rational_to_f64(&a);
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
                if (ix.i + ix.k + ix.l) % 2 == 1 {
                    prop_assert_eq!(b, 0.0);
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "paths disagree on convergence: {:?} {:?}", a, b),
        }
    }

    #[test]
    fn t_tends_to_normal(ix in index()) {
        let t = eta_t(ix, 1e7).unwrap();
        let n = rational_to_f64(&eta_normal(ix));
        prop_assert!((t - n).abs() < 1e-4 * n.abs().max(1.0), "{} vs {}", t, n);
    }

    #[test]
    fn homogeneous_reduction_is_linear_in_fourth_moments(
        p in 1u32..12, m4 in nonneg_rational(), m22 in nonneg_rational(), s in 1i64..5
    ) {
        let a = to_aggregated(&MomentSummary::homogeneous(p, Homogeneous::even(m4.clone(), m22.clone())));
        let b = to_aggregated(&MomentSummary::homogeneous(p, Homogeneous::even(&m4 * ratio(s, 1), &m22 * ratio(s, 1))));
        prop_assert_eq!(&a.m1 * ratio(s, 1), b.m1);
        prop_assert_eq!(a.m2a, ratio(0, 1));
        prop_assert_eq!(a.m2b, ratio(0, 1));
    }

    #[test]
    fn symmetric_errors_ignore_third_moments(
        p in 1u32..15, m2a in nonneg_rational(), m2b in nonneg_rational(), m1 in nonneg_rational()
    ) {
        for t in symmetric_tables() {
            let base = Aggregates { m2a: ratio(0, 1), m2b: ratio(0, 1), m1: m1.clone() };
            let moved = Aggregates { m2a: m2a.clone(), m2b: m2b.clone(), m1: m1.clone() };
            let e0 = expand(&t, &MomentSummary::aggregated(p, base)).unwrap();
            let e1 = expand(&t, &MomentSummary::aggregated(p, moved)).unwrap();
            prop_assert_eq!(e0.q_exact, e1.q_exact);
        }
    }

    #[test]
    fn binomial_risk_is_symmetric_in_m(m in 0.01f64..0.99, alpha in -5.0f64..5.0) {
        let a = BinomialRisk::new(m).unwrap();
        let b = BinomialRisk::new(1.0 - m).unwrap();
        prop_assert!((a.q(alpha) - b.q(alpha)).abs() <= 1e-9 * a.q(alpha).abs().max(1.0));
    }

    #[test]
    fn ide_does_not_depend_on_k(
        p in 1u32..30, qa in -50.0f64..50.0, qb in -50.0f64..50.0, qc in -50.0f64..50.0,
        alpha in -4.0f64..4.0, k in 1u64..500
    ) {
        let e = float_expansion(p, [qa, qb, qc]);
        match (ide(&e, alpha).value(), ide_at_k(&e, alpha, k).value()) {
            (None, None) => {}
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-7, "{} vs {}", a, b),
            (a, b) => {
                // Only acceptable right at the boundary of the real-root region.
                let m = 24.0 * e.q_at(alpha) / ((p as f64 + 2.0).powi(2));
                prop_assert!(m.is_finite(), "{:?} vs {:?}", a, b);
            }
        }
    }

    #[test]
    fn validity_region_is_an_upper_ray(main in 0.5f64..30.0, q in -5000.0f64..5000.0, p in 1u32..50) {
        let n0 = validity_n_min(main, q, p);
        prop_assert!(n0 >= p as u64 + 3);
        for n in [n0, n0 + 1, n0 + 7, 2 * n0, 10 * n0] {
            let nf = n as f64;
            prop_assert!(main / nf + q / (nf * nf) > 0.0);
            let next = nf + 1.0;
            prop_assert!(main / next + q / (next * next) < main / nf + q / (nf * nf));
        }
    }

    #[test]
    fn rss_lands_in_the_validity_region(
        p in 1u32..40, qa in -50.0f64..50.0, qb in -50.0f64..50.0, qc in -300.0f64..300.0
    ) {
        let e = float_expansion(p, [qa, qb, qc]);
        if let Ok(s) = rss(&e, -1.0) {
            prop_assert!(s.n >= e.validity_n_min);
            prop_assert_eq!(s.k % 10, 0);
            let coin = BinomialRisk::new(0.5).unwrap().ed(-1.0, s.k as f64);
            prop_assert!((e.ed(-1.0, s.n_real) - coin).abs() <= 1e-9 * coin);
        }
    }

    #[test]
    fn rational_text_round_trip(n in -100000i64..100000, d in 1i64..5000) {
        let r = ratio(n, d);
        prop_assert_eq!(parse_rational(&r.to_string()).unwrap(), r.clone());
        let dec = format!("{}", n as f64 / 8.0);
        prop_assert_eq!(parse_rational(&dec).unwrap(), ratio(n, 8));
    }

    #[test]
    fn aggregates_are_rotation_invariant(
        seed in proptest::collection::vec(-3.0f64..3.0, 24), angle in 0.0f64..6.3
    ) {
        let x = DMatrix::from_row_slice(8, 3, &seed);
        let (c, s) = (angle.cos(), angle.sin());
        let rot = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let y = &x * rot;
        let a = moment_aggregates(&x, Execution::Sequential);
        let b = moment_aggregates(&y, Execution::Parallel);
        for (u, v) in [(a.m1, b.m1), (a.m2a, b.m2a), (a.m2b, b.m2b)] {
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0), "{} vs {}", u, v);
        }
        let tensor = m2a_by(&x, false, Execution::Sequential);
        let gram = m2a_by(&x, true, Execution::Parallel);
        prop_assert!((tensor - gram).abs() <= 1e-9 * tensor.abs().max(1.0));
    }

    #[test]
    fn divergence_is_nonnegative_and_dual(
        delta in -2.0f64..2.0, s1 in 0.5f64..2.0, s2 in 0.5f64..2.0, alpha in -2.5f64..2.5
    ) {
        let q = QuadOptions::default();
        // Gaussian weight f1^a f2^(1-a) is integrable iff c > 0; near c = 0
        // the integrand is too wide for the rule, and that is reported.
        let a = (1.0 - alpha) / 2.0;
        let c = a * (s2 / s1).powi(2) + 1.0 - a;
        for (gauss, model) in [(true, ErrorModel::normal()), (false, ErrorModel::student_t(5.0).unwrap())] {
            let d = pointwise_divergence(&model, delta, s1, s2, alpha, &q);
            let z = pointwise_divergence(&model, -delta, s2, s1, -alpha, &q);
            if gauss && c <= 0.05 {
                prop_assert!(d.as_ref().map_or(true, |v| c > 0.0 || v.is_infinite()), "c = {}, {:?}", c, d);
                continue;
            }
            let (d, z) = (d.unwrap(), z.unwrap());
            prop_assert!(d.is_finite() && d >= 0.0, "{}", d);
            // swapping the densities flips the index
            prop_assert!((d - z).abs() <= 1e-8 * d.max(1e-3), "{} vs {}", d, z);
            let same = pointwise_divergence(&model, 0.0, s1, s1, alpha, &q).unwrap();
            prop_assert!(same.abs() < 1e-12);
        }
    }

    #[test]
    fn pareto_aggregates_match_the_homogeneous_route(b_num in 42i64..200, p in 1u32..20) {
        let preset = XPreset::Pareto { b: ratio(b_num, 10) };
        let exact = preset.summary(p).unwrap().to_aggregated().to_f64();
        let route = to_aggregated(&MomentSummary::homogeneous(p, preset.homogeneous().unwrap())).to_f64();
        for (u, v) in [(exact.m1, route.m1), (exact.m2a, route.m2a), (exact.m2b, route.m2b)] {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }
}
