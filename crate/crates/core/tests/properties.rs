use fracpow::domain::{make_window, BetaIndex, PowerFunction};
use fracpow::hypergeom::{euler_transform, hyp2f1, hyp_form, Hyp2F1Params, DEFAULT_TOL};
use fracpow::oracle::{quad_rlfi_with_error, QuadratureConfig};
use fracpow::series::{partial_sums, remainder_bound_order, series_for, OperatorKind, SeriesConfig};
use fracpow::special_fn::{gamma, gamma_ratio, pochhammer_asc, pochhammer_desc, ExtendedReal};
use proptest::prelude::*;

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

fn off_integer(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_filter("away from integers", |z: &f64| (z - z.round()).abs() > 1e-3)
}

fn beta_index() -> impl Strategy<Value = BetaIndex> {
    prop_oneof![
        (-4i64..=5).prop_map(BetaIndex::integer),
        ((-7i64..=7), (2i64..=5)).prop_map(|(p, q)| BetaIndex::rational(p, q).unwrap()),
        (-3.5f64..3.5).prop_map(|x| BetaIndex::real(x).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gamma_recurrence(z in off_integer(-20.0, 20.0)) {
        let (ExtendedReal::Finite(g), ExtendedReal::Finite(g1)) = (gamma(z), gamma(z + 1.0)) else {
            panic!("pole off the integers");
        };
        prop_assert!(rel(g1, z * g) < 1e-13);
    }

    #[test]
    fn gamma_reflection(z in off_integer(-10.0, 10.0), n in 0u32..8) {
        // Γ(z−n) = (−1)^n π / (sin(πz) Γ(n+1−z))
        let lhs = gamma(z - n as f64).to_f64();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = sign * std::f64::consts::PI / ((std::f64::consts::PI * z).sin() * gamma(n as f64 + 1.0 - z).to_f64());
        prop_assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn pochhammer_bridges(z in off_integer(-10.0, 10.0), k in 0u64..15) {
        prop_assert!(rel(pochhammer_asc(z, k), gamma_ratio(z + k as f64, z).unwrap()) < 1e-12);
        prop_assert!(rel(pochhammer_desc(z, k), gamma_ratio(z + 1.0, z + 1.0 - k as f64).unwrap()) < 1e-12);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(rel(pochhammer_asc(-z, k), sign * pochhammer_desc(z, k)) < 1e-14);
        prop_assert!(rel(pochhammer_desc(-z, k), sign * pochhammer_asc(z, k)) < 1e-14);
    }

    #[test]
    fn binomial_power_identity(alpha in 0.01f64..0.99, c in 0.05f64..6.0, z in -0.9f64..0.9) {
        let v = hyp2f1(Hyp2F1Params::new(alpha, c, c, z), 1e-16).unwrap();
        prop_assert!(rel(v, (1.0 - z).powf(-alpha)) < 1e-10);
    }

    #[test]
    fn euler_self_consistency(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.5f64..3.0, z in -0.8f64..0.8) {
        let p = Hyp2F1Params::new(a, b, c, z);
        let (q, pre) = euler_transform(p);
        let direct = hyp2f1(p, 1e-16).unwrap();
        prop_assert!((pre * hyp2f1(q, 1e-16).unwrap() - direct).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn hyp_matches_series(
        beta in beta_index(),
        alpha in 0.05f64..0.95,
        d in -1.0f64..1.0,
        eps in 0.3f64..2.0,
        below in any::<bool>(),
        frac in 0.05f64..0.95,
        derivative in any::<bool>(),
    ) {
        let pf = PowerFunction::new(d, beta);
        let a = if below { d - eps } else { d + eps };
        let Ok(win) = make_window(a, &pf) else { return Ok(()) };
        let t = win.a + frac * (win.t_sup - win.a);
        let kind = if derivative { OperatorKind::Derivative } else { OperatorKind::Integral };
        let cfg = SeriesConfig { tol: 1e-13, max_terms: 10_000 };
        let s = series_for(kind, &pf, &win, alpha, t, &cfg).unwrap().value;
        let h = hyp_form(kind, &pf, &win, alpha, t, DEFAULT_TOL).unwrap().value;
        prop_assert!(rel(h, s) < 1e-8, "series {s} hyp {h}");
    }

    #[test]
    fn remainder_bounds_the_tail(
        beta in beta_index(),
        alpha in 0.05f64..0.95,
        eps in 0.3f64..2.0,
        below in any::<bool>(),
        frac in 0.05f64..0.9,
        p in 1usize..30,
        derivative in any::<bool>(),
    ) {
        let pf = PowerFunction::new(0.0, beta);
        let a = if below { -eps } else { eps };
        let Ok(win) = make_window(a, &pf) else { return Ok(()) };
        let t = win.a + frac * (win.t_sup - win.a);
        let kind = if derivative { OperatorKind::Derivative } else { OperatorKind::Integral };
        let cfg = SeriesConfig { tol: 1e-14, max_terms: 10_000 };
        let full = series_for(kind, &pf, &win, alpha, t, &cfg).unwrap().value;
        let sums = partial_sums(kind, &pf, &win, alpha, t, p).unwrap();
        let bound = remainder_bound_order(&pf, &win, kind.order(alpha), t, p);
        let err = (full - sums[p - 1]).abs();
        prop_assert!(err <= bound + 1e-12 * full.abs().max(1.0), "err {err} bound {bound}");
    }

    #[test]
    fn series_matches_quadrature(
        beta in beta_index(),
        alpha in 0.05f64..0.95,
        eps in 0.3f64..2.0,
        below in any::<bool>(),
        frac in 0.05f64..0.95,
    ) {
        let pf = PowerFunction::new(0.5, beta);
        let a = if below { 0.5 - eps } else { 0.5 + eps };
        let Ok(win) = make_window(a, &pf) else { return Ok(()) };
        let t = win.a + frac * (win.t_sup - win.a);
        let s = series_for(OperatorKind::Integral, &pf, &win, alpha, t, &SeriesConfig::default()).unwrap().value;
        let o = quad_rlfi_with_error(&pf, a, alpha, t, &QuadratureConfig::tight()).unwrap().value;
        prop_assert!((s - o).abs() <= 1e-8 * s.abs().max(1.0));
    }
}
