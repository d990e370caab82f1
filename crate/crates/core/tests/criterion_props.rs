use gdblow_core::criterion::*;
use gdblow_core::dsl::{presets, Domain, Profile};
use gdblow_core::gas::GasParams;
use gdblow_core::riemann::KValue;
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec {
        nodes: 101,
        refine: false,
        ..GridSpec::default()
    }
}

fn velocity() -> impl Strategy<Value = String> {
    (-2.0f64..2.0, 0.2f64..3.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(a, w, c, s)| format!("{a}*tanh({w}*x + {c}) + {s}*x"))
}

fn density() -> impl Strategy<Value = String> {
    (0.5f64..2.0, -0.4f64..0.4, -1.5f64..1.5, 0.3f64..2.0)
        .prop_map(|(r, a, m, s)| format!("{r} + {a}*exp(-(x - {m})^2/{s})"))
}

fn pressure() -> impl Strategy<Value = String> {
    (0.5f64..2.0, -1.0f64..1.0, 0.1f64..2.0).prop_map(|(p, a, w)| format!("{p}*exp({a}*sin({w}*x))"))
}

fn indicators() -> impl Strategy<Value = Indicators> {
    (-3.0f64..3.0, -3.0f64..3.0, -2.0f64..2.0, 1.0f64..3.0).prop_map(|(r1, r2, b, g)| Indicators {
        r1,
        r2,
        k: KValue::Finite(b + 0.5 * (g - 1.0)),
        b: Some(b),
        gamma: g,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn isentropic_pressure_matches_corollary(
        v0 in velocity(), rho0 in density(), g in 1.05f64..3.0,
    ) {
        let d = Domain::new(-2.0, 2.0).unwrap();
        let p0 = presets::isentropic_pressure(&rho0, g);
        let pr = Profile::parse(&v0, &rho0, &p0, d).unwrap();
        let gp = GasParams::new(g).unwrap();
        let full = classify_profile(&pr, &gp, &grid()).unwrap();
        let iso = classify_isentropic(&pr, &gp, &grid()).unwrap();
        for (a, b) in full.points.iter().zip(&iso.points) {
            prop_assert_eq!(a.safe, b.safe, "x = {}", a.x);
        }
    }

    #[test]
    fn velocity_shift_is_invisible(
        v0 in velocity(), rho0 in density(), p0 in pressure(), c in -5.0f64..5.0,
    ) {
        let d = Domain::new(-2.0, 2.0).unwrap();
        let gp = GasParams::new(1.4).unwrap();
        let a = classify_profile(&Profile::parse(&v0, &rho0, &p0, d).unwrap(), &gp, &grid()).unwrap();
        let shifted = format!("{v0} + {c}");
        let b = classify_profile(&Profile::parse(&shifted, &rho0, &p0, d).unwrap(), &gp, &grid()).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert_eq!(p.sets, q.sets);
            prop_assert!((p.indicators.r1 - q.indicators.r1).abs() <= 1e-12);
        }
    }

    #[test]
    fn larger_r1_never_hurts(ind in indicators(), dr in 0.0f64..3.0) {
        let before = classify_point(0.0, &ind, DEFAULT_INEQ_TOL);
        let after = classify_point(0.0, &Indicators { r1: ind.r1 + dr, ..ind }, DEFAULT_INEQ_TOL);
        prop_assert!(!before.safe || after.safe);
    }

    #[test]
    fn flat_pressure_depends_on_sign_only(r1 in -5.0f64..5.0, g in 1.0f64..3.0) {
        let ind = Indicators { r1, r2: 0.0, k: KValue::Infinite, b: None, gamma: g };
        let v = classify_point(0.0, &ind, DEFAULT_INEQ_TOL);
        prop_assert_eq!(v.safe, r1 >= 0.0);
        prop_assert_eq!(v.sets.r2_zero_r1_nonneg, v.safe);
    }

    #[test]
    fn membership_flags_imply_their_premises(ind in indicators()) {
        let v = classify_point(0.0, &ind, DEFAULT_INEQ_TOL);
        prop_assert_eq!(v.safe, v.sets.any());
        if v.sets.b_pos_r2_nonzero {
            prop_assert!(ind.b.unwrap() > 0.0 && ind.r2 != 0.0);
        }
        if v.sets.r2_zero_r1_nonneg {
            prop_assert!(ind.r2 == 0.0 && ind.r1 >= 0.0);
        }
    }
}
