//! Randomized invariants: algebraic laws of the scalar field, the
//! valuation, the q-series operators and the closed-form matrix entries.

use proptest::prelude::*;

use uslope::opmatrices::{entry, entry_valuation, Kind};
use uslope::qseries::{self, QSeries};
use uslope::scalar::{rat_frac, rat_int, Rat, Scalar};
use uslope::valuation::{factorial_val, nu_of_beta, val2, Val};

/// A rational with a denominator of bounded size.
fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-300i64..300, 1i64..40).prop_map(|(p, q)| rat_frac(p, q))
}

fn scalar_strategy() -> impl Strategy<Value = Scalar> {
    (rat_strategy(), rat_strategy()).prop_map(|(a, b)| Scalar::new(a, b))
}

/// A short q-series with small rational coefficients.
fn series_strategy(prec: usize) -> impl Strategy<Value = QSeries> {
    proptest::collection::vec((-40i64..40, 1i64..8), prec)
        .prop_map(|cs| QSeries::new(cs.into_iter().map(|(p, q)| Scalar::from_frac(p, q)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_multiplicative(x in scalar_strategy(), y in scalar_strategy()) {
        prop_assert_eq!(val2(&(&x * &y)), val2(&x) + val2(&y));
    }

    #[test]
    fn valuation_is_ultrametric(x in scalar_strategy(), y in scalar_strategy()) {
        let v = val2(&(&x + &y));
        let m = val2(&x).min(val2(&y));
        prop_assert!(v >= m);
        // Strict triangle equality when the two valuations differ.
        if val2(&x) != val2(&y) {
            prop_assert_eq!(v, m);
        }
    }

    #[test]
    fn field_inverse(x in scalar_strategy()) {
        if !x.is_zero() {
            let inv = x.inv().unwrap();
            prop_assert!((&x * &inv).is_one());
            prop_assert_eq!(val2(&inv), Val::Finite(Rat::from_integer(0.into())) + &(-(val2(&x).as_rat().unwrap().clone())));
        }
    }

    #[test]
    fn w_is_an_involution(x in series_strategy(24)) {
        prop_assert_eq!(qseries::hecke_w(&qseries::hecke_w(&x)), x);
    }

    #[test]
    fn u_is_v_twisted_multiplicative(f in series_strategy(24), g in series_strategy(12)) {
        // U(V(G) F) = G U(F).
        let lhs = qseries::hecke_u(&(&qseries::hecke_v(&g) * &f));
        let rhs = &g * &qseries::hecke_u(&f);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn uv_is_the_identity(x in series_strategy(24)) {
        prop_assert_eq!(qseries::hecke_u(&qseries::hecke_v(&x)), x);
    }

    #[test]
    fn h_pow_group_law(p in -11i64..12, q in -11i64..12) {
        // h^{s1} h^{s2} = h^{s1+s2} for small eighth-integer exponents
        // inside the admissible disc v(s) > -3.
        let (s1, s2) = (Scalar::from_frac(p, 4), Scalar::from_frac(q, 4));
        let prec = 16;
        let lhs = &qseries::h_pow(&s1, prec).unwrap() * &qseries::h_pow(&s2, prec).unwrap();
        let rhs = qseries::h_pow(&(&s1 + &s2), prec).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn nu_is_monotone_in_beta(p in -40i64..40, q in 1i64..12, step in 1i64..20) {
        let b1 = rat_frac(p, q);
        let b2 = &b1 + rat_frac(step, 8);
        prop_assert!(nu_of_beta(&Val::Finite(b1)) <= nu_of_beta(&Val::Finite(b2)));
    }

    #[test]
    fn entry_valuation_matches_entry(
        i in 0usize..14,
        j in 0usize..14,
        s in scalar_strategy(),
        twelve_r in 0i64..7,
    ) {
        // Valuation fast path agrees with the materialized entry.
        if val2(&s) > rat_int(-3) {
            let r = rat_frac(twelve_r, 12);
            for kind in [Kind::U, Kind::W, Kind::Uprime, Kind::Wprime] {
                let e = entry(kind, i, j, &s, &r).unwrap();
                prop_assert_eq!(entry_valuation(kind, i, j, &s, &r).unwrap(), e.valuation());
            }
        }
    }

    #[test]
    fn factorial_valuation_bounds(m in 1u64..6000) {
        let v = factorial_val(m);
        prop_assert!(v <= m - 1);
        prop_assert!(2 * v >= m - 1);
        // Legendre: v(m!) = m - s_2(m).
        prop_assert_eq!(v, m - m.count_ones() as u64);
    }
}
