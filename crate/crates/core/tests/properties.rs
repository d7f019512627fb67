//! Cross-module properties: sweep configs, profile invariants, Garsia
//! bounds and the Leibov test functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use oscillab::criteria::{Kind, Sweep, SweepParams};
use oscillab::hardy::{garsia_gamma, h2_norm, QuadConfig};
use oscillab::lab::{Outputs, SweepConfig};
use oscillab::leibov::TestSequence;
use oscillab::symbol::validate_self_map;
use oscillab::{DiscPoint, Symbol, C};
use proptest::prelude::*;

fn interior() -> impl Strategy<Value = C> {
    (0.0..0.999f64, 0.0..(2.0 * PI)).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// Polynomials with coefficient moduli summing to at most one.
fn poly_map() -> impl Strategy<Value = Symbol> {
    prop::collection::vec(interior(), 1..5).prop_map(|cs| {
        let total: f64 = cs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
        Symbol::poly(cs.into_iter().map(|c| c / total).collect())
    })
}

fn kinds() -> impl Strategy<Value = Vec<Kind>> {
    prop::sample::subsequence(Kind::all(), 1..6)
}

fn config() -> impl Strategy<Value = SweepConfig> {
    (
        poly_map(),
        kinds(),
        1usize..=16,
        1usize..=128,
        0.01..0.99f64,
        0.01..0.99f64,
        1.0..100.0f64,
        0usize..=8,
        any::<u64>(),
    )
        .prop_map(|(symbol, criteria, depth, angles, epsilon, delta, tau_cap, workers, seed)| SweepConfig {
            symbol,
            symbol_id: "prop".into(),
            criteria,
            params: SweepParams { depth, angles, epsilon, delta, tau_cap, ..SweepParams::default() },
            outputs: Outputs {
                csv: "p.csv".into(),
                json: "p.json".into(),
                svg: (seed % 2 == 0).then(|| "p.svg".into()),
            },
            workers,
            seed,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sweep_config_round_trips_byte_identically(cfg in config()) {
        let text = cfg.to_json();
        let back = SweepConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn garsia_is_bounded_by_twice_the_sup_norm(phi in poly_map(), a in interior()) {
        let a = DiscPoint::interior(a * 0.99).unwrap();
        let sup = validate_self_map(&phi).unwrap().certificate().sup();
        let g = garsia_gamma(&phi, &a, &QuadConfig::default()).unwrap().gamma;
        prop_assert!(g >= 0.0);
        prop_assert!(g <= 2.0 * sup + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn profiles_satisfy_their_invariants(phi in poly_map()) {
        let map = validate_self_map(&phi).unwrap();
        let mut params = SweepParams::with_depth(4);
        params.angles = 16;
        params.w1_powers = vec![1, 2, 4];
        let sweep = Sweep::new(&map, &params).unwrap();
        for p in sweep.profiles(&Kind::all(), "prop").unwrap() {
            prop_assert!(p.check_invariants(), "{:?}", p);
        }
    }
}

#[test]
fn leibov_test_functions_vanish_at_zero_with_known_norm() {
    let seq = TestSequence::dyadic(12);
    for n in 0..seq.len() {
        let f = seq.symbol(n);
        assert_eq!(f.value_at(C::default()), C::default());
        assert!((h2_norm(&f).unwrap() - seq.h2_norm(n)).abs() < 1e-10, "n = {n}");
    }
}
