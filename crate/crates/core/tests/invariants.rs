use alcove_core::crystal::{
    adapted_string_full, cutoff_for_tail, omega_of, pitman_string_full, root_operator_e,
    root_operator_f,
};
use alcove_core::path::{path_infimum, sup_pairing_distance, PREDICATE_TOL};
use alcove_core::{
    dominant_projection, enumerate_module, is_dominant, pitman, pitman_cascade, string_coordinates,
    DirectionSequence, PiecewiseLinearPath, RootSystem, WeightVector,
};
use proptest::prelude::*;

/// Space-time path: level equals time, finite part a random polyline.
fn random_path(n: usize) -> impl Strategy<Value = PiecewiseLinearPath> {
    prop::collection::vec((0.05f64..1.0, prop::collection::vec(-1.5f64..1.5, n)), 1..7).prop_map(
        move |segments| {
            let mut t = 0.0;
            let mut x = vec![0.0; n];
            let mut times = vec![0.0];
            let mut values = vec![WeightVector::zero(n)];
            for (dt, dx) in segments {
                t += dt;
                for (c, d) in x.iter_mut().zip(&dx) {
                    *c += d;
                }
                times.push(t);
                values.push(WeightVector::new(t, &x, 0.0));
            }
            PiecewiseLinearPath::new(times, values).unwrap()
        },
    )
}

fn rank_and_path() -> impl Strategy<Value = (usize, PiecewiseLinearPath)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), random_path(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pitman_is_idempotent_and_clears_infimum((n, path) in rank_and_path(), i in 0usize..4) {
        let rs = RootSystem::new(n).unwrap();
        let i = i % (n + 1);
        let once = pitman(&rs, &path, i);
        let twice = pitman(&rs, &once, i);
        prop_assert!(sup_pairing_distance(&rs, &once, &twice) <= 1e-9);
        prop_assert!(path_infimum(&rs, &once, i) >= -1e-9);
        prop_assert!((once.endpoint().level - path.endpoint().level).abs() <= 1e-12);
    }

    #[test]
    fn endpoint_bookkeeping((n, path) in rank_and_path(), depth in 0usize..8) {
        let rs = RootSystem::new(n).unwrap();
        let seq = DirectionSequence::cyclic(n);
        let a = string_coordinates(&rs, &path, &seq, depth);
        let out = pitman_cascade(&rs, &path, &seq, depth);
        let mut expected = path.endpoint().clone();
        for k in 0..=depth {
            expected.axpy(a.get(k), &rs.alpha(seq.index(k)));
            prop_assert!(a.get(k) >= -1e-12);
        }
        prop_assert!(out.endpoint().max_abs_diff(&expected) <= 1e-9);
    }

    #[test]
    fn dominant_projection_is_order_independent((n, path) in rank_and_path()) {
        let rs = RootSystem::new(n).unwrap();
        let up = DirectionSequence::cyclic(n);
        let down = DirectionSequence::periodic(n, (0..=n).rev().collect()).unwrap();
        let horizon = path.horizon();
        let (a, _) = dominant_projection(&rs, &path, &up, horizon, 10_000).unwrap();
        let (b, _) = dominant_projection(&rs, &path, &down, horizon, 10_000).unwrap();
        prop_assert!(is_dominant(&rs, &a, PREDICATE_TOL));
        prop_assert!(sup_pairing_distance(&rs, &a, &b) <= 1e-9);
    }
}

#[test]
fn catalog_invariants() {
    for (n, s) in [(1usize, 2.0), (2, 4.0)] {
        let rs = RootSystem::new(n).unwrap();
        let nu_hat = rs.barycentric_drift() * s;
        let e_max = cutoff_for_tail(&rs, &nu_hat, 1.0, 1e-6).unwrap();
        let gen = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        let seq = DirectionSequence::cyclic(n);
        let cat = enumerate_module(&rs, &gen, &seq, &nu_hat, e_max).unwrap();
        let mut strings = std::collections::HashSet::new();
        for v in &cat.vertices {
            assert!(
                strings.insert(v.string.clone()),
                "duplicate string {:?}",
                v.string
            );
            assert_eq!(adapted_string_full(&rs, &v.path, &seq).unwrap(), v.string);
            assert_eq!(pitman_string_full(&rs, &v.path, &seq).unwrap(), v.string);
            let omega = omega_of(&rs, &seq, &v.string);
            let diff = &(&rs.lambda0() - &v.endpoint) - &omega;
            assert!(diff.coordinates().iter().all(|c| c.abs() < 1e-9));
            for i in 0..=n {
                if let Some(f) = root_operator_f(&rs, &v.path, i) {
                    let back = root_operator_e(&rs, &f, i).unwrap();
                    assert!(sup_pairing_distance(&rs, &back, &v.path) < 1e-9);
                }
                if let Some(e) = root_operator_e(&rs, &v.path, i) {
                    let back = root_operator_f(&rs, &e, i).unwrap();
                    assert!(sup_pairing_distance(&rs, &back, &v.path) < 1e-9);
                }
            }
        }
    }
}
