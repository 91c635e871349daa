use coallab::measures::CoalescentMeasure;
use coallab::rates::RateTable;
use coallab::rng::SeedSpec;
use coallab::simulator::{external_branch, simulate_replicate};
use coallab::stats::{ks_one_sample_cdf, ks_two_sample};
use proptest::prelude::*;

fn measure() -> impl Strategy<Value = CoalescentMeasure> {
    prop_oneof![
        (0.05f64..3.0, 0.05f64..3.0).prop_map(|(a, b)| CoalescentMeasure::beta(a, b).unwrap()),
        (1.05f64..1.95).prop_map(|a| CoalescentMeasure::beta_alpha(a).unwrap()),
        Just(CoalescentMeasure::kingman()),
        Just(CoalescentMeasure::bolthausen_sznitman()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn consistency_recursion(m in measure()) {
        let t = RateTable::new(&m, 201).unwrap();
        for b in 2..=200 {
            for k in 2..=b {
                let l = t.lambda(b, k).unwrap();
                let split = t.lambda(b + 1, k).unwrap() + t.lambda(b + 1, k + 1).unwrap();
                prop_assert!((l - split).abs() <= 1e-10 * l, "b={} k={} {} vs {}", b, k, l, split);
            }
        }
    }

    #[test]
    fn first_jump_law_normalized(m in measure(), b in 2usize..3000) {
        let t = RateTable::new(&m, b).unwrap();
        let law = t.first_jump_law(b).unwrap();
        prop_assert_eq!(law.pmf.len(), b - 1);
        prop_assert!(law.pmf.iter().all(|&p| p >= 0.0));
        prop_assert!((law.pmf.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let mean: f64 = law.pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        prop_assert!((mean - t.first_jump_mean(b).unwrap()).abs() <= 1e-8 * mean);
    }

    #[test]
    fn path_invariants(m in measure(), n in 2usize..400, seed in any::<u64>(), rep in 0u64..1000) {
        let t = RateTable::new(&m, n).unwrap();
        let s = SeedSpec::new(seed, rep);
        let (ext, path) = simulate_replicate(&t, n, s).unwrap();
        prop_assert_eq!(path.x.iter().sum::<usize>(), n - 1);
        prop_assert_eq!(path.y.len(), path.tau + 1);
        prop_assert_eq!(path.y[0], n);
        prop_assert_eq!(*path.y.last().unwrap(), 1);
        prop_assert!(path.waits.iter().all(|&w| w > 0.0));
        prop_assert!(ext.sigma >= 1 && ext.sigma <= ext.tau);
        prop_assert!(ext.t_len > 0.0 && ext.t_len <= path.height() * (1.0 + 1e-12));
        prop_assert!(ext.y_at_sigma >= 1 && ext.y_at_sigma < n);
        prop_assert_eq!(ext, external_branch(&t, n, s).unwrap());
    }

    #[test]
    fn block_count_non_increasing(m in measure(), n in 2usize..300, seed in any::<u64>(), mut times in prop::collection::vec(0.0f64..5.0, 1..60)) {
        let t = RateTable::new(&m, n).unwrap();
        let path = simulate_replicate(&t, n, SeedSpec::new(seed, 0)).unwrap().1;
        times.sort_by(f64::total_cmp);
        let counts = path.block_count_at(&times).unwrap();
        prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(counts.iter().all(|&c| (1..=n).contains(&c)));
        if times.len() >= 2 && times[0] < times[1] {
            times.swap(0, 1);
            prop_assert!(path.block_count_at(&times).is_err());
        }
    }

    #[test]
    fn ks_in_unit_interval(a in prop::collection::vec(-10.0f64..10.0, 1..200), b in prop::collection::vec(-10.0f64..10.0, 1..200)) {
        let d = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        let one = ks_one_sample_cdf(&a, |x| ((x + 10.0) / 20.0).clamp(0.0, 1.0)).unwrap();
        prop_assert!((0.0..=1.0).contains(&one));
        prop_assert!(one >= 0.5 / a.len() as f64 - 1e-15);
    }
}
