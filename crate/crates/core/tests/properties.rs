use dppss::data::Rescale;
use dppss::discretize::{build_discrete_dpp, build_feature_matrix, DEFAULT_RANK_TOLERANCE};
use dppss::kernels::{IndexMode, ProjectionKernel};
use dppss::rng::{splitmix64, stream_seed, trial_seed};
use dppss::wavelets::ScalingFunction;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_points(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.001f64..0.999, dim), 40..120)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_samples_have_rank_many_distinct_points(
        points in unit_points(1),
        seed in any::<u64>(),
        use_ope in any::<bool>(),
    ) {
        let kernel = if use_ope {
            ProjectionKernel::ope(1, 4).unwrap()
        } else {
            ProjectionKernel::wavelet(ScalingFunction::haar(), 2, 1, IndexMode::Interior).unwrap()
        };
        let psi = build_feature_matrix(&kernel, &points).unwrap();
        let rho = vec![1.0; points.len()];
        // an empty Haar cell lowers the rank, which is allowed
        let Ok(dpp) = build_discrete_dpp(&psi, &rho, DEFAULT_RANK_TOLERANCE) else {
            prop_assert!(!use_ope);
            return Ok(());
        };
        let total: f64 = dpp.inclusion_probabilities().iter().sum();
        prop_assert!((total - dpp.rank() as f64).abs() < 1e-8);
        prop_assert!(dpp.inclusion_probabilities().iter().all(|&p| (-1e-12..=1.0 + 1e-9).contains(&p)));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = dpp.sample(&mut rng).unwrap();
        prop_assert_eq!(s.len(), dpp.rank());
        s.sort_unstable();
        s.dedup();
        prop_assert_eq!(s.len(), dpp.rank());
        prop_assert!(s.iter().all(|&i| i < points.len()));
    }

    #[test]
    fn haar_kernel_reproduces_constants(x in 0.0f64..1.0, y in 0.0f64..1.0, j in 0u32..5) {
        let kernel = ProjectionKernel::wavelet(ScalingFunction::haar(), j, 2, IndexMode::Interior).unwrap();
        let mut feats = Vec::new();
        kernel.features(&[x, y], &mut feats).unwrap();
        let total: f64 = feats.iter().sum::<f64>() * 2f64.powf(-(j as f64));
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ope_diagonal_is_symmetric_and_positive(x in 0.0f64..1.0, n in 1usize..12) {
        let kernel = ProjectionKernel::ope(1, n).unwrap();
        let a = kernel.diagonal(&[x]).unwrap();
        let b = kernel.diagonal(&[1.0 - x]).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn rescale_round_trips(points in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 2..30)) {
        prop_assume!((0..3).all(|c| {
            let (lo, hi) = points.iter().fold((f64::MAX, f64::MIN), |(l, h), p| (l.min(p[c]), h.max(p[c])));
            hi - lo > 1e-6
        }));
        let r = Rescale::min_max(&points, 0.1, 0.9).unwrap();
        for p in &points {
            let y = r.apply(p);
            prop_assert!(y.iter().all(|&v| (0.1 - 1e-12..=0.9 + 1e-12).contains(&v)));
            let back = r.invert(&y);
            for (a, b) in back.iter().zip(p) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn seeds_are_deterministic_and_spread(master in any::<u64>(), t in 0u64..1000) {
        prop_assert_eq!(trial_seed(master, t), trial_seed(master, t));
        prop_assert_ne!(trial_seed(master, t), trial_seed(master, t + 1));
        prop_assert_ne!(stream_seed(master, "a"), stream_seed(master, "b"));
        prop_assert_eq!(splitmix64(master), splitmix64(master));
    }
}
