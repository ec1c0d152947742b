use msadapt::oracle::{decomposition_check, gradient_check, uv_convexity_check};
use msadapt::predictors::Model;
use msadapt::scenarios::{builtin, random_discrete_scenario, BuiltinParams, BUILTINS};
use proptest::prelude::*;

#[test]
fn identity_convexity_and_gradients_at_full_trial_counts() {
    for (model, seed) in [(Model::Regression, 21), (Model::Probability, 22)] {
        let prob = random_discrete_scenario(model, seed, 3, 6, 4).unwrap().problem(0.01).unwrap();
        let id = decomposition_check(&prob, 100, 1).unwrap();
        assert!(id.passes, "{model:?}: {id:?}");
        let cv = uv_convexity_check(&prob, 200, 2).unwrap();
        assert!(cv.passes, "{model:?}: {cv:?}");
        let gr = gradient_check(&prob, 50, 3).unwrap();
        assert!(gr.passes, "{model:?}: {gr:?}");
    }
}

#[test]
fn checks_pass_on_every_builtin() {
    for (name, _) in BUILTINS {
        let prob = builtin(name, &BuiltinParams::default()).unwrap().problem(1e-3).unwrap();
        for report in [
            decomposition_check(&prob, 30, 4).unwrap(),
            uv_convexity_check(&prob, 30, 5).unwrap(),
            gradient_check(&prob, 10, 6).unwrap(),
        ] {
            assert!(report.passes, "{name}: {report:?}");
        }
    }
}

#[test]
fn single_source_has_zero_gap() {
    for model in [Model::Regression, Model::Probability] {
        let prob = random_discrete_scenario(model, 9, 1, 3, 2).unwrap().problem(0.1).unwrap();
        let report = decomposition_check(&prob, 10, 0).unwrap();
        assert!(report.worst <= 1e-12);
        let (gamma, k) = prob.objective(&msadapt::domain_model::SimplexVector::uniform(1)).unwrap();
        assert_eq!((gamma, k), (0.0, 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decomposition_holds_on_random_instances(
        seed in 0u64..10_000,
        regression in any::<bool>(),
        p in 2usize..5,
        n_x in 1usize..6,
        n_y in 1usize..4,
        eta in 1e-3f64..0.5,
    ) {
        let model = if regression { Model::Regression } else { Model::Probability };
        let prob = random_discrete_scenario(model, seed, p, n_x, n_y).unwrap().problem(eta).unwrap();
        let id = decomposition_check(&prob, 10, seed).unwrap();
        prop_assert!(id.passes, "{:?}", id);
        let cv = uv_convexity_check(&prob, 10, seed).unwrap();
        prop_assert!(cv.passes, "{:?}", cv);
        let gr = gradient_check(&prob, 5, seed).unwrap();
        prop_assert!(gr.passes, "{:?}", gr);
    }

    #[test]
    fn objective_is_nonnegative(seed in 0u64..10_000, regression in any::<bool>(), p in 1usize..5) {
        let model = if regression { Model::Regression } else { Model::Probability };
        let prob = random_discrete_scenario(model, seed, p, 4, 3).unwrap().problem(0.01).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let z = msadapt::domain_model::SimplexVector::dirichlet(p, &mut rng);
        prop_assert!(prob.objective(&z).unwrap().0 >= -1e-12);
    }
}
