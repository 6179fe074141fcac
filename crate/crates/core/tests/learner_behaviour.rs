use linkprob::evaluation::{compare_convergence, init_seed, CompareConfig};
use linkprob::generate::random_attachment_tree;
use linkprob::learner::{link_update, DEFAULT_EPSILON};
use linkprob::{
    draw_leaf, parameter_error, CausalTree, InitMode, Initializer, LearnerOptions, LearnerState,
    LinkParams, RunningAverage, SampleRng, StopCriterion, TreeStructure, WeightingMode,
};
use proptest::prelude::*;

#[test]
fn running_average_over_a_million_values() {
    let mut rng = SampleRng::new(1);
    let mut avg = RunningAverage::new();
    let mut sum = 0.0;
    let n = 1_000_000;
    for _ in 0..n {
        let u = rng.uniform();
        sum += u;
        avg.push(u);
    }
    assert_eq!(avg.n(), n);
    assert!((avg.mean() - sum / n as f64).abs() <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimates_stay_clamped(
        nodes in 1usize..=10,
        seed in any::<u64>(),
        posterior in any::<bool>(),
        forgetting in prop::option::of(0.001f64..0.2),
    ) {
        let mut rng = SampleRng::new(seed);
        let truth = random_attachment_tree(nodes, (0.05, 0.95), (0.0, 1.0), &mut rng).unwrap();
        let options = LearnerOptions {
            weighting: if posterior { WeightingMode::Posterior } else { WeightingMode::Unweighted },
            forgetting,
            ..Default::default()
        };
        let mut st = LearnerState::init(truth.structure(), &Initializer::Random { seed }, options).unwrap();
        for _ in 0..200 {
            st.step(&draw_leaf(&truth, &mut rng)).unwrap();
            for p in st.estimates().parameter_values() {
                prop_assert!((DEFAULT_EPSILON..=1.0 - DEFAULT_EPSILON).contains(&p));
            }
        }
    }

    #[test]
    fn independence_collapse(pw in 0.001f64..0.999, pz in 0.0f64..=1.0) {
        let l = link_update(pw, pz, pw, pw);
        prop_assert!((l.f - pz).abs() <= 1e-12);
        prop_assert!((l.g - pz).abs() <= 1e-12);
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    let mut rng = SampleRng::new(8);
    let truth = random_attachment_tree(9, (0.1, 0.9), (0.05, 0.95), &mut rng).unwrap();
    let data: Vec<_> = (0..3000).map(|_| draw_leaf(&truth, &mut rng)).collect();
    let trace = || {
        let mut st = LearnerState::init(
            truth.structure(),
            &Initializer::Perturb { truth: truth.clone(), sigma: 0.1, seed: 3 },
            LearnerOptions::default(),
        )
        .unwrap();
        st.run(&data, &StopCriterion::samples(10_000), 250).unwrap()
    };
    assert_eq!(trace(), trace());
}

#[test]
fn deterministic_truth_is_recovered() {
    let truth = CausalTree::uniform(TreeStructure::star(3), 0.5, LinkParams::new(1.0, 0.0));
    let target = truth.map_parameters(|p| p.clamp(DEFAULT_EPSILON, 1.0 - DEFAULT_EPSILON));
    for seed in 0..5u64 {
        let mut st = LearnerState::init(
            truth.structure(),
            &Initializer::Perturb { truth: truth.clone(), sigma: 0.05, seed: init_seed(seed) },
            LearnerOptions::default(),
        )
        .unwrap();
        let mut rng = SampleRng::new(seed);
        for _ in 0..10_000 {
            st.step(&draw_leaf(&truth, &mut rng)).unwrap();
        }
        let err = parameter_error(st.estimates(), &target, true).unwrap();
        assert!(err.max_abs_error <= 0.02, "seed {seed}: {err:?}");
    }
}

#[test]
fn supervised_error_shrinks_with_more_data() {
    let links = [(0.9, 0.2), (0.8, 0.1), (0.7, 0.3)]
        .iter()
        .enumerate()
        .map(|(i, &(f, g))| (linkprob::NodeId(i + 1), LinkParams::new(f, g)))
        .collect();
    let truth = CausalTree::new(TreeStructure::star(3), 0.6, links).unwrap();
    let seeds: Vec<u64> = (100..110).collect();
    let table = compare_convergence(
        &truth,
        &seeds,
        100_000,
        &[1000, 100_000],
        &CompareConfig { init: InitMode::Random, ..Default::default() },
    )
    .unwrap();
    let improved = seeds
        .iter()
        .filter(|&&s| {
            let rows: Vec<_> = table.rows_for(s).collect();
            rows[1].sup_err < rows[0].sup_err
        })
        .count();
    assert!(improved >= 9, "{improved}/10");
}
