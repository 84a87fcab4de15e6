use abcnet::abc::{self, AbcConfig, Bounds, FoodSource, Perturbation};
use abcnet::data::{self, ScalerParams, WindowSpec, WindowedDataset};
use abcnet::metrics;
use abcnet::mlp::{self, FlatWeights, MlpTopology, SamplePair};
use abcnet::rng::RandomSource;
use proptest::prelude::*;

fn topology() -> impl Strategy<Value = MlpTopology> {
    (prop::collection::vec(1usize..5, 3..5), any::<bool>())
        .prop_map(|(sizes, biases)| MlpTopology::new(sizes, biases).unwrap())
}

fn net_and_weights() -> impl Strategy<Value = (MlpTopology, Vec<f64>)> {
    topology().prop_flat_map(|t| {
        let d = t.dimension();
        (Just(t), prop::collection::vec(-10.0f64..10.0, d))
    })
}

fn samples_for(t: &MlpTopology, seed: u64, n: usize) -> Vec<SamplePair> {
    let mut rng = RandomSource::new(seed);
    (0..n)
        .map(|_| SamplePair {
            input: (0..t.inputs()).map(|_| rng.uniform(-1.0, 2.0)).collect(),
            target: (0..t.outputs()).map(|_| rng.unit()).collect(),
        })
        .collect()
}

fn series(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, min_len..60)
        .prop_filter("not constant", |v| v.iter().any(|x| *x != v[0]))
}

proptest! {
    #[test]
    fn flatten_round_trip((t, w) in net_and_weights()) {
        let flat = FlatWeights::new(&t, w.clone()).unwrap();
        let layers = flat.layers(&t);
        prop_assert_eq!(layers.len(), t.layer_sizes().len() - 1);
        let back = FlatWeights::from_layers(&t, &layers).unwrap();
        prop_assert_eq!(back.as_slice(), &w[..]);
    }

    #[test]
    fn outputs_in_open_unit_interval((t, w) in net_and_weights(), seed in any::<u64>()) {
        for s in samples_for(&t, seed, 5) {
            let y = mlp::forward(&t, &w, &s.input).unwrap();
            prop_assert_eq!(y.len(), t.outputs());
            prop_assert!(y.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn batch_mse_ignores_sample_order((t, w) in net_and_weights(), seed in any::<u64>(), k in 0usize..7) {
        let samples = samples_for(&t, seed, 7);
        let mut rotated = samples.clone();
        rotated.rotate_left(k);
        let a = mlp::batch_mse(&t, &w, &samples).unwrap();
        let b = mlp::batch_mse(&t, &w, &rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn fitness_decreasing_and_bounded(a in 0.0f64..1e6, b in 0.0f64..1e6) {
        let (fa, fb) = (abc::fitness(a).unwrap(), abc::fitness(b).unwrap());
        prop_assert!(fa > 0.0 && fa <= 1.0);
        if a < b {
            prop_assert!(fa > fb);
        }
    }

    #[test]
    fn probabilities_form_simplex(objs in prop::collection::vec(0.0f64..100.0, 1..40)) {
        let sources: Vec<FoodSource> = objs
            .iter()
            .map(|o| FoodSource::new(vec![0.0], *o).unwrap())
            .collect();
        let p = abc::selection_probabilities(&sources).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|x| *x > 0.0 && *x <= 1.0));
        for i in 0..objs.len() {
            for j in 0..objs.len() {
                if objs[i] < objs[j] {
                    prop_assert!(p[i] > p[j]);
                }
            }
        }
    }

    #[test]
    fn candidate_moves_one_component_inside_bounds(seed in any::<u64>(), d in 1usize..8) {
        let bounds = Bounds::uniform(d, -3.0, 3.0).unwrap();
        let mut rng = RandomSource::new(seed);
        let sources: Vec<FoodSource> = (0..4)
            .map(|_| FoodSource::new(abc::random_solution(&bounds, &mut rng), 1.0).unwrap())
            .collect();
        let i = rng.index(4);
        let c = abc::produce_candidate(&sources, i, &mut rng, &bounds, Perturbation::SingleDimension).unwrap();
        prop_assert!(bounds.contains(&c));
        let changed = c.iter().zip(&sources[i].position).filter(|(a, b)| a != b).count();
        prop_assert!(changed <= 1);
    }

    #[test]
    fn abc_run_is_reproducible(seed in any::<u64>()) {
        let config = AbcConfig {
            colony_size: 10,
            ..AbcConfig::new(Bounds::uniform(3, -5.0, 5.0).unwrap(), 20, seed)
        };
        let f = |x: &[f64]| x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>();
        let a = abc::run(&config, f).unwrap();
        let b = abc::run(&config, f).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mse_symmetric(a in prop::collection::vec(-5.0f64..5.0, 1..20), shift in -1.0f64..1.0) {
        let actual: Vec<[f64; 1]> = a.iter().map(|v| [*v]).collect();
        let predicted: Vec<[f64; 1]> = a.iter().map(|v| [v * 0.5 + shift]).collect();
        prop_assert_eq!(
            metrics::mse(&actual, &predicted).unwrap(),
            metrics::mse(&predicted, &actual).unwrap()
        );
    }

    #[test]
    fn nmse_affine_invariant(a in series(2), scale in 0.1f64..10.0, offset in -50.0f64..50.0) {
        let p: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + (i % 3) as f64 - 1.0).collect();
        let base = metrics::nmse(&a, &p).unwrap();
        let a2: Vec<f64> = a.iter().map(|v| scale * v + offset).collect();
        let p2: Vec<f64> = p.iter().map(|v| scale * v + offset).collect();
        let moved = metrics::nmse(&a2, &p2).unwrap();
        prop_assert!((base - moved).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn mean_predictor_nmse(a in series(2)) {
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        let v = metrics::nmse(&a, &vec![mean; a.len()]).unwrap();
        prop_assert!((v - (n - 1.0) / n).abs() <= 1e-12);
    }

    #[test]
    fn accuracy_in_range(a in prop::collection::vec(0.5f64..9.0, 1..30), noise in 0.0f64..20.0) {
        let p: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + noise * ((i % 2) as f64 - 0.5)).collect();
        let acc = metrics::accuracy_pct(&a, &p).unwrap();
        prop_assert!((0.0..=100.0).contains(&acc));
    }

    #[test]
    fn scaler_round_trip(values in series(2), x in -100.0f64..100.0) {
        let s = ScalerParams::fit(&values).unwrap();
        let y = s.apply(x);
        prop_assert!((0.0..=1.0).contains(&y));
        if (s.observed_min..=s.observed_max).contains(&x) {
            prop_assert!((s.invert(y) - x).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn split_is_chronological_prefix(items in prop::collection::vec(any::<u32>(), 0..100), ratio in 0.05f64..0.95) {
        let (train, test) = data::split(&items, ratio);
        prop_assert_eq!(train.len(), data::split_point(items.len(), ratio));
        prop_assert_eq!([train, test].concat(), items);
    }

    #[test]
    fn test_perturbation_leaves_training_untouched(
        raw in prop::collection::vec(1.0f64..8.0, 40..120),
        w in 1usize..5, h in 1usize..6, k in 1usize..3,
        bump in -30.0f64..30.0,
    ) {
        let spec = WindowSpec::new(w, h, k).unwrap();
        prop_assume!(raw.len() >= data::minimum_series_len(spec, 0.7));
        prop_assume!(raw.iter().any(|x| *x != raw[0]));
        let base = WindowedDataset::build(&raw, spec, 0.7).unwrap();
        let mut moved = raw.clone();
        for v in &mut moved[base.training_end..] {
            *v += bump;
        }
        let again = WindowedDataset::build(&moved, spec, 0.7).unwrap();
        prop_assert_eq!(again.scaler, base.scaler);
        prop_assert_eq!(again.train, base.train);
        prop_assert_eq!(again.train_raw_targets, base.train_raw_targets);
    }
}
