use abcnet::bp::{self, BpConfig, StopReason};
use abcnet::mlp::{self, FlatWeights, MlpTopology, SamplePair};
use abcnet::rng::RandomSource;

fn xor() -> Vec<SamplePair> {
    [([0.0, 0.0], 0.0), ([0.0, 1.0], 1.0), ([1.0, 0.0], 1.0), ([1.0, 1.0], 0.0)]
        .iter()
        .map(|(x, y)| SamplePair {
            input: x.to_vec(),
            target: vec![*y],
        })
        .collect()
}

fn random_set(t: &MlpTopology, n: usize, seed: u64) -> Vec<SamplePair> {
    let mut rng = RandomSource::new(seed);
    (0..n)
        .map(|_| SamplePair {
            input: (0..t.inputs()).map(|_| rng.unit()).collect(),
            target: (0..t.outputs()).map(|_| rng.unit()).collect(),
        })
        .collect()
}

#[test]
fn small_step_is_first_order_descent() {
    let t = MlpTopology::parse("3-3-1").unwrap();
    let samples = random_set(&t, 12, 4);
    let lr = 1e-4;
    for seed in 0..10 {
        let mut rng = RandomSource::new(seed);
        let w = bp::initial_weights(&t, 1.0, &mut rng);
        let (before, grad) = bp::loss_and_gradient(&t, &w, &samples).unwrap();
        let stepped: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x - lr * g).collect();
        let after = mlp::batch_mse(&t, &stepped, &samples).unwrap();
        let predicted = lr * grad.iter().map(|g| g * g).sum::<f64>();
        let actual = before - after;
        assert!(actual > 0.0, "seed {seed}: step did not decrease loss");
        assert!(
            (actual - predicted).abs() <= 1e-3 * predicted,
            "seed {seed}: decrease {actual:e} vs first-order {predicted:e}"
        );
    }
}

#[test]
fn xor_loss_falls_over_first_epochs() {
    let t = MlpTopology::parse("2-2-1").unwrap();
    let mut falling = 0;
    for seed in 0..5 {
        let config = BpConfig {
            max_epochs: 10,
            target_mse: 1e-12,
            seed,
            ..BpConfig::default()
        };
        let (_, history) = bp::train(&t, &xor(), &config).unwrap();
        assert_eq!(history.epochs.len(), 10);
        if history.epochs.windows(2).all(|w| w[1].mse < w[0].mse) {
            falling += 1;
        }
    }
    assert!(falling >= 4, "only {falling}/5 seeds strictly decreasing");
}

#[test]
fn stops_at_target() {
    let t = MlpTopology::parse("2-3-1").unwrap();
    let config = BpConfig {
        target_mse: 0.05,
        max_epochs: 20_000,
        seed: 1,
        ..BpConfig::default()
    };
    let (w, history) = bp::train(&t, &xor(), &config).unwrap();
    assert_eq!(history.stop_reason, StopReason::TargetReached);
    assert!(mlp::batch_mse(&t, &w, &xor()).unwrap() <= 0.05);
    assert!(history.epochs.len() < 20_000);
}

#[test]
fn runs_to_epoch_budget_otherwise() {
    let t = MlpTopology::parse("2-2-1").unwrap();
    let config = BpConfig {
        max_epochs: 25,
        target_mse: 1e-12,
        ..BpConfig::default()
    };
    let (_, history) = bp::train(&t, &xor(), &config).unwrap();
    assert_eq!(history.stop_reason, StopReason::MaxEpochs);
    let steps: Vec<usize> = history.epochs.iter().map(|p| p.epoch).collect();
    assert_eq!(steps, (1..=25).collect::<Vec<_>>());
}

#[test]
fn gradient_matches_differences_without_biases() {
    let t = MlpTopology::new(vec![3, 4, 2], false).unwrap();
    let samples = random_set(&t, 6, 11);
    let mut rng = RandomSource::new(5);
    for _ in 0..20 {
        let w: Vec<f64> = (0..t.dimension()).map(|_| rng.uniform(-1.5, 1.5)).collect();
        let g = bp::gradient(&t, &w, &samples).unwrap();
        for i in 0..w.len() {
            let (mut p, mut m) = (w.clone(), w.clone());
            p[i] += 1e-6;
            m[i] -= 1e-6;
            let fd = (mlp::batch_mse(&t, &p, &samples).unwrap()
                - mlp::batch_mse(&t, &m, &samples).unwrap())
                / 2e-6;
            assert!((g[i] - fd).abs() <= 1e-5 * g[i].abs().max(fd.abs()).max(1e-6));
        }
    }
}

#[test]
fn same_seed_same_weights() {
    let t = MlpTopology::parse("3-3-1").unwrap();
    let samples = random_set(&t, 10, 2);
    let config = BpConfig {
        max_epochs: 50,
        seed: 9,
        ..BpConfig::default()
    };
    let a = bp::train(&t, &samples, &config).unwrap();
    let b = bp::train(&t, &samples, &config).unwrap();
    assert_eq!(a, b);
    let other = bp::train(&t, &samples, &BpConfig { seed: 10, ..config }).unwrap();
    assert_ne!(a.0, other.0);
}

#[test]
fn zero_rate_keeps_initial_weights() {
    let t = MlpTopology::parse("2-2-1").unwrap();
    let init = FlatWeights::new(&t, vec![0.3; t.dimension()]).unwrap();
    let config = BpConfig {
        learning_rate: 0.0,
        max_epochs: 5,
        target_mse: 1e-12,
        ..BpConfig::default()
    };
    let (w, history) = bp::train_from(&t, &xor(), &config, init.clone()).unwrap();
    assert_eq!(w, init);
    assert!(history.epochs.windows(2).all(|p| p[0].mse == p[1].mse));
}
