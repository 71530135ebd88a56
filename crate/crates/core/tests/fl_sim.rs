use fairmpc::fair::WeightTable;
use fairmpc::fl::{
    fedavg, load_csv, local_counts, local_train, pooled, predict_proba, save_csv, stratified_split,
    synth_biased_dataset, train_centralized, train_federated, weighted_gradient, weighted_loss, ClientDataset,
    GlobalModel, SynthParams, TrainConfig,
};
use fairmpc::metrics::{FairnessReport, MetricFlavor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<u8>, Vec<f64>) {
    let x = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let y = (0..n).map(|_| rng.gen_range(0..2)).collect();
    let w = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
    (x, y, w)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (x, y, w) = small_dataset(&mut rng, 5, 3);
        let model = GlobalModel {
            weights: (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            bias: rng.gen_range(-1.0..1.0),
        };
        let (gw, gb) = weighted_gradient(&model, &x, &y, &w);
        let h = 1e-5;
        let fd = |f: &dyn Fn(&mut GlobalModel, f64)| {
            let mut a = model.clone();
            let mut b = model.clone();
            f(&mut a, h);
            f(&mut b, -h);
            (weighted_loss(&a, &x, &y, &w) - weighted_loss(&b, &x, &y, &w)) / (2.0 * h)
        };
        for k in 0..3 {
            let num = fd(&|m, d| m.weights[k] += d);
            assert!((num - gw[k]).abs() <= 1e-4 * gw[k].abs().max(1e-3), "w{k}: {num} vs {}", gw[k]);
        }
        let num = fd(&|m, d| m.bias += d);
        assert!((num - gb).abs() <= 1e-4 * gb.abs().max(1e-3));
    }
}

#[test]
fn doubling_weights_doubles_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (x, y, w) = small_dataset(&mut rng, 8, 2);
    let model = GlobalModel {
        weights: vec![0.3, -0.2],
        bias: 0.1,
    };
    let w2: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
    let (g1, b1) = weighted_gradient(&model, &x, &y, &w);
    let (g2, b2) = weighted_gradient(&model, &x, &y, &w2);
    for (a, b) in g1.iter().zip(&g2) {
        assert!((2.0 * a - b).abs() < 1e-12);
    }
    assert!((2.0 * b1 - b2).abs() < 1e-12);
}

fn federation(seed: u64, clients: usize, samples: usize, gap: f64) -> Vec<ClientDataset> {
    let p = SynthParams {
        clients,
        samples,
        bias_gap: gap,
        ..SynthParams::default()
    };
    synth_biased_dataset(seed, &p).unwrap()
}

#[test]
fn unit_weights_reduce_to_unweighted_training() {
    let fed = federation(3, 4, 200, 0.4);
    let cfg = TrainConfig {
        rounds: 3,
        ..TrainConfig::default()
    };
    let ones = WeightTable {
        epsilon: Some(1.0),
        ..WeightTable::uniform()
    };
    let a = train_federated(&fed, &ones, &cfg).unwrap();
    let b = train_federated(&fed, &WeightTable::uniform(), &cfg).unwrap();
    assert_eq!(a, b);
    let (m, n) = local_train(&GlobalModel::zeros(fed[0].dim()), &fed[0], &ones, &cfg, 0).unwrap();
    assert_eq!(n, fed[0].len());
    assert!(m.weights.iter().any(|&w| w != 0.0));
}

#[test]
fn single_client_federation_equals_centralized() {
    let fed = federation(4, 2, 300, 0.2);
    let cfg = TrainConfig {
        rounds: 4,
        local_epochs: 2,
        ..TrainConfig::default()
    };
    let w = WeightTable {
        p0: 0.7,
        p1: 1.4,
        u0: 0.9,
        u1: 2.0,
        epsilon: None,
    };
    let fl = train_federated(&fed[..1], &w, &cfg).unwrap();
    let central = train_centralized(&fed[0], &w, &cfg).unwrap();
    assert_eq!(fl, central);
}

#[test]
fn training_is_deterministic_and_seed_sensitive() {
    let fed = federation(5, 5, 400, 0.4);
    let cfg = TrainConfig {
        rounds: 3,
        client_fraction: 0.6,
        ..TrainConfig::default()
    };
    let a = train_federated(&fed, &WeightTable::uniform(), &cfg).unwrap();
    assert_eq!(a, train_federated(&fed, &WeightTable::uniform(), &cfg).unwrap());
    let other = TrainConfig { seed: 9, ..cfg };
    assert_ne!(a, train_federated(&fed, &WeightTable::uniform(), &other).unwrap());
}

#[test]
fn divergence_is_reported() {
    let fed = federation(6, 2, 100, 0.0);
    let cfg = TrainConfig {
        learning_rate: 1e300,
        rounds: 2,
        ..TrainConfig::default()
    };
    let huge = WeightTable {
        p0: 1e300,
        p1: 1e300,
        u0: 1e300,
        u1: 1e300,
        epsilon: None,
    };
    assert!(matches!(
        train_federated(&fed, &huge, &cfg),
        Err(fairmpc::Error::Divergence { round: 0 })
    ));
}

proptest! {
    #[test]
    fn fedavg_is_permutation_invariant(
        ups in prop::collection::vec((prop::collection::vec(-10.0f64..10.0, 3), -5.0f64..5.0, 1usize..50), 1..8),
        seed in any::<u64>(),
    ) {
        let updates: Vec<(GlobalModel, usize)> =
            ups.into_iter().map(|(w, b, n)| (GlobalModel { weights: w, bias: b }, n)).collect();
        let mut shuffled = updates.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(fedavg(&updates).unwrap(), fedavg(&shuffled).unwrap());
    }
}

#[test]
fn local_counts_sum_to_configured_total() {
    let fed = federation(7, 13, 1000, 0.4);
    let total: u64 = fed
        .iter()
        .map(|c| {
            let lc = local_counts(c).unwrap();
            lc.lc0 + lc.lc1
        })
        .sum();
    assert_eq!(total, 1000);
}

#[test]
fn group_assignment_is_binomial() {
    // 0.5/0.5 split over 1000 clients: within 3 sigma of 500
    let fed = federation(8, 1000, 1000, 0.0);
    let privileged = fed.iter().filter(|c| c.group().unwrap() == 1).count() as f64;
    assert!((privileged - 500.0).abs() <= 3.0 * (1000.0f64 * 0.25).sqrt(), "{privileged}");
}

#[test]
fn csv_round_trip_of_generated_federation() {
    let fed = federation(9, 10, 250, 0.4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fed.csv");
    save_csv(&fed, &path).unwrap();
    let back = load_csv(&path).unwrap();
    assert_eq!(back, fed);
    let rows = std::fs::read_to_string(&path).unwrap().lines().count() - 1;
    assert_eq!(rows, 250);
}

fn baseline_eop(seed: u64, gap: f64) -> f64 {
    let fed = federation(seed, 50, 5000, gap);
    let (train, test) = stratified_split(&fed, 0.2, seed).unwrap();
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let model = train_federated(&train, &WeightTable::uniform(), &cfg).unwrap();
    let (x, y, s) = pooled(&test);
    let yhat: Vec<u8> = predict_proba(&model, &x).unwrap().iter().map(|&p| u8::from(p >= 0.5)).collect();
    FairnessReport::evaluate(&y, &yhat, &s, MetricFlavor::Standard).unwrap().eop
}

#[test]
fn generator_calibration() {
    let mean = |gap| (0..5).map(|seed| baseline_eop(seed, gap)).sum::<f64>() / 5.0;
    let fair = mean(0.0);
    let biased = mean(0.4);
    assert!(fair < 0.05, "gap 0: {fair}");
    assert!(biased > 0.15, "gap 0.4: {biased}");
}
