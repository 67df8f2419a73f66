use abcboost::persist::{
    file_from_str, file_to_string, model_from_str, model_to_string, ModelFile,
};
use abcboost::{load_model, save_model, Error};
use abcboost_core::{predict_scores, train, Algorithm, Dataset, TrainConfig};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn blobs(n: usize, d: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let class = i % k;
        for j in 0..d {
            features.push(class as f64 * ((j + 1) as f64).sqrt() + 3.0 * unit(&mut rng));
        }
        labels.push(class);
    }
    Dataset::new(features, d, labels, Some(k)).unwrap()
}

#[test]
fn round_trip_preserves_predictions_bit_for_bit() {
    let data = blobs(200, 5, 4, 1);
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let probes: Vec<Vec<f64>> = (0..1000)
        .map(|_| (0..5).map(|_| -2.0 + 12.0 * unit(&mut rng)).collect())
        .collect();
    for algorithm in Algorithm::ALL {
        let config = TrainConfig {
            max_leaves: 7,
            ..TrainConfig::new(algorithm, 12)
        };
        let (model, _) = train(&config, &data, None).unwrap();
        let path = dir.path().join(format!("{algorithm}.model"));
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model);
        for x in &probes {
            let a = predict_scores(&model, x).unwrap();
            let b = predict_scores(&loaded, x).unwrap();
            assert_eq!(
                a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
        // Saving again is byte-identical.
        assert_eq!(
            model_to_string(&loaded),
            std::fs::read_to_string(&path).unwrap()
        );
    }
}

#[test]
fn class_labels_survive() {
    let data = blobs(60, 2, 3, 2);
    let (model, _) = train(&TrainConfig::new(Algorithm::AbcMart, 3), &data, None).unwrap();
    let file = ModelFile {
        model,
        class_labels: vec![-1, 4, 9],
    };
    assert_eq!(file_from_str(&file_to_string(&file)).unwrap(), file);
}

#[test]
fn corruption_is_detected() {
    let data = blobs(60, 2, 3, 3);
    let (model, _) = train(&TrainConfig::new(Algorithm::Mart, 3), &data, None).unwrap();
    let text = model_to_string(&model);

    let truncated = &text[..text.len() / 2];
    assert!(matches!(model_from_str(truncated), Err(Error::Checksum(_))));

    let flipped = text.replacen("leaf ", "leaf 1", 1);
    assert!(matches!(model_from_str(&flipped), Err(Error::Checksum(_))));

    let newer = text.replacen("abcboost-model 1", "abcboost-model 2", 1);
    match model_from_str(&newer) {
        Err(Error::UnsupportedVersion { found, .. }) => assert_eq!(found, "2"),
        other => panic!("{other:?}"),
    }
    assert!(model_from_str("").is_err());
}
