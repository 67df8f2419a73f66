#![allow(dead_code)]

use abcboost_core::Dataset;
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }
}

/// Three well separated clusters of ten points each in two dimensions.
pub fn separable_toy() -> Dataset {
    let centers = [(0.0, 0.0), (10.0, 0.0), (5.0, 10.0)];
    let mut rng = TestRng::new(7);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for i in 0..30 {
        let class = i % 3;
        let (cx, cy) = centers[class];
        features.push(cx + rng.range(-1.0, 1.0));
        features.push(cy + rng.range(-1.0, 1.0));
        labels.push(class);
    }
    Dataset::new(features, 2, labels, None).unwrap()
}

/// Noisy Gaussian-ish blobs: `k` classes, `n` rows, `d` features.
pub fn noisy_blobs(n: usize, d: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = TestRng::new(seed);
    let centers: Vec<f64> = (0..k * d).map(|_| rng.range(-2.0, 2.0)).collect();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % k;
        for j in 0..d {
            let noise: f64 = (0..4).map(|_| rng.range(-1.0, 1.0)).sum();
            features.push(centers[class * d + j] + noise);
        }
        labels.push(class);
    }
    Dataset::new(features, d, labels, Some(k)).unwrap()
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300) || a == b
}
