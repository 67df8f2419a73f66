//! Softmax probabilities, the multi-class negative log-likelihood and its
//! per-class derivatives, all over row-major `N x K` matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tree::GradientPair;

/// Floor on `p` inside the logarithm of the loss.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

/// Writes `softmax(scores)` into `probs`, subtracting the row maximum first.
#[inline]
pub fn softmax_row(scores: &[f64], probs: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (p, &f) in probs.iter_mut().zip(scores) {
        *p = libm::exp(f - max);
        total += *p;
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
}

/// Row-wise softmax of an `N x K` score matrix.
pub fn softmax_probs(scores: &[f64], num_classes: usize) -> Vec<f64> {
    let mut probs = vec![0.0; scores.len()];
    for (f, p) in scores
        .chunks_exact(num_classes)
        .zip(probs.chunks_exact_mut(num_classes))
    {
        softmax_row(f, p);
    }
    probs
}

/// `-sum_i log max(p[i, y_i], PROBABILITY_FLOOR)`.
pub fn neg_log_likelihood(probs: &[f64], labels: &[usize], num_classes: usize) -> f64 {
    probs
        .chunks_exact(num_classes)
        .zip(labels)
        .map(|(p, &y)| -libm::log(p[y].max(PROBABILITY_FLOOR)))
        .sum()
}

#[inline]
fn indicator(label: usize, class: usize) -> f64 {
    if label == class {
        1.0
    } else {
        0.0
    }
}

/// Negative gradient `r - p` and diagonal Hessian `p(1-p)` of the loss with
/// respect to the unconstrained score of `class`.
pub fn logit_residuals(
    probs: &[f64],
    labels: &[usize],
    num_classes: usize,
    class: usize,
) -> Vec<GradientPair> {
    probs
        .chunks_exact(num_classes)
        .zip(labels)
        .map(|(p, &y)| {
            let pk = p[class];
            GradientPair::new(indicator(y, class) - pk, pk * (1.0 - pk))
        })
        .collect()
}

/// Negative gradient and Hessian with respect to the score of `class` when
/// `base` carries minus the sum of all other scores:
/// `g = (r_k - p_k) - (r_b - p_b)`,
/// `h = p_b(1-p_b) + p_k(1-p_k) + 2 p_b p_k`.
pub fn abc_residuals(
    probs: &[f64],
    labels: &[usize],
    num_classes: usize,
    class: usize,
    base: usize,
) -> Result<Vec<GradientPair>> {
    if class == base {
        return Err(Error::BaseIsClass { class });
    }
    Ok(probs
        .chunks_exact(num_classes)
        .zip(labels)
        .map(|(p, &y)| {
            let (pk, pb) = (p[class], p[base]);
            let g = (indicator(y, class) - pk) - (indicator(y, base) - pb);
            let h = pb * (1.0 - pb) + pk * (1.0 - pk) + 2.0 * pb * pk;
            GradientPair::new(g, h)
        })
        .collect())
}

/// Working response of classic logitboost with its implementation
/// protections: `1/p` for the true class, `-1/(1-p)` otherwise, clipped to
/// `[-z_max, z_max]`.
#[inline]
pub fn classic_response(p: f64, is_class: bool, z_max: f64) -> f64 {
    let z = if is_class { 1.0 / p } else { -1.0 / (1.0 - p) };
    z.clamp(-z_max, z_max)
}

/// Weighted least-squares inputs for classic logitboost: `g = z w`, `h = w`
/// with `w = p(1-p)`. Also returns the largest `|z|` used.
pub fn classic_pairs(
    probs: &[f64],
    labels: &[usize],
    num_classes: usize,
    class: usize,
    z_max: f64,
) -> (Vec<GradientPair>, f64) {
    let mut max_abs = 0.0f64;
    let pairs = probs
        .chunks_exact(num_classes)
        .zip(labels)
        .map(|(p, &y)| {
            let pk = p[class];
            let w = pk * (1.0 - pk);
            let z = classic_response(pk, y == class, z_max);
            max_abs = max_abs.max(z.abs());
            GradientPair::new(z * w, w)
        })
        .collect();
    (pairs, max_abs)
}
