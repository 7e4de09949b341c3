//! Pool of per-feature Gaussian naive-Bayes weak classifiers with online
//! updates, and the strong response over a selected subset.
//!
//! Each compressed feature gets class-conditional Gaussians for the positive
//! and negative class. The weak classifier is the log-likelihood ratio; the
//! strong classifier sums the ratios of the selected features. Online updates
//! blend batch statistics into the running parameters with a learning rate,
//! so the appearance model adapts while keeping memory of earlier frames.

use crate::{Error, Result};

/// Class-conditional Gaussian parameters of one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    pub mu_pos: f64,
    pub sigma_pos: f64,
    pub mu_neg: f64,
    pub sigma_neg: f64,
}

impl GaussianPair {
    /// Symmetric pair; its log-ratio is zero everywhere.
    pub fn neutral() -> Self {
        Self {
            mu_pos: 0.0,
            sigma_pos: 1.0,
            mu_neg: 0.0,
            sigma_neg: 1.0,
        }
    }
}

/// Which side of a [`GaussianPair`] an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleClass {
    Negative,
    Positive,
}

/// All per-feature Gaussians plus the shared update parameters.
#[derive(Debug, Clone)]
pub struct ClassifierPool {
    pub params: Vec<GaussianPair>,
    /// Learning rate: weight kept by the old parameters at every update.
    pub lambda: f64,
    /// Lower bound enforced on every stored standard deviation.
    pub sigma_floor: f64,
}

impl ClassifierPool {
    pub fn new(features: usize, lambda: f64, sigma_floor: f64) -> Self {
        Self {
            params: vec![GaussianPair::neutral(); features],
            lambda,
            sigma_floor,
        }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
}

/// Log-likelihood ratio of one feature value under a pair of Gaussians,
/// `log N(v; pos) - log N(v; neg)`, evaluated in log space. The shared
/// `-log sqrt(2 pi)` term cancels.
pub fn weak_log_ratio(value: f64, p: &GaussianPair) -> f64 {
    let dp = value - p.mu_pos;
    let dn = value - p.mu_neg;
    p.sigma_neg.ln() - p.sigma_pos.ln() + dn * dn / (2.0 * p.sigma_neg * p.sigma_neg)
        - dp * dp / (2.0 * p.sigma_pos * p.sigma_pos)
}

/// Strong-classifier response: the sum of weak log-ratios over the selected
/// feature indices.
pub fn strong_response(features: &[f64], pool: &ClassifierPool, selected: &[usize]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::InvalidInput(
            "strong response needs at least one selected feature".into(),
        ));
    }
    let mut sum = 0.0;
    for &i in selected {
        let pair = pool
            .params
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("selected feature index {i} out of range")))?;
        let value = *features.get(i).ok_or_else(|| {
            Error::InvalidInput(format!("feature vector has no entry for index {i}"))
        })?;
        sum += weak_log_ratio(value, pair);
    }
    Ok(sum)
}

/// Mean and population standard deviation of a batch, importance-weighted
/// when weights are given (weights must be non-negative and sum to one).
pub fn batch_stats(values: &[f64], weights: Option<&[f64]>) -> (f64, f64) {
    assert!(!values.is_empty(), "batch statistics need at least one value");
    match weights {
        Some(w) => {
            debug_assert_eq!(w.len(), values.len());
            debug_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let mean: f64 = values.iter().zip(w).map(|(v, w)| v * w).sum();
            let var: f64 = values
                .iter()
                .zip(w)
                .map(|(v, w)| w * (v - mean) * (v - mean))
                .sum();
            (mean, var.max(0.0).sqrt())
        }
        None => {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (mean, var.max(0.0).sqrt())
        }
    }
}

/// Blends batch statistics into the class-matching side of a pair:
/// `mu <- lambda * mu + (1 - lambda) * mu_batch` and
/// `sigma <- sqrt(lambda * sigma^2 + (1 - lambda) * sigma_batch^2
///                + lambda * (1 - lambda) * (mu - mu_batch)^2)`,
/// with the result clamped to `sigma_floor`. `lambda = 0` replaces the
/// parameters with the batch statistics; `lambda = 1` leaves them unchanged.
pub fn update_pair(
    p: &GaussianPair,
    values: &[f64],
    weights: Option<&[f64]>,
    class: SampleClass,
    lambda: f64,
    sigma_floor: f64,
) -> GaussianPair {
    let (mu_batch, sigma_batch) = batch_stats(values, weights);
    let (mu_old, sigma_old) = match class {
        SampleClass::Positive => (p.mu_pos, p.sigma_pos),
        SampleClass::Negative => (p.mu_neg, p.sigma_neg),
    };
    let mu = lambda * mu_old + (1.0 - lambda) * mu_batch;
    let var = lambda * sigma_old * sigma_old
        + (1.0 - lambda) * sigma_batch * sigma_batch
        + lambda * (1.0 - lambda) * (mu_old - mu_batch) * (mu_old - mu_batch);
    let sigma = var.max(0.0).sqrt().max(sigma_floor);
    let mut out = *p;
    match class {
        SampleClass::Positive => {
            out.mu_pos = mu;
            out.sigma_pos = sigma;
        }
        SampleClass::Negative => {
            out.mu_neg = mu;
            out.sigma_neg = sigma;
        }
    }
    out
}
