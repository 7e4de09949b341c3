//! Weighted multiple-instance learning: labeled sample bags, distance-decayed
//! positive-instance weights, bag likelihoods and the greedy selection of the
//! most discriminative weak classifiers.

use crate::bayes::{weak_log_ratio, ClassifierPool};
use crate::{Error, Result};

/// Probability clamp applied before logarithms; saturated sigmoids would
/// otherwise produce infinite log-likelihoods.
pub const PROB_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BagLabel {
    Positive,
    Negative,
}

/// One candidate patch: its anchor position and compressed feature vector.
#[derive(Debug, Clone)]
pub struct BagInstance {
    pub position: (i32, i32),
    pub features: Vec<f64>,
}

/// A labeled set of instances. Positive bags carry importance weights that
/// sum to one; negative bags are treated uniformly.
#[derive(Debug, Clone)]
pub struct SampleBag {
    pub label: BagLabel,
    pub instances: Vec<BagInstance>,
    pub weights: Vec<f64>,
}

impl SampleBag {
    /// Positive bag with weights decaying in the distance to the tracked
    /// position.
    pub fn positive(instances: Vec<BagInstance>, tracked: (i32, i32)) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::InvalidInput("positive bag has no instances".into()));
        }
        let positions: Vec<(i32, i32)> = instances.iter().map(|i| i.position).collect();
        let weights = positive_weights(&positions, tracked);
        Ok(Self {
            label: BagLabel::Positive,
            instances,
            weights,
        })
    }

    /// Negative bag with uniform weights.
    pub fn negative(instances: Vec<BagInstance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::InvalidInput("negative bag has no instances".into()));
        }
        let n = instances.len();
        Ok(Self {
            label: BagLabel::Negative,
            instances,
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Importance weights for positive samples: proportional to
/// `exp(-||pos - tracked||)`, normalized to sum to one.
pub fn positive_weights(positions: &[(i32, i32)], tracked: (i32, i32)) -> Vec<f64> {
    let raw: Vec<f64> = positions
        .iter()
        .map(|&(x, y)| {
            let dx = (x - tracked.0) as f64;
            let dy = (y - tracked.1) as f64;
            (-(dx * dx + dy * dy).sqrt()).exp()
        })
        .collect();
    let norm: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / norm).collect()
}

/// Logistic link from a strong-classifier score to an instance probability.
pub fn instance_probability(h: f64) -> f64 {
    1.0 / (1.0 + (-h).exp())
}

/// Positive-bag probability: the importance-weighted sum of instance
/// probabilities (weights sum to one).
pub fn positive_bag_probability(instance_probs: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(instance_probs.len(), weights.len());
    instance_probs
        .iter()
        .zip(weights)
        .map(|(p, w)| p * w)
        .sum()
}

/// Negative-bag probability: the uniform mean of instance complements.
pub fn negative_bag_probability(instance_probs: &[f64]) -> f64 {
    debug_assert!(!instance_probs.is_empty());
    instance_probs.iter().map(|p| 1.0 - p).sum::<f64>() / instance_probs.len() as f64
}

/// Bag log-likelihood `log p(pos bag) + log p(neg bag)`, with both
/// probabilities clamped away from zero and one.
pub fn bag_log_likelihood(pos_bag_prob: f64, neg_bag_prob: f64) -> f64 {
    let clamp = |p: f64| p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    clamp(pos_bag_prob).ln() + clamp(neg_bag_prob).ln()
}

/// Outcome of the greedy feature selection.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Picked feature indices in selection order; distinct.
    pub selected: Vec<usize>,
    /// Bag log-likelihood reached after each pick.
    pub likelihood_trace: Vec<f64>,
}

/// Greedily picks the `k` weak classifiers that maximize the bag
/// log-likelihood when added to the running strong classifier. Ties break
/// toward the lowest feature index, so selection is deterministic.
pub fn select_features(
    pool: &ClassifierPool,
    pos_bag: &SampleBag,
    neg_bag: &SampleBag,
    k: usize,
) -> Result<SelectionResult> {
    let all: Vec<usize> = (0..pool.len()).collect();
    select_features_among(pool, pos_bag, neg_bag, k, &all)
}

/// [`select_features`] restricted to a candidate subset (used to keep
/// features of occluded sub-regions out of the running).
pub fn select_features_among(
    pool: &ClassifierPool,
    pos_bag: &SampleBag,
    neg_bag: &SampleBag,
    k: usize,
    candidates: &[usize],
) -> Result<SelectionResult> {
    if k > candidates.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot select {k} features from {} candidates",
            candidates.len()
        )));
    }
    if pos_bag.is_empty() || neg_bag.is_empty() {
        return Err(Error::InvalidInput("selection needs non-empty bags".into()));
    }

    // Weak responses of every candidate feature on every instance, computed
    // once; the greedy loop then only touches running sums.
    let n_pos = pos_bag.len();
    let n_neg = neg_bag.len();
    let mut resp: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
    for &m in candidates {
        let pair = pool.params.get(m).ok_or_else(|| {
            Error::InvalidInput(format!("candidate feature index {m} out of range"))
        })?;
        let mut row = Vec::with_capacity(n_pos + n_neg);
        for inst in pos_bag.instances.iter().chain(neg_bag.instances.iter()) {
            row.push(weak_log_ratio(inst.features[m], pair));
        }
        resp.push(row);
    }

    let mut running = vec![0.0f64; n_pos + n_neg];
    let mut remaining: Vec<usize> = (0..candidates.len()).collect();
    remaining.sort_unstable_by_key(|&c| candidates[c]);
    let mut selected = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);

    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (slot, &c) in remaining.iter().enumerate() {
            let row = &resp[c];
            let mut pos_prob = 0.0;
            for j in 0..n_pos {
                pos_prob +=
                    pos_bag.weights[j] * instance_probability(running[j] + row[j]);
            }
            let mut neg_sum = 0.0;
            for j in 0..n_neg {
                neg_sum += 1.0 - instance_probability(running[n_pos + j] + row[n_pos + j]);
            }
            let likelihood = bag_log_likelihood(pos_prob, neg_sum / n_neg as f64);
            // Strict improvement keeps the first (lowest-index) maximizer.
            if best.map_or(true, |(_, l)| likelihood > l) {
                best = Some((slot, likelihood));
            }
        }
        let (slot, likelihood) = best.expect("remaining candidates cannot be empty");
        let c = remaining.remove(slot);
        for (h, r) in running.iter_mut().zip(&resp[c]) {
            *h += r;
        }
        selected.push(candidates[c]);
        trace.push(likelihood);
    }

    Ok(SelectionResult {
        selected,
        likelihood_trace: trace,
    })
}
