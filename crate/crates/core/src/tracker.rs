//! Per-frame tracking: coarse-to-fine detection, bag sampling, occlusion
//! gating, classifier updates and feature re-selection.
//!
//! Detection always runs with the previous frame's selected features and
//! parameters; the model is updated only after the new position is fixed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bayes::{update_pair, weak_log_ratio, ClassifierPool, SampleClass};
use crate::config::TrackerConfig;
use crate::features::{
    extract_features, generate_layout, generate_pool, FeaturePool, RectBounds,
};
use crate::geometry::{
    enumerate_positions, integral_image, subsample_positions, BoundingBox, Frame, IntegralImage,
    LatticeDisk,
};
use crate::wmil::{select_features_among, BagInstance, SampleBag};
use crate::{Error, Result};

/// Result of one sliding-window search.
#[derive(Debug, Clone, Copy)]
pub struct Detection {
    /// Anchor of the best-scoring candidate box.
    pub position: (i32, i32),
    /// Strong-classifier response of that candidate.
    pub score: f64,
    /// Number of candidates scored.
    pub candidates: usize,
}

/// Exhaustively scores every lattice candidate around `center` with the
/// strong classifier over `selected` and returns the exact argmax; ties go to
/// the first candidate in scan order.
pub fn detect(
    ii: &IntegralImage,
    pool: &FeaturePool,
    classifier: &ClassifierPool,
    selected: &[usize],
    center: (i32, i32),
    radius: f64,
    step: u32,
) -> Result<Detection> {
    if selected.is_empty() {
        return Err(Error::InvalidInput(
            "detection needs at least one selected feature".into(),
        ));
    }
    let disk = LatticeDisk::solid(center, radius, step);
    let candidates = enumerate_positions(
        &disk,
        pool.layout().sample_size(),
        (ii.width(), ii.height()),
    );
    let mut best: Option<Detection> = None;
    for &anchor in &candidates {
        let mut score = 0.0;
        for &i in selected {
            let value = pool.feature_value_unchecked(ii, anchor, i);
            score += weak_log_ratio(value, &classifier.params[i]);
        }
        if best.map_or(true, |b| score > b.score) {
            best = Some(Detection {
                position: anchor,
                score,
                candidates: candidates.len(),
            });
        }
    }
    best.ok_or_else(|| Error::TrackingLost {
        frame: 0,
        reason: format!(
            "no candidate positions inside radius {radius} around ({}, {})",
            center.0, center.1
        ),
    })
}

/// Per-sub-region occlusion verdicts: a sub-region is flagged when the mean
/// weak response of the features rooted in it, evaluated at the tracked
/// position, falls below `threshold`. Sub-regions without any features stay
/// unflagged.
///
/// The average runs over the whole per-region feature population, not only
/// the currently selected subset: a flagged region drops out of selection,
/// and an average over selected features alone would then go blind to that
/// region one frame later, let its statistics absorb the occluder and lock
/// the tracker onto it.
pub fn gate_occluded_subregions(
    pool: &FeaturePool,
    classifier: &ClassifierPool,
    tracked_features: &[f64],
    threshold: f64,
) -> Vec<bool> {
    let n_s = pool.layout().len();
    let mut sums = vec![0.0f64; n_s];
    let mut counts = vec![0usize; n_s];
    for (i, template) in pool.templates().iter().enumerate() {
        sums[template.region] += weak_log_ratio(tracked_features[i], &classifier.params[i]);
        counts[template.region] += 1;
    }
    (0..n_s)
        .map(|r| counts[r] > 0 && sums[r] / (counts[r] as f64) < threshold)
        .collect()
}

/// Everything the tracker reports about one processed frame.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FrameDiagnostics {
    pub frame: usize,
    pub position: BoundingBox,
    pub coarse_anchor: (i32, i32),
    pub coarse_score: f64,
    pub fine_score: f64,
    pub coarse_candidates: usize,
    pub fine_candidates: usize,
    pub positives: usize,
    pub negatives: usize,
    pub occlusion_flags: Vec<bool>,
    /// False when the gating fail-safe kicked in and every feature was
    /// updated regardless of flags.
    pub gating_active: bool,
}

/// Online tracker state: feature pool, classifier, current selection and
/// position, plus the seeded random stream that makes runs reproducible.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    pool: FeaturePool,
    classifier: ClassifierPool,
    selected: Vec<usize>,
    position: BoundingBox,
    frame_index: usize,
    frame_size: (u32, u32),
    occlusion_flags: Vec<bool>,
    rng: ChaCha8Rng,
}

impl Tracker {
    /// Initializes the tracker on the first frame: generates the sub-region
    /// layout and the feature pool, seeds the classifier with first-batch
    /// statistics from samples around `init_box`, and runs the initial
    /// feature selection.
    pub fn new(frame: &Frame, init_box: BoundingBox, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        if !init_box.fits(frame.width(), frame.height()) {
            return Err(Error::InvalidInput(format!(
                "initial box ({}, {}) {}x{} leaves the {}x{} frame",
                init_box.x,
                init_box.y,
                init_box.w,
                init_box.h,
                frame.width(),
                frame.height()
            )));
        }

        let sample_size = (init_box.w, init_box.h);
        let subregion_size = (
            (init_box.w as f64 * config.subregion_fraction).ceil() as u32,
            (init_box.h as f64 * config.subregion_fraction).ceil() as u32,
        );
        let bounds = RectBounds {
            w_min: config.w_min,
            h_min: config.h_min,
            beta_min: config.beta_min,
            beta_max: config.beta_max,
        };

        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let layout = generate_layout(sample_size, subregion_size, config.n_s, &mut rng)?;
        let pool = generate_pool(layout, config.m_features, &bounds, &mut rng)?;

        let ii = integral_image(frame)?;
        let anchor = init_box.anchor();
        let frame_size = (frame.width(), frame.height());
        let (pos_bag, neg_bag) = sample_bags(
            &ii,
            &pool,
            anchor,
            sample_size,
            frame_size,
            &config,
            &mut rng,
        )?;

        // First frame: no prior exists, so both sides take the batch
        // statistics directly (a zero-lambda update).
        let mut classifier =
            ClassifierPool::new(config.m_features, config.lambda, config.sigma_floor);
        update_classifier(&mut classifier, &pos_bag, &neg_bag, &(0..config.m_features).collect::<Vec<_>>(), 0.0);

        let all: Vec<usize> = (0..config.m_features).collect();
        let selection =
            select_features_among(&classifier, &pos_bag, &neg_bag, config.k_selected, &all)?;

        Ok(Self {
            occlusion_flags: vec![false; config.n_s],
            pool,
            classifier,
            selected: selection.selected,
            position: init_box,
            frame_index: frame.index,
            frame_size,
            rng,
            config,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn pool(&self) -> &FeaturePool {
        &self.pool
    }

    pub fn classifier(&self) -> &ClassifierPool {
        &self.classifier
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn position(&self) -> BoundingBox {
        self.position
    }

    pub fn occlusion_flags(&self) -> &[bool] {
        &self.occlusion_flags
    }

    /// Sliding-window search around `center` using the current selection.
    pub fn detect_at(
        &self,
        ii: &IntegralImage,
        center: (i32, i32),
        radius: f64,
        step: u32,
    ) -> Result<Detection> {
        detect(
            ii,
            &self.pool,
            &self.classifier,
            &self.selected,
            center,
            radius,
            step,
        )
    }

    /// Processes the next frame: coarse detection around the previous
    /// position, fine detection around the coarse maximum, then bag
    /// sampling, occlusion gating, classifier update and re-selection.
    ///
    /// On error the tracker state is left untouched.
    pub fn track_frame(&mut self, frame: &Frame) -> Result<(BoundingBox, FrameDiagnostics)> {
        if (frame.width(), frame.height()) != self.frame_size {
            return Err(Error::InvalidInput(format!(
                "frame is {}x{}, tracker was initialized on {}x{}",
                frame.width(),
                frame.height(),
                self.frame_size.0,
                self.frame_size.1
            )));
        }
        let ii = integral_image(frame)?;
        let frame_index = self.frame_index + 1;

        let coarse = self
            .detect_at(&ii, self.position.anchor(), self.config.r_c, self.config.omega_c)
            .map_err(|e| lost_at(e, frame_index))?;
        let fine = self
            .detect_at(&ii, coarse.position, self.config.r_f, self.config.omega_f)
            .map_err(|e| lost_at(e, frame_index))?;

        let anchor = fine.position;
        let sample_size = (self.position.w, self.position.h);
        // The last fallible step; the random stream and the model are only
        // touched afterwards, so failed frames leave the state intact.
        let (pos_bag, neg_bag) = sample_bags(
            &ii,
            &self.pool,
            anchor,
            sample_size,
            self.frame_size,
            &self.config,
            &mut self.rng,
        )?;

        // The tracked anchor is always a member of the positive sample set.
        let tracked_features = &pos_bag
            .instances
            .iter()
            .find(|inst| inst.position == anchor)
            .expect("tracked position missing from positive bag")
            .features;
        let flags = gate_occluded_subregions(
            &self.pool,
            &self.classifier,
            tracked_features,
            self.config.occlusion_threshold,
        );

        let mut allowed: Vec<usize> = (0..self.pool.len())
            .filter(|&i| !flags[self.pool.templates()[i].region])
            .collect();
        // Fail-safe: with every sub-region flagged (or too few features left
        // to select from) gating is suspended for this frame.
        let gating_active = allowed.len() >= self.config.k_selected;
        if !gating_active {
            allowed = (0..self.pool.len()).collect();
        }

        update_classifier(
            &mut self.classifier,
            &pos_bag,
            &neg_bag,
            &allowed,
            self.config.lambda,
        );
        let selection = select_features_among(
            &self.classifier,
            &pos_bag,
            &neg_bag,
            self.config.k_selected,
            &allowed,
        )?;

        self.selected = selection.selected;
        self.position = self.position.at(anchor.0, anchor.1);
        self.frame_index = frame_index;
        self.occlusion_flags = flags.clone();

        let diagnostics = FrameDiagnostics {
            frame: frame_index,
            position: self.position,
            coarse_anchor: coarse.position,
            coarse_score: coarse.score,
            fine_score: fine.score,
            coarse_candidates: coarse.candidates,
            fine_candidates: fine.candidates,
            positives: pos_bag.len(),
            negatives: neg_bag.len(),
            occlusion_flags: flags,
            gating_active,
        };
        Ok((self.position, diagnostics))
    }
}

fn lost_at(e: Error, frame: usize) -> Error {
    match e {
        Error::TrackingLost { reason, .. } => Error::TrackingLost { frame, reason },
        other => other,
    }
}

/// Crops the positive disk and the negative annulus around `anchor`,
/// extracts the feature vectors and builds both bags. The negative annulus
/// is subsampled to the configured count.
fn sample_bags(
    ii: &IntegralImage,
    pool: &FeaturePool,
    anchor: (i32, i32),
    sample_size: (u32, u32),
    frame_size: (u32, u32),
    config: &TrackerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(SampleBag, SampleBag)> {
    let positive_disk = LatticeDisk::solid(anchor, config.alpha, 1);
    let pos_positions = enumerate_positions(&positive_disk, sample_size, frame_size);
    let negative_disk = LatticeDisk::annulus(anchor, config.delta, config.beta, 1);
    let neg_annulus = enumerate_positions(&negative_disk, sample_size, frame_size);
    if neg_annulus.is_empty() {
        return Err(Error::InvalidInput(
            "negative sampling annulus is empty; the frame is too small for the configured radii"
                .into(),
        ));
    }
    let neg_positions = subsample_positions(&neg_annulus, config.n_negatives, rng);

    let instances = |positions: &[(i32, i32)]| -> Result<Vec<BagInstance>> {
        positions
            .iter()
            .map(|&p| {
                Ok(BagInstance {
                    position: p,
                    features: extract_features(ii, p, pool)?,
                })
            })
            .collect()
    };
    let pos_bag = SampleBag::positive(instances(&pos_positions)?, anchor)?;
    let neg_bag = SampleBag::negative(instances(&neg_positions)?)?;
    Ok((pos_bag, neg_bag))
}

/// Updates the Gaussian pairs of the given features: the positive side with
/// importance-weighted batch statistics, the negative side with uniform ones.
fn update_classifier(
    classifier: &mut ClassifierPool,
    pos_bag: &SampleBag,
    neg_bag: &SampleBag,
    features: &[usize],
    lambda: f64,
) {
    let sigma_floor = classifier.sigma_floor;
    let mut pos_values = vec![0.0f64; pos_bag.len()];
    let mut neg_values = vec![0.0f64; neg_bag.len()];
    for &i in features {
        for (slot, inst) in pos_values.iter_mut().zip(&pos_bag.instances) {
            *slot = inst.features[i];
        }
        for (slot, inst) in neg_values.iter_mut().zip(&neg_bag.instances) {
            *slot = inst.features[i];
        }
        let pair = &classifier.params[i];
        let pair = update_pair(
            pair,
            &pos_values,
            Some(&pos_bag.weights),
            SampleClass::Positive,
            lambda,
            sigma_floor,
        );
        classifier.params[i] = update_pair(
            &pair,
            &neg_values,
            None,
            SampleClass::Negative,
            lambda,
            sigma_floor,
        );
    }
}
