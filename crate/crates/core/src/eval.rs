//! Tracking metrics and one-pass evaluation: center location error,
//! bounding-box overlap, precision/success curves with AUC, and `run_ope`
//! driving a tracker over a whole sequence against ground truth.

use std::time::Instant;

use crate::config::TrackerConfig;
use crate::geometry::{BoundingBox, Frame};
use crate::tracker::Tracker;
use crate::{Error, Result};

/// Per-frame comparison of the tracker output against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FrameResult {
    /// 0-based frame index.
    pub frame: usize,
    pub tracker: BoundingBox,
    pub truth: BoundingBox,
    pub cle: f64,
    pub overlap: f64,
}

impl FrameResult {
    pub fn new(frame: usize, tracker: BoundingBox, truth: BoundingBox) -> Self {
        Self {
            frame,
            tracker,
            truth,
            cle: cle(&tracker, &truth),
            overlap: overlap(&tracker, &truth),
        }
    }

    /// Header of the per-frame CSV serialization (frame column 1-indexed).
    pub fn csv_header() -> &'static str {
        "frame,x,y,w,h,gt_x,gt_y,gt_w,gt_h,cle,overlap"
    }

    /// One CSV row, 1-indexed coordinates matching the ground-truth file
    /// convention.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.frame + 1,
            self.tracker.x + 1,
            self.tracker.y + 1,
            self.tracker.w,
            self.tracker.h,
            self.truth.x + 1,
            self.truth.y + 1,
            self.truth.w,
            self.truth.h,
            self.cle,
            self.overlap
        )
    }
}

/// Center location error: the Euclidean distance between box centers.
pub fn cle(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    ((ax - bx) * (ax - bx) + (ay - by) * (ay - by)).sqrt()
}

/// Intersection-over-union on continuous rectangle areas; 0 for disjoint
/// boxes, 1 only for identical ones.
pub fn overlap(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.right().min(b.right()) - a.x.max(b.x)).max(0) as f64;
    let iy = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0) as f64;
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    inter / union
}

/// A sampled metric curve: values over a threshold grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Curve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

/// Fraction of frames with CLE at most tau, for tau = 0, 1, ..., 50.
pub fn precision_curve(results: &[FrameResult]) -> Curve {
    assert!(!results.is_empty(), "precision curve needs results");
    let n = results.len() as f64;
    let thresholds: Vec<f64> = (0..=50).map(|t| t as f64).collect();
    let values = thresholds
        .iter()
        .map(|&tau| results.iter().filter(|r| r.cle <= tau).count() as f64 / n)
        .collect();
    Curve { thresholds, values }
}

/// Fraction of frames with overlap at least theta, for theta = 0, 0.05, ...,
/// 1, plus the trapezoidal area under the curve.
pub fn success_curve(results: &[FrameResult]) -> (Curve, f64) {
    assert!(!results.is_empty(), "success curve needs results");
    let n = results.len() as f64;
    let thresholds: Vec<f64> = (0..=20).map(|t| t as f64 * 0.05).collect();
    let values: Vec<f64> = thresholds
        .iter()
        .map(|&theta| results.iter().filter(|r| r.overlap >= theta).count() as f64 / n)
        .collect();
    let mut auc = 0.0;
    for i in 0..values.len() - 1 {
        auc += 0.05 * (values[i] + values[i + 1]) / 2.0;
    }
    (Curve { thresholds, values }, auc)
}

/// Sequence-level metrics of one run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RunSummary {
    pub frames: usize,
    pub mean_cle: f64,
    /// Fraction of frames with overlap strictly above 0.5.
    pub success_rate: f64,
    /// Precision-curve value at a 20 px error threshold.
    pub precision_at_20: f64,
    pub auc: f64,
    /// Mean processed frames per second over the whole run.
    pub fps: f64,
    /// Frame index where tracking was declared lost, if it was.
    pub lost_at: Option<usize>,
}

/// Computes the summary of a finished run.
pub fn summarize(results: &[FrameResult], fps: f64, lost_at: Option<usize>) -> RunSummary {
    assert!(!results.is_empty(), "summary needs results");
    let n = results.len() as f64;
    let mean_cle = results.iter().map(|r| r.cle).sum::<f64>() / n;
    let success_rate = results.iter().filter(|r| r.overlap > 0.5).count() as f64 / n;
    let precision = precision_curve(results);
    let (_, auc) = success_curve(results);
    RunSummary {
        frames: results.len(),
        mean_cle,
        success_rate,
        precision_at_20: precision.values[20],
        auc,
        fps,
        lost_at,
    }
}

/// Scores the remaining frames with the last known box after a loss.
pub(crate) fn extend_with_last(
    results: &mut Vec<FrameResult>,
    truth: &[BoundingBox],
    last_box: BoundingBox,
    from: usize,
) {
    for (t, gt) in truth.iter().enumerate().skip(from) {
        results.push(FrameResult::new(t, last_box, *gt));
    }
}

/// One-pass evaluation: initialize from the first frame's ground truth, track
/// every following frame without re-initialization, and score each frame.
/// A lost track keeps scoring with the last known box and is recorded in the
/// summary.
pub fn run_ope(
    config: &TrackerConfig,
    frames: &[Frame],
    truth: &[BoundingBox],
) -> Result<(Vec<FrameResult>, RunSummary)> {
    if frames.is_empty() {
        return Err(Error::InvalidInput("sequence has no frames".into()));
    }
    if truth.len() < frames.len() {
        return Err(Error::InvalidInput(format!(
            "ground truth covers {} frames, sequence has {}",
            truth.len(),
            frames.len()
        )));
    }
    let start = Instant::now();
    let mut tracker = Tracker::new(&frames[0], truth[0], config.clone())?;
    let mut results = vec![FrameResult::new(0, truth[0], truth[0])];
    let mut lost_at = None;
    for (t, frame) in frames.iter().enumerate().skip(1) {
        match tracker.track_frame(frame) {
            Ok((pos, _)) => results.push(FrameResult::new(t, pos, truth[t])),
            Err(Error::TrackingLost { .. }) => {
                lost_at = Some(t);
                extend_with_last(&mut results, truth, tracker.position(), t);
                break;
            }
            Err(other) => return Err(other),
        }
    }
    let elapsed = start.elapsed().as_secs_f64().max(1e-9);
    let fps = frames.len() as f64 / elapsed;
    let summary = summarize(&results, fps, lost_at);
    Ok((results, summary))
}
