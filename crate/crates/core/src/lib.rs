//! Real-time visual object tracking with sparse compressive sub-region
//! features, an online naive-Bayes classifier pool, weighted multiple-instance
//! feature selection and a coarse-to-fine sliding-window search.
//!
//! The per-frame loop:
//!
//! 1. **Coarse search** — score a wide, strided candidate grid around the
//!    previous position with the strong classifier and keep the argmax.
//! 2. **Fine search** — rescore a dense unit-stride grid around the coarse
//!    maximum; its argmax is the new position.
//! 3. **Sampling** — crop positive candidates near the new position and
//!    negatives from a surrounding annulus; positives carry importance
//!    weights that decay with distance to the tracked position.
//! 4. **Update** — gate out occluded sub-regions, refresh the per-feature
//!    Gaussians, and re-select the most discriminative features by greedy
//!    bag-likelihood maximization.
//!
//! [`eval`] adds center-error/overlap metrics, precision/success curves and
//! one-pass evaluation; [`synth`] generates deterministic synthetic sequences
//! with exact ground truth so whole runs are verifiable without external
//! datasets. Everything stochastic flows from one seeded stream, so runs are
//! bit-reproducible.

pub mod app;
pub mod bayes;
pub mod config;
mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod io;
pub mod synth;
pub mod tracker;
pub mod wmil;

pub use config::TrackerConfig;
pub use error::{Error, Result};
pub use geometry::{BoundingBox, Frame, IntegralImage, LatticeDisk};
pub use tracker::{FrameDiagnostics, Tracker};
