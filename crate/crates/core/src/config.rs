//! Tracker configuration: defaults, validation and the line-oriented
//! `key = value` file format.

use std::path::Path;

use crate::{Error, Result};

/// All tunable parameters of the tracker.
///
/// Distances and radii are in pixels. `occlusion_threshold` may be set to
/// `-inf` to disable occlusion gating entirely.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrackerConfig {
    /// Positive sampling radius: candidates closer than this to the tracked
    /// position form the positive bag.
    pub alpha: f64,
    /// Inner radius of the negative sampling annulus.
    pub delta: f64,
    /// Outer radius of the negative sampling annulus.
    pub beta: f64,
    /// Negative samples drawn per frame.
    pub n_negatives: usize,
    /// Number of sub-regions the sample box is covered with.
    pub n_s: usize,
    /// Learning rate of the online Gaussian updates.
    pub lambda: f64,
    /// Size of the compressed feature pool.
    pub m_features: usize,
    /// Features kept by the greedy selection.
    pub k_selected: usize,
    /// Coarse search radius.
    pub r_c: f64,
    /// Coarse search stride.
    pub omega_c: u32,
    /// Fine search radius.
    pub r_f: f64,
    /// Fine search stride.
    pub omega_f: u32,
    /// Sub-region extent as a fraction of the sample extent (rounded up).
    pub subregion_fraction: f64,
    /// Lower rectangle-size fraction of the sub-region extent.
    pub beta_min: f64,
    /// Upper rectangle-size fraction of the sub-region extent.
    pub beta_max: f64,
    /// Minimum rectangle width in pixels.
    pub w_min: u32,
    /// Minimum rectangle height in pixels.
    pub h_min: u32,
    /// Lower bound on every stored standard deviation.
    pub sigma_floor: f64,
    /// Sub-regions whose mean selected-feature response falls below this are
    /// gated out of the frame's update and selection.
    pub occlusion_threshold: f64,
    /// Seed of the tracker's random stream.
    pub rng_seed: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            alpha: 4.0,
            delta: 8.0,
            beta: 22.0,
            n_negatives: 50,
            n_s: 4,
            lambda: 0.9,
            m_features: 100,
            k_selected: 20,
            r_c: 25.0,
            omega_c: 4,
            r_f: 10.0,
            omega_f: 1,
            subregion_fraction: 0.5,
            beta_min: 0.3,
            beta_max: 0.7,
            w_min: 3,
            h_min: 3,
            sigma_floor: 1e-2,
            occlusion_threshold: 0.0,
            rng_seed: 0,
        }
    }
}

impl TrackerConfig {
    /// Checks every cross-field invariant, naming the violated constraint.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha < self.delta && self.delta < self.beta) {
            return fail(format!(
                "radii must satisfy 0 < alpha < delta < beta, got alpha = {}, delta = {}, beta = {}",
                self.alpha, self.delta, self.beta
            ));
        }
        if self.omega_f < 1 || self.omega_c <= self.omega_f {
            return fail(format!(
                "strides must satisfy omega_c > omega_f >= 1, got omega_c = {}, omega_f = {}",
                self.omega_c, self.omega_f
            ));
        }
        if !(self.r_f > 0.0 && self.r_f <= self.r_c) {
            return fail(format!(
                "radii must satisfy 0 < r_f <= r_c, got r_f = {}, r_c = {}",
                self.r_f, self.r_c
            ));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return fail(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if self.n_s == 0 {
            return fail("n_s must be at least 1".into());
        }
        if self.n_negatives == 0 {
            return fail("n_negatives must be at least 1".into());
        }
        if self.k_selected == 0 || self.k_selected > self.m_features {
            return fail(format!(
                "selection must satisfy 1 <= k_selected <= m_features, got k_selected = {}, m_features = {}",
                self.k_selected, self.m_features
            ));
        }
        if !(self.beta_min > 0.0 && self.beta_min <= self.beta_max && self.beta_max <= 1.0) {
            return fail(format!(
                "rectangle fractions must satisfy 0 < beta_min <= beta_max <= 1, got beta_min = {}, beta_max = {}",
                self.beta_min, self.beta_max
            ));
        }
        if !(self.subregion_fraction > 0.0 && self.subregion_fraction <= 1.0) {
            return fail(format!(
                "subregion_fraction must lie in (0, 1], got {}",
                self.subregion_fraction
            ));
        }
        if !(self.sigma_floor > 0.0) {
            return fail(format!(
                "sigma_floor must be positive, got {}",
                self.sigma_floor
            ));
        }
        if self.w_min == 0 || self.h_min == 0 {
            return fail("w_min and h_min must be at least 1".into());
        }
        Ok(())
    }

    /// Applies one `key = value` assignment. Unknown keys are errors so
    /// typos never silently fall back to defaults.
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        macro_rules! parse {
            ($field:ident, $ty:ty) => {{
                self.$field = value
                    .parse::<$ty>()
                    .map_err(|_| format!("invalid value '{value}' for key '{key}'"))?;
            }};
        }
        match key {
            "alpha" => parse!(alpha, f64),
            "delta" => parse!(delta, f64),
            "beta" => parse!(beta, f64),
            "n_negatives" => parse!(n_negatives, usize),
            "n_s" => parse!(n_s, usize),
            "lambda" => parse!(lambda, f64),
            "m_features" => parse!(m_features, usize),
            "k_selected" => parse!(k_selected, usize),
            "r_c" => parse!(r_c, f64),
            "omega_c" => parse!(omega_c, u32),
            "r_f" => parse!(r_f, f64),
            "omega_f" => parse!(omega_f, u32),
            "subregion_fraction" => parse!(subregion_fraction, f64),
            "beta_min" => parse!(beta_min, f64),
            "beta_max" => parse!(beta_max, f64),
            "w_min" => parse!(w_min, u32),
            "h_min" => parse!(h_min, u32),
            "sigma_floor" => parse!(sigma_floor, f64),
            "occlusion_threshold" => parse!(occlusion_threshold, f64),
            "rng_seed" => parse!(rng_seed, u64),
            _ => return Err(format!("unknown configuration key '{key}'")),
        }
        Ok(())
    }

    /// Parses the `key = value` text form. Missing keys keep their defaults;
    /// blank lines and `#` comments are ignored.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(source, idx + 1, format!("expected 'key = value', got '{line}'"))
            })?;
            config
                .set(key.trim(), value.trim())
                .map_err(|msg| Error::parse(source, idx + 1, msg))?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Serializes every field as `key = value`, one per line. Floats use the
    /// shortest round-trip representation, so `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        format!(
            "alpha = {}\ndelta = {}\nbeta = {}\nn_negatives = {}\nn_s = {}\nlambda = {}\n\
             m_features = {}\nk_selected = {}\nr_c = {}\nomega_c = {}\nr_f = {}\nomega_f = {}\n\
             subregion_fraction = {}\nbeta_min = {}\nbeta_max = {}\nw_min = {}\nh_min = {}\n\
             sigma_floor = {}\nocclusion_threshold = {}\nrng_seed = {}\n",
            self.alpha,
            self.delta,
            self.beta,
            self.n_negatives,
            self.n_s,
            self.lambda,
            self.m_features,
            self.k_selected,
            self.r_c,
            self.omega_c,
            self.r_f,
            self.omega_f,
            self.subregion_fraction,
            self.beta_min,
            self.beta_max,
            self.w_min,
            self.h_min,
            self.sigma_floor,
            self.occlusion_threshold,
            self.rng_seed,
        )
    }
}

/// Loads a configuration file, or the defaults when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> Result<TrackerConfig> {
    match path {
        None => Ok(TrackerConfig::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?;
            TrackerConfig::parse(&text, &p.display().to_string())
        }
    }
}
