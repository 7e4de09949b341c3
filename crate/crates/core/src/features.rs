//! Sub-region layout and sparse compressed features.
//!
//! The sample box is covered by a handful of randomly placed sub-regions.
//! Each compressed feature owns 2-4 weighted rectangles confined to one
//! sub-region; projecting a patch means summing weighted rectangle sums, so a
//! whole feature vector costs a few dozen integral-image lookups. Weight
//! magnitudes are `sqrt(rho)` with an asymmetric sign split (78% positive)
//! so the projection carries intensity as well as texture information.

use rand::Rng;

use crate::geometry::IntegralImage;
use crate::{Error, Result};

/// Probability that a generated rectangle weight is positive.
pub const POSITIVE_SIGN_PROBABILITY: f64 = 0.78;

/// Placement of the sub-regions inside the sample box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubRegionLayout {
    sample_size: (u32, u32),
    subregion_size: (u32, u32),
    /// Top-left offsets of each sub-region relative to the sample box.
    positions: Vec<(u32, u32)>,
}

impl SubRegionLayout {
    pub fn sample_size(&self) -> (u32, u32) {
        self.sample_size
    }

    pub fn subregion_size(&self) -> (u32, u32) {
        self.subregion_size
    }

    pub fn positions(&self) -> &[(u32, u32)] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let (sw, sh) = self.sample_size;
        let (w, h) = self.subregion_size;
        if w == 0 || h == 0 || w > sw || h > sh {
            return Err(Error::InvalidConfig(format!(
                "sub-region {w}x{h} does not fit a {sw}x{sh} sample"
            )));
        }
        if self.positions.is_empty() {
            return Err(Error::InvalidConfig("layout has no sub-regions".into()));
        }
        for &(x, y) in &self.positions {
            if x > sw - w || y > sh - h {
                return Err(Error::InvalidConfig(format!(
                    "sub-region anchor ({x},{y}) leaves the {sw}x{sh} sample"
                )));
            }
        }
        Ok(())
    }
}

/// One rectangle of a feature template, relative to its sub-region origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

/// One compressed feature: weighted rectangles confined to one sub-region.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTemplate {
    /// Index of the sub-region the rectangles live in.
    pub region: usize,
    pub rects: Vec<FeatureRect>,
    /// Signed weights, one per rectangle, magnitude `sqrt(rho)`.
    pub weights: Vec<f64>,
}

/// Size constraints for generated rectangles.
#[derive(Debug, Clone, Copy)]
pub struct RectBounds {
    pub w_min: u32,
    pub h_min: u32,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl RectBounds {
    /// Inclusive integer range `[max(min_px, ceil(beta_min * extent)),
    /// floor(beta_max * extent)]` for one axis.
    fn range(&self, extent: u32, min_px: u32) -> Result<(u32, u32)> {
        let lo = (self.beta_min * extent as f64).ceil() as u32;
        let lo = lo.max(min_px).max(1);
        let hi = (self.beta_max * extent as f64).floor() as u32;
        if lo > hi {
            return Err(Error::InvalidConfig(format!(
                "rectangle size range is empty for extent {extent}: \
                 max({min_px}, ceil({} * {extent})) > floor({} * {extent})",
                self.beta_min, self.beta_max
            )));
        }
        Ok((lo, hi))
    }
}

/// The full measurement matrix realization: M templates over one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePool {
    templates: Vec<FeatureTemplate>,
    layout: SubRegionLayout,
    /// Sparsity parameter, `sample pixel count / 4`; weight magnitudes are
    /// its square root.
    rho: f64,
}

impl FeaturePool {
    pub fn from_parts(
        layout: SubRegionLayout,
        templates: Vec<FeatureTemplate>,
        rho: f64,
    ) -> Result<Self> {
        layout.validate()?;
        let (w, h) = layout.subregion_size;
        for (i, t) in templates.iter().enumerate() {
            if t.region >= layout.len() {
                return Err(Error::InvalidConfig(format!(
                    "template {i} references sub-region {} of {}",
                    t.region,
                    layout.len()
                )));
            }
            if t.rects.len() < 2 || t.rects.len() > 4 || t.rects.len() != t.weights.len() {
                return Err(Error::InvalidConfig(format!(
                    "template {i} must have 2-4 rectangles with matching weights"
                )));
            }
            for r in &t.rects {
                if r.w == 0 || r.h == 0 || r.x + r.w > w || r.y + r.h > h {
                    return Err(Error::InvalidConfig(format!(
                        "template {i} rectangle ({},{}) {}x{} leaves its {w}x{h} sub-region",
                        r.x, r.y, r.w, r.h
                    )));
                }
            }
        }
        Ok(Self {
            templates,
            layout,
            rho,
        })
    }

    pub fn templates(&self) -> &[FeatureTemplate] {
        &self.templates
    }

    pub fn layout(&self) -> &SubRegionLayout {
        &self.layout
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Value of one feature for the sample anchored at `origin`. Bounds must
    /// have been checked for the sample box as a whole.
    #[inline]
    pub(crate) fn feature_value_unchecked(
        &self,
        ii: &IntegralImage,
        origin: (i32, i32),
        index: usize,
    ) -> f64 {
        let t = &self.templates[index];
        let (rx, ry) = self.layout.positions[t.region];
        let base_x = origin.0 as u32 + rx;
        let base_y = origin.1 as u32 + ry;
        let mut v = 0.0;
        for (rect, w) in t.rects.iter().zip(&t.weights) {
            let sum = ii.rect_sum_unchecked(base_x + rect.x, base_y + rect.y, rect.w, rect.h);
            v += w * sum as f64;
        }
        v
    }
}

/// Draws `n_s` sub-region anchors uniformly over the valid placement range.
pub fn generate_layout<R: Rng>(
    sample_size: (u32, u32),
    subregion_size: (u32, u32),
    n_s: usize,
    rng: &mut R,
) -> Result<SubRegionLayout> {
    let (sw, sh) = sample_size;
    let (w, h) = subregion_size;
    if n_s == 0 {
        return Err(Error::InvalidConfig("need at least one sub-region".into()));
    }
    if w == 0 || h == 0 || w > sw || h > sh {
        return Err(Error::InvalidConfig(format!(
            "sub-region {w}x{h} does not fit a {sw}x{sh} sample"
        )));
    }
    let positions = (0..n_s)
        .map(|_| (rng.random_range(0..=sw - w), rng.random_range(0..=sh - h)))
        .collect();
    Ok(SubRegionLayout {
        sample_size,
        subregion_size,
        positions,
    })
}

/// Generates `m` feature templates: a uniformly drawn sub-region, 2-4
/// rectangles with bounded sizes and uniform placement, and signed weights of
/// magnitude `sqrt(rho)` with the 0.78/0.22 sign split.
pub fn generate_pool<R: Rng>(
    layout: SubRegionLayout,
    m: usize,
    bounds: &RectBounds,
    rng: &mut R,
) -> Result<FeaturePool> {
    layout.validate()?;
    let (w, h) = layout.subregion_size;
    let (w_lo, w_hi) = bounds.range(w, bounds.w_min)?;
    let (h_lo, h_hi) = bounds.range(h, bounds.h_min)?;
    let rho = (layout.sample_size.0 as f64 * layout.sample_size.1 as f64) / 4.0;
    let magnitude = rho.sqrt();

    let mut templates = Vec::with_capacity(m);
    for _ in 0..m {
        let region = rng.random_range(0..layout.len());
        let n_rects = rng.random_range(2..=4usize);
        let mut rects = Vec::with_capacity(n_rects);
        let mut weights = Vec::with_capacity(n_rects);
        for _ in 0..n_rects {
            let rw = rng.random_range(w_lo..=w_hi);
            let rh = rng.random_range(h_lo..=h_hi);
            let rx = rng.random_range(0..=w - rw);
            let ry = rng.random_range(0..=h - rh);
            rects.push(FeatureRect {
                x: rx,
                y: ry,
                w: rw,
                h: rh,
            });
            let sign = if rng.random::<f64>() < POSITIVE_SIGN_PROBABILITY {
                1.0
            } else {
                -1.0
            };
            weights.push(sign * magnitude);
        }
        templates.push(FeatureTemplate {
            region,
            rects,
            weights,
        });
    }
    FeaturePool::from_parts(layout, templates, rho)
}

/// Projects the sample anchored at `origin` into the compressed feature
/// space: one weighted rectangle-sum accumulation per template.
pub fn extract_features(
    ii: &IntegralImage,
    origin: (i32, i32),
    pool: &FeaturePool,
) -> Result<Vec<f64>> {
    let (sw, sh) = pool.layout.sample_size;
    let sample = crate::geometry::BoundingBox {
        x: origin.0,
        y: origin.1,
        w: sw,
        h: sh,
    };
    if !sample.fits(ii.width(), ii.height()) {
        return Err(Error::OutOfBounds {
            rect: sample,
            width: ii.width(),
            height: ii.height(),
        });
    }
    Ok((0..pool.len())
        .map(|i| pool.feature_value_unchecked(ii, origin, i))
        .collect())
}

/// One entry of the classic sparse measurement matrix:
/// `-sqrt(rho)` with probability `1/(2 rho)`, `0` with probability
/// `1 - 1/rho`, `+sqrt(rho)` with probability `1/(2 rho)`. Kept for A/B
/// comparison against the asymmetric generator above.
pub fn legacy_matrix_entry<R: Rng>(rng: &mut R, rho: f64) -> f64 {
    assert!(rho >= 1.0, "rho must be at least 1");
    let u: f64 = rng.random();
    let half = 1.0 / (2.0 * rho);
    if u < half {
        -rho.sqrt()
    } else if u < 2.0 * half {
        rho.sqrt()
    } else {
        0.0
    }
}

// --- text serialization -----------------------------------------------------
//
// Line-oriented, whitespace separated:
//
//   subtrack-pool v1
//   sample W H
//   subregion w h
//   rho R
//   region X Y            (one line per sub-region, in order)
//   template REG
//   rect X Y W H WEIGHT   (2-4 lines per template)
//
// Floats print with Rust's shortest round-trip representation, so parsing a
// dump reproduces the pool bit for bit.

/// Serializes a pool to the documented text form.
pub fn pool_to_text(pool: &FeaturePool) -> String {
    let mut out = String::from("subtrack-pool v1\n");
    let (sw, sh) = pool.layout.sample_size;
    let (w, h) = pool.layout.subregion_size;
    out.push_str(&format!("sample {sw} {sh}\n"));
    out.push_str(&format!("subregion {w} {h}\n"));
    out.push_str(&format!("rho {}\n", pool.rho));
    for &(x, y) in &pool.layout.positions {
        out.push_str(&format!("region {x} {y}\n"));
    }
    for t in &pool.templates {
        out.push_str(&format!("template {}\n", t.region));
        for (r, w) in t.rects.iter().zip(&t.weights) {
            out.push_str(&format!("rect {} {} {} {} {}\n", r.x, r.y, r.w, r.h, w));
        }
    }
    out
}

/// Parses the text form produced by [`pool_to_text`], re-validating every
/// invariant.
pub fn pool_from_text(text: &str) -> Result<FeaturePool> {
    let src = "<pool>";
    let mut sample = None;
    let mut subregion = None;
    let mut rho = None;
    let mut regions: Vec<(u32, u32)> = Vec::new();
    let mut templates: Vec<FeatureTemplate> = Vec::new();
    let mut saw_header = false;

    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "subtrack-pool v1" {
                return Err(Error::parse(src, n, "expected header 'subtrack-pool v1'"));
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let mut fields: Vec<&str> = parts.collect();
        let parse_u32 = |s: &str, n: usize| -> Result<u32> {
            s.parse()
                .map_err(|_| Error::parse(src, n, format!("invalid integer '{s}'")))
        };
        match key {
            "sample" | "subregion" => {
                if fields.len() != 2 {
                    return Err(Error::parse(src, n, format!("{key} takes two integers")));
                }
                let pair = (parse_u32(fields[0], n)?, parse_u32(fields[1], n)?);
                if key == "sample" {
                    sample = Some(pair);
                } else {
                    subregion = Some(pair);
                }
            }
            "rho" => {
                if fields.len() != 1 {
                    return Err(Error::parse(src, n, "rho takes one number"));
                }
                rho = Some(fields[0].parse::<f64>().map_err(|_| {
                    Error::parse(src, n, format!("invalid number '{}'", fields[0]))
                })?);
            }
            "region" => {
                if fields.len() != 2 {
                    return Err(Error::parse(src, n, "region takes two integers"));
                }
                regions.push((parse_u32(fields[0], n)?, parse_u32(fields[1], n)?));
            }
            "template" => {
                if fields.len() != 1 {
                    return Err(Error::parse(src, n, "template takes one integer"));
                }
                templates.push(FeatureTemplate {
                    region: parse_u32(fields[0], n)? as usize,
                    rects: Vec::new(),
                    weights: Vec::new(),
                });
            }
            "rect" => {
                if fields.len() != 5 {
                    return Err(Error::parse(src, n, "rect takes x y w h weight"));
                }
                let weight_field = fields.pop().unwrap();
                let weight: f64 = weight_field.parse().map_err(|_| {
                    Error::parse(src, n, format!("invalid weight '{weight_field}'"))
                })?;
                let vals: Vec<u32> = fields
                    .iter()
                    .map(|s| parse_u32(s, n))
                    .collect::<Result<_>>()?;
                let t = templates
                    .last_mut()
                    .ok_or_else(|| Error::parse(src, n, "rect before any template"))?;
                t.rects.push(FeatureRect {
                    x: vals[0],
                    y: vals[1],
                    w: vals[2],
                    h: vals[3],
                });
                t.weights.push(weight);
            }
            other => {
                return Err(Error::parse(src, n, format!("unknown key '{other}'")));
            }
        }
    }

    let sample = sample.ok_or_else(|| Error::parse(src, 0, "missing 'sample' line"))?;
    let subregion = subregion.ok_or_else(|| Error::parse(src, 0, "missing 'subregion' line"))?;
    let rho = rho.ok_or_else(|| Error::parse(src, 0, "missing 'rho' line"))?;
    let layout = SubRegionLayout {
        sample_size: sample,
        subregion_size: subregion,
        positions: regions,
    };
    FeaturePool::from_parts(layout, templates, rho)
}
