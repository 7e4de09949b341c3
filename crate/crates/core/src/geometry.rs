//! Pixel-grid geometry: bounding boxes, integral images and candidate
//! position sampling on clipped lattice disks.

use rand::Rng;

use crate::{Error, Result};

/// Axis-aligned rectangle in pixel coordinates, 0-indexed top-left anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundingBox {
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn new(x: i32, y: i32, w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidInput(format!(
                "bounding box must have positive size, got {w}x{h}"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    /// Box center in real coordinates (no truncation).
    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    /// Top-left anchor. Sample-to-sample distances are measured between
    /// anchors; all candidates share the target size, so this equals the
    /// center distance.
    pub fn anchor(&self) -> (i32, i32) {
        (self.x, self.y)
    }

    /// Same-size box at a new anchor.
    pub fn at(&self, x: i32, y: i32) -> Self {
        Self { x, y, ..*self }
    }

    /// One-past-the-right column.
    pub fn right(&self) -> i32 {
        self.x + self.w as i32
    }

    /// One-past-the-bottom row.
    pub fn bottom(&self) -> i32 {
        self.y + self.h as i32
    }

    pub fn area(&self) -> f64 {
        self.w as f64 * self.h as f64
    }

    /// True when the box lies fully inside a `width`x`height` image.
    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.x >= 0 && self.y >= 0 && self.right() <= width as i32 && self.bottom() <= height as i32
    }
}

/// One 8-bit grayscale frame of a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    /// Position of the frame in its sequence.
    pub index: usize,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, index: usize) -> Result<Self> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidInput(format!(
                "frame pixel buffer has {} bytes, expected {}x{} = {}",
                pixels.len(),
                width,
                height,
                (width as usize) * (height as usize)
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            index,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

/// Cumulative-sum grid over a frame; entry (i, j) holds the sum of all pixels
/// strictly above and left of (i, j), so any rectangle sum costs four lookups.
///
/// Accumulators are 64-bit: 8-bit pixels on frames up to 4096x4096 cannot
/// overflow.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: u32,
    height: u32,
    // (width + 1) x (height + 1), first row and column zero.
    data: Vec<i64>,
}

/// Builds the integral image of a frame.
pub fn integral_image(frame: &Frame) -> Result<IntegralImage> {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::EmptyFrame {
            width: frame.width(),
            height: frame.height(),
        });
    }
    let stride = w + 1;
    let mut data = vec![0i64; stride * (h + 1)];
    let pixels = frame.pixels();
    for y in 0..h {
        let mut row_sum = 0i64;
        let src = &pixels[y * w..(y + 1) * w];
        for x in 0..w {
            row_sum += src[x] as i64;
            data[(y + 1) * stride + x + 1] = data[y * stride + x + 1] + row_sum;
        }
    }
    Ok(IntegralImage {
        width: frame.width(),
        height: frame.height(),
        data,
    })
}

impl IntegralImage {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Sum of the pixels covered by `rect`, or an error when the rectangle
    /// leaves the image.
    pub fn rect_sum(&self, rect: &BoundingBox) -> Result<i64> {
        if !rect.fits(self.width, self.height) {
            return Err(Error::OutOfBounds {
                rect: *rect,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.rect_sum_unchecked(rect.x as u32, rect.y as u32, rect.w, rect.h))
    }

    /// Four-lookup rectangle sum. The rectangle must already be in bounds.
    #[inline]
    pub(crate) fn rect_sum_unchecked(&self, x: u32, y: u32, w: u32, h: u32) -> i64 {
        debug_assert!(x + w <= self.width && y + h <= self.height);
        let stride = self.width as usize + 1;
        let (x0, y0) = (x as usize, y as usize);
        let (x1, y1) = (x0 + w as usize, y0 + h as usize);
        self.data[y1 * stride + x1] + self.data[y0 * stride + x0]
            - self.data[y0 * stride + x1]
            - self.data[y1 * stride + x0]
    }
}

/// Integer lattice positions with a given step inside an annulus
/// `inner_radius <= d < outer_radius` around a center.
///
/// A disk with `outer_radius` 0 (or any outer radius at most the center
/// distance of the nearest other lattice point) degenerates to the center
/// alone: the center is a member of every solid disk regardless of the
/// strict outer bound.
#[derive(Debug, Clone, Copy)]
pub struct LatticeDisk {
    pub center: (f64, f64),
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub step: u32,
}

impl LatticeDisk {
    /// Solid disk: all lattice points with `d < radius`, plus the center.
    pub fn solid(center: (i32, i32), radius: f64, step: u32) -> Self {
        Self {
            center: (center.0 as f64, center.1 as f64),
            inner_radius: 0.0,
            outer_radius: radius,
            step,
        }
    }

    /// Annulus: lattice points with `inner <= d < outer`.
    pub fn annulus(center: (i32, i32), inner: f64, outer: f64, step: u32) -> Self {
        Self {
            center: (center.0 as f64, center.1 as f64),
            inner_radius: inner,
            outer_radius: outer,
            step,
        }
    }

    #[inline]
    fn contains_sq(&self, dist_sq: f64) -> bool {
        (dist_sq == 0.0 && self.inner_radius == 0.0)
            || (dist_sq >= self.inner_radius * self.inner_radius
                && dist_sq < self.outer_radius * self.outer_radius)
    }
}

/// Enumerates the disk's lattice positions whose `sample_size` box stays
/// inside a `frame_size` image, in row-major (y, x) order.
///
/// The lattice is anchored on the rounded center, so the center itself is on
/// the grid whenever it is integral (which is the case everywhere in the
/// tracker: anchors are pixel positions).
pub fn enumerate_positions(
    disk: &LatticeDisk,
    sample_size: (u32, u32),
    frame_size: (u32, u32),
) -> Vec<(i32, i32)> {
    assert!(disk.step >= 1, "lattice step must be at least 1");
    assert!(
        disk.inner_radius >= 0.0 && disk.outer_radius >= disk.inner_radius,
        "disk radii must satisfy 0 <= inner <= outer"
    );
    let (w, h) = sample_size;
    let (fw, fh) = frame_size;
    if w > fw || h > fh {
        return Vec::new();
    }
    let max_x = (fw - w) as i32;
    let max_y = (fh - h) as i32;

    let cx = disk.center.0.round() as i32;
    let cy = disk.center.1.round() as i32;
    let step = disk.step as i32;
    let reach = disk.outer_radius.ceil() as i32;
    let span = reach / step + 1;

    let mut out = Vec::new();
    for j in -span..=span {
        let y = cy + j * step;
        if y < 0 || y > max_y {
            continue;
        }
        for i in -span..=span {
            let x = cx + i * step;
            if x < 0 || x > max_x {
                continue;
            }
            let dx = x as f64 - disk.center.0;
            let dy = y as f64 - disk.center.1;
            if disk.contains_sq(dx * dx + dy * dy) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Uniform sample of `count` positions without replacement; returns the whole
/// input (in order) when it has at most `count` members. The sampled subset
/// keeps the original scan order.
pub fn subsample_positions<R: Rng>(
    positions: &[(i32, i32)],
    count: usize,
    rng: &mut R,
) -> Vec<(i32, i32)> {
    assert!(count >= 1, "subsample count must be at least 1");
    if positions.len() <= count {
        return positions.to_vec();
    }
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, positions.len(), count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| positions[i]).collect()
}
