//! Sequence and annotation I/O: binary PGM frames, OTB-style ground-truth
//! files (1-indexed, comma or tab separated) and per-frame results files.
//!
//! All writers go through a temp-file-and-rename step so failed runs never
//! leave partial output behind. PNG and JPEG input is available behind the
//! `image-formats` feature; frames decode to 8-bit grayscale with ITU-R 601
//! luma weighting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::geometry::{BoundingBox, Frame};
use crate::{Error, Result};

/// Writes `bytes` to `path` atomically: temp file in the same directory,
/// then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let display = path.display().to_string();
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(display, e)
    })
}

/// Writes a frame as binary 8-bit PGM (P5).
pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    bytes.extend_from_slice(frame.pixels());
    atomic_write(path, &bytes)
}

/// Reads a binary 8-bit PGM (P5) file. `#` comments in the header are
/// allowed; 16-bit files (maxval > 255) are rejected.
pub fn read_pgm(path: &Path) -> Result<Frame> {
    let display = path.display().to_string();
    let bytes = fs::read(path).map_err(|e| Error::io(&*display, e))?;
    parse_pgm(&bytes, &display)
}

fn parse_pgm(bytes: &[u8], source: &str) -> Result<Frame> {
    let bad = |msg: &str| Error::parse(source, 0, msg);
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("not a binary PGM (missing P5 magic)"));
    }
    // Header: magic, width, height, maxval; whitespace separated with
    // optional '#' comments, then a single whitespace byte before the data.
    let mut pos = 2usize;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("invalid PGM header field"))?;
    }
    let [width, height, maxval] = fields;
    if maxval > 255 {
        return Err(bad("16-bit PGM is not supported"));
    }
    pos += 1; // single whitespace byte after maxval
    let expected = width * height;
    let data = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| bad("PGM pixel data truncated"))?;
    Frame::new(width as u32, height as u32, data.to_vec(), 0)
}

/// Decodes one frame by file extension: PGM natively, PNG/JPEG behind the
/// `image-formats` feature.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" => read_pgm(path),
        #[cfg(feature = "image-formats")]
        "png" | "jpg" | "jpeg" => read_image(path),
        other => Err(Error::InvalidInput(format!(
            "unsupported frame format '.{other}' for {}",
            path.display()
        ))),
    }
}

#[cfg(feature = "image-formats")]
fn read_image(path: &Path) -> Result<Frame> {
    let display = path.display().to_string();
    let img = image::open(path)
        .map_err(|e| Error::InvalidInput(format!("{display}: {e}")))?
        .into_rgb8();
    let (w, h) = img.dimensions();
    // ITU-R 601 luma weighting.
    let pixels: Vec<u8> = img
        .pixels()
        .map(|p| {
            (0.299 * p.0[0] as f64 + 0.587 * p.0[1] as f64 + 0.114 * p.0[2] as f64)
                .round()
                .clamp(0.0, 255.0) as u8
        })
        .collect();
    Frame::new(w, h, pixels, 0)
}

/// Loads every supported image in `dir`, sorted lexicographically by file
/// name. All frames must share dimensions.
pub fn load_sequence(dir: &Path) -> Result<Vec<Frame>> {
    let display = dir.display().to_string();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(&*display, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().map(|e| e.to_string_lossy().to_lowercase()),
                Some(ref e) if e == "pgm" || e == "png" || e == "jpg" || e == "jpeg"
            )
        })
        .collect();
    paths.sort_by_key(|p| p.file_name().map(|n| n.to_os_string()));
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no frame images found in {display}"
        )));
    }
    let mut frames: Vec<Frame> = Vec::with_capacity(paths.len());
    for (index, path) in paths.iter().enumerate() {
        let mut frame = read_frame(path)?;
        frame.index = index;
        if index > 0
            && (frame.width() != frames[0].width() || frame.height() != frames[0].height())
        {
            return Err(Error::InvalidInput(format!(
                "{}: frame is {}x{}, first frame is {}x{}",
                path.display(),
                frame.width(),
                frame.height(),
                frames[0].width(),
                frames[0].height()
            )));
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Parses an OTB-style ground-truth file: one `x,y,w,h` line per frame,
/// 1-indexed, comma or tab separated (auto-detected). Coordinates convert to
/// the 0-indexed internal convention.
pub fn read_ground_truth(path: &Path) -> Result<Vec<BoundingBox>> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&*display, e))?;
    let mut boxes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let sep = if line.contains(',') { ',' } else { '\t' };
        let fields: Vec<&str> = line.split(sep).map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                &*display,
                idx + 1,
                format!("expected four values, got {}", fields.len()),
            ));
        }
        let nums: Vec<i64> = fields
            .iter()
            .map(|f| {
                // Some OTB files carry fractional coordinates; round them.
                f.parse::<f64>()
                    .map(|v| v.round() as i64)
                    .map_err(|_| Error::parse(&*display, idx + 1, format!("invalid number '{f}'")))
            })
            .collect::<Result<_>>()?;
        if nums[2] < 1 || nums[3] < 1 {
            return Err(Error::parse(&*display, idx + 1, "box size must be positive"));
        }
        boxes.push(BoundingBox::new(
            (nums[0] - 1) as i32,
            (nums[1] - 1) as i32,
            nums[2] as u32,
            nums[3] as u32,
        )?);
    }
    if boxes.is_empty() {
        return Err(Error::parse(&*display, 0, "ground-truth file is empty"));
    }
    Ok(boxes)
}

/// Writes ground truth in the 1-indexed comma-separated convention.
pub fn write_ground_truth(path: &Path, boxes: &[BoundingBox]) -> Result<()> {
    let mut out = String::new();
    for b in boxes {
        out.push_str(&format!("{},{},{},{}\n", b.x + 1, b.y + 1, b.w, b.h));
    }
    atomic_write(path, out.as_bytes())
}

/// Writes per-frame results: a `frame,x,y,w,h` header, then one 1-indexed
/// row per frame.
pub fn write_results(path: &Path, boxes: &[BoundingBox]) -> Result<()> {
    let mut out = String::from("frame,x,y,w,h\n");
    for (t, b) in boxes.iter().enumerate() {
        out.push_str(&format!("{},{},{},{},{}\n", t + 1, b.x + 1, b.y + 1, b.w, b.h));
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a results file written by [`write_results`], converting back to the
/// 0-indexed internal convention.
pub fn read_results(path: &Path) -> Result<Vec<BoundingBox>> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&*display, e))?;
    let mut boxes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (idx == 0 && line.starts_with("frame")) {
            continue;
        }
        let nums: Vec<i64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse()
                    .map_err(|_| Error::parse(&*display, idx + 1, format!("invalid number '{f}'")))
            })
            .collect::<Result<_>>()?;
        if nums.len() != 5 {
            return Err(Error::parse(
                &*display,
                idx + 1,
                format!("expected five values, got {}", nums.len()),
            ));
        }
        if nums[0] as usize != boxes.len() + 1 {
            return Err(Error::parse(
                &*display,
                idx + 1,
                format!("expected frame {}, got {}", boxes.len() + 1, nums[0]),
            ));
        }
        boxes.push(BoundingBox::new(
            (nums[1] - 1) as i32,
            (nums[2] - 1) as i32,
            nums[3] as u32,
            nums[4] as u32,
        )?);
    }
    if boxes.is_empty() {
        return Err(Error::parse(&*display, 0, "results file has no rows"));
    }
    Ok(boxes)
}
