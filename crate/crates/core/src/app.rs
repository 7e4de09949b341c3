//! Implementations behind the CLI subcommands, kept as plain functions so
//! they are testable without spawning a process.

use std::path::PathBuf;
use std::time::Instant;

use crate::config::{load_config, TrackerConfig};
use crate::eval::{precision_curve, success_curve, summarize, FrameResult, RunSummary};
use crate::geometry::BoundingBox;
use crate::synth::SyntheticSpec;
use crate::tracker::Tracker;
use crate::{io, Error, Result};

/// Environment variable that overrides the configured seed (the `--seed`
/// flag still wins over both).
pub const SEED_ENV_VAR: &str = "TRACKER_SEED";

#[derive(Debug, Clone)]
pub struct TrackArgs {
    pub seq_dir: PathBuf,
    pub ground_truth: Option<PathBuf>,
    /// 1-indexed `x,y,w,h`, matching the ground-truth file convention.
    pub init_box: Option<String>,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct TrackReport {
    pub frames: usize,
    pub fps: f64,
    /// Frame index (0-based) where tracking was lost; results are truncated
    /// there.
    pub lost_at: Option<usize>,
}

/// Parses a 1-indexed `x,y,w,h` box into the 0-indexed convention.
fn parse_init_box(text: &str) -> Result<BoundingBox> {
    let nums: Vec<i64> = text
        .split(',')
        .map(|f| {
            f.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("invalid --init-box field '{f}'")))
        })
        .collect::<Result<_>>()?;
    if nums.len() != 4 {
        return Err(Error::InvalidInput(format!(
            "--init-box needs x,y,w,h, got {} fields",
            nums.len()
        )));
    }
    if nums[2] < 1 || nums[3] < 1 {
        return Err(Error::InvalidInput("--init-box size must be positive".into()));
    }
    BoundingBox::new(
        (nums[0] - 1) as i32,
        (nums[1] - 1) as i32,
        nums[2] as u32,
        nums[3] as u32,
    )
}

fn resolve_seed(config: &mut TrackerConfig, cli_seed: Option<u64>) -> Result<()> {
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        config.rng_seed = raw.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("{SEED_ENV_VAR} must be numeric, got '{raw}'"))
        })?;
    }
    if let Some(seed) = cli_seed {
        config.rng_seed = seed;
    }
    Ok(())
}

/// Tracks a sequence and writes the per-frame results file. A lost track
/// truncates the results at the loss; the caller maps that to its own exit
/// code.
pub fn cmd_track(args: &TrackArgs) -> Result<TrackReport> {
    let mut config = load_config(args.config.as_deref())?;
    resolve_seed(&mut config, args.seed)?;

    let init_box = match (&args.init_box, &args.ground_truth) {
        (Some(text), _) => parse_init_box(text)?,
        (None, Some(gt)) => io::read_ground_truth(gt)?[0],
        (None, None) => {
            return Err(Error::InvalidInput(
                "either --gt or --init-box is required".into(),
            ))
        }
    };

    let frames = io::load_sequence(&args.seq_dir)?;
    let start = Instant::now();
    let mut tracker = Tracker::new(&frames[0], init_box, config)?;
    let mut boxes = vec![init_box];
    let mut lost_at = None;
    for frame in &frames[1..] {
        match tracker.track_frame(frame) {
            Ok((pos, _)) => boxes.push(pos),
            Err(Error::TrackingLost { frame, .. }) => {
                lost_at = Some(frame);
                break;
            }
            Err(other) => return Err(other),
        }
    }
    let fps = boxes.len() as f64 / start.elapsed().as_secs_f64().max(1e-9);
    io::write_results(&args.out, &boxes)?;
    Ok(TrackReport {
        frames: boxes.len(),
        fps,
        lost_at,
    })
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub results: PathBuf,
    pub ground_truth: PathBuf,
    pub out: PathBuf,
    /// Optional per-frame CSV (`frame,x,y,w,h,gt_x,...,cle,overlap`).
    pub frames_out: Option<PathBuf>,
}

/// Renders the evaluation report: a summary block and the two curve tables,
/// comma separated, one blank line between sections.
fn render_report(summary: &RunSummary, results: &[FrameResult]) -> String {
    let precision = precision_curve(results);
    let (success, _) = success_curve(results);
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("frames,{}\n", summary.frames));
    out.push_str(&format!("mean_cle,{}\n", summary.mean_cle));
    out.push_str(&format!("success_rate,{}\n", summary.success_rate));
    out.push_str(&format!("precision_at_20,{}\n", summary.precision_at_20));
    out.push_str(&format!("auc,{}\n", summary.auc));
    out.push_str("\nthreshold,precision\n");
    for (t, v) in precision.thresholds.iter().zip(&precision.values) {
        out.push_str(&format!("{t},{v}\n"));
    }
    out.push_str("\ntheta,success\n");
    for (t, v) in success.thresholds.iter().zip(&success.values) {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

/// Compares a results file against ground truth and writes the report.
pub fn cmd_eval(args: &EvalArgs) -> Result<RunSummary> {
    let boxes = io::read_results(&args.results)?;
    let truth = io::read_ground_truth(&args.ground_truth)?;
    if boxes.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "results cover {} frames, ground truth {}",
            boxes.len(),
            truth.len()
        )));
    }
    let results: Vec<FrameResult> = boxes
        .iter()
        .zip(&truth)
        .enumerate()
        .map(|(t, (b, g))| FrameResult::new(t, *b, *g))
        .collect();
    let summary = summarize(&results, 0.0, None);
    io::atomic_write(&args.out, render_report(&summary, &results).as_bytes())?;
    if let Some(frames_out) = &args.frames_out {
        let mut csv = String::from(FrameResult::csv_header());
        csv.push('\n');
        for r in &results {
            csv.push_str(&r.csv_row());
            csv.push('\n');
        }
        io::atomic_write(frames_out, csv.as_bytes())?;
    }
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct SynthArgs {
    pub spec: PathBuf,
    pub out_dir: PathBuf,
}

/// Generates a synthetic sequence into `out_dir`: zero-padded PGM frames
/// plus `groundtruth_rect.txt`.
pub fn cmd_synth(args: &SynthArgs) -> Result<usize> {
    let display = args.spec.display().to_string();
    let text = std::fs::read_to_string(&args.spec).map_err(|e| Error::io(&*display, e))?;
    let spec = SyntheticSpec::parse(&text, &display)?;
    let (frames, truth) = crate::synth::generate_synthetic(&spec)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;
    let digits = frames.len().to_string().len().max(4);
    for (t, frame) in frames.iter().enumerate() {
        let name = format!("{:0width$}.pgm", t + 1, width = digits);
        io::write_pgm(&args.out_dir.join(name), frame)?;
    }
    io::write_ground_truth(&args.out_dir.join("groundtruth_rect.txt"), &truth)?;
    Ok(frames.len())
}

/// Convenience used by tests and the demo: format a summary for humans.
pub fn format_summary(summary: &RunSummary) -> String {
    let lost = match summary.lost_at {
        Some(f) => format!(", lost at frame {}", f + 1),
        None => String::new(),
    };
    format!(
        "frames: {}  mean CLE: {:.2} px  success rate: {:.1}%  precision@20: {:.1}%  AUC: {:.3}  {:.1} fps{}",
        summary.frames,
        summary.mean_cle,
        100.0 * summary.success_rate,
        100.0 * summary.precision_at_20,
        summary.auc,
        summary.fps,
        lost
    )
}
