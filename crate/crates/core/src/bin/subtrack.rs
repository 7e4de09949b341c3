use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subtrack::app::{self, EvalArgs, SynthArgs, TrackArgs};

/// Exit codes: 0 success, 1 runtime/I/O failure, 2 usage error,
/// 3 tracking lost (results are truncated at the loss).
const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LOST: u8 = 3;

#[derive(Parser)]
#[command(
    name = "subtrack",
    version,
    about = "Visual tracker with compressive sub-region features and coarse-to-fine search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a sequence of image files and write per-frame boxes.
    Track {
        /// Directory of frame images (lexicographic order).
        #[arg(long, value_name = "DIR")]
        seq: PathBuf,
        /// Ground-truth file; its first line initializes the tracker.
        #[arg(long, value_name = "FILE")]
        gt: Option<PathBuf>,
        /// Initial box as 1-indexed x,y,w,h (instead of --gt).
        #[arg(long, value_name = "X,Y,W,H")]
        init_box: Option<String>,
        /// Configuration file (key = value lines).
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Results file to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Random seed; overrides the config file and TRACKER_SEED.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
    /// Score a results file against ground truth and write a report.
    Eval {
        #[arg(long, value_name = "FILE")]
        results: PathBuf,
        #[arg(long, value_name = "FILE")]
        gt: PathBuf,
        /// Report file: summary plus precision/success curve tables.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Optional per-frame CSV with boxes, CLE and overlap.
        #[arg(long, value_name = "FILE")]
        frames: Option<PathBuf>,
    },
    /// Generate a synthetic sequence with exact ground truth.
    Synth {
        /// Sequence spec file (key = value lines).
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Output directory for frames and groundtruth_rect.txt.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Track {
            seq,
            gt,
            init_box,
            config,
            out,
            seed,
        } => {
            if gt.is_none() && init_box.is_none() {
                eprintln!("error: either --gt or --init-box is required");
                return ExitCode::from(EXIT_USAGE);
            }
            let args = TrackArgs {
                seq_dir: seq,
                ground_truth: gt,
                init_box,
                config,
                out,
                seed,
            };
            match app::cmd_track(&args) {
                Ok(report) => {
                    println!("tracked {} frames at {:.1} fps", report.frames, report.fps);
                    if let Some(frame) = report.lost_at {
                        eprintln!(
                            "tracking lost at frame {}; results truncated there",
                            frame + 1
                        );
                        return ExitCode::from(EXIT_LOST);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAILURE)
                }
            }
        }
        Command::Eval {
            results,
            gt,
            out,
            frames,
        } => {
            let args = EvalArgs {
                results,
                ground_truth: gt,
                out,
                frames_out: frames,
            };
            match app::cmd_eval(&args) {
                Ok(summary) => {
                    println!("{}", app::format_summary(&summary));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAILURE)
                }
            }
        }
        Command::Synth { spec, out } => match app::cmd_synth(&SynthArgs { spec, out_dir: out }) {
            Ok(frames) => {
                println!("wrote {frames} frames");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_FAILURE)
            }
        },
    }
}
