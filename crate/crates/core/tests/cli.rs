//! End-to-end tests of the `subtrack` binary: synth/track/eval round trips,
//! exit codes, seeding and output formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use subtrack::geometry::BoundingBox;
use subtrack::io::read_ground_truth;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_subtrack")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("TRACKER_SEED")
        .output()
        .unwrap()
}

fn run_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(bin()).args(args).env(key, value).output().unwrap()
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_spec(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("seq.spec");
    let base = "width = 120\nheight = 90\nframes = 20\ntarget_w = 28\ntarget_h = 28\n\
                start_x = 40\nstart_y = 30\nmax_step = 3\ntexture_seed = 17\n";
    fs::write(&path, format!("{base}{extra}")).unwrap();
    path
}

fn synth_sequence(dir: &Path, extra: &str) -> (PathBuf, PathBuf) {
    let spec = write_spec(dir, extra);
    let seq = dir.join("seq");
    let out = run(&["synth", "--spec", spec.to_str().unwrap(), "--out", seq.to_str().unwrap()]);
    assert_ok(&out);
    let gt = seq.join("groundtruth_rect.txt");
    (seq, gt)
}

#[test]
fn synth_writes_frames_and_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let (seq, gt) = synth_sequence(dir.path(), "");
    let pgms: Vec<_> = fs::read_dir(&seq)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "pgm"))
        .collect();
    assert_eq!(pgms.len(), 20);
    // The generated ground truth round-trips through the parser.
    let boxes = read_ground_truth(&gt).unwrap();
    assert_eq!(boxes.len(), 20);
    assert!(boxes.iter().all(|b| b.w == 28 && b.h == 28));
}

#[test]
fn synth_static_spec_yields_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("static.spec");
    fs::write(
        &spec,
        "width = 64\nheight = 48\nframes = 4\ntarget_w = 16\ntarget_h = 16\n\
         start_x = 20\nstart_y = 15\nmax_step = 0\n",
    )
    .unwrap();
    let seq = dir.path().join("seq");
    assert_ok(&run(&["synth", "--spec", spec.to_str().unwrap(), "--out", seq.to_str().unwrap()]));
    let first = fs::read(seq.join("0001.pgm")).unwrap();
    for name in ["0002.pgm", "0003.pgm", "0004.pgm"] {
        assert_eq!(fs::read(seq.join(name)).unwrap(), first);
    }
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "noise_sigma = 1.5\ngain_end = 1.2\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_ok(&run(&["synth", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    }
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?} differs between runs"
        );
    }
}

#[test]
fn synth_invalid_spec_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.spec");
    fs::write(&spec, "frames = many\n").unwrap();
    let out = run(&["synth", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("many"));
}

#[test]
fn track_requires_gt_or_init_box() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "track",
        "--seq",
        dir.path().to_str().unwrap(),
        "--out",
        dir.path().join("r.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--init-box"));
}

#[test]
fn track_runs_reports_fps_and_is_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (seq, gt) = synth_sequence(dir.path(), "");
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let run_out = run(&[
            "track",
            "--seq",
            seq.to_str().unwrap(),
            "--gt",
            gt.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "5",
        ]);
        assert_ok(&run_out);
        let stdout = String::from_utf8_lossy(&run_out.stdout);
        assert!(stdout.contains("fps"), "missing fps report: {stdout}");
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
    let text = fs::read_to_string(&out_a).unwrap();
    assert!(text.starts_with("frame,x,y,w,h\n"));
    assert_eq!(text.lines().count(), 1 + 20);
}

#[test]
fn track_accepts_init_box_instead_of_gt() {
    let dir = tempfile::tempdir().unwrap();
    let (seq, gt) = synth_sequence(dir.path(), "");
    let first = read_ground_truth(&gt).unwrap()[0];
    let init = format!("{},{},{},{}", first.x + 1, first.y + 1, first.w, first.h);
    let out = dir.path().join("r.csv");
    assert_ok(&run(&[
        "track",
        "--seq",
        seq.to_str().unwrap(),
        "--init-box",
        &init,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "5",
    ]));
    assert!(out.exists());
}

#[test]
fn tracker_seed_env_overrides_config_but_not_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (seq, gt) = synth_sequence(dir.path(), "");
    let track = |name: &str, extra: &[&str], env: Option<&str>| -> Vec<u8> {
        let out_path = dir.path().join(name);
        let mut args = vec![
            "track",
            "--seq",
            seq.to_str().unwrap(),
            "--gt",
            gt.to_str().unwrap(),
            "--out",
        ];
        let out_str = out_path.to_str().unwrap().to_string();
        args.push(Box::leak(out_str.into_boxed_str()));
        args.extend_from_slice(extra);
        let out = match env {
            Some(seed) => run_with_env(&args, "TRACKER_SEED", seed),
            None => run(&args),
        };
        assert_ok(&out);
        fs::read(&out_path).unwrap()
    };

    let default_seed = track("default.csv", &[], None);
    let env_42 = track("env42.csv", &[], Some("42"));
    let flag_42 = track("flag42.csv", &["--seed", "42"], None);
    let flag_beats_env = track("mix.csv", &["--seed", "42"], Some("1234"));

    assert_eq!(env_42, flag_42, "env seed and flag seed disagree");
    assert_eq!(flag_42, flag_beats_env, "--seed did not win over TRACKER_SEED");
    assert_ne!(default_seed, env_42, "seed had no effect");
}

#[test]
fn tracker_seed_env_must_be_numeric() {
    let dir = tempfile::tempdir().unwrap();
    let (seq, gt) = synth_sequence(dir.path(), "");
    let out = run_with_env(
        &[
            "track",
            "--seq",
            seq.to_str().unwrap(),
            "--gt",
            gt.to_str().unwrap(),
            "--out",
            dir.path().join("r.csv").to_str().unwrap(),
        ],
        "TRACKER_SEED",
        "banana",
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TRACKER_SEED"));
}

#[test]
fn track_rejects_invalid_config_naming_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let (seq, gt) = synth_sequence(dir.path(), "");
    let config = dir.path().join("bad.conf");
    fs::write(&config, "alpha = 30\n").unwrap();
    let out = run(&[
        "track",
        "--seq",
        seq.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("r.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha < delta"));
}

#[test]
fn track_names_unreadable_frame() {
    let dir = tempfile::tempdir().unwrap();
    let (seq, gt) = synth_sequence(dir.path(), "");
    fs::write(seq.join("0005.pgm"), b"P5 garbage").unwrap();
    let out = run(&[
        "track",
        "--seq",
        seq.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--out",
        dir.path().join("r.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0005.pgm"));
}

#[test]
fn eval_perfect_results_and_table_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, gt) = synth_sequence(dir.path(), "");
    // Results identical to ground truth, in the results-file convention.
    let boxes = read_ground_truth(&gt).unwrap();
    let results = dir.path().join("results.csv");
    subtrack::io::write_results(&results, &boxes).unwrap();

    let report = dir.path().join("report.csv");
    let frames = dir.path().join("frames.csv");
    let out = run(&[
        "eval",
        "--results",
        results.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--frames",
        frames.to_str().unwrap(),
    ]);
    assert_ok(&out);

    let text = fs::read_to_string(&report).unwrap();
    let sections: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(sections.len(), 3);
    assert!(sections[0].contains("mean_cle,0\n"));
    assert!(sections[0].contains("success_rate,1\n"));
    assert!(sections[0].contains("auc,1"));
    assert_eq!(sections[1].lines().count(), 1 + 51, "precision table rows");
    assert_eq!(sections[2].trim_end().lines().count(), 1 + 21, "success table rows");

    let frames_text = fs::read_to_string(&frames).unwrap();
    assert!(frames_text.starts_with("frame,x,y,w,h,gt_x,gt_y,gt_w,gt_h,cle,overlap\n"));
    assert_eq!(frames_text.lines().count(), 1 + 20);
}

#[test]
fn eval_matches_hand_computed_metrics() {
    let dir = tempfile::tempdir().unwrap();
    // Four frames with CLE 0, 2, 5, 25 and overlaps 1, ~0.82, ~0.6, ~0.1.
    let truth: Vec<BoundingBox> = (0..4).map(|_| BoundingBox::new(10, 10, 20, 20).unwrap()).collect();
    let tracked = [
        BoundingBox::new(10, 10, 20, 20).unwrap(),
        BoundingBox::new(12, 10, 20, 20).unwrap(),
        BoundingBox::new(13, 14, 20, 20).unwrap(),
        BoundingBox::new(25, 30, 20, 20).unwrap(),
    ];
    let gt_path = dir.path().join("gt.txt");
    subtrack::io::write_ground_truth(&gt_path, &truth).unwrap();
    let results = dir.path().join("results.csv");
    subtrack::io::write_results(&results, &tracked).unwrap();
    let report = dir.path().join("report.csv");
    assert_ok(&run(&[
        "eval",
        "--results",
        results.to_str().unwrap(),
        "--gt",
        gt_path.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&report).unwrap();
    // Hand-computed: mean CLE = (0 + 2 + 5 + 25) / 4 = 8.
    let mean_cle: f64 = text
        .lines()
        .find(|l| l.starts_with("mean_cle,"))
        .and_then(|l| l.split(',').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mean_cle - 8.0).abs() < 1e-9, "mean CLE {mean_cle}");
    // Overlaps above 0.5: frames 1-3 -> success rate 0.75.
    assert!(text.contains("success_rate,0.75\n"));
    // Precision at 20 px: CLE <= 20 on 3 of 4 frames.
    let p20 = text
        .lines()
        .skip_while(|l| !l.starts_with("threshold,"))
        .nth(21)
        .unwrap();
    assert_eq!(p20, "20,0.75");
}

#[test]
fn eval_rejects_frame_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let truth: Vec<BoundingBox> = (0..4).map(|_| BoundingBox::new(1, 1, 5, 5).unwrap()).collect();
    let gt_path = dir.path().join("gt.txt");
    subtrack::io::write_ground_truth(&gt_path, &truth).unwrap();
    let results = dir.path().join("results.csv");
    subtrack::io::write_results(&results, &truth[..3]).unwrap();
    let out = run(&[
        "eval",
        "--results",
        results.to_str().unwrap(),
        "--gt",
        gt_path.to_str().unwrap(),
        "--out",
        dir.path().join("report.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_eval_writes_no_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.csv");
    let out = run(&[
        "eval",
        "--results",
        dir.path().join("missing.csv").to_str().unwrap(),
        "--gt",
        dir.path().join("missing.txt").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!out_path.exists());
}
