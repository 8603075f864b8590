use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use etrack::io::read_mot_file;

fn etrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const PERFECT: &str = "num_frames = 40\nrng_seed = 9\n[arena]\nwidth = 960\nheight = 540\n\
[layout]\nkind = \"lanes\"\ncount = 4\n[[detectors]]\nname = \"cam\"\n";

fn synth(dir: &Path, spec: &str) {
    let spec_path = dir.join("spec.toml");
    fs::write(&spec_path, spec).unwrap();
    let o = etrack(&[
        "synth",
        "--spec",
        spec_path.to_str().unwrap(),
        "--out-dir",
        dir.join("scn").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn synth_track_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let scn = dir.path().join("scn");
    assert!(scn.join("gt/gt.txt").exists());
    assert!(scn.join("det_cam.txt").exists());
    let out = dir.path().join("out.txt");
    let o = etrack(&[
        "track",
        "--config",
        scn.join("track.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_mot_file(&out).unwrap();
    assert_eq!(rows.first().unwrap().frame, 3);

    let o = etrack(&[
        "eval",
        "--gt",
        scn.join("gt/gt.txt").to_str().unwrap(),
        "--pred",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("idsw=0\n"), "{text}");
    assert!(text.contains("fp=0\n"), "{text}");
    // Two warm-up frames of four objects are missed.
    assert!(text.contains("fn=8\n"), "{text}");

    let o = etrack(&[
        "eval",
        "--gt",
        scn.join("gt/gt.txt").to_str().unwrap(),
        "--pred",
        scn.join("gt/gt.txt").to_str().unwrap(),
        "--csv",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), etrack_core::EvalReport::CSV_HEADER);
    assert!(lines.next().unwrap().starts_with("1,1,160,0,0,0,0,4,0,4,"));
}

#[test]
fn confirm_hits_override_starts_output_at_frame_one() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let scn = dir.path().join("scn");
    let out = dir.path().join("out.txt");
    let o = etrack(&[
        "track",
        "--config",
        scn.join("track.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--tracker.confirm_hits",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_mot_file(&out).unwrap();
    assert_eq!(rows.first().unwrap().frame, 1);
    assert_eq!(rows.len(), 160);
}

#[test]
fn missing_source_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[[sources]]\npath = \"nowhere/det.txt\"\n").unwrap();
    let o = etrack(&[
        "track",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere/det.txt"), "{}", stderr(&o));
}

#[test]
fn malformed_source_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("d.txt"),
        "1,-1,1,1,5,5,0.9\n2,-1,10,20,-5,40,0.9\n",
    )
    .unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[[sources]]\npath = \"d.txt\"\n").unwrap();
    let o = etrack(&[
        "track",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("line 2") && err.contains("non-positive box dimension"),
        "{err}"
    );
}

#[test]
fn usage_and_unknown_keys_exit_one() {
    assert_eq!(etrack(&["track"]).status.code(), Some(1));
    assert_eq!(etrack(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(etrack(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let scn = dir.path().join("scn");
    let o = etrack(&[
        "track",
        "--config",
        scn.join("track.toml").to_str().unwrap(),
        "--out",
        dir.path().join("o.txt").to_str().unwrap(),
        "--tracker.no_such_key",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_noise_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let scn = dir.path().join("scn");
    // Scales this small square to zero, leaving a singular innovation covariance.
    let o = etrack(&[
        "track",
        "--config",
        scn.join("track.toml").to_str().unwrap(),
        "--out",
        dir.path().join("o.txt").to_str().unwrap(),
        "--kalman.pos_sigma_scale",
        "1e-200",
        "--kalman.vel_sigma_scale",
        "1e-200",
        "--kalman.meas_sigma_scale",
        "1e-200",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate innovation covariance"));
}

#[test]
fn bench_reports_rate() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), PERFECT);
    let o = etrack(&[
        "bench",
        "--config",
        dir.path().join("scn/track.toml").to_str().unwrap(),
        "--repeats",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.contains("frames=40\n") && text.contains("hz="),
        "{text}"
    );
    let o = etrack(&[
        "bench",
        "--config",
        dir.path().join("scn/track.toml").to_str().unwrap(),
        "--repeats",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
