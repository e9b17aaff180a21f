//! Runs the `beamsim` binary and inspects what it writes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use beamsim::signal::tone;
use beamsim::wav;

fn beamsim(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamsim"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn beampattern_is_unity_at_90_and_270() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["beampattern", "--defaults"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("beampattern_linear.csv"));
    assert_eq!(header[0], "angle_deg");
    assert_eq!(header.len(), 1 + 371);
    for angle in [90.0, 270.0] {
        let row = rows.iter().find(|r| r[0] == angle).unwrap();
        assert!(row[1..].iter().all(|db| db.abs() < 1e-9), "{angle} deg");
    }
    assert!(dir.path().join("beampattern_linear.json").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("300 Hz: 2 lobes"), "{stdout}");
}

#[test]
fn single_frequency_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["beampattern", "--f-min", "300", "--f-max", "300"], dir.path());
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("beampattern_linear.csv"));
    assert_eq!(header, ["angle_deg", "300"]);
    assert_eq!(rows.len(), 360);
}

#[test]
fn polar_writes_three_slices_per_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["polar"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for kind in ["linear", "circular"] {
        for f in [300, 2000, 4000] {
            assert!(dir.path().join(format!("polar_{kind}_{f}hz.csv")).exists());
        }
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 6);

    let (_, rows) = read_csv(&dir.path().join("polar_circular_2000hz.csv"));
    let top = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((top[0] - 90.0).abs() <= 1.0);
}

#[test]
fn polar_deduplicates_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(
        &["polar", "--geometry", "circular", "--freq", "2000,2000", "--freq", "2000"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn polar_outside_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["polar", "--freq", "5000"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["beampattern", "--geometry", "hexagonal"][..],
        &["beampattern", "--mics", "1"],
        &["beampattern", "--steer-deg", "-5"],
        &["polar", "--f-step", "0"],
    ] {
        let out = beamsim(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "mics = eight\n").unwrap();
    let out = beamsim(&["beampattern", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undersampling_warns_but_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["simulate", "--sample-rate", "8000"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("below 4x"));
    assert!(dir.path().join("simulate_linear.wav").exists());
}

#[test]
fn io_and_format_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.wav");
    let out = beamsim(&["simulate", "--input", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));

    let wrong_rate = dir.path().join("8k.wav");
    let s = tone(440.0, 0.5, 4000, 8000.0).unwrap();
    fs::write(&wrong_rate, wav::encode_pcm16(&s).unwrap()).unwrap();
    let out = beamsim(&["simulate", "--input", wrong_rate.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample rate"));
}

#[test]
fn empty_wav_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.wav");
    fs::write(&input, wav::encode_f32(&[&[]], 16000.0).unwrap()).unwrap();
    let out_dir = dir.path().join("out");
    let out = beamsim(&["simulate", "--input", input.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out_dir.exists());
}

#[test]
fn simulate_round_trips_through_wav() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tone.wav");
    let s = tone(1000.0, 0.25, 8000, 16000.0).unwrap();
    fs::write(&input, wav::encode_pcm16(&s).unwrap()).unwrap();
    let out = beamsim(
        &["simulate", "--input", input.to_str().unwrap(), "--doa-deg", "90", "--capture"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let y = wav::decode_mono(&fs::read(dir.path().join("simulate_linear.wav")).unwrap()).unwrap();
    let x = wav::decode_mono(&fs::read(&input).unwrap()).unwrap();
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("simulate_linear.json")).unwrap()).unwrap();
    let l = meta["latency_samples"].as_u64().unwrap() as usize;
    let (a, b) = (
        meta["valid_start"].as_u64().unwrap() as usize,
        meta["valid_end"].as_u64().unwrap() as usize,
    );
    let worst = (a..b)
        .map(|n| (y.samples()[n] - x.samples()[n - l]).abs())
        .fold(0.0, f64::max);
    // Float output, so only f32 rounding separates them.
    assert!(worst < 1e-6, "{worst}");

    let capture = fs::read(dir.path().join("capture_linear.wav")).unwrap();
    assert_eq!(u16::from_le_bytes([capture[22], capture[23]]), 8);
}

#[test]
fn identity_attenuation_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["attenuation", "--doa-deg", "90"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for kind in ["linear", "circular"] {
        let (header, rows) = read_csv(&dir.path().join(format!("attenuation_{kind}.csv")));
        assert_eq!(header, ["frequency_hz", "source_db", "output_db", "attenuation_db"]);
        assert!(!rows.is_empty());
        for r in &rows {
            assert!((300.0..=4000.0).contains(&r[0]));
            assert!(r[3].abs() <= 0.5, "{kind} {} Hz: {} dB", r[0], r[3]);
        }
    }
}
