//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use beamsim::analysis::{attenuation_of, band_average_attenuation, DEFAULT_RESOLUTION_HZ};
use beamsim::beampattern::{compute_grid, find_lobes, polar_slice, transfer_function, GridSpec};
use beamsim::geometry::{radius_to_spacing, spacing_to_radius};
use beamsim::signal::{bundled_speech, rms, tone};
use beamsim::simulator::{end_to_end, steady_state_gain, InterpolatorSpec};
use beamsim::{ArrayGeometry, Medium};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 16_000.0;
const MICS: usize = 8;
const SPACING: f64 = 0.06;

const UNITY_TOL: f64 = 1e-12;
const PEAK_THRESHOLD: f64 = 0.999;
const PEAK_WINDOW_DEG: f64 = 0.5;
const SCAN_STEP_DEG: f64 = 0.25;
/// The lobe count is eight across roughly 2.7–4 kHz; 3 kHz sits inside that.
const EIGHT_LOBE_FREQ: f64 = 3000.0;
const GAIN_REL_TOL: f64 = 0.01;
const GAIN_ABS_TOL: f64 = 0.02;
const GAIN_ABS_BELOW: f64 = 0.1;
const FIDELITY_TOL: f64 = 1e-3;
const LINEAR_BAND_DB: (f64, f64) = (20.0, 30.0);
const CIRCULAR_PEAK_DB: f64 = 20.0;
const RADIUS_NOMINAL: f64 = 0.0783944;
/// The nominal radius is quoted to 6 significant digits.
const RADIUS_NOMINAL_TOL: f64 = 1e-6;
const ROUND_TRIP_ULPS: f64 = 2.0;

fn linear() -> ArrayGeometry {
    ArrayGeometry::linear(MICS, SPACING).unwrap()
}

fn circular() -> ArrayGeometry {
    ArrayGeometry::circular_from_spacing(MICS, SPACING).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unity_gain() -> Outcome {
    let c = Medium::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for geom in [linear(), circular()] {
        for _ in 0..100 {
            let phi = rng.random_range(0.0..TAU);
            let omega = TAU * rng.random_range(0.0..=8000.0);
            let h = transfer_function(&geom, phi, phi, omega, &c).unwrap();
            worst = worst.max((h.norm() - 1.0).abs());
        }
    }
    outcome(worst <= UNITY_TOL, format!("max ||H|-1| = {worst:.3e}"))
}

fn linear_ambiguity_lobe() -> Outcome {
    let c = Medium::default();
    let grid = compute_grid(&linear(), FRAC_PI_2, &GridSpec::default(), &c).unwrap();
    let col = grid.nearest_column(1.5 * PI);
    let worst = (0..grid.frequencies.len())
        .map(|row| (grid.values[row][col].norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let at_270 = (grid.angles[col].to_degrees() - 270.0).abs() < 1e-9;
    outcome(
        at_270 && worst <= UNITY_TOL,
        format!("{} rows, max ||H(270)|-1| = {worst:.3e}", grid.frequencies.len()),
    )
}

fn circular_uniqueness() -> Outcome {
    let c = Medium::default();
    let geom = circular();
    let steps = (360.0 / SCAN_STEP_DEG) as usize;
    let mut peaks = Vec::new();
    for i in 0..steps {
        let deg = i as f64 * SCAN_STEP_DEG;
        let h = transfer_function(&geom, FRAC_PI_2, deg.to_radians(), TAU * 2000.0, &c).unwrap();
        if h.norm() > PEAK_THRESHOLD {
            peaks.push(deg);
        }
    }
    let stray: Vec<f64> = peaks
        .iter()
        .copied()
        .filter(|d| (d - 90.0).abs() > PEAK_WINDOW_DEG)
        .collect();
    outcome(
        !peaks.is_empty() && stray.is_empty(),
        format!("{} angles above {PEAK_THRESHOLD}, stray {stray:?}", peaks.len()),
    )
}

fn circular_lobe_count() -> Outcome {
    let c = Medium::default();
    let grid = compute_grid(&circular(), FRAC_PI_2, &GridSpec::default(), &c).unwrap();
    let count = |f: f64| find_lobes(&polar_slice(&grid, f).unwrap(), 0.0).len();
    let at_2k = count(2000.0);
    let pinned = count(EIGHT_LOBE_FREQ);
    outcome(
        pinned == 8,
        format!("{pinned} lobes at {EIGHT_LOBE_FREQ} Hz ({at_2k} at 2000 Hz, reported only)"),
    )
}

fn oracle_equivalence() -> Outcome {
    let c = Medium::default();
    let spec = InterpolatorSpec::default();
    let mut worst_rel: f64 = 0.0;
    let mut failures = Vec::new();
    for geom in [linear(), circular()] {
        for f in [300.0, 500.0, 1000.0, 2000.0, 3000.0, 4000.0] {
            let src = tone(f, 0.5, 8000, FS).unwrap();
            for a in 0..16 {
                let theta = a as f64 * TAU / 16.0;
                let out = end_to_end(&src, &geom, theta, FRAC_PI_2, &c, &spec).unwrap();
                let measured = steady_state_gain(&src, &out, f).unwrap();
                let h = transfer_function(&geom, FRAC_PI_2, theta, TAU * f, &c).unwrap().norm();
                let err = (measured - h).abs();
                let ok = if h < GAIN_ABS_BELOW {
                    err <= GAIN_ABS_TOL
                } else {
                    worst_rel = worst_rel.max(err / h);
                    err <= GAIN_REL_TOL * h
                };
                if !ok {
                    failures.push(format!("{} {f} Hz {:.1} deg", geom.kind(), theta.to_degrees()));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("192 cases, worst relative error {worst_rel:.2e}, failures {failures:?}"),
    )
}

fn distortion_free_capture() -> Outcome {
    let c = Medium::default();
    let spec = InterpolatorSpec::default();
    let src = bundled_speech(FS).unwrap();
    let mut worst: f64 = 0.0;
    for geom in [linear(), circular()] {
        for angle in [FRAC_PI_2, FRAC_PI_4] {
            let out = end_to_end(&src, &geom, angle, angle, &c, &spec).unwrap();
            let l = out.latency_samples;
            let reference = &src.samples()[out.valid.start - l..out.valid.end - l];
            let diff: Vec<f64> = out
                .valid_samples()
                .iter()
                .zip(reference)
                .map(|(y, x)| y - x)
                .collect();
            worst = worst.max(rms(&diff) / rms(reference));
        }
    }
    outcome(worst <= FIDELITY_TOL, format!("max relative RMS error {worst:.3e}"))
}

fn speech_attenuation() -> Outcome {
    let c = Medium::default();
    let spec = InterpolatorSpec::default();
    let src = bundled_speech(FS).unwrap();
    let band = (300.0, 4000.0);
    let run = |geom: &ArrayGeometry| {
        let out = end_to_end(&src, geom, FRAC_PI_4, FRAC_PI_2, &c, &spec).unwrap();
        attenuation_of(&src, &out, band, DEFAULT_RESOLUTION_HZ).unwrap()
    };
    let lin = run(&linear());
    let circ = run(&circular());
    let lin_avg = band_average_attenuation(&lin, 1000.0, 4000.0).unwrap();
    let circ_peak = circ.peak_attenuation(300.0, 4000.0).unwrap();
    let lin_low = band_average_attenuation(&lin, 300.0, 600.0).unwrap();
    let circ_low = band_average_attenuation(&circ, 300.0, 600.0).unwrap();
    outcome(
        (LINEAR_BAND_DB.0..=LINEAR_BAND_DB.1).contains(&lin_avg) && circ_peak >= CIRCULAR_PEAK_DB,
        format!(
            "linear 1-4 kHz mean {lin_avg:.2} dB, circular peak {circ_peak:.2} dB; \
             300-600 Hz mean: linear {lin_low:.2} dB, circular {circ_low:.2} dB (reported only)"
        ),
    )
}

fn geometry_algebra() -> Outcome {
    let r = spacing_to_radius(SPACING, MICS).unwrap();
    let back = radius_to_spacing(r, MICS);
    let round_trip = (back - SPACING).abs();
    let nominal = (r - RADIUS_NOMINAL).abs();
    outcome(
        nominal <= RADIUS_NOMINAL_TOL && round_trip <= ROUND_TRIP_ULPS * f64::EPSILON * SPACING,
        format!("r = {r:.10} m, round-trip error {round_trip:.1e} m"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_beamsim"))
            .args(["beampattern", "--defaults", "--out-dir"])
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("run {run} exited with {}", status.status));
        }
        csvs.push(std::fs::read(out.join("beampattern_linear.csv")).unwrap());
    }
    outcome(
        csvs[0] == csvs[1] && !csvs[0].is_empty(),
        format!("{} bytes per CSV", csvs[0].len()),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 unity gain at the steering angle", Duration::from_secs(1), unity_gain),
        ("2 linear ambiguity lobe at 270 deg", Duration::from_secs(1), linear_ambiguity_lobe),
        ("3 circular single main lobe", Duration::from_secs(5), circular_uniqueness),
        ("4 circular lobe count", Duration::from_secs(10), circular_lobe_count),
        ("5 simulator gain matches H", Duration::from_secs(60), oracle_equivalence),
        ("6 steered capture fidelity", Duration::from_secs(10), distortion_free_capture),
        ("7 speech attenuation", Duration::from_secs(30), speech_attenuation),
        ("8 spacing and radius", Duration::from_secs(1), geometry_algebra),
        ("9 deterministic beam pattern CSV", Duration::from_secs(10), determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({}; {:.2}s of {}s)",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
