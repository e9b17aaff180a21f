//! The `beamsim` command line.
//!
//! Each subcommand is a plain function from a resolved [`ExperimentConfig`]
//! to a [`Report`] listing the files written and a human-readable summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, attenuation_of, DEFAULT_RESOLUTION_HZ};
use crate::beampattern::{compute_grid, find_lobes, polar_slice};
use crate::config::{parse_geometry, ExperimentConfig};
use crate::error::Result;
use crate::export::format_number;
use crate::geometry::ArrayKind;
use crate::signal::{bundled_speech, MonoSignal};
use crate::simulator::{beamform, check_oversampling, propagate};
use crate::wav;

#[derive(Debug, Parser)]
#[command(
    name = "beamsim",
    version,
    about = "Delay-and-sum beamforming simulator for linear and circular microphone arrays"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Beam pattern over frequency and arrival angle (CSV in dB + JSON).
    Beampattern(CommonArgs),
    /// Polar slices of the beam pattern at selected frequencies.
    Polar {
        #[command(flatten)]
        common: CommonArgs,
        /// Frequencies in Hz; repeat or comma-separate. Default 300,2000,4000.
        #[arg(long = "freq", value_delimiter = ',')]
        freq: Vec<f64>,
    },
    /// Run a mono WAV (or the bundled speech-like signal) through the array.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the N-channel microphone capture.
        #[arg(long)]
        capture: bool,
    },
    /// Spectral attenuation between the source and the beamformer output.
    Attenuation {
        #[command(flatten)]
        common: CommonArgs,
        /// Spectral bin spacing in Hz.
        #[arg(long, default_value_t = DEFAULT_RESOLUTION_HZ)]
        resolution_hz: f64,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// linear or circular. Polar and attenuation run both when omitted.
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long)]
    pub mics: Option<usize>,
    #[arg(long)]
    pub spacing_m: Option<f64>,
    #[arg(long)]
    pub radius_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub steer_deg: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub doa_deg: Option<f64>,
    #[arg(long)]
    pub sound_speed: Option<f64>,
    #[arg(long)]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long)]
    pub f_step: Option<f64>,
    #[arg(long)]
    pub angle_step_deg: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
    #[arg(long)]
    pub sinc_half_width: Option<usize>,
    /// Mono 16-bit PCM or 32-bit float WAV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use the built-in reference settings for everything not given.
    #[arg(long)]
    pub defaults: bool,
}

impl CommonArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            cfg.apply_text(&text)?;
        }
        if let Some(g) = &self.geometry {
            cfg.geometry = Some(parse_geometry(g)?);
        }
        // One of spacing/radius on the command line replaces either from the file.
        if self.spacing_m.is_some() || self.radius_m.is_some() {
            cfg.spacing_m = self.spacing_m;
            cfg.radius_m = self.radius_m;
        }
        macro_rules! take {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { cfg.$target = v; })*
            };
        }
        take!(
            mics => mic_count,
            steer_deg => steer_deg,
            doa_deg => doa_deg,
            sound_speed => sound_speed,
            f_min => f_min,
            f_max => f_max,
            f_step => f_step,
            angle_step_deg => angle_step_deg,
            sample_rate => sample_rate,
            sinc_half_width => sinc_half_width,
            out_dir => out_dir,
        );
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Parses nothing; runs an already-parsed command line.
pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Beampattern(common) => cmd_beampattern(&common.resolve()?),
        Command::Polar { common, freq } => {
            let mut cfg = common.resolve()?;
            if !freq.is_empty() {
                cfg.frequencies = freq.clone();
                cfg.validate()?;
            }
            cmd_polar(&cfg)
        }
        Command::Simulate { common, capture } => cmd_simulate(&common.resolve()?, *capture),
        Command::Attenuation {
            common,
            resolution_hz,
        } => cmd_attenuation(&common.resolve()?, *resolution_hz),
    }
}

/// Writes every `(name, contents)` pair into `dir`, creating it if needed.
fn write_all(dir: &Path, outputs: Vec<(String, Vec<u8>)>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    outputs
        .into_iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            fs::write(&path, bytes)?;
            Ok(path)
        })
        .collect()
}

fn json_bytes(value: &serde_json::Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Beam pattern grid for one geometry (linear unless configured otherwise).
pub fn cmd_beampattern(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = cfg.geometry.unwrap_or(ArrayKind::UniformLinear);
    let geom = cfg.array(kind)?;
    let grid = compute_grid(&geom, cfg.steer_rad(), &cfg.grid_spec(), &cfg.medium()?)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{kind} array, {} mics, steering {} deg",
        geom.mic_count(),
        format_number(cfg.steer_deg)
    );
    for (row, &f) in grid.frequencies.iter().enumerate() {
        let slice = polar_slice(&grid, f)?;
        let lobes = find_lobes(&slice, 0.0);
        let main = lobes.strongest().expect("a circular slice has a maximum");
        let _ = writeln!(
            summary,
            "{} Hz: {} lobes, strongest at {} deg (|H| = {})",
            format_number(f),
            lobes.len(),
            format_number(main.angle.to_degrees()),
            format_number(grid.values[row][grid.nearest_column(main.angle)].norm()),
        );
    }

    let mut json = grid.to_json();
    json["config"] = cfg.echo(kind)?;
    let files = write_all(
        &cfg.out_dir,
        vec![
            (format!("beampattern_{kind}.csv"), grid.to_csv().into_bytes()),
            (format!("beampattern_{kind}.json"), json_bytes(&json)?),
        ],
    )?;
    Ok(Report { files, summary })
}

/// Requested polar frequencies, duplicates removed, first occurrence kept.
pub fn dedup_frequencies(freqs: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &f in freqs {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// One two-column CSV per frequency and geometry.
pub fn cmd_polar(cfg: &ExperimentConfig) -> Result<Report> {
    let freqs = dedup_frequencies(&cfg.frequencies);
    let medium = cfg.medium()?;
    let mut outputs = Vec::new();
    let mut summary = String::new();
    for kind in cfg.geometry_kinds() {
        let geom = cfg.array(kind)?;
        let grid = compute_grid(&geom, cfg.steer_rad(), &cfg.grid_spec(), &medium)?;
        for &f in &freqs {
            let slice = polar_slice(&grid, f)?;
            let lobes = find_lobes(&slice, 0.0);
            let main = lobes.strongest().expect("non-empty slice");
            let _ = writeln!(
                summary,
                "{kind} {} Hz: {} lobes, strongest at {} deg",
                format_number(slice.frequency),
                lobes.len(),
                format_number(main.angle.to_degrees())
            );
            outputs.push((
                format!("polar_{kind}_{}hz.csv", format_number(f)),
                slice.to_csv().into_bytes(),
            ));
        }
    }
    let files = write_all(&cfg.out_dir, outputs)?;
    Ok(Report { files, summary })
}

/// The configured input WAV, or the bundled speech-like signal.
pub fn load_source(cfg: &ExperimentConfig) -> Result<(MonoSignal, String)> {
    match &cfg.input {
        Some(path) => Ok((
            wav::read_mono(path, cfg.sample_rate)?,
            path.display().to_string(),
        )),
        None => Ok((
            bundled_speech(cfg.sample_rate as f64)?,
            "bundled speech-like signal".to_string(),
        )),
    }
}

/// Propagation and beamforming of the source for one geometry.
pub fn cmd_simulate(cfg: &ExperimentConfig, write_capture: bool) -> Result<Report> {
    let kind = cfg.geometry.unwrap_or(ArrayKind::UniformLinear);
    let geom = cfg.array(kind)?;
    let medium = cfg.medium()?;
    let spec = cfg.interpolator()?;
    let (source, source_name) = load_source(cfg)?;
    check_oversampling(source.sample_rate(), cfg.f_max);

    let capture = propagate(&source, &geom, cfg.doa_rad(), &medium, &spec)?;
    let out = beamform(&capture, cfg.steer_rad(), &medium, &spec)?;

    let meta = serde_json::json!({
        "source": source_name,
        "samples": source.len(),
        "latency_samples": out.latency_samples,
        "latency_seconds": out.latency_seconds(),
        "valid_start": out.valid.start,
        "valid_end": out.valid.end,
        "interpolator": spec,
        "config": cfg.echo(kind)?,
    });
    let mut outputs = vec![
        (format!("simulate_{kind}.wav"), wav::encode_mono_f32(&out.signal)?),
        (format!("simulate_{kind}.json"), json_bytes(&meta)?),
    ];
    if write_capture {
        let chans: Vec<&[f64]> = capture.channels.iter().map(Vec::as_slice).collect();
        outputs.push((
            format!("capture_{kind}.wav"),
            wav::encode_f32(&chans, capture.sample_rate)?,
        ));
    }
    let files = write_all(&cfg.out_dir, outputs)?;
    let summary = format!(
        "{kind}: {} samples, latency {} samples, valid region {}..{}\n",
        source.len(),
        out.latency_samples,
        out.valid.start,
        out.valid.end
    );
    Ok(Report { files, summary })
}

/// Attenuation spectra for each configured geometry.
pub fn cmd_attenuation(cfg: &ExperimentConfig, resolution_hz: f64) -> Result<Report> {
    let medium = cfg.medium()?;
    let spec = cfg.interpolator()?;
    let (source, source_name) = load_source(cfg)?;
    let band = (cfg.f_min, cfg.f_max);
    let mut outputs = Vec::new();
    let mut summary = String::new();
    for kind in cfg.geometry_kinds() {
        let geom = cfg.array(kind)?;
        let capture = propagate(&source, &geom, cfg.doa_rad(), &medium, &spec)?;
        let out = beamform(&capture, cfg.steer_rad(), &medium, &spec)?;
        let att = attenuation_of(&source, &out, band, resolution_hz)?;

        let _ = writeln!(summary, "{kind}: {}", analysis::describe(&att, band.0, band.1)?);
        for (lo, hi) in [(1000.0, 4000.0), (300.0, 600.0)] {
            if lo >= band.0 && hi <= band.1 {
                let _ = writeln!(summary, "{kind}: {}", analysis::describe(&att, lo, hi)?);
            }
        }

        let meta = serde_json::json!({
            "source": source_name,
            "latency_samples": out.latency_samples,
            "valid_start": out.valid.start,
            "valid_end": out.valid.end,
            "estimator": {
                "method": "averaged magnitude periodogram",
                "window": "hann",
                "segment_len": att.segment_len,
                "overlap": 0.5,
                "resolution_hz": att.sample_rate / att.segment_len as f64,
                "floor_db": analysis::SPECTRUM_FLOOR_DB,
            },
            "spectrum": att,
            "config": cfg.echo(kind)?,
        });
        outputs.push((format!("attenuation_{kind}.csv"), att.to_csv().into_bytes()));
        outputs.push((format!("attenuation_{kind}.json"), json_bytes(&meta)?));
    }
    let files = write_all(&cfg.out_dir, outputs)?;
    Ok(Report { files, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        fs::write(&path, "mics = 6\nspacing-m = 0.05\nsteer-deg = 10\n").unwrap();
        let args = CommonArgs {
            config: Some(path),
            radius_m: Some(0.07),
            steer_deg: Some(20.0),
            ..CommonArgs::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.mic_count, 6);
        assert_eq!(cfg.steer_deg, 20.0);
        assert_eq!(cfg.radius_m, Some(0.07));
        assert_eq!(cfg.spacing_m, None);
    }

    #[test]
    fn bad_flags_are_config_errors() {
        let args = CommonArgs {
            geometry: Some("hex".into()),
            ..CommonArgs::default()
        };
        assert!(matches!(args.resolve(), Err(Error::Config(_))));
        let args = CommonArgs {
            steer_deg: Some(400.0),
            ..CommonArgs::default()
        };
        assert_eq!(args.resolve().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn dedup_keeps_order() {
        assert_eq!(
            dedup_frequencies(&[2000.0, 300.0, 2000.0, 4000.0, 300.0]),
            vec![2000.0, 300.0, 4000.0]
        );
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
