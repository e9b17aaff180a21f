//! Experiment configuration.
//!
//! Defaults reproduce the reference experiments: 8 microphones 6 cm apart,
//! c = 343 m/s, 16 kHz sampling, steering 90°, arrival 45°, 300–4000 Hz.
//!
//! Config files are plain `key = value` lines. Keys are the long flag names
//! without the leading dashes; `_` and `-` are interchangeable. `#` starts a
//! comment.

use std::path::PathBuf;

use serde::Serialize;

use crate::beampattern::GridSpec;
use crate::error::{Error, Result};
use crate::geometry::{radius_to_spacing, spacing_to_radius, ArrayGeometry, ArrayKind, Medium};
use crate::simulator::{InterpolatorSpec, MIN_HALF_WIDTH};

pub const DEFAULT_SPACING_M: f64 = 0.06;
pub const DEFAULT_POLAR_FREQUENCIES: [f64; 3] = [300.0, 2000.0, 4000.0];

pub const MAX_MICS: usize = 1024;

/// Longest config file accepted, in bytes.
pub const MAX_CONFIG_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// `None` lets commands that can run both geometries do so.
    pub geometry: Option<ArrayKind>,
    pub mic_count: usize,
    pub spacing_m: Option<f64>,
    pub radius_m: Option<f64>,
    pub steer_deg: f64,
    pub doa_deg: f64,
    pub sound_speed: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub f_step: f64,
    pub angle_step_deg: f64,
    pub sample_rate: u32,
    pub sinc_half_width: usize,
    pub frequencies: Vec<f64>,
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            geometry: None,
            mic_count: 8,
            spacing_m: None,
            radius_m: None,
            steer_deg: 90.0,
            doa_deg: 45.0,
            sound_speed: crate::geometry::DEFAULT_SOUND_SPEED,
            f_min: 300.0,
            f_max: 4000.0,
            f_step: 10.0,
            angle_step_deg: 1.0,
            sample_rate: 16_000,
            sinc_half_width: crate::simulator::DEFAULT_HALF_WIDTH,
            frequencies: DEFAULT_POLAR_FREQUENCIES.to_vec(),
            input: None,
            out_dir: PathBuf::from("."),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_finite(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_num(key, value)?;
    if !v.is_finite() {
        return Err(Error::Config(format!("{key}: {value:?} is not a finite number")));
    }
    Ok(v)
}

pub fn parse_geometry(value: &str) -> Result<ArrayKind> {
    match value.trim().to_ascii_lowercase().as_str() {
        "linear" | "ula" => Ok(ArrayKind::UniformLinear),
        "circular" | "uca" => Ok(ArrayKind::UniformCircular),
        other => Err(Error::Config(format!(
            "geometry: expected linear or circular, got {other:?}"
        ))),
    }
}

/// Comma- or whitespace-separated frequency list in Hz.
pub fn parse_frequency_list(value: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_finite("freq", s))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(Error::Config("freq: empty frequency list".into()));
    }
    Ok(list)
}

impl ExperimentConfig {
    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "geometry" => self.geometry = Some(parse_geometry(value)?),
            "mics" | "mic-count" => self.mic_count = parse_num(&key, value)?,
            "spacing-m" => self.spacing_m = Some(parse_finite(&key, value)?),
            "radius-m" => self.radius_m = Some(parse_finite(&key, value)?),
            "steer-deg" => self.steer_deg = parse_finite(&key, value)?,
            "doa-deg" => self.doa_deg = parse_finite(&key, value)?,
            "sound-speed" => self.sound_speed = parse_finite(&key, value)?,
            "f-min" => self.f_min = parse_finite(&key, value)?,
            "f-max" => self.f_max = parse_finite(&key, value)?,
            "f-step" => self.f_step = parse_finite(&key, value)?,
            "angle-step-deg" => self.angle_step_deg = parse_finite(&key, value)?,
            "sample-rate" => self.sample_rate = parse_num(&key, value)?,
            "sinc-half-width" => self.sinc_half_width = parse_num(&key, value)?,
            "freq" | "frequencies" => self.frequencies = parse_frequency_list(value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "out-dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        if text.len() > MAX_CONFIG_BYTES {
            return Err(Error::Config("config file is too large".into()));
        }
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                )));
            };
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Checks every invariant that does not depend on the chosen geometry.
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_MICS).contains(&self.mic_count) {
            return Err(Error::Config(format!(
                "mics must lie in 2..={MAX_MICS}, got {}",
                self.mic_count
            )));
        }
        if self.spacing_m.is_some() && self.radius_m.is_some() {
            return Err(Error::Config(
                "give either spacing-m or radius-m, not both".into(),
            ));
        }
        for (name, v) in [
            ("spacing-m", self.spacing_m),
            ("radius-m", self.radius_m),
            ("sound-speed", Some(self.sound_speed)),
        ] {
            if let Some(v) = v {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        for (name, v) in [("steer-deg", self.steer_deg), ("doa-deg", self.doa_deg)] {
            if !(0.0..360.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 360), got {v}")));
            }
        }
        if self.sample_rate == 0 {
            return Err(Error::Config("sample-rate must be positive".into()));
        }
        if self.sinc_half_width < MIN_HALF_WIDTH {
            return Err(Error::Config(format!(
                "sinc-half-width must be at least {MIN_HALF_WIDTH}, got {}",
                self.sinc_half_width
            )));
        }
        if !(self.angle_step_deg > 0.0 && self.angle_step_deg <= 22.5) {
            return Err(Error::Config(format!(
                "angle-step-deg must lie in (0, 22.5], got {}",
                self.angle_step_deg
            )));
        }
        if self.frequencies.iter().any(|f| f.is_nan() || *f <= 0.0) {
            return Err(Error::Config("polar frequencies must be positive".into()));
        }
        self.grid_spec()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn medium(&self) -> Result<Medium> {
        Medium::new(self.sound_speed).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            f_min: self.f_min,
            f_max: self.f_max,
            f_step: self.f_step,
            angle_step: self.angle_step_deg.to_radians(),
        }
    }

    pub fn interpolator(&self) -> Result<InterpolatorSpec> {
        InterpolatorSpec::with_half_width(self.sinc_half_width)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn steer_rad(&self) -> f64 {
        self.steer_deg.to_radians()
    }

    pub fn doa_rad(&self) -> f64 {
        self.doa_deg.to_radians()
    }

    /// Geometries the command should run: the configured one, or both.
    pub fn geometry_kinds(&self) -> Vec<ArrayKind> {
        match self.geometry {
            Some(k) => vec![k],
            None => vec![ArrayKind::UniformLinear, ArrayKind::UniformCircular],
        }
    }

    /// Builds the array of `kind`, deriving spacing from radius or radius from
    /// spacing through `d = 2 r sin(π/N)` where needed.
    pub fn array(&self, kind: ArrayKind) -> Result<ArrayGeometry> {
        self.validate()?;
        let n = self.mic_count;
        let geom = match kind {
            ArrayKind::UniformLinear => {
                let d = match (self.spacing_m, self.radius_m) {
                    (_, Some(r)) => radius_to_spacing(r, n),
                    (Some(d), None) => d,
                    (None, None) => DEFAULT_SPACING_M,
                };
                ArrayGeometry::linear(n, d)
            }
            ArrayKind::UniformCircular => match (self.spacing_m, self.radius_m) {
                (_, Some(r)) => ArrayGeometry::circular(n, r),
                (Some(d), None) => ArrayGeometry::circular_from_spacing(n, d),
                (None, None) => ArrayGeometry::circular_from_spacing(n, DEFAULT_SPACING_M),
            },
        };
        geom.map_err(|e| Error::Config(e.to_string()))
    }

    /// Fully resolved settings for embedding in output metadata.
    pub fn echo(&self, kind: ArrayKind) -> Result<serde_json::Value> {
        let geom = self.array(kind)?;
        let radius = match geom.radius() {
            Some(r) => r,
            None => spacing_to_radius(geom.spacing(), geom.mic_count())?,
        };
        Ok(serde_json::json!({
            "geometry": kind.name(),
            "mic_count": self.mic_count,
            "spacing_m": geom.spacing(),
            "radius_m": radius,
            "steer_deg": self.steer_deg,
            "doa_deg": self.doa_deg,
            "sound_speed_mps": self.sound_speed,
            "f_min_hz": self.f_min,
            "f_max_hz": self.f_max,
            "f_step_hz": self.f_step,
            "angle_step_deg": self.angle_step_deg,
            "sample_rate_hz": self.sample_rate,
            "sinc_half_width": self.sinc_half_width,
            "input": self.input.as_ref().map(|p| p.display().to_string()),
        }))
    }
}

/// Parses a config file body on top of the defaults and validates it.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text(text)?;
    cfg.validate()?;
    Ok(cfg)
}
