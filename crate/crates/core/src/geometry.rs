//! Array geometries, the propagation medium, and per-microphone delays.
//!
//! Microphones are numbered `k = 1..=N` in every formula below; the returned
//! [`DelayVector`] stores them 0-based, so `delays[0]` belongs to `k = 1`.
//!
//! Angle convention: for a uniform linear array the arrival angle is measured
//! from the array axis, so 90° is broadside. For a uniform circular array,
//! microphone `k` sits at azimuth `k·2π/N` and angles share that frame.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of sound in dry air at 20 °C, in m/s.
pub const DEFAULT_SOUND_SPEED: f64 = 343.0;

/// Wraps an angle in radians into `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayKind {
    UniformLinear,
    UniformCircular,
}

impl ArrayKind {
    pub fn name(self) -> &'static str {
        match self {
            ArrayKind::UniformLinear => "linear",
            ArrayKind::UniformCircular => "circular",
        }
    }
}

impl fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape and size of a microphone array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrayGeometry {
    /// `mic_count` microphones on a line, `spacing` meters apart.
    UniformLinear { mic_count: usize, spacing: f64 },
    /// `mic_count` microphones evenly spread on a circle of `radius` meters.
    UniformCircular { mic_count: usize, radius: f64 },
}

impl ArrayGeometry {
    pub fn linear(mic_count: usize, spacing: f64) -> Result<Self> {
        check_mic_count(mic_count)?;
        check_length("spacing", spacing)?;
        Ok(ArrayGeometry::UniformLinear { mic_count, spacing })
    }

    pub fn circular(mic_count: usize, radius: f64) -> Result<Self> {
        check_mic_count(mic_count)?;
        check_length("radius", radius)?;
        Ok(ArrayGeometry::UniformCircular { mic_count, radius })
    }

    /// Circular array whose adjacent microphones are `spacing` meters apart.
    pub fn circular_from_spacing(mic_count: usize, spacing: f64) -> Result<Self> {
        check_length("spacing", spacing)?;
        Self::circular(mic_count, spacing_to_radius(spacing, mic_count)?)
    }

    pub fn kind(&self) -> ArrayKind {
        match self {
            ArrayGeometry::UniformLinear { .. } => ArrayKind::UniformLinear,
            ArrayGeometry::UniformCircular { .. } => ArrayKind::UniformCircular,
        }
    }

    pub fn mic_count(&self) -> usize {
        match *self {
            ArrayGeometry::UniformLinear { mic_count, .. }
            | ArrayGeometry::UniformCircular { mic_count, .. } => mic_count,
        }
    }

    /// Distance between adjacent microphones. For a circular array this is the
    /// chord `2·r·sin(π/N)`.
    pub fn spacing(&self) -> f64 {
        match *self {
            ArrayGeometry::UniformLinear { spacing, .. } => spacing,
            ArrayGeometry::UniformCircular { mic_count, radius } => {
                radius_to_spacing(radius, mic_count)
            }
        }
    }

    /// Radius of a circular array; `None` for a linear one.
    pub fn radius(&self) -> Option<f64> {
        match *self {
            ArrayGeometry::UniformLinear { .. } => None,
            ArrayGeometry::UniformCircular { radius, .. } => Some(radius),
        }
    }

    /// Physical extent: `(N−1)·d` for linear, `2r` for circular.
    pub fn aperture(&self) -> f64 {
        match *self {
            ArrayGeometry::UniformLinear { mic_count, spacing } => {
                (mic_count - 1) as f64 * spacing
            }
            ArrayGeometry::UniformCircular { radius, .. } => 2.0 * radius,
        }
    }

    /// Upper bound on `|delay|` for any angle: `aperture / (2c)`.
    pub fn max_delay(&self, medium: &Medium) -> f64 {
        self.aperture() / (2.0 * medium.sound_speed())
    }

    /// Re-checks the constructor invariants. Geometries built through serde or
    /// struct literals bypass the constructors.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArrayGeometry::UniformLinear { mic_count, spacing } => {
                check_mic_count(mic_count)?;
                check_length("spacing", spacing)
            }
            ArrayGeometry::UniformCircular { mic_count, radius } => {
                check_mic_count(mic_count)?;
                check_length("radius", radius)
            }
        }
    }
}

fn check_mic_count(mic_count: usize) -> Result<()> {
    if mic_count < 2 {
        return Err(Error::InvalidGeometry(format!(
            "at least 2 microphones required, got {mic_count}"
        )));
    }
    Ok(())
}

fn check_length(what: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "{what} must be a positive finite length, got {value}"
        )));
    }
    Ok(())
}

/// The propagation medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    sound_speed: f64,
}

impl Medium {
    pub fn new(sound_speed: f64) -> Result<Self> {
        if !(sound_speed.is_finite() && sound_speed > 0.0) {
            return Err(Error::Parameter(format!(
                "sound speed must be positive and finite, got {sound_speed}"
            )));
        }
        Ok(Medium { sound_speed })
    }

    /// Speed of sound in m/s.
    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }
}

impl Default for Medium {
    fn default() -> Self {
        Medium {
            sound_speed: DEFAULT_SOUND_SPEED,
        }
    }
}

/// Per-microphone delays in seconds, one entry per microphone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DelayVector(Vec<f64>);

impl DelayVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, d| acc.max(d.abs()))
    }

    /// Element-wise `self − other`.
    pub fn difference(&self, other: &DelayVector) -> Vec<f64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }
}

impl Deref for DelayVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn linear_delays(geom: &ArrayGeometry, angle: f64, medium: &Medium) -> Result<DelayVector> {
    let ArrayGeometry::UniformLinear { mic_count, spacing } = *geom else {
        return Err(Error::GeometryMismatch(format!(
            "expected a linear array, got {}",
            geom.kind()
        )));
    };
    let scale = spacing / medium.sound_speed() * wrap_angle(angle).cos();
    let center = (mic_count + 1) as f64 / 2.0;
    Ok(DelayVector(
        (1..=mic_count)
            .map(|k| scale * (k as f64 - center))
            .collect(),
    ))
}

fn circular_delays(geom: &ArrayGeometry, angle: f64, medium: &Medium) -> Result<DelayVector> {
    let ArrayGeometry::UniformCircular { mic_count, radius } = *geom else {
        return Err(Error::GeometryMismatch(format!(
            "expected a circular array, got {}",
            geom.kind()
        )));
    };
    let angle = wrap_angle(angle);
    let scale = radius / medium.sound_speed();
    let n = mic_count as f64;
    Ok(DelayVector(
        (1..=mic_count)
            .map(|k| scale * (angle - k as f64 * TAU / n).cos())
            .collect(),
    ))
}

/// Arrival delays `Δ_k = (d/c)(k − (N+1)/2) cos θ` of a plane wave from `theta`.
pub fn linear_physical_delays(
    geom: &ArrayGeometry,
    theta: f64,
    medium: &Medium,
) -> Result<DelayVector> {
    linear_delays(geom, theta, medium)
}

/// Steering delays `δ_k` pointing a linear array at `phi`; same law as the
/// physical delays.
pub fn linear_steering_delays(
    geom: &ArrayGeometry,
    phi: f64,
    medium: &Medium,
) -> Result<DelayVector> {
    linear_delays(geom, phi, medium)
}

/// Arrival delays `Δ_k = (r/c) cos(θ − 2πk/N)` on a circular array.
pub fn circular_physical_delays(
    geom: &ArrayGeometry,
    theta: f64,
    medium: &Medium,
) -> Result<DelayVector> {
    circular_delays(geom, theta, medium)
}

pub fn circular_steering_delays(
    geom: &ArrayGeometry,
    phi: f64,
    medium: &Medium,
) -> Result<DelayVector> {
    circular_delays(geom, phi, medium)
}

/// Physical delays for whichever kind `geom` is.
pub fn physical_delays(geom: &ArrayGeometry, theta: f64, medium: &Medium) -> DelayVector {
    match geom.kind() {
        ArrayKind::UniformLinear => linear_delays(geom, theta, medium),
        ArrayKind::UniformCircular => circular_delays(geom, theta, medium),
    }
    .expect("kind dispatch matches geometry")
}

/// Steering delays for whichever kind `geom` is.
pub fn steering_delays(geom: &ArrayGeometry, phi: f64, medium: &Medium) -> DelayVector {
    physical_delays(geom, phi, medium)
}

/// Radius of the circle on which `mic_count` microphones sit `spacing` apart:
/// `r = d / (2 sin(π/N))`.
pub fn spacing_to_radius(spacing: f64, mic_count: usize) -> Result<f64> {
    check_mic_count(mic_count)?;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::Parameter(format!(
            "spacing must be positive and finite, got {spacing}"
        )));
    }
    Ok(spacing / (2.0 * (PI / mic_count as f64).sin()))
}

/// Inverse of [`spacing_to_radius`]: `d = 2 r sin(π/N)`.
pub fn radius_to_spacing(radius: f64, mic_count: usize) -> f64 {
    2.0 * radius * (PI / mic_count as f64).sin()
}
