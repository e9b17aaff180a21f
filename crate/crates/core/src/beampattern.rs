//! Analytic delay-and-sum response over frequency and arrival angle.
//!
//! The transfer function of a delay-and-sum beamformer steered to `φ`, for a
//! plane wave from `θ` at angular frequency `ω`, is
//!
//! ```text
//! H_φ(ω, θ) = (1/N) Σ_k exp(−j ω (Δ_k(θ) − δ_k(φ)))
//! ```
//!
//! where `Δ_k` are the physical arrival delays and `δ_k` the steering delays.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{self, format_number, magnitude_to_db};
use crate::geometry::{physical_delays, steering_delays, wrap_angle, ArrayGeometry, Medium};

/// Largest number of cells a single grid may hold.
pub const MAX_GRID_CELLS: usize = 50_000_000;

fn lag_vector(geom: &ArrayGeometry, phi: f64, theta: f64, medium: &Medium) -> Vec<f64> {
    physical_delays(geom, theta, medium).difference(&steering_delays(geom, phi, medium))
}

/// Mean of `exp(−jωτ_k)`, summed in microphone order.
fn phasor_mean(lags: &[f64], omega: f64) -> Complex64 {
    let sum = lags
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &tau| {
            acc + Complex64::from_polar(1.0, -omega * tau)
        });
    sum / lags.len() as f64
}

/// `H_φ(ω, θ)` for one steering angle, arrival angle, and angular frequency
/// (rad/s). Negative `omega` is accepted and yields the complex conjugate of
/// the response at `|omega|`.
pub fn transfer_function(
    geom: &ArrayGeometry,
    phi: f64,
    theta: f64,
    omega: f64,
    medium: &Medium,
) -> Result<Complex64> {
    geom.validate()?;
    if !omega.is_finite() {
        return Err(Error::Parameter(format!("omega must be finite, got {omega}")));
    }
    Ok(phasor_mean(&lag_vector(geom, phi, theta, medium), omega))
}

/// Frequency and angle sampling of a [`BeamPatternGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub f_min: f64,
    pub f_max: f64,
    pub f_step: f64,
    /// Radians.
    pub angle_step: f64,
}

impl Default for GridSpec {
    /// 300–4000 Hz in 10 Hz steps, 1° angular resolution.
    fn default() -> Self {
        GridSpec {
            f_min: 300.0,
            f_max: 4000.0,
            f_step: 10.0,
            angle_step: 1f64.to_radians(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let GridSpec {
            f_min,
            f_max,
            f_step,
            angle_step,
        } = *self;
        if !(f_min.is_finite() && f_max.is_finite() && f_min > 0.0 && f_min <= f_max) {
            return Err(Error::Parameter(format!(
                "frequency range must satisfy 0 < f_min <= f_max, got [{f_min}, {f_max}]"
            )));
        }
        if !(f_step.is_finite() && f_step > 0.0) {
            return Err(Error::Parameter(format!("f_step must be positive, got {f_step}")));
        }
        // Tolerate the rounding of a degree-valued step converted to radians.
        if !(angle_step > 0.0 && angle_step <= PI / 8.0 * (1.0 + 1e-12)) {
            return Err(Error::Parameter(format!(
                "angle step must lie in (0, pi/8], got {angle_step}"
            )));
        }
        let rows = self.row_count();
        let cols = (TAU / angle_step).ceil() as usize + 1;
        if rows.saturating_mul(cols) > MAX_GRID_CELLS {
            return Err(Error::Parameter(format!(
                "grid of {rows} x {cols} cells exceeds the {MAX_GRID_CELLS} cell limit"
            )));
        }
        Ok(())
    }

    fn row_count(&self) -> usize {
        let span = (self.f_max - self.f_min) / self.f_step;
        if span > MAX_GRID_CELLS as f64 {
            return usize::MAX;
        }
        (span + 1e-9).floor() as usize + 1
    }

    /// `f_min, f_min + f_step, …` up to and including `f_max`.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.row_count())
            .map(|i| self.f_min + i as f64 * self.f_step)
            .collect()
    }

    /// `0, step, 2·step, …` strictly below 2π.
    pub fn angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let a = i as f64 * self.angle_step;
            if a >= TAU - 1e-12 {
                break;
            }
            out.push(a);
            i += 1;
        }
        out
    }
}

/// Angle samples with the steering direction guaranteed present.
fn angles_with_steering(spec: &GridSpec, phi: f64) -> Vec<f64> {
    let mut angles = spec.angles();
    let tol = 1e-9 * spec.angle_step;
    match angles.iter().position(|a| (a - phi).abs() <= tol) {
        Some(i) => angles[i] = phi,
        None => {
            let at = angles.partition_point(|&a| a < phi);
            angles.insert(at, phi);
        }
    }
    angles
}

/// Complex response sampled on a frequency × arrival-angle grid for one
/// steering direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPatternGrid {
    pub geometry: ArrayGeometry,
    pub medium: Medium,
    pub spec: GridSpec,
    /// Radians, wrapped into `[0, 2π)`.
    pub steering_angle: f64,
    /// Hz, ascending.
    pub frequencies: Vec<f64>,
    /// Radians, ascending over `[0, 2π)`; always contains `steering_angle`.
    pub angles: Vec<f64>,
    /// `values[f][a]` is `H` at `frequencies[f]`, `angles[a]`.
    pub values: Vec<Vec<Complex64>>,
}

/// Evaluates the response on the grid described by `spec`.
///
/// If the steering angle does not fall on the regular angle grid it is
/// inserted as an extra column, so every row holds an exact `1 + 0j` cell.
pub fn compute_grid(
    geom: &ArrayGeometry,
    phi: f64,
    spec: &GridSpec,
    medium: &Medium,
) -> Result<BeamPatternGrid> {
    geom.validate()?;
    spec.validate()?;
    let phi = wrap_angle(phi);
    let angles = angles_with_steering(spec, phi);
    let frequencies = spec.frequencies();
    let lags: Vec<Vec<f64>> = angles
        .iter()
        .map(|&theta| lag_vector(geom, phi, theta, medium))
        .collect();
    // Each cell is an independent sum in fixed order, so the parallel schedule
    // cannot change any value.
    let values = frequencies
        .par_iter()
        .map(|&f| {
            let omega = TAU * f;
            lags.iter().map(|l| phasor_mean(l, omega)).collect()
        })
        .collect();
    Ok(BeamPatternGrid {
        geometry: *geom,
        medium: *medium,
        spec: *spec,
        steering_angle: phi,
        frequencies,
        angles,
        values,
    })
}

impl BeamPatternGrid {
    pub fn magnitudes(&self, row: usize) -> Vec<f64> {
        self.values[row].iter().map(|h| h.norm()).collect()
    }

    /// Index of the column holding the steering angle.
    pub fn steering_column(&self) -> usize {
        self.angles
            .iter()
            .position(|&a| a == self.steering_angle)
            .expect("steering column is always present")
    }

    /// Column index whose angle is closest (circularly) to `angle`.
    pub fn nearest_column(&self, angle: f64) -> usize {
        let angle = wrap_angle(angle);
        let dist = |a: f64| {
            let d = (a - angle).abs();
            d.min(TAU - d)
        };
        let mut best = 0;
        for (i, &a) in self.angles.iter().enumerate() {
            if dist(a) < dist(self.angles[best]) {
                best = i;
            }
        }
        best
    }

    /// Magnitudes in dB, one row per angle, one column per frequency.
    ///
    /// Header: `angle_deg` followed by each frequency in Hz.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let freq_labels: Vec<String> = self.frequencies.iter().map(|&f| format_number(f)).collect();
        export::push_header(
            &mut out,
            std::iter::once("angle_deg").chain(freq_labels.iter().map(String::as_str)),
        );
        for (col, &angle) in self.angles.iter().enumerate() {
            export::push_row(
                &mut out,
                angle.to_degrees(),
                self.values.iter().map(|row| magnitude_to_db(row[col].norm())),
            );
        }
        out
    }

    /// Full complex values plus the metadata needed to reproduce them.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "geometry": self.geometry,
            "equivalent_spacing_m": self.geometry.spacing(),
            "radius_m": self.geometry.radius(),
            "sound_speed_mps": self.medium.sound_speed(),
            "steering_angle_rad": self.steering_angle,
            "steering_angle_deg": self.steering_angle.to_degrees(),
            "grid": {
                "f_min_hz": self.spec.f_min,
                "f_max_hz": self.spec.f_max,
                "f_step_hz": self.spec.f_step,
                "angle_step_deg": self.spec.angle_step.to_degrees(),
            },
            "frequencies_hz": self.frequencies,
            "angles_deg": self.angles.iter().map(|a| a.to_degrees()).collect::<Vec<_>>(),
            "values": self.values,
        })
    }
}

/// Magnitude response at a single frequency, as drawn in a polar plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarSlice {
    /// Hz.
    pub frequency: f64,
    /// Radians.
    pub angles: Vec<f64>,
    /// Linear magnitude, in `[0, 1]`.
    pub magnitudes: Vec<f64>,
}

impl PolarSlice {
    /// Two columns: `angle_deg,magnitude_linear`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        export::push_header(&mut out, ["angle_deg", "magnitude_linear"]);
        for (&a, &m) in self.angles.iter().zip(&self.magnitudes) {
            export::push_row(&mut out, a.to_degrees(), [m]);
        }
        out
    }
}

/// The grid row nearest to `frequency`.
pub fn polar_slice(grid: &BeamPatternGrid, frequency: f64) -> Result<PolarSlice> {
    let (Some(&lo), Some(&hi)) = (grid.frequencies.first(), grid.frequencies.last()) else {
        return Err(Error::Range("grid has no frequency rows".into()));
    };
    let tol = 1e-9 * frequency.abs().max(1.0);
    if !(frequency >= lo - tol && frequency <= hi + tol) {
        return Err(Error::Range(format!(
            "{frequency} Hz lies outside the grid's {lo}..{hi} Hz"
        )));
    }
    let row = grid
        .frequencies
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (*a - frequency)
                .abs()
                .total_cmp(&(*b - frequency).abs())
        })
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok(PolarSlice {
        frequency: grid.frequencies[row],
        angles: grid.angles.clone(),
        magnitudes: grid.magnitudes(row),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    /// Radians.
    pub angle: f64,
    pub magnitude: f64,
}

/// Local maxima of a polar slice, strongest first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LobeReport {
    pub lobes: Vec<Lobe>,
}

impl LobeReport {
    pub fn len(&self) -> usize {
        self.lobes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lobes.is_empty()
    }

    pub fn strongest(&self) -> Option<&Lobe> {
        self.lobes.first()
    }
}

/// Finds every circular local maximum with magnitude at least `min_magnitude`.
///
/// A run of equal samples whose neighbours on both sides are strictly smaller
/// counts as one lobe, reported at the run's central sample. A slice that is
/// constant everywhere is a single lobe at its middle sample.
pub fn find_lobes(slice: &PolarSlice, min_magnitude: f64) -> LobeReport {
    let m = &slice.magnitudes;
    let n = m.len();
    let mut lobes = Vec::new();
    if n == 0 {
        return LobeReport::default();
    }
    let Some(start) = (0..n).find(|&i| m[i] != m[(i + n - 1) % n]) else {
        if m[0] >= min_magnitude {
            lobes.push(Lobe {
                angle: slice.angles[n / 2],
                magnitude: m[0],
            });
        }
        return LobeReport { lobes };
    };
    // Walk runs of equal values, beginning at a run boundary.
    let mut i = 0;
    while i < n {
        let first = (start + i) % n;
        let mut len = 1;
        while len < n && m[(first + len) % n] == m[first] {
            len += 1;
        }
        let before = m[(first + n - 1) % n];
        let after = m[(first + len) % n];
        let v = m[first];
        if before < v && after < v && v >= min_magnitude {
            let center = (first + (len - 1) / 2) % n;
            lobes.push(Lobe {
                angle: slice.angles[center],
                magnitude: v,
            });
        }
        i += len;
    }
    lobes.sort_by(|a, b| {
        b.magnitude
            .total_cmp(&a.magnitude)
            .then(a.angle.total_cmp(&b.angle))
    });
    LobeReport { lobes }
}
