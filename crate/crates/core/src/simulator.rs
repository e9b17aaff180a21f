//! Time-domain far-field simulation of a delay-and-sum beamformer.
//!
//! A source is delayed once per microphone to synthesize the array capture,
//! then each channel is shifted by its steering delay and the channels are
//! averaged. Every shift goes through a windowed-sinc fractional-delay filter.
//!
//! Delays can be negative. Each stage adds a constant whole-sample offset
//! (the geometry's half-aperture travel time, rounded up) so that every
//! applied shift is non-negative. The offsets depend only on the geometry,
//! so the end-to-end latency is the same for every arrival and steering
//! angle and is reported with the output.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{physical_delays, steering_delays, ArrayGeometry, Medium};
use crate::signal::MonoSignal;

/// Simulation rate must be at least this multiple of the top analysis
/// frequency for the digital delays to be accurate.
pub const MIN_OVERSAMPLING: f64 = 4.0;

pub const DEFAULT_HALF_WIDTH: usize = 64;
pub const MIN_HALF_WIDTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolatorKind {
    WindowedSinc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
}

/// Fractional-delay interpolator settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolatorSpec {
    pub kind: InterpolatorKind,
    /// Taps on each side of the kernel center.
    pub half_width: usize,
    pub window: WindowKind,
}

impl Default for InterpolatorSpec {
    fn default() -> Self {
        InterpolatorSpec {
            kind: InterpolatorKind::WindowedSinc,
            half_width: DEFAULT_HALF_WIDTH,
            window: WindowKind::Hann,
        }
    }
}

impl InterpolatorSpec {
    pub fn with_half_width(half_width: usize) -> Result<Self> {
        let spec = InterpolatorSpec {
            half_width,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width < MIN_HALF_WIDTH {
            return Err(Error::Parameter(format!(
                "interpolator half width must be at least {MIN_HALF_WIDTH}, got {}",
                self.half_width
            )));
        }
        Ok(())
    }

    /// Kernel taps for a fractional shift `frac ∈ (0, 1)`; tap `i` multiplies
    /// input sample `n − (i − half_width)` when producing output `n`, before
    /// the integer part of the shift is applied.
    fn kernel(&self, frac: f64) -> Vec<f64> {
        let hw = self.half_width as isize;
        (-hw..=hw + 1)
            .map(|j| {
                let x = j as f64 - frac;
                sinc(x) * hann(x, self.half_width as f64)
            })
            .collect()
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

fn hann(x: f64, half_width: f64) -> f64 {
    if x.abs() >= half_width {
        0.0
    } else {
        0.5 * (1.0 + (PI * x / half_width).cos())
    }
}

/// Shifts `samples` later by `delay` samples (any real value), keeping the
/// length. Samples outside the input are treated as zero.
fn delay_samples(samples: &[f64], delay: f64, spec: &InterpolatorSpec) -> Vec<f64> {
    let len = samples.len() as isize;
    let whole = delay.floor();
    let frac = delay - whole;
    let whole = whole as isize;
    if frac == 0.0 {
        return (0..len)
            .map(|n| {
                let m = n - whole;
                if (0..len).contains(&m) {
                    samples[m as usize]
                } else {
                    0.0
                }
            })
            .collect();
    }
    let kernel = spec.kernel(frac);
    let hw = spec.half_width as isize;
    (0..len)
        .map(|n| {
            // Input index for tap i is n − whole − (i − hw).
            let base = n - whole + hw;
            let i_lo = (base - (len - 1)).max(0);
            let i_hi = base.min(kernel.len() as isize - 1);
            let mut acc = 0.0;
            let mut i = i_lo;
            while i <= i_hi {
                acc += kernel[i as usize] * samples[(base - i) as usize];
                i += 1;
            }
            acc
        })
        .collect()
}

/// Delays `signal` by `delay_seconds` (negative values advance it).
///
/// The kernel is centered, so no extra group delay is introduced: the output
/// approximates `s(t − delay_seconds)` sample for sample.
pub fn fractional_delay(
    signal: &MonoSignal,
    delay_seconds: f64,
    spec: &InterpolatorSpec,
) -> Result<MonoSignal> {
    spec.validate()?;
    let delay = delay_seconds * signal.sample_rate();
    if !delay.is_finite() || delay.abs() > signal.len() as f64 {
        return Err(Error::Range(format!(
            "delay of {delay_seconds} s exceeds the {} s signal",
            signal.duration()
        )));
    }
    MonoSignal::new(
        delay_samples(signal.samples(), delay, spec),
        signal.sample_rate(),
    )
}

/// Whole-sample offset that makes every delay of `geom` non-negative.
pub fn stage_offset_samples(geom: &ArrayGeometry, medium: &Medium, sample_rate: f64) -> usize {
    // Guard against the product landing a hair above an integer.
    (geom.max_delay(medium) * sample_rate * (1.0 - 1e-12)).ceil() as usize
}

/// Logs a warning and returns `false` when `sample_rate` is below four times
/// `top_frequency`.
pub fn check_oversampling(sample_rate: f64, top_frequency: f64) -> bool {
    let ok = sample_rate >= MIN_OVERSAMPLING * top_frequency;
    if !ok {
        log::warn!(
            "sample rate {sample_rate} Hz is below {MIN_OVERSAMPLING}x the {top_frequency} Hz \
             analysis band; digital delays lose accuracy"
        );
    }
    ok
}

/// Simulated microphone outputs for one plane-wave arrival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultichannelCapture {
    /// One channel per microphone, `k = 1..N` in order.
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: f64,
    pub geometry: ArrayGeometry,
    /// Radians.
    pub arrival_angle: f64,
    /// Constant shift added to every channel so all delays are causal.
    pub latency_samples: usize,
}

impl MultichannelCapture {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != self.geometry.mic_count() {
            return Err(Error::GeometryMismatch(format!(
                "capture has {} channels but the array has {} microphones",
                self.channels.len(),
                self.geometry.mic_count()
            )));
        }
        let len = self.len();
        if self.channels.iter().any(|c| c.len() != len) {
            return Err(Error::Parameter("capture channels differ in length".into()));
        }
        crate::signal::check_sample_rate(self.sample_rate)
    }
}

/// Synthesizes the array capture of `source` arriving from `theta`.
///
/// Channel `k` is `source` delayed by `Δ_k` plus the stage offset.
pub fn propagate(
    source: &MonoSignal,
    geom: &ArrayGeometry,
    theta: f64,
    medium: &Medium,
    spec: &InterpolatorSpec,
) -> Result<MultichannelCapture> {
    geom.validate()?;
    spec.validate()?;
    let fs = source.sample_rate();
    let offset = stage_offset_samples(geom, medium, fs);
    check_shift_fits(source.len(), 2 * offset)?;
    let delays = physical_delays(geom, theta, medium);
    let channels = delays
        .par_iter()
        .map(|&d| delay_samples(source.samples(), offset as f64 + d * fs, spec))
        .collect();
    Ok(MultichannelCapture {
        channels,
        sample_rate: fs,
        geometry: *geom,
        arrival_angle: theta,
        latency_samples: offset,
    })
}

fn check_shift_fits(len: usize, max_shift: usize) -> Result<()> {
    if max_shift > len {
        return Err(Error::Range(format!(
            "array delays span {max_shift} samples, longer than the {len}-sample signal"
        )));
    }
    Ok(())
}

/// Beamformer output together with its timing bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamformOutput {
    pub signal: MonoSignal,
    /// Whole-sample delay between the source and the output when the array is
    /// steered at the true arrival angle.
    pub latency_samples: usize,
    /// Output samples unaffected by filter start-up and signal edges.
    pub valid: Range<usize>,
}

impl BeamformOutput {
    pub fn latency_seconds(&self) -> f64 {
        self.latency_samples as f64 / self.signal.sample_rate()
    }

    pub fn valid_samples(&self) -> &[f64] {
        &self.signal.samples()[self.valid.clone()]
    }
}

/// Applies steering delays for `phi` to each channel and averages them.
///
/// Channel `k` is advanced by `δ_k` (plus the stage offset), and the channels
/// are summed in microphone order.
pub fn beamform(
    capture: &MultichannelCapture,
    phi: f64,
    medium: &Medium,
    spec: &InterpolatorSpec,
) -> Result<BeamformOutput> {
    capture.validate()?;
    spec.validate()?;
    let geom = &capture.geometry;
    let fs = capture.sample_rate;
    let len = capture.len();
    let offset = stage_offset_samples(geom, medium, fs);
    check_shift_fits(len, 2 * offset)?;
    let steering = steering_delays(geom, phi, medium);
    let shifted: Vec<Vec<f64>> = capture
        .channels
        .par_iter()
        .zip(steering.par_iter())
        .map(|(ch, &d)| delay_samples(ch, offset as f64 - d * fs, spec))
        .collect();
    let mut out = vec![0.0; len];
    for ch in &shifted {
        for (o, s) in out.iter_mut().zip(ch) {
            *o += s;
        }
    }
    let scale = 1.0 / shifted.len() as f64;
    out.iter_mut().for_each(|o| *o *= scale);

    let latency = capture.latency_samples + offset;
    // Each stage reaches half_width + 1 taps beyond its largest shift.
    let margin = 2 * (spec.half_width + 1) + 2 * latency;
    let valid = if 2 * margin < len {
        margin..len - margin
    } else {
        0..0
    };
    Ok(BeamformOutput {
        signal: MonoSignal::new(out, fs)?,
        latency_samples: latency,
        valid,
    })
}

/// Capture from `theta`, then beamform toward `phi`.
pub fn end_to_end(
    source: &MonoSignal,
    geom: &ArrayGeometry,
    theta: f64,
    phi: f64,
    medium: &Medium,
    spec: &InterpolatorSpec,
) -> Result<BeamformOutput> {
    let capture = propagate(source, geom, theta, medium, spec)?;
    beamform(&capture, phi, medium, spec)
}

/// Complex amplitude of the `frequency` component of `samples`, by projection
/// onto a single DFT bin over the longest whole number of cycles that fits.
pub fn tone_amplitude(samples: &[f64], frequency: f64, sample_rate: f64) -> Result<Complex64> {
    let cycles = (samples.len() as f64 * frequency / sample_rate).floor();
    if frequency.is_nan() || frequency <= 0.0 || cycles < 1.0 {
        return Err(Error::Range(format!(
            "{} samples hold no full cycle of {frequency} Hz",
            samples.len()
        )));
    }
    let n = ((cycles * sample_rate / frequency).round() as usize).min(samples.len());
    let w = -2.0 * PI * frequency / sample_rate;
    let sum = samples[..n]
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, &x)| {
            acc + Complex64::from_polar(x, w * i as f64)
        });
    Ok(sum * (2.0 / n as f64))
}

/// Steady-state gain of a tone through the simulator: output amplitude over
/// the valid region divided by the source amplitude over the same,
/// latency-aligned samples.
pub fn steady_state_gain(
    source: &MonoSignal,
    output: &BeamformOutput,
    frequency: f64,
) -> Result<f64> {
    let fs = source.sample_rate();
    let valid = output.valid.clone();
    if valid.is_empty() {
        return Err(Error::Range("output has no valid region".into()));
    }
    let reference = &source.samples()[valid.start - output.latency_samples..valid.end - output.latency_samples];
    let out = tone_amplitude(output.valid_samples(), frequency, fs)?;
    let src = tone_amplitude(reference, frequency, fs)?;
    if src.norm() == 0.0 {
        return Err(Error::Parameter("source carries no energy at the probe frequency".into()));
    }
    Ok(out.norm() / src.norm())
}
