//! Sampled mono signals and the built-in test signals.

use std::f64::consts::TAU;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonoSignal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl MonoSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        check_sample_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Parameter(format!("sample {i} is not finite")));
        }
        Ok(MonoSignal {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn scaled(&self, gain: f64) -> MonoSignal {
        self.map(|s| s * gain)
    }

    pub fn reversed(&self) -> MonoSignal {
        let mut samples = self.samples.clone();
        samples.reverse();
        MonoSignal {
            samples,
            sample_rate: self.sample_rate,
        }
    }

    /// Sample-wise `a·self + b·other`; both signals must share rate and length.
    pub fn mix(&self, a: f64, other: &MonoSignal, b: f64) -> Result<MonoSignal> {
        if self.sample_rate != other.sample_rate || self.len() != other.len() {
            return Err(Error::Parameter(
                "mixed signals must share sample rate and length".into(),
            ));
        }
        Ok(MonoSignal {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            sample_rate: self.sample_rate,
        })
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> MonoSignal {
        MonoSignal {
            samples: self.samples.iter().map(|&s| f(s)).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

pub(crate) fn check_sample_rate(sample_rate: f64) -> Result<()> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::Parameter(format!(
            "sample rate must be positive and finite, got {sample_rate}"
        )));
    }
    Ok(())
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// `amplitude · sin(2π f t)` sampled for `len` samples.
pub fn tone(frequency: f64, amplitude: f64, len: usize, sample_rate: f64) -> Result<MonoSignal> {
    check_sample_rate(sample_rate)?;
    MonoSignal::new(
        (0..len)
            .map(|n| amplitude * (TAU * frequency * n as f64 / sample_rate).sin())
            .collect(),
        sample_rate,
    )
}

/// Fundamental of the voiced part of [`speech_like`], in Hz.
pub const SPEECH_F0: f64 = 150.0;
pub const SPEECH_HARMONICS: usize = 20;
/// Syllabic amplitude-modulation rate, in Hz.
pub const SPEECH_AM_RATE: f64 = 4.0;
/// Frequency span of the unvoiced part, in Hz.
pub const UNVOICED_BAND: (f64, f64) = (100.0, 4000.0);
/// Unvoiced RMS relative to voiced RMS.
pub const UNVOICED_LEVEL: f64 = 0.1;

/// Deterministic speech-like test signal.
///
/// Voiced part: 20 harmonics of 150 Hz with amplitudes falling as `1/h`,
/// random (seeded) phases, amplitude-modulated at 4 Hz. Unvoiced part: a flat
/// random-phase multisine over 100–4000 Hz at one tenth of the voiced RMS, so
/// the whole 300–4000 Hz analysis band carries energy. Peak-normalized to 0.5.
pub fn speech_like(duration: f64, sample_rate: f64, seed: u64) -> Result<MonoSignal> {
    check_sample_rate(sample_rate)?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::Parameter(format!("duration must be positive, got {duration}")));
    }
    let len = (duration * sample_rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let phases: Vec<f64> = (0..SPEECH_HARMONICS)
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    let mut voiced: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 / sample_rate;
            let envelope = 1.0 + 0.5 * (TAU * SPEECH_AM_RATE * t).sin();
            let v: f64 = phases
                .iter()
                .enumerate()
                .map(|(i, ph)| {
                    let h = (i + 1) as f64;
                    (TAU * SPEECH_F0 * h * t + ph).sin() / h
                })
                .sum();
            envelope * v
        })
        .collect();

    let unvoiced = band_limited_noise(len, sample_rate, UNVOICED_BAND, &mut rng);
    let gain = UNVOICED_LEVEL * rms(&voiced) / rms(&unvoiced).max(f64::MIN_POSITIVE);
    for (v, u) in voiced.iter_mut().zip(&unvoiced) {
        *v += gain * u;
    }
    let peak = voiced.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        voiced.iter_mut().for_each(|s| *s *= 0.5 / peak);
    }
    MonoSignal::new(voiced, sample_rate)
}

pub const BUNDLED_DURATION_S: f64 = 4.0;
pub const BUNDLED_SEED: u64 = 0x5eed;

/// The reproducible stand-in for recorded speech used when no input file is
/// given: four seconds of [`speech_like`].
pub fn bundled_speech(sample_rate: f64) -> Result<MonoSignal> {
    speech_like(BUNDLED_DURATION_S, sample_rate, BUNDLED_SEED)
}

/// Unit-magnitude, random-phase spectrum over `band`, brought to the time
/// domain with an inverse FFT.
fn band_limited_noise(
    len: usize,
    sample_rate: f64,
    band: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    if len < 2 {
        return vec![0.0; len];
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
    let bin_hz = sample_rate / len as f64;
    for b in 1..len.div_ceil(2) {
        let f = b as f64 * bin_hz;
        if f >= band.0 && f <= band.1 {
            let z = Complex64::from_polar(1.0, rng.random_range(0.0..TAU));
            spectrum[b] = z;
            spectrum[len - b] = z.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut spectrum);
    spectrum.into_iter().map(|z| z.re).collect()
}
