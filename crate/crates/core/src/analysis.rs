//! Spectral attenuation between a source and the beamformer output.
//!
//! Spectra are averaged magnitude periodograms: Hann-windowed segments with
//! 50 % overlap, FFT magnitudes averaged in segment order, expressed in dB and
//! floored at −120 dB.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{self, format_number};
use crate::signal::MonoSignal;
use crate::simulator::{check_oversampling, BeamformOutput};

/// Segment length 1024 at 16 kHz.
pub const DEFAULT_RESOLUTION_HZ: f64 = 15.625;
pub const SPECTRUM_FLOOR_DB: f64 = -120.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationSpectrum {
    /// Hz, ascending, all within `band`.
    pub frequencies: Vec<f64>,
    pub source_db: Vec<f64>,
    pub output_db: Vec<f64>,
    /// `source_db − output_db`, bin by bin.
    pub attenuation_db: Vec<f64>,
    pub band: (f64, f64),
    pub segment_len: usize,
    pub sample_rate: f64,
}

impl AttenuationSpectrum {
    /// Columns: `frequency_hz,source_db,output_db,attenuation_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        export::push_header(
            &mut out,
            ["frequency_hz", "source_db", "output_db", "attenuation_db"],
        );
        for i in 0..self.frequencies.len() {
            export::push_row(
                &mut out,
                self.frequencies[i],
                [self.source_db[i], self.output_db[i], self.attenuation_db[i]],
            );
        }
        out
    }

    /// Largest attenuation within `[f_low, f_high]`.
    pub fn peak_attenuation(&self, f_low: f64, f_high: f64) -> Result<f64> {
        let bins = self.bins_in(f_low, f_high)?;
        Ok(bins.iter().map(|&i| self.attenuation_db[i]).fold(f64::MIN, f64::max))
    }

    /// Attenuation at the bin nearest `frequency`.
    pub fn attenuation_at(&self, frequency: f64) -> Result<f64> {
        self.frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - frequency).abs().total_cmp(&(b.1 - frequency).abs()))
            .map(|(i, _)| self.attenuation_db[i])
            .ok_or_else(|| Error::Range("spectrum has no bins".into()))
    }

    fn bins_in(&self, f_low: f64, f_high: f64) -> Result<Vec<usize>> {
        let (lo, hi) = self.band;
        if !(f_low <= f_high && f_low >= lo && f_high <= hi) {
            return Err(Error::Range(format!(
                "sub-band [{f_low}, {f_high}] Hz is not inside [{lo}, {hi}] Hz"
            )));
        }
        let bins: Vec<usize> = (0..self.frequencies.len())
            .filter(|&i| self.frequencies[i] >= f_low && self.frequencies[i] <= f_high)
            .collect();
        if bins.is_empty() {
            return Err(Error::Range(format!("no bins inside [{f_low}, {f_high}] Hz")));
        }
        Ok(bins)
    }
}

/// Mean attenuation over the bins inside `[f_low, f_high]`.
pub fn band_average_attenuation(spec: &AttenuationSpectrum, f_low: f64, f_high: f64) -> Result<f64> {
    let bins = spec.bins_in(f_low, f_high)?;
    Ok(bins.iter().map(|&i| spec.attenuation_db[i]).sum::<f64>() / bins.len() as f64)
}

struct Periodogram {
    segment_len: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Periodogram {
    fn new(segment_len: usize) -> Self {
        // Periodic Hann.
        let window = (0..segment_len)
            .map(|n| {
                0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / segment_len as f64).cos()
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(segment_len);
        Periodogram {
            segment_len,
            window,
            fft,
        }
    }

    /// Averaged magnitude spectrum, bins `0..=segment_len/2`, scaled so a
    /// sinusoid of amplitude `A` centered on a bin reads `A`.
    fn magnitudes(&self, x: &[f64]) -> Vec<f64> {
        let n = self.segment_len;
        let hop = n / 2;
        let bins = n / 2 + 1;
        let scale = 2.0 / self.window.iter().sum::<f64>();
        let mut acc = vec![0.0; bins];
        let mut count = 0usize;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut start = 0;
        while start + n <= x.len() {
            for (b, (&s, &w)) in buf.iter_mut().zip(x[start..start + n].iter().zip(&self.window)) {
                *b = Complex64::new(s * w, 0.0);
            }
            self.fft.process(&mut buf);
            for (a, z) in acc.iter_mut().zip(&buf) {
                *a += z.norm() * scale;
            }
            count += 1;
            start += hop;
        }
        acc.iter_mut().for_each(|a| *a /= count as f64);
        acc
    }
}

fn to_db(magnitude: f64) -> f64 {
    (20.0 * magnitude.log10()).max(SPECTRUM_FLOOR_DB)
}

/// Attenuation between `source` and `output`, where `output[n + latency]`
/// lines up with `source[n]`.
///
/// `resolution` fixes the bin spacing: segments are `round(fs / resolution)`
/// samples long.
pub fn attenuation_spectrum(
    source: &MonoSignal,
    output: &MonoSignal,
    latency_samples: usize,
    band: (f64, f64),
    resolution: f64,
) -> Result<AttenuationSpectrum> {
    let n = output.len().min(source.len() + latency_samples);
    if latency_samples > n {
        return Err(Error::Range("latency exceeds the output length".into()));
    }
    compare(
        source,
        output,
        0..n - latency_samples,
        latency_samples,
        band,
        resolution,
    )
}

/// Attenuation over the valid region of a simulator run.
pub fn attenuation_of(
    source: &MonoSignal,
    output: &BeamformOutput,
    band: (f64, f64),
    resolution: f64,
) -> Result<AttenuationSpectrum> {
    let l = output.latency_samples;
    compare(
        source,
        &output.signal,
        output.valid.start - l..output.valid.end - l,
        l,
        band,
        resolution,
    )
}

fn compare(
    source: &MonoSignal,
    output: &MonoSignal,
    source_range: std::ops::Range<usize>,
    latency: usize,
    band: (f64, f64),
    resolution: f64,
) -> Result<AttenuationSpectrum> {
    let fs = source.sample_rate();
    if fs != output.sample_rate() {
        return Err(Error::Parameter(format!(
            "sample rates differ: {fs} Hz vs {} Hz",
            output.sample_rate()
        )));
    }
    let (f_low, f_high) = band;
    if !(f_low >= 0.0 && f_low <= f_high) {
        return Err(Error::Parameter(format!("invalid band [{f_low}, {f_high}] Hz")));
    }
    if f_high > fs / 2.0 {
        return Err(Error::Range(format!(
            "band top {f_high} Hz exceeds the {} Hz Nyquist frequency",
            fs / 2.0
        )));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::Parameter(format!("resolution must be positive, got {resolution}")));
    }
    check_oversampling(fs, f_high);
    let segment_len = (fs / resolution).round() as usize;
    if segment_len < 4 {
        return Err(Error::Parameter(format!("resolution {resolution} Hz is too coarse")));
    }
    let src = &source.samples()[source_range.clone()];
    let out_range = source_range.start + latency..source_range.end + latency;
    if out_range.end > output.len() {
        return Err(Error::Range("output is shorter than the aligned source".into()));
    }
    let out = &output.samples()[out_range];
    if src.len() < segment_len {
        return Err(Error::Range(format!(
            "{} aligned samples are fewer than one {segment_len}-sample segment",
            src.len()
        )));
    }

    let pg = Periodogram::new(segment_len);
    let src_mag = pg.magnitudes(src);
    let out_mag = pg.magnitudes(out);
    let bin_hz = fs / segment_len as f64;
    let mut spectrum = AttenuationSpectrum {
        frequencies: Vec::new(),
        source_db: Vec::new(),
        output_db: Vec::new(),
        attenuation_db: Vec::new(),
        band,
        segment_len,
        sample_rate: fs,
    };
    for b in 0..src_mag.len() {
        let f = b as f64 * bin_hz;
        if f < f_low || f > f_high {
            continue;
        }
        let s = to_db(src_mag[b]);
        let o = to_db(out_mag[b]);
        spectrum.frequencies.push(f);
        spectrum.source_db.push(s);
        spectrum.output_db.push(o);
        spectrum.attenuation_db.push(s - o);
    }
    Ok(spectrum)
}

/// Renders a spectrum's numbers for quick console summaries.
pub fn describe(spec: &AttenuationSpectrum, f_low: f64, f_high: f64) -> Result<String> {
    Ok(format!(
        "mean {} dB, peak {} dB over {}-{} Hz",
        format_number(band_average_attenuation(spec, f_low, f_high)?),
        format_number(spec.peak_attenuation(f_low, f_high)?),
        format_number(f_low),
        format_number(f_high),
    ))
}
