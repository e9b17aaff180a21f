//! WAV reading and writing.
//!
//! Input must be mono, either 16-bit integer PCM or 32-bit IEEE float.
//! Output is always 32-bit float so beamformer results are not requantized.

use std::io::{Cursor, Read};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::signal::MonoSignal;

/// Decodes a mono WAV file held in memory.
pub fn decode_mono(bytes: &[u8]) -> Result<MonoSignal> {
    decode(Cursor::new(bytes))
}

/// Decodes a mono WAV file and checks its sample rate.
pub fn decode_mono_at(bytes: &[u8], expected_rate: u32) -> Result<MonoSignal> {
    let signal = decode_mono(bytes)?;
    check_rate(&signal, expected_rate)?;
    Ok(signal)
}

pub fn read_mono(path: &Path, expected_rate: u32) -> Result<MonoSignal> {
    let bytes = std::fs::read(path)?;
    decode_mono_at(&bytes, expected_rate).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn check_rate(signal: &MonoSignal, expected_rate: u32) -> Result<()> {
    if signal.sample_rate() != expected_rate as f64 {
        return Err(Error::Format(format!(
            "sample rate is {} Hz but {expected_rate} Hz is configured; resample the input first",
            signal.sample_rate()
        )));
    }
    Ok(())
}

fn format_err(e: hound::Error) -> Error {
    Error::Format(e.to_string())
}

fn decode<R: Read>(reader: R) -> Result<MonoSignal> {
    let mut wav = WavReader::new(reader).map_err(format_err)?;
    let spec = wav.spec();
    if spec.channels != 1 {
        return Err(Error::Format(format!(
            "expected a mono file, found {} channels",
            spec.channels
        )));
    }
    if spec.sample_rate == 0 {
        return Err(Error::Format("sample rate is zero".into()));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => wav
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(format_err)?,
        (SampleFormat::Float, 32) => {
            let v: Vec<f64> = wav
                .samples::<f32>()
                .map(|s| s.map(f64::from))
                .collect::<std::result::Result<_, _>>()
                .map_err(format_err)?;
            if v.iter().any(|s| !s.is_finite()) {
                return Err(Error::Format("non-finite float sample".into()));
            }
            v
        }
        (fmt, bits) => {
            return Err(Error::Format(format!(
                "unsupported sample format: {bits}-bit {}",
                match fmt {
                    SampleFormat::Int => "integer",
                    SampleFormat::Float => "float",
                }
            )))
        }
    };
    if samples.is_empty() {
        return Err(Error::Format("file contains no samples".into()));
    }
    MonoSignal::new(samples, spec.sample_rate as f64)
}

fn integral_rate(sample_rate: f64) -> Result<u32> {
    if sample_rate.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&sample_rate) {
        return Err(Error::Format(format!(
            "WAV needs a whole-number sample rate, got {sample_rate}"
        )));
    }
    Ok(sample_rate as u32)
}

/// Interleaves `channels` into a 32-bit float WAV image.
pub fn encode_f32(channels: &[&[f64]], sample_rate: f64) -> Result<Vec<u8>> {
    let count = u16::try_from(channels.len())
        .ok()
        .filter(|&c| c > 0)
        .ok_or_else(|| Error::Format(format!("cannot write {} channels", channels.len())))?;
    let len = channels[0].len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::Format("channels differ in length".into()));
    }
    let spec = WavSpec {
        channels: count,
        sample_rate: integral_rate(sample_rate)?,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut cursor, spec).map_err(format_err)?;
        for i in 0..len {
            for ch in channels {
                w.write_sample(ch[i] as f32).map_err(format_err)?;
            }
        }
        w.finalize().map_err(format_err)?;
    }
    Ok(cursor.into_inner())
}

/// 16-bit PCM image of a mono signal, clipping to full scale.
pub fn encode_pcm16(signal: &MonoSignal) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: integral_rate(signal.sample_rate())?,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut cursor, spec).map_err(format_err)?;
        for &s in signal.samples() {
            let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            w.write_sample(q).map_err(format_err)?;
        }
        w.finalize().map_err(format_err)?;
    }
    Ok(cursor.into_inner())
}

pub fn encode_mono_f32(signal: &MonoSignal) -> Result<Vec<u8>> {
    encode_f32(&[signal.samples()], signal.sample_rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::tone;

    #[test]
    fn float_round_trip() {
        let s = tone(440.0, 0.5, 1000, 16000.0).unwrap();
        let back = decode_mono_at(&encode_mono_f32(&s).unwrap(), 16000).unwrap();
        assert_eq!(back.len(), 1000);
        for (a, b) in back.samples().iter().zip(s.samples()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn pcm16_round_trip() {
        let s = tone(440.0, 0.5, 1000, 16000.0).unwrap();
        let back = decode_mono(&encode_pcm16(&s).unwrap()).unwrap();
        for (a, b) in back.samples().iter().zip(s.samples()) {
            assert!((a - b).abs() <= 0.5 / 32768.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_stereo_and_wrong_rate() {
        let x = [0.1, 0.2, 0.3];
        let stereo = encode_f32(&[&x, &x], 16000.0).unwrap();
        assert!(matches!(decode_mono(&stereo), Err(Error::Format(_))));
        let mono = encode_f32(&[&x], 8000.0).unwrap();
        assert!(matches!(decode_mono_at(&mono, 16000), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_empty_and_garbage() {
        let empty = encode_f32(&[&[]], 16000.0).unwrap();
        assert!(matches!(decode_mono(&empty), Err(Error::Format(_))));
        assert!(matches!(decode_mono(b""), Err(Error::Format(_))));
        assert!(matches!(decode_mono(b"RIFF\x04\0\0\0WAVE"), Err(Error::Format(_))));
        let mut truncated = encode_f32(&[&[0.5; 64]], 16000.0).unwrap();
        truncated.truncate(truncated.len() - 10);
        assert!(decode_mono(&truncated).is_err());
    }

    #[test]
    fn rejects_unsupported_depth() {
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16000,
            bits_per_sample: 24,
            sample_format: SampleFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        {
            let mut w = WavWriter::new(&mut cursor, spec).unwrap();
            w.write_sample(1i32).unwrap();
            w.finalize().unwrap();
        }
        let err = decode_mono(&cursor.into_inner()).unwrap_err();
        assert!(err.to_string().contains("24-bit"), "{err}");
    }

    #[test]
    fn non_integral_rate_cannot_be_written() {
        let s = MonoSignal::new(vec![0.0; 4], 44100.5).unwrap();
        assert!(encode_mono_f32(&s).is_err());
    }
}
