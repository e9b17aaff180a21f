//! Arbitrary bytes through the WAV decoder. Anything it accepts must be a
//! finite mono signal that survives a float re-encode.

#![no_main]

use beamsim::wav::{decode_mono, encode_mono_f32};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(signal) = decode_mono(data) else {
        return;
    };
    assert!(!signal.is_empty());
    assert!(signal.samples().iter().all(|s| s.is_finite()));
    let bytes = encode_mono_f32(&signal).expect("decoded rate is integral");
    let again = decode_mono(&bytes).expect("re-encoded file decodes");
    assert_eq!(again.len(), signal.len());
});
