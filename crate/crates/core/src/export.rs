//! Plain-text number formatting shared by the CSV writers.
//!
//! Every number is written in positional decimal notation with at most nine
//! significant digits, so CSV files are byte-stable across runs and platforms.

use std::fmt::Write;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Smallest linear magnitude represented in dB exports (−200 dB).
pub const MAGNITUDE_FLOOR: f64 = 1e-10;

/// `20·log10(max(magnitude, 1e−10))`.
pub fn magnitude_to_db(magnitude: f64) -> f64 {
    20.0 * magnitude.max(MAGNITUDE_FLOOR).log10()
}

/// Formats `value` with up to nine significant digits and no exponent.
/// Trailing zeros are trimmed and negative zero prints as `0`.
pub fn format_number(value: f64) -> String {
    if !value.is_finite() {
        return if value.is_nan() {
            "nan".into()
        } else if value > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if value == 0.0 {
        return "0".into();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Joins a row of numbers with commas, appending a `\n`.
pub(crate) fn push_row(out: &mut String, first: f64, rest: impl IntoIterator<Item = f64>) {
    out.push_str(&format_number(first));
    for v in rest {
        out.push(',');
        out.push_str(&format_number(v));
    }
    out.push('\n');
}

pub(crate) fn push_header<'a>(out: &mut String, names: impl IntoIterator<Item = &'a str>) {
    let mut first = true;
    for n in names {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{n}");
    }
    out.push('\n');
}
