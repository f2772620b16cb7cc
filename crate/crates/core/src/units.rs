//! Unit parsing for CLI inputs.
//!
//! Internal units are fixed: rates in MHz, times in µs, powers in mW.
//! The CLI accepts explicit suffixes (`10ns`, `1W`, `0.3us`, `500mW`) and
//! converts on ingest; bare numbers are taken in the internal unit.

use crate::error::{NvError, Result};

fn split_suffix(s: &str) -> (&str, &str) {
    let idx = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E'))
        .unwrap_or(s.len());
    // An 'e' followed by a sign or digit is part of a float exponent, so the
    // split above can land inside one ("1e-3us" splits at 'u' correctly, but
    // "1E3" has no suffix). Re-scan from the right for alphabetic suffix.
    let mut cut = s.len();
    for (i, c) in s.char_indices().rev() {
        if c.is_alphabetic() || c == 'µ' {
            cut = i;
        } else {
            break;
        }
    }
    // Prefer the right-scan; it never splits inside an exponent because an
    // exponent always ends in a digit.
    let _ = idx;
    (&s[..cut], &s[cut..])
}

/// Parse a duration string into µs. Accepted suffixes: ns, us, µs, ms, s.
pub fn parse_duration_us(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, suffix) = split_suffix(s);
    let value: f64 = num
        .parse()
        .map_err(|_| NvError::validation(format!("invalid duration '{s}'")))?;
    let factor = match suffix {
        "" | "us" | "µs" => 1.0,
        "ns" => 1e-3,
        "ms" => 1e3,
        "s" => 1e6,
        other => {
            return Err(NvError::validation(format!(
                "unknown duration suffix '{other}' in '{s}' (use ns, us, ms, s)"
            )))
        }
    };
    Ok(value * factor)
}

/// Parse a power string into mW. Accepted suffixes: nW, uW, µW, mW, W.
pub fn parse_power_mw(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, suffix) = split_suffix(s);
    let value: f64 = num
        .parse()
        .map_err(|_| NvError::validation(format!("invalid power '{s}'")))?;
    let factor = match suffix {
        "" | "mW" | "mw" => 1.0,
        "nW" | "nw" => 1e-6,
        "uW" | "µW" | "uw" => 1e-3,
        "W" | "w" => 1e3,
        other => {
            return Err(NvError::validation(format!(
                "unknown power suffix '{other}' in '{s}' (use nW, uW, mW, W)"
            )))
        }
    };
    Ok(value * factor)
}
