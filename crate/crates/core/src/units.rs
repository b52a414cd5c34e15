// SPDX-License-Identifier: Apache-2.0

//! Engineering-notation quantities shared by the netlist, stimulus, config
//! and command-line parsers.
//!
//! A quantity is a decimal number followed by an optional SPICE scale prefix
//! (`f p n u m k meg g`) and an optional unit symbol for the quantity kind.
//! Values are converted to a fixed target unit per kind (picoseconds,
//! nanometers, femtofarads, hertz, volts, ohms). The conversion multiplies or
//! divides by an exact power of ten, so integral inputs such as `600n` map to
//! exactly `600.0` nanometers. A time without any suffix is read as
//! picoseconds.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Target unit: picoseconds.
    Time,
    /// Target unit: nanometers.
    Length,
    /// Target unit: femtofarads.
    Capacitance,
    /// Target unit: hertz.
    Frequency,
    /// Target unit: volts.
    Voltage,
    /// Target unit: ohms.
    Resistance,
    /// Dimensionless; scale prefixes still apply.
    Plain,
}

impl Quantity {
    fn target_exponent(self) -> i32 {
        match self {
            Quantity::Time => -12,
            Quantity::Length => -9,
            Quantity::Capacitance => -15,
            _ => 0,
        }
    }

    fn unit_symbols(self) -> &'static [&'static str] {
        match self {
            Quantity::Time => &["s"],
            Quantity::Length => &[],
            Quantity::Capacitance => &["f"],
            Quantity::Frequency => &["hz"],
            Quantity::Voltage => &["v"],
            Quantity::Resistance => &["ohms", "ohm", "Ω"],
            Quantity::Plain => &[],
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quantity::Time => "time",
            Quantity::Length => "length",
            Quantity::Capacitance => "capacitance",
            Quantity::Frequency => "frequency",
            Quantity::Voltage => "voltage",
            Quantity::Resistance => "resistance",
            Quantity::Plain => "number",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {kind} `{text}`: {reason}")]
pub struct UnitError {
    pub kind: Quantity,
    pub text: String,
    pub reason: &'static str,
}

fn scale_exponent(prefix: &str, kind: Quantity) -> Option<i32> {
    Some(match prefix {
        "" => 0,
        "f" => -15,
        "p" => -12,
        "n" => -9,
        "u" | "µ" => -6,
        // `125MHz` means mega, never milli.
        "m" if kind == Quantity::Frequency => 6,
        "m" => -3,
        "k" => 3,
        "meg" => 6,
        "g" => 9,
        _ => return None,
    })
}

/// Length of the leading numeric part of `text`.
fn numeric_prefix_len(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    // Exponent only if followed by a digit, so `1f` stays femto.
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

fn pow10(exp: i32) -> f64 {
    10f64.powi(exp)
}

/// Parse `text` as a quantity of `kind`, returning the value in the kind's
/// target unit.
pub fn parse_quantity(text: &str, kind: Quantity) -> Result<f64, UnitError> {
    let err = |reason| UnitError {
        kind,
        text: text.to_string(),
        reason,
    };
    let text_trim = text.trim();
    let split = numeric_prefix_len(text_trim);
    let (num, rest) = text_trim.split_at(split);
    if num.is_empty() {
        return Err(err("missing number"));
    }
    let mantissa: f64 = num.parse().map_err(|_| err("malformed number"))?;
    // A bare time is picoseconds, the engine's native unit.
    if kind == Quantity::Time && rest.is_empty() {
        return Ok(mantissa);
    }
    let mut suffix = rest.to_lowercase();
    for sym in kind.unit_symbols() {
        if let Some(stripped) = suffix.strip_suffix(sym) {
            // `1f` on a capacitance is femto, not a bare farad.
            if kind == Quantity::Capacitance && stripped.is_empty() {
                break;
            }
            suffix = stripped.to_string();
            break;
        }
    }
    let exp = scale_exponent(&suffix, kind).ok_or_else(|| err("unknown unit suffix"))?;
    let shift = exp - kind.target_exponent();
    let value = if shift >= 0 {
        mantissa * pow10(shift)
    } else {
        mantissa / pow10(-shift)
    };
    if !value.is_finite() {
        return Err(err("value out of range"));
    }
    Ok(value)
}

/// Parse a non-negative time and round it to whole picoseconds.
pub fn parse_time_ps(text: &str) -> Result<u64, UnitError> {
    let v = parse_quantity(text, Quantity::Time)?;
    if v < 0.0 {
        return Err(UnitError {
            kind: Quantity::Time,
            text: text.to_string(),
            reason: "negative time",
        });
    }
    if v > 1.0e18 {
        return Err(UnitError {
            kind: Quantity::Time,
            text: text.to_string(),
            reason: "value out of range",
        });
    }
    Ok(v.round() as u64)
}
