//! Model time. One unit is one microsecond; all schedule and latency
//! arithmetic is closed over non-negative integers.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Duration in microseconds.
pub type Dur = u64;

/// Absolute model time in microseconds since the initial instant.
pub type TimePoint = u64;

/// Inclusive duration interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurRange {
    pub lo: Dur,
    pub hi: Dur,
}

impl DurRange {
    pub fn new(lo: Dur, hi: Dur) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: Dur) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: Dur) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn shift(&self, by: Dur) -> Self {
        Self { lo: self.lo + by, hi: self.hi + by }
    }
}

impl fmt::Display for DurRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}us, {}us]", self.lo, self.hi)
    }
}

/// Error produced when a duration string cannot be parsed to whole
/// microseconds.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid duration {input:?}: {reason}")]
pub struct DurParseError {
    pub input: String,
    pub reason: String,
}

/// Parses a duration literal with a unit suffix into microseconds.
///
/// Accepted suffixes: `us` (and `µs`), `ms`, `s`. Decimal fractions are
/// allowed as long as the result is a whole number of microseconds:
/// `"0.125ms"` is 125, `"0.1us"` is rejected.
pub fn parse_duration(input: &str) -> Result<Dur, DurParseError> {
    let err = |reason: &str| DurParseError { input: input.to_string(), reason: reason.to_string() };
    let s = input.trim();
    let (num, factor) = if let Some(p) = s.strip_suffix("us") {
        (p, 1u64)
    } else if let Some(p) = s.strip_suffix("\u{b5}s") {
        (p, 1u64)
    } else if let Some(p) = s.strip_suffix("ms") {
        (p, 1_000u64)
    } else if let Some(p) = s.strip_suffix('s') {
        (p, 1_000_000u64)
    } else {
        return Err(err("missing unit suffix (us, ms or s)"));
    };
    let num = num.trim();
    if num.is_empty() {
        return Err(err("missing numeric value"));
    }
    let (int_part, frac_part) = match num.split_once('.') {
        Some((i, f)) => (i, f),
        None => (num, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("missing digits"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(err("non-digit characters in value"));
    }
    let int_val: u128 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| err("integer part overflow"))? };
    let mut total: u128 = int_val * factor as u128;
    // Fractional digits: digit i is worth factor / 10^(i+1) microseconds;
    // any remainder means the value is not integral in microseconds.
    let mut rem_scale = factor as u128;
    for ch in frac_part.chars() {
        let d = ch.to_digit(10).unwrap() as u128;
        if rem_scale % 10 != 0 {
            if d != 0 {
                return Err(err("not a whole number of microseconds"));
            }
            continue;
        }
        rem_scale /= 10;
        total += d * rem_scale;
    }
    u64::try_from(total).map_err(|_| err("value too large"))
}

/// Formats a microsecond duration back to a canonical literal.
pub fn format_duration(us: Dur) -> String {
    format!("{us}us")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_plain_units() {
        assert_eq!(parse_duration("25ms").unwrap(), 25_000);
        assert_eq!(parse_duration("800us").unwrap(), 800);
        assert_eq!(parse_duration("1s").unwrap(), 1_000_000);
        assert_eq!(parse_duration("0ms").unwrap(), 0);
    }

    #[test]
    fn parses_decimal_fractions_exactly() {
        assert_eq!(parse_duration("0.125ms").unwrap(), 125);
        assert_eq!(parse_duration("0.5ms").unwrap(), 500);
        assert_eq!(parse_duration("2.5ms").unwrap(), 2_500);
        assert_eq!(parse_duration("0.000001s").unwrap(), 1);
    }

    #[test]
    fn rejects_fractional_microseconds() {
        assert!(parse_duration("0.1us").is_err());
        assert!(parse_duration("0.0001ms").is_err());
        // trailing zeros beyond the resolution are harmless
        assert_eq!(parse_duration("0.1000ms").unwrap(), 100);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_duration("ms").is_err());
        assert!(parse_duration("12").is_err());
        assert!(parse_duration("-3ms").is_err());
        assert!(parse_duration("1.2.3ms").is_err());
        assert!(parse_duration("1e3us").is_err());
    }

    proptest! {
        #[test]
        fn roundtrips_microseconds(us in 0u64..=10_000_000_000) {
            prop_assert_eq!(parse_duration(&format_duration(us)).unwrap(), us);
        }

        #[test]
        fn whole_ms_scale_exactly(ms in 0u64..=10_000_000) {
            prop_assert_eq!(parse_duration(&format!("{ms}ms")).unwrap(), ms * 1000);
        }
    }
}
