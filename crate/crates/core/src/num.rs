//! Numeric helpers shared by the output formats.

use serde::{Deserialize, Deserializer, Serializer};

/// Decimal places used for every floating point value written to disk.
pub const DECIMALS: usize = 6;

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

pub fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Fixed decimal text for `x`, with negative zero folded into zero.
pub fn format_fixed(x: f64) -> String {
    let s = format!("{:.*}", DECIMALS, x);
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Serde adapter writing `f64` as a fixed decimal JSON number.
pub mod fixed {
    use super::*;
    use serde::ser::Error;
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if !x.is_finite() {
            return Err(S::Error::custom(format!("non-finite value {x}")));
        }
        let raw = RawValue::from_string(format_fixed(*x)).map_err(S::Error::custom)?;
        serde::Serialize::serialize(&raw, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}
