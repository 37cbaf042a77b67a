//! Exact decimal rendering of floats for text outputs.
//!
//! Every float is written with 17 significant digits, which round-trips
//! bit-exactly through a correctly rounding parser.

use serde::ser::{Serialize, SerializeSeq, Serializer};
use serde_json::value::RawValue;

/// Scientific notation with 17 significant digits.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A float that serializes through [`float17`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact(pub f64);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(float17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// A float slice that serializes element-wise through [`float17`].
#[derive(Debug, Clone, Copy)]
pub struct ExactSlice<'a>(pub &'a [f64]);

impl Serialize for ExactSlice<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for &x in self.0 {
            seq.serialize_element(&Exact(x))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_awkward_values() {
        let values = [
            0.1,
            -0.0,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            5e-324,
            f64::MAX,
            std::f64::consts::PI * 1e200,
        ];
        let text = serde_json::to_string(&ExactSlice(&values)).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
