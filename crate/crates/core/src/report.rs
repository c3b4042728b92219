//! Sanitized client outputs and their line-oriented JSON encoding.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{LdpError, Result};
use crate::rng::lh_bucket;

/// A bit vector encoded on the wire as a string of `0`/`1` characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(LdpError::ShapeMismatch(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BitVisitor;

        impl Visitor<'_> for BitVisitor {
            type Value = BitString;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a string of 0/1 characters")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<BitString, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_str(BitVisitor)
    }
}

/// One user's sanitized report for a single attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum Report {
    /// A (possibly perturbed) category index.
    Value { v: usize },
    /// A perturbed unary encoding of length `k`.
    Bits { b: BitString },
    /// Local hashing output: the per-report hash seed and the reported bucket.
    Lh { seed: u64, b: usize },
    /// A sorted subset of categories.
    Subset { s: Vec<usize> },
    /// dBitFlipPM output: sampled bucket indices (sorted) and their memoized bits.
    Dbit { idx: Vec<usize>, bits: BitString },
}

impl Report {
    pub fn kind(&self) -> &'static str {
        match self {
            Report::Value { .. } => "value",
            Report::Bits { .. } => "bits",
            Report::Lh { .. } => "lh",
            Report::Subset { .. } => "subset",
            Report::Dbit { .. } => "dbit",
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization is infallible")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| LdpError::ShapeMismatch(e.to_string()))
    }
}

/// What a well-formed report looks like for a given mechanism, and which
/// candidate values it supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportShape {
    Value { k: usize },
    Bits { k: usize },
    Lh { k: usize, g: usize },
    Subset { k: usize, omega: usize },
}

impl ReportShape {
    pub fn k(&self) -> usize {
        match *self {
            ReportShape::Value { k }
            | ReportShape::Bits { k }
            | ReportShape::Lh { k, .. }
            | ReportShape::Subset { k, .. } => k,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ReportShape::Value { .. } => "value",
            ReportShape::Bits { .. } => "bits",
            ReportShape::Lh { .. } => "lh",
            ReportShape::Subset { .. } => "subset",
        }
    }

    /// Checks kind and payload invariants.
    pub fn validate(&self, report: &Report) -> Result<()> {
        let bad = |msg: String| Err(LdpError::ShapeMismatch(msg));
        match (*self, report) {
            (ReportShape::Value { k }, Report::Value { v }) => {
                if *v < k {
                    Ok(())
                } else {
                    bad(format!("value {v} outside [0, {k})"))
                }
            }
            (ReportShape::Bits { k }, Report::Bits { b }) => {
                if b.len() == k {
                    Ok(())
                } else {
                    bad(format!("bit vector of length {} for k = {k}", b.len()))
                }
            }
            (ReportShape::Lh { g, .. }, Report::Lh { b, .. }) => {
                if *b < g {
                    Ok(())
                } else {
                    bad(format!("bucket {b} outside [0, {g})"))
                }
            }
            (ReportShape::Subset { k, omega }, Report::Subset { s }) => {
                let sorted_distinct = s.windows(2).all(|w| w[0] < w[1]);
                if s.len() == omega && sorted_distinct && s.iter().all(|&x| x < k) {
                    Ok(())
                } else {
                    bad(format!(
                        "subset {s:?} is not {omega} sorted distinct values in [0, {k})"
                    ))
                }
            }
            _ => Err(LdpError::MixedReportTypes { expected: self.kind() }),
        }
    }

    /// Whether `report` supports candidate `v`. Assumes the report passed [`validate`](Self::validate).
    #[inline]
    pub fn supports(&self, report: &Report, v: usize) -> bool {
        match (*self, report) {
            (ReportShape::Value { .. }, Report::Value { v: x }) => *x == v,
            (ReportShape::Bits { .. }, Report::Bits { b }) => b.get(v),
            (ReportShape::Lh { g, .. }, Report::Lh { seed, b }) => lh_bucket(*seed, v, g) == *b,
            (ReportShape::Subset { .. }, Report::Subset { s }) => s.binary_search(&v).is_ok(),
            _ => false,
        }
    }

    /// Adds this report's support to `counts` (length `k`).
    pub fn accumulate(&self, report: &Report, counts: &mut [u64]) -> Result<()> {
        self.validate(report)?;
        match report {
            Report::Value { v } => counts[*v] += 1,
            Report::Bits { b } => {
                for (c, &bit) in counts.iter_mut().zip(b.as_slice()) {
                    *c += u64::from(bit);
                }
            }
            Report::Subset { s } => {
                for &x in s {
                    counts[x] += 1;
                }
            }
            Report::Lh { .. } => {
                for (v, c) in counts.iter_mut().enumerate() {
                    *c += u64::from(self.supports(report, v));
                }
            }
            Report::Dbit { .. } => unreachable!("validate rejects dbit reports"),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let r = Report::Bits {
            b: vec![true, false, true].into(),
        };
        assert_eq!(r.to_json_line(), r#"{"t":"bits","b":"101"}"#);
        let r = Report::Lh { seed: u64::MAX, b: 3 };
        assert_eq!(r.to_json_line(), r#"{"t":"lh","seed":18446744073709551615,"b":3}"#);
        let r = Report::Value { v: 2 };
        assert_eq!(r.to_json_line(), r#"{"t":"value","v":2}"#);
        let r = Report::Subset { s: vec![1, 4] };
        assert_eq!(r.to_json_line(), r#"{"t":"subset","s":[1,4]}"#);
        let r = Report::Dbit {
            idx: vec![0, 3],
            bits: vec![false, true].into(),
        };
        assert_eq!(r.to_json_line(), r#"{"t":"dbit","idx":[0,3],"bits":"01"}"#);
    }

    #[test]
    fn rejects_bad_bits() {
        assert!(Report::from_json_line(r#"{"t":"bits","b":"10x"}"#).is_err());
        assert!(Report::from_json_line(r#"{"t":"nope"}"#).is_err());
    }

    #[test]
    fn validation() {
        let shape = ReportShape::Subset { k: 5, omega: 2 };
        assert!(shape.validate(&Report::Subset { s: vec![0, 4] }).is_ok());
        assert!(shape.validate(&Report::Subset { s: vec![4, 0] }).is_err());
        assert!(shape.validate(&Report::Subset { s: vec![1, 1] }).is_err());
        assert!(shape.validate(&Report::Subset { s: vec![1, 5] }).is_err());
        assert!(matches!(
            shape.validate(&Report::Value { v: 0 }),
            Err(LdpError::MixedReportTypes { .. })
        ));
        assert!(ReportShape::Bits { k: 3 }
            .validate(&Report::Bits { b: vec![true].into() })
            .is_err());
    }

    mod prop {
        use super::super::*;
        use proptest::prelude::*;

        fn any_report() -> impl Strategy<Value = Report> {
            prop_oneof![
                any::<usize>().prop_map(|v| Report::Value { v }),
                proptest::collection::vec(any::<bool>(), 0..40).prop_map(|b| Report::Bits { b: b.into() }),
                (any::<u64>(), any::<usize>()).prop_map(|(seed, b)| Report::Lh { seed, b }),
                proptest::collection::btree_set(0usize..1000, 0..10).prop_map(|s| Report::Subset {
                    s: s.into_iter().collect()
                }),
                proptest::collection::vec(any::<bool>(), 0..10).prop_map(|bits| Report::Dbit {
                    idx: (0..bits.len()).collect(),
                    bits: bits.into()
                }),
            ]
        }

        proptest! {
            #[test]
            fn json_line_roundtrip(r in any_report()) {
                let line = r.to_json_line();
                prop_assert!(!line.contains('\n'));
                prop_assert_eq!(Report::from_json_line(&line).unwrap(), r);
            }
        }
    }
}
