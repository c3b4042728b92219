use serde::Serialize;

/// Non-fatal aggregation diagnostics. The affected entries are reported as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum Warning {
    /// No user reported this attribute.
    EmptyGroup { attr: usize },
    /// No user sampled this bucket in dBitFlipPM.
    NoSamplers { attr: usize, value: usize },
}
