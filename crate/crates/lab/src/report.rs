//! Machine-readable reports.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::slice::TruncationSpec;

/// `{operator, spec, dims, witnesses, verdict}`; the verdict always states
/// the bounds it holds within.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub operator: String,
    pub spec: TruncationSpec,
    pub dims: BTreeMap<String, usize>,
    pub witnesses: Vec<String>,
    pub verdict: String,
}

impl Report {
    pub fn new<const N: usize>(
        operator: &str,
        spec: &TruncationSpec,
        dims: [(&str, usize); N],
        witnesses: Vec<String>,
        verdict: String,
    ) -> Self {
        Report {
            operator: operator.to_string(),
            spec: spec.clone(),
            dims: dims.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            witnesses,
            verdict,
        }
    }
}
