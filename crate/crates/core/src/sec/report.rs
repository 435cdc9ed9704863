//! Machine-readable check reports.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Equivalent,
    Unequivalent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "EQUIVALENT",
            Verdict::Unequivalent => "UNEQUIVALENT",
        })
    }
}

/// A spec/impl name pair proven equal, and the cut variable that replaced
/// them (none when the common value was a constant or a single variable).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchRecord {
    pub spec: String,
    #[serde(rename = "impl")]
    pub implementation: String,
    pub cut_var: Option<String>,
}

/// A corresponding output pair that differs, with the canonical difference
/// `spec - impl` (reduced modulo `2^w` in modular mode).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Mismatch {
    pub output: String,
    pub spec: String,
    #[serde(rename = "impl")]
    pub implementation: String,
    pub difference: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Counters {
    /// Segment pairs examined.
    pub segments: u64,
    pub internal_equ_calls: u64,
    /// Peeling steps inside internal-equivalence searches.
    pub peel_rounds: u64,
    /// Largest number of live diagram nodes.
    pub peak_node_count: usize,
    /// Largest segment, in nodes reachable from its values.
    pub max_segment_nodes: usize,
    pub cut_vars: u64,
    /// Segments that exceeded the node budget with a single new statement.
    pub budget_overruns: u64,
    /// Rebuilds over the primary inputs to confirm unresolved outputs.
    pub confirmation_reruns: u64,
    /// Outputs unresolved through cut points but equal after the rebuild.
    pub recovered_outputs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: u32,
    pub verdict: Verdict,
    pub width: Option<u32>,
    pub matched: Vec<MatchRecord>,
    pub unmatched: Vec<Mismatch>,
    pub counters: Counters,
    /// Right shifts that had no exact polynomial form and were treated as
    /// uninterpreted functions.
    pub inexact: Vec<String>,
    pub assumptions: Vec<String>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
