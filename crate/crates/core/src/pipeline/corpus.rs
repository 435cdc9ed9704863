//! The bundled benchmark corpus and its manifest.
//!
//! Each manifest program is checked against pipelined implementations under
//! every listed schedule setting (positive cases) and against a mutant of
//! each that a concrete witness proves different (negative cases). Fixed
//! spec/impl file pairs are listed separately.

use serde::Deserialize;

use super::{
    concrete_check, min_feasible_ii, mutate, pipeline_transform, LatencyModel, MutationDescriptor, PipelineResult,
};
use crate::dfl::AssignmentList;
use crate::error::{Error, Result};
use crate::sec::Verdict;

const FILES: &[(&str, &str)] = &[
    ("clamp.dfl", include_str!("../../corpus/clamp.dfl")),
    ("colorconv.dfl", include_str!("../../corpus/colorconv.dfl")),
    ("dct4.dfl", include_str!("../../corpus/dct4.dfl")),
    ("dot4.dfl", include_str!("../../corpus/dot4.dfl")),
    ("fft4.dfl", include_str!("../../corpus/fft4.dfl")),
    ("fft4_mut.dfl", include_str!("../../corpus/fft4_mut.dfl")),
    ("fft4_pipe.dfl", include_str!("../../corpus/fft4_pipe.dfl")),
    ("fir4.dfl", include_str!("../../corpus/fir4.dfl")),
    ("horner.dfl", include_str!("../../corpus/horner.dfl")),
    ("matvec2.dfl", include_str!("../../corpus/matvec2.dfl")),
    ("nest3.dfl", include_str!("../../corpus/nest3.dfl")),
    ("poly2.dfl", include_str!("../../corpus/poly2.dfl")),
    ("popcount.dfl", include_str!("../../corpus/popcount.dfl")),
    ("prodsum.dfl", include_str!("../../corpus/prodsum.dfl")),
    ("select.dfl", include_str!("../../corpus/select.dfl")),
    ("sobel.dfl", include_str!("../../corpus/sobel.dfl")),
    ("vanish_impl.dfl", include_str!("../../corpus/vanish_impl.dfl")),
    ("vanish_spec.dfl", include_str!("../../corpus/vanish_spec.dfl")),
];

const MANIFEST: &str = include_str!("../../corpus/manifest.json");

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Manifest {
    /// Width for generated cases.
    pub width: u32,
    pub programs: Vec<String>,
    pub settings: Vec<Setting>,
    /// Seeds tried, in order, when looking for a distinguishing mutant.
    pub mutant_seeds: u64,
    pub pairs: Vec<Pair>,
}

/// A schedule setting; the initiation interval defaults to the smallest
/// feasible one.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Setting {
    pub name: String,
    #[serde(default)]
    pub ii: Option<u32>,
    pub latency: LatencyModel,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub spec: String,
    #[serde(rename = "impl")]
    pub implementation: String,
    #[serde(default)]
    pub width: Option<u32>,
    pub expected: Verdict,
}

pub fn manifest() -> Manifest {
    serde_json::from_str(MANIFEST).expect("bundled manifest is valid")
}

/// Source text of a bundled corpus file.
pub fn source(name: &str) -> Result<&'static str> {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::Invalid(format!("no corpus file `{name}`")))
}

pub fn file_names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

/// Pipelined implementation of `spec` under `setting`.
pub fn pipelined(spec: &AssignmentList, setting: &Setting) -> Result<PipelineResult> {
    let ii = match setting.ii {
        Some(ii) => ii,
        None => min_feasible_ii(spec, &setting.latency)?,
    };
    pipeline_transform(spec, &setting.latency, ii)
}

/// A mutant of `imp` (`seed` in `0..seeds`) on which a concrete input
/// point separates it from `spec` modulo `2^width`.
pub fn distinguishing_mutant(
    spec: &AssignmentList,
    imp: &AssignmentList,
    width: u32,
    seeds: u64,
) -> Result<Option<(AssignmentList, MutationDescriptor, u64)>> {
    for seed in 0..seeds {
        let (m, d) = mutate(imp, seed)?;
        if concrete_check(spec, &m, width, 4096, seed)?.witness.is_some() {
            return Ok(Some((m, d, seed)));
        }
    }
    Ok(None)
}
