//! Change scores between aligned spaces.

use alloc::string::String;
use alloc::vec::Vec;

use crate::align::AlignedSpaces;
use crate::corpus::TargetWordList;
use crate::error::{Error, Result};

/// Cosine similarity; errors on a zero vector or a length mismatch.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok((dot / libm::sqrt(nu * nv)).clamp(-1.0, 1.0))
}

/// `1 - cos(u, v)`, in `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(1.0 - cosine_similarity(u, v)?)
}

/// Per-target change score; `None` marks a target that could not be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeRanking {
    entries: Vec<(String, Option<f64>)>,
}

impl ChangeRanking {
    pub fn new(entries: Vec<(String, Option<f64>)>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[(String, Option<f64>)] {
        &self.entries
    }

    pub fn scored(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().filter_map(|(w, s)| s.map(|s| (w.as_str(), s)))
    }

    pub fn missing(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|(_, s)| s.is_none())
            .map(|(w, _)| w.as_str())
    }

    pub fn missing_count(&self) -> usize {
        self.missing().count()
    }

    pub fn get(&self, word: &str) -> Option<Option<f64>> {
        self.entries.iter().find(|(w, _)| w == word).map(|(_, s)| *s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Cosine distance between each target's row in the two spaces.
///
/// Targets absent from either space, or with a zero vector, are reported as missing.
pub fn score_targets(spaces: &AlignedSpaces, targets: &TargetWordList) -> ChangeRanking {
    let entries = targets
        .iter()
        .map(|t| {
            let score = match (spaces.vector_a(t), spaces.vector_b(t)) {
                (Some(u), Some(v)) => cosine_distance(&u, &v).ok(),
                _ => None,
            };
            (String::from(t), score)
        })
        .collect();
    ChangeRanking { entries }
}
