//! Transitional-discourse-marker detection and candidate generation.
//!
//! A compound sentence "the actress is beautiful, but the plot is terrible"
//! decomposes into a head discourse, a marker, and a tail discourse. The
//! tail dominates the sentence's sentiment, so three new labeled samples can
//! be derived: swapping the discourses flips the label, keeping only the
//! head flips it, keeping only the tail preserves it.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::corpus::{Dataset, Label, Sample};
use crate::error::{Error, Result};
use crate::par::map_ordered;
use crate::text::is_punctuation;

/// Minimum number of content (non-punctuation) tokens each discourse must
/// carry to be considered a usable sample on its own.
pub const MIN_DISCOURSE_LEN: usize = 2;

/// Counts calls to [`harvest`]; lets tests verify that the plain-oversampling
/// experiment arm never reaches the segmenter.
pub static HARVEST_CALLS: AtomicU64 = AtomicU64::new(0);

/// Ordered set of transitional markers, each a single lowercase token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerSet {
    markers: Vec<String>,
}

impl MarkerSet {
    /// The default transitional markers: but, although, though, however, yet.
    pub fn transitional() -> MarkerSet {
        MarkerSet::new(
            ["but", "although", "though", "however", "yet"]
                .into_iter()
                .map(String::from)
                .collect(),
        )
        .expect("default marker set is valid")
    }

    pub fn new(markers: Vec<String>) -> Result<MarkerSet> {
        if markers.is_empty() {
            return Err(Error::InvalidConfig("marker set is empty".into()));
        }
        for m in &markers {
            if m.is_empty() || m.split_whitespace().count() != 1 {
                return Err(Error::InvalidConfig(format!(
                    "marker {m:?} must be a single token"
                )));
            }
            if m.chars().any(|c| c.is_uppercase()) {
                return Err(Error::InvalidConfig(format!(
                    "marker {m:?} must be lowercase"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for m in &markers {
            if !seen.insert(m.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate marker {m:?}")));
            }
        }
        Ok(MarkerSet { markers })
    }

    /// Parse a comma-separated list, e.g. `but,although,though,however,yet`.
    pub fn parse(list: &str) -> Result<MarkerSet> {
        MarkerSet::new(
            list.split(',')
                .map(|m| m.trim().to_string())
                .filter(|m| !m.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.markers.iter().any(|m| m == token)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.markers
    }
}

/// A compound sentence decomposed around its first infix marker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscourseSplit {
    pub head: Vec<String>,
    pub marker: String,
    pub tail: Vec<String>,
    /// Whether a comma sat between head and marker in the source sentence.
    pub comma_before_marker: bool,
    pub source_id: u64,
    pub source_label: Label,
}

impl DiscourseSplit {
    /// Reassemble the original token sequence.
    pub fn reassemble(&self) -> Vec<String> {
        let mut tokens = self.head.clone();
        if self.comma_before_marker {
            tokens.push(",".into());
        }
        tokens.push(self.marker.clone());
        tokens.extend(self.tail.iter().cloned());
        tokens
    }
}

/// The three generation rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOp {
    Swap,
    CropHead,
    CropTail,
}

impl CandidateOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateOp::Swap => "swap",
            CandidateOp::CropHead => "crop_head",
            CandidateOp::CropTail => "crop_tail",
        }
    }
}

/// A generated sample with its proposed label and provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub tokens: Vec<String>,
    pub proposed_label: Label,
    pub op: CandidateOp,
    pub source_id: u64,
}

/// Index of the first marker token, requiring it to be infix: at least one
/// token before it and at least one after.
pub fn find_marker(tokens: &[String], markers: &MarkerSet) -> Option<usize> {
    tokens
        .iter()
        .enumerate()
        .find(|&(i, t)| i >= 1 && i + 1 < tokens.len() && markers.contains(t))
        .map(|(i, _)| i)
}

fn content_count(tokens: &[String]) -> usize {
    tokens.iter().filter(|t| !is_punctuation(t)).count()
}

/// Decompose a sample around its first infix marker. Returns `None` when no
/// marker qualifies or either discourse has fewer than
/// [`MIN_DISCOURSE_LEN`] content tokens.
pub fn split_discourse(s: &Sample, markers: &MarkerSet) -> Option<DiscourseSplit> {
    split_discourse_min(s, markers, MIN_DISCOURSE_LEN)
}

/// [`split_discourse`] with an explicit per-side content-token minimum.
pub fn split_discourse_min(
    s: &Sample,
    markers: &MarkerSet,
    min_content: usize,
) -> Option<DiscourseSplit> {
    let at = find_marker(&s.tokens, markers)?;
    let mut head = s.tokens[..at].to_vec();
    let comma_before_marker = head.last().map(|t| t == ",").unwrap_or(false);
    if comma_before_marker {
        head.pop();
    }
    let tail = s.tokens[at + 1..].to_vec();
    if content_count(&head) < min_content || content_count(&tail) < min_content {
        return None;
    }
    Some(DiscourseSplit {
        head,
        marker: s.tokens[at].clone(),
        tail,
        comma_before_marker,
        source_id: s.id,
        source_label: s.label,
    })
}

/// Derive the three candidates from a split: swap (label flipped), crop
/// head (label flipped), crop tail (label kept).
pub fn generate_candidates(split: &DiscourseSplit) -> Vec<Candidate> {
    let mut swapped = split.tail.clone();
    swapped.push(",".into());
    swapped.push(split.marker.clone());
    swapped.extend(split.head.iter().cloned());

    vec![
        Candidate {
            tokens: swapped,
            proposed_label: split.source_label.flip(),
            op: CandidateOp::Swap,
            source_id: split.source_id,
        },
        Candidate {
            tokens: split.head.clone(),
            proposed_label: split.source_label.flip(),
            op: CandidateOp::CropHead,
            source_id: split.source_id,
        },
        Candidate {
            tokens: split.tail.clone(),
            proposed_label: split.source_label,
            op: CandidateOp::CropTail,
            source_id: split.source_id,
        },
    ]
}

/// Generate candidates from every sample that splits validly, in dataset
/// order. Both classes contribute: a majority-class transition sentence
/// yields two minority-labeled candidates.
pub fn harvest(d: &Dataset, markers: &MarkerSet) -> Vec<Candidate> {
    HARVEST_CALLS.fetch_add(1, Ordering::Relaxed);
    map_ordered(&d.samples, |s| {
        split_discourse(s, markers)
            .map(|sp| generate_candidates(&sp))
            .unwrap_or_default()
    })
    .into_iter()
    .flatten()
    .collect()
}
