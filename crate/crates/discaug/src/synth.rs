//! Synthetic review corpora with a planted sentiment lexicon.
//!
//! The generator produces binary-labeled sentences from fixed positive,
//! negative, and neutral word lists. A configurable fraction of sentences
//! are compound transitions (`<clause> , <marker> <clause>`) whose label
//! follows the tail clause, and a fraction of compound heads are neutral
//! fact statements that carry no sentiment at all. Because the lexicon is
//! known, tests can judge generated samples against it.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Label, Sample};
use crate::rng::{derive_seed, rng_from_seed};

pub const POSITIVE_LEXICON: &[&str] = &[
    "wonderful",
    "excellent",
    "superb",
    "delightful",
    "charming",
    "gripping",
    "funny",
    "moving",
    "beautiful",
    "clever",
    "fresh",
    "warm",
    "engaging",
    "stunning",
    "crisp",
    "lively",
    "smart",
    "tender",
    "inventive",
    "vivid",
    "graceful",
    "satisfying",
    "rich",
    "sharp",
    "playful",
    "luminous",
    "honest",
    "brisk",
    "sweet",
    "polished",
    "radiant",
    "effortless",
    "thrilling",
    "elegant",
    "joyful",
    "sincere",
    "supreme",
    "splendid",
    "uplifting",
    "masterful",
];

pub const NEGATIVE_LEXICON: &[&str] = &[
    "terrible",
    "awful",
    "dreadful",
    "dull",
    "boring",
    "clumsy",
    "tedious",
    "sloppy",
    "bland",
    "messy",
    "weak",
    "stale",
    "hollow",
    "painful",
    "lazy",
    "flat",
    "tired",
    "shallow",
    "grim",
    "lifeless",
    "forgettable",
    "incoherent",
    "labored",
    "numbing",
    "pointless",
    "stiff",
    "murky",
    "soggy",
    "strained",
    "contrived",
    "leaden",
    "aimless",
    "joyless",
    "plodding",
    "limp",
    "turgid",
    "vapid",
    "unfunny",
    "creaky",
    "threadbare",
];

pub const NEUTRAL_WORDS: &[&str] = &[
    "the",
    "a",
    "this",
    "that",
    "movie",
    "film",
    "plot",
    "actor",
    "actress",
    "scene",
    "script",
    "camera",
    "director",
    "story",
    "ending",
    "dialogue",
    "music",
    "pacing",
    "screenplay",
    "character",
    "cast",
    "sequel",
    "trailer",
    "runtime",
    "minutes",
    "theater",
    "screen",
    "audience",
    "ticket",
    "seat",
    "opens",
    "closes",
    "shows",
    "follows",
    "features",
    "presents",
    "depicts",
    "tells",
    "runs",
    "begins",
    "ends",
    "stars",
    "includes",
    "uses",
    "takes",
    "series",
    "version",
    "chapter",
    "episode",
    "release",
    "studio",
    "budget",
    "crew",
    "set",
    "location",
    "costume",
    "score",
    "edit",
    "cut",
    "frame",
    "shot",
    "angle",
    "light",
    "sound",
    "color",
    "tone",
    "genre",
    "drama",
    "comedy",
    "thriller",
    "romance",
    "western",
    "documentary",
    "on",
    "in",
    "at",
    "from",
    "with",
    "about",
    "during",
    "after",
    "before",
    "between",
];

/// Vocabulary for neutral fact statements ("the premiere happened on
/// tuesday"). Disjoint from the filler words of sentiment clauses, so fact
/// clauses carry no sentiment signal a classifier could have learned.
pub const FACT_WORDS: &[&str] = &[
    "tuesday",
    "friday",
    "monday",
    "sunday",
    "summer",
    "winter",
    "spring",
    "autumn",
    "evening",
    "morning",
    "afternoon",
    "noon",
    "premiere",
    "festival",
    "table",
    "hall",
    "city",
    "town",
    "street",
    "house",
    "road",
    "river",
    "office",
    "school",
    "market",
    "garden",
    "station",
    "bridge",
    "hour",
    "week",
    "month",
    "year",
    "arrived",
    "happened",
    "occurred",
    "started",
    "finished",
    "stood",
    "waited",
    "stayed",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "north",
    "south",
    "east",
];

/// Markers planted in compound sentences, the transitional set.
const COMPOUND_MARKERS: &[&str] = &["but", "although", "though", "however", "yet"];

/// Suffixes used to expand the base word lists into larger vocabularies.
const VARIANT_SUFFIXES: &[&str] = &[
    "", "ed", "ing", "ly", "ish", "most", "ness", "like", "er", "est", "ful", "less", "able",
    "ous", "ive", "al",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub samples_per_class: usize,
    /// Fraction of sentences built as compound transitions.
    pub compound_fraction: f64,
    /// Among compound sentences, fraction whose head is a neutral fact.
    pub neutral_head_fraction: f64,
    /// Probability that a sentiment word is drawn from the wrong lexicon.
    pub noise: f64,
    /// Vocabulary richness: each base word spawns this many suffixed
    /// variants (1 keeps the base lists; capped at the suffix count).
    /// Larger vocabularies make lexical coverage the binding constraint,
    /// which is the regime minority-starved corpora live in.
    pub lexicon_multiplier: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            samples_per_class: 500,
            compound_fraction: 0.3,
            neutral_head_fraction: 0.3,
            noise: 0.1,
            lexicon_multiplier: 1,
            seed: 0,
        }
    }
}

/// Expand a base list with suffixed variants, preserving determinism.
pub fn expanded_lexicon(base: &[&str], multiplier: usize) -> Vec<String> {
    let n = multiplier.clamp(1, VARIANT_SUFFIXES.len());
    let mut out = Vec::with_capacity(base.len() * n);
    for suffix in &VARIANT_SUFFIXES[..n] {
        for word in base {
            out.push(format!("{word}{suffix}"));
        }
    }
    out
}

struct Lexicons {
    positive: Vec<String>,
    negative: Vec<String>,
    neutral: Vec<String>,
    fact: Vec<String>,
}

impl Lexicons {
    fn build(cfg: &SynthConfig) -> Lexicons {
        Lexicons {
            positive: expanded_lexicon(POSITIVE_LEXICON, cfg.lexicon_multiplier),
            negative: expanded_lexicon(NEGATIVE_LEXICON, cfg.lexicon_multiplier),
            neutral: expanded_lexicon(NEUTRAL_WORDS, cfg.lexicon_multiplier),
            fact: expanded_lexicon(FACT_WORDS, cfg.lexicon_multiplier),
        }
    }
}

fn pick(words: &[String], rng: &mut ChaCha8Rng) -> String {
    words[rng.gen_range(0..words.len())].clone()
}

fn sentiment_word(lex: &Lexicons, label: Label, noise: f64, rng: &mut ChaCha8Rng) -> String {
    let flipped = rng.gen_bool(noise);
    let effective = if flipped { label.flip() } else { label };
    match effective {
        Label::Positive => pick(&lex.positive, rng),
        Label::Negative => pick(&lex.negative, rng),
    }
}

/// A clause carrying sentiment of `label`: neutral filler plus one to
/// three lexicon words. `rich` clauses (compound heads) carry more
/// sentiment words, the way a review piles up its observations before the
/// short contrastive turn.
fn sentiment_clause(
    lex: &Lexicons,
    label: Label,
    noise: f64,
    rich: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<String> {
    let n_neutral = rng.gen_range(2..5usize);
    let n_sentiment = if rich {
        rng.gen_range(2..4usize)
    } else {
        rng.gen_range(1..3usize)
    };
    let mut clause: Vec<String> = (0..n_neutral).map(|_| pick(&lex.neutral, rng)).collect();
    for _ in 0..n_sentiment {
        clause.push(sentiment_word(lex, label, noise, rng));
    }
    clause.shuffle(rng);
    clause
}

/// A fact statement with no sentiment words at all.
fn neutral_clause(lex: &Lexicons, rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..rng.gen_range(3..6usize))
        .map(|_| pick(&lex.fact, rng))
        .collect()
}

fn sentence(lex: &Lexicons, label: Label, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<String> {
    if rng.gen_bool(cfg.compound_fraction) {
        // tail carries the sentence label; head opposes it or states a fact
        let mut tokens = if rng.gen_bool(cfg.neutral_head_fraction) {
            neutral_clause(lex, rng)
        } else {
            sentiment_clause(lex, label.flip(), cfg.noise, true, rng)
        };
        tokens.push(",".into());
        tokens.push(COMPOUND_MARKERS[rng.gen_range(0..COMPOUND_MARKERS.len())].to_string());
        tokens.extend(sentiment_clause(lex, label, cfg.noise, false, rng));
        tokens
    } else {
        let mut tokens = sentiment_clause(lex, label, cfg.noise, false, rng);
        // ambient punctuation and non-transitional marker uses, so commas
        // and marker tokens are not compound-sentence signatures
        if tokens.len() >= 4 && rng.gen_bool(0.5) {
            let at = rng.gen_range(1..tokens.len() - 1);
            tokens.insert(at, ",".into());
        }
        if rng.gen_bool(0.12) {
            // sentence-initial markers are never harvested (infix rule)
            let m = COMPOUND_MARKERS[rng.gen_range(0..COMPOUND_MARKERS.len())];
            tokens.insert(0, m.to_string());
        }
        tokens
    }
}

/// Deterministic synthetic dataset: positive block first, then negative,
/// ids in emission order.
pub fn generate(name: &str, cfg: &SynthConfig) -> Dataset {
    let lex = Lexicons::build(cfg);
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &["synth", name]));
    let mut samples = Vec::with_capacity(cfg.samples_per_class * 2);
    let mut id = 0u64;
    for label in [Label::Positive, Label::Negative] {
        for _ in 0..cfg.samples_per_class {
            samples.push(Sample {
                id,
                tokens: sentence(&lex, label, cfg, &mut rng),
                label,
            });
            id += 1;
        }
    }
    Dataset::new(name, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn lexicons_are_disjoint() {
        let lists: [(&str, &[&str]); 4] = [
            ("pos", POSITIVE_LEXICON),
            ("neg", NEGATIVE_LEXICON),
            ("neutral", NEUTRAL_WORDS),
            ("fact", FACT_WORDS),
        ];
        for (i, (name_a, a)) in lists.iter().enumerate() {
            let set_a: HashSet<&str> = a.iter().copied().collect();
            assert_eq!(set_a.len(), a.len(), "{name_a} has duplicates");
            for (name_b, b) in lists.iter().skip(i + 1) {
                let set_b: HashSet<&str> = b.iter().copied().collect();
                assert!(set_a.is_disjoint(&set_b), "{name_a} overlaps {name_b}");
            }
            for m in COMPOUND_MARKERS {
                assert!(!set_a.contains(m), "{name_a} contains marker {m}");
            }
        }
    }

    #[test]
    fn expanded_lexicons_stay_disjoint() {
        let pos = expanded_lexicon(POSITIVE_LEXICON, 8);
        let neg = expanded_lexicon(NEGATIVE_LEXICON, 8);
        assert_eq!(pos.len(), POSITIVE_LEXICON.len() * 8);
        let pos_set: HashSet<&String> = pos.iter().collect();
        assert_eq!(pos_set.len(), pos.len());
        assert!(pos.iter().all(|w| !neg.contains(w)));
        assert_eq!(
            expanded_lexicon(POSITIVE_LEXICON, 1).len(),
            POSITIVE_LEXICON.len()
        );
    }

    #[test]
    fn generation_is_deterministic_and_balanced() {
        let cfg = SynthConfig {
            samples_per_class: 50,
            ..SynthConfig::default()
        };
        let a = generate("t", &cfg);
        let b = generate("t", &cfg);
        assert_eq!(a, b);
        assert_eq!(a.class_counts(), (50, 50));
        assert_ne!(a, generate("other", &cfg));
    }

    #[test]
    fn compound_fraction_is_roughly_respected() {
        let cfg = SynthConfig {
            samples_per_class: 600,
            compound_fraction: 0.4,
            ..SynthConfig::default()
        };
        let d = generate("t", &cfg);
        let markers: HashSet<&str> = COMPOUND_MARKERS.iter().copied().collect();
        // ambient marker uses are sentence-initial; compounds carry theirs infix
        let compounds = d
            .samples
            .iter()
            .filter(|s| {
                s.tokens
                    .iter()
                    .skip(1)
                    .any(|t| markers.contains(t.as_str()))
            })
            .count();
        let fraction = compounds as f64 / d.len() as f64;
        assert!((fraction - 0.4).abs() < 0.05, "fraction {fraction}");
    }
}
