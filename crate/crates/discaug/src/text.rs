//! Tokenization, vocabularies, integer encoding, and word-vector loading.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Reserved vocabulary index for padding.
pub const PAD: usize = 0;
/// Reserved vocabulary index for out-of-vocabulary tokens.
pub const UNK: usize = 1;

/// Punctuation characters split off as standalone tokens. Apostrophes are
/// deliberately absent so contractions survive intact.
const SPLIT_PUNCT: &[char] = &[
    '.', ',', '!', '?', ';', ':', '(', ')', '"', '\u{201c}', '\u{201d}',
];

fn is_split_punct(c: char) -> bool {
    SPLIT_PUNCT.contains(&c)
}

/// True for tokens that carry no alphanumeric content (pure punctuation).
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(|c| c.is_alphanumeric())
}

/// Lowercase, split on whitespace, and split the listed punctuation
/// characters off as separate tokens. Empty input yields an empty sequence.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars().flat_map(|c| c.to_lowercase()) {
            if is_split_punct(c) {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}

/// Token-to-index map with reserved PAD and UNK entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    pub min_freq: usize,
}

impl Vocabulary {
    /// Build from a dataset: every token with corpus frequency `>= min_freq`
    /// gets an index. Order after PAD and UNK is descending frequency, ties
    /// broken lexicographically.
    pub fn build(d: &Dataset, min_freq: usize) -> Result<Vocabulary> {
        if min_freq < 1 {
            return Err(Error::InvalidConfig("min_freq must be >= 1".into()));
        }
        if d.is_empty() {
            return Err(Error::EmptyInput(
                "cannot build vocabulary from an empty dataset".into(),
            ));
        }
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for s in &d.samples {
            for t in &s.tokens {
                *freq.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> =
            freq.into_iter().filter(|&(_, n)| n >= min_freq).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        Vocabulary::from_token_list(
            kept.into_iter().map(|(t, _)| t.to_string()).collect(),
            min_freq,
        )
    }

    /// Assemble from an explicit content-token list (index order after the
    /// reserved entries). Used by checkpoint loading.
    pub fn from_token_list(content: Vec<String>, min_freq: usize) -> Result<Vocabulary> {
        let mut tokens = Vec::with_capacity(content.len() + 2);
        tokens.push("<pad>".to_string());
        tokens.push("<unk>".to_string());
        tokens.extend(content);
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate vocabulary token {t:?}"
                )));
            }
        }
        Ok(Vocabulary {
            index,
            tokens,
            min_freq,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // PAD and UNK are always present
    }

    /// Number of non-reserved tokens.
    pub fn content_len(&self) -> usize {
        self.tokens.len() - 2
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(|s| s.as_str())
    }

    /// Content tokens in index order (everything after PAD and UNK).
    pub fn content_tokens(&self) -> &[String] {
        &self.tokens[2..]
    }

    /// Map tokens to indices; out-of-vocabulary tokens map to UNK.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.get(t).unwrap_or(UNK)).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter()
            .map(|&i| {
                self.tokens
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| "<unk>".into())
            })
            .collect()
    }
}

/// Dense embedding table, one row per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    data: Vec<f64>, // row-major, vocab_size x dim
}

impl EmbeddingTable {
    /// Random table, uniform in [-0.1, 0.1], PAD row zeroed.
    pub fn random(vocab_size: usize, dim: usize, seed: u64) -> EmbeddingTable {
        let mut rng = rng_from_seed(seed);
        let data = (0..vocab_size * dim)
            .map(|_| rng.gen_range(-0.1..0.1))
            .collect();
        let mut table = EmbeddingTable { dim, data };
        table.zero_row(PAD);
        table
    }

    pub fn vocab_size(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn zero_row(&mut self, i: usize) {
        self.row_mut(i).fill(0.0);
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> EmbeddingTable {
        debug_assert_eq!(data.len() % dim, 0);
        EmbeddingTable { dim, data }
    }
}

/// Load pretrained vectors in the plain-text interchange format: first line
/// `<count> <dim>`, then `<word> <dim reals>` per line. Vocabulary words
/// found in the file are copied; everything else (including PAD and UNK) is
/// seeded uniform in [-0.1, 0.1], and the PAD row is zeroed last.
pub fn load_embeddings(
    path: &Path,
    vocab: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?,
        None => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: "empty embedding file".into(),
            })
        }
    };
    let mut parts = header.split_whitespace();
    let (count, file_dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(d), None) => {
            let count: usize = c.parse().map_err(|_| malformed(path, 1))?;
            let file_dim: usize = d.parse().map_err(|_| malformed(path, 1))?;
            (count, file_dim)
        }
        _ => return Err(malformed(path, 1)),
    };
    if file_dim != dim {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("dim mismatch: file has {file_dim}, requested {dim}"),
        });
    }

    let mut table = EmbeddingTable::random(vocab.len(), dim, seed);
    let mut seen = 0usize;
    for (line_no, line) in lines {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().ok_or_else(|| malformed(path, line_no + 1))?;
        let values: Vec<f64> = fields
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| malformed(path, line_no + 1))?;
        if values.len() != dim || values.iter().any(|v| !v.is_finite()) {
            return Err(malformed(path, line_no + 1));
        }
        seen += 1;
        if let Some(idx) = vocab.get(word) {
            table.row_mut(idx).copy_from_slice(&values);
        }
    }
    if seen != count {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("header promises {count} entries, file has {seen}"),
        });
    }
    table.zero_row(PAD);
    Ok(table)
}

fn malformed(path: &Path, line: usize) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: "malformed line".into(),
    }
}
