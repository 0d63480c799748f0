//! Labeled datasets: loading, stratified splitting, imbalance construction,
//! and random oversampling.
//!
//! All sampling operations are pure functions of `(input, seed)`: equal
//! seeds produce identical outputs, so experiment cells can run in parallel
//! without losing reproducibility.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::text::tokenize;

/// Binary sentiment label. Negative is the minority class by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative = 0,
    Positive = 1,
}

impl Label {
    pub fn flip(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    /// Index into 2-element probability vectors.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        match i {
            0 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// One labeled example: a non-empty lowercased token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: u64,
    pub tokens: Vec<String>,
    pub label: Label,
}

impl Sample {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// An ordered collection of samples with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Dataset {
        Dataset {
            name: name.into(),
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// (negative, positive) sample counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self
            .samples
            .iter()
            .filter(|s| s.label == Label::Positive)
            .count();
        (self.samples.len() - pos, pos)
    }

    pub fn count(&self, label: Label) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }

    /// Majority-over-minority count ratio, `None` when a class is empty.
    pub fn imbalance_ratio(&self) -> Option<f64> {
        let (neg, pos) = self.class_counts();
        let (maj, min) = (neg.max(pos), neg.min(pos));
        (min > 0).then(|| maj as f64 / min as f64)
    }

    pub fn max_id(&self) -> u64 {
        self.samples.iter().map(|s| s.id).max().unwrap_or(0)
    }
}

/// Where a dataset comes from on disk.
#[derive(Debug, Clone)]
pub enum LoadMode {
    /// One `<label>\t<text>` example per line, label character `0` or `1`.
    Tsv(PathBuf),
    /// One plain-text file per class, one example per line.
    Pair { pos: PathBuf, neg: PathBuf },
}

/// Stratified split specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<SplitSpec> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must be in (0,1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
        })
    }
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufReader::new(file).lines().enumerate())
}

/// Load a labeled dataset from disk. Lines that tokenize to nothing are
/// skipped; a file with no usable lines is an error.
pub fn load_dataset(name: impl Into<String>, mode: &LoadMode) -> Result<Dataset> {
    let name = name.into();
    let mut samples = Vec::new();
    let mut next_id = 0u64;

    let mut push = |tokens: Vec<String>, label: Label| {
        if !tokens.is_empty() {
            samples.push(Sample {
                id: next_id,
                tokens,
                label,
            });
            next_id += 1;
        }
    };

    match mode {
        LoadMode::Tsv(path) => {
            for (line_no, line) in open_lines(path)? {
                let line = line.map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                let (label_str, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
                    path: path.clone(),
                    line: line_no + 1,
                    msg: "expected <label>\\t<text>".into(),
                })?;
                let label = match label_str.trim() {
                    "0" => Label::Negative,
                    "1" => Label::Positive,
                    other => {
                        return Err(Error::Parse {
                            path: path.clone(),
                            line: line_no + 1,
                            msg: format!("malformed label {other:?}, expected 0 or 1"),
                        })
                    }
                };
                push(tokenize(text), label);
            }
        }
        LoadMode::Pair { pos, neg } => {
            // Positive file first, then negative; ids follow file order.
            for (path, label) in [(pos, Label::Positive), (neg, Label::Negative)] {
                for (_, line) in open_lines(path)? {
                    let line = line.map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    push(tokenize(&line), label);
                }
            }
        }
    }

    if samples.is_empty() {
        return Err(Error::EmptyInput(format!(
            "zero usable lines loading dataset {name:?}"
        )));
    }
    Ok(Dataset::new(name, samples))
}

/// Stratified train/test split. Per class, `floor(train_fraction * n)`
/// samples go to train and the rest to test; membership is chosen by a
/// seeded shuffle within each class. Both outputs keep ascending id order.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let mut rng = rng_from_seed(spec.seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();

    for label in [Label::Negative, Label::Positive] {
        let mut class: Vec<usize> = (0..d.samples.len())
            .filter(|&i| d.samples[i].label == label)
            .collect();
        if class.is_empty() {
            return Err(Error::EmptyClass(label));
        }
        class.shuffle(&mut rng);
        let n_train = (spec.train_fraction * class.len() as f64).floor() as usize;
        if n_train == 0 || n_train == class.len() {
            return Err(Error::InvalidConfig(format!(
                "class {label:?} would get an empty train or test side \
                 ({} samples at fraction {})",
                class.len(),
                spec.train_fraction
            )));
        }
        train_idx.extend_from_slice(&class[..n_train]);
        test_idx.extend_from_slice(&class[n_train..]);
    }

    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| idx.iter().map(|&i| d.samples[i].clone()).collect();
    Ok((
        Dataset::new(d.name.clone(), pick(&train_idx)),
        Dataset::new(d.name.clone(), pick(&test_idx)),
    ))
}

/// Subsample the negative class to `floor(n_pos / ratio)` samples, keeping
/// every positive sample, then reshuffle the order. The positive class is
/// the majority by convention.
pub fn make_imbalanced(train: &Dataset, ratio: u32, seed: u64) -> Result<Dataset> {
    if ratio < 1 {
        return Err(Error::InvalidConfig("imbalanced-ratio must be >= 1".into()));
    }
    let (n_neg, n_pos) = train.class_counts();
    if n_pos == 0 {
        return Err(Error::EmptyClass(Label::Positive));
    }
    let quota = n_pos / ratio as usize;
    if quota < 1 {
        return Err(Error::InvalidConfig(format!(
            "imbalanced-ratio {ratio} leaves zero negatives ({n_pos} positives)"
        )));
    }
    let quota = quota.min(n_neg);

    let mut rng = rng_from_seed(seed);
    let mut negatives: Vec<&Sample> = train
        .samples
        .iter()
        .filter(|s| s.label == Label::Negative)
        .collect();
    if negatives.is_empty() {
        return Err(Error::EmptyClass(Label::Negative));
    }
    negatives.shuffle(&mut rng);
    negatives.truncate(quota);

    let mut samples: Vec<Sample> = train
        .samples
        .iter()
        .filter(|s| s.label == Label::Positive)
        .cloned()
        .collect();
    samples.extend(negatives.into_iter().cloned());
    samples.shuffle(&mut rng);
    Ok(Dataset::new(train.name.clone(), samples))
}

/// Duplicate minority samples uniformly at random (with replacement) until
/// class counts are equal. Originals are all retained; duplicates get fresh
/// ids. An already balanced dataset is returned unchanged.
pub fn oversample(d: &Dataset, seed: u64) -> Result<Dataset> {
    let (n_neg, n_pos) = d.class_counts();
    if n_neg == 0 {
        return Err(Error::EmptyClass(Label::Negative));
    }
    if n_pos == 0 {
        return Err(Error::EmptyClass(Label::Positive));
    }
    if n_neg == n_pos {
        return Ok(d.clone());
    }
    let minority = if n_neg < n_pos {
        Label::Negative
    } else {
        Label::Positive
    };
    let deficit = n_neg.max(n_pos) - n_neg.min(n_pos);

    let pool: Vec<&Sample> = d.samples.iter().filter(|s| s.label == minority).collect();
    let mut rng = rng_from_seed(derive_seed(seed, &["oversample"]));
    let mut out = d.clone();
    for next_id in (d.max_id() + 1..).take(deficit) {
        let source = pool[rng.gen_range(0..pool.len())];
        out.samples.push(Sample {
            id: next_id,
            tokens: source.tokens.clone(),
            label: source.label,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;
    use std::io::Write;

    fn sample(id: u64, text: &str, label: Label) -> Sample {
        Sample {
            id,
            tokens: tokenize(text),
            label,
        }
    }

    fn toy(n_pos: usize, n_neg: usize) -> Dataset {
        let mut samples = Vec::new();
        for i in 0..n_pos {
            samples.push(sample(
                i as u64,
                &format!("good movie number {i}"),
                Label::Positive,
            ));
        }
        for i in 0..n_neg {
            samples.push(sample(
                (n_pos + i) as u64,
                &format!("bad movie number {i}"),
                Label::Negative,
            ));
        }
        Dataset::new("toy", samples)
    }

    #[test]
    fn load_tsv_basic() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1\tgood movie").unwrap();
        writeln!(f, "0\tbad movie").unwrap();
        let d = load_dataset("t", &LoadMode::Tsv(f.path().to_path_buf())).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.class_counts(), (1, 1));
        assert_eq!(d.samples[0].tokens, vec!["good", "movie"]);
        assert_eq!(d.samples[0].id, 0);
        assert_eq!(d.samples[1].id, 1);
    }

    #[test]
    fn load_pair_mode_counts() {
        let mut pos = tempfile::NamedTempFile::new().unwrap();
        let mut neg = tempfile::NamedTempFile::new().unwrap();
        for i in 0..5331 {
            writeln!(pos, "a fine film {i}").unwrap();
            writeln!(neg, "a dull film {i}").unwrap();
        }
        let d = load_dataset(
            "mr",
            &LoadMode::Pair {
                pos: pos.path().to_path_buf(),
                neg: neg.path().to_path_buf(),
            },
        )
        .unwrap();
        assert_eq!(d.len(), 10662);
        assert_eq!(d.class_counts(), (5331, 5331));
        let ids: HashSet<u64> = d.samples.iter().map(|s| s.id).collect();
        assert_eq!(ids.len(), d.len());
    }

    #[test]
    fn load_empty_file_is_error() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let err = load_dataset("t", &LoadMode::Tsv(f.path().to_path_buf())).unwrap_err();
        assert!(err.to_string().contains("zero usable lines"));
    }

    #[test]
    fn load_malformed_label_is_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "2\toops").unwrap();
        let err = load_dataset("t", &LoadMode::Tsv(f.path().to_path_buf())).unwrap_err();
        assert!(err.to_string().contains("malformed label"));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "no tab here").unwrap();
        let err = load_dataset("t", &LoadMode::Tsv(f.path().to_path_buf())).unwrap_err();
        assert!(err.to_string().contains("expected <label>"));
    }

    #[test]
    fn load_missing_file_is_error() {
        let err = load_dataset("t", &LoadMode::Tsv(PathBuf::from("/nonexistent/x.tsv")));
        assert!(err.is_err());
    }

    #[test]
    fn split_exact_halves() {
        let d = toy(2, 2);
        let (train, test) = split(&d, &SplitSpec::new(0.5, 1).unwrap()).unwrap();
        assert_eq!(train.class_counts(), (1, 1));
        assert_eq!(test.class_counts(), (1, 1));
    }

    #[test]
    fn split_floor_arithmetic_mr_sized() {
        let d = toy(5331, 5331);
        let (train, test) = split(&d, &SplitSpec::new(0.8, 9).unwrap()).unwrap();
        assert_eq!(train.class_counts(), (4264, 4264));
        assert_eq!(test.class_counts(), (1067, 1067));
    }

    #[test]
    fn split_is_a_partition() {
        let mut rng = rng_from_seed(33);
        for trial in 0..50 {
            let n_pos = rng.gen_range(2..40);
            let n_neg = rng.gen_range(2..40);
            let d = toy(n_pos, n_neg);
            let frac = rng.gen_range(0.2..0.8);
            let spec = match SplitSpec::new(frac, trial) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let (train, test) = match split(&d, &spec) {
                Ok(p) => p,
                Err(_) => continue, // degenerate class size for this fraction
            };
            let mut ids: Vec<u64> = train
                .samples
                .iter()
                .chain(test.samples.iter())
                .map(|s| s.id)
                .collect();
            ids.sort_unstable();
            let mut want: Vec<u64> = d.samples.iter().map(|s| s.id).collect();
            want.sort_unstable();
            assert_eq!(ids, want);
            let (_, pos) = d.class_counts();
            assert_eq!(train.count(Label::Positive), (frac * pos as f64) as usize);
        }
    }

    #[test]
    fn split_is_deterministic() {
        let d = toy(20, 14);
        let spec = SplitSpec::new(0.7, 5).unwrap();
        assert_eq!(split(&d, &spec).unwrap(), split(&d, &spec).unwrap());
    }

    #[test]
    fn split_rejects_degenerate_classes() {
        let d = toy(10, 1);
        assert!(split(&d, &SplitSpec::new(0.8, 0).unwrap()).is_err());
    }

    #[test]
    fn imbalance_floor_quota() {
        let d = toy(4264, 4264);
        let imb = make_imbalanced(&d, 5, 3).unwrap();
        assert_eq!(imb.class_counts(), (852, 4264));
        let imb = make_imbalanced(&d, 100, 3).unwrap();
        assert_eq!(imb.class_counts(), (42, 4264));
    }

    #[test]
    fn imbalance_ratio_one_keeps_counts() {
        let d = toy(50, 50);
        let imb = make_imbalanced(&d, 1, 7).unwrap();
        assert_eq!(imb.class_counts(), (50, 50));
    }

    #[test]
    fn imbalance_never_touches_positives() {
        let d = toy(37, 29);
        let imb = make_imbalanced(&d, 3, 11).unwrap();
        let pos_in: HashSet<u64> = d
            .samples
            .iter()
            .filter(|s| s.label == Label::Positive)
            .map(|s| s.id)
            .collect();
        let pos_out: HashSet<u64> = imb
            .samples
            .iter()
            .filter(|s| s.label == Label::Positive)
            .map(|s| s.id)
            .collect();
        assert_eq!(pos_in, pos_out);
        assert_eq!(imb.count(Label::Negative), 37 / 3);
    }

    #[test]
    fn imbalance_rejects_zero_quota() {
        let d = toy(10, 10);
        assert!(make_imbalanced(&d, 11, 0).is_err());
    }

    #[test]
    fn imbalance_is_deterministic() {
        let d = toy(40, 40);
        assert_eq!(
            make_imbalanced(&d, 4, 9).unwrap(),
            make_imbalanced(&d, 4, 9).unwrap()
        );
        assert_ne!(
            make_imbalanced(&d, 4, 9).unwrap(),
            make_imbalanced(&d, 4, 10).unwrap()
        );
    }

    #[test]
    fn oversample_equalizes_counts() {
        let d = make_imbalanced(&toy(4264, 4264), 5, 1).unwrap();
        assert_eq!(d.class_counts(), (852, 4264));
        let os = oversample(&d, 2).unwrap();
        assert_eq!(os.class_counts(), (4264, 4264));
        assert_eq!(os.len() - d.len(), 3412);
    }

    #[test]
    fn oversample_balanced_is_identity() {
        let d = toy(8, 8);
        assert_eq!(oversample(&d, 1).unwrap(), d);
    }

    #[test]
    fn oversample_empty_class_is_error() {
        let d = toy(10, 0);
        assert!(oversample(&d, 1).is_err());
    }

    #[test]
    fn oversample_adds_only_copies_and_keeps_originals() {
        let d = make_imbalanced(&toy(30, 30), 6, 5).unwrap();
        let os = oversample(&d, 8).unwrap();
        let originals: HashSet<u64> = d.samples.iter().map(|s| s.id).collect();
        let out_ids: HashSet<u64> = os.samples.iter().map(|s| s.id).collect();
        assert!(originals.is_subset(&out_ids));
        assert_eq!(out_ids.len(), os.len());
        let in_texts: HashSet<String> = d
            .samples
            .iter()
            .filter(|s| s.label == Label::Negative)
            .map(|s| s.text())
            .collect();
        for s in os.samples.iter().filter(|s| !originals.contains(&s.id)) {
            assert_eq!(s.label, Label::Negative);
            assert!(in_texts.contains(&s.text()));
        }
    }

    #[test]
    fn oversample_is_deterministic() {
        let d = make_imbalanced(&toy(25, 25), 5, 0).unwrap();
        assert_eq!(oversample(&d, 3).unwrap(), oversample(&d, 3).unwrap());
    }
}
