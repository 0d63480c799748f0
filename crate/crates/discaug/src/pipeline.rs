//! End-to-end augmentation and the experiment grid runner.
//!
//! The augmentation pass mirrors the staged procedure: harvest candidates
//! from transition sentences, keep the ones whose validator prediction
//! agrees with their proposed label, and append the survivors to the
//! training set. The grid runner sweeps (dataset, imbalanced-ratio, method,
//! setting, replicate) cells, evaluates each trained model on the untouched
//! balanced test split, and writes a deterministic CSV.
//!
//! Grid cells share immutable inputs (split datasets, the frozen validator)
//! and run in parallel; every cell derives its own RNG stream from the
//! global seed and the cell coordinates, so results never depend on
//! scheduling.

use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::corpus::{self, Dataset, LoadMode, Sample, SplitSpec};
use crate::error::{Error, Result};
use crate::models::{self, ClassifierKind, ClassifierModel, TrainConfig};
use crate::par::map_ordered;
use crate::rng::derive_seed;
use crate::segmenter::{harvest, Candidate, MarkerSet};

/// Counts calls to [`validate_filter`]; lets tests verify that the plain
/// oversampling arm never touches the validator.
pub static VALIDATE_FILTER_CALLS: AtomicU64 = AtomicU64::new(0);

/// Keep the candidates whose validator-predicted label matches their
/// proposed label (and clears `min_confidence`, which defaults to 0).
/// Order is preserved.
pub fn validate_filter(
    cands: &[Candidate],
    validator: &ClassifierModel,
    min_confidence: f64,
) -> Vec<Candidate> {
    VALIDATE_FILTER_CALLS.fetch_add(1, Ordering::Relaxed);
    let verdicts = map_ordered(cands, |c| match validator.predict_tokens(&c.tokens) {
        Ok((label, confidence)) => label == c.proposed_label && confidence >= min_confidence,
        Err(_) => false,
    });
    cands
        .iter()
        .zip(verdicts)
        .filter(|(_, keep)| *keep)
        .map(|(c, _)| c.clone())
        .collect()
}

/// Harvest candidates from `train`, filter them through the validator when
/// one is given, and append the survivors with fresh ids. Every original
/// sample is retained.
pub fn augment(
    train: &Dataset,
    markers: &MarkerSet,
    validator: Option<&ClassifierModel>,
    min_confidence: f64,
) -> Dataset {
    let candidates = harvest(train, markers);
    let kept = match validator {
        Some(v) => validate_filter(&candidates, v, min_confidence),
        None => candidates,
    };
    let mut out = train.clone();
    for (next_id, c) in (train.max_id() + 1..).zip(kept) {
        out.samples.push(Sample {
            id: next_id,
            tokens: c.tokens,
            label: c.proposed_label,
        });
    }
    out
}

/// Oversample to equal class counts, then train the classifier.
pub fn rebalance_and_train(
    aug: &Dataset,
    cfg: &TrainConfig,
    oversample_seed: u64,
) -> Result<ClassifierModel> {
    let balanced = corpus::oversample(aug, oversample_seed)?;
    models::train(&balanced, cfg)
}

/// Experiment arm: how the training set is prepared before rebalancing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setting {
    /// Plain random oversampling of the imbalanced training set.
    Oversample,
    /// Marker augmentation with validator filtering, then oversampling.
    AugmentOversample,
    /// Marker augmentation without the validator, then oversampling.
    AugmentNoValidator,
}

impl Setting {
    pub const ALL: [Setting; 3] = [
        Setting::Oversample,
        Setting::AugmentOversample,
        Setting::AugmentNoValidator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Oversample => "os",
            Setting::AugmentOversample => "our+os",
            Setting::AugmentNoValidator => "wo-val",
        }
    }

    pub fn parse(s: &str) -> Result<Setting> {
        match s.trim().to_lowercase().as_str() {
            "os" => Ok(Setting::Oversample),
            "our+os" => Ok(Setting::AugmentOversample),
            "wo-val" => Ok(Setting::AugmentNoValidator),
            other => Err(Error::InvalidConfig(format!(
                "unknown setting {other:?}, expected os, our+os, or wo-val"
            ))),
        }
    }

    fn needs_harvest(self) -> bool {
        self != Setting::Oversample
    }

    fn needs_validator(self) -> bool {
        self == Setting::AugmentOversample
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where an experiment dataset comes from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    Tsv {
        name: String,
        path: PathBuf,
    },
    Pair {
        name: String,
        pos: PathBuf,
        neg: PathBuf,
    },
    InMemory(Dataset),
}

impl DatasetSource {
    pub fn name(&self) -> &str {
        match self {
            DatasetSource::Tsv { name, .. } | DatasetSource::Pair { name, .. } => name,
            DatasetSource::InMemory(d) => &d.name,
        }
    }

    fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Tsv { name, path } => {
                corpus::load_dataset(name.clone(), &LoadMode::Tsv(path.clone()))
            }
            DatasetSource::Pair { name, pos, neg } => corpus::load_dataset(
                name.clone(),
                &LoadMode::Pair {
                    pos: pos.clone(),
                    neg: neg.clone(),
                },
            ),
            DatasetSource::InMemory(d) => Ok(d.clone()),
        }
    }
}

/// Where the augmentation validator comes from.
#[derive(Debug, Clone)]
pub enum ValidatorSource {
    /// Load one frozen validator from a checkpoint.
    Checkpoint(PathBuf),
    /// Use an already trained model.
    Pretrained(Arc<ClassifierModel>),
    /// Train per (dataset, replicate) on the balanced training split,
    /// before any imbalance is imposed.
    TrainPerReplicate,
}

/// Hyperparameters for the neural classifiers and the trained-in-run
/// validator. Bag-of-words methods ignore them.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralHyper {
    pub embedding_dim: usize,
    pub hidden: usize,
    pub attention_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub n_filters: usize,
    pub filter_widths: Vec<usize>,
}

impl NeuralHyper {
    /// Classifier defaults: RNN baseline at 256 hidden units, CNN at
    /// 100 filters per width with dropout 0.5.
    pub fn classifier() -> NeuralHyper {
        NeuralHyper {
            embedding_dim: 64,
            hidden: 256,
            attention_dim: 32,
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-3,
            dropout: 0.5,
            n_filters: 100,
            filter_widths: vec![3, 4, 5],
        }
    }

    /// Validator defaults: 32 hidden units.
    pub fn validator() -> NeuralHyper {
        NeuralHyper {
            hidden: 32,
            attention_dim: 16,
            dropout: 0.0,
            ..NeuralHyper::classifier()
        }
    }

    fn apply(&self, cfg: &mut TrainConfig) {
        cfg.embedding_dim = self.embedding_dim;
        cfg.hidden = self.hidden;
        cfg.attention_dim = self.attention_dim;
        cfg.epochs = self.epochs;
        cfg.batch_size = self.batch_size;
        cfg.learning_rate = self.learning_rate;
        cfg.dropout = if cfg.kind == ClassifierKind::Cnn {
            self.dropout
        } else {
            0.0
        };
        cfg.n_filters = self.n_filters;
        cfg.filter_widths = self.filter_widths.clone();
    }
}

/// A full grid specification. The CSV produced by [`run_experiment`] is a
/// pure function of this value.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    pub markers: MarkerSet,
    pub irs: Vec<u32>,
    pub methods: Vec<ClassifierKind>,
    pub settings: Vec<Setting>,
    /// Number of replicates; each reruns the split and every downstream draw.
    pub replicates: u32,
    pub train_fraction: f64,
    pub global_seed: u64,
    pub min_confidence: f64,
    pub validator: ValidatorSource,
    pub classifier_hyper: NeuralHyper,
    pub validator_hyper: NeuralHyper,
}

impl ExperimentConfig {
    pub fn new(datasets: Vec<DatasetSource>) -> ExperimentConfig {
        ExperimentConfig {
            datasets,
            markers: MarkerSet::transitional(),
            irs: vec![5],
            methods: vec![
                ClassifierKind::NaiveBayes,
                ClassifierKind::LogisticRegression,
            ],
            settings: vec![Setting::Oversample, Setting::AugmentOversample],
            replicates: 3,
            train_fraction: 0.8,
            global_seed: 42,
            min_confidence: 0.0,
            validator: ValidatorSource::TrainPerReplicate,
            classifier_hyper: NeuralHyper::classifier(),
            validator_hyper: NeuralHyper::validator(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::InvalidConfig("no datasets".into()));
        }
        for d in &self.datasets {
            let name = d.name();
            if name.is_empty() || name.contains(',') || name.contains('\n') {
                return Err(Error::InvalidConfig(format!(
                    "unusable dataset name {name:?}"
                )));
            }
        }
        if self.irs.is_empty() || self.methods.is_empty() || self.settings.is_empty() {
            return Err(Error::InvalidConfig(
                "irs, methods, and settings must be non-empty".into(),
            ));
        }
        if self.irs.contains(&0) {
            return Err(Error::InvalidConfig("imbalanced-ratio must be >= 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("need at least one replicate".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "train fraction must be in (0,1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::InvalidConfig(
                "min confidence must be in [0,1]".into(),
            ));
        }
        Ok(())
    }

    fn train_config(&self, method: ClassifierKind, seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::new(method, seed);
        self.classifier_hyper.apply(&mut cfg);
        cfg
    }

    fn validator_config(&self, seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::validator(seed);
        self.validator_hyper.apply(&mut cfg);
        cfg
    }
}

/// One per-cell outcome row.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub dataset: String,
    pub ir: u32,
    pub method: ClassifierKind,
    pub setting: Setting,
    pub seed: u32,
    pub accuracy: std::result::Result<f64, String>,
}

/// One aggregate row: mean accuracy over replicates and improvement over
/// the plain-oversampling arm of the same (dataset, ir, method).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub dataset: String,
    pub ir: u32,
    pub method: ClassifierKind,
    pub setting: Setting,
    pub mean_accuracy: Option<f64>,
    pub improvement_vs_os: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub cells: Vec<CellRow>,
    pub aggregates: Vec<AggregateRow>,
}

fn sanitize(msg: &str) -> String {
    msg.replace(['\n', ','], ";")
}

impl ResultTable {
    pub fn has_errors(&self) -> bool {
        self.cells.iter().any(|c| c.accuracy.is_err())
    }

    /// Per-cell section, a blank line, then the aggregate section.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,ir,method,setting,seed,accuracy\n");
        for c in &self.cells {
            let acc = match &c.accuracy {
                Ok(a) => format!("{a:.4}"),
                Err(msg) => format!("error: {}", sanitize(msg)),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.dataset, c.ir, c.method, c.setting, c.seed, acc
            ));
        }
        out.push('\n');
        out.push_str("dataset,ir,method,setting,mean_accuracy,mean_improvement_vs_os\n");
        for a in &self.aggregates {
            let mean = a
                .mean_accuracy
                .map(|m| format!("{m:.4}"))
                .unwrap_or_default();
            let imp = a
                .improvement_vs_os
                .map(|i| format!("{i:.4}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                a.dataset, a.ir, a.method, a.setting, mean, imp
            ));
        }
        out
    }

    /// Mean accuracy of one (dataset, ir, method, setting) aggregate.
    pub fn mean_accuracy(
        &self,
        dataset: &str,
        ir: u32,
        method: ClassifierKind,
        setting: Setting,
    ) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| {
                a.dataset == dataset && a.ir == ir && a.method == method && a.setting == setting
            })
            .and_then(|a| a.mean_accuracy)
    }
}

/// Stage outputs shared by every cell of one (dataset, replicate).
struct ReplicateCtx {
    train: Dataset,
    test: Dataset,
    validator: Option<Arc<ClassifierModel>>,
}

/// Stage outputs shared by every cell of one (dataset, replicate, ir).
struct IrCtx {
    base: Dataset,
    augmented: Option<Dataset>,
    augmented_unfiltered: Option<Dataset>,
}

impl IrCtx {
    fn for_setting(&self, setting: Setting) -> &Dataset {
        match setting {
            Setting::Oversample => &self.base,
            Setting::AugmentOversample => self.augmented.as_ref().expect("augmented set built"),
            Setting::AugmentNoValidator => self
                .augmented_unfiltered
                .as_ref()
                .expect("unfiltered set built"),
        }
    }
}

/// Run the full grid. Per-cell failures become error rows and the run
/// continues; failures to load a dataset abort the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let needs_harvest = cfg.settings.iter().any(|s| s.needs_harvest());
    let needs_validator = cfg.settings.iter().any(|s| s.needs_validator());

    let loaded: Vec<Dataset> = cfg
        .datasets
        .iter()
        .map(|src| src.load())
        .collect::<Result<_>>()?;

    let shared_validator = match &cfg.validator {
        ValidatorSource::Checkpoint(path) if needs_validator => {
            Some(Arc::new(crate::checkpoint::load(path)?))
        }
        ValidatorSource::Pretrained(model) if needs_validator => Some(model.clone()),
        _ => None,
    };

    // stage 1: per (dataset, replicate) splits and validators
    let rep_keys: Vec<(usize, u32)> = (0..loaded.len())
        .flat_map(|d| (0..cfg.replicates).map(move |r| (d, r)))
        .collect();
    let rep_ctxs: Vec<std::result::Result<ReplicateCtx, String>> =
        map_ordered(&rep_keys, |&(d_idx, rep)| {
            let d = &loaded[d_idx];
            let split_seed = derive_seed(cfg.global_seed, &["split", &d.name, &rep.to_string()]);
            let (train, test) = corpus::split(
                d,
                &SplitSpec::new(cfg.train_fraction, split_seed).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let validator = if needs_validator {
                match &shared_validator {
                    Some(v) => Some(v.clone()),
                    None => {
                        let seed =
                            derive_seed(cfg.global_seed, &["validator", &d.name, &rep.to_string()]);
                        let vcfg = cfg.validator_config(seed);
                        Some(Arc::new(
                            models::train(&train, &vcfg).map_err(|e| e.to_string())?,
                        ))
                    }
                }
            } else {
                None
            };
            Ok(ReplicateCtx {
                train,
                test,
                validator,
            })
        });

    // stage 2: per (dataset, replicate, ir) imbalanced and augmented sets
    let ir_keys: Vec<(usize, u32, u32)> = rep_keys
        .iter()
        .flat_map(|&(d, r)| cfg.irs.iter().map(move |&ir| (d, r, ir)))
        .collect();
    let ir_ctxs: Vec<std::result::Result<IrCtx, String>> =
        map_ordered(&ir_keys, |&(d_idx, rep, ir)| {
            let rep_pos = rep_keys
                .iter()
                .position(|&k| k == (d_idx, rep))
                .expect("replicate context exists");
            let ctx = rep_ctxs[rep_pos].as_ref().map_err(|e| e.clone())?;
            let name = &loaded[d_idx].name;
            let imb_seed = derive_seed(
                cfg.global_seed,
                &["imbalance", name, &rep.to_string(), &ir.to_string()],
            );
            let base =
                corpus::make_imbalanced(&ctx.train, ir, imb_seed).map_err(|e| e.to_string())?;
            let (augmented, augmented_unfiltered) = if needs_harvest {
                let validated = if needs_validator {
                    let validator = ctx.validator.as_ref().expect("validator built");
                    Some(augment(
                        &base,
                        &cfg.markers,
                        Some(validator),
                        cfg.min_confidence,
                    ))
                } else {
                    None
                };
                let unfiltered = if cfg.settings.contains(&Setting::AugmentNoValidator) {
                    Some(augment(&base, &cfg.markers, None, cfg.min_confidence))
                } else {
                    None
                };
                (validated, unfiltered)
            } else {
                (None, None)
            };
            Ok(IrCtx {
                base,
                augmented,
                augmented_unfiltered,
            })
        });

    // stage 3: the cells themselves, in deterministic enumeration order
    struct CellKey {
        d_idx: usize,
        ir: u32,
        method: ClassifierKind,
        setting: Setting,
        rep: u32,
    }
    let mut cell_keys = Vec::new();
    for d_idx in 0..loaded.len() {
        for &ir in &cfg.irs {
            for &method in &cfg.methods {
                for &setting in &cfg.settings {
                    for rep in 0..cfg.replicates {
                        cell_keys.push(CellKey {
                            d_idx,
                            ir,
                            method,
                            setting,
                            rep,
                        });
                    }
                }
            }
        }
    }

    let cells: Vec<CellRow> = map_ordered(&cell_keys, |key| {
        let name = loaded[key.d_idx].name.clone();
        let outcome = (|| -> std::result::Result<f64, String> {
            let rep_pos = rep_keys
                .iter()
                .position(|&k| k == (key.d_idx, key.rep))
                .expect("replicate context exists");
            let rep_ctx = rep_ctxs[rep_pos].as_ref().map_err(|e| e.clone())?;
            let ir_pos = ir_keys
                .iter()
                .position(|&k| k == (key.d_idx, key.rep, key.ir))
                .expect("ir context exists");
            let ir_ctx = ir_ctxs[ir_pos].as_ref().map_err(|e| e.clone())?;

            let cell_seed = derive_seed(
                cfg.global_seed,
                &[
                    "cell",
                    &name,
                    &key.ir.to_string(),
                    key.method.as_str(),
                    key.setting.as_str(),
                    &key.rep.to_string(),
                ],
            );
            let train_cfg = cfg.train_config(key.method, derive_seed(cell_seed, &["train"]));
            let model = rebalance_and_train(ir_ctx.for_setting(key.setting), &train_cfg, cell_seed)
                .map_err(|e| e.to_string())?;
            model.evaluate(&rep_ctx.test).map_err(|e| e.to_string())
        })();
        CellRow {
            dataset: name,
            ir: key.ir,
            method: key.method,
            setting: key.setting,
            seed: key.rep,
            accuracy: outcome,
        }
    });

    // aggregates in the same enumeration order, minus the replicate axis
    let mut aggregates = Vec::new();
    for dataset in &loaded {
        let name = &dataset.name;
        for &ir in &cfg.irs {
            for &method in &cfg.methods {
                let mean_of = |setting: Setting| -> Option<f64> {
                    let accs: Vec<f64> = cells
                        .iter()
                        .filter(|c| {
                            c.dataset == *name
                                && c.ir == ir
                                && c.method == method
                                && c.setting == setting
                        })
                        .filter_map(|c| c.accuracy.as_ref().ok().copied())
                        .collect();
                    (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
                };
                let os_mean = mean_of(Setting::Oversample);
                for &setting in &cfg.settings {
                    let mean_accuracy = mean_of(setting);
                    let improvement_vs_os = if setting == Setting::Oversample {
                        None
                    } else {
                        match (mean_accuracy, os_mean) {
                            (Some(m), Some(os)) => Some(m - os),
                            _ => None,
                        }
                    };
                    aggregates.push(AggregateRow {
                        dataset: name.clone(),
                        ir,
                        method,
                        setting,
                        mean_accuracy,
                        improvement_vs_os,
                    });
                }
            }
        }
    }

    Ok(ResultTable { cells, aggregates })
}
