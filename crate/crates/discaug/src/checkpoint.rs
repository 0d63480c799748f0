//! Plain-text model checkpoints.
//!
//! Layout: line 1 is `discaug-ckpt v1 <d> <H> <d_a> <V>`, followed by
//! repeated blocks of `name rows cols` and `rows` lines of space-separated
//! reals in row-major order. Dimensions that a model kind does not use are
//! written as 0. Block names carry a kind prefix (`nb.`, `lr.`, `cnn.`,
//! `rnn.`) which the loader uses to reconstruct the right model.
//!
//! Values are written with Rust's shortest round-trip float formatting, so
//! save/load/save is byte-stable. The vocabulary rides in a sidecar file at
//! `<path>.vocab`, one token per line in index order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::models::{ClassifierKind, ClassifierModel, LrModel, ModelParams, NbModel};
use crate::neural::linalg::Mat;
use crate::neural::net::ParamMats;
use crate::neural::{AttnBiLstmNet, CnnNet};
use crate::text::Vocabulary;

const MAGIC: &str = "discaug-ckpt v1";

fn vocab_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".vocab");
    PathBuf::from(s)
}

fn model_mats(model: &ClassifierModel) -> Vec<(String, Mat)> {
    let prefix = model.kind.as_str();
    match &model.params {
        ModelParams::NaiveBayes(m) => vec![
            (
                format!("{prefix}.alpha"),
                Mat::from_vec(1, 1, vec![m.alpha]),
            ),
            (format!("{prefix}.log_prior"), m.log_prior.clone()),
            (format!("{prefix}.log_likelihood"), m.log_likelihood.clone()),
        ],
        ModelParams::LogisticRegression(m) => vec![
            (format!("{prefix}.weights"), m.weights.clone()),
            (format!("{prefix}.bias"), m.bias.clone()),
        ],
        ModelParams::Cnn(net) => net
            .mats()
            .into_iter()
            .map(|(name, m)| (format!("{prefix}.{name}"), m.clone()))
            .collect(),
        ModelParams::AttnBiLstm(net) => net
            .mats()
            .into_iter()
            .map(|(name, m)| (format!("{prefix}.{name}"), m.clone()))
            .collect(),
    }
}

fn header_dims(model: &ClassifierModel) -> (usize, usize, usize) {
    match &model.params {
        ModelParams::AttnBiLstm(net) => {
            let (d, h, a, _) = net.dims();
            (d, h, a)
        }
        ModelParams::Cnn(net) => (net.embedding.cols, 0, 0),
        _ => (0, 0, 0),
    }
}

/// Serialize a model to the checkpoint text format.
pub fn to_string(model: &ClassifierModel) -> String {
    let (d, h, a) = header_dims(model);
    let vocab_len = model.vocab.len();
    let mut out = String::new();
    writeln!(out, "{MAGIC} {d} {h} {a} {vocab_len}").unwrap();
    for (name, mat) in model_mats(model) {
        writeln!(out, "{name} {} {}", mat.rows, mat.cols).unwrap();
        for r in 0..mat.rows {
            let row = mat.row(r);
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    out.push(' ');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// Write the checkpoint and its `.vocab` sidecar.
pub fn save(model: &ClassifierModel, path: &Path) -> Result<()> {
    fs::write(path, to_string(model)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut vocab_text = String::new();
    for i in 0..model.vocab.len() {
        vocab_text.push_str(model.vocab.token(i).unwrap());
        vocab_text.push('\n');
    }
    let sidecar = vocab_sidecar(path);
    fs::write(&sidecar, vocab_text).map_err(|source| Error::Io {
        path: sidecar,
        source,
    })?;
    Ok(())
}

struct Block {
    name: String,
    mat: Mat,
}

fn parse_blocks(text: &str, path: &Path) -> Result<(Vec<usize>, Vec<Block>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Checkpoint(format!("{}: empty file", path.display())))?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Checkpoint(format!("{}: bad magic", path.display())))?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|v| v.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Checkpoint(format!("{}: bad header dims", path.display())))?;
    if dims.len() != 4 {
        return Err(Error::Checkpoint(format!(
            "{}: header must carry 4 dims, got {}",
            path.display(),
            dims.len()
        )));
    }

    let mut blocks = Vec::new();
    while let Some((line_no, line)) = lines.next() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (name, rows, cols) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(r), Some(c), None) => {
                let rows: usize = r.parse().map_err(|_| bad_block(path, line_no))?;
                let cols: usize = c.parse().map_err(|_| bad_block(path, line_no))?;
                (n.to_string(), rows, cols)
            }
            _ => return Err(bad_block(path, line_no)),
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (row_no, row_line) = lines.next().ok_or_else(|| {
                Error::Checkpoint(format!("{}: truncated block {name}", path.display()))
            })?;
            for field in row_line.split_whitespace() {
                data.push(field.parse::<f64>().map_err(|_| bad_block(path, row_no))?);
            }
        }
        if data.len() != rows * cols {
            return Err(Error::Checkpoint(format!(
                "{}: block {name} has {} values, expected {}",
                path.display(),
                data.len(),
                rows * cols
            )));
        }
        blocks.push(Block {
            name,
            mat: Mat::from_vec(rows, cols, data),
        });
    }
    Ok((dims, blocks))
}

fn bad_block(path: &Path, line: usize) -> Error {
    Error::Checkpoint(format!("{}:{}: malformed block", path.display(), line + 1))
}

fn load_vocab(path: &Path, expected_len: usize) -> Result<Vocabulary> {
    let sidecar = vocab_sidecar(path);
    let text = fs::read_to_string(&sidecar).map_err(|source| Error::Io {
        path: sidecar.clone(),
        source,
    })?;
    let tokens: Vec<&str> = text.lines().collect();
    if tokens.len() != expected_len {
        return Err(Error::Checkpoint(format!(
            "{}: vocab sidecar has {} tokens, checkpoint expects {}",
            sidecar.display(),
            tokens.len(),
            expected_len
        )));
    }
    if tokens.len() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>" {
        return Err(Error::Checkpoint(format!(
            "{}: vocab sidecar must start with <pad> and <unk>",
            sidecar.display()
        )));
    }
    Vocabulary::from_token_list(tokens[2..].iter().map(|t| t.to_string()).collect(), 1)
}

fn take<'a>(blocks: &'a [Block], name: &str, path: &Path) -> Result<&'a Mat> {
    blocks
        .iter()
        .find(|b| b.name == name)
        .map(|b| &b.mat)
        .ok_or_else(|| Error::Checkpoint(format!("{}: missing block {name}", path.display())))
}

/// Load a model (and its vocabulary sidecar) from disk.
pub fn load(path: &Path) -> Result<ClassifierModel> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (dims, blocks) = parse_blocks(&text, path)?;
    let (d, h, a, v) = (dims[0], dims[1], dims[2], dims[3]);
    let vocab = load_vocab(path, v)?;
    let first = blocks
        .first()
        .ok_or_else(|| Error::Checkpoint(format!("{}: no parameter blocks", path.display())))?;
    let kind = ClassifierKind::parse(first.name.split('.').next().unwrap_or(""))?;

    let params = match kind {
        ClassifierKind::NaiveBayes => {
            let alpha = take(&blocks, "nb.alpha", path)?.at(0, 0);
            ModelParams::NaiveBayes(NbModel {
                alpha,
                log_prior: take(&blocks, "nb.log_prior", path)?.clone(),
                log_likelihood: take(&blocks, "nb.log_likelihood", path)?.clone(),
            })
        }
        ClassifierKind::LogisticRegression => ModelParams::LogisticRegression(LrModel {
            weights: take(&blocks, "lr.weights", path)?.clone(),
            bias: take(&blocks, "lr.bias", path)?.clone(),
        }),
        ClassifierKind::Cnn => {
            // filter widths and counts are recovered from the block shapes
            let mut widths = Vec::new();
            let mut n_filters = 0;
            for b in &blocks {
                if let Some(rest) = b.name.strip_prefix("cnn.conv") {
                    if let Some(w) = rest.strip_suffix(".weights") {
                        let width: usize = w.parse().map_err(|_| {
                            Error::Checkpoint(format!(
                                "{}: bad conv block {}",
                                path.display(),
                                b.name
                            ))
                        })?;
                        widths.push(width);
                        n_filters = b.mat.rows;
                    }
                }
            }
            if widths.is_empty() {
                return Err(Error::Checkpoint(format!(
                    "{}: CNN checkpoint without conv blocks",
                    path.display()
                )));
            }
            let mut net = CnnNet::zeros(v, d, &widths, n_filters);
            fill_net(&mut net, "cnn", &blocks, path)?;
            ModelParams::Cnn(Box::new(net))
        }
        ClassifierKind::AttnBiLstm => {
            let mut net = AttnBiLstmNet::zeros(v, d, h, a);
            fill_net(&mut net, "rnn", &blocks, path)?;
            ModelParams::AttnBiLstm(Box::new(net))
        }
    };

    Ok(ClassifierModel {
        kind,
        vocab,
        params,
    })
}

fn fill_net<N: ParamMats>(net: &mut N, prefix: &str, blocks: &[Block], path: &Path) -> Result<()> {
    for (name, mat) in net.mats_mut() {
        let full = format!("{prefix}.{name}");
        let block = take(blocks, &full, path)?;
        if block.rows != mat.rows || block.cols != mat.cols {
            return Err(Error::Checkpoint(format!(
                "{}: block {full} is {}x{}, expected {}x{}",
                path.display(),
                block.rows,
                block.cols,
                mat.rows,
                mat.cols
            )));
        }
        mat.as_mut_slice().copy_from_slice(block.as_slice());
    }
    Ok(())
}
