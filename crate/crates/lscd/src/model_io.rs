//! Embedding persistence in word2vec text format.
//!
//! `model.vec` holds the header `|V| d` and one `token v1 … vd` line per
//! word. A sidecar `model.meta` next to it holds the training metadata and,
//! per word, its frequency and context vector:
//!
//! ```text
//! dim = 2
//! window = 5
//! context = token 17 0.25 -0.5
//! ```
//!
//! Floats are printed in shortest round-trip form, so a save/load cycle is
//! exact.

use std::path::{Path, PathBuf};

use lscd_core::sgns::{EmbeddingModel, TrainConfig, TrainingMeta};
use lscd_core::vocab::Vocabulary;
use lscd_core::Matrix;

use crate::error::{Error, Result};
use crate::formats::{read_lines, write_text};
use crate::kv::KvDoc;

/// Path of the sidecar belonging to a matrix file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

fn push_row(out: &mut String, m: &Matrix, i: usize) {
    for x in m.row(i).iter() {
        out.push(' ');
        out.push_str(&x.to_string());
    }
}

/// Writes rows of `matrix` labelled by `tokens`.
pub fn write_word2vec(path: &Path, tokens: &[String], matrix: &Matrix) -> Result<()> {
    if tokens.len() != matrix.nrows() {
        return Err(lscd_core::Error::LengthMismatch(tokens.len(), matrix.nrows()).into());
    }
    let mut out = format!("{} {}\n", matrix.nrows(), matrix.ncols());
    for (i, t) in tokens.iter().enumerate() {
        out.push_str(t);
        push_row(&mut out, matrix, i);
        out.push('\n');
    }
    write_text(path, &out)
}

fn parse_floats(path: &Path, line: usize, fields: &[&str], dim: usize) -> Result<Vec<f64>> {
    if fields.len() != dim {
        return Err(Error::parse(
            path,
            line,
            format!("expected {dim} values, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse()
                .map_err(|_| Error::parse(path, line, format!("`{f}` is not a number")))
        })
        .collect()
}

pub fn read_word2vec(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let lines = read_lines(path)?;
    let mut header = lines.first().map(|l| l.split_whitespace()).into_iter().flatten();
    let (rows, dim) = match (header.next().map(str::parse), header.next().map(str::parse)) {
        (Some(Ok(r)), Some(Ok(d))) => (r, d),
        _ => return Err(Error::parse(path, 1, "expected header `<rows> <dim>`")),
    };
    let body: Vec<(usize, &String)> = lines
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if body.len() != rows {
        return Err(Error::parse(
            path,
            1,
            format!("header announces {rows} rows, found {}", body.len()),
        ));
    }
    let mut tokens = Vec::with_capacity(rows);
    let mut values = Vec::with_capacity(rows * dim);
    for (i, line) in body {
        let fields: Vec<&str> = line.split_whitespace().collect();
        tokens.push(fields[0].to_string());
        values.extend(parse_floats(path, i + 1, &fields[1..], dim)?);
    }
    Ok((tokens, Matrix::from_row_slice(rows, dim, &values)))
}

fn meta_doc(meta: &TrainingMeta) -> KvDoc {
    let c = &meta.config;
    let mut doc = KvDoc::new();
    doc.push("dim", c.dim)
        .push("window", c.window)
        .push("epochs", c.epochs)
        .push("negative", c.negative)
        .push("initial_lr", c.initial_lr)
        .push("subsampling", c.subsampling)
        .push("seed", c.seed)
        .push("deterministic", meta.deterministic)
        .push("workers", meta.workers);
    doc
}

fn meta_from_doc(doc: &KvDoc) -> Result<TrainingMeta> {
    Ok(TrainingMeta {
        config: TrainConfig {
            dim: doc.required("dim")?,
            window: doc.required("window")?,
            epochs: doc.required("epochs")?,
            negative: doc.required("negative")?,
            initial_lr: doc.required("initial_lr")?,
            subsampling: doc.required("subsampling")?,
            seed: doc.required("seed")?,
        },
        deterministic: doc.required("deterministic")?,
        workers: doc.required("workers")?,
    })
}

/// Writes the word matrix to `path` and the sidecar next to it.
pub fn save_model(path: &Path, model: &EmbeddingModel) -> Result<()> {
    write_word2vec(path, model.vocab().tokens(), model.word_matrix())?;
    let mut doc = meta_doc(model.meta());
    let ctx = model.context_matrix();
    for (i, (token, freq)) in model.vocab().iter().enumerate() {
        let mut line = format!("{token} {freq}");
        push_row(&mut line, ctx, i);
        doc.push("context", line);
    }
    doc.write(&sidecar_path(path))
}

/// Loads a model saved by [`save_model`].
///
/// A plain word2vec file without sidecar is accepted as well: context
/// vectors are then zero, frequencies zero, and the metadata records only `d`.
pub fn load_model(path: &Path) -> Result<EmbeddingModel> {
    let (tokens, word) = read_word2vec(path)?;
    let side = sidecar_path(path);
    if !side.exists() {
        let d = word.ncols();
        let meta = TrainingMeta {
            config: TrainConfig {
                dim: d,
                ..TrainConfig::default()
            },
            deterministic: true,
            workers: 0,
        };
        let vocab = Vocabulary::from_entries(tokens.into_iter().map(|t| (t, 0)));
        let context = Matrix::zeros(word.nrows(), d);
        return Ok(EmbeddingModel::new(vocab, word, context, meta)?);
    }
    let doc = KvDoc::read(&side)?;
    let meta = meta_from_doc(&doc)?;
    let d = word.ncols();
    let mut entries = Vec::with_capacity(tokens.len());
    let mut context = Vec::with_capacity(tokens.len() * d);
    for (i, line) in doc.get_all("context").enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: &str| Error::parse(&side, 0, format!("context entry {}: {m}", i + 1));
        if fields.len() < 2 || tokens.get(i).map(String::as_str) != Some(fields[0]) {
            return Err(bad("token does not match the matrix file"));
        }
        let freq: u64 = fields[1].parse().map_err(|_| bad("bad frequency"))?;
        entries.push((fields[0].to_string(), freq));
        context.extend(parse_floats(&side, 0, &fields[2..], d)?);
    }
    if entries.len() != tokens.len() {
        return Err(Error::parse(
            &side,
            0,
            format!("{} context rows for {} words", entries.len(), tokens.len()),
        ));
    }
    let context = Matrix::from_row_slice(tokens.len(), d, &context);
    Ok(EmbeddingModel::new(
        Vocabulary::from_entries(entries),
        word,
        context,
        meta,
    )?)
}
