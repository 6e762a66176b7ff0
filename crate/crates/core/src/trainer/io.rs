//! Text model format: a `<vocab_size> <dim>` header, then one line per item
//! holding the item id followed by its vector, space separated.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::trainer::{EmbeddingModel, Vocabulary};

fn write_matrix<W: Write>(vocab: &Vocabulary, dim: usize, m: &[f64], sink: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(sink);
    writeln!(w, "{} {}", vocab.len(), dim)?;
    for (i, id) in vocab.items().iter().enumerate() {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::ModelFormat(format!(
                "item id {id:?} cannot be written"
            )));
        }
        w.write_all(id.as_bytes())?;
        for v in &m[i * dim..(i + 1) * dim] {
            write!(w, " {v}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the target vectors.
pub fn write_model<W: Write>(model: &EmbeddingModel, sink: W) -> Result<()> {
    write_matrix(&model.vocab, model.dim, &model.target, sink)
}

/// Writes the context vectors in the same layout, for resuming training.
pub fn write_context<W: Write>(model: &EmbeddingModel, sink: W) -> Result<()> {
    if !model.has_context() {
        return Err(Error::ModelFormat("model has no context matrix".into()));
    }
    write_matrix(&model.vocab, model.dim, &model.context, sink)
}

fn read_matrix<R: Read>(source: R) -> Result<(Vec<String>, usize, Vec<f64>)> {
    let mut lines = BufReader::new(source).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ModelFormat("empty file".into()))??;
    let mut parts = header.split_whitespace().map(str::parse::<usize>);
    let (Some(Ok(n)), Some(Ok(dim)), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::ModelFormat(format!("bad header {header:?}")));
    };
    if dim == 0 {
        return Err(Error::ModelFormat("dimension must be >= 1".into()));
    }
    let mut ids = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * dim);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let id = fields.next().unwrap_or_default();
        let before = values.len();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::ModelFormat(format!("line {}: bad value {f:?}", lineno + 2)))?;
            values.push(v);
        }
        if values.len() - before != dim {
            return Err(Error::ModelFormat(format!(
                "line {}: expected {dim} values, got {}",
                lineno + 2,
                values.len() - before
            )));
        }
        ids.push(id.to_string());
    }
    if ids.len() != n {
        return Err(Error::ModelFormat(format!(
            "header says {n} rows, found {}",
            ids.len()
        )));
    }
    Ok((ids, dim, values))
}

/// Reads target vectors; the returned model has no context matrix.
pub fn read_model<R: Read>(source: R) -> Result<EmbeddingModel> {
    let (ids, dim, target) = read_matrix(source)?;
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(Error::ModelFormat(format!("duplicate item id {dup:?}")));
    }
    let vocab = Vocabulary::from_ids(ids);
    Ok(EmbeddingModel {
        vocab,
        dim,
        target,
        context: Vec::new(),
    })
}

/// Attaches a context sidecar to a loaded model.
pub fn read_context<R: Read>(model: &mut EmbeddingModel, source: R) -> Result<()> {
    let (ids, dim, context) = read_matrix(source)?;
    if dim != model.dim || ids != model.vocab.items() {
        return Err(Error::ModelFormat(
            "context sidecar does not match model".into(),
        ));
    }
    model.context = context;
    Ok(())
}
