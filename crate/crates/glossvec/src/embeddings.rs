//! Embedding storage, similarity queries and text-format persistence.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::corpus::{Token, Vocabulary, WordId};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("vector file, line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn format_err(line: usize, reason: impl Into<String>) -> EmbeddingError {
    EmbeddingError::Format {
        line,
        reason: reason.into(),
    }
}

/// Dense row-major matrix with a fixed row width.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, dim: usize) -> Matrix {
        assert!(dim >= 1);
        Matrix {
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Matrix {
        let dim = rows.first().map_or(1, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            assert_eq!(row.len(), dim, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { dim, data }
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dot product with four-way split accumulation. The fixed summation order
/// keeps results reproducible run to run.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += a * x`
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// A vocabulary with one dense vector per word.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    vocab: Vocabulary,
    vectors: Matrix,
}

impl EmbeddingSet {
    pub fn new(vocab: Vocabulary, vectors: Matrix) -> EmbeddingSet {
        assert_eq!(vocab.len(), vectors.rows(), "one vector per word");
        EmbeddingSet { vocab, vectors }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, id: WordId) -> &[f64] {
        self.vectors.row(id as usize)
    }

    pub fn vector_for(&self, word: &str) -> Option<&[f64]> {
        self.vocab.id(word).map(|id| self.vector(id))
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }
}

/// Cosine similarity, clamped into `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    assert_eq!(u.len(), v.len(), "dimension mismatch");
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// The `k` highest-cosine words for `query`, skipping ids in `exclude`.
/// Descending similarity, ties broken by ascending word id. Words with a
/// zero vector are never candidates, and a zero query yields no neighbors.
pub fn nearest(
    set: &EmbeddingSet,
    query: &[f64],
    k: usize,
    exclude: &[WordId],
) -> Vec<(WordId, f64)> {
    assert_eq!(query.len(), set.dim(), "dimension mismatch");
    let qnorm = dot(query, query).sqrt();
    if qnorm == 0.0 {
        return Vec::new();
    }
    let mut scored: Vec<(WordId, f64)> = Vec::with_capacity(set.len());
    for id in 0..set.len() as WordId {
        if exclude.contains(&id) {
            continue;
        }
        let v = set.vector(id);
        let vnorm = dot(v, v).sqrt();
        if vnorm == 0.0 {
            continue;
        }
        let sim = (dot(query, v) / (qnorm * vnorm)).clamp(-1.0, 1.0);
        scored.push((id, sim));
    }
    scored.sort_unstable_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Writes the text interchange format: a `<vocab_size> <dim>` header, then
/// one `word v1 … vdim` line per word, in id order. Values print with full
/// round-trip precision, so save → load → save is byte-identical.
pub fn write_text<W: Write>(set: &EmbeddingSet, mut w: W) -> Result<(), EmbeddingError> {
    writeln!(w, "{} {}", set.len(), set.dim())?;
    let mut line = String::new();
    for id in 0..set.len() as WordId {
        line.clear();
        line.push_str(set.vocab().word(id).as_str());
        for v in set.vector(id) {
            line.push(' ');
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn save_text(set: &EmbeddingSet, path: &Path) -> Result<(), EmbeddingError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_text(set, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads the text format back. Rejects malformed headers, rows with the
/// wrong field count, non-finite entries and duplicate words.
pub fn read_text<R: BufRead>(r: R) -> Result<EmbeddingSet, EmbeddingError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(1, "missing header"))??;
    let mut parts = header.split_whitespace();
    let (vocab_size, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(d), None) => {
            let n: usize = n
                .parse()
                .map_err(|_| format_err(1, "malformed header"))?;
            let d: usize = d
                .parse()
                .map_err(|_| format_err(1, "malformed header"))?;
            (n, d)
        }
        _ => return Err(format_err(1, "expected `<vocab_size> <dim>` header")),
    };
    if vocab_size == 0 || dim == 0 {
        return Err(format_err(1, "empty vocabulary or zero dimension"));
    }

    let mut words: Vec<Token> = Vec::with_capacity(vocab_size);
    let mut data: Vec<f64> = Vec::with_capacity(vocab_size * dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if words.len() == vocab_size {
            return Err(format_err(
                line_no,
                format!("more than {vocab_size} rows"),
            ));
        }
        let mut fields = line.split_whitespace();
        let word = fields
            .next()
            .ok_or_else(|| format_err(line_no, "empty row"))?;
        let word = Token::normalize(word)
            .ok_or_else(|| format_err(line_no, "invalid word"))?;
        let mut values = 0;
        for field in fields {
            let v: f64 = field
                .parse()
                .map_err(|_| format_err(line_no, format!("non-numeric entry {field:?}")))?;
            if !v.is_finite() {
                return Err(format_err(line_no, "non-finite entry"));
            }
            data.push(v);
            values += 1;
        }
        if values != dim {
            return Err(format_err(
                line_no,
                format!("expected {dim} values, found {values}"),
            ));
        }
        words.push(word);
    }
    if words.len() != vocab_size {
        return Err(format_err(
            words.len() + 2,
            format!("expected {vocab_size} rows, found {}", words.len()),
        ));
    }
    let vocab = Vocabulary::from_words(words).map_err(|e| match e {
        crate::corpus::CorpusError::DuplicateWord { word } => {
            format_err(0, format!("duplicate word {word:?}"))
        }
        other => format_err(0, other.to_string()),
    })?;
    Ok(EmbeddingSet::new(vocab, Matrix { dim, data }))
}

pub fn load_text(path: &Path) -> Result<EmbeddingSet, EmbeddingError> {
    read_text(BufReader::new(File::open(path)?))
}
