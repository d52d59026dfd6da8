//! Tokenization, gloss-corpus construction, vocabularies and context
//! windows.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Integer id of a vocabulary word.
pub type WordId = u32;

/// One input line, encoded as vocabulary ids.
pub type Sentence = Vec<WordId>;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no word meets the min_count cutoff of {min_count}")]
    EmptyVocabulary { min_count: u32 },
    #[error("gloss line {line}: expected `headword<TAB>gloss text`")]
    MalformedGlossLine { line: usize },
    #[error("duplicate word {word:?}")]
    DuplicateWord { word: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single lowercased word: non-empty and free of whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    /// Normalizes one whitespace-free piece of text: lowercases, then
    /// strips surrounding punctuation. Returns `None` when nothing is
    /// left. Lowercasing comes first so that re-normalizing a token is a
    /// no-op even when case folding introduces combining marks.
    pub fn normalize(raw: &str) -> Option<Token> {
        let lowered = raw.to_lowercase();
        let trimmed = lowered.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() || trimmed.contains(char::is_whitespace) {
            return None;
        }
        Some(Token(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Token {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Splits on whitespace, strips surrounding punctuation from each piece and
/// lowercases. Pieces left empty are dropped; order is preserved.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace().filter_map(Token::normalize).collect()
}

/// A headword together with its definition tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossEntry {
    pub headword: Token,
    pub gloss: Vec<Token>,
}

/// Parses one `headword<TAB>gloss text` line. Multi-word headwords are
/// joined with `_` so they stay a single vocabulary entry.
pub fn parse_gloss_line(line: &str, line_no: usize) -> Result<GlossEntry, CorpusError> {
    let (head, gloss) = line
        .split_once('\t')
        .ok_or(CorpusError::MalformedGlossLine { line: line_no })?;
    let head_tokens = tokenize(head);
    if head_tokens.is_empty() {
        return Err(CorpusError::MalformedGlossLine { line: line_no });
    }
    let joined = head_tokens
        .iter()
        .map(Token::as_str)
        .collect::<Vec<_>>()
        .join("_");
    let headword =
        Token::normalize(&joined).ok_or(CorpusError::MalformedGlossLine { line: line_no })?;
    Ok(GlossEntry {
        headword,
        gloss: tokenize(gloss),
    })
}

/// How a gloss entry becomes a corpus line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusMode {
    /// Headword once, followed by the whole gloss.
    Once,
    /// Headword re-inserted before every gloss token.
    Multiple,
}

/// Renders one corpus line for a gloss entry. An entry with an empty gloss
/// yields the bare headword in both modes.
pub fn gloss_line(entry: &GlossEntry, mode: CorpusMode) -> String {
    let head = entry.headword.as_str();
    if entry.gloss.is_empty() {
        return head.to_string();
    }
    let mut line = String::new();
    match mode {
        CorpusMode::Once => {
            line.push_str(head);
            for tok in &entry.gloss {
                line.push(' ');
                line.push_str(tok.as_str());
            }
        }
        CorpusMode::Multiple => {
            for (i, tok) in entry.gloss.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(head);
                line.push(' ');
                line.push_str(tok.as_str());
            }
        }
    }
    line
}

/// Renders one line per entry.
pub fn build_gloss_corpus(entries: &[GlossEntry], mode: CorpusMode) -> Vec<String> {
    entries.iter().map(|e| gloss_line(e, mode)).collect()
}

/// Word ↔ id mapping with occurrence counts. Ids are assigned by descending
/// count, ties broken lexicographically, so construction is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<Token>,
    counts: Vec<u64>,
    index: HashMap<Token, WordId>,
    total_count: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &Token {
        &self.words[id as usize]
    }

    pub fn count(&self, id: WordId) -> u64 {
        self.counts[id as usize]
    }

    /// Total retained-word occurrences in the scanned corpus.
    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.words.iter()
    }

    /// Builds a vocabulary from an explicit word list, with every count set
    /// to one. Used when loading vector files, which carry no frequencies.
    pub fn from_words<I>(words: I) -> Result<Vocabulary, CorpusError>
    where
        I: IntoIterator<Item = Token>,
    {
        let words: Vec<Token> = words.into_iter().collect();
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as WordId).is_some() {
                return Err(CorpusError::DuplicateWord {
                    word: w.as_str().to_string(),
                });
            }
        }
        let total = words.len() as u64;
        Ok(Vocabulary {
            counts: vec![1; words.len()],
            words,
            index,
            total_count: total,
        })
    }
}

/// Counts the token stream and retains words with count ≥ `min_count`.
pub fn build_vocabulary<I>(tokens: I, min_count: u32) -> Result<Vocabulary, CorpusError>
where
    I: IntoIterator<Item = Token>,
{
    let mut raw: HashMap<Token, u64> = HashMap::new();
    for tok in tokens {
        *raw.entry(tok).or_insert(0) += 1;
    }
    let mut kept: Vec<(Token, u64)> = raw
        .into_iter()
        .filter(|&(_, c)| c >= u64::from(min_count))
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_count });
    }
    kept.sort_unstable_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));

    let mut words = Vec::with_capacity(kept.len());
    let mut counts = Vec::with_capacity(kept.len());
    let mut index = HashMap::with_capacity(kept.len());
    let mut total = 0;
    for (id, (word, count)) in kept.into_iter().enumerate() {
        index.insert(word.clone(), id as WordId);
        words.push(word);
        counts.push(count);
        total += count;
    }
    Ok(Vocabulary {
        words,
        counts,
        index,
        total_count: total,
    })
}

/// Encodes a text line, dropping out-of-vocabulary words.
pub fn encode_line(line: &str, vocab: &Vocabulary) -> Sentence {
    line.split_whitespace()
        .filter_map(Token::normalize)
        .filter_map(|t| vocab.id(t.as_str()))
        .collect()
}

/// Frequent-word subsampling decision. `t == None` disables it (always
/// keep). Keeps with probability `min(1, (sqrt(f/t) + 1) · t/f)` where
/// `f = count/total`.
pub fn subsample_keep(count: u64, total: u64, t: Option<f64>, u: f64) -> bool {
    let Some(t) = t else { return true };
    let f = count as f64 / total as f64;
    let p = ((f / t).sqrt() + 1.0) * (t / f);
    u < p.min(1.0)
}

/// Clipped `[i-b, i+b]` range around position `i`.
pub(crate) fn window_bounds(i: usize, len: usize, b: usize) -> (usize, usize) {
    (i.saturating_sub(b), (i + b).min(len - 1))
}

/// Expands a sentence into (center, context) pairs. The effective window
/// width for each position is drawn uniformly from `1..=window`, so nearer
/// words end up in contexts more often than distant ones. Centers with an
/// empty context are skipped; a width is still drawn for them.
pub fn context_windows<R: Rng>(
    sentence: &[WordId],
    window: u32,
    rng: &mut R,
) -> Vec<(WordId, Vec<WordId>)> {
    let mut out = Vec::with_capacity(sentence.len());
    for i in 0..sentence.len() {
        let b = rng.random_range(1..=window) as usize;
        let (lo, hi) = window_bounds(i, sentence.len(), b);
        let mut ctx = Vec::with_capacity(hi - lo);
        for (j, &id) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
            if j != i {
                ctx.push(id);
            }
        }
        if !ctx.is_empty() {
            out.push((sentence[i], ctx));
        }
    }
    out
}
