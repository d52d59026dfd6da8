//! Evaluation protocols: WordSim-style rank correlation, analogy accuracy
//! via 3CosAdd, and pair-set similarity tracking across epochs.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::corpus::{Token, WordId};
use crate::embeddings::{cosine, nearest, EmbeddingSet};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("sequences have different lengths")]
    LengthMismatch,
    #[error("correlation undefined for constant or too-short input")]
    DegenerateInput,
    #[error("no evaluation item is covered by the vocabulary")]
    NoCoverage,
    #[error("{file} line {line}: {reason}")]
    Format {
        file: String,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn format_err(file: &str, line: usize, reason: impl Into<String>) -> EvalError {
    EvalError::Format {
        file: file.to_string(),
        line,
        reason: reason.into(),
    }
}

/// A human-scored word pair, e.g. one WordSim-353 row.
#[derive(Debug, Clone)]
pub struct WordPairJudgment {
    pub word1: Token,
    pub word2: Token,
    pub human_score: f64,
}

/// An analogy `a : b :: c : d` with `d` the held-out answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuery {
    pub a: Token,
    pub b: Token,
    pub c: Token,
    pub d: Token,
}

/// A named list of word pairs, all weighted equally.
#[derive(Debug, Clone)]
pub struct PairSet {
    pub name: String,
    pub pairs: Vec<(Token, Token)>,
}

/// Average ranks (1-based); tied values share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j are a tie group
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::DegenerateInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation with average-rank tie handling: the Pearson
/// correlation of the two rank vectors, which reduces to
/// `1 - 6 Σd²/(n(n²-1))` when there are no ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch);
    }
    if x.len() < 2 {
        return Err(EvalError::DegenerateInput);
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

#[derive(Debug, Clone, Copy)]
pub struct WordsimResult {
    pub rho: f64,
    pub covered: usize,
    pub skipped: usize,
}

/// Correlates model cosine similarities against the human judgments.
/// Pairs with an out-of-vocabulary word (or an untrained zero vector) are
/// skipped and counted.
pub fn eval_wordsim(
    set: &EmbeddingSet,
    judgments: &[WordPairJudgment],
) -> Result<WordsimResult, EvalError> {
    let mut human = Vec::with_capacity(judgments.len());
    let mut model = Vec::with_capacity(judgments.len());
    let mut skipped = 0;
    for j in judgments {
        let sim = match (
            set.vector_for(j.word1.as_str()),
            set.vector_for(j.word2.as_str()),
        ) {
            (Some(u), Some(v)) => cosine(u, v).ok(),
            _ => None,
        };
        match sim {
            Some(s) => {
                model.push(s);
                human.push(j.human_score);
            }
            None => skipped += 1,
        }
    }
    if model.len() < 2 {
        return Err(EvalError::NoCoverage);
    }
    Ok(WordsimResult {
        rho: spearman(&model, &human)?,
        covered: model.len(),
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalogyStatus {
    Correct,
    Incorrect,
    Oov,
}

#[derive(Debug, Clone)]
pub struct AnalogyRecord {
    pub query: AnalogyQuery,
    pub status: AnalogyStatus,
}

#[derive(Debug, Clone)]
pub struct AnalogyResult {
    pub accuracy: f64,
    pub correct: usize,
    pub incorrect: usize,
    pub oov: usize,
    pub records: Vec<AnalogyRecord>,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalogyOptions {
    /// Neighborhood size to search for the answer.
    pub k: usize,
    /// Drop the three query words from the candidate list.
    pub exclude_inputs: bool,
}

impl Default for AnalogyOptions {
    fn default() -> Self {
        AnalogyOptions {
            k: 10,
            exclude_inputs: true,
        }
    }
}

/// 3CosAdd analogy evaluation: for each fully in-vocabulary query, the
/// target point is `v(b) - v(a) + v(c)` and the query counts as correct
/// when `d` appears among the `k` nearest words. Queries with any
/// out-of-vocabulary word stay out of both the numerator and denominator.
pub fn eval_analogy(
    set: &EmbeddingSet,
    queries: &[AnalogyQuery],
    opts: AnalogyOptions,
) -> Result<AnalogyResult, EvalError> {
    let mut correct = 0;
    let mut incorrect = 0;
    let mut oov = 0;
    let mut records = Vec::with_capacity(queries.len());
    for q in queries {
        let ids = [
            set.vocab().id(q.a.as_str()),
            set.vocab().id(q.b.as_str()),
            set.vocab().id(q.c.as_str()),
            set.vocab().id(q.d.as_str()),
        ];
        let status = match ids {
            [Some(a), Some(b), Some(c), Some(d)] => {
                let dim = set.dim();
                let mut target = vec![0.0; dim];
                let va = set.vector(a);
                let vb = set.vector(b);
                let vc = set.vector(c);
                for i in 0..dim {
                    target[i] = vb[i] - va[i] + vc[i];
                }
                let exclude: &[WordId] = if opts.exclude_inputs { &[a, b, c] } else { &[] };
                let hit = nearest(set, &target, opts.k, exclude)
                    .iter()
                    .any(|&(id, _)| id == d);
                if hit {
                    correct += 1;
                    AnalogyStatus::Correct
                } else {
                    incorrect += 1;
                    AnalogyStatus::Incorrect
                }
            }
            _ => {
                oov += 1;
                AnalogyStatus::Oov
            }
        };
        records.push(AnalogyRecord {
            query: q.clone(),
            status,
        });
    }
    if correct + incorrect == 0 {
        return Err(EvalError::NoCoverage);
    }
    Ok(AnalogyResult {
        accuracy: correct as f64 / (correct + incorrect) as f64,
        correct,
        incorrect,
        oov,
        records,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PairsetStats {
    pub mean: f64,
    /// Population variance of the covered similarities.
    pub variance: f64,
    pub covered: usize,
    pub skipped: usize,
}

/// Cosine per covered pair, then uniform-weight mean and population
/// variance. Pairs with an out-of-vocabulary word are skipped and counted.
pub fn pairset_stats(set: &EmbeddingSet, pairs: &PairSet) -> Result<PairsetStats, EvalError> {
    let mut sims = Vec::with_capacity(pairs.pairs.len());
    let mut skipped = 0;
    for (w1, w2) in &pairs.pairs {
        let sim = match (set.vector_for(w1.as_str()), set.vector_for(w2.as_str())) {
            (Some(u), Some(v)) => cosine(u, v).ok(),
            _ => None,
        };
        match sim {
            Some(s) => sims.push(s),
            None => skipped += 1,
        }
    }
    if sims.is_empty() {
        return Err(EvalError::NoCoverage);
    }
    let n = sims.len() as f64;
    let mean = sims.iter().sum::<f64>() / n;
    let variance = sims.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    Ok(PairsetStats {
        mean,
        variance,
        covered: sims.len(),
        skipped,
    })
}

/// Per-epoch series of one named scalar metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTrace {
    name: String,
    points: Vec<(u32, f64)>,
}

impl MetricTrace {
    pub fn new(name: impl Into<String>) -> MetricTrace {
        MetricTrace {
            name: name.into(),
            points: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[(u32, f64)] {
        &self.points
    }

    pub fn last(&self) -> Option<(u32, f64)> {
        self.points.last().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, epoch: u32, value: f64) {
        if let Some(&(last, _)) = self.points.last() {
            assert!(epoch > last, "epochs must be strictly increasing");
        }
        self.points.push((epoch, value));
    }

    /// Writes the `epoch,value` CSV schema.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "epoch,value")?;
        for &(epoch, value) in &self.points {
            writeln!(w, "{epoch},{value}")?;
        }
        Ok(())
    }

    /// Reads the `epoch,value` CSV schema back.
    pub fn read_csv<R: BufRead>(name: impl Into<String>, r: R) -> Result<MetricTrace, EvalError> {
        let name = name.into();
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| format_err(&name, 1, "missing header"))??;
        if header.trim() != "epoch,value" {
            return Err(format_err(&name, 1, "expected `epoch,value` header"));
        }
        let mut trace = MetricTrace::new(name.clone());
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (epoch, value) = line
                .split_once(',')
                .ok_or_else(|| format_err(&name, i + 2, "expected `epoch,value` row"))?;
            let epoch: u32 = epoch
                .trim()
                .parse()
                .map_err(|_| format_err(&name, i + 2, "bad epoch"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| format_err(&name, i + 2, "bad value"))?;
            if let Some(&(last, _)) = trace.points.last() {
                if epoch <= last {
                    return Err(format_err(&name, i + 2, "epochs must increase"));
                }
            }
            trace.points.push((epoch, value));
        }
        Ok(trace)
    }
}

/// First epoch whose value strictly exceeds `target`; `None` when the trace
/// never gets there.
pub fn epochs_to_target(trace: &MetricTrace, target: f64) -> Option<u32> {
    trace
        .points
        .iter()
        .find(|&&(_, v)| v > target)
        .map(|&(e, _)| e)
}

/// Collects configured metrics at every epoch boundary. A metric that
/// errors at some epoch (say, no coverage yet) simply contributes no point
/// there; it never aborts training.
#[derive(Debug, Default)]
pub struct EpochTracker {
    wordsim: Option<(Vec<WordPairJudgment>, MetricTrace)>,
    analogy: Option<(Vec<AnalogyQuery>, AnalogyOptions, MetricTrace)>,
    pairset: Option<(PairSet, MetricTrace, MetricTrace)>,
}

impl EpochTracker {
    pub fn new() -> EpochTracker {
        EpochTracker::default()
    }

    pub fn with_wordsim(mut self, judgments: Vec<WordPairJudgment>) -> EpochTracker {
        self.wordsim = Some((judgments, MetricTrace::new("wordsim")));
        self
    }

    pub fn with_analogy(mut self, queries: Vec<AnalogyQuery>, opts: AnalogyOptions) -> EpochTracker {
        self.analogy = Some((queries, opts, MetricTrace::new("analogy")));
        self
    }

    pub fn with_pairset(mut self, pairs: PairSet) -> EpochTracker {
        self.pairset = Some((
            pairs,
            MetricTrace::new("pairset_mean"),
            MetricTrace::new("pairset_variance"),
        ));
        self
    }

    pub fn observe(&mut self, epoch: u32, set: &EmbeddingSet) {
        if let Some((judgments, trace)) = &mut self.wordsim {
            if let Ok(r) = eval_wordsim(set, judgments) {
                trace.push(epoch, r.rho);
            }
        }
        if let Some((queries, opts, trace)) = &mut self.analogy {
            if let Ok(r) = eval_analogy(set, queries, *opts) {
                trace.push(epoch, r.accuracy);
            }
        }
        if let Some((pairs, mean_trace, var_trace)) = &mut self.pairset {
            if let Ok(r) = pairset_stats(set, pairs) {
                mean_trace.push(epoch, r.mean);
                var_trace.push(epoch, r.variance);
            }
        }
    }

    pub fn traces(&self) -> Vec<&MetricTrace> {
        let mut out = Vec::new();
        if let Some((_, t)) = &self.wordsim {
            out.push(t);
        }
        if let Some((_, _, t)) = &self.analogy {
            out.push(t);
        }
        if let Some((_, m, v)) = &self.pairset {
            out.push(m);
            out.push(v);
        }
        out
    }
}

fn normalize_word(file: &str, line: usize, raw: &str) -> Result<Token, EvalError> {
    Token::normalize(raw).ok_or_else(|| format_err(file, line, format!("invalid word {raw:?}")))
}

/// Parses judgment lines: `word1<TAB or comma>word2<TAB or comma>score`.
/// A first line whose score field does not parse is treated as a header.
pub fn parse_wordsim<R: BufRead>(name: &str, r: R) -> Result<Vec<WordPairJudgment>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(['\t', ','])
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 3 {
            if i == 0 {
                continue; // header
            }
            return Err(format_err(name, i + 1, "expected `word1 word2 score`"));
        }
        let score: f64 = match fields[2].parse() {
            Ok(s) => s,
            Err(_) if i == 0 => continue, // header
            Err(_) => {
                return Err(format_err(
                    name,
                    i + 1,
                    format!("bad score {:?}", fields[2]),
                ))
            }
        };
        if !score.is_finite() {
            return Err(format_err(name, i + 1, "non-finite score"));
        }
        out.push(WordPairJudgment {
            word1: normalize_word(name, i + 1, fields[0])?,
            word2: normalize_word(name, i + 1, fields[1])?,
            human_score: score,
        });
    }
    Ok(out)
}

/// Parses analogy lines: four whitespace-separated tokens. Lines starting
/// with `:` are section headers and are skipped.
pub fn parse_analogies<R: BufRead>(name: &str, r: R) -> Result<Vec<AnalogyQuery>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(':') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(format_err(name, i + 1, "expected four tokens"));
        }
        out.push(AnalogyQuery {
            a: normalize_word(name, i + 1, fields[0])?,
            b: normalize_word(name, i + 1, fields[1])?,
            c: normalize_word(name, i + 1, fields[2])?,
            d: normalize_word(name, i + 1, fields[3])?,
        });
    }
    Ok(out)
}

/// Parses pair-set lines: two whitespace-separated words per line.
pub fn parse_pairs<R: BufRead>(name: &str, r: R) -> Result<PairSet, EvalError> {
    let mut pairs = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(format_err(name, i + 1, "expected two words"));
        }
        pairs.push((
            normalize_word(name, i + 1, fields[0])?,
            normalize_word(name, i + 1, fields[1])?,
        ));
    }
    if pairs.is_empty() {
        return Err(format_err(name, 1, "empty pair set"));
    }
    Ok(PairSet {
        name: name.to_string(),
        pairs,
    })
}
