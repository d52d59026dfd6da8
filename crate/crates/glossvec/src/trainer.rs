//! CBOW and Skipgram training with negative sampling, and weight
//! initialization from previously trained vectors.
//!
//! Training has two modes. The single-threaded path is bit-for-bit
//! reproducible for a given seed. The optional hogwild path shards
//! sentences over worker threads that update shared matrices through
//! relaxed atomics without locks; its results are not reproducible and
//! callers should assert only trends and finiteness.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{subsample_keep, window_bounds, Sentence, Vocabulary, WordId};
use crate::embeddings::{axpy, dot, EmbeddingSet, Matrix};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("corpus is empty after vocabulary cutoff")]
    EmptyCorpus,
    #[error("negative sampling needs at least two vocabulary words")]
    VocabularyTooSmall,
    #[error("non-finite loss or weights at epoch {epoch}")]
    NonFiniteLoss { epoch: u32 },
    #[error("pretrained vectors have dim {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    Cbow,
    Skipgram,
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub architecture: Architecture,
    pub dim: usize,
    pub window: u32,
    pub epochs: u32,
    pub lr_start: f64,
    pub lr_end: f64,
    pub negatives: u32,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample_t: Option<f64>,
    pub seed: u64,
    pub min_count: u32,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            architecture: Architecture::Cbow,
            dim: 100,
            window: 8,
            epochs: 20,
            lr_start: 0.025,
            lr_end: 0.025 * 1e-4,
            negatives: 5,
            subsample_t: None,
            seed: 1,
            min_count: 5,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: &str| Err(TrainError::InvalidConfig(msg.to_string()));
        if self.dim < 1 {
            return fail("dim must be >= 1");
        }
        if self.window < 1 {
            return fail("window must be >= 1");
        }
        if self.epochs < 1 {
            return fail("epochs must be >= 1");
        }
        if self.negatives < 1 {
            return fail("negatives must be >= 1");
        }
        if self.min_count < 1 {
            return fail("min_count must be >= 1");
        }
        if !self.lr_start.is_finite() || self.lr_start <= 0.0 {
            return fail("lr_start must be positive");
        }
        if !self.lr_end.is_finite() || self.lr_end < 0.0 {
            return fail("lr_end must be non-negative");
        }
        if self.lr_end >= self.lr_start {
            return fail("lr_end must be below lr_start");
        }
        if let Some(t) = self.subsample_t {
            if !t.is_finite() || t <= 0.0 {
                return fail("subsample threshold must be positive");
            }
        }
        Ok(())
    }

    /// Learning rate after a fraction `p` of all tokens has been processed:
    /// linear decay from `lr_start` to `lr_end`.
    pub fn lr_at(&self, p: f64) -> f64 {
        self.lr_start + (self.lr_end - self.lr_start) * p
    }
}

/// Word vectors (input matrix) and context weights (output matrix) over a
/// shared vocabulary.
#[derive(Debug, Clone)]
pub struct Model {
    vocab: Vocabulary,
    input: Matrix,
    output: Matrix,
}

impl Model {
    pub fn from_parts(vocab: Vocabulary, input: Matrix, output: Matrix) -> Model {
        assert_eq!(vocab.len(), input.rows());
        assert_eq!(input.rows(), output.rows());
        assert_eq!(input.dim(), output.dim());
        Model {
            vocab,
            input,
            output,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn input_mut(&mut self) -> &mut Matrix {
        &mut self.input
    }

    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn output_mut(&mut self) -> &mut Matrix {
        &mut self.output
    }

    pub fn is_finite(&self) -> bool {
        self.input.is_finite() && self.output.is_finite()
    }

    /// Snapshot of the word vectors.
    pub fn to_embeddings(&self) -> EmbeddingSet {
        EmbeddingSet::new(self.vocab.clone(), self.input.clone())
    }

    /// One CBOW negative-sampling update with an explicit target list of
    /// `(word id, is-positive)` pairs. Returns the loss at the pre-update
    /// parameters; `lr == 0` leaves the model untouched, which makes this
    /// usable as a pure loss probe.
    pub fn cbow_update(&mut self, context: &[WordId], targets: &[(WordId, bool)], lr: f64) -> f64 {
        let mut h = vec![0.0; self.dim()];
        let mut e = vec![0.0; self.dim()];
        cbow_core(
            &mut self.input,
            &mut self.output,
            context,
            targets,
            lr,
            &mut h,
            &mut e,
        )
    }

    /// Skipgram counterpart of [`Model::cbow_update`]: the hidden vector is
    /// the center word's input vector.
    pub fn skipgram_update(
        &mut self,
        center: WordId,
        targets: &[(WordId, bool)],
        lr: f64,
    ) -> f64 {
        let mut e = vec![0.0; self.dim()];
        skipgram_core(&mut self.input, &mut self.output, center, targets, lr, &mut e)
    }
}

/// Clamped logistic; the clamp keeps `exp` well inside f64 range.
const MAX_LOGIT: f64 = 30.0;

/// Applies the negative-sampling objective for all targets against a fixed
/// hidden vector `h`. Accumulates the hidden-layer gradient step into `e`
/// (scaled by `lr`) and updates the targets' output rows in place.
fn ns_targets(
    output: &mut Matrix,
    h: &[f64],
    e: &mut [f64],
    targets: &[(WordId, bool)],
    lr: f64,
) -> f64 {
    e.fill(0.0);
    let mut loss = 0.0;
    for &(t, positive) in targets {
        let row = output.row_mut(t as usize);
        let z = dot(row, h).clamp(-MAX_LOGIT, MAX_LOGIT);
        let sigma = 1.0 / (1.0 + (-z).exp());
        loss += if positive {
            (-z).exp().ln_1p() // -log sigma(z)
        } else {
            z.exp().ln_1p() // -log sigma(-z)
        };
        let label = if positive { 1.0 } else { 0.0 };
        let g = (label - sigma) * lr;
        axpy(e, g, row);
        axpy(row, g, h);
    }
    loss
}

fn cbow_core(
    input: &mut Matrix,
    output: &mut Matrix,
    context: &[WordId],
    targets: &[(WordId, bool)],
    lr: f64,
    h: &mut [f64],
    e: &mut [f64],
) -> f64 {
    debug_assert!(!context.is_empty());
    h.fill(0.0);
    for &c in context {
        axpy(h, 1.0, input.row(c as usize));
    }
    let inv = 1.0 / context.len() as f64;
    for v in h.iter_mut() {
        *v *= inv;
    }
    let loss = ns_targets(output, h, e, targets, lr);
    // the hidden vector is the context mean, so the gradient is split
    // equally among the context words
    for &c in context {
        axpy(input.row_mut(c as usize), inv, e);
    }
    loss
}

fn skipgram_core(
    input: &mut Matrix,
    output: &mut Matrix,
    center: WordId,
    targets: &[(WordId, bool)],
    lr: f64,
    e: &mut [f64],
) -> f64 {
    let loss = {
        let h = input.row(center as usize);
        ns_targets(output, h, e, targets, lr)
    };
    axpy(input.row_mut(center as usize), 1.0, e);
    loss
}

/// Negative-sampling distribution: probability proportional to
/// `count^0.75` over the vocabulary.
#[derive(Debug, Clone)]
pub struct UnigramTable {
    cumulative: Vec<f64>,
    total: f64,
}

impl UnigramTable {
    pub fn new(vocab: &Vocabulary) -> UnigramTable {
        let mut cumulative = Vec::with_capacity(vocab.len());
        let mut acc = 0.0;
        for id in 0..vocab.len() {
            acc += (vocab.count(id as WordId) as f64).powf(0.75);
            cumulative.push(acc);
        }
        UnigramTable {
            cumulative,
            total: acc,
        }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, id: WordId) -> f64 {
        let i = id as usize;
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - prev) / self.total
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> WordId {
        let x = rng.random::<f64>() * self.total;
        let idx = self.cumulative.partition_point(|&c| c <= x);
        idx.min(self.cumulative.len() - 1) as WordId
    }
}

/// Draws one negative sample, rejecting `exclude`. Requires at least two
/// vocabulary words.
pub fn draw_negative<R: Rng>(table: &UnigramTable, exclude: WordId, rng: &mut R) -> WordId {
    debug_assert!(table.len() >= 2);
    loop {
        let id = table.sample(rng);
        if id != exclude {
            return id;
        }
    }
}

/// Random initialization: input vectors uniform on `[-0.5/dim, 0.5/dim)`,
/// output vectors zero. Deterministic for a given seed.
pub fn init_random(vocab: Vocabulary, config: &TrainingConfig) -> Model {
    assert!(!vocab.is_empty());
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input = Matrix::zeros(vocab.len(), dim);
    for v in input.data_mut() {
        *v = (rng.random::<f64>() - 0.5) / dim as f64;
    }
    let output = Matrix::zeros(vocab.len(), dim);
    Model {
        vocab,
        input,
        output,
    }
}

/// How much of a vocabulary was seeded from pretrained vectors.
#[derive(Debug, Clone, Copy)]
pub struct Coverage {
    pub covered: usize,
    pub total: usize,
}

impl Coverage {
    pub fn ratio(&self) -> f64 {
        self.covered as f64 / self.total as f64
    }
}

/// Initialization from previously trained vectors: words present in
/// `pretrained` get their input vector copied exactly, the rest fall back
/// to the random initialization. Output vectors start at zero either way.
pub fn init_pretrained(
    vocab: Vocabulary,
    pretrained: &EmbeddingSet,
    config: &TrainingConfig,
) -> Result<(Model, Coverage), TrainError> {
    if pretrained.dim() != config.dim {
        return Err(TrainError::DimensionMismatch {
            expected: config.dim,
            found: pretrained.dim(),
        });
    }
    let mut model = init_random(vocab, config);
    let total = model.vocab.len();
    let mut covered = 0;
    for id in 0..total as WordId {
        if let Some(v) = pretrained.vector_for(model.vocab.word(id).as_str()) {
            model.input.row_mut(id as usize).copy_from_slice(v);
            covered += 1;
        }
    }
    Ok((model, Coverage { covered, total }))
}

/// One CBOW step: the positive pair is (context mean, center); `negatives`
/// noise words are drawn from `table`, redrawn when they hit the center.
pub fn cbow_step<R: Rng>(
    model: &mut Model,
    context: &[WordId],
    center: WordId,
    lr: f64,
    negatives: u32,
    table: &UnigramTable,
    rng: &mut R,
) -> f64 {
    debug_assert!(lr > 0.0);
    let mut targets = Vec::with_capacity(negatives as usize + 1);
    targets.push((center, true));
    for _ in 0..negatives {
        targets.push((draw_negative(table, center, rng), false));
    }
    model.cbow_update(context, &targets, lr)
}

/// One Skipgram step for a single (center, context) pair: the hidden vector
/// is the center's input vector and the context word is the positive target.
pub fn skipgram_step<R: Rng>(
    model: &mut Model,
    center: WordId,
    context: WordId,
    lr: f64,
    negatives: u32,
    table: &UnigramTable,
    rng: &mut R,
) -> f64 {
    debug_assert!(lr > 0.0);
    let mut targets = Vec::with_capacity(negatives as usize + 1);
    targets.push((context, true));
    for _ in 0..negatives {
        targets.push((draw_negative(table, context, rng), false));
    }
    model.skipgram_update(center, &targets, lr)
}

fn train_stream_seed(seed: u64) -> u64 {
    // decorrelate the training draws from the init draws
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(0x6A09_E667_F3BC_C909)
}

/// Runs `epochs` full passes of single-threaded SGD over the corpus. The
/// learning rate is refreshed per sentence from the linear schedule. The
/// callback runs at every epoch boundary with the current model and that
/// epoch's mean per-target loss; the same losses come back as the result.
pub fn train<F>(
    model: &mut Model,
    corpus: &[Sentence],
    config: &TrainingConfig,
    mut on_epoch: F,
) -> Result<Vec<f64>, TrainError>
where
    F: FnMut(u32, &Model, f64),
{
    config.validate()?;
    if model.dim() != config.dim {
        return Err(TrainError::DimensionMismatch {
            expected: config.dim,
            found: model.dim(),
        });
    }
    let tokens_per_epoch: u64 = corpus.iter().map(|s| s.len() as u64).sum();
    if tokens_per_epoch == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    if model.vocab.len() < 2 {
        return Err(TrainError::VocabularyTooSmall);
    }
    let total_tokens = tokens_per_epoch * u64::from(config.epochs);
    let table = UnigramTable::new(&model.vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(train_stream_seed(config.seed));

    let dim = config.dim;
    let mut h = vec![0.0; dim];
    let mut e = vec![0.0; dim];
    let mut ctx: Vec<WordId> = Vec::with_capacity(2 * config.window as usize);
    let mut targets: Vec<(WordId, bool)> = Vec::with_capacity(config.negatives as usize + 1);
    let mut kept: Vec<WordId> = Vec::new();
    let mut processed: u64 = 0;
    let mut losses = Vec::with_capacity(config.epochs as usize);

    for epoch in 1..=config.epochs {
        let mut loss_sum = 0.0;
        let mut n_targets: u64 = 0;
        for sentence in corpus {
            let lr = config.lr_at(processed as f64 / total_tokens as f64);
            processed += sentence.len() as u64;

            let sent: &[WordId] = if config.subsample_t.is_some() {
                kept.clear();
                let total = model.vocab.total_count();
                for &w in sentence {
                    let c = model.vocab.count(w);
                    if subsample_keep(c, total, config.subsample_t, rng.random::<f64>()) {
                        kept.push(w);
                    }
                }
                &kept
            } else {
                sentence.as_slice()
            };
            if sent.len() < 2 {
                continue;
            }

            for i in 0..sent.len() {
                let b = rng.random_range(1..=config.window) as usize;
                let (lo, hi) = window_bounds(i, sent.len(), b);
                match config.architecture {
                    Architecture::Cbow => {
                        ctx.clear();
                        ctx.extend_from_slice(&sent[lo..i]);
                        ctx.extend_from_slice(&sent[i + 1..=hi]);
                        let center = sent[i];
                        targets.clear();
                        targets.push((center, true));
                        for _ in 0..config.negatives {
                            targets.push((draw_negative(&table, center, &mut rng), false));
                        }
                        loss_sum += cbow_core(
                            &mut model.input,
                            &mut model.output,
                            &ctx,
                            &targets,
                            lr,
                            &mut h,
                            &mut e,
                        );
                        n_targets += targets.len() as u64;
                    }
                    Architecture::Skipgram => {
                        for j in lo..=hi {
                            if j == i {
                                continue;
                            }
                            let positive = sent[j];
                            targets.clear();
                            targets.push((positive, true));
                            for _ in 0..config.negatives {
                                targets.push((draw_negative(&table, positive, &mut rng), false));
                            }
                            loss_sum += skipgram_core(
                                &mut model.input,
                                &mut model.output,
                                sent[i],
                                &targets,
                                lr,
                                &mut e,
                            );
                            n_targets += targets.len() as u64;
                        }
                    }
                }
            }
        }
        let mean_loss = if n_targets == 0 {
            0.0
        } else {
            loss_sum / n_targets as f64
        };
        if !mean_loss.is_finite() || !model.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        losses.push(mean_loss);
        on_epoch(epoch, model, mean_loss);
    }
    Ok(losses)
}

/// Row-addressed view over shared matrices holding f64 bit patterns.
/// Workers race on these cells by design; every access is a relaxed
/// load/store of a whole f64, so values stay well-formed even under
/// contention.
struct SharedMatrix<'a> {
    cells: &'a [AtomicU64],
    dim: usize,
}

impl SharedMatrix<'_> {
    fn read_row(&self, row: usize, buf: &mut [f64]) {
        let base = row * self.dim;
        for (j, v) in buf.iter_mut().enumerate() {
            *v = f64::from_bits(self.cells[base + j].load(Ordering::Relaxed));
        }
    }

    fn add_row(&self, row: usize, scale: f64, delta: &[f64]) {
        let base = row * self.dim;
        for (j, &d) in delta.iter().enumerate() {
            let cell = &self.cells[base + j];
            let cur = f64::from_bits(cell.load(Ordering::Relaxed));
            cell.store((cur + scale * d).to_bits(), Ordering::Relaxed);
        }
    }
}

struct HogwildShared<'a> {
    input: SharedMatrix<'a>,
    output: SharedMatrix<'a>,
    table: &'a UnigramTable,
    vocab: &'a Vocabulary,
    processed: &'a AtomicU64,
    total_tokens: u64,
}

/// [`ns_targets`] against the shared output matrix. `row` is scratch for
/// reading target rows.
fn shared_ns_targets(
    output: &SharedMatrix<'_>,
    h: &[f64],
    e: &mut [f64],
    row: &mut [f64],
    targets: &[(WordId, bool)],
    lr: f64,
) -> f64 {
    e.fill(0.0);
    let mut loss = 0.0;
    for &(t, positive) in targets {
        output.read_row(t as usize, row);
        let z = dot(row, h).clamp(-MAX_LOGIT, MAX_LOGIT);
        let sigma = 1.0 / (1.0 + (-z).exp());
        loss += if positive {
            (-z).exp().ln_1p()
        } else {
            z.exp().ln_1p()
        };
        let label = if positive { 1.0 } else { 0.0 };
        let g = (label - sigma) * lr;
        axpy(e, g, row);
        output.add_row(t as usize, g, h);
    }
    loss
}

fn hogwild_worker(
    shared: &HogwildShared<'_>,
    corpus: &[Sentence],
    config: &TrainingConfig,
    worker: usize,
    stride: usize,
    epoch: u32,
) -> (f64, u64) {
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(
        train_stream_seed(config.seed) ^ (worker as u64 + 1).wrapping_mul(0xA076_1D64_78BD_642F)
            ^ u64::from(epoch).wrapping_mul(0xE703_7ED1_A0B4_28DB),
    );
    let mut h = vec![0.0; dim];
    let mut e = vec![0.0; dim];
    let mut row = vec![0.0; dim];
    let mut ctx: Vec<WordId> = Vec::new();
    let mut targets: Vec<(WordId, bool)> = Vec::new();
    let mut kept: Vec<WordId> = Vec::new();
    let mut loss_sum = 0.0;
    let mut n_targets: u64 = 0;

    for sentence in corpus.iter().skip(worker).step_by(stride) {
        let before = shared
            .processed
            .fetch_add(sentence.len() as u64, Ordering::Relaxed);
        let lr = config.lr_at(before as f64 / shared.total_tokens as f64);

        let sent: &[WordId] = if config.subsample_t.is_some() {
            kept.clear();
            let total = shared.vocab.total_count();
            for &w in sentence {
                let c = shared.vocab.count(w);
                if subsample_keep(c, total, config.subsample_t, rng.random::<f64>()) {
                    kept.push(w);
                }
            }
            &kept
        } else {
            sentence.as_slice()
        };
        if sent.len() < 2 {
            continue;
        }

        for i in 0..sent.len() {
            let b = rng.random_range(1..=config.window) as usize;
            let (lo, hi) = window_bounds(i, sent.len(), b);
            match config.architecture {
                Architecture::Cbow => {
                    ctx.clear();
                    ctx.extend_from_slice(&sent[lo..i]);
                    ctx.extend_from_slice(&sent[i + 1..=hi]);
                    let center = sent[i];
                    targets.clear();
                    targets.push((center, true));
                    for _ in 0..config.negatives {
                        targets.push((draw_negative(shared.table, center, &mut rng), false));
                    }
                    h.fill(0.0);
                    for &c in &ctx {
                        shared.input.read_row(c as usize, &mut row);
                        axpy(&mut h, 1.0, &row);
                    }
                    let inv = 1.0 / ctx.len() as f64;
                    for v in h.iter_mut() {
                        *v *= inv;
                    }
                    loss_sum +=
                        shared_ns_targets(&shared.output, &h, &mut e, &mut row, &targets, lr);
                    n_targets += targets.len() as u64;
                    for &c in &ctx {
                        shared.input.add_row(c as usize, inv, &e);
                    }
                }
                Architecture::Skipgram => {
                    for j in lo..=hi {
                        if j == i {
                            continue;
                        }
                        let positive = sent[j];
                        targets.clear();
                        targets.push((positive, true));
                        for _ in 0..config.negatives {
                            targets.push((draw_negative(shared.table, positive, &mut rng), false));
                        }
                        shared.input.read_row(sent[i] as usize, &mut h);
                        loss_sum +=
                            shared_ns_targets(&shared.output, &h, &mut e, &mut row, &targets, lr);
                        n_targets += targets.len() as u64;
                        shared.input.add_row(sent[i] as usize, 1.0, &e);
                    }
                }
            }
        }
    }
    (loss_sum, n_targets)
}

/// Hogwild-style training: `threads` workers shard the sentences and write
/// to the shared matrices without locks. Non-deterministic; falls back to
/// [`train`] for `threads <= 1`. Epoch callbacks run after all workers have
/// joined, so they observe a quiesced model.
pub fn train_hogwild<F>(
    model: &mut Model,
    corpus: &[Sentence],
    config: &TrainingConfig,
    threads: usize,
    mut on_epoch: F,
) -> Result<Vec<f64>, TrainError>
where
    F: FnMut(u32, &Model, f64),
{
    if threads <= 1 {
        return train(model, corpus, config, on_epoch);
    }
    config.validate()?;
    if model.dim() != config.dim {
        return Err(TrainError::DimensionMismatch {
            expected: config.dim,
            found: model.dim(),
        });
    }
    let tokens_per_epoch: u64 = corpus.iter().map(|s| s.len() as u64).sum();
    if tokens_per_epoch == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    if model.vocab.len() < 2 {
        return Err(TrainError::VocabularyTooSmall);
    }
    let total_tokens = tokens_per_epoch * u64::from(config.epochs);
    let table = UnigramTable::new(&model.vocab);

    let input_cells: Vec<AtomicU64> = model
        .input
        .data()
        .iter()
        .map(|v| AtomicU64::new(v.to_bits()))
        .collect();
    let output_cells: Vec<AtomicU64> = model
        .output
        .data()
        .iter()
        .map(|v| AtomicU64::new(v.to_bits()))
        .collect();
    let processed = AtomicU64::new(0);
    let mut losses = Vec::with_capacity(config.epochs as usize);

    for epoch in 1..=config.epochs {
        let shared = HogwildShared {
            input: SharedMatrix {
                cells: &input_cells,
                dim: config.dim,
            },
            output: SharedMatrix {
                cells: &output_cells,
                dim: config.dim,
            },
            table: &table,
            vocab: &model.vocab,
            processed: &processed,
            total_tokens,
        };
        let (loss_sum, n_targets) = thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    let shared = &shared;
                    s.spawn(move || hogwild_worker(shared, corpus, config, w, threads, epoch))
                })
                .collect();
            handles
                .into_iter()
                .map(|handle| handle.join().expect("worker panicked"))
                .fold((0.0, 0u64), |(ls, nt), (l, n)| (ls + l, nt + n))
        });

        for (dst, cell) in model.input.data_mut().iter_mut().zip(&input_cells) {
            *dst = f64::from_bits(cell.load(Ordering::Relaxed));
        }
        for (dst, cell) in model.output.data_mut().iter_mut().zip(&output_cells) {
            *dst = f64::from_bits(cell.load(Ordering::Relaxed));
        }
        let mean_loss = if n_targets == 0 {
            0.0
        } else {
            loss_sum / n_targets as f64
        };
        if !mean_loss.is_finite() || !model.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        losses.push(mean_loss);
        on_epoch(epoch, model, mean_loss);
    }
    Ok(losses)
}
