//! Shared support for the integration and acceptance suites.

#![allow(dead_code)]

pub mod synth;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use glossvec::corpus::{
    build_gloss_corpus, build_vocabulary, encode_line, parse_gloss_line, tokenize, CorpusMode,
    GlossEntry, Sentence, Vocabulary,
};
use glossvec::embeddings::EmbeddingSet;
use glossvec::eval::EpochTracker;
use glossvec::trainer::{init_pretrained, init_random, train, Model, TrainingConfig};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn tmp_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_glossvec")
}

/// Runs the CLI binary with the given arguments.
pub fn run_cli(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("GLOSSVEC_OUT_DIR")
        .output()
        .expect("failed to spawn glossvec binary")
}

pub fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes `contents` to `path` once; concurrent/repeated calls reuse it.
pub fn materialize(path: &Path, produce: impl FnOnce() -> String) -> PathBuf {
    if !path.exists() {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, produce()).expect("write fixture");
        // rename is atomic for racing test binaries
        let _ = fs::rename(&tmp, path);
    }
    path.to_path_buf()
}

fn world() -> &'static synth::World {
    static WORLD: OnceLock<synth::World> = OnceLock::new();
    WORLD.get_or_init(synth::World::build)
}

/// The ~10 MB general corpus, generated deterministically on first use.
pub fn general_corpus_path() -> PathBuf {
    materialize(&tmp_dir().join("corpus_general.txt"), || {
        synth::general_corpus(world(), 10 * 1024 * 1024, synth::WORLD_SEED ^ 0xc0)
    })
}

/// The ~2 MB domain corpus.
pub fn domain_corpus_path() -> PathBuf {
    materialize(&tmp_dir().join("corpus_domain.txt"), || {
        synth::domain_corpus(world(), 2 * 1024 * 1024, synth::WORLD_SEED ^ 0xd0)
    })
}

/// A ~1 MB corpus for the determinism check.
pub fn small_corpus_path() -> PathBuf {
    materialize(&tmp_dir().join("corpus_1mb.txt"), || {
        synth::general_corpus(world(), 1024 * 1024, synth::WORLD_SEED ^ 0x1b)
    })
}

/// Gloss entries from the committed gloss fixture.
pub fn gloss_entries() -> Vec<GlossEntry> {
    let text = fs::read_to_string(fixture("gloss.tsv")).expect("read gloss fixture");
    text.lines()
        .enumerate()
        .map(|(i, line)| parse_gloss_line(line, i + 1).expect("gloss fixture line"))
        .collect()
}

/// Tokenizes lines, builds a vocabulary with `min_count`, and encodes the
/// corpus, dropping sentences that end up empty.
pub fn prepare(lines: &[String], min_count: u32) -> (Vocabulary, Vec<Sentence>) {
    let vocab = build_vocabulary(lines.iter().flat_map(|l| tokenize(l)), min_count)
        .expect("vocabulary");
    let sentences = lines
        .iter()
        .map(|l| encode_line(l, &vocab))
        .filter(|s| !s.is_empty())
        .collect();
    (vocab, sentences)
}

pub fn read_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .expect("read corpus")
        .lines()
        .map(str::to_string)
        .collect()
}

/// Trains word vectors on the committed gloss fixture in `Once` mode.
pub fn pretrain_gloss_vectors(config: &TrainingConfig) -> EmbeddingSet {
    let lines = build_gloss_corpus(&gloss_entries(), CorpusMode::Once);
    let (vocab, sentences) = prepare(&lines, config.min_count);
    let mut model = init_random(vocab, config);
    train(&mut model, &sentences, config, |_, _, _| {}).expect("pretraining");
    model.to_embeddings()
}

/// One full training run over prepared sentences, tracking metrics.
pub fn run_training(
    vocab: Vocabulary,
    sentences: &[Sentence],
    config: &TrainingConfig,
    pretrained: Option<&EmbeddingSet>,
    mut tracker: EpochTracker,
) -> (Model, Vec<f64>, EpochTracker) {
    let mut model = match pretrained {
        Some(set) => init_pretrained(vocab, set, config).expect("pretrained init").0,
        None => init_random(vocab, config),
    };
    let losses = train(&mut model, sentences, config, |epoch, m, _| {
        tracker.observe(epoch, &m.to_embeddings());
    })
    .expect("training");
    (model, losses, tracker)
}
