//! Word embedding toolkit built around pretraining on dictionary-gloss
//! corpora.
//!
//! The pipeline: build a training corpus from `headword<TAB>gloss` entries
//! ([`corpus`]), train CBOW or Skipgram vectors with negative sampling
//! ([`trainer`]), optionally seeding the weights from a previously trained
//! vector file ([`trainer::init_pretrained`]), then evaluate with rank
//! correlation, analogy accuracy, or pair-set similarity tracking ([`eval`]).
//! Vector storage and the text interchange format live in [`embeddings`].
//!
//! ```
//! use glossvec::corpus::{build_vocabulary, encode_line, tokenize};
//! use glossvec::trainer::{init_random, train, TrainingConfig};
//!
//! let lines = ["the cat sat on the mat", "the dog sat on the rug"];
//! let vocab = build_vocabulary(lines.iter().flat_map(|l| tokenize(l)), 1)?;
//! let sentences: Vec<_> = lines.iter().map(|l| encode_line(l, &vocab)).collect();
//!
//! let config = TrainingConfig {
//!     dim: 8,
//!     window: 2,
//!     epochs: 3,
//!     min_count: 1,
//!     ..TrainingConfig::default()
//! };
//! let mut model = init_random(vocab, &config);
//! let losses = train(&mut model, &sentences, &config, |_, _, _| {})?;
//! assert_eq!(losses.len(), 3);
//!
//! let vectors = model.to_embeddings();
//! assert!(vectors.vector_for("cat").is_some());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod trainer;
