//! Deterministic synthetic-language fixtures.
//!
//! The generated world is a clustered vocabulary: words inside a cluster
//! are "synonyms", adjacent clusters on a ring are mildly related, and a
//! Zipf-weighted stopword pool supplies glue. One ground truth drives every
//! fixture — the gloss file defines words through cluster-mates, corpora
//! make cluster-mates co-occur, and the judgment/pair files score pairs by
//! cluster relation — so transfer from gloss pretraining to corpus
//! fine-tuning is measurable without any external dataset.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WORLD_SEED: u64 = 0x9e1d_5eed;

pub const GENERAL_CLUSTERS: usize = 150;
pub const DOMAIN_CLUSTERS: usize = 20;
pub const WORDS_PER_CLUSTER: usize = 30;
pub const STOPWORDS: usize = 50;

/// Clusters used by the "general pairs" fixture (and sprinkled into the
/// domain corpus so those words stay in its vocabulary).
pub const GENERAL_PAIR_CLUSTERS: std::ops::Range<usize> = 20..27;

// sentence mixture
const CLUSTER_RATE: f64 = 0.28;
const NEIGHBOR_RATE: f64 = 0.09;
const NOISE_RATE: f64 = 0.13;
// remainder: stopwords

pub struct World {
    pub general: Vec<Vec<String>>,
    pub domain: Vec<Vec<String>>,
    pub stopwords: Vec<String>,
}

fn make_word(rng: &mut ChaCha8Rng, used: &mut HashSet<String>, syllables: usize) -> String {
    const ONSETS: &[&str] = &[
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "gr",
        "kl", "pl", "st", "tr", "sk",
    ];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ou", "io"];
    const CODAS: &[&str] = &["", "n", "r", "s", "l", "m", "t", "x"];
    loop {
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
        }
        w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
        if w.len() >= 3 && used.insert(w.clone()) {
            return w;
        }
    }
}

/// Zipf-ish sampler over `n` items with weight `1/(i+1)^alpha`.
struct Ranked {
    cumulative: Vec<f64>,
}

impl Ranked {
    fn new(n: usize, alpha: f64) -> Ranked {
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            acc += 1.0 / ((i + 1) as f64).powf(alpha);
            cumulative.push(acc);
        }
        Ranked { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

impl World {
    pub fn build() -> World {
        let mut rng = ChaCha8Rng::seed_from_u64(WORLD_SEED);
        let mut used = HashSet::new();
        let cluster_set = |clusters: usize, rng: &mut ChaCha8Rng, used: &mut HashSet<String>| {
            (0..clusters)
                .map(|_| {
                    (0..WORDS_PER_CLUSTER)
                        .map(|_| {
                            let syl = 2 + (rng.random::<f64>() < 0.4) as usize;
                            make_word(rng, used, syl)
                        })
                        .collect()
                })
                .collect::<Vec<Vec<String>>>()
        };
        let general = cluster_set(GENERAL_CLUSTERS, &mut rng, &mut used);
        let domain = cluster_set(DOMAIN_CLUSTERS, &mut rng, &mut used);
        let stopwords = (0..STOPWORDS)
            .map(|_| make_word(&mut rng, &mut used, 1))
            .collect();
        World {
            general,
            domain,
            stopwords,
        }
    }

    fn pick_same<'a>(&self, words: &'a [String], avoid: usize, rng: &mut ChaCha8Rng) -> &'a str {
        loop {
            let j = rng.random_range(0..words.len());
            if j != avoid {
                return &words[j];
            }
        }
    }
}

fn ring_neighbor(c: usize, n: usize, rng: &mut ChaCha8Rng) -> usize {
    if rng.random::<bool>() {
        (c + 1) % n
    } else {
        (c + n - 1) % n
    }
}

/// `headword<TAB>gloss` entries: one definition per general or domain word,
/// built mostly from cluster-mates.
pub fn gloss_tsv(world: &World) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(WORLD_SEED ^ 0x61055);
    let stop_rank = Ranked::new(world.stopwords.len(), 1.0);
    let mut out = String::new();
    for clusters in [&world.general, &world.domain] {
        let n = clusters.len();
        for (c, words) in clusters.iter().enumerate() {
            for (i, w) in words.iter().enumerate() {
                let len = rng.random_range(12..=20);
                out.push_str(w);
                out.push('\t');
                for k in 0..len {
                    if k > 0 {
                        out.push(' ');
                    }
                    let r: f64 = rng.random();
                    if r < 0.72 {
                        out.push_str(world.pick_same(words, i, &mut rng));
                    } else if r < 0.82 {
                        let nc = ring_neighbor(c, n, &mut rng);
                        let j = rng.random_range(0..WORDS_PER_CLUSTER);
                        out.push_str(&clusters[nc][j]);
                    } else {
                        out.push_str(&world.stopwords[stop_rank.sample(&mut rng)]);
                    }
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Ring distance between clusters.
fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// 353 scored pairs over general words: same-cluster pairs score high,
/// adjacent-cluster pairs mid, distant pairs low. Scores are quantized to
/// one decimal so ties occur, and a header line exercises auto-detection.
pub fn wordsim_csv(world: &World) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(WORLD_SEED ^ 0x51d5);
    let mut out = String::from("word1,word2,score\n");
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let n = world.general.len();
    let emit = |out: &mut String,
                    seen: &mut HashSet<(String, String)>,
                    w1: &str,
                    w2: &str,
                    base: f64,
                    spread: f64,
                    rng: &mut ChaCha8Rng|
     -> bool {
        if w1 == w2 {
            return false;
        }
        let key = if w1 < w2 {
            (w1.to_string(), w2.to_string())
        } else {
            (w2.to_string(), w1.to_string())
        };
        if !seen.insert(key) {
            return false;
        }
        let score = ((base + spread * rng.random::<f64>()) * 10.0).round() / 10.0;
        out.push_str(&format!("{w1},{w2},{score}\n"));
        true
    };
    let mut count = 0;
    while count < 130 {
        let c = rng.random_range(0..n);
        let i = rng.random_range(0..WORDS_PER_CLUSTER);
        let j = rng.random_range(0..WORDS_PER_CLUSTER);
        if i != j
            && emit(
                &mut out,
                &mut seen,
                &world.general[c][i],
                &world.general[c][j],
                7.0,
                2.5,
                &mut rng,
            )
        {
            count += 1;
        }
    }
    count = 0;
    while count < 110 {
        let c = rng.random_range(0..n);
        let nc = ring_neighbor(c, n, &mut rng);
        let i = rng.random_range(0..WORDS_PER_CLUSTER);
        let j = rng.random_range(0..WORDS_PER_CLUSTER);
        if emit(
            &mut out,
            &mut seen,
            &world.general[c][i],
            &world.general[nc][j],
            3.5,
            2.5,
            &mut rng,
        ) {
            count += 1;
        }
    }
    count = 0;
    while count < 113 {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if ring_distance(a, b, n) < 3 {
            continue;
        }
        let i = rng.random_range(0..WORDS_PER_CLUSTER);
        let j = rng.random_range(0..WORDS_PER_CLUSTER);
        if emit(
            &mut out,
            &mut seen,
            &world.general[a][i],
            &world.general[b][j],
            0.2,
            2.2,
            &mut rng,
        ) {
            count += 1;
        }
    }
    out
}

/// 506 analogy queries built from paired clusters: word i of cluster 2k
/// maps to word i of cluster 2k+1, mirroring a : b :: c : d.
pub fn analogy_txt(world: &World) -> String {
    let mut out = String::from(": synthetic-counterparts\n");
    let mut count = 0;
    'outer: for offset in 1..WORDS_PER_CLUSTER {
        for k in 0..8 {
            let (ca, cb) = (&world.general[2 * k], &world.general[2 * k + 1]);
            for i in 0..WORDS_PER_CLUSTER {
                let j = (i + offset) % WORDS_PER_CLUSTER;
                out.push_str(&format!("{} {} {} {}\n", ca[i], cb[i], ca[j], cb[j]));
                count += 1;
                if count == 506 {
                    break 'outer;
                }
            }
        }
    }
    out
}

/// Seven same-cluster pairs of general words (one per pair cluster).
pub fn general_pairs_txt(world: &World) -> String {
    GENERAL_PAIR_CLUSTERS
        .map(|c| format!("{} {}\n", world.general[c][0], world.general[c][1]))
        .collect()
}

/// Seventeen same-cluster pairs of domain words.
pub fn domain_pairs_txt(world: &World) -> String {
    (0..17)
        .map(|c| format!("{} {}\n", world.domain[c][0], world.domain[c][1]))
        .collect()
}

enum ClusterPool<'a> {
    General(&'a World),
    Domain(&'a World),
}

fn push_sentence(
    pool: &ClusterPool<'_>,
    cluster: usize,
    stop_rank: &Ranked,
    rng: &mut ChaCha8Rng,
    out: &mut String,
) {
    let world = match pool {
        ClusterPool::General(w) | ClusterPool::Domain(w) => *w,
    };
    let clusters = match pool {
        ClusterPool::General(w) => &w.general,
        ClusterPool::Domain(w) => &w.domain,
    };
    let n = clusters.len();
    let len = rng.random_range(8..=20);
    for k in 0..len {
        if k > 0 {
            out.push(' ');
        }
        let r: f64 = rng.random();
        let word: &str = if r < CLUSTER_RATE {
            &clusters[cluster][rng.random_range(0..WORDS_PER_CLUSTER)]
        } else if r < CLUSTER_RATE + NEIGHBOR_RATE {
            let nc = ring_neighbor(cluster, n, rng);
            &clusters[nc][rng.random_range(0..WORDS_PER_CLUSTER)]
        } else if r < CLUSTER_RATE + NEIGHBOR_RATE + NOISE_RATE {
            let rc = rng.random_range(0..n);
            &clusters[rc][rng.random_range(0..WORDS_PER_CLUSTER)]
        } else {
            &world.stopwords[stop_rank.sample(rng)]
        };
        out.push_str(word);
    }
    out.push('\n');
}

/// General-topic corpus of roughly `target_bytes` bytes, one sentence per
/// line. Cluster frequency follows a mild Zipf so word counts vary.
pub fn general_corpus(world: &World, target_bytes: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stop_rank = Ranked::new(world.stopwords.len(), 1.0);
    let cluster_rank = Ranked::new(world.general.len(), 0.5);
    let mut out = String::with_capacity(target_bytes + 256);
    let pool = ClusterPool::General(world);
    while out.len() < target_bytes {
        let c = cluster_rank.sample(&mut rng);
        push_sentence(&pool, c, &stop_rank, &mut rng, &mut out);
    }
    out
}

/// Domain corpus: mostly domain-cluster sentences, with a slice of general
/// sentences drawn from the pair clusters so those words stay in
/// vocabulary.
pub fn domain_corpus(world: &World, target_bytes: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stop_rank = Ranked::new(world.stopwords.len(), 1.0);
    let domain_rank = Ranked::new(world.domain.len(), 0.5);
    let mut out = String::with_capacity(target_bytes + 256);
    let general_clusters: Vec<usize> = GENERAL_PAIR_CLUSTERS.collect();
    while out.len() < target_bytes {
        if rng.random::<f64>() < 0.92 {
            let c = domain_rank.sample(&mut rng);
            push_sentence(&ClusterPool::Domain(world), c, &stop_rank, &mut rng, &mut out);
        } else {
            let c = general_clusters[rng.random_range(0..general_clusters.len())];
            push_sentence(&ClusterPool::General(world), c, &stop_rank, &mut rng, &mut out);
        }
    }
    out
}

/// Small committed corpus over the first five general clusters.
pub fn tiny_corpus(world: &World) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(WORLD_SEED ^ 0x7143);
    let stop_rank = Ranked::new(world.stopwords.len(), 1.0);
    let mut out = String::new();
    let pool = ClusterPool::General(world);
    for _ in 0..300 {
        let c = rng.random_range(0..5);
        push_sentence(&pool, c, &stop_rank, &mut rng, &mut out);
    }
    out
}
