//! Shared test support: deterministic corpus generation and independent
//! brute-force oracles. Everything here is test-side code; none of it calls
//! into the search/scoring paths it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use docvec::augment::ReplayEntry;
use docvec::compose::FieldWeights;
use docvec::encode::{MockEncoder, Role, TextEncoder, TowerMode};
use docvec::types::{AugmentationRecord, DocRecord, QueryRecord, RelevanceJudgments};

/// splitmix64-backed RNG, self-contained for cross-platform determinism.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [lo, hi].
    pub fn usize_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// Uniform-ish in [-1, 1).
    pub fn f32_unit(&mut self) -> f32 {
        ((self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0) as f32
    }

    pub fn f64_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    pub fn vec_f32(&mut self, dim: usize) -> Vec<f32> {
        (0..dim).map(|_| self.f32_unit()).collect()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[(self.next_u64() % items.len() as u64) as usize]
    }
}

// ---------------------------------------------------------------------------
// The committed 100-doc / 50-query fixture
// ---------------------------------------------------------------------------

pub const FIXTURE_DIM: usize = 128;
pub const FIXTURE_CHUNK_SIZE: usize = 64;
pub const FIXTURE_KS: [usize; 2] = [3, 10];

pub fn fixture_combined_weights() -> FieldWeights {
    FieldWeights::new(1.0, 0.5, 0.1)
}

/// Grid rows in the ablation order: each field alone, then combined.
pub fn fixture_grid() -> Vec<(String, FieldWeights)> {
    vec![
        ("chunk-only".into(), FieldWeights::new(0.0, 0.0, 1.0)),
        ("query-only".into(), FieldWeights::new(1.0, 0.0, 0.0)),
        ("title-only".into(), FieldWeights::new(0.0, 1.0, 0.0)),
        ("combined".into(), fixture_combined_weights()),
    ]
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mock100")
}

pub struct MockCorpus {
    pub docs: Vec<DocRecord>,
    pub queries: Vec<QueryRecord>,
    pub judgments: RelevanceJudgments,
    /// Synthetic queries per doc, the ground truth behind the replay fixture.
    pub doc_queries: BTreeMap<String, Vec<String>>,
    /// Title words per doc (original or synthetic source text).
    pub doc_titles: BTreeMap<String, String>,
}

fn make_word(rng: &mut TestRng, seen: &mut HashSet<String>) -> String {
    const CONSONANTS: [&str; 14] = [
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
    ];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    loop {
        let mut w = String::new();
        for _ in 0..3 {
            w.push_str(CONSONANTS[(rng.next_u64() % 14) as usize]);
            w.push_str(VOWELS[(rng.next_u64() % 5) as usize]);
        }
        if seen.insert(w.clone()) {
            return w;
        }
    }
}

fn words(rng: &mut TestRng, seen: &mut HashSet<String>, n: usize) -> Vec<String> {
    (0..n).map(|_| make_word(rng, seen)).collect()
}

/// Deterministic corpus where each query group is resolvable through exactly
/// one field: body queries through chunks, title queries through the title
/// field, paraphrase queries through the synthetic-query field. The combined
/// weighting is the only configuration that can answer all three groups.
pub fn generate_mock100() -> MockCorpus {
    let mut rng = TestRng(0x00d0_c5ee_d001);
    let mut seen = HashSet::new();
    let fillers = words(&mut rng, &mut seen, 30);

    let mut docs = Vec::with_capacity(100);
    let mut doc_queries = BTreeMap::new();
    let mut doc_titles = BTreeMap::new();
    let mut body_pools = Vec::with_capacity(100);
    let mut title_pools = Vec::with_capacity(100);
    let mut query_pools = Vec::with_capacity(100);

    for d in 0..100usize {
        let doc_id = format!("D{d:03}");
        let body_words = words(&mut rng, &mut seen, 10);
        let title_words = words(&mut rng, &mut seen, 4);
        let query_words = words(&mut rng, &mut seen, 4);

        // topical redundancy: body words repeat, a few fillers mixed in
        let reps = if d % 3 == 0 { 10 } else { 5 };
        let mut body_tokens: Vec<String> = Vec::new();
        for w in &body_words {
            for _ in 0..reps {
                body_tokens.push(w.clone());
            }
        }
        for _ in 0..(reps * 6 / 5) {
            body_tokens.push(rng.pick(&fillers).clone());
        }
        rng.shuffle(&mut body_tokens);
        let text = body_tokens.join(" ");

        let title = title_words.join(" ");
        // first half: original titles; second half: titles come from the LLM
        let has_original_title = d < 50;

        let mut synth_queries = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut qwords = query_words.clone();
            rng.shuffle(&mut qwords);
            qwords.push(rng.pick(&fillers).clone());
            synth_queries.push(qwords.join(" "));
        }

        docs.push(DocRecord {
            doc_id: doc_id.clone(),
            title: has_original_title.then(|| title.clone()),
            text,
        });
        doc_titles.insert(doc_id.clone(), title);
        doc_queries.insert(doc_id.clone(), synth_queries);
        body_pools.push(body_words);
        title_pools.push(title_words);
        query_pools.push(query_words);
    }

    let mut queries = Vec::with_capacity(50);
    let mut judgments = RelevanceJudgments::new();
    for q in 0..50usize {
        let target = 2 * q; // evens: half with original titles, half synthetic
        let text = match q % 3 {
            0 => {
                let mut w = body_pools[target].clone();
                rng.shuffle(&mut w);
                w.truncate(8);
                w.join(" ")
            }
            1 => {
                let mut w = title_pools[target].clone();
                rng.shuffle(&mut w);
                w.join(" ")
            }
            _ => {
                let mut w = query_pools[target].clone();
                rng.shuffle(&mut w);
                w.join(" ")
            }
        };
        let query_id = format!("Q{q:03}");
        judgments.insert(query_id.clone(), format!("D{target:03}"), 1);
        queries.push(QueryRecord { query_id, text });
    }

    MockCorpus {
        docs,
        queries,
        judgments,
        doc_queries,
        doc_titles,
    }
}

/// Replay fixture entries matching [`generate_mock100`] under the default
/// augmentation config.
pub fn replay_entries_for(corpus: &MockCorpus) -> Vec<ReplayEntry> {
    use docvec::augment::{prompt_hash_hex, render_query_prompt, render_title_prompt, AugmentConfig};
    let cfg = AugmentConfig::default();
    let mut entries = Vec::new();
    for doc in &corpus.docs {
        let response = corpus.doc_queries[&doc.doc_id]
            .iter()
            .map(|q| format!("query: {q}"))
            .collect::<Vec<_>>()
            .join("\n");
        entries.push(ReplayEntry {
            prompt_hash: prompt_hash_hex(&render_query_prompt(doc, &cfg)),
            text: response,
        });
        if doc.title.is_none() {
            entries.push(ReplayEntry {
                prompt_hash: prompt_hash_hex(&render_title_prompt(doc, &cfg)),
                text: format!("title: {}", corpus.doc_titles[&doc.doc_id]),
            });
        }
    }
    entries
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

fn dot64(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

fn to64(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| f64::from(x)).collect()
}

fn mean64(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    if rows.is_empty() {
        return vec![0.0; dim];
    }
    let mut acc = vec![0.0; dim];
    for r in rows {
        for i in 0..dim {
            acc[i] += r[i];
        }
    }
    for a in &mut acc {
        *a /= rows.len() as f64;
    }
    acc
}

/// Field vectors computed by the oracle's own rules (f64 arithmetic, own
/// chunk splitting). The encoder is the shared boundary; everything after
/// it is reimplemented here.
pub struct OracleDoc {
    pub doc_id: String,
    pub chunks: Vec<Vec<f64>>,
    pub e_query: Vec<f64>,
    pub e_title: Vec<f64>,
    pub e_chunk: Vec<f64>,
}

pub fn oracle_build_docs(
    docs: &[DocRecord],
    augs: &BTreeMap<String, AugmentationRecord>,
    encoder: &MockEncoder,
    dim: usize,
    chunk_size: usize,
) -> Vec<OracleDoc> {
    docs.iter()
        .map(|doc| {
            let tokens: Vec<&str> = doc.text.split_whitespace().collect();
            let mut chunks = Vec::new();
            let mut i = 0;
            while i < tokens.len() {
                let end = (i + chunk_size).min(tokens.len());
                let chunk_text = tokens[i..end].join(" ");
                chunks.push(to64(&encoder.encode(&chunk_text, Role::Doc).unwrap()));
                i = end;
            }
            let e_chunk = mean64(&chunks, dim);
            if chunks.is_empty() {
                chunks.push(vec![0.0; dim]);
            }

            let aug = augs.get(&doc.doc_id);
            let qembs: Vec<Vec<f64>> = aug
                .map(|a| {
                    a.synthetic_queries
                        .iter()
                        .map(|q| to64(&encoder.encode(q, Role::Query).unwrap()))
                        .collect()
                })
                .unwrap_or_default();
            let e_query = mean64(&qembs, dim);

            let title = doc
                .title
                .as_deref()
                .or_else(|| aug.and_then(|a| a.synthetic_title.as_deref()));
            let e_title = match title {
                Some(t) if !t.trim().is_empty() => {
                    to64(&encoder.encode(t, Role::Doc).unwrap())
                }
                _ => vec![0.0; dim],
            };

            OracleDoc {
                doc_id: doc.doc_id.clone(),
                chunks,
                e_query,
                e_title,
                e_chunk,
            }
        })
        .collect()
}

/// Field-sum score, straight from the definition.
pub fn oracle_score(q: &[f64], doc: &OracleDoc, w: &FieldWeights) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for c in &doc.chunks {
        best = best.max(dot64(q, c));
    }
    if best == f64::NEG_INFINITY {
        best = 0.0;
    }
    best + f64::from(w.query) * dot64(q, &doc.e_query)
        + f64::from(w.title) * dot64(q, &doc.e_title)
        + f64::from(w.chunk) * dot64(q, &doc.e_chunk)
}

/// Ranks all docs for a query: score desc, doc id asc.
pub fn oracle_rank(q: &[f64], docs: &[OracleDoc], w: &FieldWeights) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = docs
        .iter()
        .map(|d| (d.doc_id.clone(), oracle_score(q, d, w)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

/// Oracle recall table: metric name -> mean value, for one weight setting.
pub fn oracle_recall(
    docs: &[OracleDoc],
    queries: &[QueryRecord],
    query_vectors: &BTreeMap<String, Vec<f64>>,
    judgments: &RelevanceJudgments,
    w: &FieldWeights,
    ks: &[usize],
) -> BTreeMap<String, f64> {
    let mut judged: Vec<&QueryRecord> = queries
        .iter()
        .filter(|q| !judgments.relevant_docs(&q.query_id).is_empty())
        .collect();
    judged.sort_by(|a, b| a.query_id.cmp(&b.query_id));

    let mut sums: BTreeMap<String, f64> = ks.iter().map(|k| (format!("recall@{k}"), 0.0)).collect();
    for query in &judged {
        let ranking = oracle_rank(&query_vectors[&query.query_id], docs, w);
        let relevant: BTreeSet<&str> = judgments.relevant_docs(&query.query_id);
        for &k in ks {
            let hits = ranking
                .iter()
                .take(k)
                .filter(|(d, _)| relevant.contains(d.as_str()))
                .count();
            *sums.get_mut(&format!("recall@{k}")).unwrap() +=
                hits as f64 / relevant.len() as f64;
        }
    }
    sums.into_iter()
        .map(|(k, v)| (k, v / judged.len() as f64))
        .collect()
}

// ---------------------------------------------------------------------------
// Golden file schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GoldenRow {
    pub label: String,
    pub weights: FieldWeights,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GoldenFile {
    pub dim: usize,
    pub chunk_size: usize,
    pub similarity: String,
    pub metric: String,
    pub ks: Vec<usize>,
    pub rows: Vec<GoldenRow>,
}

pub fn fixture_encoder() -> MockEncoder {
    MockEncoder::new(FIXTURE_DIM, TowerMode::Shared).unwrap()
}

/// Oracle query embeddings (f64) for the fixture queries.
pub fn oracle_query_vectors(
    queries: &[QueryRecord],
    encoder: &MockEncoder,
) -> BTreeMap<String, Vec<f64>> {
    queries
        .iter()
        .map(|q| {
            (
                q.query_id.clone(),
                to64(&encoder.encode(&q.text, Role::Query).unwrap()),
            )
        })
        .collect()
}
