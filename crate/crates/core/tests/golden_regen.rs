//! Regenerates the committed mock100 fixture and its brute-force-pinned
//! golden metrics. Run explicitly:
//!
//! ```text
//! cargo test -p docvec --test golden_regen -- --ignored
//! ```
//!
//! The regenerated goldens are computed by the independent oracle in
//! `common` and cross-checked against the pipeline before being written;
//! regeneration fails if the two routes ever disagree.

mod common;

use std::collections::BTreeMap;
use std::fs;

use common::*;
use docvec::augment::{augment_corpus, AugmentConfig, ReplayClient};
use docvec::compose::Similarity;
use docvec::corpus::{load_beir_corpus, read_sidecar, write_sidecar};
use docvec::encode::EncoderPair;
use docvec::eval::{ablation_sweep, MetricKind, SweepInputs};
use std::sync::Arc;

#[test]
#[ignore = "regenerates committed fixture files"]
fn regenerate_mock100_fixture() {
    let dir = fixture_dir();
    fs::create_dir_all(&dir).unwrap();
    let corpus = generate_mock100();

    // corpus.jsonl / queries.jsonl / qrels.tsv
    let mut corpus_lines = String::new();
    for doc in &corpus.docs {
        let line = serde_json::json!({
            "_id": doc.doc_id,
            "title": doc.title.clone().unwrap_or_default(),
            "text": doc.text,
        });
        corpus_lines.push_str(&line.to_string());
        corpus_lines.push('\n');
    }
    fs::write(dir.join("corpus.jsonl"), corpus_lines).unwrap();

    let mut query_lines = String::new();
    for q in &corpus.queries {
        let line = serde_json::json!({"_id": q.query_id, "text": q.text});
        query_lines.push_str(&line.to_string());
        query_lines.push('\n');
    }
    fs::write(dir.join("queries.jsonl"), query_lines).unwrap();

    let mut qrels = String::from("query-id\tcorpus-id\tscore\n");
    for q in &corpus.queries {
        for doc_id in corpus.judgments.relevant_docs(&q.query_id) {
            qrels.push_str(&format!("{}\t{}\t1\n", q.query_id, doc_id));
        }
    }
    fs::write(dir.join("qrels.tsv"), qrels).unwrap();

    // replay.jsonl
    let mut replay_lines = String::new();
    for entry in replay_entries_for(&corpus) {
        replay_lines.push_str(&serde_json::to_string(&entry).unwrap());
        replay_lines.push('\n');
    }
    fs::write(dir.join("replay.jsonl"), replay_lines).unwrap();

    // sidecar.jsonl through the real loader + augmentor
    let loaded = load_beir_corpus(&dir).unwrap();
    let client = ReplayClient::from_fixture(&dir.join("replay.jsonl")).unwrap();
    let outcome = augment_corpus(loaded.docs, &client, &AugmentConfig::default()).unwrap();
    assert_eq!(outcome.failures, 0, "replay fixture incomplete: {:?}", outcome.warnings);
    write_sidecar(&dir.join("sidecar.jsonl"), &outcome.records).unwrap();

    // goldens: oracle route
    let (records, _) = read_sidecar(&dir.join("sidecar.jsonl")).unwrap();
    let augs: BTreeMap<String, docvec::types::AugmentationRecord> = records
        .into_iter()
        .map(|r| (r.doc_id.clone(), r))
        .collect();
    let encoder = fixture_encoder();
    let oracle_docs = oracle_build_docs(
        &corpus.docs,
        &augs,
        &encoder,
        FIXTURE_DIM,
        FIXTURE_CHUNK_SIZE,
    );
    let qv = oracle_query_vectors(&corpus.queries, &encoder);

    let mut rows = Vec::new();
    for (label, weights) in fixture_grid() {
        let values = oracle_recall(
            &oracle_docs,
            &corpus.queries,
            &qv,
            &corpus.judgments,
            &weights,
            &FIXTURE_KS,
        );
        rows.push(GoldenRow {
            label,
            weights,
            values,
        });
    }

    // pipeline route must agree exactly before we pin anything
    let encoders = EncoderPair::shared(Arc::new(fixture_encoder()));
    let inputs = SweepInputs {
        dataset: "mock100",
        docs: &corpus.docs,
        augmentations: &augs,
        queries: &corpus.queries,
        judgments: &corpus.judgments,
        encoders: &encoders,
        chunk_size: FIXTURE_CHUNK_SIZE,
        similarity: Similarity::Dot,
        normalize_fields: false,
        metric: MetricKind::Recall,
        ks: &FIXTURE_KS,
    };
    let grid: Vec<_> = fixture_grid().into_iter().map(|(_, w)| w).collect();
    let reports = ablation_sweep(&inputs, &grid).unwrap();
    for (row, report) in rows.iter().zip(reports.iter()) {
        assert_eq!(
            row.values, report.values,
            "oracle and pipeline disagree on `{}`",
            row.label
        );
    }

    // the combined row must strictly win at k=10
    let combined = rows.last().unwrap().values["recall@10"];
    for row in &rows[..3] {
        assert!(
            combined > row.values["recall@10"],
            "combined {combined} not strictly above {} ({})",
            row.values["recall@10"],
            row.label
        );
    }

    let golden = GoldenFile {
        dim: FIXTURE_DIM,
        chunk_size: FIXTURE_CHUNK_SIZE,
        similarity: "dot".into(),
        metric: "recall".into(),
        ks: FIXTURE_KS.to_vec(),
        rows,
    };
    let mut body = serde_json::to_string_pretty(&golden).unwrap();
    body.push('\n');
    fs::write(dir.join("golden_metrics.json"), body).unwrap();

    println!("fixture regenerated at {}", dir.display());
    for row in &golden.rows {
        println!("  {:<12} {:?}", row.label, row.values);
    }
}
