//! Embedded invariant checks, runnable from the CLI.
//!
//! Each check has a default tolerance that can be overridden through an
//! environment variable (named in its result row), so a deliberately
//! perturbed tolerance makes the corresponding check fail.

use std::time::Instant;

use crate::compose::{
    compose_chunks, max_composed_dot, score_doc_eq2, DocFields, FieldFlags, FieldWeights,
    Similarity,
};
use crate::encode::{MockEncoder, TokenEncoder, TowerMode};
use crate::hash::{splitmix64, to_unit_interval};
use crate::index::{build_index, BuildParams};
use crate::late::{score_corpus_maxsim, PassageAgg, TokenBag};
use crate::train::{infonce, margin_ranking, ScoreRow};
use crate::compose::ComposedChunkVector;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub env_var: &'static str,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
}

fn env_f64(name: &str, default: f64) -> f64 {
    std::env::var(name)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

struct Rng(u64);

impl Rng {
    fn next_f64(&mut self) -> f64 {
        to_unit_interval(splitmix64(&mut self.0))
    }

    fn next_f32(&mut self) -> f32 {
        self.next_f64() as f32
    }

    fn next_usize(&mut self, lo: usize, hi: usize) -> usize {
        lo + (splitmix64(&mut self.0) % (hi - lo + 1) as u64) as usize
    }

    fn vec_f32(&mut self, dim: usize) -> Vec<f32> {
        (0..dim).map(|_| self.next_f32()).collect()
    }
}

/// Runs every embedded check; order is fixed.
pub fn run_selftest() -> Vec<CheckResult> {
    vec![
        check_compose_identity(),
        check_maxsim_oracle(),
        check_infonce_gradients(),
        check_margin_gradients(),
        check_infonce_shift_invariance(),
        check_ann_overlap(),
    ]
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

fn check_compose_identity() -> CheckResult {
    let started = Instant::now();
    let tol = env_f64("DOCVEC_TOL_COMPOSE", 1e-5);
    let mut rng = Rng(0xc0de);
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let dim = rng.next_usize(2, 64);
        let n_chunks = rng.next_usize(1, 8);
        let fields = DocFields {
            doc_id: "d".into(),
            query_field: rng.vec_f32(dim),
            title_field: rng.vec_f32(dim),
            chunk_field: rng.vec_f32(dim),
            chunk_vectors: (0..n_chunks).map(|_| rng.vec_f32(dim)).collect(),
            flags: FieldFlags::default(),
        };
        let w = FieldWeights::new(
            rng.next_f32().abs() * 2.0,
            rng.next_f32().abs() * 2.0,
            rng.next_f32().abs() * 2.0,
        );
        let q = rng.vec_f32(dim);
        let eq2 = score_doc_eq2(&q, &fields, &w, Similarity::Dot).expect("valid instance");
        let composed = compose_chunks(&fields, &w).expect("valid instance");
        let eq3 = max_composed_dot(&q, &composed);
        let err = f64::from((eq2 - eq3).abs()) / (1.0 + f64::from(eq2.abs()));
        worst = worst.max(err);
    }
    CheckResult {
        name: "compose-identity",
        env_var: "DOCVEC_TOL_COMPOSE",
        threshold: tol,
        passed: worst <= tol,
        detail: format!("worst relative error {worst:.2e} over 300 instances"),
        elapsed_ms: started.elapsed().as_millis(),
    }
}

fn check_maxsim_oracle() -> CheckResult {
    let started = Instant::now();
    let tol = env_f64("DOCVEC_TOL_MAXSIM", 0.0);
    let encoder = MockEncoder::new(16, TowerMode::Shared).expect("dim ok");
    let mut rng = Rng(0x5eed);

    let mut bags = Vec::new();
    for d in 0..50 {
        let n_passages = rng.next_usize(1, 3);
        for p in 0..n_passages {
            let words: Vec<String> = (0..rng.next_usize(3, 10))
                .map(|_| format!("w{}", rng.next_usize(0, 200)))
                .collect();
            let m = encoder.encode_tokens(&words.join(" ")).expect("tokens");
            bags.push(TokenBag::new(format!("doc{d:02}"), p, m).expect("bag"));
        }
    }

    let mut worst = 0.0f64;
    let mut rankings_match = true;
    for _ in 0..20 {
        let words: Vec<String> = (0..rng.next_usize(2, 6))
            .map(|_| format!("w{}", rng.next_usize(0, 200)))
            .collect();
        let q = encoder.encode_tokens(&words.join(" ")).expect("tokens");
        let fast = score_corpus_maxsim(&q, &bags, PassageAgg::Max).expect("scoring");

        // independent double loop
        let mut oracle: std::collections::BTreeMap<String, f32> = Default::default();
        for bag in &bags {
            let mut score = 0.0f32;
            for qi in q.iter_rows() {
                let mut best = f32::NEG_INFINITY;
                for tj in bag.matrix().iter_rows() {
                    let mut s = 0.0f32;
                    for k in 0..qi.len() {
                        s += qi[k] * tj[k];
                    }
                    best = best.max(s);
                }
                score += best;
            }
            oracle
                .entry(bag.doc_id.clone())
                .and_modify(|v| *v = v.max(score))
                .or_insert(score);
        }
        let mut oracle: Vec<(String, f32)> = oracle.into_iter().collect();
        oracle.sort_by(crate::index::doc_rank_cmp);

        for ((fd, fs), (od, os)) in fast.entries().iter().zip(oracle.iter()) {
            if fd != od {
                rankings_match = false;
            }
            worst = worst.max(f64::from((fs - os).abs()));
        }
    }
    CheckResult {
        name: "maxsim-oracle",
        env_var: "DOCVEC_TOL_MAXSIM",
        threshold: tol,
        passed: rankings_match && worst <= tol,
        detail: format!("rankings match: {rankings_match}, worst score gap {worst:.2e}"),
        elapsed_ms: started.elapsed().as_millis(),
    }
}

fn check_infonce_gradients() -> CheckResult {
    let started = Instant::now();
    let tol = env_f64("DOCVEC_TOL_GRAD", 1e-5);
    let mut rng = Rng(0x1234);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let k = rng.next_usize(1, 8);
        let row = ScoreRow::new(
            rng.next_f64() * 4.0,
            (0..k).map(|_| rng.next_f64() * 4.0).collect(),
        )
        .expect("finite row");
        let tau = 0.1 + rng.next_f64().abs() * 2.0;
        let analytic = infonce(&row, tau).expect("valid row");

        let loss_at = |pos: f64, negs: &[f64]| {
            infonce(&ScoreRow::new(pos, negs.to_vec()).unwrap(), tau)
                .unwrap()
                .loss
        };
        let fd_pos = (loss_at(row.positive + h, &row.negatives)
            - loss_at(row.positive - h, &row.negatives))
            / (2.0 * h);
        worst = worst.max(rel_err(analytic.grad_positive, fd_pos));
        for i in 0..k {
            let mut up = row.negatives.clone();
            up[i] += h;
            let mut down = row.negatives.clone();
            down[i] -= h;
            let fd = (loss_at(row.positive, &up) - loss_at(row.positive, &down)) / (2.0 * h);
            worst = worst.max(rel_err(analytic.grad_negatives[i], fd));
        }
    }
    CheckResult {
        name: "infonce-grad",
        env_var: "DOCVEC_TOL_GRAD",
        threshold: tol,
        passed: worst <= tol,
        detail: format!("worst relative gradient error {worst:.2e} over 200 rows"),
        elapsed_ms: started.elapsed().as_millis(),
    }
}

fn check_margin_gradients() -> CheckResult {
    let started = Instant::now();
    let tol = env_f64("DOCVEC_TOL_GRAD", 1e-5);
    let mut rng = Rng(0x4321);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 200 {
        let o1 = rng.next_f64() * 2.0;
        let o2 = rng.next_f64() * 2.0;
        let y = if rng.next_f64() > 0.0 { 1 } else { -1 };
        let margin = rng.next_f64().abs();
        // skip points near the kink so the difference quotient is one-sided
        if (-f64::from(y) * (o1 - o2) + margin).abs() < 1e-3 {
            continue;
        }
        checked += 1;
        let analytic = margin_ranking(o1, o2, y, margin).expect("valid args");
        let loss = |a: f64, b: f64| margin_ranking(a, b, y, margin).unwrap().loss;
        let fd1 = (loss(o1 + h, o2) - loss(o1 - h, o2)) / (2.0 * h);
        let fd2 = (loss(o1, o2 + h) - loss(o1, o2 - h)) / (2.0 * h);
        worst = worst.max(rel_err(analytic.grad_o1, fd1));
        worst = worst.max(rel_err(analytic.grad_o2, fd2));
    }
    CheckResult {
        name: "margin-grad",
        env_var: "DOCVEC_TOL_GRAD",
        threshold: tol,
        passed: worst <= tol,
        detail: format!("worst relative subgradient error {worst:.2e} over 200 rows"),
        elapsed_ms: started.elapsed().as_millis(),
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn check_infonce_shift_invariance() -> CheckResult {
    let started = Instant::now();
    let tol = env_f64("DOCVEC_TOL_SHIFT", 1e-9);
    let mut rng = Rng(0x777);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.next_usize(1, 6);
        let pos = rng.next_f64() * 3.0;
        let negs: Vec<f64> = (0..k).map(|_| rng.next_f64() * 3.0).collect();
        let shift = rng.next_f64() * 10.0;
        let tau = 0.2 + rng.next_f64().abs();
        let a = infonce(&ScoreRow::new(pos, negs.clone()).unwrap(), tau).unwrap();
        let shifted: Vec<f64> = negs.iter().map(|s| s + shift).collect();
        let b = infonce(&ScoreRow::new(pos + shift, shifted).unwrap(), tau).unwrap();
        worst = worst.max((a.loss - b.loss).abs());
    }
    CheckResult {
        name: "infonce-shift",
        env_var: "DOCVEC_TOL_SHIFT",
        threshold: tol,
        passed: worst <= tol,
        detail: format!("worst shift deviation {worst:.2e} over 100 rows"),
        elapsed_ms: started.elapsed().as_millis(),
    }
}

fn check_ann_overlap() -> CheckResult {
    let started = Instant::now();
    let min_overlap = env_f64("DOCVEC_MIN_ANN_OVERLAP", 0.95);
    let mut rng = Rng(0xacc);
    let dim = 32;
    let vectors: Vec<ComposedChunkVector> = (0..3000)
        .map(|i| ComposedChunkVector {
            doc_id: format!("d{i:04}"),
            chunk_index: 0,
            vector: rng.vec_f32(dim),
        })
        .collect();
    let index = build_index(&vectors, BuildParams::approximate(), serde_json::json!({}))
        .expect("build");
    let queries: Vec<Vec<f32>> = (0..50).map(|_| rng.vec_f32(dim)).collect();
    let overlap = index.overlap_vs_flat(&queries, 10).expect("overlap");
    CheckResult {
        name: "ann-overlap",
        env_var: "DOCVEC_MIN_ANN_OVERLAP",
        threshold: min_overlap,
        passed: overlap >= min_overlap,
        detail: format!("overlap@10 = {overlap:.4} on 3000 vectors, 50 queries"),
        elapsed_ms: started.elapsed().as_millis(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes_all_checks() {
        let results = run_selftest();
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert_eq!(results.len(), 6);
    }
}
