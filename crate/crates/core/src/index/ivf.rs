//! Inverted-file (IVF) structure for approximate inner-product search.
//!
//! Rows are partitioned by k-means on Euclidean distance; a query probes the
//! `nprobe` lists whose centroids have the highest inner product with it.
//! Training is seeded through splitmix64 and single-threaded in its update
//! step, so the same input and parameters always produce the same structure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hash::splitmix64;
use crate::vecmath::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IvfParams {
    /// Number of partitions; 0 = round(sqrt(rows)).
    pub nlist: usize,
    /// Partitions probed per query; 0 = ceil(nlist / 2).
    pub nprobe: usize,
    /// Each row is posted to its `spill` nearest partitions. Values above 1
    /// trade memory for recall, which matters on near-isotropic vectors
    /// where single-assignment IVF misses often.
    pub spill: usize,
    /// Fixed k-means iterations (no convergence check, for determinism).
    pub kmeans_iters: usize,
    pub seed: u64,
}

impl Default for IvfParams {
    fn default() -> Self {
        IvfParams {
            nlist: 0,
            nprobe: 0,
            spill: 2,
            kmeans_iters: 8,
            seed: 42,
        }
    }
}

impl IvfParams {
    pub fn resolve(&self, rows: usize) -> (usize, usize) {
        let nlist = if self.nlist == 0 {
            ((rows as f64).sqrt().round() as usize).clamp(1, rows.max(1))
        } else {
            self.nlist.clamp(1, rows.max(1))
        };
        let nprobe = if self.nprobe == 0 {
            nlist.div_ceil(2)
        } else {
            self.nprobe.min(nlist)
        };
        (nlist, nprobe)
    }
}

#[derive(Debug, Clone)]
pub struct IvfStructure {
    pub dim: usize,
    pub nprobe: usize,
    /// nlist x dim, row-major.
    pub centroids: Vec<f32>,
    /// Row indices per centroid, ascending within each list.
    pub lists: Vec<Vec<u32>>,
}

fn squared_distance(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

fn nearest_centroid(v: &[f32], centroids: &[f32], dim: usize) -> usize {
    let mut best = 0usize;
    let mut best_d = f32::INFINITY;
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = squared_distance(v, centroid);
        // strict < keeps the lowest index on ties
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Indices of the `n` nearest centroids, distance then index ascending.
fn nearest_centroids(v: &[f32], centroids: &[f32], dim: usize, n: usize) -> Vec<usize> {
    let mut ranked: Vec<(f32, usize)> = centroids
        .chunks_exact(dim)
        .enumerate()
        .map(|(c, centroid)| (squared_distance(v, centroid), c))
        .collect();
    ranked.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    ranked.truncate(n);
    ranked.into_iter().map(|(_, c)| c).collect()
}

impl IvfStructure {
    pub fn train(data: &[f32], dim: usize, params: &IvfParams) -> Self {
        let rows = data.len() / dim;
        let (nlist, nprobe) = params.resolve(rows);

        // seed centroids from distinct sampled rows
        let mut state = params.seed;
        let mut picked = std::collections::BTreeSet::new();
        while picked.len() < nlist {
            picked.insert((splitmix64(&mut state) % rows as u64) as usize);
        }
        let mut centroids = Vec::with_capacity(nlist * dim);
        for row in &picked {
            centroids.extend_from_slice(&data[row * dim..(row + 1) * dim]);
        }

        let mut assignment = vec![0usize; rows];
        for _ in 0..params.kmeans_iters {
            assignment = (0..rows)
                .into_par_iter()
                .map(|row| nearest_centroid(&data[row * dim..(row + 1) * dim], &centroids, dim))
                .collect();

            let mut sums = vec![0.0f64; nlist * dim];
            let mut counts = vec![0usize; nlist];
            for (row, &c) in assignment.iter().enumerate() {
                counts[c] += 1;
                let v = &data[row * dim..(row + 1) * dim];
                let s = &mut sums[c * dim..(c + 1) * dim];
                for i in 0..dim {
                    s[i] += f64::from(v[i]);
                }
            }
            for c in 0..nlist {
                if counts[c] == 0 {
                    continue; // empty cluster keeps its centroid
                }
                let n = counts[c] as f64;
                for i in 0..dim {
                    centroids[c * dim + i] = (sums[c * dim + i] / n) as f32;
                }
            }
        }

        // final assignment: each row posted to its `spill` nearest lists
        let spill = params.spill.clamp(1, nlist);
        let final_assignment: Vec<Vec<usize>> = (0..rows)
            .into_par_iter()
            .map(|row| nearest_centroids(&data[row * dim..(row + 1) * dim], &centroids, dim, spill))
            .collect();
        let mut lists = vec![Vec::new(); nlist];
        for (row, cents) in final_assignment.iter().enumerate() {
            for &c in cents {
                lists[c].push(row as u32);
            }
        }

        IvfStructure {
            dim,
            nprobe,
            centroids,
            lists,
        }
    }

    /// Rows in the `nprobe` lists closest to the query by inner product.
    /// Spilled rows appear once even when several of their lists are probed.
    pub fn probe_rows(&self, q: &[f32]) -> impl Iterator<Item = usize> {
        let mut ranked: Vec<(usize, f32)> = self
            .centroids
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(c, centroid)| (c, dot(q, centroid)))
            .collect();
        ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(self.nprobe);
        let mut rows: Vec<usize> = ranked
            .into_iter()
            .flat_map(|(c, _)| self.lists[c].iter().map(|&r| r as usize))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows.into_iter()
    }

    pub fn nlist(&self) -> usize {
        self.lists.len()
    }
}
