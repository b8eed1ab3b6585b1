//! Dense vector helpers shared by composition, indexing, and scoring.

/// Dot product. Callers guarantee equal lengths; debug builds assert it.
#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f32;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Euclidean norm, accumulated in f64 for stability.
#[inline]
pub fn l2_norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

/// Scales `v` to unit length; zero vectors are left untouched.
pub fn normalize_in_place(v: &mut [f32]) {
    let norm = l2_norm(v);
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x = (f64::from(*x) / norm) as f32;
        }
    }
}

/// Returns a unit-length copy; zero vectors come back as zeros.
pub fn normalized(v: &[f32]) -> Vec<f32> {
    let mut out = v.to_vec();
    normalize_in_place(&mut out);
    out
}

/// Component-wise mean of equally sized rows, f64 accumulation.
/// Empty input yields the zero vector.
pub fn mean(rows: &[Vec<f32>], dim: usize) -> Vec<f32> {
    if rows.is_empty() {
        return vec![0.0; dim];
    }
    let mut acc = vec![0.0f64; dim];
    for row in rows {
        debug_assert_eq!(row.len(), dim);
        for (a, &x) in acc.iter_mut().zip(row.iter()) {
            *a += f64::from(x);
        }
    }
    let n = rows.len() as f64;
    acc.into_iter().map(|a| (a / n) as f32).collect()
}
