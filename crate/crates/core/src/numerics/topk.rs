//! Deterministic top-k selection over real scores.

use crate::error::{DdError, Result};

/// All indices ordered by descending score; ties broken by the smaller index.
pub fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| a.cmp(&b))
    });
    idx
}

/// Indices of the `k` largest scores, sorted ascending by index.
///
/// Ties are broken toward the smaller index, so the result is a deterministic
/// function of the scores.
pub fn top_k(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(DdError::Range(format!(
            "top-k count {k} exceeds score vector length {}",
            scores.len()
        )));
    }
    let mut sel = rank_desc(scores);
    sel.truncate(k);
    sel.sort_unstable();
    Ok(sel)
}
