//! Deterministic parallel helpers. Results never depend on thread scheduling:
//! work is split into fixed chunks and reduced in index order.

const CHUNK: u64 = 4096;

/// Score improvements smaller than this do not displace an earlier index.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// Maximise `eval` over `0..count`; among near-equal scores the lowest index wins.
pub(crate) fn argmax<T, F>(count: u64, eval: F) -> Option<(f64, u64, T)>
where
    F: Fn(u64) -> (f64, T) + Sync + Send,
    T: Send,
{
    let chunks = count.div_ceil(CHUNK);
    let scan = |chunk: u64| {
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(count);
        let mut best: Option<(f64, u64, T)> = None;
        for idx in start..end {
            let (score, payload) = eval(idx);
            if best.as_ref().is_none_or(|(b, _, _)| score > b + TIE_TOL) {
                best = Some((score, idx, payload));
            }
        }
        best
    };
    let per_chunk: Vec<Option<(f64, u64, T)>> = map_indexed(chunks as usize, |c| scan(c as u64));
    let mut best: Option<(f64, u64, T)> = None;
    for cand in per_chunk.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _, _)| cand.0 > b + TIE_TOL) {
            best = Some(cand);
        }
    }
    best
}

/// `(0..count).map(f).collect()`, run concurrently when the `parallel` feature is on.
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}
