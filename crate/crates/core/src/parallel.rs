//! Deterministic fork-join helpers. Work is split into contiguous index
//! ranges with a fixed assignment, so results are identical for any worker
//! count; HKGE_THREADS caps the parallelism.

/// Serializes tests that mutate the HKGE_THREADS variable; the test harness
/// runs tests of one binary concurrently in a single process.
#[cfg(test)]
pub(crate) static TEST_ENV_LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());

/// Worker count: HKGE_THREADS if set (minimum 1), otherwise the number of
/// available cores.
pub(crate) fn worker_count() -> usize {
    std::env::var("HKGE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Maps `f` over `0..n` with `workers` threads, preserving index order.
pub(crate) fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let workers = workers.min(n);
    let chunk = n.div_ceil(workers);
    let mut parts: Vec<Vec<T>> = Vec::with_capacity(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    let start = w * chunk;
                    let end = ((w + 1) * chunk).min(n);
                    (start..end).map(f).collect::<Vec<T>>()
                })
            })
            .collect();
        for h in handles {
            parts.push(h.join().expect("worker panicked"));
        }
    });
    parts.into_iter().flatten().collect()
}
