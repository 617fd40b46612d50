//! Deterministic fan-out of independent evaluations over a small worker
//! pool. Output order always matches input order, so results are identical
//! whether computed serially or concurrently.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Worker count: available parallelism, capped by the `TANGLESIM_THREADS`
/// environment variable when set to a positive integer.
pub fn worker_count() -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("TANGLESIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(cap) if cap >= 1 => hw.min(cap),
        _ => hw,
    }
}

/// Map `f` over `items` using up to `workers` scoped threads. Items are
/// handed out through a shared counter; each worker tags its results with
/// the item index so assembly is order-independent.
pub fn map_with_workers<T, U, F>(items: &[T], f: F, workers: usize) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 || items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let parts: Vec<Vec<(usize, U)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            break;
                        }
                        local.push((i, f(&items[i])));
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out: Vec<Option<U>> = (0..items.len()).map(|_| None).collect();
    for part in parts {
        for (i, v) in part {
            out[i] = Some(v);
        }
    }
    out.into_iter()
        .map(|v| v.expect("every index assigned exactly once"))
        .collect()
}

/// [`map_with_workers`] at the environment-selected worker count.
pub fn parallel_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = worker_count();
    map_with_workers(items, f, workers)
}
