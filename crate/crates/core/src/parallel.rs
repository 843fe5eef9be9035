//! Minimal deterministic work splitting over scoped threads.
//!
//! Work is indexed by a chunk number; each chunk derives everything it needs
//! (in particular its random substream) from that index alone. Results are
//! returned in chunk order, so the output is identical for every worker
//! count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Run `f(0), f(1), …, f(n_chunks − 1)` on up to `threads` workers and return
/// the results in chunk order. `threads == 0` is treated as 1.
pub fn parallel_chunks<T, F>(n_chunks: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = threads.max(1).min(n_chunks.max(1));
    if workers <= 1 || n_chunks <= 1 {
        return (0..n_chunks).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n_chunks).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let c = next.fetch_add(1, Ordering::Relaxed);
                if c >= n_chunks {
                    break;
                }
                let value = f(c);
                slots.lock().unwrap()[c] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|s| s.expect("chunk completed"))
        .collect()
}
