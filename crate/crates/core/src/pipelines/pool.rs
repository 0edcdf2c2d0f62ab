//! Fixed-size worker pool with ordered results.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JobFailure {
    pub attempts: u32,
    pub message: String,
}

/// Progress line written as JSON to standard error by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProgressEvent {
    pub event: &'static str,
    pub job: String,
    pub done: usize,
    pub total: usize,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub type ProgressSink<'a> = &'a (dyn Fn(&ProgressEvent) + Sync);

fn attempt<T, R>(f: &(impl Fn(&T) -> Result<R> + Sync), item: &T) -> std::result::Result<R, String> {
    match catch_unwind(AssertUnwindSafe(|| f(item))) {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(panic) => Err(panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "worker panicked".into())),
    }
}

/// Runs `f` over `items` on `workers` threads. A failing job is retried
/// once. Results come back in input order whatever the completion order.
pub fn run_pool<T, R, F>(
    items: &[T],
    workers: usize,
    label: impl Fn(&T) -> String + Sync,
    f: F,
    progress: Option<ProgressSink<'_>>,
) -> Vec<std::result::Result<R, JobFailure>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let total = items.len();
    let workers = workers.clamp(1, total.max(1));
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<std::result::Result<R, JobFailure>>> = (0..total).map(|_| None).collect();
    let (tx, rx) = mpsc::channel();
    thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, f) = (&next, &f);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    break;
                }
                let result = attempt(f, &items[i]).or_else(|first| {
                    attempt(f, &items[i]).map_err(|second| JobFailure {
                        attempts: 2,
                        message: if first == second { second } else { format!("{first}; retry: {second}") },
                    })
                });
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (done, (i, result)) in rx.iter().enumerate() {
            if let Some(sink) = progress {
                sink(&ProgressEvent {
                    event: "job_done",
                    job: label(&items[i]),
                    done: done + 1,
                    total,
                    ok: result.is_ok(),
                    detail: result.as_ref().err().map(|e| e.message.clone()),
                });
            }
            slots[i] = Some(result);
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every job reports exactly once"))
        .collect()
}
