//! Deterministic parallel execution.
//!
//! Samples are split into fixed chunks of consecutive indices. Workers claim
//! chunks from a shared counter; every sample depends only on its index, and
//! results are concatenated in chunk order, so the output does not depend on
//! the worker count or on scheduling.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Result};
use lpp_core::experiments::{sample_range, Experiment};
use lpp_core::SampleTable;

use crate::manifest::chunk_ranges;

pub struct RunOptions {
    pub workers: usize,
    pub chunk_size: u64,
}

/// Samples `0..samples`. `done` holds chunks already available (from a
/// resumed run) by chunk number; `on_chunk` is called once for each freshly
/// computed chunk, from the worker that computed it.
pub fn execute(
    exp: &dyn Experiment,
    samples: u64,
    opts: &RunOptions,
    done: Vec<Option<SampleTable>>,
    on_chunk: &(dyn Fn(usize, Range<u64>, &SampleTable) -> Result<()> + Sync),
) -> Result<SampleTable> {
    let chunks = chunk_ranges(samples, opts.chunk_size);
    let mut slots = done;
    slots.resize_with(chunks.len(), || None);
    let slots = Mutex::new(slots);
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let failure: Mutex<Option<anyhow::Error>> = Mutex::new(None);

    let work = || {
        while !abort.load(Ordering::Relaxed) {
            let c = next.fetch_add(1, Ordering::Relaxed);
            if c >= chunks.len() {
                break;
            }
            if slots.lock().expect("slot lock")[c].is_some() {
                continue;
            }
            let (start, end) = chunks[c];
            let outcome = sample_range(exp, start..end)
                .map_err(|e| anyhow!("samples {start}..{end}: {e}"))
                .and_then(|table| {
                    on_chunk(c, start..end, &table)?;
                    Ok(table)
                });
            match outcome {
                Ok(table) => {
                    log::info!("chunk {}/{} done (samples {start}..{end})", c + 1, chunks.len());
                    slots.lock().expect("slot lock")[c] = Some(table);
                }
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    failure.lock().expect("failure lock").get_or_insert(e);
                }
            }
        }
    };

    let workers = opts.workers.clamp(1, chunks.len().max(1));
    std::thread::scope(|s| {
        for _ in 1..workers {
            s.spawn(work);
        }
        work();
    });

    if let Some(e) = failure.into_inner().expect("failure lock") {
        return Err(e);
    }
    let mut table = SampleTable::new(exp.columns());
    for part in slots.into_inner().expect("slot lock") {
        let part = part.expect("every chunk ran");
        table.extend(part).map_err(|e| anyhow!("{e}"))?;
    }
    Ok(table)
}
