//! Uniform partitions of initial sets and parallel embedding rollouts.

use crate::embedding::{ControlInput, EmbeddingSystem};
use crate::error::{Error, Result};
use crate::integrate::{embedding_rollout, RolloutSettings, Trajectory};
use crate::interval::{Interval, IntervalTensor};

/// Axis-aligned uniform grid over a box. Cells are ordered row-major
/// (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionGrid {
    pub source: IntervalTensor,
    pub divisions: Vec<usize>,
    pub cells: Vec<IntervalTensor>,
}

pub fn grid_partition(bx: &IntervalTensor, divisions: &[usize]) -> Result<PartitionGrid> {
    if divisions.len() != bx.len() {
        return Err(Error::InvalidDivisions(format!(
            "{} division counts for a box of dimension {}",
            divisions.len(),
            bx.len()
        )));
    }
    if let Some(k) = divisions.iter().position(|&d| d == 0) {
        return Err(Error::InvalidDivisions(format!("axis {k} has zero divisions")));
    }
    let edges: Vec<Vec<f64>> = bx
        .data()
        .iter()
        .zip(divisions)
        .map(|(iv, &d)| {
            (0..=d)
                .map(|k| {
                    if k == d {
                        iv.upper
                    } else {
                        iv.lower + (iv.upper - iv.lower) * (k as f64 / d as f64)
                    }
                })
                .collect()
        })
        .collect();
    let total: usize = divisions.iter().product();
    let mut cells = Vec::with_capacity(total);
    let mut idx = vec![0usize; divisions.len()];
    for _ in 0..total {
        let data = idx
            .iter()
            .zip(&edges)
            .map(|(&k, e)| Interval::new_unchecked(e[k], e[k + 1]))
            .collect();
        cells.push(IntervalTensor::from_intervals(bx.shape().to_vec(), data)?);
        for a in (0..idx.len()).rev() {
            idx[a] += 1;
            if idx[a] < divisions[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(PartitionGrid { source: bx.clone(), divisions: divisions.to_vec(), cells })
}

/// Number of worker threads to use when none is requested.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Maps `f` over `items` on `workers` threads with static contiguous chunks.
/// The output order matches the input order regardless of the worker count.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (c, (slots, xs)) in out.chunks_mut(chunk).zip(items.chunks(chunk)).enumerate() {
            let f = &f;
            s.spawn(move || {
                for (k, (slot, x)) in slots.iter_mut().zip(xs).enumerate() {
                    *slot = Some(f(c * chunk + k, x));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("every slot is filled")).collect()
}

/// One embedding rollout per cell; failures are reported per cell.
pub fn run_partitions(
    emb: &EmbeddingSystem,
    grid: &PartitionGrid,
    w: &[Interval],
    control: &ControlInput,
    settings: &RolloutSettings,
    workers: usize,
) -> Vec<Result<Trajectory>> {
    parallel_map(&grid.cells, workers, |_, cell| {
        embedding_rollout(emb, cell, w, control, settings)
    })
}
