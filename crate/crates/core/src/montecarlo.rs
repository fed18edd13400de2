//! Monte Carlo containment checks against interval trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::System;
use crate::error::{Error, Result};
use crate::integrate::{tsit5_rollout, Trajectory};
use crate::interval::{Interval, IntervalTensor};
use crate::partition::parallel_map;

/// Feedback law `u = π(t, x)` used by sampled rollouts.
pub type Policy<'a> = &'a (dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + Sync);

/// Uniform sample from a box.
pub fn sample_box(bx: &[Interval], rng: &mut impl Rng) -> Vec<f64> {
    bx.iter()
        .map(|i| if i.is_thin() { i.lower } else { rng.gen_range(i.lower..=i.upper) })
        .collect()
}

/// Options for sampled rollouts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    /// Tsit5 substeps per output step.
    pub substeps: usize,
    /// Absolute slack allowed when checking containment.
    pub tolerance: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { substeps: 4, tolerance: 1e-9 }
    }
}

/// Simulates `ẋ = f(t, x, π(t, x), w)` on the output grid `times`, with `w`
/// drawn uniformly from `w_box` and held constant over each output step.
/// Between output times the system is integrated by Tsit5 substeps.
pub fn sampled_rollout(
    sys: &System,
    policy: Option<Policy<'_>>,
    x0: &[f64],
    w_box: &[Interval],
    times: &[f64],
    substeps: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>> {
    let mut states = Vec::with_capacity(times.len());
    states.push(x0.to_vec());
    let substeps = substeps.max(1);
    for k in 0..times.len().saturating_sub(1) {
        let w = sample_box(w_box, rng);
        let (t0, t1) = (times[k], times[k + 1]);
        let field = |t: f64, x: &[f64]| {
            let u = match policy {
                Some(p) => p(t, x)?,
                None => Vec::new(),
            };
            sys.f(t, x, &u, &w)
        };
        let h = (t1 - t0) / substeps as f64;
        let tr = tsit5_rollout(field, &states[k], t0, t1, h)?;
        states.push(tr.last().to_vec());
    }
    Ok(states)
}

/// Outcome of a containment check.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: usize,
    /// Number of sampled trajectories that left the tube at least once.
    pub violating_samples: usize,
    /// Largest distance outside the tube over all samples, steps and coordinates.
    pub max_excess: f64,
    /// `(sample, step, coordinate)` of the first violation found.
    pub first_violation: Option<(usize, usize, usize)>,
    /// Rollouts that failed (e.g. diverged) and were not checked.
    pub failed_samples: usize,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.violating_samples == 0 && self.failed_samples == 0
    }

    pub fn merge(&mut self, other: &ContainmentReport) {
        let offset = self.samples;
        self.samples += other.samples;
        self.violating_samples += other.violating_samples;
        self.failed_samples += other.failed_samples;
        self.max_excess = self.max_excess.max(other.max_excess);
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation.map(|(s, k, i)| (s + offset, k, i));
        }
    }
}

/// Distance of `x` outside `bx` per coordinate (0 inside).
fn excess<'a>(x: &'a [f64], bx: &'a IntervalTensor) -> impl Iterator<Item = f64> + 'a {
    x.iter().zip(bx.data()).map(|(v, i)| (i.lower - v).max(v - i.upper).max(0.0))
}

/// Samples `n` initial states from `x0_box` and disturbances from `w_box`,
/// simulates them on the tube's time grid and checks that every state lies
/// in the tube. Sample `i` uses its own RNG stream, so results do not depend
/// on the worker count.
#[allow(clippy::too_many_arguments)]
pub fn check_containment(
    sys: &System,
    policy: Option<Policy<'_>>,
    x0_box: &IntervalTensor,
    w_box: &[Interval],
    tube: &Trajectory,
    n: usize,
    seed: u64,
    opts: SampleOptions,
    workers: usize,
) -> Result<ContainmentReport> {
    let boxes = tube.boxes()?;
    if x0_box.len() != sys.xlen() {
        return Err(Error::ShapeMismatch("initial box does not match the state".into()));
    }
    let ids: Vec<u64> = (0..n as u64).collect();
    let per_sample = parallel_map(&ids, workers, |_, &i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let x0 = sample_box(x0_box.data(), &mut rng);
        sampled_rollout(sys, policy, &x0, w_box, &tube.times, opts.substeps, &mut rng)
    });
    let mut rep = ContainmentReport { samples: n, ..Default::default() };
    for (s, r) in per_sample.iter().enumerate() {
        let Ok(states) = r else {
            rep.failed_samples += 1;
            continue;
        };
        let mut bad = false;
        for (k, (x, bx)) in states.iter().zip(&boxes).enumerate() {
            for (i, e) in excess(x, bx).enumerate() {
                rep.max_excess = rep.max_excess.max(e);
                if e > opts.tolerance {
                    bad = true;
                    rep.first_violation.get_or_insert((s, k, i));
                }
            }
        }
        if bad {
            rep.violating_samples += 1;
        }
    }
    Ok(rep)
}
