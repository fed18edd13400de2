//! Fixed-step explicit integrators and trajectory rollout.

use serde::{Deserialize, Serialize};

use crate::embedding::{ControlInput, EmbeddingSystem};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalTensor};
use crate::real::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Euler,
    Tsit5,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::Tsit5 => "tsit5",
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Integrator::Euler),
            "tsit5" => Ok(Integrator::Tsit5),
            other => Err(Error::Config(format!("unknown integrator `{other}`"))),
        }
    }
}

/// Sampled solution of an ODE.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T = f64> {
    pub times: Vec<f64>,
    pub states: Vec<Vec<T>>,
    pub integrator: Integrator,
    pub dt: f64,
    /// Largest embedded error estimate over all steps (Tsit5 only).
    pub max_error_estimate: Option<f64>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[T] {
        self.states.last().expect("trajectories hold the initial state")
    }

    /// Interprets each `2n` state as `(x̲, x̄)`.
    pub fn boxes(&self) -> Result<Vec<IntervalTensor<T>>> {
        self.states.iter().map(|s| IntervalTensor::ut2i(s)).collect()
    }

    pub fn to_f64(&self) -> Trajectory<f64> {
        Trajectory {
            times: self.times.clone(),
            states: self
                .states
                .iter()
                .map(|s| s.iter().map(|v| v.value()).collect())
                .collect(),
            integrator: self.integrator,
            dt: self.dt,
            max_error_estimate: self.max_error_estimate,
        }
    }
}

/// Step grid `t0, t0 + dt, …, T`; the last step is shortened to land on `T`.
pub fn time_grid(t0: f64, t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidStep(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidStep(format!("need t0 < T, got t0 = {t0}, T = {t_end}")));
    }
    let r = (t_end - t0) / dt;
    let steps = if (r - r.round()).abs() <= 1e-9 * r.max(1.0) { r.round() } else { r.ceil() };
    let steps = steps.max(1.0) as usize;
    let mut times: Vec<f64> = (0..steps).map(|k| t0 + k as f64 * dt).collect();
    times.push(t_end);
    Ok(times)
}

fn axpy<T: Real>(x: &[T], h: f64, k: &[T]) -> Vec<T> {
    let h = T::from_f64(h);
    x.iter().zip(k).map(|(&a, &b)| a + h * b).collect()
}

fn check_finite<T: Real>(x: &[T], step: usize, t: f64) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { step, t })
    }
}

fn check_len<T>(k: &[T], n: usize) -> Result<()> {
    if k.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "vector field returned {} entries for a state of length {n}",
            k.len()
        )));
    }
    Ok(())
}

/// Forward Euler: `x_{k+1} = x_k + h_k field(t_k, x_k)`.
pub fn euler_rollout<T: Real>(
    mut field: impl FnMut(f64, &[T]) -> Result<Vec<T>>,
    x0: &[T],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory<T>> {
    let times = time_grid(t0, t_end, dt)?;
    check_finite(x0, 0, t0)?;
    let mut states = Vec::with_capacity(times.len());
    states.push(x0.to_vec());
    for k in 0..times.len() - 1 {
        let (t, h) = (times[k], times[k + 1] - times[k]);
        let x = &states[k];
        let f = field(t, x)?;
        check_len(&f, x.len())?;
        let next = axpy(x, h, &f);
        check_finite(&next, k + 1, times[k + 1])?;
        states.push(next);
    }
    Ok(Trajectory { times, states, integrator: Integrator::Euler, dt, max_error_estimate: None })
}

const C: [f64; 6] = [0.161, 0.327, 0.9, 0.9800255409045097, 1.0, 1.0];
const A: [&[f64]; 6] = [
    &[0.161],
    &[-0.008480655492356989, 0.335480655492357],
    &[2.897153057105493, -6.359448489975075, 4.3622954328695815],
    &[5.325864828439257, -11.748883564062828, 7.4955393428898365, -0.09249506636175525],
    &[
        5.86145544294642,
        -12.92096931784711,
        8.159367898576159,
        -0.071584973281401,
        -0.028269050394068383,
    ],
    &[
        0.09646076681806523,
        0.01,
        0.4798896504144996,
        1.379008574103742,
        -3.290069515436081,
        2.324710524099774,
    ],
];
const BTILDE: [f64; 7] = [
    -0.001780011052225777,
    -0.0008164344596567469,
    0.007880878010261995,
    -0.1447110071732629,
    0.5823571654525552,
    -0.45808210592918697,
    1.0 / 66.0,
];

/// Fixed-step Tsitouras 5(4). The embedded error estimate is recorded but
/// does not control the step.
pub fn tsit5_rollout<T: Real>(
    mut field: impl FnMut(f64, &[T]) -> Result<Vec<T>>,
    x0: &[T],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory<T>> {
    let times = time_grid(t0, t_end, dt)?;
    check_finite(x0, 0, t0)?;
    let n = x0.len();
    let mut states = Vec::with_capacity(times.len());
    states.push(x0.to_vec());
    let mut max_err: f64 = 0.0;
    for step in 0..times.len() - 1 {
        let (t, h) = (times[step], times[step + 1] - times[step]);
        let x = states[step].clone();
        let mut ks: Vec<Vec<T>> = Vec::with_capacity(7);
        let k1 = field(t, &x)?;
        check_len(&k1, n)?;
        ks.push(k1);
        for (s, row) in A.iter().enumerate() {
            let mut xs = x.clone();
            for (j, &a) in row.iter().enumerate() {
                let ha = T::from_f64(h * a);
                for (xi, kj) in xs.iter_mut().zip(&ks[j]) {
                    *xi += ha * *kj;
                }
            }
            if s == A.len() - 1 {
                // The last row holds the 5th-order weights.
                check_finite(&xs, step + 1, times[step + 1])?;
                let k7 = field(t + h, &xs)?;
                check_len(&k7, n)?;
                ks.push(k7);
                let err = (0..n)
                    .map(|i| {
                        (0..7).map(|j| BTILDE[j] * ks[j][i].value()).sum::<f64>().abs() * h
                    })
                    .fold(0.0, f64::max);
                max_err = max_err.max(err);
                states.push(xs);
            } else {
                let k = field(t + C[s] * h, &xs)?;
                check_len(&k, n)?;
                ks.push(k);
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        integrator: Integrator::Tsit5,
        dt,
        max_error_estimate: Some(max_err),
    })
}

pub fn rollout<T: Real>(
    integrator: Integrator,
    field: impl FnMut(f64, &[T]) -> Result<Vec<T>>,
    x0: &[T],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory<T>> {
    match integrator {
        Integrator::Euler => euler_rollout(field, x0, t0, t_end, dt),
        Integrator::Tsit5 => tsit5_rollout(field, x0, t0, t_end, dt),
    }
}

/// Integration settings shared by embedding rollouts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutSettings {
    pub integrator: Integrator,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
}

/// Rolls out the embedding system from the box `x0` in `(x̲, x̄)` coding.
pub fn embedding_rollout<T: Real>(
    emb: &EmbeddingSystem<T>,
    x0: &IntervalTensor<T>,
    w: &[Interval<T>],
    control: &ControlInput<T>,
    settings: &RolloutSettings,
) -> Result<Trajectory<T>> {
    if x0.len() != emb.xlen() {
        return Err(Error::ShapeMismatch(format!(
            "initial box has {} entries, state has {}",
            x0.len(),
            emb.xlen()
        )));
    }
    rollout(
        settings.integrator,
        |t, s: &[T]| emb.e(t, s, control, w),
        &x0.i2ut(),
        settings.t0,
        settings.t_end,
        settings.dt,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![-x[0]])
    }

    #[test]
    fn euler_hand_iteration() {
        let tr = euler_rollout(decay, &[1.0], 0.0, 1.0, 0.5).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.5, 1.0]);
        assert_eq!(tr.states, vec![vec![1.0], vec![0.5], vec![0.25]]);
    }

    #[test]
    fn last_step_is_truncated() {
        let g = time_grid(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!((g[3] - 0.9).abs() < 1e-15);
        assert_eq!(time_grid(0.0, 1.25, 0.01).unwrap().len(), 126);
    }

    #[test]
    fn constant_field() {
        for integ in [Integrator::Euler, Integrator::Tsit5] {
            let tr = rollout(integ, |_, _: &[f64]| Ok(vec![0.0, 0.0]), &[1.0, 2.0], 0.0, 1.0, 0.1)
                .unwrap();
            assert!(tr.states.iter().all(|s| s == &vec![1.0, 2.0]));
        }
    }

    #[test]
    fn tsit5_accuracy() {
        let tr = tsit5_rollout(decay, &[1.0], 0.0, 1.0, 0.1).unwrap();
        assert!((tr.last()[0] - (-1.0f64).exp()).abs() < 1e-8);
        assert!(tr.max_error_estimate.unwrap() < 1e-6);
    }

    #[test]
    fn tsit5_oscillator_energy() {
        let tr = tsit5_rollout(
            |_, x: &[f64]| Ok(vec![x[1], -x[0]]),
            &[1.0, 0.0],
            0.0,
            2.0 * std::f64::consts::PI,
            0.05,
        )
        .unwrap();
        let r = tr.last()[0].hypot(tr.last()[1]);
        assert!((r - 1.0).abs() < 1e-6);
    }

    #[test]
    fn divergence_is_reported() {
        let r = euler_rollout(|_, x: &[f64]| Ok(vec![x[0] * 1e300]), &[1e10], 0.0, 1.0, 0.5);
        assert!(matches!(r, Err(Error::NonFiniteState { step: 1, .. })));
        assert!(matches!(euler_rollout(decay, &[1.0], 0.0, 1.0, 0.0), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn deterministic() {
        let a = tsit5_rollout(decay, &[0.3], 0.0, 2.0, 0.07).unwrap();
        let b = tsit5_rollout(decay, &[0.3], 0.0, 2.0, 0.07).unwrap();
        assert_eq!(a, b);
    }
}
