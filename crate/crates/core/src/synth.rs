//! Robust closed-loop trajectory synthesis in the embedding space.
//!
//! The policy is `π(t, x) = K(x − x_nom(t)) + u_ff(t)` with a piecewise
//! constant feedforward `u_ff` and a constant gain `K`. The closed-loop
//! inclusion function is built from one mixed Jacobian matrix per face,
//! centered on the nominal trajectory, and the embedding system is rolled out
//! with Euler steps. Everything is generic over [`Real`], so the same rollout
//! gives forward-mode gradients when run with [`Dual`] numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dual::Dual;
use crate::embedding::{embedded_field, route, System};
use crate::error::{Error, Result};
use crate::inclusion::{mjacm, Ordering};
use crate::interval::Interval;
use crate::montecarlo::sample_box;
use crate::partition::parallel_map;
use crate::real::Real;

/// Tangent directions per forward-mode pass.
const CHUNK: usize = 8;

/// Constraint slack below which a solution still counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveWeights {
    /// Weight on `Σ |u_ff|²`.
    pub control: f64,
    /// Weight on `‖K‖_F²`.
    pub gain: f64,
    /// Weight on `Σ ‖x̄ − x̲‖²`.
    pub width: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { control: 1.0, gain: 1.0, width: 1.0 }
    }
}

/// Quadratic-penalty gradient descent settings.
///
/// Each outer iteration minimizes `J + μ Σ min(0, g − margin)²` by gradient
/// descent with Armijo backtracking, then multiplies `μ` by `penalty_growth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub outer_iterations: usize,
    /// Gradient steps per outer iteration.
    pub max_iterations: usize,
    /// First trial step of every outer iteration; later trials start from
    /// a Barzilai-Borwein estimate capped at `max_step`.
    pub initial_step: f64,
    pub max_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub backtrack: f64,
    /// The penalty targets `g(u) ≥ margin` so that the returned point keeps
    /// some distance from the constraint boundary.
    pub margin: f64,
    /// Stop an inner loop once the gradient norm falls below this.
    pub gradient_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            outer_iterations: 5,
            max_iterations: 2000,
            initial_step: 1e-3,
            max_step: 1e3,
            armijo: 1e-4,
            backtrack: 0.5,
            margin: 5e-3,
            gradient_tol: 1e-8,
        }
    }
}

/// Embedding and nominal trajectories on the grid `t_0..t_N`.
#[derive(Clone, Debug)]
pub struct SynthRollout<T: Real = f64> {
    pub nominal: Vec<Vec<T>>,
    pub lower: Vec<Vec<T>>,
    pub upper: Vec<Vec<T>>,
    /// Per step, the smallest `1 + Δt·(M_x + M_u K)_ii` lower bound over all
    /// face evaluations. The Euler update of the embedding is monotone, and
    /// therefore bounds the Euler closed loop, only while this is `≥ 0`.
    pub monotonicity: Vec<T>,
}

/// A robust reach-and-stay problem: starting from `x0`, the embedding box
/// must lie in `terminal` at every step `n_e..=n_steps`.
#[derive(Clone, Debug)]
pub struct SynthesisProblem {
    sys: System,
    pub n_steps: usize,
    pub dt: f64,
    pub n_e: usize,
    pub x0: Vec<f64>,
    pub terminal: Vec<Interval>,
    pub w: Vec<Interval>,
    pub weights: ObjectiveWeights,
    ordering: Ordering,
    offsets: Offsets,
}

/// Offsets of each system argument in the flattened graph input.
#[derive(Clone, Copy, Debug, Default)]
struct Offsets {
    t: Option<usize>,
    x: usize,
    u: Option<usize>,
    w: Option<usize>,
}

impl SynthesisProblem {
    pub fn new(
        sys: System,
        n_steps: usize,
        dt: f64,
        n_e: usize,
        x0: Vec<f64>,
        terminal: Vec<Interval>,
        w: Vec<Interval>,
    ) -> Result<Self> {
        let n = sys.xlen();
        if sys.ulen() == 0 {
            return Err(Error::Config("synthesis needs a control input".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(format!("dt must be positive and finite, got {dt}")));
        }
        if n_e < 1 || n_e > n_steps {
            return Err(Error::Config(format!("need 1 ≤ N_e ≤ N, got N_e={n_e}, N={n_steps}")));
        }
        if x0.len() != n || terminal.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "state has {n} coordinates; x0 has {}, terminal box {}",
                x0.len(),
                terminal.len()
            )));
        }
        if w.len() != sys.wlen() {
            return Err(Error::DimensionMismatch(format!(
                "disturbance box has {} entries, system expects {}",
                w.len(),
                sys.wlen()
            )));
        }
        if let Some(k) = w.iter().position(|i| !i.contains(0.0)) {
            return Err(Error::Config(format!(
                "the nominal disturbance is zero, but w[{k}] = {} excludes it",
                w[k]
            )));
        }
        let mut off = Offsets::default();
        let mut pos = 0;
        for s in sys.graph().slots() {
            match s.name.as_str() {
                "t" => off.t = Some(pos),
                "x" => off.x = pos,
                "u" => off.u = Some(pos),
                "w" => off.w = Some(pos),
                _ => unreachable!("system slots are validated"),
            }
            pos += s.len;
        }
        // Control columns last: they are then evaluated on the full box.
        let u_off = off.u.expect("ulen > 0");
        let mut order: Vec<usize> =
            (0..pos).filter(|&k| !(u_off..u_off + sys.ulen()).contains(&k)).collect();
        order.extend(u_off..u_off + sys.ulen());
        Ok(SynthesisProblem {
            sys,
            n_steps,
            dt,
            n_e,
            x0,
            terminal,
            w,
            weights: ObjectiveWeights::default(),
            ordering: Ordering::new(order)?,
            offsets: off,
        })
    }

    pub fn with_weights(mut self, weights: ObjectiveWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn system(&self) -> &System {
        &self.sys
    }

    /// Length of the decision vector `(u_ff(t_1..t_N), K)`, `K` row-major.
    pub fn decision_len(&self) -> usize {
        let p = self.sys.ulen();
        self.n_steps * p + p * self.sys.xlen()
    }

    /// Splits a decision vector into the feedforward schedule and the gain.
    pub fn split<'a, T>(&self, z: &'a [T]) -> (&'a [T], &'a [T]) {
        z.split_at(self.n_steps * self.sys.ulen())
    }

    fn check_len<T>(&self, z: &[T]) -> Result<()> {
        if z.len() != self.decision_len() {
            return Err(Error::DimensionMismatch(format!(
                "decision vector has {} entries, expected {}",
                z.len(),
                self.decision_len()
            )));
        }
        Ok(())
    }

    /// Closed-loop inclusion function on the state box `x` at step `k`.
    fn closed_loop<T: Real>(
        &self,
        t: f64,
        x: &[Interval<T>],
        xnom: &[T],
        uff: &[T],
        gain: &[T],
        mono: &mut T,
    ) -> Result<Vec<Interval<T>>> {
        let (n, p, q) = (self.sys.xlen(), self.sys.ulen(), self.sys.wlen());
        let xh: Vec<Interval<T>> =
            x.iter().zip(xnom).map(|(i, &c)| i.hull(&Interval::point(c))).collect();
        let dx: Vec<Interval<T>> = x.iter().zip(xnom).map(|(i, &c)| i.shift(-c)).collect();
        let ub: Vec<Interval<T>> = (0..p)
            .map(|j| {
                xh.iter().zip(xnom).enumerate().fold(Interval::point(uff[j]), |acc, (i, (h, &c))| {
                    acc + h.shift(-c).scale(gain[j * n + i])
                })
            })
            .collect();
        let wb: Vec<Interval<T>> =
            self.w.iter().map(|i| Interval::new_unchecked(T::from_f64(i.lower), T::from_f64(i.upper))).collect();
        let tb = [Interval::point(T::from_f64(t))];
        let g = self.sys.graph();
        let inputs = route(g.slots(), &tb, &xh, &ub, &wb)?;
        let tc = [T::from_f64(t)];
        let wc = vec![T::zero(); q];
        let center: Vec<T> = route(g.slots(), &tc, xnom, uff, &wc)?.concat();
        let m = mjacm(g, &inputs, std::slice::from_ref(&self.ordering), &[center])?
            .pop()
            .expect("one center and one ordering");
        let off = self.offsets;
        let u0 = off.u.expect("ulen > 0");
        Ok((0..n)
            .map(|r| {
                let mut acc = m.f_center[r];
                for (i, d) in dx.iter().enumerate() {
                    let mut coef = m.get(r, off.x + i);
                    for j in 0..p {
                        coef = coef + m.get(r, u0 + j).scale(gain[j * n + i]);
                    }
                    if i == r {
                        *mono = mono.min_v(T::one() + T::from_f64(self.dt) * coef.lower);
                    }
                    acc = acc + coef * *d;
                }
                if let Some(w0) = off.w {
                    for (j, wj) in wb.iter().enumerate() {
                        acc = acc + m.get(r, w0 + j) * *wj;
                    }
                }
                acc
            })
            .collect())
    }

    /// Euler rollout of the nominal system and of the closed-loop embedding.
    pub fn rollout<T: Real>(&self, z: &[T]) -> Result<SynthRollout<T>> {
        self.check_len(z)?;
        let (n, p, q) = (self.sys.xlen(), self.sys.ulen(), self.sys.wlen());
        let (uff, gain) = self.split(z);
        let h = T::from_f64(self.dt);
        let x0: Vec<T> = self.x0.iter().map(|&v| T::from_f64(v)).collect();
        let mut out = SynthRollout {
            nominal: vec![x0.clone()],
            lower: vec![x0.clone()],
            upper: vec![x0],
            monotonicity: Vec::with_capacity(self.n_steps),
        };
        let wz = vec![T::zero(); q];
        for k in 0..self.n_steps {
            let t = k as f64 * self.dt;
            let u = &uff[k * p..(k + 1) * p];
            let (xn, lo, hi) = (&out.nominal[k], &out.lower[k], &out.upper[k]);
            let mut mono = T::from_f64(f64::INFINITY);
            let e = embedded_field(lo, hi, |face| self.closed_loop(t, face, xn, u, gain, &mut mono))?;
            let fn_ = self.sys.f(t, xn, u, &wz)?;
            let step = |v: &[T], d: &[T]| -> Vec<T> {
                v.iter().zip(d).map(|(&a, &b)| a + h * b).collect()
            };
            let next_nom = step(xn, &fn_);
            let next_lo = step(lo, &e[..n]);
            let next_hi = step(hi, &e[n..]);
            if next_lo.iter().chain(&next_hi).chain(&next_nom).any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { step: k + 1, t: t + self.dt });
            }
            out.nominal.push(next_nom);
            out.lower.push(next_lo);
            out.upper.push(next_hi);
            out.monotonicity.push(mono);
        }
        Ok(out)
    }

    fn objective_of<T: Real>(&self, z: &[T], r: &SynthRollout<T>) -> T {
        let (uff, gain) = self.split(z);
        let sq = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a + b * b);
        let wd = self.weights;
        let mut width = T::zero();
        for (lo, hi) in r.lower.iter().zip(&r.upper).skip(1) {
            for (&l, &u) in lo.iter().zip(hi) {
                width += (u - l) * (u - l);
            }
        }
        T::from_f64(wd.control) * sq(uff)
            + T::from_f64(wd.gain) * sq(gain)
            + T::from_f64(wd.width) * width
    }

    /// Constraint values `g ≥ 0`: for each step `j = n_e..=N` and each
    /// coordinate, `x̲_j − x̲_f` followed by `x̄_f − x̄_j`; then the
    /// monotonicity value of every step.
    fn constraints_of<T: Real>(&self, r: &SynthRollout<T>) -> Vec<T> {
        let mut g = Vec::new();
        for j in self.n_e..=self.n_steps {
            for (i, b) in self.terminal.iter().enumerate() {
                g.push(r.lower[j][i] - T::from_f64(b.lower));
                g.push(T::from_f64(b.upper) - r.upper[j][i]);
            }
        }
        g.extend(r.monotonicity.iter().copied());
        g
    }

    pub fn objective<T: Real>(&self, z: &[T]) -> Result<T> {
        let r = self.rollout(z)?;
        Ok(self.objective_of(z, &r))
    }

    pub fn constraints<T: Real>(&self, z: &[T]) -> Result<Vec<T>> {
        Ok(self.constraints_of(&self.rollout(z)?))
    }

    /// `J(z) + μ Σ min(0, g(z) − margin)²`.
    pub fn penalized<T: Real>(&self, z: &[T], mu: f64, margin: f64) -> Result<T> {
        let r = self.rollout(z)?;
        let mut pen = T::zero();
        for g in self.constraints_of(&r) {
            let s = g - T::from_f64(margin);
            if s.value() < 0.0 {
                pen += s * s;
            }
        }
        Ok(self.objective_of(z, &r) + T::from_f64(mu) * pen)
    }

    /// Runs the penalty method from `initial` and certifies nothing; see
    /// [`SynthesisProblem::certify`].
    pub fn solve(&self, initial: &[f64], opts: &OptimizerSettings) -> Result<SynthesisOutcome> {
        self.check_len(initial)?;
        let mut z = initial.to_vec();
        let mut mu = opts.initial_penalty;
        let mut best: Option<(bool, f64, f64, Vec<f64>)> = None;
        let mut history = Vec::new();
        let mut iterations = 0;
        let consider = |z: &[f64], best: &mut Option<(bool, f64, f64, Vec<f64>)>| -> Result<()> {
            let r = self.rollout(z)?;
            let j = self.objective_of(z, &r);
            let viol = self.constraints_of(&r).iter().fold(0.0f64, |a, &g| a.max(-g));
            let feasible = viol <= FEASIBILITY_TOL;
            let better = match best {
                None => true,
                Some((bf, bj, bv, _)) => match (feasible, *bf) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => j < *bj,
                    (false, false) => viol < *bv,
                },
            };
            if better {
                *best = Some((feasible, j, viol, z.to_vec()));
            }
            Ok(())
        };
        consider(&z, &mut best)?;
        for _ in 0..opts.outer_iterations {
            let phi = |z: &[f64]| self.penalized(z, mu, opts.margin);
            let grad_phi = |z: &[f64]| {
                gradient(|d: &[Dual<CHUNK>]| self.penalized(d, mu, opts.margin), z)
            };
            let mut step = opts.initial_step;
            let (mut val, mut grad) = grad_phi(&z)?;
            iterations += 1;
            for _ in 0..opts.max_iterations {
                let gn2: f64 = grad.iter().map(|g| g * g).sum();
                if gn2.sqrt() < opts.gradient_tol {
                    break;
                }
                let mut accepted = false;
                for _ in 0..60 {
                    let trial: Vec<f64> = z.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
                    // Trials that leave the domain (e.g. reversed bounds) count as failures.
                    if matches!(phi(&trial), Ok(tv) if tv <= val - opts.armijo * step * gn2) {
                        let (tv, tg) = grad_phi(&trial)?;
                        iterations += 1;
                        // Barzilai-Borwein guess for the next trial step.
                        let (mut ss, mut sy) = (0.0, 0.0);
                        for k in 0..z.len() {
                            let (dz, dg) = (trial[k] - z[k], tg[k] - grad[k]);
                            ss += dz * dz;
                            sy += dz * dg;
                        }
                        step = if sy > 0.0 { (ss / sy).min(opts.max_step) } else { step / opts.backtrack };
                        (z, val, grad) = (trial, tv, tg);
                        accepted = true;
                        break;
                    }
                    step *= opts.backtrack;
                }
                if !accepted {
                    break;
                }
            }
            consider(&z, &mut best)?;
            history.push(OuterRecord { penalty: mu, penalized_objective: val });
            mu *= opts.penalty_growth;
        }
        let (feasible, objective, violation, z) = best.expect("initial point considered");
        if !feasible {
            return Err(Error::NonConvergence { violation });
        }
        let margin = self.constraints(&z)?.into_iter().fold(f64::INFINITY, f64::min);
        Ok(SynthesisOutcome { decision: z, objective, margin, iterations, history })
    }

    /// Certificate for a decision vector: the embedding end-phase boxes
    /// against the terminal box, and `samples` disturbed closed-loop Euler
    /// rollouts (disturbance resampled every step) against the same
    /// constraints.
    pub fn certify(&self, z: &[f64], samples: usize, seed: u64, workers: usize) -> Result<Certificate> {
        let r = self.rollout(z)?;
        let margin = self.constraints_of(&r).into_iter().fold(f64::INFINITY, f64::min);
        let (n, p) = (self.sys.xlen(), self.sys.ulen());
        let (uff, gain) = self.split(z);
        let ids: Vec<u64> = (0..samples as u64).collect();
        let per_sample = parallel_map(&ids, workers, |_, &i| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut x = self.x0.clone();
            let mut worst = f64::INFINITY;
            let mut tube_excess = f64::NEG_INFINITY;
            for k in 0..self.n_steps {
                let t = k as f64 * self.dt;
                let w = sample_box(&self.w, &mut rng);
                let u: Vec<f64> = (0..p)
                    .map(|j| {
                        uff[k * p + j]
                            + (0..n).map(|c| gain[j * n + c] * (x[c] - r.nominal[k][c])).sum::<f64>()
                    })
                    .collect();
                let f = self.sys.f(t, &x, &u, &w)?;
                for (xi, fi) in x.iter_mut().zip(&f) {
                    *xi += self.dt * fi;
                }
                for c in 0..n {
                    let e = (r.lower[k + 1][c] - x[c]).max(x[c] - r.upper[k + 1][c]);
                    tube_excess = tube_excess.max(e);
                    if k + 1 >= self.n_e {
                        let b = self.terminal[c];
                        worst = worst.min(x[c] - b.lower).min(b.upper - x[c]);
                    }
                }
            }
            Ok((worst, tube_excess))
        });
        let mut mc_margin = f64::INFINITY;
        let mut violating = 0;
        let mut tube_excess = f64::NEG_INFINITY;
        for r in per_sample {
            let (m, e) = r?;
            mc_margin = mc_margin.min(m);
            tube_excess = tube_excess.max(e);
            if m < -FEASIBILITY_TOL {
                violating += 1;
            }
        }
        Ok(Certificate {
            embedding_margin: margin,
            embedding_ok: margin >= -FEASIBILITY_TOL,
            samples,
            mc_margin,
            mc_violations: violating,
            mc_ok: violating == 0,
            mc_tube_excess: tube_excess,
        })
    }
}

/// One outer penalty iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub penalty: f64,
    pub penalized_objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOutcome {
    /// Best feasible iterate `(u_ff, K)`.
    pub decision: Vec<f64>,
    pub objective: f64,
    /// Smallest constraint value `min g` of the decision.
    pub margin: f64,
    /// Total gradient evaluations.
    pub iterations: usize,
    pub history: Vec<OuterRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub embedding_margin: f64,
    pub embedding_ok: bool,
    pub samples: usize,
    /// Smallest constraint value over all sampled trajectories.
    pub mc_margin: f64,
    pub mc_violations: usize,
    pub mc_ok: bool,
    /// Largest distance of a sampled state outside the embedding tube
    /// (negative when every sample stays strictly inside).
    pub mc_tube_excess: f64,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.embedding_ok && self.mc_ok
    }
}

/// Value and gradient of `f` at `z` by forward mode, `CHUNK` directions
/// per pass.
pub fn gradient<F>(f: F, z: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[Dual<CHUNK>]) -> Result<Dual<CHUNK>>,
{
    let mut grad = vec![0.0; z.len()];
    let mut value = f64::NAN;
    for start in (0..z.len().max(1)).step_by(CHUNK) {
        let d: Vec<Dual<CHUNK>> = z
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if (start..start + CHUNK).contains(&i) {
                    Dual::variable(v, i - start)
                } else {
                    Dual::constant(v)
                }
            })
            .collect();
        let out = f(&d)?;
        value = out.re;
        for (k, g) in grad.iter_mut().skip(start).take(CHUNK).enumerate() {
            *g = out.eps[k];
        }
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{pendulum, PendulumParams};
    use rand::Rng;
    use std::f64::consts::PI;

    fn problem(n: usize, w: f64) -> SynthesisProblem {
        let sys = pendulum(PendulumParams::default()).unwrap();
        let terminal = vec![
            Interval::centered(PI, 10.0 * PI / 360.0),
            Interval::centered(0.0, 0.1),
        ];
        SynthesisProblem::new(
            sys,
            n,
            0.05,
            n / 2,
            vec![0.0, 0.0],
            terminal,
            vec![Interval::centered(0.0, w)],
        )
        .unwrap()
    }

    #[test]
    fn thin_disturbance_collapses_to_nominal() {
        let pb = problem(10, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut z: Vec<f64> = (0..pb.decision_len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let nz = z.len();
        z[nz - 2..].fill(0.0);
        let r = pb.rollout(&z).unwrap();
        for k in 0..=10 {
            assert_eq!(r.lower[k], r.nominal[k]);
            assert_eq!(r.upper[k], r.nominal[k]);
        }
        let j = pb.objective(&z).unwrap();
        let uu: f64 = z.iter().map(|v| v * v).sum();
        assert_eq!(j, uu);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pb = problem(10, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z: Vec<f64> = (0..pb.decision_len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let (v, g) = gradient(|d| pb.objective(d), &z).unwrap();
        assert_eq!(v, pb.objective(&z).unwrap());
        for i in 0..z.len() {
            let h = 1e-6;
            let (mut a, mut b) = (z.clone(), z.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (pb.objective(&a).unwrap() - pb.objective(&b).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * fd.abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn embedding_tube_contains_samples() {
        let pb = problem(20, 0.02);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut z: Vec<f64> = (0..pb.decision_len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let nz = z.len();
        z[nz - 2] = -0.3;
        z[nz - 1] = -0.1;
        let c = pb.certify(&z, 200, 1, 2).unwrap();
        assert!(c.mc_tube_excess <= 1e-12, "{c:?}");
    }

    #[test]
    fn rejects_bad_problems() {
        let sys = pendulum(PendulumParams::default()).unwrap();
        let tb = vec![Interval::point(0.0); 2];
        let w = vec![Interval::point(0.0)];
        let mk = |n_e, w: Vec<Interval>| {
            SynthesisProblem::new(sys.clone(), 10, 0.05, n_e, vec![0.0; 2], tb.clone(), w)
        };
        assert!(matches!(mk(0, w.clone()), Err(Error::Config(_))));
        assert!(matches!(mk(11, w.clone()), Err(Error::Config(_))));
        assert!(matches!(mk(5, vec![Interval::new(0.1, 0.2).unwrap()]), Err(Error::Config(_))));
        assert!(matches!(mk(5, vec![]), Err(Error::DimensionMismatch(_))));
    }
}
