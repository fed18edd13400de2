//! Mixed-cornered closed-loop inclusion function for `ẋ = f(x, NN(x), w)`.

use std::sync::Arc;

use super::{crown_with, AlphaRule, NeuralNetwork};
use crate::embedding::System;
use crate::error::{Error, Result};
use crate::graph::SlotSpec;
use crate::inclusion::{mjacm, InclusionFn, Ordering, Side};
use crate::interval::Interval;

/// Closed-loop inclusion function over the system's slots without `u`.
#[derive(Clone, Debug)]
pub struct ClosedLoopInclusion {
    sys: System,
    net: Arc<NeuralNetwork>,
    corner: Vec<Side>,
    ordering: Ordering,
    alpha: AlphaRule,
    slots: Vec<SlotSpec>,
}

/// Builds the closed-loop inclusion function.
///
/// `corner` picks the expansion point of the state box (one side per state
/// coordinate; `None` is the lower corner). The control and disturbance
/// centers use the same side when all state sides agree and the lower side
/// otherwise. `ordering` runs over the concatenated inputs of the vector
/// field in slot order (`None` is the identity).
pub fn clnn_inclusion(
    sys: &System,
    net: Arc<NeuralNetwork>,
    corner: Option<Vec<Side>>,
    ordering: Option<Ordering>,
) -> Result<ClosedLoopInclusion> {
    let n = sys.xlen();
    if sys.ulen() == 0 {
        return Err(Error::SignatureMismatch("closed loop needs a `u` slot".into()));
    }
    if net.in_dim() != n || net.out_dim() != sys.ulen() {
        return Err(Error::DimensionMismatch(format!(
            "network maps {} -> {}, system needs {n} -> {}",
            net.in_dim(),
            net.out_dim(),
            sys.ulen()
        )));
    }
    let corner = corner.unwrap_or_else(|| vec![Side::Lower; n]);
    if corner.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "corner has {} sides for a state of length {n}",
            corner.len()
        )));
    }
    let total = sys.graph().input_dim();
    let ordering = ordering.unwrap_or_else(|| Ordering::identity(total));
    if ordering.len() != total {
        return Err(Error::InvalidOrdering(format!(
            "ordering of length {} for {total} input coordinates",
            ordering.len()
        )));
    }
    let slots = sys.graph().slots().iter().filter(|s| s.name != "u").cloned().collect();
    Ok(ClosedLoopInclusion {
        sys: sys.clone(),
        net,
        corner,
        ordering,
        alpha: AlphaRule::default(),
        slots,
    })
}

impl ClosedLoopInclusion {
    pub fn with_alpha(mut self, alpha: AlphaRule) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn network(&self) -> &NeuralNetwork {
        &self.net
    }

    fn follow_side(&self) -> Side {
        if self.corner.iter().all(|s| *s == Side::Upper) {
            Side::Upper
        } else {
            Side::Lower
        }
    }
}

fn pick(i: Interval, s: Side) -> f64 {
    match s {
        Side::Lower => i.lower,
        Side::Upper => i.upper,
    }
}

fn pos(a: f64) -> f64 {
    a.max(0.0)
}

fn neg(a: f64) -> f64 {
    a.min(0.0)
}

impl InclusionFn<f64> for ClosedLoopInclusion {
    fn slots(&self) -> &[SlotSpec] {
        &self.slots
    }

    fn output_len(&self) -> usize {
        self.sys.xlen()
    }

    fn eval(&self, inputs: &[&[Interval]]) -> Result<Vec<Interval>> {
        if inputs.len() != self.slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} input slots, got {}",
                self.slots.len(),
                inputs.len()
            )));
        }
        let get = |name: &str| {
            self.slots.iter().position(|s| s.name == name).map(|k| inputs[k]).unwrap_or(&[])
        };
        let (x, w) = (get("x"), get("w"));
        let n = self.sys.xlen();
        if x.len() != n || w.len() != self.sys.wlen() {
            return Err(Error::ShapeMismatch("closed-loop input lengths".into()));
        }

        let cb = crown_with(&self.net, x, self.alpha)?;
        let p = self.net.out_dim();
        let ubox: Vec<Interval> = (0..p)
            .map(|k| {
                let lo = (0..n)
                    .map(|j| pos(cb.c_lower[k][j]) * x[j].lower + neg(cb.c_lower[k][j]) * x[j].upper)
                    .sum::<f64>()
                    + cb.d_lower[k];
                let hi = (0..n)
                    .map(|j| neg(cb.c_upper[k][j]) * x[j].lower + pos(cb.c_upper[k][j]) * x[j].upper)
                    .sum::<f64>()
                    + cb.d_upper[k];
                Interval::new_unchecked(lo, hi)
            })
            .collect();

        let follow = self.follow_side();
        let g = self.sys.graph();
        let mut full: Vec<&[Interval]> = Vec::with_capacity(g.slots().len());
        let mut center = Vec::with_capacity(g.input_dim());
        let (mut xo, mut uo, mut wo) = (0, 0, 0);
        for s in g.slots() {
            let off = center.len();
            match s.name.as_str() {
                "x" => {
                    xo = off;
                    full.push(x);
                    center.extend(x.iter().zip(&self.corner).map(|(&i, &sd)| pick(i, sd)));
                }
                "u" => {
                    uo = off;
                    full.push(&ubox);
                    center.extend(ubox.iter().map(|&i| pick(i, follow)));
                }
                "w" => {
                    wo = off;
                    full.push(w);
                    center.extend(w.iter().map(|&i| pick(i, follow)));
                }
                _ => {
                    let t = get(&s.name);
                    full.push(t);
                    center.extend(t.iter().map(|i| i.lower));
                }
            }
        }
        let mj = mjacm(g, &full, std::slice::from_ref(&self.ordering), &[center.clone()])?
            .pop()
            .expect("one center and one ordering");

        let xc = &center[xo..xo + n];
        let uc = &center[uo..uo + p];
        let wc = &center[wo..wo + w.len()];
        let other = |s: Side| if s == Side::Lower { Side::Upper } else { Side::Lower };

        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            // Row selections giving the lower (L) and upper (U) linear bounds.
            let lx: Vec<f64> = (0..n).map(|j| pick(mj.get(i, xo + j), self.corner[j])).collect();
            let ux: Vec<f64> =
                (0..n).map(|j| pick(mj.get(i, xo + j), other(self.corner[j]))).collect();
            let lu: Vec<f64> = (0..p).map(|k| pick(mj.get(i, uo + k), follow)).collect();
            let uu: Vec<f64> = (0..p).map(|k| pick(mj.get(i, uo + k), other(follow))).collect();

            let mut lo = mj.f_center[i].lower;
            let mut hi = mj.f_center[i].upper;
            for j in 0..n {
                let hl = lx[j]
                    + (0..p)
                        .map(|k| pos(lu[k]) * cb.c_lower[k][j] + neg(lu[k]) * cb.c_upper[k][j])
                        .sum::<f64>();
                let hu = ux[j]
                    + (0..p)
                        .map(|k| pos(uu[k]) * cb.c_upper[k][j] + neg(uu[k]) * cb.c_lower[k][j])
                        .sum::<f64>();
                lo += pos(hl) * x[j].lower + neg(hl) * x[j].upper - lx[j] * xc[j];
                hi += pos(hu) * x[j].upper + neg(hu) * x[j].lower - ux[j] * xc[j];
            }
            for k in 0..p {
                lo += pos(lu[k]) * cb.d_lower[k] + neg(lu[k]) * cb.d_upper[k] - lu[k] * uc[k];
                hi += pos(uu[k]) * cb.d_upper[k] + neg(uu[k]) * cb.d_lower[k] - uu[k] * uc[k];
            }
            let mut wterm = Interval::point(0.0);
            for (l, (wi, &c)) in w.iter().zip(wc).enumerate() {
                wterm = wterm + mj.get(i, wo + l) * wi.shift(-c);
            }
            out.push(Interval::new_unchecked(lo + wterm.lower, hi + wterm.upper));
        }
        Ok(out)
    }

    fn is_thin(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse::parse_graph;
    use crate::inclusion::{mjacif, Center};
    use crate::neural::{Activation, Layer};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn double_integrator() -> System {
        let g = parse_graph(
            "x[1] + w[0]; u[0]",
            vec![SlotSpec::new("x", 2), SlotSpec::new("u", 1), SlotSpec::new("w", 1)],
        )
        .unwrap();
        System::new(g).unwrap()
    }

    fn linear(k: [f64; 2]) -> Arc<NeuralNetwork> {
        Arc::new(
            NeuralNetwork::new(vec![Layer {
                weights: vec![k.to_vec()],
                bias: vec![0.0],
                activation: Activation::Identity,
            }])
            .unwrap(),
        )
    }

    #[test]
    fn linear_feedback_is_sound() {
        let sys = double_integrator();
        let net = linear([-1.0, -1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = [Interval::new(-0.5, 0.3).unwrap(), Interval::new(0.2, 0.6).unwrap()];
        let w = [Interval::new(-0.1, 0.1).unwrap()];
        for corner in [[Side::Lower, Side::Lower], [Side::Upper, Side::Lower], [Side::Upper; 2]] {
            let f = clnn_inclusion(&sys, net.clone(), Some(corner.to_vec()), None).unwrap();
            let y = f.eval(&[&x[..], &w[..]]).unwrap();
            for _ in 0..1000 {
                let p = [rng.gen_range(-0.5..=0.3), rng.gen_range(0.2..=0.6)];
                let wp = [rng.gen_range(-0.1..=0.1)];
                let u = net.forward(&p).unwrap();
                let v = sys.f(0.0, &p, &u, &wp).unwrap();
                for (yi, vi) in y.iter().zip(&v) {
                    assert!(yi.lower <= vi + 1e-12 && *vi <= yi.upper + 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_network_matches_open_loop() {
        let g = parse_graph(
            "x[1] * cos(x[0]) + u[0]; -sin(x[0]) * (1 + w[0]) + x[1] * u[0]",
            vec![SlotSpec::new("x", 2), SlotSpec::new("u", 1), SlotSpec::new("w", 1)],
        )
        .unwrap();
        let sys = System::new(g.clone()).unwrap();
        let net = Arc::new(
            NeuralNetwork::new(vec![
                Layer {
                    weights: vec![vec![0.0, 0.0]; 3],
                    bias: vec![0.0; 3],
                    activation: Activation::Relu,
                },
                Layer {
                    weights: vec![vec![0.0; 3]],
                    bias: vec![0.0],
                    activation: Activation::Identity,
                },
            ])
            .unwrap(),
        );
        let f = clnn_inclusion(&sys, net, None, None).unwrap();
        let x = [Interval::new(0.1, 0.4).unwrap(), Interval::new(-0.3, 0.2).unwrap()];
        let w = [Interval::new(-0.05, 0.05).unwrap()];
        let y = f.eval(&[&x[..], &w[..]]).unwrap();
        let open = mjacif(g, vec![], vec![Center::lower_corner(4)]).unwrap();
        let u0 = [Interval::point(0.0)];
        let z = open.eval(&[&x[..], &u0[..], &w[..]]).unwrap();
        for (a, b) in y.iter().zip(&z) {
            assert!((a.lower - b.lower).abs() < 1e-12 && (a.upper - b.upper).abs() < 1e-12);
        }
    }

    #[test]
    fn thin_inputs_give_closed_loop_value() {
        let sys = double_integrator();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Arc::new(NeuralNetwork::random(&[2, 8, 1], 1.0, &mut rng).unwrap());
        let f = clnn_inclusion(&sys, net.clone(), None, None).unwrap();
        let p = [0.2, -0.4];
        let x: Vec<Interval> = p.iter().map(|&v| Interval::point(v)).collect();
        let w = [Interval::point(0.03)];
        let y = f.eval(&[&x[..], &w[..]]).unwrap();
        let v = sys.f(0.0, &p, &net.forward(&p).unwrap(), &[0.03]).unwrap();
        for (yi, vi) in y.iter().zip(&v) {
            assert!((yi.lower - vi).abs() < 1e-12 && (yi.upper - vi).abs() < 1e-12);
        }
    }
}
