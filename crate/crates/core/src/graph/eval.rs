use super::{ExprGraph, Node};
use crate::error::{Error, Result};
use crate::interval::{BinaryOp, Interval, IntervalTensor, UnaryOp};
use crate::real::Real;

/// Named bindings from input slots to values, validated against a graph.
#[derive(Clone, Debug)]
pub struct EvalContext<'g, V> {
    graph: &'g ExprGraph,
    bindings: Vec<Option<Vec<V>>>,
}

impl<'g, V: Clone> EvalContext<'g, V> {
    pub fn new(graph: &'g ExprGraph) -> Self {
        EvalContext { graph, bindings: vec![None; graph.slots().len()] }
    }

    /// Binds a slot exactly once with a value of the declared length.
    pub fn bind(mut self, name: &str, values: Vec<V>) -> Result<Self> {
        let slot = self
            .graph
            .slot_index(name)
            .ok_or_else(|| Error::ShapeMismatch(format!("graph has no input slot `{name}`")))?;
        let want = self.graph.slots()[slot].len;
        if values.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "slot `{name}` expects {want} values, got {}",
                values.len()
            )));
        }
        if self.bindings[slot].is_some() {
            return Err(Error::ShapeMismatch(format!("slot `{name}` bound twice")));
        }
        self.bindings[slot] = Some(values);
        Ok(self)
    }

    /// Slot values in declaration order; every slot must be bound.
    pub fn inputs(&self) -> Result<Vec<&[V]>> {
        self.bindings
            .iter()
            .zip(self.graph.slots())
            .map(|(b, s)| {
                b.as_deref()
                    .ok_or_else(|| Error::ShapeMismatch(format!("slot `{}` is unbound", s.name)))
            })
            .collect()
    }
}

/// Interpreter options for interval evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalOptions {
    /// Widen every intermediate interval outward by this many ulps.
    pub inflate_ulps: Option<i32>,
}

/// Interval values and selected Jacobian columns of all outputs.
#[derive(Clone, Debug)]
pub struct JacobianColumns<T> {
    /// Interval value of each output.
    pub values: Vec<Interval<T>>,
    rows: usize,
    cols: usize,
    data: Vec<Interval<T>>,
}

impl<T: Real> JacobianColumns<T> {
    /// Enclosure of `d out_row / d seed_col`.
    pub fn get(&self, row: usize, col: usize) -> Interval<T> {
        self.data[row * self.cols + col]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

fn unary_slope<T: Real>(op: UnaryOp, a: Interval<T>, out: Interval<T>) -> Result<Interval<T>> {
    let one = Interval::point(T::one());
    Ok(match op {
        UnaryOp::Neg => Interval::point(-T::one()),
        UnaryOp::Sin => a.cos(),
        UnaryOp::Cos => -a.sin(),
        UnaryOp::Tan => one + out.sq(),
        UnaryOp::Atan => (one + a.sq()).recip()?,
        UnaryOp::Sqrt => {
            if a.lower.value() <= 0.0 {
                return Err(Error::NonDifferentiable("sqrt"));
            }
            out.scale(T::from_f64(2.0)).recip()?
        }
        UnaryOp::Exp => out,
        UnaryOp::Tanh => one - out.sq(),
        UnaryOp::Abs => {
            if a.lower.value() >= 0.0 {
                one
            } else if a.upper.value() <= 0.0 {
                -one
            } else {
                return Err(Error::NonDifferentiable("abs"));
            }
        }
        UnaryOp::PowI(k) => match k {
            0 => Interval::point(T::zero()),
            1 => one,
            _ => a.powi(k - 1)?.scale(T::from_f64(k as f64)),
        },
    })
}

impl ExprGraph {
    fn check_inputs<V>(&self, inputs: &[&[V]]) -> Result<()> {
        if inputs.len() != self.slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "graph has {} input slots, got {}",
                self.slots.len(),
                inputs.len()
            )));
        }
        for (spec, vals) in self.slots.iter().zip(inputs) {
            if vals.len() != spec.len {
                return Err(Error::ShapeMismatch(format!(
                    "slot `{}` expects {} values, got {}",
                    spec.name,
                    spec.len,
                    vals.len()
                )));
            }
        }
        Ok(())
    }

    /// Plain forward evaluation.
    pub fn eval_real<T: Real>(&self, inputs: &[&[T]]) -> Result<Vec<T>> {
        self.check_inputs(inputs)?;
        let mut vals: Vec<T> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::Input { slot, index } => inputs[slot][index],
                Node::Const(c) => T::from_f64(c),
                Node::Unary(op, a) => op.apply_real(vals[a.0])?,
                Node::Binary(op, a, b) => op.apply_real(vals[a.0], vals[b.0])?,
            };
            vals.push(v);
        }
        Ok(self.outputs.iter().map(|o| vals[o.0]).collect())
    }

    /// Natural inclusion: every primitive replaced by its minimal inclusion function.
    pub fn eval_interval<T: Real>(&self, inputs: &[&[Interval<T>]]) -> Result<Vec<Interval<T>>> {
        self.eval_interval_with(inputs, EvalOptions::default())
    }

    pub fn eval_interval_with<T: Real>(
        &self,
        inputs: &[&[Interval<T>]],
        opts: EvalOptions,
    ) -> Result<Vec<Interval<T>>> {
        self.check_inputs(inputs)?;
        let mut vals: Vec<Interval<T>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut v = match *node {
                Node::Input { slot, index } => inputs[slot][index],
                Node::Const(c) => Interval::point(T::from_f64(c)),
                Node::Unary(op, a) => vals[a.0].unary(op)?,
                Node::Binary(op, a, b) => vals[a.0].binary(op, vals[b.0])?,
            };
            if let Some(ulps) = opts.inflate_ulps {
                if !matches!(node, Node::Input { .. } | Node::Const(_)) {
                    v = v.inflate(ulps);
                }
            }
            vals.push(v);
        }
        Ok(self.outputs.iter().map(|o| vals[o.0]).collect())
    }

    /// Forward-mode interval Jacobian columns for the given `(slot, index)` seeds.
    ///
    /// Tangents are propagated as intervals, so the result encloses the
    /// Jacobian of every point in the input box.
    pub fn jacobian_columns<T: Real>(
        &self,
        inputs: &[&[Interval<T>]],
        seeds: &[(usize, usize)],
    ) -> Result<JacobianColumns<T>> {
        self.check_inputs(inputs)?;
        let k = seeds.len();
        let n = self.nodes.len();
        let zero = Interval::point(T::zero());
        let mut vals: Vec<Interval<T>> = Vec::with_capacity(n);
        let mut tan: Vec<Interval<T>> = vec![zero; n * k];
        let mut active = vec![false; n];

        for (i, node) in self.nodes.iter().enumerate() {
            let (done, rest) = tan.split_at_mut(i * k);
            let ti = &mut rest[..k];
            let v = match *node {
                Node::Input { slot, index } => {
                    for (s, seed) in seeds.iter().enumerate() {
                        if *seed == (slot, index) {
                            ti[s] = Interval::point(T::one());
                            active[i] = true;
                        }
                    }
                    inputs[slot][index]
                }
                Node::Const(c) => Interval::point(T::from_f64(c)),
                Node::Unary(op, a) => {
                    let va = vals[a.0];
                    let v = va.unary(op)?;
                    if active[a.0] {
                        let slope = unary_slope(op, va, v)?;
                        let ta = &done[a.0 * k..a.0 * k + k];
                        for s in 0..k {
                            ti[s] = slope * ta[s];
                        }
                        active[i] = true;
                    }
                    v
                }
                Node::Binary(op, a, b) => {
                    let (va, vb) = (vals[a.0], vals[b.0]);
                    let v = va.binary(op, vb)?;
                    let (act_a, act_b) = (active[a.0], active[b.0]);
                    if act_a || act_b {
                        let ta = &done[a.0 * k..a.0 * k + k];
                        let tb = &done[b.0 * k..b.0 * k + k];
                        match op {
                            BinaryOp::Add | BinaryOp::Sub => {
                                let sign = if op == BinaryOp::Sub { -T::one() } else { T::one() };
                                for s in 0..k {
                                    ti[s] = match (act_a, act_b) {
                                        (true, true) => ta[s] + tb[s].scale(sign),
                                        (true, false) => ta[s],
                                        _ => tb[s].scale(sign),
                                    };
                                }
                            }
                            BinaryOp::Mul => {
                                for s in 0..k {
                                    ti[s] = match (act_a, act_b) {
                                        (true, true) => ta[s] * vb + va * tb[s],
                                        (true, false) => ta[s] * vb,
                                        _ => va * tb[s],
                                    };
                                }
                            }
                            BinaryOp::Div => {
                                let inv_b = vb.recip()?;
                                for s in 0..k {
                                    let num = match (act_a, act_b) {
                                        (true, true) => ta[s] - v * tb[s],
                                        (true, false) => ta[s],
                                        _ => -(v * tb[s]),
                                    };
                                    ti[s] = num * inv_b;
                                }
                            }
                        }
                        active[i] = true;
                    }
                    v
                }
            };
            vals.push(v);
        }

        let rows = self.outputs.len();
        let mut data = Vec::with_capacity(rows * k);
        for o in &self.outputs {
            data.extend_from_slice(&tan[o.0 * k..o.0 * k + k]);
        }
        Ok(JacobianColumns {
            values: self.outputs.iter().map(|o| vals[o.0]).collect(),
            rows,
            cols: k,
            data,
        })
    }

    /// Interval Jacobian blocks (outputs × slot length) for each slot in `wrt`.
    pub fn eval_jacobian_interval<T: Real>(
        &self,
        inputs: &[&[Interval<T>]],
        wrt: &[usize],
    ) -> Result<Vec<IntervalTensor<T>>> {
        if let Some(bad) = wrt.iter().find(|&&s| s >= self.slots.len()) {
            return Err(Error::ShapeMismatch(format!("no input slot {bad}")));
        }
        let seeds: Vec<(usize, usize)> =
            wrt.iter().flat_map(|&s| (0..self.slots[s].len).map(move |i| (s, i))).collect();
        let cols = self.jacobian_columns(inputs, &seeds)?;
        let m = self.outputs.len();
        let mut out = Vec::with_capacity(wrt.len());
        let mut offset = 0;
        for &s in wrt {
            let len = self.slots[s].len;
            let mut data = Vec::with_capacity(m * len);
            for r in 0..m {
                for c in 0..len {
                    data.push(cols.get(r, offset + c));
                }
            }
            out.push(IntervalTensor::from_intervals(vec![m, len], data)?);
            offset += len;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn example_graph() -> ExprGraph {
        let b = GraphBuilder::new(&[("x", 2)]);
        let x = b.input("x").unwrap();
        let s = x[0] + x[1];
        b.build(&[s.powi(2), s + 2.0 * x[0] * x[1]]).unwrap()
    }

    fn boxed(l: f64, u: f64) -> Interval {
        Interval::new(l, u).unwrap()
    }

    fn close(a: Interval, l: f64, u: f64) -> bool {
        (a.lower - l).abs() < 1e-12 && (a.upper - u).abs() < 1e-12
    }

    #[test]
    fn example_real_evaluation() {
        let y = example_graph().eval_real(&[&[0.1, 0.1][..]]).unwrap();
        assert!((y[0] - 0.04).abs() < 1e-15);
        assert!((y[1] - 0.22).abs() < 1e-15);
    }

    #[test]
    fn example_natural_inclusion() {
        let x = [boxed(-0.1, 0.1); 2];
        let y = example_graph().eval_interval(&[&x[..]]).unwrap();
        assert!(close(y[0], 0.0, 0.04));
        assert!(close(y[1], -0.22, 0.22));
    }

    #[test]
    fn dependency_effect_of_self_subtraction() {
        let b = GraphBuilder::new(&[("x", 1)]);
        let x = b.input("x").unwrap()[0];
        let g = b.build(&[x - x]).unwrap();
        assert_eq!(g.eval_interval(&[&[boxed(0.0, 1.0)][..]]).unwrap()[0], boxed(-1.0, 1.0));
    }

    #[test]
    fn example_interval_jacobian() {
        let g = example_graph();
        let x = [boxed(-0.1, 0.1); 2];
        let j = &g.eval_jacobian_interval(&[&x[..]], &[0]).unwrap()[0];
        assert_eq!(j.shape(), &[2, 2]);
        assert!(close(*j.get(&[0, 0]).unwrap(), -0.4, 0.4));
        assert!(close(*j.get(&[0, 1]).unwrap(), -0.4, 0.4));
        assert!(close(*j.get(&[1, 0]).unwrap(), 0.8, 1.2));
        assert!(close(*j.get(&[1, 1]).unwrap(), 0.8, 1.2));

        let thin = [Interval::point(0.0); 2];
        let j = &g.eval_jacobian_interval(&[&thin[..]], &[0]).unwrap()[0];
        let want = [0.0, 0.0, 1.0, 1.0];
        for (iv, w) in j.data().iter().zip(want) {
            assert!(iv.is_thin() && iv.lower == w);
        }
    }

    #[test]
    fn identity_jacobian_is_thin_identity() {
        let b = GraphBuilder::new(&[("x", 3)]);
        let x = b.input("x").unwrap();
        let g = b.build(&x).unwrap();
        let bx = [boxed(-1.0, 2.0); 3];
        let j = &g.eval_jacobian_interval(&[&bx[..]], &[0]).unwrap()[0];
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_eq!(*j.get(&[r, c]).unwrap(), Interval::point(want));
            }
        }
    }

    #[test]
    fn abs_through_zero_is_not_differentiable() {
        let b = GraphBuilder::new(&[("x", 1), ("y", 1)]);
        let x = b.input("x").unwrap()[0];
        let y = b.input("y").unwrap()[0];
        let g = b.build(&[x.abs() + y]).unwrap();
        let xs = [boxed(-1.0, 1.0)];
        let ys = [boxed(0.0, 1.0)];
        let err = g.eval_jacobian_interval(&[&xs[..], &ys[..]], &[0]).unwrap_err();
        assert_eq!(err, Error::NonDifferentiable("abs"));
        // not on the differentiated path
        assert!(g.eval_jacobian_interval(&[&xs[..], &ys[..]], &[1]).is_ok());
    }

    #[test]
    fn domain_errors_propagate() {
        let b = GraphBuilder::new(&[("x", 1)]);
        let x = b.input("x").unwrap()[0];
        let g = b.build(&[x.sqrt()]).unwrap();
        assert!(matches!(g.eval_real(&[&[-1.0][..]]), Err(Error::Domain { op: "sqrt", .. })));
        assert!(g.eval_interval(&[&[boxed(-1.0, 1.0)][..]]).is_err());
    }

    #[test]
    fn context_binds_by_name() {
        let g = example_graph();
        let ctx = EvalContext::new(&g).bind("x", vec![0.1, 0.1]).unwrap();
        let y = g.eval_real(&ctx.inputs().unwrap()).unwrap();
        assert!((y[1] - 0.22).abs() < 1e-15);
        assert!(EvalContext::new(&g).bind("x", vec![0.1]).is_err());
        assert!(EvalContext::<f64>::new(&g).inputs().is_err());
        assert!(ctx.clone().bind("x", vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn inflation_widens() {
        let g = example_graph();
        let x = [boxed(-0.1, 0.1); 2];
        let plain = g.eval_interval(&[&x[..]]).unwrap();
        let wide = g
            .eval_interval_with(&[&x[..]], EvalOptions { inflate_ulps: Some(4) })
            .unwrap();
        for (p, w) in plain.iter().zip(&wide) {
            assert!(p.subseteq(w) && w.lower < p.lower);
        }
    }
}
