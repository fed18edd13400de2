//! Expression graphs: an explicit DAG of scalar primitives over named vector
//! input slots, with real, interval, and interval-Jacobian interpreters.
//!
//! Graphs are built either with [`GraphBuilder`] (operator overloading on
//! [`Var`]) or parsed from the textual form in [`parse`].

mod eval;
pub mod parse;

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{BinaryOp, UnaryOp};

pub use eval::{EvalContext, EvalOptions, JacobianColumns};
pub use parse::{parse_graph, to_text};

/// A named vector input of fixed length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub len: usize,
}

impl SlotSpec {
    pub fn new(name: impl Into<String>, len: usize) -> Self {
        SlotSpec { name: name.into(), len }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    Input { slot: usize, index: usize },
    Const(f64),
    Unary(UnaryOp, NodeId),
    Binary(BinaryOp, NodeId, NodeId),
}

/// Immutable, validated DAG. Nodes are stored in topological order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprGraph {
    slots: Vec<SlotSpec>,
    nodes: Vec<Node>,
    outputs: Vec<NodeId>,
}

impl ExprGraph {
    /// Validates and wraps a node list.
    pub fn new(slots: Vec<SlotSpec>, nodes: Vec<Node>, outputs: Vec<NodeId>) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            let check = |id: &NodeId| {
                if id.0 >= i {
                    Err(Error::ShapeInference(format!(
                        "node {i} references node {} which does not precede it",
                        id.0
                    )))
                } else {
                    Ok(())
                }
            };
            match node {
                Node::Input { slot, index } => {
                    let spec = slots.get(*slot).ok_or_else(|| {
                        Error::ShapeInference(format!("node {i} reads unknown slot {slot}"))
                    })?;
                    if *index >= spec.len {
                        return Err(Error::ShapeInference(format!(
                            "node {i} reads {}[{index}] but the slot has length {}",
                            spec.name, spec.len
                        )));
                    }
                }
                Node::Const(c) => {
                    if !c.is_finite() {
                        return Err(Error::ShapeInference(format!("node {i} is a non-finite constant")));
                    }
                }
                Node::Unary(_, a) => check(a)?,
                Node::Binary(_, a, b) => {
                    check(a)?;
                    check(b)?;
                }
            }
        }
        if let Some(o) = outputs.iter().find(|o| o.0 >= nodes.len()) {
            return Err(Error::ShapeInference(format!("output references missing node {}", o.0)));
        }
        Ok(ExprGraph { slots, nodes, outputs })
    }

    pub fn slots(&self) -> &[SlotSpec] {
        &self.slots
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    pub fn output_len(&self) -> usize {
        self.outputs.len()
    }

    pub fn slot_index(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name == name)
    }

    /// Total input dimension over all slots.
    pub fn input_dim(&self) -> usize {
        self.slots.iter().map(|s| s.len).sum()
    }

    /// Offset of each slot in the concatenated input vector.
    pub fn slot_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.slots
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.len;
                o
            })
            .collect()
    }

    /// Graph with the same nodes and a different output list.
    pub fn with_outputs(&self, outputs: Vec<NodeId>) -> Result<Self> {
        ExprGraph::new(self.slots.clone(), self.nodes.clone(), outputs)
    }
}

/// Incremental graph construction with operator overloading on [`Var`].
///
/// ```
/// use ivreach::graph::GraphBuilder;
/// let b = GraphBuilder::new(&[("x", 2)]);
/// let x = b.input("x").unwrap();
/// let s = x[0] + x[1];
/// let g = b.build(&[s.powi(2), s + 2.0 * x[0] * x[1]]).unwrap();
/// let y = g.eval_real(&[&[0.1, 0.1][..]]).unwrap();
/// assert!((y[0] - 0.04).abs() < 1e-15 && (y[1] - 0.22).abs() < 1e-15);
/// ```
#[derive(Debug)]
pub struct GraphBuilder {
    slots: Vec<SlotSpec>,
    nodes: RefCell<Vec<Node>>,
    inputs: RefCell<HashMap<(usize, usize), NodeId>>,
}

/// Handle to a node under construction.
#[derive(Clone, Copy, Debug)]
pub struct Var<'a> {
    builder: &'a GraphBuilder,
    id: NodeId,
}

impl GraphBuilder {
    pub fn new(slots: &[(&str, usize)]) -> Self {
        Self::with_slots(slots.iter().map(|(n, l)| SlotSpec::new(*n, *l)).collect())
    }

    pub fn with_slots(slots: Vec<SlotSpec>) -> Self {
        GraphBuilder { slots, nodes: RefCell::new(Vec::new()), inputs: RefCell::new(HashMap::new()) }
    }

    pub fn slots(&self) -> &[SlotSpec] {
        &self.slots
    }

    fn push(&self, node: Node) -> NodeId {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(node);
        NodeId(nodes.len() - 1)
    }

    fn node(&self, id: NodeId) -> Node {
        self.nodes.borrow()[id.0]
    }

    fn var(&self, id: NodeId) -> Var<'_> {
        Var { builder: self, id }
    }

    /// All coordinates of a named slot.
    pub fn input(&self, name: &str) -> Result<Vec<Var<'_>>> {
        let slot = self
            .slots
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::ShapeInference(format!("unknown input slot `{name}`")))?;
        Ok((0..self.slots[slot].len).map(|i| self.input_at(slot, i)).collect())
    }

    /// A single input coordinate by slot position.
    pub fn input_at(&self, slot: usize, index: usize) -> Var<'_> {
        let id = *self
            .inputs
            .borrow_mut()
            .entry((slot, index))
            .or_insert_with(|| self.push(Node::Input { slot, index }));
        self.var(id)
    }

    pub fn constant(&self, c: f64) -> Var<'_> {
        self.var(self.push(Node::Const(c)))
    }

    pub fn unary<'a>(&'a self, op: UnaryOp, a: Var<'a>) -> Var<'a> {
        if let Node::Const(c) = self.node(a.id) {
            if let Ok(v) = op.apply_real(c) {
                if v.is_finite() {
                    return self.constant(v);
                }
            }
        }
        self.var(self.push(Node::Unary(op, a.id)))
    }

    pub fn binary<'a>(&'a self, op: BinaryOp, a: Var<'a>, b: Var<'a>) -> Var<'a> {
        if let (Node::Const(x), Node::Const(y)) = (self.node(a.id), self.node(b.id)) {
            if let Ok(v) = op.apply_real(x, y) {
                if v.is_finite() {
                    return self.constant(v);
                }
            }
        }
        self.var(self.push(Node::Binary(op, a.id, b.id)))
    }

    /// Applies a primitive by name; unknown names are rejected.
    pub fn apply<'a>(&'a self, name: &str, args: &[Var<'a>]) -> Result<Var<'a>> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::ShapeInference(format!(
                    "`{name}` takes {n} operand(s), got {}",
                    args.len()
                )))
            }
        };
        let bin = match name {
            "add" => Some(BinaryOp::Add),
            "sub" => Some(BinaryOp::Sub),
            "mul" => Some(BinaryOp::Mul),
            "div" => Some(BinaryOp::Div),
            _ => None,
        };
        if let Some(op) = bin {
            arity(2)?;
            return Ok(self.binary(op, args[0], args[1]));
        }
        let op = UnaryOp::from_name(name)
            .ok_or_else(|| Error::UnsupportedPrimitive(name.to_string()))?;
        arity(1)?;
        Ok(self.unary(op, args[0]))
    }

    /// `sum_j row[j] * v[j]` for a constant row.
    pub fn dot<'a>(&'a self, row: &[f64], v: &[Var<'a>]) -> Var<'a> {
        let mut acc: Option<Var<'a>> = None;
        for (&c, &x) in row.iter().zip(v) {
            if c == 0.0 {
                continue;
            }
            let term = if c == 1.0 { x } else { x * c };
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        acc.unwrap_or_else(|| self.constant(0.0))
    }

    pub fn build(&self, outputs: &[Var<'_>]) -> Result<ExprGraph> {
        ExprGraph::new(
            self.slots.clone(),
            self.nodes.borrow().clone(),
            outputs.iter().map(|v| v.id).collect(),
        )
    }
}

impl<'a> Var<'a> {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn builder(&self) -> &'a GraphBuilder {
        self.builder
    }

    pub fn sin(self) -> Self {
        self.builder.unary(UnaryOp::Sin, self)
    }
    pub fn cos(self) -> Self {
        self.builder.unary(UnaryOp::Cos, self)
    }
    pub fn tan(self) -> Self {
        self.builder.unary(UnaryOp::Tan, self)
    }
    pub fn atan(self) -> Self {
        self.builder.unary(UnaryOp::Atan, self)
    }
    pub fn sqrt(self) -> Self {
        self.builder.unary(UnaryOp::Sqrt, self)
    }
    pub fn exp(self) -> Self {
        self.builder.unary(UnaryOp::Exp, self)
    }
    pub fn tanh(self) -> Self {
        self.builder.unary(UnaryOp::Tanh, self)
    }
    pub fn abs(self) -> Self {
        self.builder.unary(UnaryOp::Abs, self)
    }
    pub fn powi(self, k: i32) -> Self {
        self.builder.unary(UnaryOp::PowI(k), self)
    }
}

macro_rules! var_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl<'a> $trait for Var<'a> {
            type Output = Var<'a>;
            fn $method(self, rhs: Var<'a>) -> Var<'a> {
                self.builder.binary($op, self, rhs)
            }
        }
        impl<'a> $trait<f64> for Var<'a> {
            type Output = Var<'a>;
            fn $method(self, rhs: f64) -> Var<'a> {
                let c = self.builder.constant(rhs);
                self.builder.binary($op, self, c)
            }
        }
        impl<'a> $trait<Var<'a>> for f64 {
            type Output = Var<'a>;
            fn $method(self, rhs: Var<'a>) -> Var<'a> {
                let c = rhs.builder.constant(self);
                rhs.builder.binary($op, c, rhs)
            }
        }
    };
}

var_binop!(Add, add, BinaryOp::Add);
var_binop!(Sub, sub, BinaryOp::Sub);
var_binop!(Mul, mul, BinaryOp::Mul);
var_binop!(Div, div, BinaryOp::Div);

impl<'a> Neg for Var<'a> {
    type Output = Var<'a>;
    fn neg(self) -> Var<'a> {
        self.builder.unary(UnaryOp::Neg, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_graph_outputs_inputs() {
        let b = GraphBuilder::new(&[("x", 3)]);
        let x = b.input("x").unwrap();
        let g = b.build(&x).unwrap();
        assert_eq!(g.output_len(), 3);
        assert!(g.outputs().iter().all(|o| matches!(g.nodes()[o.0], Node::Input { .. })));
    }

    #[test]
    fn constants_are_folded() {
        let b = GraphBuilder::new(&[("x", 1)]);
        let c = b.constant(2.0) * b.constant(3.0);
        let g = b.build(&[c]).unwrap();
        assert_eq!(g.nodes()[g.outputs()[0].0], Node::Const(6.0));
    }

    #[test]
    fn unsupported_primitive_is_rejected() {
        let b = GraphBuilder::new(&[("x", 1)]);
        let x = b.input("x").unwrap();
        assert!(matches!(b.apply("erf", &[x[0]]), Err(Error::UnsupportedPrimitive(_))));
        assert!(b.apply("sin", &[x[0]]).is_ok());
    }

    #[test]
    fn validation_rejects_forward_references() {
        let slots = vec![SlotSpec::new("x", 1)];
        let nodes = vec![Node::Unary(UnaryOp::Sin, NodeId(1)), Node::Input { slot: 0, index: 0 }];
        assert!(ExprGraph::new(slots.clone(), nodes, vec![NodeId(0)]).is_err());
        let nodes = vec![Node::Input { slot: 0, index: 4 }];
        assert!(ExprGraph::new(slots, nodes, vec![NodeId(0)]).is_err());
    }

    #[test]
    fn inputs_are_shared() {
        let b = GraphBuilder::new(&[("x", 1)]);
        let a = b.input("x").unwrap()[0];
        let c = b.input("x").unwrap()[0];
        assert_eq!(a.id(), c.id());
    }
}
