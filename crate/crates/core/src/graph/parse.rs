//! Textual expression form.
//!
//! ```text
//! program := expr (';' expr)*
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' integer)?
//! atom    := number | 'pi' | slot '[' integer ']' | slot | name '(' args ')' | '(' expr ')'
//! ```
//!
//! `slot` is a declared input name (`x`, `u`, `w`, `t`); indices are 0-based
//! and a bare slot name is allowed for length-1 slots. Function names are the
//! primitive names (`sin`, `cos`, `tan`, `atan`, `sqrt`, `exp`, `tanh`, `abs`,
//! `neg`) plus `pow(e, k)` for integer `k`. Each `;`-separated expression is
//! one output.

use std::fmt::Write as _;

use super::{ExprGraph, GraphBuilder, Node, NodeId, SlotSpec, Var};
use crate::error::{Error, Result};
use crate::interval::{BinaryOp, UnaryOp};

/// Parses the textual form against the given input slots.
pub fn parse_graph(src: &str, slots: Vec<SlotSpec>) -> Result<ExprGraph> {
    let b = GraphBuilder::with_slots(slots);
    let mut p = Parser { src: src.as_bytes(), pos: 0, b: &b };
    let mut outputs = Vec::new();
    loop {
        outputs.push(p.expr()?);
        p.skip_ws();
        match p.peek() {
            Some(b';') => {
                p.pos += 1;
                p.skip_ws();
                if p.peek().is_none() {
                    break;
                }
            }
            None => break,
            Some(c) => return Err(p.err(format!("unexpected `{}`", c as char))),
        }
    }
    b.build(&outputs)
}

/// Renders a graph's outputs in the textual form accepted by [`parse_graph`].
pub fn to_text(g: &ExprGraph) -> String {
    let mut out = String::new();
    for (i, o) in g.outputs().iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        write_node(g, *o, &mut out);
    }
    out
}

fn write_const(c: f64, out: &mut String) {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        let _ = write!(out, "(-{:?})", -c);
    } else {
        let _ = write!(out, "{c:?}");
    }
}

fn write_node(g: &ExprGraph, id: NodeId, out: &mut String) {
    match g.nodes()[id.0] {
        Node::Input { slot, index } => {
            let _ = write!(out, "{}[{index}]", g.slots()[slot].name);
        }
        Node::Const(c) => write_const(c, out),
        Node::Unary(UnaryOp::Neg, a) => {
            out.push_str("(-");
            write_node(g, a, out);
            out.push(')');
        }
        Node::Unary(UnaryOp::PowI(k), a) => {
            out.push_str("pow(");
            write_node(g, a, out);
            let _ = write!(out, ", {k})");
        }
        Node::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write_node(g, a, out);
            out.push(')');
        }
        Node::Binary(op, a, b) => {
            let sym = match op {
                BinaryOp::Add => " + ",
                BinaryOp::Sub => " - ",
                BinaryOp::Mul => " * ",
                BinaryOp::Div => " / ",
            };
            out.push('(');
            write_node(g, a, out);
            out.push_str(sym);
            write_node(g, b, out);
            out.push(')');
        }
    }
}

struct Parser<'s, 'b> {
    src: &'s [u8],
    pos: usize,
    b: &'b GraphBuilder,
}

impl<'s, 'b> Parser<'s, 'b> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Var<'b>> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = self.b.binary(BinaryOp::Add, lhs, rhs);
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = self.b.binary(BinaryOp::Sub, lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Var<'b>> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = self.b.binary(BinaryOp::Mul, lhs, rhs);
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = self.b.binary(BinaryOp::Div, lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn power(&mut self) -> Result<Var<'b>> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let k = self.integer()?;
            return Ok(self.b.unary(UnaryOp::PowI(k), base));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Var<'b>> {
        if self.eat(b'-') {
            let a = self.unary()?;
            return Ok(self.b.unary(UnaryOp::Neg, a));
        }
        self.power()
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse { pos: start, msg: "expected an integer".into() })
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse { pos: start, msg: "malformed number".into() })
    }

    fn ident(&mut self) -> &'s str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn atom(&mut self) -> Result<Var<'b>> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                Ok(self.b.constant(v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                let name = self.ident();
                if name == "pi" {
                    return Ok(self.b.constant(std::f64::consts::PI));
                }
                if let Some(slot) = self.b.slots().iter().position(|s| s.name == name) {
                    let len = self.b.slots()[slot].len;
                    let index = if self.eat(b'[') {
                        let i = self.integer()?;
                        self.expect(b']')?;
                        i
                    } else if len == 1 {
                        0
                    } else {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("slot `{name}` has length {len}; index it"),
                        });
                    };
                    if index < 0 || index as usize >= len {
                        return Err(Error::ShapeInference(format!(
                            "{name}[{index}] is out of range for length {len}"
                        )));
                    }
                    return Ok(self.b.input_at(slot, index as usize));
                }
                self.skip_ws();
                if self.peek() != Some(b'(') {
                    return Err(Error::Parse { pos: start, msg: format!("unknown name `{name}`") });
                }
                self.pos += 1;
                let arg = self.expr()?;
                if name == "pow" {
                    self.expect(b',')?;
                    let k = self.integer()?;
                    self.expect(b')')?;
                    return Ok(self.b.unary(UnaryOp::PowI(k), arg));
                }
                self.expect(b')')?;
                self.b.apply(name, &[arg])
            }
            Some(c) => Err(self.err(format!("unexpected `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
