//! Random expression graphs, boxes and networks shared by the test targets.
#![allow(dead_code)]

use ivreach::neural::{Activation, Layer};
use ivreach::{ExprGraph, GraphBuilder, Interval, NeuralNetwork, Var};
use rand::Rng;

fn leaf<'a>(b: &'a GraphBuilder, xs: &[Var<'a>], rng: &mut impl Rng) -> Var<'a> {
    if rng.gen_bool(0.75) {
        xs[rng.gen_range(0..xs.len())]
    } else {
        b.constant(rng.gen_range(-2.0..2.0))
    }
}

/// Random expression of depth at most `depth`. Primitives with restricted
/// domains only receive arguments inside their domain, so every generated
/// graph evaluates on every box.
fn expr<'a>(
    b: &'a GraphBuilder,
    xs: &[Var<'a>],
    pool: &mut Vec<Var<'a>>,
    depth: usize,
    rng: &mut impl Rng,
) -> Var<'a> {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(b, xs, rng);
    }
    if !pool.is_empty() && rng.gen_bool(0.15) {
        return pool[rng.gen_range(0..pool.len())];
    }
    let d = depth - 1;
    let v = match rng.gen_range(0..15) {
        0 => expr(b, xs, pool, d, rng) + expr(b, xs, pool, d, rng),
        1 => expr(b, xs, pool, d, rng) - expr(b, xs, pool, d, rng),
        2 | 3 => expr(b, xs, pool, d, rng) * expr(b, xs, pool, d, rng),
        4 => {
            let den = expr(b, xs, pool, d, rng).powi(2) + rng.gen_range(0.5..2.0);
            expr(b, xs, pool, d, rng) / den
        }
        5 => expr(b, xs, pool, d, rng).sin(),
        6 => expr(b, xs, pool, d, rng).cos(),
        7 => (expr(b, xs, pool, d, rng).atan() * 0.9).tan(),
        8 => expr(b, xs, pool, d, rng).atan(),
        9 => (expr(b, xs, pool, d, rng).powi(2) + rng.gen_range(0.1..1.0)).sqrt(),
        10 => expr(b, xs, pool, d, rng).tanh().exp(),
        11 => expr(b, xs, pool, d, rng).tanh(),
        12 => expr(b, xs, pool, d, rng).abs(),
        13 => -expr(b, xs, pool, d, rng),
        _ => {
            let k = rng.gen_range(2..=3);
            expr(b, xs, pool, d, rng).powi(k)
        }
    };
    pool.push(v);
    v
}

/// Random graph over one slot `x` of length `n` with `m` outputs.
pub fn random_graph(n: usize, m: usize, max_depth: usize, rng: &mut impl Rng) -> ExprGraph {
    let b = GraphBuilder::new(&[("x", n)]);
    let xs = b.input("x").expect("slot exists");
    let mut pool = Vec::new();
    let outs: Vec<Var> = (0..m).map(|_| expr(&b, &xs, &mut pool, max_depth, rng)).collect();
    b.build(&outs).expect("generated graph is well formed")
}

pub fn random_box(n: usize, max_width: f64, rng: &mut impl Rng) -> Vec<Interval> {
    (0..n)
        .map(|_| {
            let c = rng.gen_range(-1.5..1.5);
            let r = rng.gen_range(0.0..max_width / 2.0);
            Interval::new(c - r, c + r).expect("ordered")
        })
        .collect()
}

pub fn sample(bx: &[Interval], rng: &mut impl Rng) -> Vec<f64> {
    bx.iter()
        .map(|i| if i.is_thin() { i.lower } else { rng.gen_range(i.lower..=i.upper) })
        .collect()
}

/// Distance of `v` outside `iv`, relative to `max(1, |v|)`.
pub fn rel_excess(v: f64, iv: &Interval) -> f64 {
    (iv.lower - v).max(v - iv.upper).max(0.0) / v.abs().max(1.0)
}

/// Random ReLU network: `depth` affine layers, hidden widths in `1..=max_width`.
pub fn random_network(
    n_in: usize,
    n_out: usize,
    depth: usize,
    max_width: usize,
    rng: &mut impl Rng,
) -> NeuralNetwork {
    let mut widths = vec![n_in];
    for _ in 1..depth {
        widths.push(rng.gen_range(1..=max_width));
    }
    widths.push(n_out);
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(k, w)| Layer {
            weights: (0..w[1]).map(|_| (0..w[0]).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
            bias: (0..w[1]).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            activation: if k + 2 == widths.len() { Activation::Identity } else { Activation::Relu },
        })
        .collect();
    NeuralNetwork::new(layers).expect("consistent shapes")
}
