//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;
use std::sync::Arc;

use ivreach::systems::{vehicle, vehicle_network, VEHICLE_LR};
use ivreach::{clnn_inclusion, ifemb, EmbeddingSystem, ExprGraph, GraphBuilder, Interval, IntervalTensor, Result};

/// `f(x) = ((x₁ + x₂)², x₁ + x₂ + 2x₁x₂)`.
pub fn two_input_graph() -> Result<ExprGraph> {
    let b = GraphBuilder::new(&[("x", 2)]);
    let x = b.input("x")?;
    let f1 = (x[0] + x[1]).powi(2);
    let f2 = x[0] + x[1] + 2.0 * x[0] * x[1];
    b.build(&[f1, f2])
}

/// Vehicle closed with the seeded 4-16-16-2 controller.
pub fn vehicle_embedding() -> Result<EmbeddingSystem> {
    let sys = vehicle(VEHICLE_LR)?;
    let net = Arc::new(vehicle_network(0, 0.05)?);
    ifemb(&sys, Arc::new(clnn_inclusion(&sys, net, None, None)?))
}

pub fn vehicle_initial_box() -> Result<IntervalTensor> {
    let h = -2.0 * PI / 3.0;
    IntervalTensor::vector(&[7.9, 6.9, h - 0.01, 1.99], &[8.1, 7.1, h + 0.01, 2.01])
}

pub fn vehicle_disturbance() -> Vec<Interval> {
    vec![Interval::centered(0.0, 0.01)]
}
