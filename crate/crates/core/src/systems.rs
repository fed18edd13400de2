//! Built-in benchmark systems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::System;
use crate::error::Result;
use crate::graph::GraphBuilder;
use crate::neural::NeuralNetwork;

/// Distance from the rear axle to the center of mass of the vehicle.
pub const VEHICLE_LR: f64 = 1.5;

/// Kinematic bicycle with state `(p_x, p_y, φ, v)`, inputs `(a, δ)` and an
/// additive acceleration disturbance `w`:
///
/// ```text
/// ṗ_x = v cos(φ + β),  ṗ_y = v sin(φ + β),  φ̇ = v/ℓ_r sin β,  v̇ = a + w,
/// β = atan(tan(δ)/2)
/// ```
pub fn vehicle(lr: f64) -> Result<System> {
    let b = GraphBuilder::new(&[("x", 4), ("u", 2), ("w", 1)]);
    let x = b.input("x")?;
    let u = b.input("u")?;
    let w = b.input("w")?;
    let beta = (u[1].tan() / 2.0).atan();
    let heading = x[2] + beta;
    let f = [
        x[3] * heading.cos(),
        x[3] * heading.sin(),
        x[3] / lr * beta.sin(),
        u[0] + w[0],
    ];
    System::new(b.build(&f)?)
}

/// Pendulum parameters `(m, l, b, g)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumParams {
    pub m: f64,
    pub l: f64,
    pub b: f64,
    pub g: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        PendulumParams { m: 0.15, l: 0.5, b: 0.1, g: 9.81 }
    }
}

/// Forced damped pendulum with a multiplicative torque disturbance:
/// `ẋ = (x₂, ((1 + w)u − b x₂)/(m l²) − (g/l) sin x₁)`.
pub fn pendulum(p: PendulumParams) -> Result<System> {
    let b = GraphBuilder::new(&[("x", 2), ("u", 1), ("w", 1)]);
    let x = b.input("x")?;
    let u = b.input("u")?;
    let w = b.input("w")?;
    let f = [
        x[1],
        ((1.0 + w[0]) * u[0] - p.b * x[1]) / (p.m * p.l * p.l) - (p.g / p.l) * x[0].sin(),
    ];
    System::new(b.build(&f)?)
}

/// `ẋ = (x₂ + w, u)`.
pub fn double_integrator() -> Result<System> {
    let b = GraphBuilder::new(&[("x", 2), ("u", 1), ("w", 1)]);
    let x = b.input("x")?;
    let u = b.input("u")?;
    let w = b.input("w")?;
    System::new(b.build(&[x[1] + w[0], u[0]])?)
}

/// Random 4-16-16-2 ReLU controller for the vehicle. The output layer is
/// scaled by `output_scale` so steering stays well inside `(−π/2, π/2)`.
pub fn vehicle_network(seed: u64, output_scale: f64) -> Result<NeuralNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = NeuralNetwork::random(&[4, 16, 16, 2], 1.0, &mut rng)?;
    let mut layers = net.layers().to_vec();
    let last = layers.last_mut().expect("three layers");
    for row in &mut last.weights {
        for v in row.iter_mut() {
            *v *= output_scale;
        }
    }
    for v in &mut last.bias {
        *v *= output_scale;
    }
    NeuralNetwork::new(layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vehicle_field_values() {
        let s = vehicle(VEHICLE_LR).unwrap();
        let x = [1.0, 2.0, 0.3, 2.0];
        let u = [0.5, 0.2];
        let f = s.f(0.0, &x, &u, &[0.1]).unwrap();
        let beta = (0.2f64.tan() / 2.0).atan();
        let want = [
            2.0 * (0.3 + beta).cos(),
            2.0 * (0.3 + beta).sin(),
            2.0 / VEHICLE_LR * beta.sin(),
            0.6,
        ];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pendulum_field_values() {
        let p = PendulumParams::default();
        let s = pendulum(p).unwrap();
        let f = s.f(0.0, &[0.4, -1.0], &[0.2], &[0.01]).unwrap();
        let want = (1.01 * 0.2 + 0.1) / (0.15 * 0.25) - 9.81 / 0.5 * 0.4f64.sin();
        assert_eq!(f[0], -1.0);
        assert!((f[1] - want).abs() < 1e-12);
    }

    #[test]
    fn vehicle_network_shape() {
        let n = vehicle_network(0, 0.05).unwrap();
        assert_eq!((n.in_dim(), n.out_dim(), n.layers().len()), (4, 2, 3));
    }
}
