//! Feedforward ReLU networks, interval bound propagation and affine relaxations.

mod closed_loop;
mod crown;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::real::Real;

pub use closed_loop::{clnn_inclusion, ClosedLoopInclusion};
pub use crown::{crown, crown_with, fastlin, AlphaRule, CrownBounds, FastlinBounds};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

/// Affine map `W a + b` followed by an activation. `weights` is row-major
/// with one row per output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct NeuralNetwork {
    layers: Vec<Layer>,
}

/// On-disk form of a network.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    layers: Vec<Layer>,
}

impl TryFrom<NetworkDoc> for NeuralNetwork {
    type Error = Error;
    fn try_from(doc: NetworkDoc) -> Result<Self> {
        NeuralNetwork::new(doc.layers)
    }
}

impl From<NeuralNetwork> for NetworkDoc {
    fn from(n: NeuralNetwork) -> Self {
        NetworkDoc { layers: n.layers }
    }
}

impl NeuralNetwork {
    /// Validates dimension chaining and finiteness.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Schema("a network needs at least one layer".into()));
        }
        let mut prev: Option<usize> = None;
        for (k, l) in layers.iter().enumerate() {
            if l.weights.is_empty() || l.in_dim() == 0 {
                return Err(Error::DimensionMismatch(format!("layer {k} has empty weights")));
            }
            if l.weights.iter().any(|r| r.len() != l.in_dim()) {
                return Err(Error::DimensionMismatch(format!("layer {k} has ragged weight rows")));
            }
            if l.bias.len() != l.out_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {k} has {} weight rows but a bias of length {}",
                    l.out_dim(),
                    l.bias.len()
                )));
            }
            if let Some(p) = prev {
                if p != l.in_dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "layer {k} takes {} inputs but the previous layer emits {p}",
                        l.in_dim()
                    )));
                }
            }
            if l.weights.iter().flatten().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("layer {k} has non-finite parameters")));
            }
            prev = Some(l.out_dim());
        }
        Ok(NeuralNetwork { layers })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        NeuralNetwork::new(doc.layers)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let doc: NetworkDoc = toml::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        NeuralNetwork::new(doc.layers)
    }

    /// Loads a `.json` or `.toml` weights document.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("networks serialize")
    }

    /// Random ReLU network with the given widths (input first). Hidden layers
    /// use ReLU, the last layer is affine. Weights are uniform in
    /// `±scale·sqrt(6 / (fan_in + fan_out))`, biases uniform in `±0.1·scale`.
    pub fn random(widths: &[usize], scale: f64, rng: &mut impl Rng) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::DimensionMismatch("need at least input and output widths".into()));
        }
        let mut layers = Vec::with_capacity(widths.len() - 1);
        for (k, pair) in widths.windows(2).enumerate() {
            let (fi, fo) = (pair[0], pair[1]);
            let lim = scale * (6.0 / (fi + fo) as f64).sqrt();
            let weights =
                (0..fo).map(|_| (0..fi).map(|_| rng.gen_range(-lim..=lim)).collect()).collect();
            let bias = (0..fo).map(|_| rng.gen_range(-0.1..=0.1) * scale).collect();
            let activation =
                if k + 2 == widths.len() { Activation::Identity } else { Activation::Relu };
            layers.push(Layer { weights, bias, activation });
        }
        NeuralNetwork::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().expect("nonempty").out_dim()
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.in_dim() {
            return Err(Error::DimensionMismatch(format!(
                "network takes {} inputs, got {len}",
                self.in_dim()
            )));
        }
        Ok(())
    }

    pub fn forward<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x.len())?;
        let mut a = x.to_vec();
        for l in &self.layers {
            a = l
                .weights
                .iter()
                .zip(&l.bias)
                .map(|(row, &b)| {
                    let z = row.iter().zip(&a).fold(T::from_f64(b), |acc, (&w, &v)| {
                        acc + T::from_f64(w) * v
                    });
                    match l.activation {
                        Activation::Relu => z.max_v(T::zero()),
                        Activation::Identity => z,
                    }
                })
                .collect();
        }
        Ok(a)
    }

    /// Pre-activation bounds of every layer by interval bound propagation.
    pub fn ibp_preactivations(&self, x: &[Interval]) -> Result<Vec<Vec<Interval>>> {
        self.check_input(x.len())?;
        let mut out = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for l in &self.layers {
            let z: Vec<Interval> = l
                .weights
                .iter()
                .zip(&l.bias)
                .map(|(row, &b)| {
                    row.iter().zip(&a).fold(Interval::point(b), |acc, (&w, v)| acc + v.scale(w))
                })
                .collect();
            a = z.iter().map(|&zi| activate(l.activation, zi)).collect();
            out.push(z);
        }
        Ok(out)
    }
}

fn activate(act: Activation, z: Interval) -> Interval {
    match act {
        Activation::Relu => Interval::new_unchecked(z.lower.max(0.0), z.upper.max(0.0)),
        Activation::Identity => z,
    }
}

/// Interval bound propagation: the natural inclusion function of the network.
pub fn nn_ibp(net: &NeuralNetwork, x: &[Interval]) -> Result<Vec<Interval>> {
    let pre = net.ibp_preactivations(x)?;
    let last = net.layers.last().expect("nonempty");
    Ok(pre.last().expect("nonempty").iter().map(|&z| activate(last.activation, z)).collect())
}
