//! Backward affine bound propagation (CROWN and Fast-Lin).

use serde::{Deserialize, Serialize};

use super::{Activation, NeuralNetwork};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// Lower-slope choice for unstable ReLUs in CROWN.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaRule {
    /// Per output bound, the tighter of `Adaptive` and `Zero` on the box.
    /// Never looser than interval bound propagation.
    #[default]
    Auto,
    /// Slope 1 when `|u| > |l|`, else 0.
    Adaptive,
    Zero,
    One,
}

/// `C̲x + d̲ ≤ NN(x) ≤ C̄x + d̄` on the input box. Matrices are row-major,
/// one row per network output.
#[derive(Clone, Debug, PartialEq)]
pub struct CrownBounds {
    pub c_lower: Vec<Vec<f64>>,
    pub c_upper: Vec<Vec<f64>>,
    pub d_lower: Vec<f64>,
    pub d_upper: Vec<f64>,
}

/// `Cx + d̲ ≤ NN(x) ≤ Cx + d̄` on the input box.
#[derive(Clone, Debug, PartialEq)]
pub struct FastlinBounds {
    pub c: Vec<Vec<f64>>,
    pub d_lower: Vec<f64>,
    pub d_upper: Vec<f64>,
}

fn concretize(c: &[f64], d: f64, x: &[Interval], upper: bool) -> f64 {
    c.iter().zip(x).fold(d, |acc, (&ci, xi)| {
        let pick = if (ci >= 0.0) == upper { xi.upper } else { xi.lower };
        acc + ci * pick
    })
}

impl CrownBounds {
    /// Interval enclosure of the outputs implied by the affine bounds.
    pub fn output_box(&self, x: &[Interval]) -> Vec<Interval> {
        (0..self.d_lower.len())
            .map(|r| {
                let lo = concretize(&self.c_lower[r], self.d_lower[r], x, false);
                let hi = concretize(&self.c_upper[r], self.d_upper[r], x, true);
                Interval::new_unchecked(lo, hi)
            })
            .collect()
    }
}

impl FastlinBounds {
    pub fn output_box(&self, x: &[Interval]) -> Vec<Interval> {
        (0..self.d_lower.len())
            .map(|r| {
                let lo = concretize(&self.c[r], self.d_lower[r], x, false);
                let hi = concretize(&self.c[r], self.d_upper[r], x, true);
                Interval::new_unchecked(lo, hi)
            })
            .collect()
    }
}

/// Linear relaxation `lo_s·z + lo_t ≤ relu(z) ≤ up_s·z + up_t` on `[l, u]`.
#[derive(Clone, Copy)]
struct Relax {
    lo_s: f64,
    lo_t: f64,
    up_s: f64,
    up_t: f64,
}

#[derive(Clone, Copy)]
enum Mode {
    Crown(AlphaRule),
    Fastlin,
}

fn relax(z: Interval, mode: Mode) -> Relax {
    let (l, u) = (z.lower, z.upper);
    if l >= 0.0 {
        return Relax { lo_s: 1.0, lo_t: 0.0, up_s: 1.0, up_t: 0.0 };
    }
    if u <= 0.0 {
        return Relax { lo_s: 0.0, lo_t: 0.0, up_s: 0.0, up_t: 0.0 };
    }
    let s = u / (u - l);
    let t = -u * l / (u - l);
    let lo_s = match mode {
        Mode::Fastlin => s,
        Mode::Crown(AlphaRule::Adaptive) => {
            if u.abs() > l.abs() {
                1.0
            } else {
                0.0
            }
        }
        Mode::Crown(AlphaRule::Zero | AlphaRule::Auto) => 0.0,
        Mode::Crown(AlphaRule::One) => 1.0,
    };
    Relax { lo_s, lo_t: 0.0, up_s: s, up_t: t }
}

/// One backward pass; returns the input-space coefficients and offsets of
/// the upper (or lower) bounding functions of every output.
fn backward(
    net: &NeuralNetwork,
    relaxations: &[Option<Vec<Relax>>],
    upper: bool,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let m = net.out_dim();
    let mut lam: Vec<Vec<f64>> =
        (0..m).map(|r| (0..m).map(|c| if r == c { 1.0 } else { 0.0 }).collect()).collect();
    let mut d = vec![0.0; m];
    for (layer, rel) in net.layers().iter().zip(relaxations).rev() {
        if let Some(rel) = rel {
            for (row, dr) in lam.iter_mut().zip(d.iter_mut()) {
                for (c, r) in row.iter_mut().zip(rel) {
                    let use_upper_line = (*c >= 0.0) == upper;
                    let (s, t) = if use_upper_line { (r.up_s, r.up_t) } else { (r.lo_s, r.lo_t) };
                    *dr += *c * t;
                    *c *= s;
                }
            }
        }
        let n_in = layer.in_dim();
        lam = lam
            .iter()
            .zip(d.iter_mut())
            .map(|(row, dr)| {
                let mut next = vec![0.0; n_in];
                for ((&c, w_row), &b) in row.iter().zip(&layer.weights).zip(&layer.bias) {
                    if c == 0.0 {
                        continue;
                    }
                    *dr += c * b;
                    for (nj, &w) in next.iter_mut().zip(w_row) {
                        *nj += c * w;
                    }
                }
                next
            })
            .collect();
    }
    (lam, d)
}

fn relaxations(net: &NeuralNetwork, x: &[Interval], mode: Mode) -> Result<Vec<Option<Vec<Relax>>>> {
    let pre = net.ibp_preactivations(x)?;
    Ok(net
        .layers()
        .iter()
        .zip(&pre)
        .map(|(l, z)| match l.activation {
            Activation::Relu => Some(z.iter().map(|&zi| relax(zi, mode)).collect()),
            Activation::Identity => None,
        })
        .collect())
}

/// CROWN bounds with the default lower-slope rule ([`AlphaRule::Auto`]).
pub fn crown(net: &NeuralNetwork, x: &[Interval]) -> Result<CrownBounds> {
    crown_with(net, x, AlphaRule::Auto)
}

/// CROWN bounds; pre-activation bounds come from interval bound propagation.
pub fn crown_with(net: &NeuralNetwork, x: &[Interval], alpha: AlphaRule) -> Result<CrownBounds> {
    if alpha == AlphaRule::Auto {
        let mut a = crown_with(net, x, AlphaRule::Adaptive)?;
        let z = crown_with(net, x, AlphaRule::Zero)?;
        for r in 0..a.d_lower.len() {
            if concretize(&z.c_upper[r], z.d_upper[r], x, true)
                < concretize(&a.c_upper[r], a.d_upper[r], x, true)
            {
                a.c_upper[r] = z.c_upper[r].clone();
                a.d_upper[r] = z.d_upper[r];
            }
            if concretize(&z.c_lower[r], z.d_lower[r], x, false)
                > concretize(&a.c_lower[r], a.d_lower[r], x, false)
            {
                a.c_lower[r] = z.c_lower[r].clone();
                a.d_lower[r] = z.d_lower[r];
            }
        }
        return Ok(a);
    }
    let rel = relaxations(net, x, Mode::Crown(alpha))?;
    let (c_upper, d_upper) = backward(net, &rel, true);
    let (c_lower, d_lower) = backward(net, &rel, false);
    Ok(CrownBounds { c_lower, c_upper, d_lower, d_upper })
}

/// Fast-Lin bounds: both relaxation lines share the chord slope.
pub fn fastlin(net: &NeuralNetwork, x: &[Interval]) -> Result<FastlinBounds> {
    let rel = relaxations(net, x, Mode::Fastlin)?;
    let (c, d_upper) = backward(net, &rel, true);
    let (c_lo, d_lower) = backward(net, &rel, false);
    if c != c_lo {
        return Err(Error::ShapeMismatch("Fast-Lin slopes diverged".into()));
    }
    Ok(FastlinBounds { c, d_lower, d_upper })
}
