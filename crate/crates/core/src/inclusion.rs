//! Inclusion functions built from expression graphs.
//!
//! Three constructors are provided: [`natif`] (natural), [`jacif`]
//! (Jacobian-based mean value form) and [`mjacif`] (mixed Jacobian-based,
//! columns tightened along an [`Ordering`]). [`mjacm`] exposes the mixed
//! Jacobian matrices themselves for closed-loop constructions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ExprGraph, SlotSpec};
use crate::interval::{Interval, IntervalTensor};
use crate::real::Real;

/// A map from interval inputs (one slice per slot) to an enclosure of the image.
pub trait InclusionFn<T: Real = f64>: Send + Sync {
    fn slots(&self) -> &[SlotSpec];

    fn output_len(&self) -> usize;

    fn eval(&self, inputs: &[&[Interval<T>]]) -> Result<Vec<Interval<T>>>;

    /// Nested boxes give nested outputs.
    fn is_monotone(&self) -> bool {
        false
    }

    /// Degenerate boxes give exact values.
    fn is_thin(&self) -> bool {
        false
    }

    /// Convenience wrapper over tensors; returns a vector-shaped tensor.
    fn eval_tensors(&self, inputs: &[&IntervalTensor<T>]) -> Result<IntervalTensor<T>> {
        let slices: Vec<&[Interval<T>]> = inputs.iter().map(|t| t.data()).collect();
        Ok(IntervalTensor::from_vec(self.eval(&slices)?))
    }
}

/// A permutation of the concatenated input coordinates (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::InvalidOrdering(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Ordering(perm))
    }

    pub fn identity(n: usize) -> Self {
        Ordering((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<usize>> for Ordering {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Ordering::new(v)
    }
}

impl From<Ordering> for Vec<usize> {
    fn from(o: Ordering) -> Self {
        o.0
    }
}

/// Endpoint selector for corner centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// How to pick the expansion point `x̊` inside the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Center {
    Midpoint,
    /// One side per concatenated coordinate.
    Corner(Vec<Side>),
    /// Explicit point over the concatenated coordinates.
    Point(Vec<f64>),
}

impl Center {
    /// The lower corner of an `n`-dimensional box.
    pub fn lower_corner(n: usize) -> Self {
        Center::Corner(vec![Side::Lower; n])
    }

    fn check_len(&self, n: usize) -> Result<()> {
        let len = match self {
            Center::Midpoint => return Ok(()),
            Center::Corner(s) => s.len(),
            Center::Point(p) => p.len(),
        };
        if len != n {
            return Err(Error::ShapeMismatch(format!(
                "center has {len} coordinates, inputs have {n}"
            )));
        }
        Ok(())
    }

    /// Resolves to a point of the (flattened) box.
    pub fn resolve<T: Real>(&self, flat: &[Interval<T>]) -> Result<Vec<T>> {
        self.check_len(flat.len())?;
        match self {
            Center::Midpoint => Ok(flat.iter().map(|i| i.midpoint()).collect()),
            Center::Corner(sides) => Ok(flat
                .iter()
                .zip(sides)
                .map(|(i, s)| match s {
                    Side::Lower => i.lower,
                    Side::Upper => i.upper,
                })
                .collect()),
            Center::Point(p) => {
                let c: Vec<T> = p.iter().map(|&v| T::from_f64(v)).collect();
                check_center(&c, flat)?;
                Ok(c)
            }
        }
    }
}

/// Checks `center ∈ box` coordinate-wise.
pub fn check_center<T: Real>(center: &[T], flat: &[Interval<T>]) -> Result<()> {
    if center.len() != flat.len() {
        return Err(Error::ShapeMismatch(format!(
            "center has {} coordinates, box has {}",
            center.len(),
            flat.len()
        )));
    }
    for (k, (c, i)) in center.iter().zip(flat).enumerate() {
        let v = c.value();
        if !(i.lower.value() <= v && v <= i.upper.value()) {
            return Err(Error::CenterOutsideBox(k));
        }
    }
    Ok(())
}

fn flatten<T: Real>(inputs: &[&[Interval<T>]]) -> Vec<Interval<T>> {
    inputs.iter().flat_map(|s| s.iter().copied()).collect()
}

fn split<'a, T>(flat: &'a [T], slots: &[SlotSpec]) -> Vec<&'a [T]> {
    let mut out = Vec::with_capacity(slots.len());
    let mut off = 0;
    for s in slots {
        out.push(&flat[off..off + s.len]);
        off += s.len;
    }
    out
}

fn intersect_into<T: Real>(acc: &mut Option<Vec<Interval<T>>>, next: Vec<Interval<T>>) {
    match acc {
        None => *acc = Some(next),
        Some(a) => {
            for (x, y) in a.iter_mut().zip(next) {
                *x = x
                    .intersect(&y)
                    .expect("intersection of sound enclosures cannot be empty");
            }
        }
    }
}

/// `Σ_j M_ij ([x_j] − x̊_j) + f(x̊)_i` for a row-major `m × n` matrix.
fn affine_form<T: Real>(
    m: &[Interval<T>],
    flat: &[Interval<T>],
    center: &[T],
    fc: &[Interval<T>],
) -> Vec<Interval<T>> {
    let n = flat.len();
    fc.iter()
        .enumerate()
        .map(|(i, f)| {
            let mut acc = *f;
            for j in 0..n {
                let d = flat[j].shift(-center[j]);
                acc = acc + m[i * n + j] * d;
            }
            acc
        })
        .collect()
}

fn eval_at_point<T: Real>(g: &ExprGraph, center: &[T]) -> Result<Vec<Interval<T>>> {
    let pts: Vec<Interval<T>> = center.iter().map(|&c| Interval::point(c)).collect();
    g.eval_interval(&split(&pts, g.slots()))
}

/// Natural inclusion function.
#[derive(Clone, Debug)]
pub struct Natif {
    graph: Arc<ExprGraph>,
}

/// Natural inclusion function of `g`.
pub fn natif(g: impl Into<Arc<ExprGraph>>) -> Natif {
    Natif { graph: g.into() }
}

impl<T: Real> InclusionFn<T> for Natif {
    fn slots(&self) -> &[SlotSpec] {
        self.graph.slots()
    }
    fn output_len(&self) -> usize {
        self.graph.output_len()
    }
    fn eval(&self, inputs: &[&[Interval<T>]]) -> Result<Vec<Interval<T>>> {
        self.graph.eval_interval(inputs)
    }
    fn is_monotone(&self) -> bool {
        true
    }
    fn is_thin(&self) -> bool {
        true
    }
}

/// Jacobian-based inclusion function.
#[derive(Clone, Debug)]
pub struct Jacif {
    graph: Arc<ExprGraph>,
    centers: Vec<Center>,
}

/// Jacobian-based inclusion function of `g`, intersected over `centers`.
/// An empty list means the midpoint.
pub fn jacif(g: impl Into<Arc<ExprGraph>>, centers: Vec<Center>) -> Result<Jacif> {
    let graph = g.into();
    let centers = if centers.is_empty() { vec![Center::Midpoint] } else { centers };
    for c in &centers {
        c.check_len(graph.input_dim())?;
    }
    Ok(Jacif { graph, centers })
}

impl<T: Real> InclusionFn<T> for Jacif {
    fn slots(&self) -> &[SlotSpec] {
        self.graph.slots()
    }
    fn output_len(&self) -> usize {
        self.graph.output_len()
    }
    fn eval(&self, inputs: &[&[Interval<T>]]) -> Result<Vec<Interval<T>>> {
        let g = &*self.graph;
        let flat = flatten(inputs);
        let seeds = all_seeds(g);
        let jac = g.jacobian_columns(inputs, &seeds)?;
        let m = g.output_len();
        let n = flat.len();
        let mut mat = Vec::with_capacity(m * n);
        for r in 0..m {
            for c in 0..n {
                mat.push(jac.get(r, c));
            }
        }
        let mut acc = None;
        for c in &self.centers {
            let center = c.resolve(&flat)?;
            let fc = eval_at_point(g, &center)?;
            intersect_into(&mut acc, affine_form(&mat, &flat, &center, &fc));
        }
        Ok(acc.unwrap_or_default())
    }
    fn is_thin(&self) -> bool {
        true
    }
}

fn all_seeds(g: &ExprGraph) -> Vec<(usize, usize)> {
    g.slots()
        .iter()
        .enumerate()
        .flat_map(|(s, spec)| (0..spec.len).map(move |i| (s, i)))
        .collect()
}

/// Mixed Jacobian matrix for one (center, ordering) pair.
#[derive(Clone, Debug)]
pub struct MixedJacobian<T = f64> {
    /// Expansion point over the concatenated coordinates.
    pub center: Vec<T>,
    /// Interval value of `f` at the center.
    pub f_center: Vec<Interval<T>>,
    rows: usize,
    cols: usize,
    slot_lens: Vec<usize>,
    data: Vec<Interval<T>>,
}

impl<T: Real> MixedJacobian<T> {
    pub fn get(&self, row: usize, col: usize) -> Interval<T> {
        self.data[row * self.cols + col]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major `rows × cols` entries.
    pub fn data(&self) -> &[Interval<T>] {
        &self.data
    }

    /// Column block belonging to input slot `slot`, as a `rows × len` tensor.
    pub fn block(&self, slot: usize) -> IntervalTensor<T> {
        let off: usize = self.slot_lens[..slot].iter().sum();
        let len = self.slot_lens[slot];
        let mut data = Vec::with_capacity(self.rows * len);
        for r in 0..self.rows {
            for c in 0..len {
                data.push(self.get(r, off + c));
            }
        }
        IntervalTensor::from_intervals(vec![self.rows, len], data)
            .expect("block shape matches its data")
    }

    /// `[M]([x] − x̊) + f(x̊)` on the given box.
    pub fn apply(&self, inputs: &[&[Interval<T>]]) -> Vec<Interval<T>> {
        affine_form(&self.data, &flatten(inputs), &self.center, &self.f_center)
    }
}

/// Mixed Jacobian matrices of `g` on the box `inputs`, one per
/// (center, ordering) pair in center-major order.
///
/// Column `o_i` is the `o_i`-th Jacobian column over the box in which the
/// coordinates `o_1..o_i` span their full range and the rest are pinned to
/// the center.
pub fn mjacm<T: Real>(
    g: &ExprGraph,
    inputs: &[&[Interval<T>]],
    orderings: &[Ordering],
    centers: &[Vec<T>],
) -> Result<Vec<MixedJacobian<T>>> {
    let flat = flatten(inputs);
    let n = flat.len();
    for o in orderings {
        if o.len() != n {
            return Err(Error::InvalidOrdering(format!(
                "ordering of length {} for {n} input coordinates",
                o.len()
            )));
        }
    }
    let seeds = all_seeds(g);
    let m = g.output_len();
    let slot_lens: Vec<usize> = g.slots().iter().map(|s| s.len).collect();
    let mut out = Vec::with_capacity(centers.len() * orderings.len());
    for center in centers {
        check_center(center, &flat)?;
        let f_center = eval_at_point(g, center)?;
        for o in orderings {
            let mut data = vec![Interval::point(T::zero()); m * n];
            let mut bx: Vec<Interval<T>> = center.iter().map(|&c| Interval::point(c)).collect();
            for &col in o.as_slice() {
                bx[col] = flat[col];
                let jc = g.jacobian_columns(&split(&bx, g.slots()), &seeds[col..col + 1])?;
                for r in 0..m {
                    data[r * n + col] = jc.get(r, 0);
                }
            }
            out.push(MixedJacobian {
                center: center.clone(),
                f_center: f_center.clone(),
                rows: m,
                cols: n,
                slot_lens: slot_lens.clone(),
                data,
            });
        }
    }
    Ok(out)
}

/// Mixed Jacobian-based inclusion function.
#[derive(Clone, Debug)]
pub struct Mjacif {
    graph: Arc<ExprGraph>,
    orderings: Vec<Ordering>,
    centers: Vec<Center>,
}

/// Mixed Jacobian-based inclusion function of `g`, intersected over every
/// (center, ordering) pair. Empty lists mean the midpoint and the identity.
pub fn mjacif(
    g: impl Into<Arc<ExprGraph>>,
    orderings: Vec<Ordering>,
    centers: Vec<Center>,
) -> Result<Mjacif> {
    let graph = g.into();
    let n = graph.input_dim();
    let orderings = if orderings.is_empty() { vec![Ordering::identity(n)] } else { orderings };
    let centers = if centers.is_empty() { vec![Center::Midpoint] } else { centers };
    for o in &orderings {
        if o.len() != n {
            return Err(Error::InvalidOrdering(format!(
                "ordering of length {} for {n} input coordinates",
                o.len()
            )));
        }
    }
    for c in &centers {
        c.check_len(n)?;
    }
    Ok(Mjacif { graph, orderings, centers })
}

impl Mjacif {
    pub fn graph(&self) -> &ExprGraph {
        &self.graph
    }

    pub fn orderings(&self) -> &[Ordering] {
        &self.orderings
    }

    pub fn centers(&self) -> &[Center] {
        &self.centers
    }
}

impl<T: Real> InclusionFn<T> for Mjacif {
    fn slots(&self) -> &[SlotSpec] {
        self.graph.slots()
    }
    fn output_len(&self) -> usize {
        self.graph.output_len()
    }
    fn eval(&self, inputs: &[&[Interval<T>]]) -> Result<Vec<Interval<T>>> {
        let flat = flatten(inputs);
        let centers =
            self.centers.iter().map(|c| c.resolve(&flat)).collect::<Result<Vec<_>>>()?;
        let mut acc = None;
        for mj in mjacm(&self.graph, inputs, &self.orderings, &centers)? {
            intersect_into(&mut acc, mj.apply(inputs));
        }
        Ok(acc.unwrap_or_default())
    }
    fn is_thin(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse::parse_graph;

    fn example() -> ExprGraph {
        parse_graph("(x[0] + x[1])^2; x[0] + x[1] + 2*x[0]*x[1]", vec![SlotSpec::new("x", 2)])
            .unwrap()
    }

    fn bx() -> Vec<Interval> {
        vec![Interval::new(-0.1, 0.1).unwrap(); 2]
    }

    fn close(a: Interval, l: f64, u: f64) -> bool {
        (a.lower - l).abs() < 1e-12 && (a.upper - u).abs() < 1e-12
    }

    #[test]
    fn example_natural() {
        let y = natif(example()).eval(&[&bx()[..]]).unwrap();
        assert!(close(y[0], 0.0, 0.04) && close(y[1], -0.22, 0.22), "{y:?}");
    }

    #[test]
    fn example_jacobian() {
        let f = jacif(example(), vec![Center::Point(vec![0.0, 0.0])]).unwrap();
        let y = f.eval(&[&bx()[..]]).unwrap();
        assert!(close(y[0], -0.08, 0.08) && close(y[1], -0.24, 0.24), "{y:?}");
    }

    #[test]
    fn example_mixed_matrix_and_output() {
        let b = bx();
        let mj = &mjacm(&example(), &[&b[..]], &[Ordering::identity(2)], &[vec![0.0, 0.0]])
            .unwrap()[0];
        assert!(close(mj.get(0, 0), -0.2, 0.2) && close(mj.get(1, 0), 1.0, 1.0));
        assert!(close(mj.get(0, 1), -0.4, 0.4) && close(mj.get(1, 1), 0.8, 1.2));
        let f = mjacif(example(), vec![Ordering::identity(2)], vec![Center::Point(vec![0.0; 2])])
            .unwrap();
        let y = f.eval(&[&b[..]]).unwrap();
        assert!(close(y[0], -0.06, 0.06) && close(y[1], -0.22, 0.22), "{y:?}");
    }

    #[test]
    fn thin_boxes_give_exact_values() {
        let g = example();
        let x = [0.03, -0.07];
        let exact = g.eval_real(&[&x[..]]).unwrap();
        let thin: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        let fs: Vec<Box<dyn InclusionFn>> = vec![
            Box::new(natif(g.clone())),
            Box::new(jacif(g.clone(), vec![]).unwrap()),
            Box::new(mjacif(g.clone(), vec![], vec![]).unwrap()),
        ];
        for f in fs {
            let y = f.eval(&[&thin[..]]).unwrap();
            for (yi, e) in y.iter().zip(&exact) {
                assert!(yi.is_thin() && yi.lower == *e);
            }
        }
    }

    #[test]
    fn linear_map_is_exact() {
        let g = parse_graph("2*x[0] - x[1]; 0.5*x[0] + 3*x[1]", vec![SlotSpec::new("x", 2)])
            .unwrap();
        let b = [Interval::new(-1.0, 2.0).unwrap(), Interval::new(0.5, 1.0).unwrap()];
        let y = jacif(g.clone(), vec![Center::Point(vec![0.3, 0.9])]).unwrap().eval(&[&b[..]]).unwrap();
        // vertex enumeration
        for (k, row) in [[2.0, -1.0], [0.5, 3.0]].iter().enumerate() {
            let vals: Vec<f64> = [(-1.0, 0.5), (-1.0, 1.0), (2.0, 0.5), (2.0, 1.0)]
                .iter()
                .map(|(a, c)| row[0] * a + row[1] * c)
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(close(y[k], lo, hi), "{:?} vs [{lo}, {hi}]", y[k]);
        }
    }

    #[test]
    fn centers_are_checked_per_call() {
        let f = jacif(example(), vec![Center::Point(vec![0.5, 0.0])]).unwrap();
        assert_eq!(f.eval(&[&bx()[..]]), Err(Error::CenterOutsideBox(0)));
        assert!(matches!(
            mjacif(example(), vec![Ordering::identity(3)], vec![]),
            Err(Error::InvalidOrdering(_))
        ));
        assert!(Ordering::new(vec![0, 0]).is_err());
    }

    #[test]
    fn multiple_centers_refine() {
        let g = example();
        let b = [Interval::new(-0.1, 0.3).unwrap(), Interval::new(0.0, 0.2).unwrap()];
        let c1 = Center::lower_corner(2);
        let c2 = Center::Corner(vec![Side::Upper, Side::Upper]);
        let y1 = jacif(g.clone(), vec![c1.clone()]).unwrap().eval(&[&b[..]]).unwrap();
        let y2 = jacif(g.clone(), vec![c2.clone()]).unwrap().eval(&[&b[..]]).unwrap();
        let y = jacif(g, vec![c1, c2]).unwrap().eval(&[&b[..]]).unwrap();
        for k in 0..2 {
            assert!(y[k].subseteq(&y1[k]) && y[k].subseteq(&y2[k]));
        }
    }

    #[test]
    fn single_column_mixed_equals_jacobian() {
        let g = parse_graph("sin(x[0]) * x[0]", vec![SlotSpec::new("x", 1)]).unwrap();
        let b = [Interval::new(0.2, 0.9).unwrap()];
        let j = g.eval_jacobian_interval(&[&b[..]], &[0]).unwrap();
        let mj = &mjacm(&g, &[&b[..]], &[Ordering::identity(1)], &[vec![0.5]]).unwrap()[0];
        assert_eq!(mj.get(0, 0), j[0].data()[0]);
    }
}
