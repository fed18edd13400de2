use std::fmt;

use super::{BinaryOp, Interval, UnaryOp};
use crate::error::{Error, Result};
use crate::real::Real;

/// Interval-valued array of any rank, stored row-major.
///
/// Logically a pair of equally shaped `lower`/`upper` arrays with
/// `lower <= upper` element-wise; stored as one array of [`Interval`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalTensor<T = f64> {
    shape: Vec<usize>,
    data: Vec<Interval<T>>,
}

/// Perturbation radius for [`IntervalTensor::icentpert`].
#[derive(Clone, Debug, PartialEq)]
pub enum Perturbation<T = f64> {
    Scalar(T),
    PerAxis(Vec<T>),
}

impl<T> From<f64> for Perturbation<T>
where
    T: Real,
{
    fn from(v: f64) -> Self {
        Perturbation::Scalar(T::from_f64(v))
    }
}

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Output shape of broadcasting `a` against `b` (trailing-dimension alignment).
pub(crate) fn broadcast_shape(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    let rank = a.len().max(b.len());
    let mut out = vec![0; rank];
    for i in 0..rank {
        let da = if i + a.len() >= rank { a[i + a.len() - rank] } else { 1 };
        let db = if i + b.len() >= rank { b[i + b.len() - rank] } else { 1 };
        out[i] = match (da, db) {
            (x, y) if x == y => x,
            (1, y) => y,
            (x, 1) => x,
            _ => {
                return Err(Error::ShapeMismatch(format!(
                    "cannot broadcast {a:?} against {b:?}"
                )))
            }
        };
    }
    Ok(out)
}

/// Flat source index in an operand of shape `src` for output multi-index `idx`.
fn broadcast_index(idx: &[usize], src: &[usize], src_strides: &[usize]) -> usize {
    let offset = idx.len() - src.len();
    src.iter()
        .enumerate()
        .map(|(k, &d)| if d == 1 { 0 } else { idx[k + offset] * src_strides[k] })
        .sum()
}

impl<T: Real> IntervalTensor<T> {
    /// Builds an interval tensor from lower and upper arrays of the given shape.
    pub fn new(shape: Vec<usize>, lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let n = numel(&shape);
        if lower.len() != n || upper.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {n} entries, got lower {} / upper {}",
                lower.len(),
                upper.len()
            )));
        }
        let mut data = Vec::with_capacity(n);
        for (i, (l, u)) in lower.into_iter().zip(upper).enumerate() {
            let (lv, uv) = (l.value(), u.value());
            if lv.is_nan() || uv.is_nan() {
                return Err(Error::NonFinite(i));
            }
            if cfg!(not(feature = "extended-div")) && (lv.is_infinite() || uv.is_infinite()) {
                return Err(Error::NonFinite(i));
            }
            if lv > uv {
                return Err(Error::OrderViolation { index: i, lower: lv, upper: uv });
            }
            data.push(Interval::new_unchecked(l, u));
        }
        Ok(IntervalTensor { shape, data })
    }

    /// Rank-1 interval from lower and upper vectors.
    pub fn vector(lower: &[T], upper: &[T]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::ShapeMismatch(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        Self::new(vec![lower.len()], lower.to_vec(), upper.to_vec())
    }

    /// Wraps intervals that are already known to be valid.
    pub fn from_intervals(shape: Vec<usize>, data: Vec<Interval<T>>) -> Result<Self> {
        if numel(&shape) != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} does not hold {} entries",
                data.len()
            )));
        }
        Ok(IntervalTensor { shape, data })
    }

    pub fn from_vec(data: Vec<Interval<T>>) -> Self {
        IntervalTensor { shape: vec![data.len()], data }
    }

    /// Degenerate tensor `[x, x]`.
    pub fn point(shape: Vec<usize>, values: &[T]) -> Result<Self> {
        Self::new(shape, values.to_vec(), values.to_vec())
    }

    /// `[center - pert, center + pert]`, with a scalar perturbation broadcast.
    pub fn icentpert(center: &[T], pert: impl Into<Perturbation<T>>) -> Result<Self> {
        let pert = match pert.into() {
            Perturbation::Scalar(p) => vec![p; center.len()],
            Perturbation::PerAxis(p) => {
                if p.len() != center.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "center has {} entries, perturbation {}",
                        center.len(),
                        p.len()
                    )));
                }
                p
            }
        };
        if let Some((index, p)) = pert.iter().enumerate().find(|(_, p)| !(p.value() >= 0.0)) {
            return Err(Error::NegativePerturbation { index, value: p.value() });
        }
        let data = center.iter().zip(&pert).map(|(&c, &p)| Interval::centered(c, p)).collect();
        Ok(Self::from_vec(data))
    }

    /// Upper-triangle coding `(lower, upper)` of a flattened tensor.
    pub fn i2ut(&self) -> Vec<T> {
        let mut out: Vec<T> = self.data.iter().map(|iv| iv.lower).collect();
        out.extend(self.data.iter().map(|iv| iv.upper));
        out
    }

    /// Inverse of [`i2ut`](Self::i2ut) for rank-1 tensors.
    pub fn ut2i(v: &[T]) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::ShapeMismatch(format!(
                "upper-triangle vector must have even length, got {}",
                v.len()
            )));
        }
        let n = v.len() / 2;
        Self::new(vec![n], v[..n].to_vec(), v[n..].to_vec())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Interval<T>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Interval<T>> {
        self.data
    }

    pub fn lower(&self) -> Vec<T> {
        self.data.iter().map(|iv| iv.lower).collect()
    }

    pub fn upper(&self) -> Vec<T> {
        self.data.iter().map(|iv| iv.upper).collect()
    }

    pub fn width(&self) -> Vec<T> {
        self.data.iter().map(Interval::width).collect()
    }

    pub fn midpoint(&self) -> Vec<T> {
        self.data.iter().map(Interval::midpoint).collect()
    }

    /// Entry at a multi-index.
    pub fn get(&self, idx: &[usize]) -> Option<&Interval<T>> {
        if idx.len() != self.shape.len() || idx.iter().zip(&self.shape).any(|(i, d)| i >= d) {
            return None;
        }
        let flat: usize = idx.iter().zip(strides(&self.shape)).map(|(i, s)| i * s).sum();
        self.data.get(flat)
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self> {
        if numel(&shape) != self.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn is_thin(&self) -> bool {
        self.data.iter().all(Interval::is_thin)
    }

    pub fn inflate(&self, ulps: i32) -> Self {
        IntervalTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|iv| iv.inflate(ulps)).collect(),
        }
    }

    /// Element-wise binary primitive with broadcasting.
    pub fn elementwise(op: BinaryOp, a: &Self, b: &Self) -> Result<Self> {
        if a.shape == b.shape {
            let data = a
                .data
                .iter()
                .zip(&b.data)
                .map(|(x, y)| x.binary(op, *y))
                .collect::<Result<_>>()?;
            return Ok(IntervalTensor { shape: a.shape.clone(), data });
        }
        let shape = broadcast_shape(&a.shape, &b.shape)?;
        let (sa, sb, so) = (strides(&a.shape), strides(&b.shape), strides(&shape));
        let n = numel(&shape);
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0; shape.len()];
        for flat in 0..n {
            let mut rem = flat;
            for (k, s) in so.iter().enumerate() {
                idx[k] = rem / s;
                rem %= s;
            }
            let x = a.data[broadcast_index(&idx, &a.shape, &sa)];
            let y = b.data[broadcast_index(&idx, &b.shape, &sb)];
            data.push(x.binary(op, y)?);
        }
        Ok(IntervalTensor { shape, data })
    }

    pub fn unary(&self, op: UnaryOp) -> Result<Self> {
        let data = self.data.iter().map(|x| x.unary(op)).collect::<Result<_>>()?;
        Ok(IntervalTensor { shape: self.shape.clone(), data })
    }

    /// Interval matrix product; rank-1 operands are promoted to row/column vectors.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        let (m, p, a_vec) = match self.shape.as_slice() {
            [p] => (1, *p, true),
            [m, p] => (*m, *p, false),
            s => return Err(Error::ShapeMismatch(format!("matmul lhs of rank {}", s.len()))),
        };
        let (p2, n, b_vec) = match rhs.shape.as_slice() {
            [p] => (*p, 1, true),
            [p, n] => (*p, *n, false),
            s => return Err(Error::ShapeMismatch(format!("matmul rhs of rank {}", s.len()))),
        };
        if p != p2 {
            return Err(Error::ShapeMismatch(format!(
                "inner dimensions differ: {:?} @ {:?}",
                self.shape, rhs.shape
            )));
        }
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                let mut acc = Interval::point(T::zero());
                for k in 0..p {
                    acc = acc + self.data[i * p + k] * rhs.data[k * n + j];
                }
                data.push(acc);
            }
        }
        let shape = match (a_vec, b_vec) {
            (true, true) => vec![],
            (true, false) => vec![n],
            (false, true) => vec![m],
            (false, false) => vec![m, n],
        };
        Ok(IntervalTensor { shape, data })
    }

    fn check_same_shape(&self, other_shape: &[usize]) -> Result<()> {
        if self.shape != other_shape {
            return Err(Error::ShapeMismatch(format!("{:?} vs {other_shape:?}", self.shape)));
        }
        Ok(())
    }

    /// `x ∈ self` element-wise.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values against {} intervals",
                x.len(),
                self.data.len()
            )));
        }
        Ok(self.data.iter().zip(x).all(|(iv, &v)| iv.contains(v)))
    }

    /// `self ⊆ other` element-wise.
    pub fn subseteq(&self, other: &Self) -> Result<bool> {
        self.check_same_shape(&other.shape)?;
        Ok(self.data.iter().zip(&other.data).all(|(a, b)| a.subseteq(b)))
    }

    /// Southeast order: `self.lower <= other.lower` and `other.upper <= self.upper`.
    pub fn se_leq(&self, other: &Self) -> Result<bool> {
        self.check_same_shape(&other.shape)?;
        Ok(self.data.iter().zip(&other.data).all(|(a, b)| {
            a.lower.value() <= b.lower.value() && b.upper.value() <= a.upper.value()
        }))
    }

    /// Element-wise intersection, `None` if any component is empty.
    pub fn intersect(&self, other: &Self) -> Result<Option<Self>> {
        self.check_same_shape(&other.shape)?;
        let data: Option<Vec<_>> =
            self.data.iter().zip(&other.data).map(|(a, b)| a.intersect(b)).collect();
        Ok(data.map(|data| IntervalTensor { shape: self.shape.clone(), data }))
    }

    pub fn hull(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(&other.shape)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.hull(b)).collect();
        Ok(IntervalTensor { shape: self.shape.clone(), data })
    }

    pub fn to_f64(&self) -> IntervalTensor<f64> {
        IntervalTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(Interval::to_f64).collect(),
        }
    }
}

impl<T: Real> fmt::Display for IntervalTensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntervalTensor{:?}(", self.shape)?;
        for (i, iv) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{iv}")?;
        }
        write!(f, ")")
    }
}
