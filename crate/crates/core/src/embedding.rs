//! Dynamical systems and their induced embedding systems.
//!
//! For an inclusion function `F` of `ẋ = f(t, x, u, w)`, the embedding system
//! evolves the box `[x̲, x̄]` with
//! `ẋ̲_i = F̲_i(x̲, x̄_{i:x̲})` and `ẋ̄_i = F̄_i(x̲_{i:x̄}, x̄)`,
//! i.e. coordinate `i` of each bound is driven by `F` on the matching face.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{ExprGraph, SlotSpec};
use crate::inclusion::{jacif, mjacif, natif, Center, InclusionFn, Ordering};
use crate::interval::Interval;
use crate::real::Real;

const SLOT_NAMES: [&str; 4] = ["t", "x", "u", "w"];

/// A continuous-time system `ẋ = f(t, x, u, w)` given as an expression graph.
///
/// The graph must have an `x` slot; `t`, `u` and `w` slots are optional and
/// may appear in any order.
#[derive(Clone, Debug)]
pub struct System {
    graph: Arc<ExprGraph>,
    xlen: usize,
    ulen: usize,
    wlen: usize,
}

impl System {
    pub fn new(graph: impl Into<Arc<ExprGraph>>) -> Result<Self> {
        let graph = graph.into();
        check_slot_names(graph.slots())?;
        let xlen = slot_len(graph.slots(), "x")
            .ok_or_else(|| Error::SignatureMismatch("vector field has no `x` slot".into()))?;
        if graph.output_len() != xlen {
            return Err(Error::SignatureMismatch(format!(
                "vector field has {} outputs for a state of length {xlen}",
                graph.output_len()
            )));
        }
        if slot_len(graph.slots(), "t").is_some_and(|l| l != 1) {
            return Err(Error::SignatureMismatch("slot `t` must have length 1".into()));
        }
        Ok(System {
            ulen: slot_len(graph.slots(), "u").unwrap_or(0),
            wlen: slot_len(graph.slots(), "w").unwrap_or(0),
            graph,
            xlen,
        })
    }

    pub fn graph(&self) -> &ExprGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<ExprGraph> {
        self.graph.clone()
    }

    pub fn xlen(&self) -> usize {
        self.xlen
    }

    pub fn ulen(&self) -> usize {
        self.ulen
    }

    pub fn wlen(&self) -> usize {
        self.wlen
    }

    /// Evaluates `f(t, x, u, w)`.
    pub fn f<T: Real>(&self, t: f64, x: &[T], u: &[T], w: &[T]) -> Result<Vec<T>> {
        let tt = [T::from_f64(t)];
        let inputs = route(self.graph.slots(), &tt, x, u, w)?;
        self.graph.eval_real(&inputs)
    }
}

fn check_slot_names(slots: &[SlotSpec]) -> Result<()> {
    for s in slots {
        if !SLOT_NAMES.contains(&s.name.as_str()) {
            return Err(Error::SignatureMismatch(format!(
                "unexpected slot `{}`; expected a subset of t, x, u, w",
                s.name
            )));
        }
    }
    Ok(())
}

fn slot_len(slots: &[SlotSpec], name: &str) -> Option<usize> {
    slots.iter().find(|s| s.name == name).map(|s| s.len)
}

/// Arranges named arguments in the slot order of a graph or inclusion function.
pub(crate) fn route<'a, V>(
    slots: &[SlotSpec],
    t: &'a [V],
    x: &'a [V],
    u: &'a [V],
    w: &'a [V],
) -> Result<Vec<&'a [V]>> {
    slots
        .iter()
        .map(|s| {
            let v = match s.name.as_str() {
                "t" => t,
                "x" => x,
                "u" => u,
                "w" => w,
                other => {
                    return Err(Error::SignatureMismatch(format!("unexpected slot `{other}`")))
                }
            };
            if v.len() != s.len {
                return Err(Error::SignatureMismatch(format!(
                    "slot `{}` expects {} values, got {}",
                    s.name,
                    s.len,
                    v.len()
                )));
            }
            Ok(v)
        })
        .collect()
}

/// Control bounds as a function of `(t, [x̲, x̄])`.
pub type FeedbackFn<T> = Arc<dyn Fn(f64, &[Interval<T>]) -> Result<Vec<Interval<T>>> + Send + Sync>;

/// Bounds for the control slot of an embedding system.
#[derive(Clone, Default)]
pub enum ControlInput<T = f64> {
    /// The inclusion function has no `u` slot.
    #[default]
    None,
    /// Fixed open-loop bounds.
    Interval(Vec<Interval<T>>),
    /// Bounds computed from `(t, [x̲, x̄])` at every evaluation.
    Feedback(FeedbackFn<T>),
}

impl<T> fmt::Debug for ControlInput<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlInput::None => write!(f, "None"),
            ControlInput::Interval(v) => write!(f, "Interval(len {})", v.len()),
            ControlInput::Feedback(_) => write!(f, "Feedback(..)"),
        }
    }
}

impl<T: Real> ControlInput<T> {
    fn resolve(&self, t: f64, x: &[Interval<T>]) -> Result<Vec<Interval<T>>> {
        match self {
            ControlInput::None => Ok(Vec::new()),
            ControlInput::Interval(v) => Ok(v.clone()),
            ControlInput::Feedback(cb) => cb(t, x),
        }
    }
}

fn check_box<T: Real>(lower: &[T], upper: &[T]) -> Result<()> {
    for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
        if !(l.is_finite() && u.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if l.value() > u.value() {
            return Err(Error::OrderViolation { index: i, lower: l.value(), upper: u.value() });
        }
    }
    Ok(())
}

/// Evaluates the embedding vector field given a face evaluator.
///
/// `eval` receives a box and must return an enclosure of `f` over it. The
/// result is `(ẋ̲, ẋ̄)` concatenated. Coordinates that are already thin reuse
/// the full-box evaluation instead of a face evaluation.
pub fn embedded_field<T: Real>(
    lower: &[T],
    upper: &[T],
    mut eval: impl FnMut(&[Interval<T>]) -> Result<Vec<Interval<T>>>,
) -> Result<Vec<T>> {
    let n = lower.len();
    if upper.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "lower has {n} entries, upper has {}",
            upper.len()
        )));
    }
    check_box(lower, upper)?;
    let full: Vec<Interval<T>> =
        lower.iter().zip(upper).map(|(&l, &u)| Interval::new_unchecked(l, u)).collect();
    let mut full_val: Option<Vec<Interval<T>>> = None;
    let mut out = vec![T::zero(); 2 * n];
    let mut face = full.clone();
    for i in 0..n {
        if full[i].is_thin() {
            if full_val.is_none() {
                full_val = Some(eval(&full)?);
            }
            let v = full_val.as_ref().expect("just computed");
            out[i] = v[i].lower;
            out[n + i] = v[i].upper;
            continue;
        }
        face[i] = Interval::point(lower[i]);
        out[i] = eval(&face)?[i].lower;
        face[i] = Interval::point(upper[i]);
        out[n + i] = eval(&face)?[i].upper;
        face[i] = full[i];
    }
    Ok(out)
}

/// The embedding system induced by an inclusion function.
#[derive(Clone)]
pub struct EmbeddingSystem<T: Real = f64> {
    sys: System,
    incl: Arc<dyn InclusionFn<T>>,
}

impl<T: Real> fmt::Debug for EmbeddingSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbeddingSystem")
            .field("xlen", &self.sys.xlen)
            .field("slots", &self.incl.slots())
            .finish()
    }
}

/// Induces the embedding system of `sys` from the inclusion function `incl`.
///
/// `incl` is matched to the embedding arguments by slot name: `x` (required)
/// receives the face boxes, `t` the current time, `u` the control bounds and
/// `w` the disturbance bounds.
pub fn ifemb<T: Real>(sys: &System, incl: Arc<dyn InclusionFn<T>>) -> Result<EmbeddingSystem<T>> {
    let slots = incl.slots();
    check_slot_names(slots)?;
    match slot_len(slots, "x") {
        Some(l) if l == sys.xlen => {}
        Some(l) => {
            return Err(Error::SignatureMismatch(format!(
                "inclusion function takes a state of length {l}, system has {}",
                sys.xlen
            )))
        }
        None => {
            return Err(Error::SignatureMismatch("inclusion function has no `x` slot".into()))
        }
    }
    if incl.output_len() != sys.xlen {
        return Err(Error::SignatureMismatch(format!(
            "inclusion function has {} outputs for a state of length {}",
            incl.output_len(),
            sys.xlen
        )));
    }
    if let Some(l) = slot_len(slots, "w") {
        if l != sys.wlen {
            return Err(Error::SignatureMismatch(format!(
                "inclusion function takes {l} disturbances, system has {}",
                sys.wlen
            )));
        }
    }
    Ok(EmbeddingSystem { sys: sys.clone(), incl })
}

/// Embedding method for [`make_embedding`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nat,
    Jac,
    Mjac,
}

/// Options for [`make_embedding`]; empty lists select the defaults.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingOptions {
    pub centers: Vec<Center>,
    pub orderings: Vec<Ordering>,
}

/// Embedding induced by the natural, Jacobian-based or mixed Jacobian-based
/// inclusion function of `sys`.
pub fn make_embedding(
    sys: &System,
    method: Method,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingSystem<f64>> {
    let g = sys.graph_arc();
    let incl: Arc<dyn InclusionFn<f64>> = match method {
        Method::Nat => Arc::new(natif(g)),
        Method::Jac => Arc::new(jacif(g, opts.centers.clone())?),
        Method::Mjac => Arc::new(mjacif(g, opts.orderings.clone(), opts.centers.clone())?),
    };
    ifemb(sys, incl)
}

impl<T: Real> EmbeddingSystem<T> {
    pub fn system(&self) -> &System {
        &self.sys
    }

    pub fn inclusion(&self) -> &Arc<dyn InclusionFn<T>> {
        &self.incl
    }

    pub fn xlen(&self) -> usize {
        self.sys.xlen
    }

    fn eval_incl(
        &self,
        t: f64,
        x: &[Interval<T>],
        u: &[Interval<T>],
        w: &[Interval<T>],
    ) -> Result<Vec<Interval<T>>> {
        let tt = [Interval::point(T::from_f64(t))];
        let inputs = route(self.incl.slots(), &tt, x, u, w)?;
        self.incl.eval(&inputs)
    }

    /// Embedding vector field at `t` for the state `(x̲, x̄)` (length `2n`).
    pub fn e(
        &self,
        t: f64,
        state: &[T],
        control: &ControlInput<T>,
        w: &[Interval<T>],
    ) -> Result<Vec<T>> {
        let n = self.sys.xlen;
        if state.len() != 2 * n {
            return Err(Error::ShapeMismatch(format!(
                "embedding state has {} entries, expected {}",
                state.len(),
                2 * n
            )));
        }
        let (lower, upper) = state.split_at(n);
        check_box(lower, upper)?;
        let full: Vec<Interval<T>> =
            lower.iter().zip(upper).map(|(&l, &u)| Interval::new_unchecked(l, u)).collect();
        let u = control.resolve(t, &full)?;
        embedded_field(lower, upper, |face| self.eval_incl(t, face, &u, w))
    }

    /// Decomposition function `d(x, x̂, w, ŵ)`.
    ///
    /// Uses `F̲` on `[x, x̂_{i:x}]` when `x ≤ x̂, w ≤ ŵ` and `F̄` on
    /// `[x̂_{i:x}, x]` when `x̂ ≤ x, ŵ ≤ w`.
    pub fn decomposition(
        &self,
        t: f64,
        x: &[T],
        xh: &[T],
        w: &[T],
        wh: &[T],
        control: &ControlInput<T>,
    ) -> Result<Vec<T>> {
        let n = self.sys.xlen;
        if x.len() != n || xh.len() != n || w.len() != wh.len() {
            return Err(Error::ShapeMismatch("decomposition argument lengths differ".into()));
        }
        let leq = |a: &[T], b: &[T]| a.iter().zip(b).all(|(p, q)| p.value() <= q.value());
        let forward = leq(x, xh) && leq(w, wh);
        let (lo, hi, wlo, whi) = if forward {
            (x, xh, w, wh)
        } else if leq(xh, x) && leq(wh, w) {
            (xh, x, wh, w)
        } else {
            return Err(Error::UnorderedArguments);
        };
        let wbox: Vec<Interval<T>> =
            wlo.iter().zip(whi).map(|(&l, &u)| Interval::new_unchecked(l, u)).collect();
        let full: Vec<Interval<T>> =
            lo.iter().zip(hi).map(|(&l, &u)| Interval::new_unchecked(l, u)).collect();
        let u = control.resolve(t, &full)?;
        let mut out = Vec::with_capacity(n);
        let mut face = full.clone();
        for i in 0..n {
            face[i] = Interval::point(x[i]);
            let y = self.eval_incl(t, &face, &u, &wbox)?;
            out.push(if forward { y[i].lower } else { y[i].upper });
            face[i] = full[i];
        }
        Ok(out)
    }
}
