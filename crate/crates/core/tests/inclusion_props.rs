mod common;

use std::sync::Arc;

use ivreach::inclusion::InclusionFn;
use ivreach::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_and_box(seed: u64) -> (Arc<ExprGraph>, Vec<Interval>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let depth = rng.gen_range(1..=5);
    let g = Arc::new(common::random_graph(n, 2, depth, &mut rng));
    let bx = common::random_box(n, 0.8, &mut rng);
    (g, bx, rng)
}

/// A random sub-box of `bx`.
fn shrink(bx: &[Interval], rng: &mut impl Rng) -> Vec<Interval> {
    bx.iter()
        .map(|i| {
            let a = rng.gen_range(i.lower..=i.upper);
            let b = rng.gen_range(i.lower..=i.upper);
            Interval::new(a.min(b), a.max(b)).unwrap()
        })
        .collect()
}

fn differentiable(g: &ExprGraph, bx: &[Interval]) -> bool {
    !matches!(g.eval_jacobian_interval(&[bx], &[0]), Err(Error::NonDifferentiable(_)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn all_inclusions_contain_samples(seed in any::<u64>()) {
        let (g, bx, mut rng) = graph_and_box(seed);
        let n = bx.len();
        let mut fs: Vec<Box<dyn InclusionFn>> = vec![Box::new(natif(g.clone()))];
        if differentiable(&g, &bx) {
            fs.push(Box::new(jacif(g.clone(), vec![Center::Midpoint, Center::lower_corner(n)]).unwrap()));
            fs.push(Box::new(mjacif(g.clone(), vec![], vec![]).unwrap()));
        }
        let outs: Vec<Vec<Interval>> = fs.iter().map(|f| f.eval(&[&bx]).unwrap()).collect();
        for _ in 0..200 {
            let p = common::sample(&bx, &mut rng);
            let v = g.eval_real(&[&p]).unwrap();
            for o in &outs {
                for (vi, oi) in v.iter().zip(o) {
                    prop_assert!(oi.lower <= *vi && *vi <= oi.upper, "{vi} not in {oi}");
                }
            }
        }
    }

    #[test]
    fn natural_inclusion_is_monotone(seed in any::<u64>()) {
        let (g, bx, mut rng) = graph_and_box(seed);
        let outer = natif(g.clone()).eval(&[&bx]).unwrap();
        let sub = shrink(&bx, &mut rng);
        let inner = natif(g).eval(&[&sub]).unwrap();
        for (i, o) in inner.iter().zip(&outer) {
            prop_assert!(i.subseteq(o), "{i} not in {o}");
        }
    }

    #[test]
    fn inclusions_are_thin(seed in any::<u64>()) {
        let (g, bx, mut rng) = graph_and_box(seed);
        let p = common::sample(&bx, &mut rng);
        let thin: Vec<Interval> = p.iter().map(|&c| Interval::point(c)).collect();
        let exact = g.eval_real(&[&p]).unwrap();
        let n = p.len();
        let fs: Vec<Box<dyn InclusionFn>> = vec![
            Box::new(natif(g.clone())),
            Box::new(jacif(g.clone(), vec![]).unwrap()),
            Box::new(mjacif(g.clone(), vec![Ordering::identity(n)], vec![Center::lower_corner(n)]).unwrap()),
        ];
        for f in &fs {
            for (o, e) in f.eval(&[&thin]).unwrap().iter().zip(&exact) {
                prop_assert!(o.is_thin() && o.lower == *e, "{o} vs {e}");
            }
        }
    }

    #[test]
    fn more_centers_never_loosen(seed in any::<u64>()) {
        let (g, bx, _) = graph_and_box(seed);
        prop_assume!(differentiable(&g, &bx));
        let n = bx.len();
        let centers = [Center::Midpoint, Center::lower_corner(n), Center::Corner(vec![Side::Upper; n])];
        let both = mjacif(g.clone(), vec![], centers.to_vec()).unwrap().eval(&[&bx]).unwrap();
        for c in centers {
            let single = mjacif(g.clone(), vec![], vec![c]).unwrap().eval(&[&bx]).unwrap();
            for (b, s) in both.iter().zip(&single) {
                prop_assert!(b.subseteq(s), "{b} not in {s}");
            }
        }
    }

    #[test]
    fn mixed_never_looser_than_jacobian(seed in any::<u64>()) {
        let (g, bx, _) = graph_and_box(seed);
        prop_assume!(differentiable(&g, &bx));
        let n = bx.len();
        let jac = jacif(g.clone(), vec![]).unwrap().eval(&[&bx]).unwrap();
        let all: Vec<Ordering> = if n == 1 {
            vec![Ordering::identity(1)]
        } else {
            vec![Ordering::identity(n), Ordering::new((0..n).rev().collect()).unwrap()]
        };
        let mjac = mjacif(g, all, vec![]).unwrap().eval(&[&bx]).unwrap();
        for (m, j) in mjac.iter().zip(&jac) {
            prop_assert!(m.lower >= j.lower - 1e-12 && m.upper <= j.upper + 1e-12, "{m} vs {j}");
        }
    }

    #[test]
    fn orderings_agree_on_affine_maps(
        a in prop::collection::vec(-3.0f64..3.0, 3),
        c in -1.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let b = GraphBuilder::new(&[("x", 3)]);
        let x = b.input("x").unwrap();
        let f = a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + c;
        let g = Arc::new(b.build(&[f]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bx = common::random_box(3, 1.0, &mut rng);
        let id = mjacif(g.clone(), vec![Ordering::identity(3)], vec![]).unwrap().eval(&[&bx]).unwrap();
        let rev = mjacif(g, vec![Ordering::new(vec![2, 0, 1]).unwrap()], vec![]).unwrap().eval(&[&bx]).unwrap();
        prop_assert!((id[0].lower - rev[0].lower).abs() < 1e-12);
        prop_assert!((id[0].upper - rev[0].upper).abs() < 1e-12);
    }
}

#[test]
fn monotone_primitives_are_minimal() {
    let cases: [(UnaryOp, f64, f64); 6] = [
        (UnaryOp::Exp, -2.0, 1.5),
        (UnaryOp::Atan, -3.0, 0.5),
        (UnaryOp::Tanh, -1.0, 2.0),
        (UnaryOp::Sqrt, 0.25, 4.0),
        (UnaryOp::PowI(3), -1.5, 0.7),
        (UnaryOp::Neg, -0.3, 0.9),
    ];
    for (op, lo, hi) in cases {
        let r = Interval::new(lo, hi).unwrap().unary(op).unwrap();
        let (a, b) = (op.apply_real(lo).unwrap(), op.apply_real(hi).unwrap());
        assert_eq!((r.lower, r.upper), (a.min(b), a.max(b)), "{}", op.name());
    }
}

#[test]
fn periodic_primitives_reach_their_extrema() {
    let r = Interval::new(1.0, 2.0).unwrap().unary(UnaryOp::Sin).unwrap();
    assert_eq!(r.upper, 1.0);
    assert_eq!(r.lower, 1.0f64.sin());
    let r = Interval::new(3.0, 3.5).unwrap().unary(UnaryOp::Cos).unwrap();
    assert_eq!(r.lower, -1.0);
    let r = Interval::new(-0.5, 0.25).unwrap().unary(UnaryOp::PowI(2)).unwrap();
    assert_eq!((r.lower, r.upper), (0.0, 0.25));
    let r = Interval::new(-0.5, 0.25).unwrap().unary(UnaryOp::Abs).unwrap();
    assert_eq!((r.lower, r.upper), (0.0, 0.5));
}
