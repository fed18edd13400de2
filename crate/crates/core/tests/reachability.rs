use std::sync::Arc;

use ivreach::embedding::EmbeddingOptions;
use ivreach::integrate::embedding_rollout;
use ivreach::montecarlo::{check_containment, SampleOptions};
use ivreach::systems::{double_integrator, pendulum, PendulumParams};
use ivreach::*;
use proptest::prelude::*;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn settings(integrator: Integrator, t_end: f64) -> RolloutSettings {
    RolloutSettings { integrator, t0: 0.0, t_end, dt: 0.01 }
}

#[test]
fn pendulum_tubes_contain_samples_for_every_method() {
    let sys = pendulum(PendulumParams::default()).unwrap();
    let x0 = IntervalTensor::vector(&[0.4, -0.1], &[0.5, 0.1]).unwrap();
    let w = [iv(-0.02, 0.02)];
    let u = ControlInput::Interval(vec![iv(0.1, 0.15)]);
    let policy = |_: f64, _: &[f64]| Ok(vec![0.125]);
    for method in [Method::Nat, Method::Jac, Method::Mjac] {
        let emb = make_embedding(&sys, method, &EmbeddingOptions::default()).unwrap();
        let tube = embedding_rollout(&emb, &x0, &w, &u, &settings(Integrator::Tsit5, 0.5)).unwrap();
        let rep = check_containment(&sys, Some(&policy), &x0, &w, &tube, 50, 3, SampleOptions::default(), 1)
            .unwrap();
        assert!(rep.passed(), "{method:?}: {rep:?}");
    }
}

#[test]
fn thin_embedding_matches_nominal_rollout() {
    let sys = pendulum(PendulumParams::default()).unwrap();
    let x = [0.3, 0.2];
    let x0 = IntervalTensor::vector(&x, &x).unwrap();
    let emb = make_embedding(&sys, Method::Mjac, &EmbeddingOptions::default()).unwrap();
    let s = settings(Integrator::Tsit5, 1.0);
    let u = [0.05];
    let tube = embedding_rollout(&emb, &x0, &[iv(0.0, 0.0)], &ControlInput::Interval(vec![iv(0.05, 0.05)]), &s)
        .unwrap();
    let nominal = integrate::rollout(s.integrator, |t, x: &[f64]| sys.f(t, x, &u, &[0.0]), &x, 0.0, 1.0, 0.01)
        .unwrap();
    for (a, b) in tube.states.iter().zip(&nominal.states) {
        for i in 0..2 {
            assert!((a[i] - b[i]).abs() < 1e-9 && (a[2 + i] - b[i]).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Nested initial boxes stay nested under the natural embedding.
    #[test]
    fn natural_embedding_preserves_nesting(
        c in prop::collection::vec(-1.0f64..1.0, 2),
        r in prop::collection::vec(0.01f64..0.2, 2),
        shrink in 0.0f64..1.0,
    ) {
        let sys = pendulum(PendulumParams::default()).unwrap();
        let emb = make_embedding(&sys, Method::Nat, &EmbeddingOptions::default()).unwrap();
        let outer = IntervalTensor::vector(&[c[0] - r[0], c[1] - r[1]], &[c[0] + r[0], c[1] + r[1]]).unwrap();
        let inner = IntervalTensor::vector(
            &[c[0] - shrink * r[0], c[1] - shrink * r[1]],
            &[c[0] + shrink * r[0], c[1] + shrink * r[1]],
        )
        .unwrap();
        let w = [iv(-0.02, 0.02)];
        let u = ControlInput::Interval(vec![iv(0.0, 0.1)]);
        let s = settings(Integrator::Euler, 0.3);
        let a = embedding_rollout(&emb, &outer, &w, &u, &s).unwrap();
        let b = embedding_rollout(&emb, &inner, &w, &u, &s).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            for i in 0..2 {
                prop_assert!(sa[i] <= sb[i] + 1e-12 && sb[2 + i] <= sa[2 + i] + 1e-12);
            }
        }
    }
}

#[test]
fn partition_results_do_not_depend_on_worker_count() {
    let sys = double_integrator().unwrap();
    let emb = make_embedding(&sys, Method::Mjac, &EmbeddingOptions::default()).unwrap();
    let x0 = IntervalTensor::vector(&[-1.0, 0.5], &[1.0, 1.5]).unwrap();
    let grid = grid_partition(&x0, &[3, 4]).unwrap();
    let w = [iv(-0.1, 0.1)];
    let u = ControlInput::Interval(vec![iv(-0.5, 0.5)]);
    let s = settings(Integrator::Tsit5, 1.0);
    let one: Vec<Trajectory> =
        run_partitions(&emb, &grid, &w, &u, &s, 1).into_iter().map(|r| r.unwrap()).collect();
    let three: Vec<Trajectory> =
        run_partitions(&emb, &grid, &w, &u, &s, 3).into_iter().map(|r| r.unwrap()).collect();
    assert_eq!(one, three);
}

#[test]
fn refined_partition_is_inside_coarse_tube() {
    let sys = pendulum(PendulumParams::default()).unwrap();
    let emb = Arc::new(make_embedding(&sys, Method::Mjac, &EmbeddingOptions::default()).unwrap());
    let x0 = IntervalTensor::vector(&[0.2, -0.2], &[0.6, 0.2]).unwrap();
    let w = [iv(-0.02, 0.02)];
    let u = ControlInput::Interval(vec![iv(0.0, 0.05)]);
    let s = settings(Integrator::Euler, 0.5);
    let coarse = embedding_rollout(&emb, &x0, &w, &u, &s).unwrap();
    let grid = grid_partition(&x0, &[3, 3]).unwrap();
    let fine = run_partitions(&emb, &grid, &w, &u, &s, 2);
    let last = IntervalTensor::ut2i(coarse.last()).unwrap();
    for tr in fine {
        let cell = IntervalTensor::ut2i(tr.unwrap().last()).unwrap();
        for (c, l) in cell.data().iter().zip(last.data()) {
            assert!(c.lower >= l.lower - 1e-9 && c.upper <= l.upper + 1e-9, "{c} vs {l}");
        }
    }
}
