use std::sync::Mutex;

use dcx_core::kernel::ResponseKernel;
use dcx_core::ordertest::{
    compare_on_boxes, make_suite, oracle_ginibre_radii, oracle_poisson_scaling, CompareOptions, OrderClass, Verdict,
};
use dcx_core::processes::{Gnscp, MeasureSampler, Poisson};
use dcx_core::shotnoise::additive_sn;
use dcx_core::{AtomicMeasure, Cuboid, Measure, Replicator, RngStream, Serial, Topology, Window};

/// Evaluates replications back to front, in chunks, then restores order.
struct Backwards {
    chunk: usize,
}

impl Replicator for Backwards {
    fn run<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
        let mut starts: Vec<usize> = (0..n).step_by(self.chunk.max(1)).collect();
        starts.reverse();
        for s in starts {
            for i in (s..(s + self.chunk).min(n)).rev() {
                let v = f(i);
                slots.lock().unwrap()[i] = Some(v);
            }
        }
        slots.into_inner().unwrap().into_iter().map(Option::unwrap).collect()
    }
}

fn quadrants(w: &Window) -> Vec<Cuboid> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let lo = [i as f64 * 0.5, j as f64 * 0.5];
            out.push(Cuboid::new(w, &lo, &[lo[0] + 0.5, lo[1] + 0.5]).unwrap());
        }
    }
    out
}

#[test]
fn comparison_does_not_depend_on_evaluation_order() {
    let w = Window::unit_torus(2);
    let x = Poisson::new(30.0, w.clone()).unwrap();
    let y = Gnscp::thomas(5.0, 6.0, 0.05, w.clone()).unwrap();
    let boxes = quadrants(&w);
    let suite = make_suite(OrderClass::Dcx, 20, &[7.5; 4], &mut RngStream::new(3, 0)).unwrap();
    let opts = CompareOptions::new(500);
    let root = RngStream::new(11, 42);
    let a = compare_on_boxes(&x, &y, &boxes, OrderClass::Dcx, &suite, &opts, &root, &Serial).unwrap();
    let b = compare_on_boxes(&x, &y, &boxes, OrderClass::Dcx, &suite, &opts, &root, &Backwards { chunk: 7 }).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.verdict, Verdict::Violation);
}

#[test]
fn different_roots_give_different_draws() {
    let w = Window::unit_torus(2);
    let p = Poisson::new(20.0, w).unwrap();
    let a = p.sample_points(&mut RngStream::new(1, 0)).unwrap();
    let b = p.sample_points(&mut RngStream::new(1, 1)).unwrap();
    let again = p.sample_points(&mut RngStream::new(1, 0)).unwrap();
    assert_eq!(a, again);
    assert_ne!(a, b);
}

#[test]
fn torus_distance_wraps_and_plain_does_not() {
    let torus = Window::unit_torus(2);
    let plain = Window::cube(2, 1.0, Topology::Plain);
    let (a, b) = ([0.05, 0.5], [0.95, 0.5]);
    assert!((torus.dist(&a, &b) - 0.1).abs() < 1e-12);
    assert!((plain.dist(&a, &b) - 0.9).abs() < 1e-12);
    let mut p = [1.25, -0.25];
    torus.wrap(&mut p);
    assert!((p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.75).abs() < 1e-12);
}

#[test]
fn oracles_are_exact_and_repeatable() {
    let o = oracle_poisson_scaling(1.0, 2.0, None).unwrap();
    assert!(o.pass);
    assert!(o.max_violation <= 1e-9 && o.mean_diff <= 1e-9);
    assert_eq!(o, oracle_poisson_scaling(1.0, 2.0, None).unwrap());
    let g = oracle_ginibre_radii(2.0, None).unwrap();
    assert!(g.pass);
    assert!((g.forward.mean_x - 2.0).abs() <= 1e-9);
}

#[test]
fn additive_shot_noise_is_linear_in_the_measure() {
    let w = Window::unit_torus(2);
    let h = ResponseKernel::power_law(4.0, 1.0);
    let q = vec![vec![0.5, 0.5], vec![0.1, 0.9]];
    let a = AtomicMeasure::new(w.clone(), vec![0.2, 0.3, 0.7, 0.6], vec![1.0, 0.5]).unwrap();
    let b = AtomicMeasure::new(w.clone(), vec![0.9, 0.1], vec![2.0]).unwrap();
    let both = AtomicMeasure::new(w.clone(), vec![0.2, 0.3, 0.7, 0.6, 0.9, 0.1], vec![1.0, 0.5, 2.0]).unwrap();
    let doubled = AtomicMeasure::new(w, vec![0.2, 0.3, 0.7, 0.6], vec![2.0, 1.0]).unwrap();
    let va = additive_sn(&Measure::Atoms(a), &h, &q).unwrap();
    let vb = additive_sn(&Measure::Atoms(b), &h, &q).unwrap();
    let vab = additive_sn(&Measure::Atoms(both), &h, &q).unwrap();
    let v2a = additive_sn(&Measure::Atoms(doubled), &h, &q).unwrap();
    for k in 0..q.len() {
        assert!((vab[k] - va[k] - vb[k]).abs() <= 1e-12 * vab[k].abs().max(1.0));
        assert!((v2a[k] - 2.0 * va[k]).abs() <= 1e-12 * v2a[k].abs().max(1.0));
    }
}

#[test]
fn poisson_counts_have_the_right_mean() {
    let w = Window::unit_torus(2);
    let p = Poisson::new(40.0, w).unwrap();
    let root = RngStream::new(8, 0);
    let n = 2000;
    let total: usize = (0..n).map(|i| p.sample_points(&mut root.child(i)).unwrap().len()).sum();
    let mean = total as f64 / n as f64;
    let se = (40.0 / n as f64).sqrt();
    assert!((mean - 40.0).abs() < 4.0 * se, "mean {mean}");
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

    #[test]
    fn wrapped_points_stay_in_the_torus(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let w = Window::unit_torus(2);
        let mut p = [x, y];
        w.wrap(&mut p);
        proptest::prop_assert!(w.contains(&p));
        proptest::prop_assert!(w.dist(&p, &[x, y]) < 1e-9);
    }

    #[test]
    fn poisson_scaling_oracle_holds_off_grid(a in 0.3f64..3.0, c in 1.1f64..4.0) {
        let o = oracle_poisson_scaling(a, c, None).unwrap();
        proptest::prop_assert!(o.pass, "a={} c={} violation={}", a, c, o.max_violation);
    }
}
