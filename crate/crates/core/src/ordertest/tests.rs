use super::*;
use crate::exec::Serial;
use crate::geometry::Window;
use crate::kernel::ClusterKernel;
use crate::processes::{IsingCox, IsingField, Poisson, PpCluster, PpClusterIntensity};
use alloc::vec;

fn quadrants(w: &crate::geometry::Window) -> Vec<Cuboid> {
    let mut out = Vec::new();
    for (x, y) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        out.push(Cuboid::new(w, &[x, y], &[x + 1.0, y + 1.0]).unwrap());
    }
    out
}

fn ising_pair() -> (Poisson, IsingCox, Vec<Cuboid>) {
    let w = Window::cube(2, 2.0, crate::geometry::Topology::Torus);
    let f = IsingField::new(2.0, 0.0, 0.5).unwrap();
    let poisson = Poisson::new(f.mean(), w.clone()).unwrap();
    let ising = IsingCox::new(f, w.clone(), vec![8, 8]).unwrap();
    let boxes = quadrants(&w);
    (poisson, ising, boxes)
}

#[test]
fn class_names_round_trip() {
    for c in OrderClass::ALL {
        assert_eq!(OrderClass::parse(c.name()).unwrap(), c);
    }
    assert!(OrderClass::parse("supermodular").is_err());
}

#[test]
fn identical_samplers_are_consistent() {
    let (p, _, boxes) = ising_pair();
    let mut rng = RngStream::new(1, 9);
    let suite = make_suite(OrderClass::Dcx, 20, &[1.0; 4], &mut rng).unwrap();
    let r = compare_on_boxes(&p, &p, &boxes, OrderClass::Dcx, &suite, &CompareOptions::new(2000), &RngStream::new(5, 0), &Serial).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
    assert!(r.mean_equality.as_ref().unwrap().passed);
}

#[test]
fn ising_dominates_poisson_and_reverse_fails() {
    let (p, ising, boxes) = ising_pair();
    let mut rng = RngStream::new(2, 9);
    let opts = CompareOptions::new(6000);
    let root = RngStream::new(6, 0);
    let pilot_x = sample_box_masses(&p, &boxes, 500, &root.child(7), &Serial).unwrap();
    let pilot_y = sample_box_masses(&ising, &boxes, 500, &root.child(8), &Serial).unwrap();
    let suite = make_suite(OrderClass::Dcx, 30, &pilot_scale(&pilot_x, &pilot_y), &mut rng).unwrap();
    let fwd = compare_on_boxes(&p, &ising, &boxes, OrderClass::Dcx, &suite, &opts, &root, &Serial).unwrap();
    assert_eq!(fwd.verdict, Verdict::Consistent, "{:?}", fwd.functions);
    assert!(fwd.count_above(3.0) >= 5);
    let me = fwd.mean_equality.as_ref().unwrap();
    assert!(me.passed);
    assert!(me.coordinates.iter().all(|c| c.exact.is_some()));
    let rev = compare_on_boxes(&ising, &p, &boxes, OrderClass::Dcx, &suite, &opts, &root, &Serial).unwrap();
    assert_eq!(rev.verdict, Verdict::Violation);
}

#[test]
fn swapping_reverses_signs() {
    let (p, ising, boxes) = ising_pair();
    let x = sample_box_masses(&p, &boxes, 800, &RngStream::new(1, 1), &Serial).unwrap();
    let y = sample_box_masses(&ising, &boxes, 800, &RngStream::new(1, 2), &Serial).unwrap();
    let mut rng = RngStream::new(3, 3);
    let suite = make_suite(OrderClass::Dcx, 12, &pilot_scale(&x, &y), &mut rng).unwrap();
    let opts = CompareOptions::new(800);
    let a = compare_samples(OrderClass::Dcx, &x, &y, &suite, &opts, None).unwrap();
    let b = compare_samples(OrderClass::Dcx, &y, &x, &suite, &opts, None).unwrap();
    for (fa, fb) in a.functions.iter().zip(&b.functions) {
        assert!((fa.z + fb.z).abs() < 1e-9 * fa.z.abs().max(1.0));
    }
}

#[test]
fn linear_gate_agrees_with_mean_gate() {
    let (p, ising, boxes) = ising_pair();
    let x = sample_box_masses(&p, &boxes, 3000, &RngStream::new(4, 1), &Serial).unwrap();
    let y = sample_box_masses(&ising, &boxes, 3000, &RngStream::new(4, 2), &Serial).unwrap();
    let lin: Vec<TestFunction> = (0..4)
        .flat_map(|k| {
            let mut theta = vec![0.0; 4];
            theta[k] = 1.0;
            [
                TestFunction::new(Kind::Linear { sign: 1.0 }, theta.clone(), OrderClass::Dcx),
                TestFunction::new(Kind::Linear { sign: -1.0 }, theta, OrderClass::Dcx),
            ]
        })
        .collect();
    let r = compare_samples(OrderClass::Dcx, &x, &y, &lin, &CompareOptions::new(3000), None).unwrap();
    let gate = r.mean_equality.unwrap();
    for (k, c) in gate.coordinates.iter().enumerate() {
        assert!((r.functions[2 * k].z - c.z).abs() < 1e-9);
        assert!((r.functions[2 * k + 1].z + c.z).abs() < 1e-9);
    }
    assert_eq!(gate.passed, r.verdict == Verdict::Consistent);
}

#[test]
fn mean_mismatch_is_inconclusive() {
    let (_, _, boxes) = ising_pair();
    let w = Window::cube(2, 2.0, crate::geometry::Topology::Torus);
    let a = Poisson::new(1.0, w.clone()).unwrap();
    let b = Poisson::new(1.3, w).unwrap();
    let suite = vec![TestFunction::new(Kind::StopLoss { t: 2.0, p: 1.0 }, vec![1.0; 4], OrderClass::Dcx)];
    let r = compare_on_boxes(&a, &b, &boxes, OrderClass::Dcx, &suite, &CompareOptions::new(500), &RngStream::new(1, 0), &Serial).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn input_errors() {
    let (p, _, boxes) = ising_pair();
    let suite = vec![TestFunction::new(Kind::Exp, vec![0.1; 2], OrderClass::Dcx)];
    let overlapping = vec![boxes[0].clone(), boxes[0].clone()];
    let opts = CompareOptions::new(10);
    let root = RngStream::new(0, 0);
    assert!(matches!(
        compare_on_boxes(&p, &p, &overlapping, OrderClass::Dcx, &suite, &opts, &root, &Serial),
        Err(Error::OverlappingBoxes(0, 1))
    ));
    assert_eq!(
        compare_on_boxes(&p, &p, &boxes, OrderClass::Dcx, &[], &opts, &root, &Serial),
        Err(Error::Empty("test-function suite"))
    );
}

#[test]
fn cluster_fields_decrease_in_c() {
    let w = Window::unit_torus(2);
    let k = ClusterKernel::Gaussian { sigma: 0.05 };
    let low = PpClusterIntensity(PpCluster::new(4.0, 20.0, k.clone(), w.clone()).unwrap());
    let high = PpClusterIntensity(PpCluster::new(1.0, 20.0, k, w).unwrap());
    let q = vec![vec![0.2, 0.2], vec![0.25, 0.2], vec![0.7, 0.6]];
    let mut rng = RngStream::new(8, 8);
    let suite = make_suite(OrderClass::Dcx, 20, &[20.0; 3], &mut rng).unwrap();
    let r = compare_fields(&low, &high, &q, OrderClass::Dcx, &suite, &CompareOptions::new(4000), &RngStream::new(2, 2), &Serial).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent, "{:?}", r.functions);
    assert!(r.count_above(3.0) > 0);
}

#[test]
fn lo_identical_and_grid() {
    let g = product_grid(&[vec![0.0, 1.0], vec![2.0, 3.0, 4.0]]);
    assert_eq!(g.len(), 6);
    assert_eq!(g[1], vec![0.0, 3.0]);
    let w = Window::unit_torus(2);
    let f = PpClusterIntensity(PpCluster::new(1.0, 20.0, ClusterKernel::Gaussian { sigma: 0.05 }, w).unwrap());
    let q = vec![vec![0.5, 0.5], vec![0.1, 0.1]];
    let th = product_grid(&[vec![0.0, 10.0, 20.0, 40.0], vec![0.0, 10.0, 20.0, 40.0]]);
    let r = lo_compare(&f, &f, &q, &th, 2000, 3.0, &RngStream::new(4, 4), &Serial).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
    assert!(lo_compare(&f, &f, &q, &[vec![f64::NAN, 0.0]], 10, 3.0, &RngStream::new(4, 4), &Serial).is_err());
}
