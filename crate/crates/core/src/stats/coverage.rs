use alloc::vec::Vec;

use super::{Estimate, Moments};
use crate::error::{invalid, Error, Result};
use crate::pattern::{Marks, PointPattern};

/// Number of grains covering each query, grains being balls centred at the
/// points with radii given by the scalar marks.
pub fn coverage_field(p: &PointPattern, queries: &[Vec<f64>]) -> Result<Vec<u64>> {
    let radii = match p.marks() {
        Some(Marks::Scalar(r)) => r,
        _ => return Err(Error::MissingMarks("grain radius")),
    };
    let w = p.window();
    Ok(queries
        .iter()
        .map(|y| {
            p.points()
                .zip(radii)
                .filter(|(x, &r)| w.distance_sq(x, y) <= r * r)
                .count() as u64
        })
        .collect())
}

/// Empirical joint generating function `mean of Π s_j^{v_j}`, with `0⁰ = 1`.
pub fn joint_pgf(count_reps: &[Vec<u64>], s: &[f64]) -> Result<Estimate> {
    if s.iter().any(|&v| !(v >= 0.0)) {
        return Err(invalid("s", "arguments must be non-negative"));
    }
    if count_reps.is_empty() {
        return Err(Error::Empty("replications"));
    }
    let mut m = Moments::new();
    for v in count_reps {
        if v.len() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: v.len(),
            });
        }
        let prod: f64 = v.iter().zip(s).map(|(&k, &sj)| libm::pow(sj, k as f64)).product();
        m.push(prod);
    }
    Ok(m.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::MassDistribution;
    use crate::geometry::Window;
    use crate::ops::mark_iid;
    use crate::processes::sample_poisson;
    use crate::rng::RngStream;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn basic_coverage() {
        let w = Window::unit_torus(2);
        let empty = PointPattern::empty(w.clone()).with_marks(Marks::Scalar(vec![])).unwrap();
        assert_eq!(coverage_field(&empty, &[vec![0.5, 0.5]]).unwrap(), vec![0]);
        let one = PointPattern::from_points(w.clone(), &[vec![0.5, 0.5]]).unwrap();
        assert_eq!(coverage_field(&one, &[vec![0.5, 0.5]]), Err(Error::MissingMarks("grain radius")));
        let one = one.with_marks(Marks::Scalar(vec![0.1])).unwrap();
        assert_eq!(coverage_field(&one, &[vec![0.55, 0.5], vec![0.7, 0.5]]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn pgf_conventions() {
        let reps = vec![vec![0, 3], vec![2, 0], vec![0, 0]];
        assert_eq!(joint_pgf(&reps, &[1.0, 1.0]).unwrap().value, 1.0);
        let void = joint_pgf(&reps, &[0.0, 0.0]).unwrap().value;
        assert!((void - 1.0 / 3.0).abs() < 1e-15);
        assert!(joint_pgf(&reps, &[-0.5, 1.0]).is_err());
    }

    #[test]
    fn poisson_void_and_pgf() {
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(7, 0);
        let (lambda, r) = (30.0, 0.1);
        let grain = MassDistribution::Constant(r);
        let q = vec![vec![0.3, 0.6]];
        let reps: Vec<Vec<u64>> = (0..20_000)
            .map(|_| {
                let p = sample_poisson(lambda, &w, &mut rng).unwrap();
                coverage_field(&mark_iid(&p, &grain, &mut rng).unwrap(), &q).unwrap()
            })
            .collect();
        let a = lambda * PI * r * r;
        let void = joint_pgf(&reps, &[0.0]).unwrap();
        assert!(void.z_against(libm::exp(-a)).abs() < 3.5);
        let half = joint_pgf(&reps, &[0.5]).unwrap();
        assert!(half.z_against(libm::exp(-0.5 * a)).abs() < 3.5);
    }

    #[test]
    fn coverage_monotone_in_radius() {
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(8, 0);
        let p = sample_poisson(20.0, &w, &mut rng).unwrap();
        let q: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 50.0, 0.37]).collect();
        let mut last = 0.0;
        for r in [0.01, 0.05, 0.1, 0.2] {
            let n = p.len();
            let c = coverage_field(&p.clone().with_marks(Marks::Scalar(vec![r; n])).unwrap(), &q).unwrap();
            let covered = 1.0 - joint_pgf(&c.iter().map(|&v| vec![v]).collect::<Vec<_>>(), &[0.0]).unwrap().value;
            assert!(covered >= last);
            last = covered;
        }
    }
}
