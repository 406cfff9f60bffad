//! Operations on realizations that preserve the dcx order: displacement,
//! marking, thinning, superposition, mark projection and product powers.

use alloc::vec::Vec;

use crate::dist::MassDistribution;
use crate::error::{invalid, Error, Result};
use crate::geometry::{Cuboid, Window};
use crate::kernel::ClusterKernel;
use crate::measure::Measure;
use crate::pattern::{Marks, PointPattern};
use crate::processes::MeasureSampler;
use crate::rng::RngStream;

fn keep_marks(marks: Option<&Marks>, keep: &[bool]) -> Option<Marks> {
    marks.map(|m| match m {
        Marks::Scalar(v) => Marks::Scalar(v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect()),
        Marks::Vector { dim, values } => Marks::Vector {
            dim: *dim,
            values: values
                .chunks_exact(*dim)
                .zip(keep)
                .filter(|(_, k)| **k)
                .flat_map(|(x, _)| x.iter().copied())
                .collect(),
        },
    })
}

/// Replaces every point by its image under `map`. Images are wrapped on a
/// torus; on a plain window images falling outside are dropped and counted.
/// Marks follow their points.
pub fn displace(p: &PointPattern, map: impl Fn(&[f64], &mut [f64])) -> (PointPattern, usize) {
    let w = p.window();
    let d = w.dim();
    let mut coords = Vec::with_capacity(p.coords().len());
    let mut keep = Vec::with_capacity(p.len());
    let mut img = alloc::vec![0.0; d];
    for x in p.points() {
        map(x, &mut img);
        let ok = img.iter().all(|v| v.is_finite()) && w.wrap(&mut img);
        if ok {
            coords.extend_from_slice(&img);
        }
        keep.push(ok);
    }
    let dropped = keep.iter().filter(|k| !**k).count();
    let marks = keep_marks(p.marks(), &keep);
    (PointPattern::from_raw(w.clone(), coords, marks), dropped)
}

/// Attaches i.i.d. scalar marks drawn from `mark`.
pub fn mark_iid(p: &PointPattern, mark: &MassDistribution, rng: &mut RngStream) -> Result<PointPattern> {
    mark.validate()?;
    let marks = (0..p.len()).map(|_| mark.sample(rng)).collect();
    p.clone().with_marks(Marks::Scalar(marks))
}

/// Attaches independent scalar marks, the mark of `x` drawn from `kernel(x)`.
pub fn mark_independent(
    p: &PointPattern,
    kernel: impl Fn(&[f64]) -> MassDistribution,
    rng: &mut RngStream,
) -> Result<PointPattern> {
    let mut marks = Vec::with_capacity(p.len());
    for x in p.points() {
        let law = kernel(x);
        law.validate()?;
        marks.push(law.sample(rng));
    }
    p.clone().with_marks(Marks::Scalar(marks))
}

/// Marks each point `x` with `x + Y`, `Y` an i.i.d. offset drawn from the
/// density kernel. Marks are wrapped on a torus and left as-is otherwise.
pub fn mark_displacement(p: &PointPattern, kernel: &ClusterKernel, rng: &mut RngStream) -> Result<PointPattern> {
    let w = p.window();
    let d = w.dim();
    kernel.validate(d)?;
    if !kernel.is_density() {
        return Err(invalid("kernel", "displacement needs a probability density"));
    }
    let mut values = Vec::with_capacity(p.coords().len());
    let mut off = Vec::with_capacity(d);
    for x in p.points() {
        off.clear();
        kernel.sample_offset(d, rng, &mut off);
        for axis in 0..d {
            let v = x[axis] + off[axis];
            values.push(if w.is_torus() { w.wrap_coord(axis, v) } else { v });
        }
    }
    p.clone().with_marks(Marks::Vector { dim: d, values })
}

fn thin_coins(p: &PointPattern, retention: impl Fn(&[f64]) -> f64, rng: &mut RngStream) -> Result<Vec<bool>> {
    let mut keep = Vec::with_capacity(p.len());
    for x in p.points() {
        let q = retention(x);
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid("retention", "must lie in [0, 1]"));
        }
        // one uniform per point, whatever the retention, so coin flips
        // line up across differently thinned copies
        keep.push(rng.uniform() < q);
    }
    Ok(keep)
}

fn split_by(p: &PointPattern, keep: &[bool]) -> (PointPattern, PointPattern) {
    let mut kept = Vec::new();
    let mut gone = Vec::new();
    for (x, k) in p.points().zip(keep) {
        if *k { &mut kept } else { &mut gone }.extend_from_slice(x);
    }
    let inverse: Vec<bool> = keep.iter().map(|k| !k).collect();
    (
        PointPattern::from_raw(p.window().clone(), kept, keep_marks(p.marks(), keep)),
        PointPattern::from_raw(p.window().clone(), gone, keep_marks(p.marks(), &inverse)),
    )
}

/// Keeps each point independently with probability `retention`.
pub fn thin_iid(p: &PointPattern, retention: f64, rng: &mut RngStream) -> Result<PointPattern> {
    Ok(thin_split(p, retention, rng)?.0)
}

/// The thinned pattern together with its complement under the same coins.
pub fn thin_split(p: &PointPattern, retention: f64, rng: &mut RngStream) -> Result<(PointPattern, PointPattern)> {
    let keep = thin_coins(p, |_| retention, rng)?;
    Ok(split_by(p, &keep))
}

/// Keeps `x` independently with probability `retention(x)`.
pub fn thin_independent(
    p: &PointPattern,
    retention: impl Fn(&[f64]) -> f64,
    rng: &mut RngStream,
) -> Result<PointPattern> {
    let keep = thin_coins(p, retention, rng)?;
    Ok(split_by(p, &keep).0)
}

/// Union with multiplicity. Marks are concatenated when both patterns carry
/// marks of the same kind and dropped when neither does.
pub fn superpose(p1: &PointPattern, p2: &PointPattern) -> Result<PointPattern> {
    if p1.window() != p2.window() {
        return Err(Error::WindowMismatch);
    }
    let mut coords = Vec::with_capacity(p1.coords().len() + p2.coords().len());
    coords.extend_from_slice(p1.coords());
    coords.extend_from_slice(p2.coords());
    let marks = match (p1.marks(), p2.marks()) {
        (None, None) => None,
        (Some(Marks::Scalar(a)), Some(Marks::Scalar(b))) => Some(Marks::Scalar(a.iter().chain(b).copied().collect())),
        (Some(Marks::Vector { dim: da, values: a }), Some(Marks::Vector { dim: db, values: b })) if da == db => {
            Some(Marks::Vector {
                dim: *da,
                values: a.iter().chain(b).copied().collect(),
            })
        }
        _ => return Err(invalid("marks", "superposed patterns must carry marks of the same kind")),
    };
    Ok(PointPattern::from_raw(p1.window().clone(), coords, marks))
}

/// The pattern formed by the marks, which must be points of `mark_window`.
pub fn project_marks(p: &PointPattern, mark_window: &Window) -> Result<PointPattern> {
    let coords = match p.marks() {
        None => return Err(Error::MissingMarks("point-valued")),
        Some(Marks::Scalar(v)) if mark_window.dim() == 1 => v.clone(),
        Some(Marks::Vector { dim, values }) if *dim == mark_window.dim() => values.clone(),
        Some(_) => {
            return Err(invalid("marks", "marks are not points of the mark window"));
        }
    };
    PointPattern::from_coords(mark_window.clone(), coords)
}

/// One realization of the `k`-th power measure on every ordered `k`-tuple
/// of `boxes`, in lexicographic tuple order.
pub fn product_power_counts(m: &Measure, boxes: &[Cuboid], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > 3 {
        return Err(invalid("k", "product powers are limited to 1 <= k <= 3"));
    }
    let masses: Vec<f64> = boxes.iter().map(|b| m.mass_in(b)).collect();
    let n = masses.len();
    let total = n.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    for mut t in 0..total {
        let mut prod = 1.0;
        let mut digits = [0usize; 3];
        for slot in (0..k).rev() {
            digits[slot] = t % n;
            t /= n;
        }
        for &i in &digits[..k] {
            prod *= masses[i];
        }
        out.push(prod);
    }
    Ok(out)
}

/// A sampler followed by a random operation on its points. The source draws
/// from child stream 0 and the operation from child stream 1.
pub struct Transformed<S, F> {
    pub source: S,
    pub op: F,
    /// Factor applied to the source mean measure, when the operation has one.
    pub mean_factor: Option<f64>,
}

impl<S, F> Transformed<S, F> {
    pub fn new(source: S, op: F, mean_factor: Option<f64>) -> Self {
        Self {
            source,
            op,
            mean_factor,
        }
    }
}

impl<S, F> MeasureSampler for Transformed<S, F>
where
    S: MeasureSampler,
    F: Fn(PointPattern, &mut RngStream) -> Result<PointPattern> + Sync + Send,
{
    fn window(&self) -> &Window {
        self.source.window()
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(self.sample_points(rng)?.into())
    }
    fn sample_points(&self, rng: &mut RngStream) -> Result<PointPattern> {
        let p = self.source.sample_points(&mut rng.child(0))?;
        (self.op)(p, &mut rng.child(1))
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(self.source.mean_mass(b)? * self.mean_factor?)
    }
}

/// Superposition of two independent samplers on the same window.
pub struct Superposed<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: MeasureSampler, B: MeasureSampler> MeasureSampler for Superposed<A, B> {
    fn window(&self) -> &Window {
        self.first.window()
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(self.sample_points(rng)?.into())
    }
    fn sample_points(&self, rng: &mut RngStream) -> Result<PointPattern> {
        let a = self.first.sample_points(&mut rng.child(0))?;
        let b = self.second.sample_points(&mut rng.child(1))?;
        superpose(&a, &b)
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(self.first.mean_mass(b)? + self.second.mean_mass(b)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Topology;
    use crate::processes::sample_poisson;
    use crate::special::poisson_pmf;
    use alloc::vec;

    fn sorted(p: &PointPattern) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = p.points().map(|x| x.to_vec()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn chi_square_poisson(counts: &[u64], mean: f64, n: usize) -> (f64, usize) {
        // bins 0..k-1 plus a tail bin, merged so each has expectation >= 5
        let mut stat = 0.0;
        let mut bins = 0;
        let mut obs_acc = 0.0;
        let mut exp_acc = 0.0;
        let mut seen = 0.0;
        let mut cum = 0.0;
        for k in 0..200u64 {
            let o = counts.iter().filter(|&&c| c == k).count() as f64;
            let e = poisson_pmf(k, mean) * n as f64;
            obs_acc += o;
            exp_acc += e;
            seen += o;
            cum += e;
            if exp_acc >= 5.0 && (n as f64 - cum) >= 5.0 {
                stat += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
                bins += 1;
                obs_acc = 0.0;
                exp_acc = 0.0;
            }
        }
        let o = n as f64 - seen + obs_acc;
        let e = n as f64 - cum + exp_acc;
        stat += (o - e) * (o - e) / e;
        bins += 1;
        (stat, bins - 1)
    }

    fn pattern() -> PointPattern {
        let w = Window::unit_torus(2);
        PointPattern::from_points(w, &[vec![0.1, 0.2], vec![0.5, 0.5], vec![0.9, 0.95]]).unwrap()
    }

    #[test]
    fn identity_and_translation() {
        let p = pattern();
        let (q, dropped) = displace(&p, |x, out| out.copy_from_slice(x));
        assert_eq!((q, dropped), (p.clone(), 0));
        let (t, _) = displace(&p, |x, out| {
            out[0] = x[0] + 0.3;
            out[1] = x[1] + 0.3;
        });
        let b = Cuboid::new(p.window(), &[0.3, 0.3], &[0.9, 0.9]).unwrap();
        let b0 = Cuboid::new(p.window(), &[0.0, 0.0], &[0.6, 0.6]).unwrap();
        assert_eq!(t.count_in(&b), p.count_in(&b0));
    }

    #[test]
    fn constant_map_and_plain_drop() {
        let p = pattern();
        let (q, _) = displace(&p, |_, out| out.copy_from_slice(&[0.4, 0.4]));
        let b = Cuboid::new(p.window(), &[0.3, 0.3], &[0.5, 0.5]).unwrap();
        assert_eq!(q.count_in(&b), 3);
        let plain = PointPattern::from_points(Window::cube(2, 1.0, Topology::Plain), &[vec![0.5, 0.5], vec![0.9, 0.9]]).unwrap();
        let (q, dropped) = displace(&plain, |x, out| {
            out[0] = x[0] + 0.2;
            out[1] = x[1];
        });
        assert_eq!((q.len(), dropped), (1, 1));
    }

    #[test]
    fn iid_marks() {
        let p = pattern();
        let mut rng = RngStream::new(3, 0);
        let m = mark_iid(&p, &MassDistribution::Constant(2.5), &mut rng).unwrap();
        assert_eq!(m.marks(), Some(&Marks::Scalar(vec![2.5; 3])));
        let w = Window::unit_torus(2);
        let (mut s, mut n) = (0.0, 0usize);
        let (mut cm, mut cc, mut cmm, mut ccc, mut cmc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let reps = 4000;
        let mut used = 0.0;
        for _ in 0..reps {
            let p = sample_poisson(20.0, &w, &mut rng).unwrap();
            let m = mark_iid(&p, &MassDistribution::Exponential { mean: 2.0 }, &mut rng).unwrap();
            let Some(Marks::Scalar(v)) = m.marks() else { unreachable!() };
            s += v.iter().sum::<f64>();
            n += v.len();
            if !v.is_empty() {
                let mm = v.iter().sum::<f64>() / v.len() as f64;
                let c = v.len() as f64;
                cm += mm;
                cc += c;
                cmm += mm * mm;
                ccc += c * c;
                cmc += mm * c;
                used += 1.0;
            }
        }
        let mean = s / n as f64;
        let se = 2.0 / libm::sqrt(n as f64);
        assert!((mean - 2.0).abs() < 4.0 * se);
        let cov = cmc / used - cm / used * cc / used;
        let rho = cov / libm::sqrt((cmm / used - (cm / used).powi(2)) * (ccc / used - (cc / used).powi(2)));
        assert!(rho.abs() < 0.07, "rho {rho}");
    }

    #[test]
    fn position_dependent_marks() {
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(8, 0);
        let law = |x: &[f64]| {
            if x[0] < 0.5 {
                MassDistribution::Exponential { mean: 1.0 }
            } else {
                MassDistribution::Gamma { shape: 2.0, scale: 2.0 }
            }
        };
        let (mut left, mut nl, mut right, mut nr) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..2000 {
            let p = sample_poisson(30.0, &w, &mut rng).unwrap();
            let m = mark_independent(&p, law, &mut rng).unwrap();
            for i in 0..m.len() {
                if m.point(i)[0] < 0.5 {
                    left += m.weight(i);
                    nl += 1.0;
                } else {
                    right += m.weight(i);
                    nr += 1.0;
                }
            }
        }
        assert!((left / nl - 1.0).abs() < 4.0 / libm::sqrt(nl));
        assert!((right / nr - 4.0).abs() < 4.0 * libm::sqrt(8.0 / nr));
        let p = pattern();
        let fixed = mark_independent(&p, |x| MassDistribution::Constant(x[0] + x[1]), &mut rng).unwrap();
        assert_eq!(fixed.weight(1), 1.0);
    }

    #[test]
    fn thinning_extremes_and_complement() {
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(9, 0);
        let p = sample_poisson(100.0, &w, &mut rng).unwrap();
        assert_eq!(thin_iid(&p, 1.0, &mut rng).unwrap(), p);
        assert!(thin_iid(&p, 0.0, &mut rng).unwrap().is_empty());
        let (a, b) = thin_split(&p, 0.3, &mut rng).unwrap();
        assert_eq!(sorted(&superpose(&a, &b).unwrap()), sorted(&p));
        assert!(thin_iid(&p, 1.5, &mut rng).is_err());
        let half = thin_independent(&p, |x| if x[0] < 0.5 { 1.0 } else { 0.0 }, &mut rng).unwrap();
        let left = Cuboid::new(&w, &[0.0, 0.0], &[0.5, 1.0]).unwrap();
        assert_eq!(half.len(), p.count_in(&left));
        assert!(thin_independent(&p, |_| -0.1, &mut rng).is_err());
    }

    #[test]
    fn poisson_thinning_pmf() {
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(10, 0);
        let n = 20_000;
        let counts: Vec<u64> = (0..n)
            .map(|_| {
                let p = sample_poisson(6.0, &w, &mut rng).unwrap();
                thin_iid(&p, 0.4, &mut rng).unwrap().len() as u64
            })
            .collect();
        let (stat, dof) = chi_square_poisson(&counts, 2.4, n);
        // 0.999 quantile of chi-square is well below dof + 6 sqrt(2 dof) + 10
        assert!(stat < dof as f64 + 6.0 * libm::sqrt(2.0 * dof as f64) + 10.0, "{stat} on {dof}");
    }

    #[test]
    fn inhomogeneous_thinning_mean() {
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(11, 0);
        let reps = 5000;
        let total: usize = (0..reps)
            .map(|_| {
                let p = sample_poisson(10.0, &w, &mut rng).unwrap();
                thin_independent(&p, |x| x[0], &mut rng).unwrap().len()
            })
            .sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 5.0).abs() < 4.0 * libm::sqrt(5.0 / reps as f64));
    }

    #[test]
    fn superposition() {
        let p = pattern();
        let e = PointPattern::empty(p.window().clone());
        assert_eq!(superpose(&p, &e).unwrap(), p);
        let other = PointPattern::empty(Window::cube(2, 2.0, Topology::Torus));
        assert_eq!(superpose(&p, &other), Err(Error::WindowMismatch));
        let w = p.window().clone();
        let mut rng = RngStream::new(12, 0);
        let b = Cuboid::new(&w, &[0.0, 0.0], &[0.5, 0.7]).unwrap();
        let n = 20_000;
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            let a = sample_poisson(1.5, &w, &mut rng).unwrap();
            let c = sample_poisson(2.5, &w, &mut rng).unwrap();
            let s = superpose(&a, &c).unwrap();
            assert_eq!(s.count_in(&b), a.count_in(&b) + c.count_in(&b));
            counts.push(s.len() as u64);
        }
        let (stat, dof) = chi_square_poisson(&counts, 4.0, n);
        assert!(stat < dof as f64 + 6.0 * libm::sqrt(2.0 * dof as f64) + 10.0, "{stat} on {dof}");
    }

    #[test]
    fn projection() {
        let p = pattern();
        let as_marks = p.clone().with_marks(Marks::Vector { dim: 2, values: p.coords().to_vec() }).unwrap();
        assert_eq!(project_marks(&as_marks, p.window()).unwrap(), p);
        assert_eq!(project_marks(&p, p.window()), Err(Error::MissingMarks("point-valued")));
        // Gaussian displacement keeps the Poisson mean measure
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(13, 0);
        let k = ClusterKernel::Gaussian { sigma: 0.1 };
        let b = Cuboid::new(&w, &[0.0, 0.0], &[0.25, 0.5]).unwrap();
        let reps = 5000;
        let mut total = 0usize;
        for _ in 0..reps {
            let p = sample_poisson(40.0, &w, &mut rng).unwrap();
            let m = mark_displacement(&p, &k, &mut rng).unwrap();
            total += project_marks(&m, &w).unwrap().count_in(&b);
        }
        let mean = total as f64 / reps as f64;
        assert!((mean - 5.0).abs() < 4.0 * libm::sqrt(5.0 / reps as f64));
    }

    #[test]
    fn product_powers() {
        let w = Window::unit_torus(1);
        let p = PointPattern::from_points(w.clone(), &[vec![0.1], vec![0.2], vec![0.7]]).unwrap();
        let b1 = Cuboid::new(&w, &[0.0], &[0.5]).unwrap();
        let b2 = Cuboid::new(&w, &[0.5], &[1.0]).unwrap();
        let m: Measure = p.into();
        assert_eq!(product_power_counts(&m, &[b1.clone(), b2.clone()], 1).unwrap(), vec![2.0, 1.0]);
        assert_eq!(product_power_counts(&m, &[b1.clone(), b2.clone()], 2).unwrap(), vec![4.0, 2.0, 2.0, 1.0]);
        assert_eq!(product_power_counts(&m, core::slice::from_ref(&b1), 3).unwrap(), vec![8.0]);
        assert!(product_power_counts(&m, &[b1, b2], 4).is_err());
    }

    #[test]
    fn poisson_disjoint_product_moment() {
        let w = Window::unit_torus(2);
        let b1 = Cuboid::new(&w, &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        let b2 = Cuboid::new(&w, &[0.5, 0.5], &[1.0, 0.75]).unwrap();
        let mut rng = RngStream::new(14, 0);
        let reps = 20_000;
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..reps {
            let m: Measure = sample_poisson(8.0, &w, &mut rng).unwrap().into();
            let v = product_power_counts(&m, &[b1.clone(), b2.clone()], 2).unwrap()[1];
            s += v;
            ss += v * v;
        }
        let mean = s / reps as f64;
        let se = libm::sqrt((ss / reps as f64 - mean * mean) / reps as f64);
        assert!((mean - 64.0 * 0.25 * 0.125).abs() < 4.0 * se, "{mean}");
    }
}
