//! Integral and extremal shot-noise fields.

use alloc::vec::Vec;
use core::cell::Cell;

use crate::error::{invalid, Error, Result};
use crate::geometry::Window;
use crate::kernel::{ResponseKernel, ResponseShape};
use crate::measure::Measure;
use crate::pattern::PointPattern;
use crate::processes::MeasureSampler;
use crate::rng::RngStream;
use crate::special::unit_sphere_area;

/// A random field observed at finitely many query points.
pub trait FieldSampler: Sync + Send {
    fn sample_at(&self, queries: &[Vec<f64>], rng: &mut RngStream) -> Result<Vec<f64>>;
}

impl<F: FieldSampler + ?Sized> FieldSampler for &F {
    fn sample_at(&self, queries: &[Vec<f64>], rng: &mut RngStream) -> Result<Vec<f64>> {
        (**self).sample_at(queries, rng)
    }
}

impl<F: FieldSampler + ?Sized> FieldSampler for alloc::boxed::Box<F> {
    fn sample_at(&self, queries: &[Vec<f64>], rng: &mut RngStream) -> Result<Vec<f64>> {
        (**self).sample_at(queries, rng)
    }
}

/// `V(y) = Σ mass · h(atom, y)`. Points weigh 1 unless they carry scalar
/// marks; grid cells act as atoms at their midpoints. Contributions past
/// the kernel's truncation radius are dropped.
pub fn additive_sn(src: &Measure, h: &ResponseKernel, queries: &[Vec<f64>]) -> Result<Vec<f64>> {
    let w = src.window();
    let r_max = h.truncation_radius();
    let r2_max = r_max * r_max;
    let mut out = alloc::vec![0.0; queries.len()];
    let mut bad = false;
    src.for_each_atom(|x, m| {
        if m == 0.0 {
            return;
        }
        for (slot, y) in out.iter_mut().zip(queries) {
            let r2 = w.distance_sq(x, y);
            if r2 <= r2_max {
                let v = h.value(libm::sqrt(r2));
                if !v.is_finite() {
                    bad = true;
                }
                *slot += m * v;
            }
        }
    });
    if bad {
        return Err(Error::NonFinite("response kernel"));
    }
    Ok(out)
}

/// `U(y) = max_i h(X_i, y)`, with 0 (the kernel infimum) on empty patterns.
pub fn extremal_sn(p: &PointPattern, h: &ResponseKernel, queries: &[Vec<f64>]) -> Vec<f64> {
    let w = p.window();
    let r_max = h.truncation_radius();
    queries
        .iter()
        .map(|y| {
            p.points()
                .filter_map(|x| {
                    let r = w.dist(x, y);
                    (r <= r_max).then(|| h.value(r))
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Additive shot noise of a random measure as a field sampler.
#[derive(Clone, Debug)]
pub struct ShotNoiseField<S> {
    pub source: S,
    pub kernel: ResponseKernel,
}

impl<S: MeasureSampler> FieldSampler for ShotNoiseField<S> {
    fn sample_at(&self, queries: &[Vec<f64>], rng: &mut RngStream) -> Result<Vec<f64>> {
        let m = self.source.sample(rng)?;
        additive_sn(&m, &self.kernel, queries)
    }
}

/// Extremal shot noise of a point process as a field sampler.
#[derive(Clone, Debug)]
pub struct ExtremalField<S> {
    pub source: S,
    pub kernel: ResponseKernel,
}

impl<S: MeasureSampler> FieldSampler for ExtremalField<S> {
    fn sample_at(&self, queries: &[Vec<f64>], rng: &mut RngStream) -> Result<Vec<f64>> {
        let p = self.source.sample_points(rng)?;
        Ok(extremal_sn(&p, &self.kernel, queries))
    }
}

const QUAD_MAX_DEPTH: u32 = 48;

struct Simpson {
    tol: f64,
    failed: Cell<bool>,
    worst: Cell<f64>,
}

impl Simpson {
    fn new(tol: f64) -> Self {
        Simpson {
            tol,
            failed: Cell::new(false),
            worst: Cell::new(0.0),
        }
    }

    fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        if a >= b {
            return 0.0;
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.step(f, [a, b], [fa, fm, fb], whole, self.tol, QUAD_MAX_DEPTH)
    }

    fn step(&self, f: &dyn Fn(f64) -> f64, [a, b]: [f64; 2], [fa, fm, fb]: [f64; 3], whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return left + right + err / 15.0;
        }
        if depth == 0 {
            self.failed.set(true);
            self.worst.set(self.worst.get().max(err.abs()));
            return left + right + err / 15.0;
        }
        self.step(f, [a, m], [fa, flm, fm], left, 0.5 * tol, depth - 1)
            + self.step(f, [m, b], [fm, frm, fb], right, 0.5 * tol, depth - 1)
    }

    fn check(&self, v: f64) -> Result<f64> {
        if self.failed.get() || !v.is_finite() {
            return Err(Error::Quadrature(self.worst.get()));
        }
        Ok(v)
    }
}

fn nested(s: &Simpson, f: &dyn Fn(&[f64]) -> f64, lows: &[f64], highs: &[f64], splits: &[f64], prefix: &[f64]) -> f64 {
    let axis = prefix.len();
    if axis == lows.len() {
        return f(prefix);
    }
    let cut = splits[axis].clamp(lows[axis], highs[axis]);
    let g = |t: f64| {
        let mut p = prefix.to_vec();
        p.push(t);
        nested(s, f, lows, highs, splits, &p)
    };
    s.integrate(&g, lows[axis], cut) + s.integrate(&g, cut, highs[axis])
}

fn radial_profile(h: &ResponseKernel, dim: usize, r_max: f64, tol: f64) -> Result<f64> {
    let mut breaks = alloc::vec![0.0];
    if let ResponseShape::UserGrid { step, values } = &h.shape {
        for i in 1..values.len() {
            let r = *step * i as f64;
            if r < r_max {
                breaks.push(r);
            }
        }
    }
    breaks.push(r_max);
    let s = Simpson::new(tol);
    let g = |r: f64| libm::pow(r, dim as f64 - 1.0) * h.value(r);
    let mut total = 0.0;
    for pair in breaks.windows(2) {
        total += s.integrate(&g, pair[0], pair[1]);
    }
    Ok(unit_sphere_area(dim) * s.check(total)?)
}

/// `intensity · ∫_w h(x, y) dx`, the mean of the additive shot noise of a
/// stationary process at `y` (Campbell's formula).
pub fn campbell_mean(h: &ResponseKernel, intensity: f64, w: &Window, y: &[f64]) -> Result<f64> {
    h.validate(w.dim()).or_else(|e| match h.shape {
        // the integral over a bounded window is finite for any beta
        ResponseShape::PowerLaw { .. } => Ok(()),
        _ => Err(e),
    })?;
    if y.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: y.len(),
        });
    }
    if intensity == 0.0 || h.emitted_power == 0.0 {
        return Ok(0.0);
    }
    if !intensity.is_finite() {
        return Err(invalid("mean_intensity", "must be finite"));
    }
    let d = w.dim();
    let r_max = h.truncation_radius();
    let tol = 1e-10 * h.peak().max(1e-300);
    if w.is_torus() && r_max <= 0.5 * w.min_width() {
        return Ok(intensity * radial_profile(h, d, r_max, tol)?);
    }
    if d > 3 {
        return Err(invalid("window", "box quadrature supports up to three dimensions"));
    }
    let (lows, highs, splits): (Vec<f64>, Vec<f64>, Vec<f64>) = if w.is_torus() {
        let half: Vec<f64> = (0..d).map(|a| 0.5 * w.width(a)).collect();
        (
            half.iter().map(|v| -v).collect(),
            half.clone(),
            alloc::vec![0.0; d],
        )
    } else {
        (w.lows().to_vec(), w.highs().to_vec(), y.to_vec())
    };
    let origin: Vec<f64> = if w.is_torus() { alloc::vec![0.0; d] } else { y.to_vec() };
    let f = |x: &[f64]| {
        let r2: f64 = x.iter().zip(&origin).map(|(a, b)| (a - b) * (a - b)).sum();
        let r = libm::sqrt(r2);
        if r <= r_max {
            h.value(r)
        } else {
            0.0
        }
    };
    let s = Simpson::new(tol);
    let v = nested(&s, &f, &lows, &highs, &splits, &[]);
    Ok(intensity * s.check(v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Topology;
    use crate::measure::{AtomicMeasure, GridField};
    use crate::ops::superpose;
    use crate::processes::sample_poisson;
    use alloc::vec;
    use core::f64::consts::PI;

    fn q(points: &[[f64; 2]]) -> Vec<Vec<f64>> {
        points.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn empty_source_is_zero() {
        let w = Window::unit_torus(2);
        let m: Measure = PointPattern::empty(w).into();
        let v = additive_sn(&m, &ResponseKernel::gaussian(0.1, 1.0), &q(&[[0.5, 0.5], [0.1, 0.2]])).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
        let p = PointPattern::empty(Window::unit_torus(2));
        assert_eq!(extremal_sn(&p, &ResponseKernel::gaussian(0.1, 1.0), &q(&[[0.5, 0.5]])), vec![0.0]);
    }

    #[test]
    fn single_point_peak() {
        let w = Window::unit_torus(2);
        let p = PointPattern::from_points(w, &[vec![0.3, 0.3]]).unwrap();
        let h = ResponseKernel::gaussian(0.1, 1.0);
        let v = additive_sn(&p.clone().into(), &h, &q(&[[0.3, 0.3], [0.4, 0.3]])).unwrap();
        assert_eq!(v[0], 1.0);
        let u = extremal_sn(&p, &h, &q(&[[0.3, 0.3], [0.4, 0.3]]));
        assert_eq!(u, v);
    }

    #[test]
    fn grid_equals_midpoint_atoms() {
        let w = Window::unit_torus(2);
        let values: Vec<f64> = (0..16).map(|i| (i % 5) as f64 * 0.7).collect();
        let g = GridField::new(w, vec![4, 4], values).unwrap();
        let a = AtomicMeasure::from_grid(&g);
        let h = ResponseKernel::power_law(4.0, 1.0);
        let qs = q(&[[0.1, 0.9], [0.5, 0.5], [0.0, 0.0]]);
        let v1 = additive_sn(&Measure::Grid(g), &h, &qs).unwrap();
        let v2 = additive_sn(&Measure::Atoms(a), &h, &qs).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn linear_over_superposition() {
        let w = Window::unit_torus(2);
        let mut rng = RngStream::new(1, 1);
        let p1 = sample_poisson(30.0, &w, &mut rng).unwrap();
        let p2 = sample_poisson(20.0, &w, &mut rng).unwrap();
        let h = ResponseKernel::gaussian(0.15, 2.0);
        let qs = q(&[[0.2, 0.2], [0.7, 0.1]]);
        let s = additive_sn(&superpose(&p1, &p2).unwrap().into(), &h, &qs).unwrap();
        let a = additive_sn(&p1.clone().into(), &h, &qs).unwrap();
        let b = additive_sn(&p2.clone().into(), &h, &qs).unwrap();
        for i in 0..2 {
            assert!((s[i] - (a[i] + b[i])).abs() <= 1e-12 * s[i].max(1.0));
        }
        let u = extremal_sn(&p1, &h, &qs);
        for i in 0..2 {
            assert!(u[i] <= a[i]);
        }
    }

    #[test]
    fn campbell_indicator_is_ball_area() {
        let w = Window::cube(2, 4.0, Topology::Torus);
        let lambda = 3.0;
        let r = 0.4;
        let m = campbell_mean(&ResponseKernel::indicator(r), lambda, &w, &[1.0, 1.0]).unwrap();
        assert!((m - lambda * PI * r * r).abs() < 1e-9);
        let zero = ResponseKernel::new(ResponseShape::IndicatorBall { radius: r }, 0.0);
        assert_eq!(campbell_mean(&zero, lambda, &w, &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn campbell_power_law_matches_closed_form() {
        // 2π ∫₀^R r (1+r)^(-4) dr = 2π [ -1/(2(1+r)²) + 1/(3(1+r)³) ]₀^R
        let h = ResponseKernel::power_law(4.0, 1.0);
        let big = Window::cube(2, 100.0, Topology::Torus);
        let r_max = h.truncation_radius();
        let antider = |r: f64| -1.0 / (2.0 * (1.0 + r) * (1.0 + r)) + 1.0 / (3.0 * (1.0 + r).powi(3));
        let expected = 2.0 * PI * (antider(r_max) - antider(0.0));
        let m = campbell_mean(&h, 1.0, &big, &[50.0, 50.0]).unwrap();
        assert!((m - expected).abs() < 1e-8 * expected, "{m} vs {expected}");
    }

    #[test]
    fn campbell_box_quadrature_on_small_torus() {
        // kernel wider than half the window: the integral covers the whole torus
        let w = Window::unit_torus(2);
        let h = ResponseKernel::gaussian(0.6, 1.0);
        let m = campbell_mean(&h, 1.0, &w, &[0.5, 0.5]).unwrap();
        // ∫_{[-½,½]²} e^{-|z|²/2σ²} = (σ√(2π) erf(1/(2σ√2)))²
        let one = 0.6 * libm::sqrt(2.0 * PI) * libm::erf(0.5 / (0.6 * core::f64::consts::SQRT_2));
        assert!((m - one * one).abs() < 1e-7, "{m} vs {}", one * one);
    }

    #[test]
    fn campbell_matches_monte_carlo() {
        let w = Window::cube(2, 8.0, Topology::Torus);
        let h = ResponseKernel::power_law(4.0, 1.0);
        let lambda = 2.0;
        let y = vec![4.0, 4.0];
        let exact = campbell_mean(&h, lambda, &w, &y).unwrap();
        let n = 4000;
        let mut s = 0.0;
        let mut ss = 0.0;
        let mut rng = RngStream::new(4, 0);
        for _ in 0..n {
            let p = sample_poisson(lambda, &w, &mut rng).unwrap();
            let v = additive_sn(&p.into(), &h, core::slice::from_ref(&y)).unwrap()[0];
            s += v;
            ss += v * v;
        }
        let mean = s / n as f64;
        let se = libm::sqrt((ss / n as f64 - mean * mean) / n as f64);
        assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn poisson_indicator_mean_is_lambda_pi_r2() {
        let w = Window::unit_torus(2);
        let h = ResponseKernel::indicator(0.1);
        let lambda = 40.0;
        let n = 20_000;
        let (mut s, mut ss) = (0.0, 0.0);
        let mut rng = RngStream::new(21, 0);
        for _ in 0..n {
            let p = sample_poisson(lambda, &w, &mut rng).unwrap();
            let v = additive_sn(&p.into(), &h, &[vec![0.5, 0.5]]).unwrap()[0];
            s += v;
            ss += v * v;
        }
        let m = s / n as f64;
        let se = libm::sqrt((ss / n as f64 - m * m) / n as f64);
        let expected = lambda * PI * 0.01;
        assert!((m - expected).abs() < 3.5 * se, "{m} vs {expected}");
    }
}
