use super::Estimate;
use crate::error::{Error, Result};
use crate::exec::Replicator;
use crate::measure::Measure;
use crate::processes::MeasureSampler;
use crate::rng::RngStream;

/// Self-normalized estimate of `E g(Λ_f)` for the `f`-mixed Palm version,
/// `E[(∫f dΛ) g(Λ)] / E[∫f dΛ]`, with a delta-method standard error.
/// Replication `i` draws from `root.child(i)`.
pub fn mixed_palm_estimate<S, F, G, R>(
    sampler: &S,
    f: F,
    g: G,
    n_reps: usize,
    root: &RngStream,
    exec: &R,
) -> Result<Estimate>
where
    S: MeasureSampler,
    F: Fn(&[f64]) -> f64 + Sync + Send,
    G: Fn(&Measure) -> f64 + Sync + Send,
    R: Replicator,
{
    let draws = exec.run(n_reps, |i| -> Result<(f64, f64)> {
        let m = sampler.sample(&mut root.child(i as u64))?;
        Ok((m.integrate(&f), g(&m)))
    });
    let mut sw = 0.0;
    let mut swg = 0.0;
    let mut pairs = alloc::vec::Vec::with_capacity(n_reps);
    for d in draws {
        let (w, v) = d?;
        sw += w;
        swg += w * v;
        pairs.push((w, v));
    }
    if sw == 0.0 {
        return Err(Error::Empty("palm weights"));
    }
    let ratio = swg / sw;
    let n = pairs.len() as f64;
    let wbar = sw / n;
    // linearization: residuals w (g - ratio) have mean zero
    let resid: f64 = pairs.iter().map(|(w, v)| (w * (v - ratio)) * (w * (v - ratio))).sum();
    let stderr = if n > 1.0 {
        libm::sqrt(resid / (n - 1.0) / n) / wbar
    } else {
        0.0
    };
    Ok(Estimate { value: ratio, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::geometry::{Cuboid, Window};
    use crate::measure::AtomicMeasure;
    use crate::processes::{Deterministic, Poisson};
    use alloc::vec;

    #[test]
    fn poisson_palm_adds_one_point() {
        let w = Window::unit_torus(2);
        let a = Cuboid::whole(&w);
        let p = Poisson::new(5.0, w).unwrap();
        let root = RngStream::new(31, 0);
        let est = mixed_palm_estimate(&p, |_| 1.0, |m| m.mass_in(&a), 20_000, &root, &Serial).unwrap();
        assert!(est.z_against(6.0).abs() < 3.5, "{:?}", est);
    }

    #[test]
    fn deterministic_and_constant_cases() {
        let w = Window::unit_torus(1);
        let m = AtomicMeasure::new(w.clone(), vec![0.2, 0.7], vec![1.5, 0.5]).unwrap();
        let s = Deterministic(m.into());
        let b = Cuboid::new(&w, &[0.0], &[0.5]).unwrap();
        let root = RngStream::new(1, 1);
        let est = mixed_palm_estimate(&s, |_| 1.0, |m| m.mass_in(&b), 10, &root, &Serial).unwrap();
        assert_eq!(est.value, 1.5);
        let p = Poisson::new(3.0, w.clone()).unwrap();
        let est = mixed_palm_estimate(&p, |x| x[0], |_| 4.25, 100, &root, &Serial).unwrap();
        assert!((est.value - 4.25).abs() < 1e-12);
        let none = Poisson::new(0.0, w).unwrap();
        let err = mixed_palm_estimate(&none, |_| 1.0, |_| 1.0, 10, &root, &Serial);
        assert_eq!(err, Err(Error::Empty("palm weights")));
    }
}
