//! One-dimensional process keeping the k-th point of the k-th of i.i.d.
//! unit-rate Poisson processes on ℝ⁺ (the squared-radii representation of
//! the Ginibre ensemble).

use alloc::vec::Vec;

use super::MeasureSampler;
use crate::dist::gamma;
use crate::error::{invalid, Result};
use crate::geometry::{Cuboid, Topology, Window};
use crate::measure::Measure;
use crate::pattern::PointPattern;
use crate::rng::RngStream;
use crate::special::poisson_truncation;

/// Number of independent processes consulted: beyond it every k-th point
/// exceeds `b_max` with probability at least `1 - 1e-12`.
pub fn ginibre_depth(b_max: f64) -> u64 {
    // P(Gamma(m, 1) <= b) = P(Poisson(b) >= m)
    poisson_truncation(b_max, 1e-12)
}

pub fn sample_ginibre_radii(b_max: f64, rng: &mut RngStream) -> Result<PointPattern> {
    if !(b_max > 0.0 && b_max.is_finite()) {
        return Err(invalid("b_max", "must be positive"));
    }
    let w = Window::new(&[0.0], &[b_max], Topology::Plain)?;
    let m = ginibre_depth(b_max);
    let mut coords = Vec::new();
    for k in 1..=m {
        let x = gamma(k as f64, 1.0, rng);
        if x <= b_max {
            coords.push(x);
        }
    }
    Ok(PointPattern::from_raw(w, coords, None))
}

#[derive(Clone, Debug)]
pub struct GinibreRadii {
    pub b_max: f64,
    window: Window,
}

impl GinibreRadii {
    pub fn new(b_max: f64) -> Result<Self> {
        if !(b_max > 0.0 && b_max.is_finite()) {
            return Err(invalid("b_max", "must be positive"));
        }
        Ok(Self {
            b_max,
            window: Window::new(&[0.0], &[b_max], Topology::Plain)?,
        })
    }
}

impl MeasureSampler for GinibreRadii {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(sample_ginibre_radii(self.b_max, rng)?.into())
    }
    /// `E Φ([a, b)) = b - a`, since `Σ_k P(Poisson(b) ≥ k) = b`.
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(b.volume())
    }
}
