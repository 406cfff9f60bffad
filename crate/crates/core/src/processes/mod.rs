//! Samplers for the random measures and point processes being compared.
//!
//! Each family is available both as a free function (one realization) and
//! as a [`MeasureSampler`] value that comparisons can call repeatedly. Every
//! sampler knows its closed-form mean measure on boxes, which the order
//! tests use to calibrate and sanity-check paired families.

mod cluster;
mod ginibre;
mod ising;
mod levy;
mod lgcp;

use alloc::boxed::Box;
use alloc::vec::Vec;

pub use cluster::{
    gnscp_intensity, sample_gnscp, sample_ppcluster, sample_ppcluster_intensity, Gnscp, PpCluster,
    PpClusterIntensity,
};
pub use ginibre::{ginibre_depth, sample_ginibre_radii, GinibreRadii};
pub use ising::{sample_ising_field, IsingCox, IsingField};
pub use levy::{sample_levy_grid_basis, sample_marked_poisson_basis, BasisSide, LevyGrid, MarkedBasis};
pub use lgcp::{sample_lgcp, CovarianceKind, CovarianceSpec, Lgcp};

use crate::dist::{poisson, MassDistribution};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Cuboid, Window};
use crate::measure::{GridField, Measure};
use crate::pattern::PointPattern;
use crate::rng::RngStream;

/// A random measure that can be realized repeatedly.
pub trait MeasureSampler: Sync + Send {
    fn window(&self) -> &Window;

    fn sample(&self, rng: &mut RngStream) -> Result<Measure>;

    /// Closed-form `E Λ(B)`, when the family has one.
    fn mean_mass(&self, _b: &Cuboid) -> Option<f64> {
        None
    }

    fn sample_points(&self, rng: &mut RngStream) -> Result<PointPattern> {
        self.sample(rng)?.into_points()
    }
}

impl<S: MeasureSampler + ?Sized> MeasureSampler for &S {
    fn window(&self) -> &Window {
        (**self).window()
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        (**self).sample(rng)
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        (**self).mean_mass(b)
    }
    fn sample_points(&self, rng: &mut RngStream) -> Result<PointPattern> {
        (**self).sample_points(rng)
    }
}

impl<S: MeasureSampler + ?Sized> MeasureSampler for Box<S> {
    fn window(&self) -> &Window {
        (**self).window()
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        (**self).sample(rng)
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        (**self).mean_mass(b)
    }
    fn sample_points(&self, rng: &mut RngStream) -> Result<PointPattern> {
        (**self).sample_points(rng)
    }
}

/// Homogeneous Poisson process on `w`.
pub fn sample_poisson(intensity: f64, w: &Window, rng: &mut RngStream) -> Result<PointPattern> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(invalid("intensity", "must be positive and finite"));
    }
    Ok(poisson_points(intensity, w, rng))
}

pub(crate) fn poisson_points(intensity: f64, w: &Window, rng: &mut RngStream) -> PointPattern {
    let n = poisson(intensity * w.volume(), rng) as usize;
    let mut coords = Vec::with_capacity(n * w.dim());
    for _ in 0..n {
        w.sample_uniform_into(rng, &mut coords);
    }
    PointPattern::from_raw(w.clone(), coords, None)
}

/// Cox process driven by a piecewise-constant field. The total count is
/// Poisson with the field's total mass and each point picks its cell with
/// probability proportional to the cell mass, which is the same law as
/// independent per-cell Poisson counts.
pub fn sample_cox(field: &GridField, rng: &mut RngStream) -> Result<PointPattern> {
    if field.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cox intensity"));
    }
    let w = field.window();
    let d = w.dim();
    let vol = field.cell_volume();
    let mut cumulative = Vec::with_capacity(field.len());
    let mut acc = 0.0;
    for v in field.values() {
        acc += v * vol;
        cumulative.push(acc);
    }
    let n = poisson(acc, rng) as usize;
    let mut coords = Vec::with_capacity(n * d);
    let mut low = Vec::with_capacity(d);
    for _ in 0..n {
        let u = rng.uniform() * acc;
        let mut cell = cumulative.partition_point(|&c| c <= u);
        if cell >= field.len() {
            cell = field.len() - 1;
        }
        field.cell_low(cell, &mut low);
        for axis in 0..d {
            let width = field.cell_width(axis);
            let x = (low[axis] + width * rng.uniform()).min(w.highs()[axis]);
            coords.push(x);
        }
    }
    Ok(PointPattern::from_raw(w.clone(), coords, None))
}

/// Draws a mixing level once, then a homogeneous Poisson process at that level.
pub fn sample_mixed_poisson(mix: &MassDistribution, w: &Window, rng: &mut RngStream) -> Result<PointPattern> {
    mix.validate()?;
    let level = mix.sample(rng);
    Ok(poisson_points(level, w, rng))
}

pub(crate) fn window_mean(intensity: f64, b: &Cuboid) -> f64 {
    intensity * b.volume()
}

#[derive(Clone, Debug)]
pub struct Poisson {
    pub intensity: f64,
    pub window: Window,
}

impl Poisson {
    pub fn new(intensity: f64, window: Window) -> Result<Self> {
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(invalid("intensity", "must be non-negative and finite"));
        }
        Ok(Self { intensity, window })
    }
}

impl MeasureSampler for Poisson {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(poisson_points(self.intensity, &self.window, rng).into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(window_mean(self.intensity, b))
    }
}

#[derive(Clone, Debug)]
pub struct MixedPoisson {
    pub mix: MassDistribution,
    pub window: Window,
}

impl MeasureSampler for MixedPoisson {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(sample_mixed_poisson(&self.mix, &self.window, rng)?.into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(window_mean(self.mix.mean(), b))
    }
}

/// Cox process over a fixed (deterministic) grid field.
#[derive(Clone, Debug)]
pub struct GridCox {
    pub field: GridField,
}

impl MeasureSampler for GridCox {
    fn window(&self) -> &Window {
        self.field.window()
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(sample_cox(&self.field, rng)?.into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(self.field.mass_in(b))
    }
}

/// Always returns the same measure.
#[derive(Clone, Debug)]
pub struct Deterministic(pub Measure);

impl MeasureSampler for Deterministic {
    fn window(&self) -> &Window {
        self.0.window()
    }
    fn sample(&self, _rng: &mut RngStream) -> Result<Measure> {
        Ok(self.0.clone())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(self.0.mass_in(b))
    }
}
