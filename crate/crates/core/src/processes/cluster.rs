//! Poisson-Poisson cluster processes and generalized shot-noise Cox
//! processes (Thomas, Matérn cluster and their scaled-kernel relatives).
//!
//! Point samplers draw offspring directly around each parent: a Cox
//! process whose intensity is a sum of parent kernels is the superposition
//! of independent Poisson clusters, so this is exact and needs no grid.
//! The intensity fields themselves are available on grids or at arbitrary
//! query points.

use alloc::vec::Vec;

use super::{poisson_points, window_mean, MeasureSampler, Poisson};
use crate::dist::{poisson, MassDistribution};
use crate::error::{invalid, Result};
use crate::geometry::{Cuboid, Window};
use crate::kernel::ClusterKernel;
use crate::measure::{GridField, Measure};
use crate::pattern::PointPattern;
use crate::rng::RngStream;
use crate::shotnoise::FieldSampler;

/// Places `center + scale · offset` into `w`, wrapping or rejecting.
fn place(w: &Window, center: &[f64], scale: f64, offset: &[f64], out: &mut Vec<f64>) -> bool {
    let start = out.len();
    for axis in 0..center.len() {
        out.push(center[axis] + scale * offset[axis]);
    }
    let ok = w.wrap(&mut out[start..]);
    if !ok {
        out.truncate(start);
    }
    ok
}

/// Parents of intensity `c·λ`, each carrying kernel `h / c`.
#[derive(Clone, Debug)]
pub struct PpCluster {
    pub c: f64,
    pub lambda: f64,
    pub kernel: ClusterKernel,
    pub window: Window,
}

impl PpCluster {
    pub fn new(c: f64, lambda: f64, kernel: ClusterKernel, window: Window) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", "must be positive"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", "must be positive"));
        }
        kernel.validate(window.dim())?;
        Ok(Self {
            c,
            lambda,
            kernel,
            window,
        })
    }

    /// `λ₀ = ∫ h`.
    pub fn kernel_mass(&self) -> f64 {
        self.kernel.total_mass(self.window.dim())
    }

    /// Mean of the intensity field, `λ·∫h` (free of `c`).
    pub fn mean_intensity(&self) -> f64 {
        self.lambda * self.kernel_mass()
    }

    /// Variance of the field at a point, `λ ∫h² / c`.
    pub fn intensity_variance(&self) -> f64 {
        self.lambda * self.kernel.square_integral(self.window.dim()) / self.c
    }

    fn parent_window(&self) -> Window {
        if self.window.is_torus() {
            self.window.clone()
        } else {
            self.window.padded(self.kernel.truncation_radius())
        }
    }

    pub fn sample_parents(&self, rng: &mut RngStream) -> PointPattern {
        poisson_points(self.c * self.lambda, &self.parent_window(), rng)
    }

    pub(crate) fn intensity_with(&self, parents: &PointPattern, y: &[f64]) -> f64 {
        let d = self.window.dim();
        let r_max = self.kernel.truncation_radius();
        let r2_max = r_max * r_max;
        let mut total = 0.0;
        for p in parents.points() {
            let r2 = self.window.distance_sq(p, y);
            if r2 <= r2_max {
                total += self.kernel.value(libm::sqrt(r2), d);
            }
        }
        total / self.c
    }
}

/// One realization of the cluster intensity `λ_c` at grid-cell midpoints.
pub fn sample_ppcluster_intensity(pp: &PpCluster, cells: &[usize], rng: &mut RngStream) -> Result<GridField> {
    let parents = pp.sample_parents(rng);
    let template = GridField::constant(pp.window.clone(), cells.to_vec(), 0.0)?;
    let values = (0..template.len())
        .map(|i| pp.intensity_with(&parents, &template.midpoint(i)))
        .collect();
    GridField::new(pp.window.clone(), cells.to_vec(), values)
}

/// Cox process driven by `λ_c`.
pub fn sample_ppcluster(pp: &PpCluster, rng: &mut RngStream) -> Result<PointPattern> {
    let parents = pp.sample_parents(rng);
    let d = pp.window.dim();
    let mean_offspring = pp.kernel_mass() / pp.c;
    let mut coords = Vec::new();
    let mut offset = Vec::with_capacity(d);
    for parent in parents.points() {
        let n = poisson(mean_offspring, rng);
        for _ in 0..n {
            pp.kernel.sample_offset(d, rng, &mut offset);
            place(&pp.window, parent, 1.0, &offset, &mut coords);
        }
    }
    Ok(PointPattern::from_raw(pp.window.clone(), coords, None))
}

impl MeasureSampler for PpCluster {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(sample_ppcluster(self, rng)?.into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(window_mean(self.mean_intensity(), b))
    }
}

/// The field `λ_c` itself, as a random field evaluated at query points.
#[derive(Clone, Debug)]
pub struct PpClusterIntensity(pub PpCluster);

impl FieldSampler for PpClusterIntensity {
    fn sample_at(&self, queries: &[Vec<f64>], rng: &mut RngStream) -> Result<Vec<f64>> {
        let parents = self.0.sample_parents(rng);
        Ok(queries.iter().map(|y| self.0.intensity_with(&parents, y)).collect())
    }
}

/// Generalized shot-noise Cox process: parents `c_j` with i.i.d. weights
/// `γ_j` and scales `b_j`, intensity `Σ γ_j k₁((y - c_j)/b_j) / b_j^d`.
#[derive(Clone, Debug)]
pub struct Gnscp<P> {
    pub parent: P,
    pub weight: MassDistribution,
    pub scale: MassDistribution,
    pub kernel: ClusterKernel,
    pub window: Window,
}

impl<P: MeasureSampler> Gnscp<P> {
    pub fn new(parent: P, weight: MassDistribution, scale: MassDistribution, kernel: ClusterKernel, window: Window) -> Result<Self> {
        if !kernel.is_density() {
            return Err(invalid("kernel", "GNSCP needs a probability density kernel"));
        }
        kernel.validate(window.dim())?;
        weight.validate()?;
        scale.validate()?;
        if parent.window().dim() != window.dim() {
            return Err(invalid("parent", "parent window dimension differs"));
        }
        Ok(Self {
            parent,
            weight,
            scale,
            kernel,
            window,
        })
    }

    fn parent_intensity(&self) -> Option<f64> {
        let w = self.parent.window();
        self.parent
            .mean_mass(&Cuboid::whole(w))
            .map(|m| m / w.volume())
    }

    fn marked_parents(&self, rng: &mut RngStream) -> Result<(PointPattern, Vec<(f64, f64)>)> {
        let parents = self.parent.sample_points(rng)?;
        let marks = (0..parents.len())
            .map(|_| (self.weight.sample(rng), self.scale.sample(rng)))
            .collect();
        Ok((parents, marks))
    }
}

impl Gnscp<Poisson> {
    fn poisson_parents(parent_intensity: f64, pad: f64, window: &Window) -> Result<Poisson> {
        let w = if window.is_torus() {
            window.clone()
        } else {
            window.padded(pad)
        };
        Poisson::new(parent_intensity, w)
    }

    /// Poisson parents, Poisson(`mean_offspring`) offspring with normal displacement.
    pub fn thomas(parent_intensity: f64, mean_offspring: f64, sigma: f64, window: Window) -> Result<Self> {
        let kernel = ClusterKernel::Gaussian { sigma };
        kernel.validate(window.dim())?;
        let parent = Self::poisson_parents(parent_intensity, kernel.truncation_radius(), &window)?;
        Self::new(
            parent,
            MassDistribution::Constant(mean_offspring),
            MassDistribution::Constant(1.0),
            kernel,
            window,
        )
    }

    /// Poisson parents, offspring uniform in a ball.
    pub fn matern(parent_intensity: f64, mean_offspring: f64, radius: f64, window: Window) -> Result<Self> {
        let kernel = ClusterKernel::UniformBall { radius };
        kernel.validate(window.dim())?;
        let parent = Self::poisson_parents(parent_intensity, radius, &window)?;
        Self::new(
            parent,
            MassDistribution::Constant(mean_offspring),
            MassDistribution::Constant(1.0),
            kernel,
            window,
        )
    }
}

pub fn sample_gnscp<P: MeasureSampler>(g: &Gnscp<P>, rng: &mut RngStream) -> Result<PointPattern> {
    let (parents, marks) = g.marked_parents(rng)?;
    let d = g.window.dim();
    let mut coords = Vec::new();
    let mut offset = Vec::with_capacity(d);
    for (parent, &(gamma, b)) in parents.points().zip(&marks) {
        let n = poisson(gamma, rng);
        for _ in 0..n {
            g.kernel.sample_offset(d, rng, &mut offset);
            place(&g.window, parent, b, &offset, &mut coords);
        }
    }
    Ok(PointPattern::from_raw(g.window.clone(), coords, None))
}

/// One realization of the GNSCP intensity at grid-cell midpoints.
pub fn gnscp_intensity<P: MeasureSampler>(g: &Gnscp<P>, cells: &[usize], rng: &mut RngStream) -> Result<GridField> {
    let (parents, marks) = g.marked_parents(rng)?;
    let d = g.window.dim();
    let template = GridField::constant(g.window.clone(), cells.to_vec(), 0.0)?;
    let r_trunc = g.kernel.truncation_radius();
    let mut values = Vec::with_capacity(template.len());
    for i in 0..template.len() {
        let y = template.midpoint(i);
        let mut total = 0.0;
        for (parent, &(gamma, b)) in parents.points().zip(&marks) {
            if b <= 0.0 {
                continue;
            }
            let r = g.window.dist(parent, &y);
            if r <= b * r_trunc {
                total += gamma * g.kernel.value(r / b, d) / libm::pow(b, d as f64);
            }
        }
        values.push(total);
    }
    GridField::new(g.window.clone(), cells.to_vec(), values)
}

impl<P: MeasureSampler> MeasureSampler for Gnscp<P> {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(sample_gnscp(self, rng)?.into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        self.parent_intensity()
            .map(|k| window_mean(k * self.weight.mean(), b))
    }
}
