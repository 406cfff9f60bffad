//! Purely atomic Lévy bases: i.i.d. masses on a deterministic lattice, and
//! the pair of measures carried by an independently marked Poisson process.

use alloc::vec::Vec;

use super::{poisson_points, MeasureSampler};
use crate::dist::MassDistribution;
use crate::error::{invalid, Result};
use crate::geometry::{Cuboid, Window};
use crate::measure::{AtomicMeasure, Measure};
use crate::rng::RngStream;

fn lattice_sites(spacing: f64, w: &Window) -> Vec<f64> {
    let d = w.dim();
    let counts: Vec<usize> = (0..d)
        .map(|a| libm::ceil(w.width(a) / spacing - 0.5).max(0.0) as usize)
        .collect();
    let total: usize = counts.iter().product();
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = alloc::vec![0usize; d];
    for _ in 0..total {
        for axis in 0..d {
            coords.push(w.lows()[axis] + (idx[axis] as f64 + 0.5) * spacing);
        }
        for axis in 0..d {
            idx[axis] += 1;
            if idx[axis] < counts[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    coords
}

/// Atoms at cell centres `low + (k + ½)·spacing` with i.i.d. masses.
pub fn sample_levy_grid_basis(spacing: f64, mass: &MassDistribution, w: &Window, rng: &mut RngStream) -> Result<AtomicMeasure> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(invalid("lattice_spacing", "must be positive"));
    }
    mass.validate()?;
    let coords = lattice_sites(spacing, w);
    let n = coords.len() / w.dim();
    let masses = (0..n).map(|_| mass.sample(rng)).collect();
    AtomicMeasure::new(w.clone(), coords, masses)
}

#[derive(Clone, Debug)]
pub struct LevyGrid {
    pub spacing: f64,
    pub mass: MassDistribution,
    pub window: Window,
    sites: Vec<f64>,
}

impl LevyGrid {
    pub fn new(spacing: f64, mass: MassDistribution, window: Window) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid("lattice_spacing", "must be positive"));
        }
        mass.validate()?;
        let sites = lattice_sites(spacing, &window);
        Ok(Self {
            spacing,
            mass,
            window,
            sites,
        })
    }

    pub fn sites_in(&self, b: &Cuboid) -> usize {
        self.sites
            .chunks_exact(self.window.dim())
            .filter(|x| b.contains(x))
            .count()
    }
}

impl MeasureSampler for LevyGrid {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        let n = self.sites.len() / self.window.dim();
        let masses = (0..n).map(|_| self.mass.sample(rng)).collect();
        Ok(AtomicMeasure::new(self.window.clone(), self.sites.clone(), masses)?.into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(self.sites_in(b) as f64 * self.mass.mean())
    }
}

/// Poisson points carrying either the constant mean mark or their own mark,
/// coupled on identical locations.
pub fn sample_marked_poisson_basis(
    intensity: f64,
    mark: &MassDistribution,
    w: &Window,
    rng: &mut RngStream,
) -> Result<(AtomicMeasure, AtomicMeasure)> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(invalid("intensity", "must be positive"));
    }
    mark.validate()?;
    let points = poisson_points(intensity, w, rng);
    let mean = mark.mean();
    let n = points.len();
    let marks: Vec<f64> = (0..n).map(|_| mark.sample(rng)).collect();
    let averaged = AtomicMeasure::new(w.clone(), points.coords().to_vec(), alloc::vec![mean; n])?;
    let marked = AtomicMeasure::new(w.clone(), points.coords().to_vec(), marks)?;
    Ok((averaged, marked))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisSide {
    /// Every atom carries the mean mark.
    Averaged,
    /// Every atom carries its own i.i.d. mark.
    Marked,
}

#[derive(Clone, Debug)]
pub struct MarkedBasis {
    pub intensity: f64,
    pub mark: MassDistribution,
    pub window: Window,
    pub side: BasisSide,
}

impl MeasureSampler for MarkedBasis {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        let (a, m) = sample_marked_poisson_basis(self.intensity, &self.mark, &self.window, rng)?;
        Ok(match self.side {
            BasisSide::Averaged => a.into(),
            BasisSide::Marked => m.into(),
        })
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(self.intensity * self.mark.mean() * b.volume())
    }
}
