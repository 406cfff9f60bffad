//! Ising-Poisson cluster field: i.i.d. ±1 spins on a randomly shifted
//! lattice, intensity `mu1` on positive spins and `mu2` on negative ones.

use alloc::vec::Vec;

use super::{sample_cox, window_mean, MeasureSampler};
use crate::error::{invalid, Result};
use crate::geometry::{Cuboid, Window};
use crate::measure::{GridField, Measure};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct IsingField {
    pub mu1: f64,
    pub mu2: f64,
    pub p_plus: f64,
    pub spacing: f64,
}

impl IsingField {
    pub fn new(mu1: f64, mu2: f64, p_plus: f64) -> Result<Self> {
        Self::with_spacing(mu1, mu2, p_plus, 1.0)
    }

    pub fn with_spacing(mu1: f64, mu2: f64, p_plus: f64, spacing: f64) -> Result<Self> {
        if !(mu2 >= 0.0 && mu2.is_finite() && mu1.is_finite()) {
            return Err(invalid("mu2", "must be finite and non-negative"));
        }
        if mu2 > mu1 {
            return Err(invalid("mu2", "must not exceed mu1"));
        }
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(invalid("p_plus", "must be a probability"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid("spacing", "must be positive"));
        }
        Ok(Self {
            mu1,
            mu2,
            p_plus,
            spacing,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mu1 * self.p_plus + self.mu2 * (1.0 - self.p_plus)
    }

    /// Lattice cells per axis covering the window, plus whether indices wrap.
    pub(crate) fn lattice_shape(&self, w: &Window) -> Result<(Vec<usize>, bool)> {
        let mut shape = Vec::with_capacity(w.dim());
        for axis in 0..w.dim() {
            let ratio = w.width(axis) / self.spacing;
            if w.is_torus() {
                let n = libm::round(ratio);
                if (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 1.0 {
                    return Err(invalid(
                        "spacing",
                        "torus window width must be a whole number of lattice cells",
                    ));
                }
                shape.push(n as usize);
            } else {
                shape.push(libm::ceil(ratio) as usize + 1);
            }
        }
        Ok((shape, w.is_torus()))
    }

    /// Flat lattice index of `x` given the random origin `shift`.
    pub(crate) fn lattice_index(&self, w: &Window, shape: &[usize], wrap: bool, shift: &[f64], x: &[f64]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for axis in 0..x.len() {
            let t = libm::floor((x[axis] - w.lows()[axis] - shift[axis]) / self.spacing) as i64;
            let n = shape[axis] as i64;
            let i = if wrap { t.rem_euclid(n) } else { (t + 1).clamp(0, n - 1) };
            flat += i as usize * stride;
            stride *= shape[axis];
        }
        flat
    }
}

/// One realization of the Ising intensity resampled at grid-cell midpoints.
pub fn sample_ising_field(field: &IsingField, w: &Window, cells: &[usize], rng: &mut RngStream) -> Result<GridField> {
    let (shape, wrap) = field.lattice_shape(w)?;
    let shift: Vec<f64> = (0..w.dim()).map(|_| field.spacing * rng.uniform()).collect();
    let n_lattice: usize = shape.iter().product();
    let spins: Vec<bool> = (0..n_lattice).map(|_| rng.bernoulli(field.p_plus)).collect();
    let n_cells: usize = cells.iter().product();
    let template = GridField::constant(w.clone(), cells.to_vec(), 0.0)?;
    let mut values = Vec::with_capacity(n_cells);
    for flat in 0..n_cells {
        let mid = template.midpoint(flat);
        let k = field.lattice_index(w, &shape, wrap, &shift, &mid);
        values.push(if spins[k] { field.mu1 } else { field.mu2 });
    }
    GridField::new(w.clone(), cells.to_vec(), values)
}

/// Cox process over the Ising field.
#[derive(Clone, Debug)]
pub struct IsingCox {
    pub field: IsingField,
    pub window: Window,
    pub cells: Vec<usize>,
}

impl IsingCox {
    pub fn new(field: IsingField, window: Window, cells: Vec<usize>) -> Result<Self> {
        field.lattice_shape(&window)?;
        if cells.len() != window.dim() {
            return Err(invalid("cells_per_axis", "one entry per axis"));
        }
        Ok(Self { field, window, cells })
    }
}

impl MeasureSampler for IsingCox {
    fn window(&self) -> &Window {
        &self.window
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        let g = sample_ising_field(&self.field, &self.window, &self.cells, rng)?;
        Ok(sample_cox(&g, rng)?.into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(window_mean(self.field.mean(), b))
    }
}
