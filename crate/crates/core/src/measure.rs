//! Grid intensity fields, purely atomic measures and the common [`Measure`]
//! view used by comparisons and shot-noise evaluation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Cuboid, Window};
use crate::pattern::PointPattern;

/// Piecewise-constant non-negative field on a regular grid; axis 0 varies
/// fastest in `values`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    window: Window,
    cells: Vec<usize>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(window: Window, cells: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if cells.len() != window.dim() {
            return Err(Error::DimensionMismatch {
                expected: window.dim(),
                got: cells.len(),
            });
        }
        if cells.contains(&0) {
            return Err(invalid("cells_per_axis", "every axis needs at least one cell"));
        }
        let n: usize = cells.iter().product();
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid field"));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(invalid("values", "field values must be non-negative"));
        }
        Ok(Self {
            window,
            cells,
            values,
        })
    }

    pub fn constant(window: Window, cells: Vec<usize>, value: f64) -> Result<Self> {
        let n = cells.iter().product();
        Self::new(window, cells, vec![value; n])
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        self.window.width(axis) / self.cells[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.cells.len()).map(|a| self.cell_width(a)).product()
    }

    /// Multi-index of a flat cell index.
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for (axis, slot) in out.iter_mut().enumerate() {
            *slot = flat % self.cells[axis];
            flat /= self.cells[axis];
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for (axis, &i) in idx.iter().enumerate() {
            flat += i * stride;
            stride *= self.cells[axis];
        }
        flat
    }

    /// Lower corner of a cell.
    pub fn cell_low(&self, flat: usize, out: &mut Vec<f64>) {
        out.clear();
        let mut rest = flat;
        for axis in 0..self.cells.len() {
            let i = rest % self.cells[axis];
            rest /= self.cells[axis];
            out.push(self.window.lows()[axis] + i as f64 * self.cell_width(axis));
        }
    }

    pub fn midpoint(&self, flat: usize) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.cells.len());
        self.cell_low(flat, &mut m);
        for (axis, v) in m.iter_mut().enumerate() {
            *v += 0.5 * self.cell_width(axis);
        }
        m
    }

    pub fn midpoints(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.midpoint(i)).collect()
    }

    /// Cell containing `x`, clamping points on the upper face.
    pub fn cell_of(&self, x: &[f64]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for axis in 0..self.cells.len() {
            let rel = (x[axis] - self.window.lows()[axis]) / self.cell_width(axis);
            let i = (libm::floor(rel).max(0.0) as usize).min(self.cells[axis] - 1);
            flat += i * stride;
            stride *= self.cells[axis];
        }
        flat
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.values[self.cell_of(x)]
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Sum over cells of value times the volume of cell ∩ b.
    pub fn mass_in(&self, b: &Cuboid) -> f64 {
        let d = self.cells.len();
        let mut ranges = Vec::with_capacity(d);
        for axis in 0..d {
            let w = self.cell_width(axis);
            let lo = self.window.lows()[axis];
            let first = libm::floor((b.lows()[axis] - lo) / w).max(0.0) as usize;
            let last = (libm::ceil((b.highs()[axis] - lo) / w) as usize).min(self.cells[axis]);
            if first >= last {
                return 0.0;
            }
            ranges.push((first, last));
        }
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        let mut total = 0.0;
        loop {
            let mut overlap = 1.0;
            for axis in 0..d {
                let w = self.cell_width(axis);
                let lo = self.window.lows()[axis] + idx[axis] as f64 * w;
                overlap *= b.axis_overlap(axis, lo, lo + w);
            }
            if overlap > 0.0 {
                total += self.values[self.flatten(&idx)] * overlap;
            }
            // odometer
            let mut axis = 0;
            loop {
                if axis == d {
                    return total;
                }
                idx[axis] += 1;
                if idx[axis] < ranges[axis].1 {
                    break;
                }
                idx[axis] = ranges[axis].0;
                axis += 1;
            }
        }
    }
}

/// Finite list of (location, non-negative mass) atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    window: Window,
    locations: Vec<f64>,
    masses: Vec<f64>,
}

impl AtomicMeasure {
    pub fn empty(window: Window) -> Self {
        Self {
            window,
            locations: Vec::new(),
            masses: Vec::new(),
        }
    }

    pub fn new(window: Window, locations: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let d = window.dim();
        if locations.len() != masses.len() * d {
            return Err(Error::DimensionMismatch {
                expected: masses.len() * d,
                got: locations.len(),
            });
        }
        if masses.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("atom masses"));
        }
        if masses.iter().any(|&m| m < 0.0) {
            return Err(invalid("masses", "atom masses must be non-negative"));
        }
        if locations.chunks_exact(d).any(|x| !window.contains(x)) {
            return Err(Error::OutsideWindow);
        }
        Ok(Self {
            window,
            locations,
            masses,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn location(&self, i: usize) -> &[f64] {
        let d = self.window.dim();
        &self.locations[i * d..(i + 1) * d]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.locations
            .chunks_exact(self.window.dim())
            .zip(self.masses.iter().copied())
    }

    pub fn mass_in(&self, b: &Cuboid) -> f64 {
        self.atoms()
            .filter(|(x, _)| b.contains(x))
            .map(|(_, m)| m)
            .sum()
    }

    /// Each cell's mass placed at its midpoint.
    pub fn from_grid(field: &GridField) -> Self {
        let vol = field.cell_volume();
        let mut locations = Vec::with_capacity(field.len() * field.window().dim());
        for i in 0..field.len() {
            locations.extend(field.midpoint(i));
        }
        Self {
            window: field.window().clone(),
            locations,
            masses: field.values().iter().map(|v| v * vol).collect(),
        }
    }
}

/// One realization of a random measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Points(PointPattern),
    Atoms(AtomicMeasure),
    Grid(GridField),
}

impl Measure {
    pub fn window(&self) -> &Window {
        match self {
            Measure::Points(p) => p.window(),
            Measure::Atoms(a) => a.window(),
            Measure::Grid(g) => g.window(),
        }
    }

    /// Mass in a half-open box; points count 1 each (or their scalar mark).
    pub fn mass_in(&self, b: &Cuboid) -> f64 {
        match self {
            Measure::Points(p) => (0..p.len())
                .filter(|&i| b.contains(p.point(i)))
                .map(|i| p.weight(i))
                .sum(),
            Measure::Atoms(a) => a.mass_in(b),
            Measure::Grid(g) => g.mass_in(b),
        }
    }

    /// Visits every atom as (location, mass); grid cells become midpoint atoms.
    pub fn for_each_atom(&self, mut f: impl FnMut(&[f64], f64)) {
        match self {
            Measure::Points(p) => {
                for i in 0..p.len() {
                    f(p.point(i), p.weight(i));
                }
            }
            Measure::Atoms(a) => {
                for (x, m) in a.atoms() {
                    f(x, m);
                }
            }
            Measure::Grid(g) => {
                let vol = g.cell_volume();
                for i in 0..g.len() {
                    let m = g.midpoint(i);
                    f(&m, g.values()[i] * vol);
                }
            }
        }
    }

    /// `∫ f dΛ` over the realization.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut total = 0.0;
        self.for_each_atom(|x, m| total += m * f(x));
        total
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    pub fn as_points(&self) -> Option<&PointPattern> {
        match self {
            Measure::Points(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_points(self) -> Result<PointPattern> {
        match self {
            Measure::Points(p) => Ok(p),
            _ => Err(invalid("measure", "expected a point pattern")),
        }
    }
}

impl From<PointPattern> for Measure {
    fn from(p: PointPattern) -> Self {
        Measure::Points(p)
    }
}

impl From<AtomicMeasure> for Measure {
    fn from(a: AtomicMeasure) -> Self {
        Measure::Atoms(a)
    }
}

impl From<GridField> for Measure {
    fn from(g: GridField) -> Self {
        Measure::Grid(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;

    #[test]
    fn constant_field_mass() {
        let w = Window::unit_torus(2);
        let g = GridField::constant(w.clone(), vec![8, 8], 3.0).unwrap();
        let b = Cuboid::new(&w, &[0.1, 0.2], &[0.6, 0.45]).unwrap();
        assert!((g.mass_in(&b) - 3.0 * 0.5 * 0.25).abs() < 1e-12);
        assert!((g.total_mass() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn atomic_mass() {
        let w = Window::unit_torus(1);
        let a = AtomicMeasure::new(w.clone(), vec![0.5], vec![2.0]).unwrap();
        assert_eq!(a.mass_in(&Cuboid::whole(&w)), 2.0);
        assert_eq!(AtomicMeasure::empty(w.clone()).mass_in(&Cuboid::whole(&w)), 0.0);
        assert!(AtomicMeasure::new(w, vec![0.5], vec![-1.0]).is_err());
    }

    #[test]
    fn grid_round_trip_indices() {
        let w = Window::cube(3, 1.0, crate::Topology::Plain);
        let g = GridField::constant(w, vec![2, 3, 4], 1.0).unwrap();
        let mut idx = [0usize; 3];
        for flat in 0..g.len() {
            g.unflatten(flat, &mut idx);
            assert_eq!(g.flatten(&idx), flat);
            assert_eq!(g.cell_of(&g.midpoint(flat)), flat);
        }
    }

    #[test]
    fn rejects_negative_and_nan() {
        let w = Window::unit_torus(1);
        assert!(GridField::new(w.clone(), vec![2], vec![1.0, -0.1]).is_err());
        assert_eq!(
            GridField::new(w, vec![2], vec![1.0, f64::NAN]),
            Err(Error::NonFinite("grid field"))
        );
    }
}
