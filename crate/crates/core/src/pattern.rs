//! Finite point patterns with optional marks.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Cuboid, Window};

/// Per-point mark values.
#[derive(Clone, Debug, PartialEq)]
pub enum Marks {
    Scalar(Vec<f64>),
    /// Flat storage, `dim` values per point.
    Vector { dim: usize, values: Vec<f64> },
}

impl Marks {
    pub fn len(&self) -> usize {
        match self {
            Marks::Scalar(v) => v.len(),
            Marks::Vector { dim, values } => values.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scalar(&self, i: usize) -> Option<f64> {
        match self {
            Marks::Scalar(v) => v.get(i).copied(),
            Marks::Vector { .. } => None,
        }
    }

    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        match self {
            Marks::Vector { dim, values } => values.get(i * dim..(i + 1) * dim),
            Marks::Scalar(_) => None,
        }
    }
}

/// Realization of a point process restricted to a window. Points are kept
/// in flat `dim`-strided storage; duplicates are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct PointPattern {
    window: Window,
    coords: Vec<f64>,
    marks: Option<Marks>,
}

impl PointPattern {
    pub fn empty(window: Window) -> Self {
        Self {
            window,
            coords: Vec::new(),
            marks: None,
        }
    }

    /// Builds a pattern from flat coordinates, checking every point.
    pub fn from_coords(window: Window, coords: Vec<f64>) -> Result<Self> {
        let d = window.dim();
        if !coords.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: coords.len() % d,
            });
        }
        if coords.chunks_exact(d).any(|x| !window.contains(x)) {
            return Err(Error::OutsideWindow);
        }
        Ok(Self {
            window,
            coords,
            marks: None,
        })
    }

    pub fn from_points(window: Window, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * window.dim());
        for p in points {
            if p.len() != window.dim() {
                return Err(Error::DimensionMismatch {
                    expected: window.dim(),
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_coords(window, coords)
    }

    /// Unchecked constructor for samplers that generate inside the window.
    pub(crate) fn from_raw(window: Window, coords: Vec<f64>, marks: Option<Marks>) -> Self {
        debug_assert_eq!(coords.len() % window.dim(), 0);
        Self {
            window,
            coords,
            marks,
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim())
    }

    pub fn marks(&self) -> Option<&Marks> {
        self.marks.as_ref()
    }

    pub fn with_marks(mut self, marks: Marks) -> Result<Self> {
        if marks.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: marks.len(),
            });
        }
        self.marks = Some(marks);
        Ok(self)
    }

    pub fn without_marks(mut self) -> Self {
        self.marks = None;
        self
    }

    /// Mass carried by point `i`: its scalar mark, or 1.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match &self.marks {
            Some(Marks::Scalar(v)) => v[i],
            _ => 1.0,
        }
    }

    /// Number of points in the half-open box.
    pub fn count_in(&self, b: &Cuboid) -> usize {
        self.points().filter(|x| b.contains(x)).count()
    }

    /// Adds a point, returning an error if it lies outside the window.
    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        if !self.window.contains(x) {
            return Err(Error::OutsideWindow);
        }
        if self.marks.is_some() {
            return Err(Error::MissingMarks("cannot push an unmarked point into a marked pattern"));
        }
        self.coords.extend_from_slice(x);
        Ok(())
    }
}

pub fn count_in(p: &PointPattern, b: &Cuboid) -> usize {
    p.count_in(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use alloc::vec;

    #[test]
    fn counting() {
        let w = Window::unit_torus(2);
        let empty = PointPattern::empty(w.clone());
        let unit = Cuboid::whole(&w);
        assert_eq!(empty.count_in(&unit), 0);
        let p = PointPattern::from_points(w.clone(), &[vec![0.5, 0.5]]).unwrap();
        assert_eq!(p.count_in(&unit), 1);
        let b = Cuboid::new(&w, &[0.0, 0.0], &[0.5, 1.0]).unwrap();
        assert_eq!(p.count_in(&b), 0, "upper face is excluded");
    }

    #[test]
    fn marks_must_match() {
        let w = Window::unit_torus(1);
        let p = PointPattern::from_points(w, &[vec![0.1], vec![0.2]]).unwrap();
        assert!(p.clone().with_marks(Marks::Scalar(vec![1.0])).is_err());
        let q = p.with_marks(Marks::Scalar(vec![2.0, 3.0])).unwrap();
        assert_eq!(q.weight(1), 3.0);
    }

    #[test]
    fn rejects_outside_points() {
        let w = Window::unit_torus(2);
        assert_eq!(
            PointPattern::from_points(w, &[vec![1.5, 0.0]]),
            Err(Error::OutsideWindow)
        );
    }
}
