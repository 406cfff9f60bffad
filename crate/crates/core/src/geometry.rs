//! Windows, half-open boxes and distances.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Topology {
    /// Opposite faces identified; distances use the minimum image.
    #[default]
    Torus,
    Plain,
}

/// Bounded axis-aligned simulation window.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    lows: Vec<f64>,
    highs: Vec<f64>,
    topology: Topology,
}

impl Window {
    pub fn new(lows: &[f64], highs: &[f64], topology: Topology) -> Result<Self> {
        if lows.len() != highs.len() {
            return Err(Error::DimensionMismatch {
                expected: lows.len(),
                got: highs.len(),
            });
        }
        if lows.is_empty() {
            return Err(invalid("lows", "window needs at least one axis"));
        }
        for (axis, (&low, &high)) in lows.iter().zip(highs).enumerate() {
            if !(low.is_finite() && high.is_finite()) || low >= high {
                return Err(Error::DegenerateAxis { axis, low, high });
            }
        }
        Ok(Self {
            lows: lows.to_vec(),
            highs: highs.to_vec(),
            topology,
        })
    }

    /// `[0, side)^dim` with torus topology.
    pub fn unit_torus(dim: usize) -> Self {
        Self::cube(dim, 1.0, Topology::Torus)
    }

    pub fn cube(dim: usize, side: f64, topology: Topology) -> Self {
        let lows = alloc::vec![0.0; dim];
        let highs = alloc::vec![side; dim];
        Self::new(&lows, &highs, topology).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lows.len()
    }

    pub fn lows(&self) -> &[f64] {
        &self.lows
    }

    pub fn highs(&self) -> &[f64] {
        &self.highs
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_torus(&self) -> bool {
        self.topology == Topology::Torus
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.highs[axis] - self.lows[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn min_width(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lows.iter().zip(&self.highs))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    /// Maps a coordinate back into `[low, high)` along one axis.
    #[inline]
    pub fn wrap_coord(&self, axis: usize, v: f64) -> f64 {
        let lo = self.lows[axis];
        let w = self.width(axis);
        let mut r = (v - lo) % w;
        if r < 0.0 {
            r += w;
        }
        if r >= w {
            r = 0.0;
        }
        lo + r
    }

    /// Wraps in place under torus topology. Under plain topology returns
    /// whether the point is inside, leaving it untouched.
    pub fn wrap(&self, x: &mut [f64]) -> bool {
        match self.topology {
            Topology::Torus => {
                for (axis, v) in x.iter_mut().enumerate() {
                    *v = self.wrap_coord(axis, *v);
                }
                true
            }
            Topology::Plain => self.contains(x),
        }
    }

    /// Per-axis separation, minimum image on a torus.
    #[inline]
    pub fn axis_delta(&self, axis: usize, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.topology {
            Topology::Plain => d,
            Topology::Torus => {
                let w = self.width(axis);
                let d = d % w;
                d.min(w - d)
            }
        }
    }

    #[inline]
    pub fn distance_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for axis in 0..x.len() {
            let d = self.axis_delta(axis, x[axis], y[axis]);
            s += d * d;
        }
        s
    }

    #[inline]
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        libm::sqrt(self.distance_sq(x, y))
    }

    /// Checked distance: both points must lie in the window.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if !self.contains(x) || !self.contains(y) {
            return Err(Error::OutsideWindow);
        }
        Ok(self.dist(x, y))
    }

    pub fn sample_uniform_into(&self, rng: &mut RngStream, out: &mut Vec<f64>) {
        for axis in 0..self.dim() {
            out.push(rng.uniform_range(self.lows[axis], self.highs[axis]));
        }
    }

    pub fn sample_uniform(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        self.sample_uniform_into(rng, &mut v);
        v
    }

    pub fn center(&self) -> Vec<f64> {
        self.lows
            .iter()
            .zip(&self.highs)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    /// Same window grown by `pad` on every side (plain topology).
    pub fn padded(&self, pad: f64) -> Window {
        let lows: Vec<f64> = self.lows.iter().map(|l| l - pad).collect();
        let highs: Vec<f64> = self.highs.iter().map(|h| h + pad).collect();
        Window::new(&lows, &highs, Topology::Plain).expect("padding keeps axes valid")
    }

    pub fn same_shape(&self, other: &Window) -> bool {
        self == other
    }
}

pub fn make_window(lows: &[f64], highs: &[f64], topology: Topology) -> Result<Window> {
    Window::new(lows, highs, topology)
}

/// Half-open box `[low, high)` inside a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Cuboid {
    lows: Vec<f64>,
    highs: Vec<f64>,
}

impl Cuboid {
    pub fn new(window: &Window, lows: &[f64], highs: &[f64]) -> Result<Self> {
        let d = window.dim();
        if lows.len() != d || highs.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: lows.len().max(highs.len()),
            });
        }
        for axis in 0..d {
            let (lo, hi) = (lows[axis], highs[axis]);
            if !(lo < hi) {
                return Err(Error::DegenerateAxis {
                    axis,
                    low: lo,
                    high: hi,
                });
            }
            if lo < window.lows()[axis] || hi > window.highs()[axis] {
                return Err(Error::OutsideWindow);
            }
        }
        Ok(Self {
            lows: lows.to_vec(),
            highs: highs.to_vec(),
        })
    }

    pub fn whole(window: &Window) -> Self {
        Self {
            lows: window.lows().to_vec(),
            highs: window.highs().to_vec(),
        }
    }

    pub fn lows(&self) -> &[f64] {
        &self.lows
    }

    pub fn highs(&self) -> &[f64] {
        &self.highs
    }

    pub fn dim(&self) -> usize {
        self.lows.len()
    }

    pub fn volume(&self) -> f64 {
        self.lows
            .iter()
            .zip(&self.highs)
            .map(|(l, h)| h - l)
            .product()
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lows.iter().zip(&self.highs))
            .all(|(&v, (&lo, &hi))| v >= lo && v < hi)
    }

    pub fn overlaps(&self, other: &Cuboid) -> bool {
        (0..self.dim()).all(|i| self.lows[i] < other.highs[i] && other.lows[i] < self.highs[i])
    }

    /// Overlap length with `[lo, hi)` along one axis.
    #[inline]
    pub fn axis_overlap(&self, axis: usize, lo: f64, hi: f64) -> f64 {
        (self.highs[axis].min(hi) - self.lows[axis].max(lo)).max(0.0)
    }

    /// Splits along `axis` at `at`, which must lie strictly inside.
    pub fn split(&self, axis: usize, at: f64) -> (Cuboid, Cuboid) {
        let mut left = self.clone();
        let mut right = self.clone();
        left.highs[axis] = at;
        right.lows[axis] = at;
        (left, right)
    }
}

/// Rejects any pair of overlapping boxes.
pub fn check_disjoint(boxes: &[Cuboid]) -> Result<()> {
    for i in 0..boxes.len() {
        for j in (i + 1)..boxes.len() {
            if boxes[i].overlaps(&boxes[j]) {
                return Err(Error::OverlappingBoxes(i, j));
            }
        }
    }
    Ok(())
}
