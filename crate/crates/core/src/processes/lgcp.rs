//! Log-Gaussian Cox processes on a grid.

use alloc::vec::Vec;

use super::{sample_cox, window_mean, MeasureSampler};
use crate::dist::standard_normal;
use crate::error::{invalid, Result};
use crate::geometry::{Cuboid, Window};
use crate::linalg::Cholesky;
use crate::measure::{GridField, Measure};
use crate::pattern::PointPattern;
use crate::rng::RngStream;

/// Largest grid the dense factorization accepts.
pub const MAX_LGCP_CELLS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceKind {
    /// `σ² exp(-r / range)`
    Exponential,
    /// `σ² exp(-(r / range)²)`
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceSpec {
    pub kind: CovarianceKind,
    pub variance: f64,
    pub range: f64,
}

impl CovarianceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= 0.0 && self.variance.is_finite()) {
            return Err(invalid("variance", "must be non-negative"));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(invalid("range", "must be positive"));
        }
        Ok(())
    }

    pub fn at(&self, r: f64) -> f64 {
        let t = r / self.range;
        match self.kind {
            CovarianceKind::Exponential => self.variance * libm::exp(-t),
            CovarianceKind::Gaussian => self.variance * libm::exp(-t * t),
        }
    }
}

/// LGCP with the grid covariance factored once at construction.
#[derive(Clone, Debug)]
pub struct Lgcp {
    pub mean: f64,
    pub cov: CovarianceSpec,
    template: GridField,
    factor: Option<Cholesky>,
}

impl Lgcp {
    pub fn new(mean: f64, cov: CovarianceSpec, window: Window, cells: &[usize]) -> Result<Self> {
        cov.validate()?;
        if !mean.is_finite() {
            return Err(invalid("mean", "must be finite"));
        }
        let template = GridField::constant(window, cells.to_vec(), 0.0)?;
        let n = template.len();
        if n > MAX_LGCP_CELLS {
            return Err(invalid("cells_per_axis", "LGCP grid is capped at 10^4 cells"));
        }
        let factor = if cov.variance == 0.0 {
            None
        } else {
            let mids = template.midpoints();
            let mut a = alloc::vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    // Euclidean, so the covariance stays positive definite on tori too
                    let r2: f64 = mids[i].iter().zip(&mids[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    let c = cov.at(libm::sqrt(r2));
                    a[i * n + j] = c;
                    a[j * n + i] = c;
                }
            }
            Some(Cholesky::factor(&a, n)?)
        };
        Ok(Self {
            mean,
            cov,
            template,
            factor,
        })
    }

    /// `E λ(y) = exp(mean + variance / 2)`.
    pub fn mean_intensity(&self) -> f64 {
        libm::exp(self.mean + 0.5 * self.cov.variance)
    }

    pub fn sample_field(&self, rng: &mut RngStream) -> Result<GridField> {
        let n = self.template.len();
        let values = match &self.factor {
            None => alloc::vec![libm::exp(self.mean); n],
            Some(l) => {
                let z: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
                let mut x = Vec::with_capacity(n);
                l.apply(&z, &mut x);
                x.into_iter().map(|v| libm::exp(self.mean + v)).collect()
            }
        };
        GridField::new(
            self.template.window().clone(),
            self.template.cells_per_axis().to_vec(),
            values,
        )
    }
}

pub fn sample_lgcp(mean: f64, cov: CovarianceSpec, w: &Window, cells: &[usize], rng: &mut RngStream) -> Result<PointPattern> {
    let lgcp = Lgcp::new(mean, cov, w.clone(), cells)?;
    sample_cox(&lgcp.sample_field(rng)?, rng)
}

impl MeasureSampler for Lgcp {
    fn window(&self) -> &Window {
        self.template.window()
    }
    fn sample(&self, rng: &mut RngStream) -> Result<Measure> {
        Ok(sample_cox(&self.sample_field(rng)?, rng)?.into())
    }
    fn mean_mass(&self, b: &Cuboid) -> Option<f64> {
        Some(window_mean(self.mean_intensity(), b))
    }
}
