//! Radially symmetric kernels: cluster (offspring) kernels and shot-noise
//! response functions.

use alloc::vec::Vec;

use crate::dist::{gamma, standard_normal};
use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::special::{unit_ball_volume, unit_sphere_area};

/// Relative level below which kernels are treated as zero.
pub const TRUNCATION_LEVEL: f64 = 1e-6;

/// Kernel `h(x, y) = k(|x - y|)` driving cluster intensities.
#[derive(Clone, Debug, PartialEq)]
pub enum ClusterKernel {
    /// Isotropic normal density with per-axis standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Uniform density on the ball of the given radius.
    UniformBall { radius: f64 },
    /// `height · 1[r <= radius]`; not normalized.
    IndicatorBall { radius: f64, height: f64 },
    /// `height · (1 + r/scale)^(-beta)`; needs `beta > d`.
    PowerLaw { beta: f64, scale: f64, height: f64 },
}

impl ClusterKernel {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let pos = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, "must be positive and finite"))
            }
        };
        match *self {
            ClusterKernel::Gaussian { sigma } => pos("sigma", sigma),
            ClusterKernel::UniformBall { radius } => pos("radius", radius),
            ClusterKernel::IndicatorBall { radius, height } => {
                pos("radius", radius)?;
                if !(height.is_finite() && height >= 0.0) {
                    return Err(invalid("height", "must be non-negative"));
                }
                Ok(())
            }
            ClusterKernel::PowerLaw { beta, scale, height } => {
                pos("scale", scale)?;
                if !(height.is_finite() && height >= 0.0) {
                    return Err(invalid("height", "must be non-negative"));
                }
                if !(beta > dim as f64) {
                    return Err(invalid("beta", "power-law kernel is not integrable unless beta > d"));
                }
                Ok(())
            }
        }
    }

    pub fn is_density(&self) -> bool {
        matches!(self, ClusterKernel::Gaussian { .. } | ClusterKernel::UniformBall { .. })
    }

    pub fn value(&self, r: f64, dim: usize) -> f64 {
        match *self {
            ClusterKernel::Gaussian { sigma } => {
                let norm = libm::pow(2.0 * core::f64::consts::PI * sigma * sigma, -(dim as f64) / 2.0);
                norm * libm::exp(-r * r / (2.0 * sigma * sigma))
            }
            ClusterKernel::UniformBall { radius } => {
                if r <= radius {
                    1.0 / (unit_ball_volume(dim) * libm::pow(radius, dim as f64))
                } else {
                    0.0
                }
            }
            ClusterKernel::IndicatorBall { radius, height } => {
                if r <= radius {
                    height
                } else {
                    0.0
                }
            }
            ClusterKernel::PowerLaw { beta, scale, height } => {
                height * libm::pow(1.0 + r / scale, -beta)
            }
        }
    }

    /// `∫ h` over ℝ^d.
    pub fn total_mass(&self, dim: usize) -> f64 {
        let d = dim as f64;
        match *self {
            ClusterKernel::Gaussian { .. } | ClusterKernel::UniformBall { .. } => 1.0,
            ClusterKernel::IndicatorBall { radius, height } => {
                height * unit_ball_volume(dim) * libm::pow(radius, d)
            }
            ClusterKernel::PowerLaw { beta, scale, height } => {
                // S_d scale^d B(d, beta - d)
                let beta_fn = libm::exp(libm::lgamma(d) + libm::lgamma(beta - d) - libm::lgamma(beta));
                height * unit_sphere_area(dim) * libm::pow(scale, d) * beta_fn
            }
        }
    }

    /// `∫ h²` over ℝ^d.
    pub fn square_integral(&self, dim: usize) -> f64 {
        let d = dim as f64;
        match *self {
            ClusterKernel::Gaussian { sigma } => {
                libm::pow(4.0 * core::f64::consts::PI * sigma * sigma, -d / 2.0)
            }
            ClusterKernel::UniformBall { radius } => {
                1.0 / (unit_ball_volume(dim) * libm::pow(radius, d))
            }
            ClusterKernel::IndicatorBall { radius, height } => {
                height * height * unit_ball_volume(dim) * libm::pow(radius, d)
            }
            ClusterKernel::PowerLaw { beta, scale, height } => {
                ClusterKernel::PowerLaw {
                    beta: 2.0 * beta,
                    scale,
                    height: height * height,
                }
                .total_mass(dim)
            }
        }
    }

    /// Radius beyond which `h < TRUNCATION_LEVEL · h(0)`.
    pub fn truncation_radius(&self) -> f64 {
        match *self {
            ClusterKernel::Gaussian { sigma } => sigma * libm::sqrt(-2.0 * libm::log(TRUNCATION_LEVEL)),
            ClusterKernel::UniformBall { radius } | ClusterKernel::IndicatorBall { radius, .. } => radius,
            ClusterKernel::PowerLaw { beta, scale, .. } => {
                scale * (libm::pow(TRUNCATION_LEVEL, -1.0 / beta) - 1.0)
            }
        }
    }

    /// Draws an offset from the normalized kernel `h / ∫h`.
    pub fn sample_offset(&self, dim: usize, rng: &mut RngStream, out: &mut Vec<f64>) {
        out.clear();
        match *self {
            ClusterKernel::Gaussian { sigma } => {
                for _ in 0..dim {
                    out.push(sigma * standard_normal(rng));
                }
            }
            ClusterKernel::UniformBall { radius } | ClusterKernel::IndicatorBall { radius, .. } => {
                let r = radius * libm::pow(rng.uniform(), 1.0 / dim as f64);
                random_direction(dim, rng, out);
                out.iter_mut().for_each(|v| *v *= r);
            }
            ClusterKernel::PowerLaw { beta, scale, .. } => {
                // r/scale is beta-prime(d, beta - d)
                let d = dim as f64;
                let r = scale * gamma(d, 1.0, rng) / gamma(beta - d, 1.0, rng);
                random_direction(dim, rng, out);
                out.iter_mut().for_each(|v| *v *= r);
            }
        }
    }
}

fn random_direction(dim: usize, rng: &mut RngStream, out: &mut Vec<f64>) {
    if dim == 1 {
        out.push(if rng.bernoulli(0.5) { 1.0 } else { -1.0 });
        return;
    }
    loop {
        out.clear();
        let mut norm = 0.0;
        for _ in 0..dim {
            let z = standard_normal(rng);
            norm += z * z;
            out.push(z);
        }
        if norm > 1e-300 {
            let inv = 1.0 / libm::sqrt(norm);
            out.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Shape of a response function.
#[derive(Clone, Debug, PartialEq)]
pub enum ResponseShape {
    IndicatorBall { radius: f64 },
    /// `exp(-r²/2σ²)`, peak 1.
    Gaussian { sigma: f64 },
    /// `(1 + r)^(-beta)`.
    PowerLaw { beta: f64 },
    /// Piecewise-linear table at `r = i·step`, zero past the last entry.
    UserGrid { step: f64, values: Vec<f64> },
}

/// Response `h(x, y) = P · shape(|x - y|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseKernel {
    pub shape: ResponseShape,
    pub emitted_power: f64,
}

impl ResponseKernel {
    pub fn new(shape: ResponseShape, emitted_power: f64) -> Self {
        Self {
            shape,
            emitted_power,
        }
    }

    pub fn power_law(beta: f64, power: f64) -> Self {
        Self::new(ResponseShape::PowerLaw { beta }, power)
    }

    pub fn indicator(radius: f64) -> Self {
        Self::new(ResponseShape::IndicatorBall { radius }, 1.0)
    }

    pub fn gaussian(sigma: f64, power: f64) -> Self {
        Self::new(ResponseShape::Gaussian { sigma }, power)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.emitted_power.is_finite() && self.emitted_power >= 0.0) {
            return Err(invalid("emitted_power", "must be finite and non-negative"));
        }
        match &self.shape {
            ResponseShape::IndicatorBall { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                Err(invalid("radius", "must be positive"))
            }
            ResponseShape::Gaussian { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                Err(invalid("sigma", "must be positive"))
            }
            ResponseShape::PowerLaw { beta } if !(*beta > dim as f64) => {
                Err(invalid("beta", "path loss is not integrable unless beta > d"))
            }
            ResponseShape::UserGrid { step, values } => {
                if !(*step > 0.0) || values.is_empty() {
                    return Err(invalid("user_grid", "needs a positive step and at least one value"));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(invalid("user_grid", "values must be finite and non-negative"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        let s = match &self.shape {
            ResponseShape::IndicatorBall { radius } => {
                if r <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            ResponseShape::Gaussian { sigma } => libm::exp(-r * r / (2.0 * sigma * sigma)),
            ResponseShape::PowerLaw { beta } => power_neg(1.0 + r, *beta),
            ResponseShape::UserGrid { step, values } => {
                let t = r / step;
                let i = libm::floor(t) as usize;
                if i + 1 < values.len() {
                    let f = t - i as f64;
                    values[i] * (1.0 - f) + values[i + 1] * f
                } else if i + 1 == values.len() && t == i as f64 {
                    values[i]
                } else {
                    0.0
                }
            }
        };
        self.emitted_power * s
    }

    pub fn peak(&self) -> f64 {
        match &self.shape {
            ResponseShape::UserGrid { values, .. } => {
                self.emitted_power * values.iter().copied().fold(0.0, f64::max)
            }
            _ => self.value(0.0),
        }
    }

    /// Radius beyond which contributions are dropped.
    pub fn truncation_radius(&self) -> f64 {
        match &self.shape {
            ResponseShape::IndicatorBall { radius } => *radius,
            ResponseShape::Gaussian { sigma } => sigma * libm::sqrt(-2.0 * libm::log(TRUNCATION_LEVEL)),
            ResponseShape::PowerLaw { beta } => libm::pow(TRUNCATION_LEVEL, -1.0 / beta) - 1.0,
            ResponseShape::UserGrid { step, values } => step * (values.len() - 1) as f64,
        }
    }
}

#[inline]
fn power_neg(base: f64, beta: f64) -> f64 {
    if beta == 4.0 {
        let b2 = base * base;
        1.0 / (b2 * b2)
    } else {
        libm::pow(base, -beta)
    }
}
