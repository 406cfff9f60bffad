//! Summary statistics: moments, second-order functions, coverage numbers,
//! mixed Palm reweighting and random-geometric-graph degrees.

mod coverage;
mod palm;
mod second_order;

pub use coverage::{coverage_field, joint_pgf};
pub use palm::mixed_palm_estimate;
pub use second_order::{pair_correlation, rgg_typical_degree, ripley_k};

/// A point estimate with its Monte-Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `(value - reference) / stderr`, zero when both vanish.
    pub fn z_against(&self, reference: f64) -> f64 {
        z_score(self.value - reference, self.stderr)
    }
}

pub(crate) fn z_score(diff: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        diff / stderr
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Running mean and variance (Welford), mergeable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Self::new();
        xs.iter().for_each(|&x| m.push(x));
        m
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        libm::sqrt(self.variance() / self.n as f64)
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.mean,
            stderr: self.stderr(),
        }
    }
}
