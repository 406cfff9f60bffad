//! Scalar distributions: primitive samplers and the non-negative
//! [`MassDistribution`] family used for masses, marks and mixing variables.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::special::ln_factorial;

/// Poisson variate. Inversion by sequential search for small means,
/// PTRS transformed rejection (Hörmann 1993) above 10.
pub fn poisson(mean: f64, rng: &mut RngStream) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 10.0 {
        let mut k = 0u64;
        let mut p = libm::exp(-mean);
        let mut cdf = p;
        let u = rng.uniform();
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                // u fell in the rounding gap above the accumulated cdf
                break;
            }
        }
        return k;
    }
    let slam = libm::sqrt(mean);
    let loglam = libm::log(mean);
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = libm::floor((2.0 * a / us + b) * u + mean + 0.43);
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = libm::log(v) + libm::log(inv_alpha) - libm::log(a / (us * us) + b);
        let rhs = -mean + k * loglam - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Standard normal by the Marsaglia polar method.
pub fn standard_normal(rng: &mut RngStream) -> f64 {
    loop {
        let u = 2.0 * rng.uniform() - 1.0;
        let v = 2.0 * rng.uniform() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * libm::sqrt(-2.0 * libm::log(s) / s);
        }
    }
}

pub fn exponential(mean: f64, rng: &mut RngStream) -> f64 {
    -mean * libm::log(rng.uniform_open0())
}

/// Gamma(shape, scale) by Marsaglia–Tsang, boosted for shape < 1.
pub fn gamma(shape: f64, scale: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        let g = gamma(shape + 1.0, 1.0, rng);
        return scale * g * libm::pow(rng.uniform_open0(), 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / libm::sqrt(9.0 * d);
    loop {
        let x = standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.uniform_open0();
        if u < 1.0 - 0.0331 * x * x * x * x
            || libm::log(u) < 0.5 * x * x + d * (1.0 - v + libm::log(v))
        {
            return scale * d * v;
        }
    }
}

/// Non-negative scalar law with closed-form moments.
#[derive(Clone, Debug, PartialEq)]
pub enum MassDistribution {
    Constant(f64),
    Exponential { mean: f64 },
    Gamma { shape: f64, scale: f64 },
    /// Sum of independent exponentials with the given means.
    SumOfExponentials { means: Vec<f64> },
    /// `value` with probability `p`, else 0.
    Bernoulli { p: f64, value: f64 },
    /// Finite table of values and probabilities.
    Table { values: Vec<f64>, probs: Vec<f64> },
}

impl MassDistribution {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(name, "must be finite and non-negative"))
            }
        };
        match self {
            MassDistribution::Constant(c) => nonneg("constant", *c),
            MassDistribution::Exponential { mean } => nonneg("mean", *mean),
            MassDistribution::Gamma { shape, scale } => {
                if !(*shape > 0.0 && shape.is_finite()) {
                    return Err(invalid("shape", "must be positive"));
                }
                nonneg("scale", *scale)
            }
            MassDistribution::SumOfExponentials { means } => {
                means.iter().try_for_each(|&m| nonneg("means", m))
            }
            MassDistribution::Bernoulli { p, value } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(invalid("p", "must be a probability"));
                }
                nonneg("value", *value)
            }
            MassDistribution::Table { values, probs } => {
                if values.len() != probs.len() || values.is_empty() {
                    return Err(invalid("table", "values and probs must be non-empty and equal length"));
                }
                values.iter().try_for_each(|&v| nonneg("values", v))?;
                if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(invalid("probs", "entries must be probabilities"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid("probs", "must sum to 1"));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            MassDistribution::Constant(c) => *c,
            MassDistribution::Exponential { mean } => *mean,
            MassDistribution::Gamma { shape, scale } => shape * scale,
            MassDistribution::SumOfExponentials { means } => means.iter().sum(),
            MassDistribution::Bernoulli { p, value } => p * value,
            MassDistribution::Table { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            MassDistribution::Constant(c) => c * c,
            MassDistribution::Exponential { mean } => 2.0 * mean * mean,
            MassDistribution::Gamma { shape, scale } => shape * (shape + 1.0) * scale * scale,
            MassDistribution::SumOfExponentials { means } => {
                let m: f64 = means.iter().sum();
                let var: f64 = means.iter().map(|x| x * x).sum();
                var + m * m
            }
            MassDistribution::Bernoulli { p, value } => p * value * value,
            MassDistribution::Table { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * v * p).sum()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.second_moment() - m * m).max(0.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.variance() == 0.0
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            MassDistribution::Constant(c) => *c,
            MassDistribution::Exponential { mean } => exponential(*mean, rng),
            MassDistribution::Gamma { shape, scale } => gamma(*shape, *scale, rng),
            MassDistribution::SumOfExponentials { means } => {
                means.iter().map(|&m| exponential(m, rng)).sum()
            }
            MassDistribution::Bernoulli { p, value } => {
                if rng.bernoulli(*p) {
                    *value
                } else {
                    0.0
                }
            }
            MassDistribution::Table { values, probs } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("validated non-empty")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn moments(n: usize, mut draw: impl FnMut() -> f64) -> (f64, f64) {
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..n {
            let x = draw();
            s += x;
            ss += x * x;
        }
        let m = s / n as f64;
        (m, ss / n as f64 - m * m)
    }

    #[test]
    fn poisson_small_and_large_means() {
        for (i, &mean) in [0.3, 2.0, 9.5, 10.5, 37.0, 400.0].iter().enumerate() {
            let mut rng = RngStream::new(11, i as u64);
            let n = 200_000;
            let (m, v) = moments(n, || poisson(mean, &mut rng) as f64);
            let se = libm::sqrt(mean / n as f64);
            assert!((m - mean).abs() < 4.0 * se, "mean {mean}: {m}");
            assert!((v / mean - 1.0).abs() < 0.03, "var {mean}: {v}");
        }
    }

    #[test]
    fn poisson_pmf_chi_square_large_mean() {
        // PTRS branch against the exact pmf.
        let mean = 15.0;
        let n = 200_000;
        let mut rng = RngStream::new(5, 5);
        let mut counts = vec![0usize; 40];
        for _ in 0..n {
            let k = poisson(mean, &mut rng) as usize;
            counts[k.min(39)] += 1;
        }
        let mut chi = 0.0;
        let mut cells = 0;
        for (k, &c) in counts.iter().enumerate().take(39) {
            let e = n as f64 * crate::special::poisson_pmf(k as u64, mean);
            if e > 20.0 {
                chi += (c as f64 - e) * (c as f64 - e) / e;
                cells += 1;
            }
        }
        // df ~ 25; 99.99th percentile ~ 60
        assert!(chi < 60.0, "chi2 = {chi} over {cells} cells");
    }

    #[test]
    fn gamma_and_normal_moments() {
        let mut rng = RngStream::new(3, 0);
        let (m, v) = moments(200_000, || gamma(2.5, 2.0, &mut rng));
        assert!((m - 5.0).abs() < 0.05 && (v - 10.0).abs() < 0.3);
        let (m, v) = moments(200_000, || gamma(0.4, 1.0, &mut rng));
        assert!((m - 0.4).abs() < 0.01 && (v - 0.4).abs() < 0.02);
        let (m, v) = moments(200_000, || standard_normal(&mut rng));
        assert!(m.abs() < 0.01 && (v - 1.0).abs() < 0.02);
    }

    #[test]
    fn mass_distribution_moments() {
        let laws = [
            MassDistribution::Constant(1.5),
            MassDistribution::Exponential { mean: 1.0 },
            MassDistribution::Gamma { shape: 3.0, scale: 0.5 },
            MassDistribution::SumOfExponentials { means: vec![0.5, 0.5] },
            MassDistribution::Bernoulli { p: 0.5, value: 4.0 },
            MassDistribution::Table { values: vec![0.0, 1.0, 3.0], probs: vec![0.2, 0.5, 0.3] },
        ];
        for (i, law) in laws.iter().enumerate() {
            law.validate().unwrap();
            let mut rng = RngStream::new(99, i as u64);
            let n = 200_000;
            let (m, v) = moments(n, || law.sample(&mut rng));
            let se = libm::sqrt(law.variance() / n as f64).max(1e-12);
            assert!((m - law.mean()).abs() < 4.0 * se, "{law:?}: {m}");
            assert!((v - law.variance()).abs() < 0.05 * law.variance().max(1e-9) + 1e-12, "{law:?}: {v}");
        }
    }

    #[test]
    fn validation_rejects_bad_laws() {
        assert!(MassDistribution::Constant(-1.0).validate().is_err());
        assert!(MassDistribution::Bernoulli { p: 1.5, value: 1.0 }.validate().is_err());
        assert!(MassDistribution::Table { values: vec![1.0], probs: vec![0.5] }.validate().is_err());
    }
}
