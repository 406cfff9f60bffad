//! Small special-function helpers shared by samplers and exact oracles.

use alloc::vec::Vec;

pub fn ln_factorial(k: u64) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(k as f64 * libm::log(mean) - mean - ln_factorial(k))
}

/// `P(N >= k)` for `N ~ Poisson(mean)`, summed upward so small tails keep
/// full relative precision.
pub fn poisson_tail(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    if (k as f64) < mean {
        // Lower part is the small one; complement it.
        let lower: f64 = (0..k).map(|j| poisson_pmf(j, mean)).sum();
        return (1.0 - lower).max(0.0);
    }
    let mut term = poisson_pmf(k, mean);
    let mut total = 0.0;
    let mut j = k;
    while term > 0.0 {
        total += term;
        j += 1;
        term *= mean / j as f64;
        if term < total * 1e-18 {
            break;
        }
    }
    total
}

/// Smallest `m` with `P(Poisson(mean) >= m) < eps`.
pub fn poisson_truncation(mean: f64, eps: f64) -> u64 {
    let mut m = libm::ceil(mean) as u64 + 1;
    while poisson_tail(m, mean) >= eps {
        m += 1;
    }
    m
}

/// Truncated Poisson pmf on `0..m` where the dropped tail is below `eps`.
pub fn poisson_pmf_table(mean: f64, eps: f64) -> Vec<f64> {
    let m = poisson_truncation(mean, eps);
    (0..m).map(|k| poisson_pmf(k, mean)).collect()
}

/// Upper tail of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Inverse of [`normal_sf`] for `p` in `(0, 1)`, by bisection on `erfc`.
pub fn normal_isf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_sf(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Critical value after Bonferroni correction of a one-sided `z_crit` test
/// over `m` simultaneous comparisons.
pub fn bonferroni_z(z_crit: f64, m: usize) -> f64 {
    if m <= 1 {
        return z_crit;
    }
    normal_isf(normal_sf(z_crit) / m as f64)
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    libm::pow(core::f64::consts::PI, h) / libm::tgamma(h + 1.0)
}

/// Surface area of the unit sphere in `d` dimensions.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_sums_to_one() {
        for mean in [0.3, 1.0, 5.0, 40.0] {
            let t = poisson_pmf_table(mean, 1e-12);
            let s: f64 = t.iter().sum();
            assert!((s - 1.0).abs() < 1e-11, "{mean}: {s}");
        }
    }

    #[test]
    fn tail_matches_complement() {
        let mean = 2.5;
        for k in 0..15u64 {
            let lower: f64 = (0..k).map(|j| poisson_pmf(j, mean)).sum();
            assert!((poisson_tail(k, mean) - (1.0 - lower)).abs() < 1e-13);
        }
    }

    #[test]
    fn normal_quantiles() {
        assert!((normal_isf(normal_sf(3.0)) - 3.0).abs() < 1e-9);
        assert!((normal_isf(0.025) - 1.959_963_984_540_054).abs() < 1e-9);
        let z = bonferroni_z(3.0, 100);
        assert!(z > 4.1 && z < 4.3, "{z}");
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - core::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * core::f64::consts::PI).abs() < 1e-12);
    }
}
