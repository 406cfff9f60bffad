use alloc::vec::Vec;

use super::{Estimate, Moments};
use crate::error::{invalid, Error, Result};
use crate::geometry::Cuboid;
use crate::pattern::PointPattern;
use crate::special::unit_ball_volume;

fn check_reps(reps: &[PointPattern], intensity: f64) -> Result<()> {
    let first = reps.first().ok_or(Error::Empty("replications"))?;
    if !first.window().is_torus() {
        return Err(invalid("window", "second-order estimators need a torus"));
    }
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(invalid("intensity", "must be positive and finite"));
    }
    if reps.iter().any(|p| p.window() != first.window()) {
        return Err(Error::WindowMismatch);
    }
    Ok(())
}

/// Sorted distances over unordered pairs.
fn pair_distances(p: &PointPattern) -> Vec<f64> {
    let w = p.window();
    let n = p.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        let x = p.point(i);
        for j in (i + 1)..n {
            out.push(w.dist(x, p.point(j)));
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn pairs_within(sorted: &[f64], lo: f64, hi: f64) -> usize {
    sorted.partition_point(|&d| d <= hi) - sorted.partition_point(|&d| d < lo)
}

/// Ripley's K, `K(r) = (1/(λ²|G|)) Σ_{i≠j} 1[|X_i - X_j| ≤ r]` with `G` the
/// whole torus, averaged over replications. `πr²` for Poisson in the plane.
pub fn ripley_k(reps: &[PointPattern], r_grid: &[f64], intensity: f64) -> Result<Vec<Estimate>> {
    check_reps(reps, intensity)?;
    let norm = 1.0 / (intensity * intensity * reps[0].window().volume());
    let mut acc = alloc::vec![Moments::new(); r_grid.len()];
    for p in reps {
        let d = pair_distances(p);
        for (m, &r) in acc.iter_mut().zip(r_grid) {
            m.push(2.0 * pairs_within(&d, 0.0, r) as f64 * norm);
        }
    }
    Ok(acc.iter().map(Moments::estimate).collect())
}

/// Box-kernel pair correlation: ordered pairs at distance within
/// `bandwidth` of `r`, divided by `λ²|G|` times the annulus volume.
pub fn pair_correlation(reps: &[PointPattern], r_grid: &[f64], bandwidth: f64, intensity: f64) -> Result<Vec<Estimate>> {
    check_reps(reps, intensity)?;
    let r_max = r_grid.iter().copied().fold(0.0, f64::max);
    if !(bandwidth > 0.0) || bandwidth >= r_max {
        return Err(invalid("bandwidth", "must be positive and below the largest r"));
    }
    let w = reps[0].window();
    let dim = w.dim();
    let vb = unit_ball_volume(dim);
    let norm = 1.0 / (intensity * intensity * w.volume());
    let shells: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            let lo = (r - bandwidth).max(0.0);
            vb * (libm::pow(r + bandwidth, dim as f64) - libm::pow(lo, dim as f64))
        })
        .collect();
    let mut acc = alloc::vec![Moments::new(); r_grid.len()];
    for p in reps {
        let d = pair_distances(p);
        for ((m, &r), &shell) in acc.iter_mut().zip(r_grid).zip(&shells) {
            let c = pairs_within(&d, r - bandwidth, r + bandwidth);
            m.push(2.0 * c as f64 * norm / shell);
        }
    }
    Ok(acc.iter().map(Moments::estimate).collect())
}

/// Typical degree of the geometric graph joining points at distance at most
/// `grain_radius` (balls of radius `grain_radius / 2` that intersect),
/// `(1/(λ|A|)) Σ_{X_i ∈ A} #{j ≠ i : |X_i - X_j| ≤ r}`.
pub fn rgg_typical_degree(reps: &[PointPattern], grain_radius: f64, a: &Cuboid, intensity: f64) -> Result<Estimate> {
    check_reps(reps, intensity)?;
    if !(grain_radius > 0.0) {
        return Err(invalid("grain_radius", "must be positive"));
    }
    if !(a.volume() > 0.0) {
        return Err(Error::Empty("box"));
    }
    let norm = 1.0 / (intensity * a.volume());
    let r2 = grain_radius * grain_radius;
    let mut acc = Moments::new();
    for p in reps {
        let w = p.window();
        let mut edges = 0usize;
        for i in 0..p.len() {
            let x = p.point(i);
            if !a.contains(x) {
                continue;
            }
            edges += (0..p.len()).filter(|&j| j != i && w.distance_sq(x, p.point(j)) <= r2).count();
        }
        acc.push(edges as f64 * norm);
    }
    Ok(acc.estimate())
}
