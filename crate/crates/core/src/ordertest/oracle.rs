use alloc::vec::Vec;

use super::TestFunction;
use crate::error::{invalid, Error, Result};
use crate::processes::{ginibre_depth, IsingField};
use crate::special::{poisson_pmf_table, poisson_tail};

const PMF_EPS: f64 = 1e-13;
const ORACLE_TOL: f64 = 1e-9;

/// Finitely supported law.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDist {
    /// Probabilities must be non-negative and sum to 1 within `1e-12`.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() || support.is_empty() {
            return Err(invalid("pmf", "support and probabilities must be non-empty and equal length"));
        }
        if support.iter().chain(&probs).any(|v| !v.is_finite()) || probs.iter().any(|&p| p < 0.0) {
            return Err(invalid("pmf", "entries must be finite with non-negative probabilities"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Unnormalized(total));
        }
        Ok(Self { support, probs })
    }

    /// Law of `scale · K` for `K` distributed by the table on `0, 1, 2, …`.
    pub fn scaled_lattice(pmf: &[f64], scale: f64) -> Result<Self> {
        Self::new((0..pmf.len()).map(|k| scale * k as f64).collect(), pmf.to_vec())
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    /// `E (X - t)₊`.
    pub fn stop_loss(&self, t: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(x, _)| **x > t)
            .map(|(x, p)| (x - t) * p)
            .sum()
    }
}

/// Result of an exact convex-order check of `X ≤cx Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct CxOracle {
    /// `max_t (E(X-t)₊ - E(Y-t)₊)`, floored at zero.
    pub max_violation: f64,
    /// `|EX - EY|`.
    pub mean_diff: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub grid_len: usize,
    pub pass: bool,
}

fn default_grid(x: &DiscreteDist, y: &DiscreteDist) -> Vec<f64> {
    let mut pts: Vec<f64> = x.support.iter().chain(&y.support).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut grid = Vec::with_capacity(2 * pts.len());
    for (i, &p) in pts.iter().enumerate() {
        grid.push(p);
        if let Some(&q) = pts.get(i + 1) {
            grid.push(0.5 * (p + q));
        }
    }
    grid
}

/// Stop-loss comparison of two discrete laws. Passes iff the largest excess
/// of `X`'s stop-loss transform over `Y`'s on the grid and the mean gap are
/// both at most `1e-9`. The default grid is the union of both supports plus
/// midpoints, enough for discrete laws since both transforms are piecewise
/// linear with kinks at support points.
pub fn cx_compare_exact(x: &DiscreteDist, y: &DiscreteDist, t_grid: Option<&[f64]>) -> CxOracle {
    let owned;
    let grid = match t_grid {
        Some(g) => g,
        None => {
            owned = default_grid(x, y);
            &owned
        }
    };
    let max_violation = grid
        .iter()
        .map(|&t| x.stop_loss(t) - y.stop_loss(t))
        .fold(0.0_f64, f64::max);
    let (mean_x, mean_y) = (x.mean(), y.mean());
    let mean_diff = (mean_x - mean_y).abs();
    CxOracle {
        max_violation,
        mean_diff,
        mean_x,
        mean_y,
        grid_len: grid.len(),
        pass: max_violation <= ORACLE_TOL && mean_diff <= ORACLE_TOL,
    }
}

fn poisson_law(mean: f64) -> Result<DiscreteDist> {
    DiscreteDist::scaled_lattice(&poisson_pmf_table(mean, PMF_EPS), 1.0)
}

/// Exact check of `Poisson(c·a) ≤cx c·Poisson(a)`.
pub fn oracle_poisson_scaling(a: f64, c: f64, t_grid: Option<&[f64]>) -> Result<CxOracle> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", "must be positive"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("c", "must be positive"));
    }
    let x = poisson_law(c * a)?;
    let y = DiscreteDist::scaled_lattice(&poisson_pmf_table(a, PMF_EPS), c)?;
    Ok(cx_compare_exact(&x, &y, t_grid))
}

/// Exact law of the Ginibre-radii count on `[0, b]`: a sum of independent
/// Bernoulli variables with success probabilities `P(Poisson(b) ≥ k)`.
pub fn ginibre_count_pmf(b: f64) -> Result<DiscreteDist> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("b", "must be positive"));
    }
    let m = ginibre_depth(b);
    let mut pmf = alloc::vec![1.0];
    for k in 1..=m {
        let p = poisson_tail(k, b);
        let mut next = alloc::vec![0.0; pmf.len() + 1];
        for (j, &q) in pmf.iter().enumerate() {
            next[j] += q * (1.0 - p);
            next[j + 1] += q * p;
        }
        pmf = next;
    }
    DiscreteDist::scaled_lattice(&pmf, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GinibreOracle {
    /// Ginibre count `≤cx` Poisson(b).
    pub forward: CxOracle,
    /// Poisson(b) `≤cx` Ginibre count, expected to fail.
    pub reversed: CxOracle,
    pub pass: bool,
}

pub fn oracle_ginibre_radii(b: f64, t_grid: Option<&[f64]>) -> Result<GinibreOracle> {
    let x = ginibre_count_pmf(b)?;
    let y = poisson_law(b)?;
    let forward = cx_compare_exact(&x, &y, t_grid);
    let reversed = cx_compare_exact(&y, &x, t_grid);
    let pass = forward.pass && (forward.mean_x - b).abs() <= ORACLE_TOL && (forward.mean_y - b).abs() <= ORACLE_TOL;
    Ok(GinibreOracle {
        forward,
        reversed,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsingOracle {
    /// `(E f(λ(s_1), …, λ(s_k)), f(λ̄, …, λ̄))` per suite member.
    pub values: Vec<(f64, f64)>,
    /// Smallest `E f(λ) - f(λ̄)` over the suite.
    pub worst_gap: f64,
    /// Number of (shift region, spin configuration) states enumerated.
    pub states: usize,
    pub pass: bool,
}

/// Exact comparison of the constant field `λ̄` with the randomly shifted
/// Ising field at the given sites: for every suite member,
/// `f(λ̄, …, λ̄) ≤ E f(λ(s_1), …, λ(s_k))` within `1e-9`. The shift is
/// integrated exactly over the regions on which the site-to-cell map is
/// constant, and spins are enumerated over the cells actually hit.
pub fn oracle_ising_exact(field: &IsingField, sites: &[Vec<f64>], suite: &[TestFunction]) -> Result<IsingOracle> {
    let k = sites.len();
    if k == 0 || k > 12 {
        return Err(invalid("sites", "exact enumeration supports 1 to 12 sites"));
    }
    if suite.is_empty() {
        return Err(Error::Empty("test-function suite"));
    }
    let d = sites[0].len();
    if d == 0 || sites.iter().any(|s| s.len() != d) {
        return Err(invalid("sites", "all sites need the same positive dimension"));
    }
    if let Some(f) = suite.iter().find(|f| f.dim() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: f.dim(),
        });
    }
    let sp = field.spacing;
    // per axis, the shift intervals (midpoint, length) in units of cells
    let mut axes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(d);
    for a in 0..d {
        let mut cuts: Vec<f64> = sites
            .iter()
            .map(|s| {
                let t = s[a] / sp;
                t - libm::floor(t)
            })
            .collect();
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        axes.push(cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0])).collect());
    }
    let mut sums = alloc::vec![0.0; suite.len()];
    let mut states = 0usize;
    let mut odo = alloc::vec![0usize; d];
    let mut lam = alloc::vec![0.0; k];
    let (mu1, mu2, p) = (field.mu1, field.mu2, field.p_plus);
    'regions: loop {
        let mut region_prob = 1.0;
        for a in 0..d {
            region_prob *= axes[a][odo[a]].1;
        }
        // label sites by the lattice cell containing them
        let cells: Vec<Vec<i64>> = sites
            .iter()
            .map(|s| (0..d).map(|a| libm::floor(s[a] / sp - axes[a][odo[a]].0) as i64).collect())
            .collect();
        let mut distinct: Vec<&Vec<i64>> = Vec::new();
        let label: Vec<usize> = cells
            .iter()
            .map(|c| match distinct.iter().position(|e| *e == c) {
                Some(i) => i,
                None => {
                    distinct.push(c);
                    distinct.len() - 1
                }
            })
            .collect();
        let m = distinct.len();
        for config in 0u32..(1u32 << m) {
            let plus = config.count_ones() as i32;
            let prob = region_prob * libm::pow(p, plus as f64) * libm::pow(1.0 - p, (m as i32 - plus) as f64);
            if prob == 0.0 {
                continue;
            }
            for (l, &c) in lam.iter_mut().zip(&label) {
                *l = if config >> c & 1 == 1 { mu1 } else { mu2 };
            }
            for (s, f) in sums.iter_mut().zip(suite) {
                *s += prob * f.eval(&lam);
            }
            states += 1;
        }
        for a in 0..d {
            odo[a] += 1;
            if odo[a] < axes[a].len() {
                continue 'regions;
            }
            odo[a] = 0;
        }
        break;
    }
    let mean = alloc::vec![field.mean(); k];
    let values: Vec<(f64, f64)> = sums.iter().zip(suite).map(|(&e, f)| (e, f.eval(&mean))).collect();
    let worst_gap = values.iter().map(|(e, c)| e - c).fold(f64::INFINITY, f64::min);
    Ok(IsingOracle {
        values,
        worst_gap,
        states,
        pass: worst_gap >= -ORACLE_TOL,
    })
}
