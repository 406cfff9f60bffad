//! Monte-Carlo and exact comparisons of random vectors in the integral
//! stochastic orders generated by dcx-type function classes.

mod oracle;
mod suite;

use alloc::string::String;
use alloc::vec::Vec;

pub use oracle::{
    cx_compare_exact, ginibre_count_pmf, oracle_ginibre_radii, oracle_ising_exact, oracle_poisson_scaling, CxOracle,
    DiscreteDist, GinibreOracle, IsingOracle,
};
pub use suite::{make_suite, verify_dcx_numeric, verify_numeric, Family, Kind, NumericCheck, TestFunction};

use crate::error::{invalid, Error, Result};
use crate::exec::Replicator;
use crate::geometry::{check_disjoint, Cuboid};
use crate::processes::MeasureSampler;
use crate::rng::RngStream;
use crate::shotnoise::FieldSampler;
use crate::special::bonferroni_z;
use crate::stats::{z_score, Moments};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderClass {
    Dcx,
    Idcx,
    Idcv,
    Ddcx,
    Cx,
    Icx,
    Icv,
}

impl OrderClass {
    pub const ALL: [OrderClass; 7] = [
        OrderClass::Dcx,
        OrderClass::Idcx,
        OrderClass::Idcv,
        OrderClass::Ddcx,
        OrderClass::Cx,
        OrderClass::Icx,
        OrderClass::Icv,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "dcx" => OrderClass::Dcx,
            "idcx" => OrderClass::Idcx,
            "idcv" => OrderClass::Idcv,
            "ddcx" => OrderClass::Ddcx,
            "cx" => OrderClass::Cx,
            "icx" => OrderClass::Icx,
            "icv" => OrderClass::Icv,
            _ => return Err(invalid("class", alloc::format!("unknown order class `{s}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            OrderClass::Dcx => "dcx",
            OrderClass::Idcx => "idcx",
            OrderClass::Idcv => "idcv",
            OrderClass::Ddcx => "ddcx",
            OrderClass::Cx => "cx",
            OrderClass::Icx => "icx",
            OrderClass::Icv => "icv",
        }
    }

    /// Classes containing both `θ·x` and `-θ·x`, whose order forces equal means.
    pub fn requires_equal_means(self) -> bool {
        matches!(self, OrderClass::Dcx | OrderClass::Cx)
    }

    pub fn is_increasing(self) -> bool {
        matches!(self, OrderClass::Idcx | OrderClass::Idcv | OrderClass::Icx | OrderClass::Icv)
    }

    pub fn is_decreasing(self) -> bool {
        matches!(self, OrderClass::Ddcx)
    }

    pub fn is_concave_type(self) -> bool {
        matches!(self, OrderClass::Idcv | OrderClass::Icv)
    }

    /// Defined by mixed second differences rather than full convexity.
    pub fn is_directional(self) -> bool {
        matches!(self, OrderClass::Dcx | OrderClass::Idcx | OrderClass::Idcv | OrderClass::Ddcx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Violation,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Consistent => "CONSISTENT",
            Verdict::Violation => "VIOLATION",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionRecord {
    pub id: String,
    pub family: &'static str,
    pub mean_x: f64,
    pub mean_y: f64,
    /// `mean_y - mean_x`; non-negative under the claim `X ≤ Y`.
    pub diff: f64,
    pub stderr: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMean {
    pub mean_x: f64,
    pub mean_y: f64,
    pub stderr: f64,
    pub z: f64,
    /// Closed-form means, when both samplers provide them.
    pub exact: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanEquality {
    pub coordinates: Vec<CoordinateMean>,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderReport {
    pub class: OrderClass,
    pub n_reps: usize,
    pub z_crit: f64,
    /// Critical value after Bonferroni correction over the suite.
    pub z_threshold: f64,
    pub functions: Vec<FunctionRecord>,
    pub mean_equality: Option<MeanEquality>,
    pub verdict: Verdict,
}

impl OrderReport {
    /// Number of functions with `z` above `level` in the claimed direction.
    pub fn count_above(&self, level: f64) -> usize {
        self.functions.iter().filter(|f| f.z > level).count()
    }

    pub fn min_z(&self) -> f64 {
        self.functions.iter().map(|f| f.z).fold(f64::INFINITY, f64::min)
    }
}

/// Settings shared by Monte-Carlo comparisons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareOptions {
    pub n_reps: usize,
    pub z_crit: f64,
    /// Per-coordinate mean gate, in standard errors.
    pub mean_gate: f64,
}

impl CompareOptions {
    pub fn new(n_reps: usize) -> Self {
        Self {
            n_reps,
            z_crit: 3.0,
            mean_gate: 3.0,
        }
    }
}

/// Replicated draws of a vector: `values[r * dim + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn reps(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = alloc::vec![0.0; self.dim];
        for row in self.rows() {
            m.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        let n = self.reps().max(1) as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }
}

fn collect<R: Replicator>(
    exec: &R,
    n: usize,
    dim: usize,
    draw: impl Fn(usize) -> Result<Vec<f64>> + Sync + Send,
) -> Result<Samples> {
    let rows = exec.run(n, draw);
    let mut values = Vec::with_capacity(n * dim);
    for r in rows {
        values.extend_from_slice(&r?);
    }
    Ok(Samples { dim, values })
}

/// Masses of the boxes under `n` draws, draw `i` on `root.child(i)`.
pub fn sample_box_masses<S: MeasureSampler, R: Replicator>(
    s: &S,
    boxes: &[Cuboid],
    n: usize,
    root: &RngStream,
    exec: &R,
) -> Result<Samples> {
    collect(exec, n, boxes.len(), |i| {
        let m = s.sample(&mut root.child(i as u64))?;
        Ok(boxes.iter().map(|b| m.mass_in(b)).collect())
    })
}

/// Field values at the queries under `n` draws, draw `i` on `root.child(i)`.
pub fn sample_field_values<F: FieldSampler, R: Replicator>(
    f: &F,
    queries: &[Vec<f64>],
    n: usize,
    root: &RngStream,
    exec: &R,
) -> Result<Samples> {
    collect(exec, n, queries.len(), |i| f.sample_at(queries, &mut root.child(i as u64)))
}

/// Pooled per-coordinate means of both sides, used to scale suites.
pub fn pilot_scale(x: &Samples, y: &Samples) -> Vec<f64> {
    x.column_means().iter().zip(y.column_means()).map(|(a, b)| 0.5 * (a + b)).collect()
}

struct Side {
    mean: f64,
    var: f64,
    n: usize,
}

fn side(values: impl Iterator<Item = f64>) -> Side {
    let mut m = Moments::new();
    values.for_each(|v| m.push(v));
    Side {
        mean: m.mean(),
        var: m.variance(),
        n: m.count() as usize,
    }
}

fn evaluate(f: &TestFunction, x: &Samples, y: &Samples, index: usize) -> FunctionRecord {
    let welch = |sx: &Side, sy: &Side| libm::sqrt(sx.var / sx.n.max(1) as f64 + sy.var / sy.n.max(1) as f64);
    let (sx, sy, scale) = if f.log_arg(&alloc::vec![0.0; f.dim()]).is_some() {
        // exp-type members are averaged relative to the largest exponent seen
        // on either side; z is invariant under the common factor
        let arg = |r: &[f64]| f.log_arg(r).unwrap_or(0.0);
        let shift = x.rows().chain(y.rows()).map(arg).fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let sx = side(x.rows().map(|r| libm::exp(arg(r) - shift)));
        let sy = side(y.rows().map(|r| libm::exp(arg(r) - shift)));
        (sx, sy, libm::exp(shift))
    } else {
        (side(x.rows().map(|r| f.eval(r))), side(y.rows().map(|r| f.eval(r))), 1.0)
    };
    let se = welch(&sx, &sy);
    FunctionRecord {
        id: f.label(index),
        family: f.family().name(),
        mean_x: sx.mean * scale,
        mean_y: sy.mean * scale,
        diff: (sy.mean - sx.mean) * scale,
        stderr: se * scale,
        z: z_score(sy.mean - sx.mean, se),
    }
}

fn mean_gate(x: &Samples, y: &Samples, exact: Option<Vec<(f64, f64)>>, threshold: f64) -> MeanEquality {
    let mut coordinates = Vec::with_capacity(x.dim);
    let mut passed = true;
    for k in 0..x.dim {
        let sx = side(x.rows().map(|r| r[k]));
        let sy = side(y.rows().map(|r| r[k]));
        let se = libm::sqrt(sx.var / sx.n.max(1) as f64 + sy.var / sy.n.max(1) as f64);
        let z = z_score(sy.mean - sx.mean, se);
        let ex = exact.as_ref().map(|e| e[k]);
        if !(z.abs() < threshold) {
            passed = false;
        }
        if let Some((a, b)) = ex {
            if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
                passed = false;
            }
        }
        coordinates.push(CoordinateMean {
            mean_x: sx.mean,
            mean_y: sy.mean,
            stderr: se,
            z,
            exact: ex,
        });
    }
    MeanEquality {
        coordinates,
        threshold,
        passed,
    }
}

/// Compares pre-drawn samples under the claim `X ≤ Y` in `class`.
pub fn compare_samples(
    class: OrderClass,
    x: &Samples,
    y: &Samples,
    suite: &[TestFunction],
    opts: &CompareOptions,
    exact_means: Option<Vec<(f64, f64)>>,
) -> Result<OrderReport> {
    if suite.is_empty() {
        return Err(Error::Empty("test-function suite"));
    }
    if x.dim != y.dim {
        return Err(Error::DimensionMismatch {
            expected: x.dim,
            got: y.dim,
        });
    }
    if let Some(f) = suite.iter().find(|f| f.dim() != x.dim) {
        return Err(Error::DimensionMismatch {
            expected: x.dim,
            got: f.dim(),
        });
    }
    let z_threshold = bonferroni_z(opts.z_crit, suite.len());
    let functions: Vec<FunctionRecord> = suite.iter().enumerate().map(|(i, f)| evaluate(f, x, y, i)).collect();
    let mean_equality = class
        .requires_equal_means()
        .then(|| mean_gate(x, y, exact_means, opts.mean_gate));
    let verdict = if functions.iter().any(|f| f.z < -z_threshold || f.z.is_nan()) {
        Verdict::Violation
    } else if mean_equality.as_ref().is_some_and(|m| !m.passed) {
        Verdict::Inconclusive
    } else {
        Verdict::Consistent
    };
    Ok(OrderReport {
        class,
        n_reps: x.reps().min(y.reps()),
        z_crit: opts.z_crit,
        z_threshold,
        functions,
        mean_equality,
        verdict,
    })
}

/// Tests `Λ_X ≤ Λ_Y` on the mass vectors of disjoint boxes. X draws from
/// `root.child(0)`, Y from `root.child(1)`.
#[allow(clippy::too_many_arguments)]
pub fn compare_on_boxes<SX, SY, R>(
    x: &SX,
    y: &SY,
    boxes: &[Cuboid],
    class: OrderClass,
    suite: &[TestFunction],
    opts: &CompareOptions,
    root: &RngStream,
    exec: &R,
) -> Result<OrderReport>
where
    SX: MeasureSampler,
    SY: MeasureSampler,
    R: Replicator,
{
    if x.window() != y.window() {
        return Err(Error::WindowMismatch);
    }
    check_disjoint(boxes)?;
    if suite.is_empty() {
        return Err(Error::Empty("test-function suite"));
    }
    let sx = sample_box_masses(x, boxes, opts.n_reps, &root.child(0), exec)?;
    let sy = sample_box_masses(y, boxes, opts.n_reps, &root.child(1), exec)?;
    let exact: Option<Vec<(f64, f64)>> = boxes.iter().map(|b| Some((x.mean_mass(b)?, y.mean_mass(b)?))).collect();
    compare_samples(class, &sx, &sy, suite, opts, exact)
}

/// Tests `V_X ≤ V_Y` on field values at the queries. X draws from
/// `root.child(0)`, Y from `root.child(1)`.
#[allow(clippy::too_many_arguments)]
pub fn compare_fields<FX, FY, R>(
    x: &FX,
    y: &FY,
    queries: &[Vec<f64>],
    class: OrderClass,
    suite: &[TestFunction],
    opts: &CompareOptions,
    root: &RngStream,
    exec: &R,
) -> Result<OrderReport>
where
    FX: FieldSampler,
    FY: FieldSampler,
    R: Replicator,
{
    if suite.is_empty() {
        return Err(Error::Empty("test-function suite"));
    }
    let sx = sample_field_values(x, queries, opts.n_reps, &root.child(0), exec)?;
    let sy = sample_field_values(y, queries, opts.n_reps, &root.child(1), exec)?;
    compare_samples(class, &sx, &sy, suite, opts, None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoRecord {
    pub threshold: Vec<f64>,
    pub cdf_1: f64,
    pub cdf_2: f64,
    pub stderr: f64,
    /// `(cdf_1 - cdf_2) / stderr`; non-negative under the claim.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoReport {
    pub n_reps: usize,
    pub z_crit: f64,
    pub records: Vec<LoRecord>,
    pub verdict: Verdict,
}

impl LoReport {
    pub fn min_z(&self) -> f64 {
        self.records.iter().map(|r| r.z).fold(f64::INFINITY, f64::min)
    }
}

/// Empirical joint CDFs `P(U ≤ t)` of two samples at every threshold vector.
pub fn lo_compare_samples(u1: &Samples, u2: &Samples, thresholds: &[Vec<f64>], z_crit: f64) -> Result<LoReport> {
    if thresholds.iter().any(|t| t.len() != u1.dim || t.iter().any(|v| !v.is_finite())) {
        return Err(invalid("thresholds", "must be finite vectors of the query dimension"));
    }
    let cdf = |s: &Samples, t: &[f64]| {
        let hits = s.rows().filter(|r| r.iter().zip(t).all(|(a, b)| a <= b)).count();
        hits as f64 / s.reps().max(1) as f64
    };
    let (n1, n2) = (u1.reps().max(1) as f64, u2.reps().max(1) as f64);
    let records: Vec<LoRecord> = thresholds
        .iter()
        .map(|t| {
            let (p1, p2) = (cdf(u1, t), cdf(u2, t));
            let se = libm::sqrt(p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2);
            LoRecord {
                threshold: t.clone(),
                cdf_1: p1,
                cdf_2: p2,
                stderr: se,
                z: z_score(p1 - p2, se),
            }
        })
        .collect();
    let verdict = if records.iter().any(|r| r.z < -z_crit) {
        Verdict::Violation
    } else {
        Verdict::Consistent
    };
    Ok(LoReport {
        n_reps: u1.reps().min(u2.reps()),
        z_crit,
        records,
        verdict,
    })
}

/// Tests `U_1 ≥ U_2` in the lower orthant order, i.e. `P(U_1 ≤ t) ≥ P(U_2 ≤ t)`
/// at each threshold vector. Violation when the first CDF is below the
/// second by more than `z_crit` standard errors anywhere.
#[allow(clippy::too_many_arguments)]
pub fn lo_compare<F1, F2, R>(
    u1: &F1,
    u2: &F2,
    queries: &[Vec<f64>],
    thresholds: &[Vec<f64>],
    n_reps: usize,
    z_crit: f64,
    root: &RngStream,
    exec: &R,
) -> Result<LoReport>
where
    F1: FieldSampler,
    F2: FieldSampler,
    R: Replicator,
{
    let s1 = sample_field_values(u1, queries, n_reps, &root.child(0), exec)?;
    let s2 = sample_field_values(u2, queries, n_reps, &root.child(1), exec)?;
    lo_compare_samples(&s1, &s2, thresholds, z_crit)
}

/// Cartesian product of per-coordinate levels, last coordinate fastest.
pub fn product_grid(levels: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = alloc::vec![Vec::new()];
    for axis in levels {
        out = out
            .iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests;
