//! Scenario registry. Each scenario reads its parameters up front (so bad
//! configs fail before anything runs) and returns a job that does the work.

mod compare;
mod oracles;
mod second_order;
mod wireless;

use dcx_core::geometry::Cuboid;
use dcx_core::ordertest::{
    compare_on_boxes, make_suite, pilot_scale, sample_box_masses, CompareOptions, MeanEquality, OrderClass,
    OrderReport, TestFunction, Verdict,
};
use dcx_core::processes::MeasureSampler;
use dcx_core::{RngStream, Window};
use serde::Serialize;
use serde_json::Value;

use crate::config::Params;
use crate::parallel::Parallel;
use crate::table::Table;
use crate::SimError;

pub struct Ctx<'a> {
    pub root: RngStream,
    pub exec: &'a Parallel,
}

pub type Job = Box<dyn FnOnce(&Ctx) -> dcx_core::Result<Outcome>>;

pub struct Scenario {
    pub id: &'static str,
    pub description: &'static str,
    pub prepare: fn(&mut Params) -> Result<Job, SimError>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FunctionRow {
    pub id: String,
    pub family: String,
    pub mean_x: f64,
    pub mean_y: f64,
    pub diff: f64,
    pub stderr: f64,
    pub z: f64,
}

/// What a scenario hands back to the runner.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: String,
    pub per_function: Vec<FunctionRow>,
    pub mean_equality: Value,
    /// Scenario-specific numbers.
    pub details: Value,
    pub table: Table,
}

pub const PASS: &str = "pass";
pub const FAIL: &str = "fail";
pub const EXPLORATORY: &str = "EXPLORATORY";

pub fn is_failure(verdict: &str) -> bool {
    verdict == Verdict::Violation.name() || verdict == FAIL
}

pub static SCENARIOS: &[Scenario] = &[
    Scenario {
        id: "oracle-poisson-scaling",
        description: "exact stop-loss check of Poisson(c a) <=cx c Poisson(a)",
        prepare: oracles::poisson_scaling,
    },
    Scenario {
        id: "ginibre-oracle",
        description: "exact stop-loss check of the Ginibre-radii count on [0, b] against Poisson(b)",
        prepare: oracles::ginibre,
    },
    Scenario {
        id: "ising-exact",
        description: "exact enumeration: constant field below the shifted Ising field at k sites",
        prepare: oracles::ising_exact,
    },
    Scenario {
        id: "ising-vs-poisson",
        description: "Poisson vs Ising-Poisson cluster Cox process on disjoint boxes",
        prepare: compare::ising_vs_poisson,
    },
    Scenario {
        id: "ppcluster-family",
        description: "Poisson-Poisson cluster intensity fields grow in dcx order as c decreases",
        prepare: compare::ppcluster_family,
    },
    Scenario {
        id: "sinr-compare",
        description: "joint SINR success probability with Poisson vs Thomas interferers",
        prepare: wireless::sinr_compare,
    },
    Scenario {
        id: "coverage-compare",
        description: "Boolean-model coverage and coverage-number moments, Poisson vs Thomas germs",
        prepare: wireless::coverage_compare,
    },
    Scenario {
        id: "palm-poisson-check",
        description: "mixed Palm mean of a Poisson count equals lambda |A| + 1",
        prepare: second_order::palm_poisson,
    },
    Scenario {
        id: "lo-extremal",
        description: "extremal shot-noise fields of Poisson and Thomas in lower-orthant order",
        prepare: compare::lo_extremal,
    },
    Scenario {
        id: "levy-grid",
        description: "lattice Levy basis with Exp(1) masses vs sums of two Exp(1/2) masses",
        prepare: compare::levy_grid,
    },
    Scenario {
        id: "marked-basis",
        description: "Poisson points carrying the mean mark vs their own i.i.d. marks",
        prepare: compare::marked_basis,
    },
    Scenario {
        id: "ops-preservation",
        description: "thinning, displacement and superposition keep the Ising-vs-Poisson order",
        prepare: compare::ops_preservation,
    },
    Scenario {
        id: "ripley-poisson",
        description: "Ripley K of homogeneous Poisson against pi r^2",
        prepare: second_order::ripley_poisson,
    },
    Scenario {
        id: "ripley-thomas",
        description: "Ripley K of a Thomas process above the Poisson value",
        prepare: second_order::ripley_thomas,
    },
    Scenario {
        id: "pair-correlation",
        description: "pair correlation estimate against its closed form",
        prepare: second_order::pair_correlation,
    },
    Scenario {
        id: "rgg-degree",
        description: "typical degree of the random geometric graph against lambda K(r)",
        prepare: second_order::rgg_degree,
    },
    Scenario {
        id: "lgcp-compare",
        description: "Poisson vs log-Gaussian Cox process on disjoint boxes",
        prepare: compare::lgcp_compare,
    },
    Scenario {
        id: "ginibre-explore",
        description: "Ginibre radii vs Poisson counts on sub-intervals, no asserted direction",
        prepare: compare::ginibre_explore,
    },
];

pub fn find(id: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.id == id)
}

/// Ordering claims at a fixed z level, shared by the Monte-Carlo scenarios.
pub(crate) struct OrderParams {
    pub class: OrderClass,
    pub suite_size: usize,
    pub z_crit: f64,
    pub n_reps: usize,
    pub pilot_reps: usize,
}

impl OrderParams {
    pub fn read(p: &mut Params, n_reps: usize, suite_size: usize) -> Result<Self, SimError> {
        Ok(Self {
            class: p.class(OrderClass::Dcx)?,
            suite_size: p.count("suite_size", suite_size)?,
            z_crit: p.positive("z_crit", 3.0)?,
            n_reps: p.n_reps(n_reps)?,
            pilot_reps: p.count("pilot_reps", 1000)?,
        })
    }

    pub fn options(&self) -> CompareOptions {
        CompareOptions {
            n_reps: self.n_reps,
            z_crit: self.z_crit,
            mean_gate: self.z_crit,
        }
    }
}

/// `per_axis[a]` equal slabs along each axis of the window.
pub(crate) fn box_grid(w: &Window, per_axis: &[usize]) -> dcx_core::Result<Vec<Cuboid>> {
    let d = w.dim();
    let total: usize = per_axis.iter().product();
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut lows = Vec::with_capacity(d);
        let mut highs = Vec::with_capacity(d);
        for (axis, &n) in per_axis.iter().enumerate() {
            let k = rem % n;
            rem /= n;
            let step = w.width(axis) / n as f64;
            lows.push(w.lows()[axis] + k as f64 * step);
            highs.push(if k + 1 == n {
                w.highs()[axis]
            } else {
                w.lows()[axis] + (k + 1) as f64 * step
            });
        }
        out.push(Cuboid::new(w, &lows, &highs)?);
    }
    Ok(out)
}

/// Suite scaled from a pilot on `root.child(2)`, drawn from `root.child(3)`.
pub(crate) fn box_suite<SX: MeasureSampler, SY: MeasureSampler>(
    x: &SX,
    y: &SY,
    boxes: &[Cuboid],
    op: &OrderParams,
    ctx: &Ctx,
) -> dcx_core::Result<Vec<TestFunction>> {
    let pilot = ctx.root.child(2);
    let px = sample_box_masses(x, boxes, op.pilot_reps, &pilot.child(0), ctx.exec)?;
    let py = sample_box_masses(y, boxes, op.pilot_reps, &pilot.child(1), ctx.exec)?;
    make_suite(op.class, op.suite_size, &pilot_scale(&px, &py), &mut ctx.root.child(3))
}

/// Pilot, suite and comparison `X ≤ Y` on boxes in one go.
pub(crate) fn boxes_report<SX: MeasureSampler, SY: MeasureSampler>(
    x: &SX,
    y: &SY,
    boxes: &[Cuboid],
    op: &OrderParams,
    ctx: &Ctx,
) -> dcx_core::Result<(OrderReport, Vec<TestFunction>)> {
    let suite = box_suite(x, y, boxes, op, ctx)?;
    let r = compare_on_boxes(x, y, boxes, op.class, &suite, &op.options(), &ctx.root, ctx.exec)?;
    Ok((r, suite))
}

pub(crate) fn function_rows(r: &OrderReport, prefix: Option<&str>) -> Vec<FunctionRow> {
    r.functions
        .iter()
        .map(|f| FunctionRow {
            id: match prefix {
                Some(p) => format!("{p}/{}", f.id),
                None => f.id.clone(),
            },
            family: f.family.to_string(),
            mean_x: f.mean_x,
            mean_y: f.mean_y,
            diff: f.diff,
            stderr: f.stderr,
            z: f.z,
        })
        .collect()
}

pub(crate) fn function_table(rows: &[FunctionRow]) -> Table {
    let mut t = Table::new(&["id", "family", "mean_x", "mean_y", "diff", "stderr", "z"]);
    for r in rows {
        t.push(vec![
            r.id.clone().into(),
            r.family.clone().into(),
            r.mean_x.into(),
            r.mean_y.into(),
            r.diff.into(),
            r.stderr.into(),
            r.z.into(),
        ]);
    }
    t
}

pub(crate) fn mean_equality_value(m: &Option<MeanEquality>) -> Value {
    let Some(m) = m else { return Value::Null };
    let coords: Vec<Value> = m
        .coordinates
        .iter()
        .map(|c| {
            serde_json::json!({
                "mean_x": c.mean_x,
                "mean_y": c.mean_y,
                "stderr": c.stderr,
                "z": c.z,
                "exact_x": c.exact.map(|e| e.0),
                "exact_y": c.exact.map(|e| e.1),
            })
        })
        .collect();
    serde_json::json!({"threshold": m.threshold, "passed": m.passed, "coordinates": coords})
}

/// Summary numbers of one order comparison.
pub(crate) fn order_details(r: &OrderReport) -> Value {
    serde_json::json!({
        "verdict": r.verdict.name(),
        "class": r.class.name(),
        "n_reps": r.n_reps,
        "z_threshold": r.z_threshold,
        "min_z": r.min_z(),
        "count_z_above_3": r.count_above(3.0),
        "mean_gate_passed": r.mean_equality.as_ref().map(|m| m.passed),
    })
}

/// Most severe of several verdicts.
pub(crate) fn worst(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    verdicts.into_iter().fold(Verdict::Consistent, |acc, v| match (acc, v) {
        (Verdict::Violation, _) | (_, Verdict::Violation) => Verdict::Violation,
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
        _ => Verdict::Consistent,
    })
}

/// Outcome of a single box or field comparison.
pub(crate) fn single_order_outcome(r: &OrderReport, extra: Value) -> Outcome {
    let rows = function_rows(r, None);
    let mut details = order_details(r);
    if let (Value::Object(d), Value::Object(e)) = (&mut details, extra) {
        d.extend(e);
    }
    Outcome {
        verdict: r.verdict.name().to_string(),
        table: function_table(&rows),
        per_function: rows,
        mean_equality: mean_equality_value(&r.mean_equality),
        details,
    }
}

/// Two-dimensional default windows.
pub(crate) fn unit_torus() -> Window {
    Window::unit_torus(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique() {
        let mut ids: Vec<&str> = SCENARIOS.iter().map(|s| s.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), SCENARIOS.len());
    }

    #[test]
    fn box_grid_partitions_window() {
        let w = Window::cube(2, 2.0, dcx_core::Topology::Torus);
        let boxes = box_grid(&w, &[2, 2]).unwrap();
        assert_eq!(boxes.len(), 4);
        dcx_core::geometry::check_disjoint(&boxes).unwrap();
        let v: f64 = boxes.iter().map(Cuboid::volume).sum();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn worst_verdict() {
        use Verdict::*;
        assert_eq!(worst([Consistent, Inconclusive]), Inconclusive);
        assert_eq!(worst([Inconclusive, Violation, Consistent]), Violation);
        assert_eq!(worst([]), Consistent);
    }
}
