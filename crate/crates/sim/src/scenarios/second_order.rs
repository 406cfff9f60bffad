use std::f64::consts::PI;

use dcx_core::geometry::Cuboid;
use dcx_core::ordertest::Verdict;
use dcx_core::processes::{Gnscp, MeasureSampler, Poisson};
use dcx_core::stats::{mixed_palm_estimate, pair_correlation as pcf, rgg_typical_degree, ripley_k, Estimate};
use dcx_core::{Measure, PointPattern, Replicator, Topology, Window};
use serde_json::{json, Value};

use super::{unit_torus, Ctx, Job, Outcome};
use crate::config::Params;
use crate::table::Table;
use crate::SimError;

fn config(what: impl std::fmt::Display) -> SimError {
    SimError::Config(what.to_string())
}

fn realizations<S: MeasureSampler>(s: &S, n: usize, ctx: &Ctx) -> dcx_core::Result<Vec<PointPattern>> {
    ctx.exec
        .run(n, |i| s.sample_points(&mut ctx.root.child(i as u64)))
        .into_iter()
        .collect()
}

/// Planar Thomas process closed forms (parent intensity `kappa`).
fn thomas_k(r: f64, kappa: f64, sigma: f64) -> f64 {
    PI * r * r + (1.0 - (-r * r / (4.0 * sigma * sigma)).exp()) / kappa
}

fn outcome(verdict: Verdict, details: Value, table: Table) -> Outcome {
    Outcome {
        verdict: verdict.name().to_string(),
        per_function: Vec::new(),
        mean_equality: Value::Null,
        details,
        table,
    }
}

/// Either a Poisson or a Thomas process of intensity `lambda`.
enum Process {
    Poisson,
    Thomas { kappa: f64, sigma: f64 },
}

impl Process {
    fn read(p: &mut Params, default: &str, lambda: f64) -> Result<Self, SimError> {
        let name = p.string("process", default, &["poisson", "thomas"])?;
        if name == "poisson" {
            return Ok(Process::Poisson);
        }
        let kappa = p.positive("parent_intensity", 10.0)?;
        let sigma = p.positive("sigma", 0.02)?;
        if !(lambda / kappa).is_finite() {
            return Err(config("`parent_intensity`: mean offspring must be finite"));
        }
        Ok(Process::Thomas { kappa, sigma })
    }

    fn draw(&self, lambda: f64, w: &Window, n: usize, ctx: &Ctx) -> dcx_core::Result<Vec<PointPattern>> {
        match *self {
            Process::Poisson => realizations(&Poisson::new(lambda, w.clone())?, n, ctx),
            Process::Thomas { kappa, sigma } => {
                realizations(&Gnscp::thomas(kappa, lambda / kappa, sigma, w.clone())?, n, ctx)
            }
        }
    }

    fn k(&self, r: f64) -> f64 {
        match *self {
            Process::Poisson => PI * r * r,
            Process::Thomas { kappa, sigma } => thomas_k(r, kappa, sigma),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Process::Poisson => "poisson",
            Process::Thomas { .. } => "thomas",
        }
    }
}

fn torus_window(p: &mut Params) -> Result<Window, SimError> {
    let w = p.window(unit_torus())?;
    if !w.is_torus() || w.dim() != 2 {
        return Err(config("`window`: second-order scenarios need a planar torus"));
    }
    Ok(w)
}

fn r_grid(p: &mut Params, w: &Window) -> Result<Vec<f64>, SimError> {
    let g = p.list("r_grid", &[0.02, 0.05, 0.1, 0.15])?;
    if g.iter().any(|&r| !(r > 0.0 && r <= 0.5 * w.min_width())) {
        return Err(config("`r_grid`: radii must be positive and at most half the window width"));
    }
    Ok(g)
}

pub(super) fn palm_poisson(p: &mut Params) -> Result<Job, SimError> {
    let window = p.window(Window::cube(2, 1.0, Topology::Plain))?;
    let lambda = p.positive("lambda", 5.0)?;
    let n_reps = p.n_reps(20_000)?;
    let z_crit = p.positive("z_crit", 3.0)?;
    let a = Cuboid::whole(&window);
    Ok(Box::new(move |ctx: &Ctx| {
        let s = Poisson::new(lambda, window.clone())?;
        let area = a.volume();
        let inside = a.clone();
        let f = move |x: &[f64]| if inside.contains(x) { 1.0 } else { 0.0 };
        let g = |m: &Measure| m.mass_in(&a);
        let e = mixed_palm_estimate(&s, f, g, n_reps, &ctx.root, ctx.exec)?;
        let expected = lambda * area + 1.0;
        let z = e.z_against(expected);
        let mut t = Table::new(&["estimate", "stderr", "expected", "z"]);
        t.push(vec![e.value.into(), e.stderr.into(), expected.into(), z.into()]);
        let v = if z.abs() > z_crit {
            Verdict::Violation
        } else {
            Verdict::Consistent
        };
        Ok(outcome(v, json!({"z": z, "area": area}), t))
    }))
}

fn k_rows(est: &[Estimate], grid: &[f64], reference: impl Fn(f64) -> f64) -> (Vec<f64>, Table) {
    let mut t = Table::new(&["r", "K_hat", "stderr", "pi_r2"]);
    let z = est
        .iter()
        .zip(grid)
        .map(|(e, &r)| {
            t.push(vec![r.into(), e.value.into(), e.stderr.into(), (PI * r * r).into()]);
            e.z_against(reference(r))
        })
        .collect();
    (z, t)
}

pub(super) fn ripley_poisson(p: &mut Params) -> Result<Job, SimError> {
    let window = torus_window(p)?;
    let lambda = p.positive("lambda", 50.0)?;
    let grid = r_grid(p, &window)?;
    let n_reps = p.n_reps(1000)?;
    let z_crit = p.positive("z_crit", 3.0)?;
    Ok(Box::new(move |ctx: &Ctx| {
        let reps = Process::Poisson.draw(lambda, &window, n_reps, ctx)?;
        let est = ripley_k(&reps, &grid, lambda)?;
        let (z, t) = k_rows(&est, &grid, |r| PI * r * r);
        let v = if z.iter().any(|z| z.abs() > z_crit) {
            Verdict::Violation
        } else {
            Verdict::Consistent
        };
        Ok(outcome(v, json!({"z": z}), t))
    }))
}

pub(super) fn ripley_thomas(p: &mut Params) -> Result<Job, SimError> {
    let window = torus_window(p)?;
    let lambda = p.positive("lambda", 50.0)?;
    let process = Process::read(p, "thomas", lambda)?;
    let grid = r_grid(p, &window)?;
    let n_reps = p.n_reps(1000)?;
    let z_crit = p.positive("z_crit", 3.0)?;
    Ok(Box::new(move |ctx: &Ctx| {
        let reps = process.draw(lambda, &window, n_reps, ctx)?;
        let est = ripley_k(&reps, &grid, lambda)?;
        let mut t = Table::new(&["r", "K_hat", "stderr", "pi_r2", "excess", "z_excess", "k_closed_form"]);
        let mut z_excess = Vec::new();
        let mut z_closed = Vec::new();
        for (e, &r) in est.iter().zip(&grid) {
            let base = PI * r * r;
            let z = e.z_against(base);
            z_excess.push(z);
            z_closed.push(e.z_against(process.k(r)));
            t.push(vec![
                r.into(),
                e.value.into(),
                e.stderr.into(),
                base.into(),
                (e.value - base).into(),
                z.into(),
                process.k(r).into(),
            ]);
        }
        let separated: Vec<f64> = grid
            .iter()
            .zip(&z_excess)
            .filter(|(_, z)| **z > z_crit)
            .map(|(r, _)| *r)
            .collect();
        let v = if z_excess.iter().any(|z| *z < -z_crit) {
            Verdict::Violation
        } else {
            Verdict::Consistent
        };
        let details = json!({
            "process": process.name(),
            "z_excess": z_excess,
            "z_closed_form": z_closed,
            "separated_at": separated,
        });
        Ok(outcome(v, details, t))
    }))
}

pub(super) fn pair_correlation(p: &mut Params) -> Result<Job, SimError> {
    let window = torus_window(p)?;
    let lambda = p.positive("lambda", 50.0)?;
    let process = Process::read(p, "thomas", lambda)?;
    let grid = r_grid(p, &window)?;
    let bandwidth = p.positive("bandwidth", 0.01)?;
    let n_reps = p.n_reps(5000)?;
    let z_crit = p.positive("z_crit", 3.0)?;
    if bandwidth >= grid.iter().copied().fold(0.0, f64::max) {
        return Err(config("`bandwidth`: must be below the largest radius"));
    }
    Ok(Box::new(move |ctx: &Ctx| {
        let reps = process.draw(lambda, &window, n_reps, ctx)?;
        let est = pcf(&reps, &grid, bandwidth, lambda)?;
        let mut t = Table::new(&["r", "g_hat", "stderr", "reference"]);
        let mut z = Vec::new();
        for (e, &r) in est.iter().zip(&grid) {
            // the estimator averages g over the annulus, so the reference does too
            let lo = (r - bandwidth).max(0.0);
            let hi = r + bandwidth;
            let reference = (process.k(hi) - process.k(lo)) / (PI * (hi * hi - lo * lo));
            z.push(e.z_against(reference));
            t.push(vec![r.into(), e.value.into(), e.stderr.into(), reference.into()]);
        }
        let v = if z.iter().any(|z| z.abs() > z_crit) {
            Verdict::Violation
        } else {
            Verdict::Consistent
        };
        Ok(outcome(v, json!({"process": process.name(), "z": z}), t))
    }))
}

pub(super) fn rgg_degree(p: &mut Params) -> Result<Job, SimError> {
    let window = torus_window(p)?;
    let lambda = p.positive("lambda", 50.0)?;
    let process = Process::read(p, "poisson", lambda)?;
    let radii = p.list("r", &[0.05, 0.1])?;
    let n_reps = p.n_reps(1000)?;
    let z_crit = p.positive("z_crit", 3.0)?;
    if radii.iter().any(|&r| !(r > 0.0 && r <= 0.5 * window.min_width())) {
        return Err(config("`r`: radii must be positive and at most half the window width"));
    }
    Ok(Box::new(move |ctx: &Ctx| {
        let reps = process.draw(lambda, &window, n_reps, ctx)?;
        let a = Cuboid::whole(&window);
        let mut t = Table::new(&["r", "degree", "stderr", "lambda_k", "lambda_pi_r2"]);
        let mut z = Vec::new();
        for &r in &radii {
            let e = rgg_typical_degree(&reps, r, &a, lambda)?;
            let reference = lambda * process.k(r);
            z.push(e.z_against(reference));
            t.push(vec![r.into(), e.value.into(), e.stderr.into(), reference.into(), (lambda * PI * r * r).into()]);
        }
        let v = if z.iter().any(|z| z.abs() > z_crit) {
            Verdict::Violation
        } else {
            Verdict::Consistent
        };
        Ok(outcome(v, json!({"process": process.name(), "z": z}), t))
    }))
}
