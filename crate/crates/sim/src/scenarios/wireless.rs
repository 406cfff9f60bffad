use std::f64::consts::PI;

use dcx_core::dist::MassDistribution;
use dcx_core::kernel::ResponseKernel;
use dcx_core::ordertest::Verdict;
use dcx_core::processes::{Gnscp, Poisson};
use dcx_core::stats::{joint_pgf, Estimate};
use dcx_core::wireless::{boolean_coverage, sinr_success, sinr_success_rayleigh, Fading, LinkLayout};
use dcx_core::{Topology, Window};
use serde_json::{json, Value};

use super::{unit_torus, Ctx, Job, Outcome};
use crate::config::Params;
use crate::table::Table;
use crate::SimError;

fn config(what: impl std::fmt::Display) -> SimError {
    SimError::Config(what.to_string())
}

/// `(a - b) / sqrt(se_a² + se_b²)`.
fn pooled_z(a: &Estimate, b: &Estimate) -> f64 {
    let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    let d = a.value - b.value;
    if se == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    } else {
        d / se
    }
}

fn verdict_name(v: Verdict) -> String {
    v.name().to_string()
}

/// Links side by side along the first axis, centred in the window, each
/// receiver `distance` away from its emitter.
fn link_positions(w: &Window, n: usize, distance: f64, spacing: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let c = w.center();
    let mut tx = Vec::with_capacity(n);
    let mut rx = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = c.clone();
        e[0] += (i as f64 - 0.5 * (n as f64 - 1.0)) * spacing;
        let mut r = e.clone();
        r[1] += distance;
        w.wrap(&mut e);
        w.wrap(&mut r);
        tx.push(e);
        rx.push(r);
    }
    (tx, rx)
}

pub(super) fn sinr_compare(p: &mut Params) -> Result<Job, SimError> {
    let window = p.window(Window::cube(2, 10.0, Topology::Torus))?;
    let lambda = p.positive("lambda", 0.1)?;
    let kappa = p.positive("parent_intensity", 0.02)?;
    let sigma = p.positive("sigma", 0.5)?;
    let n_links = p.count("n_links", 2)?;
    let threshold = p.positive("threshold", 1.0)?;
    let noise = p.mark("noise", MassDistribution::Constant(0.0))?;
    let power = p.positive("power", 1.0)?;
    let beta = p.positive("beta", 4.0)?;
    let fading_mean = p.positive("fading_mean", 1.0)?;
    let distance = p.positive("link_distance", 1.0)?;
    let spacing = p.positive("link_spacing", 2.0)?;
    let n_reps = p.n_reps(20_000)?;
    let z_crit = p.positive("z_crit", 3.0)?;
    let (emitters, receivers) = link_positions(&window, n_links, distance, spacing);
    let layout = LinkLayout {
        window: window.clone(),
        emitters,
        receivers,
        threshold,
        noise,
        path_loss: ResponseKernel::power_law(beta, power),
        fading: Fading::Rayleigh { mean: fading_mean },
    };
    layout.validate().map_err(config)?;
    Gnscp::thomas(kappa, lambda / kappa, sigma, window.clone()).map_err(config)?;
    Ok(Box::new(move |ctx: &Ctx| {
        let poisson = Poisson::new(lambda, window.clone())?;
        let thomas = Gnscp::thomas(kappa, lambda / kappa, sigma, window.clone())?;
        let p_root = ctx.root.child(0);
        let t_root = ctx.root.child(1);
        let p_rb = sinr_success_rayleigh(&layout, &poisson, n_reps, &p_root, ctx.exec)?;
        let p_crude = sinr_success(&layout, &poisson, n_reps, &p_root, ctx.exec)?;
        let t_rb = sinr_success_rayleigh(&layout, &thomas, n_reps, &t_root, ctx.exec)?;
        let t_crude = sinr_success(&layout, &thomas, n_reps, &t_root, ctx.exec)?;
        let z_order = pooled_z(&t_rb, &p_rb);
        let z_agree_p = pooled_z(&p_rb, &p_crude);
        let z_agree_t = pooled_z(&t_rb, &t_crude);
        let agree = z_agree_p.abs() <= z_crit && z_agree_t.abs() <= z_crit;
        let verdict = if z_order < -z_crit || !agree {
            Verdict::Violation
        } else {
            Verdict::Consistent
        };
        let mut t = Table::new(&["process", "estimator", "p", "stderr"]);
        for (proc_, est_, e) in [
            ("poisson", "rayleigh", &p_rb),
            ("poisson", "crude", &p_crude),
            ("thomas", "rayleigh", &t_rb),
            ("thomas", "crude", &t_crude),
        ] {
            t.push(vec![proc_.into(), est_.into(), e.value.into(), e.stderr.into()]);
        }
        Ok(Outcome {
            verdict: verdict_name(verdict),
            per_function: Vec::new(),
            mean_equality: Value::Null,
            details: json!({
                "z_thomas_minus_poisson": z_order,
                "separated": z_order > z_crit,
                "z_estimator_agreement_poisson": z_agree_p,
                "z_estimator_agreement_thomas": z_agree_t,
                "estimators_agree": agree,
                "emitters": layout.emitters,
                "receivers": layout.receivers,
            }),
            table: t,
        })
    }))
}

pub(super) fn coverage_compare(p: &mut Params) -> Result<Job, SimError> {
    let window = p.window(unit_torus())?;
    let lambda = p.positive("lambda", 50.0)?;
    let kappa = p.positive("parent_intensity", 5.0)?;
    let sigma = p.positive("sigma", 0.03)?;
    let radius = p.mark("r", MassDistribution::Constant(0.05))?;
    let queries = p.points("queries", vec![vec![0.25, 0.25], vec![0.5, 0.5], vec![0.75, 0.25]])?;
    let s = p.probability("pgf_s", 0.5)?;
    let n_reps = p.n_reps(20_000)?;
    let z_crit = p.positive("z_crit", 3.0)?;
    if window.dim() != 2 {
        return Err(config("`window`: coverage-compare is planar"));
    }
    if queries.iter().any(|q| q.len() != 2 || !window.contains(q)) {
        return Err(config("`queries`: points must lie in the window"));
    }
    Gnscp::thomas(kappa, lambda / kappa, sigma, window.clone()).map_err(config)?;
    Ok(Box::new(move |ctx: &Ctx| {
        let poisson = Poisson::new(lambda, window.clone())?;
        let thomas = Gnscp::thomas(kappa, lambda / kappa, sigma, window.clone())?;
        let rp = boolean_coverage(&poisson, &radius, &queries, n_reps, &ctx.root.child(0), ctx.exec)?;
        let rt = boolean_coverage(&thomas, &radius, &queries, n_reps, &ctx.root.child(1), ctx.exec)?;
        let campbell = lambda * PI * radius.second_moment();
        let void = 1.0 - (-campbell).exp();
        let svec = vec![s; queries.len()];
        let pgf_p = joint_pgf(&rp.counts, &svec)?;
        let pgf_t = joint_pgf(&rt.counts, &svec)?;
        let z_pgf = pooled_z(&pgf_t, &pgf_p);

        let mut t = Table::new(&[
            "query",
            "process",
            "coverage",
            "coverage_se",
            "mean",
            "mean_se",
            "second_moment",
            "second_moment_se",
            "campbell_mean",
            "poisson_coverage",
        ]);
        let mut per_query = Vec::new();
        let mut violation = z_pgf < -z_crit;
        let (mut cov_sep, mut m2_sep) = (true, true);
        for (q, (a, b)) in rp.queries.iter().zip(&rt.queries).enumerate() {
            for (name, c) in [("poisson", a), ("thomas", b)] {
                t.push(vec![
                    q.into(),
                    name.into(),
                    c.coverage.value.into(),
                    c.coverage.stderr.into(),
                    c.mean.value.into(),
                    c.mean.stderr.into(),
                    c.second_moment.value.into(),
                    c.second_moment.stderr.into(),
                    campbell.into(),
                    void.into(),
                ]);
            }
            let z_cov = pooled_z(&a.coverage, &b.coverage);
            let z_mean = pooled_z(&b.mean, &a.mean);
            let z_m2 = pooled_z(&b.second_moment, &a.second_moment);
            let z_formula = a.coverage.z_against(void);
            violation |= z_cov < -z_crit || z_mean.abs() > z_crit || z_m2 < -z_crit || z_formula.abs() > z_crit;
            cov_sep &= z_cov > z_crit;
            m2_sep &= z_m2 > z_crit;
            per_query.push(json!({
                "z_coverage_poisson_minus_thomas": z_cov,
                "z_mean_thomas_minus_poisson": z_mean,
                "z_second_moment_thomas_minus_poisson": z_m2,
                "z_poisson_coverage_formula": z_formula,
                "z_campbell_poisson": a.mean.z_against(campbell),
                "z_campbell_thomas": b.mean.z_against(campbell),
            }));
        }
        let verdict = if violation {
            Verdict::Violation
        } else {
            Verdict::Consistent
        };
        Ok(Outcome {
            verdict: verdict_name(verdict),
            per_function: Vec::new(),
            mean_equality: Value::Null,
            details: json!({
                "queries": per_query,
                "coverage_separated": cov_sep,
                "second_moment_separated": m2_sep,
                "pgf_s": s,
                "pgf_poisson": pgf_p.value,
                "pgf_thomas": pgf_t.value,
                "z_pgf_thomas_minus_poisson": z_pgf,
            }),
            table: t,
        })
    }))
}
