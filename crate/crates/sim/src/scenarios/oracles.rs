use dcx_core::ordertest::{make_suite, oracle_ginibre_radii, oracle_ising_exact, oracle_poisson_scaling, OrderClass};
use dcx_core::processes::IsingField;
use serde_json::json;

use super::{Ctx, Job, Outcome, FAIL, PASS};
use crate::config::Params;
use crate::table::Table;
use crate::SimError;

fn pass_fail(ok: bool) -> String {
    if ok { PASS } else { FAIL }.to_string()
}

pub(super) fn poisson_scaling(p: &mut Params) -> Result<Job, SimError> {
    let a_values = p.list("a", &[0.5, 1.0, 2.0])?;
    let c_values = p.list("c", &[1.5, 2.0, 3.0])?;
    Ok(Box::new(move |_ctx: &Ctx| {
        let mut t = Table::new(&["a", "c", "max_violation", "mean_diff", "mean_x", "mean_y", "grid_len", "pass"]);
        let (mut worst_v, mut worst_m, mut all) = (0.0_f64, 0.0_f64, true);
        for &a in &a_values {
            for &c in &c_values {
                let o = oracle_poisson_scaling(a, c, None)?;
                worst_v = worst_v.max(o.max_violation);
                worst_m = worst_m.max(o.mean_diff);
                all &= o.pass;
                t.push(vec![
                    a.into(),
                    c.into(),
                    o.max_violation.into(),
                    o.mean_diff.into(),
                    o.mean_x.into(),
                    o.mean_y.into(),
                    o.grid_len.into(),
                    o.pass.into(),
                ]);
            }
        }
        Ok(Outcome {
            verdict: pass_fail(all),
            per_function: Vec::new(),
            mean_equality: serde_json::Value::Null,
            details: json!({"max_violation": worst_v, "max_mean_diff": worst_m, "cases": t.rows.len()}),
            table: t,
        })
    }))
}

pub(super) fn ginibre(p: &mut Params) -> Result<Job, SimError> {
    let b_values = p.list("b", &[0.5, 1.0, 2.0, 5.0])?;
    Ok(Box::new(move |_ctx: &Ctx| {
        let mut t = Table::new(&[
            "b",
            "max_violation",
            "mean_diff",
            "mean_ginibre",
            "mean_poisson",
            "reversed_violation",
            "pass",
        ]);
        let (mut worst_v, mut worst_m, mut all) = (0.0_f64, 0.0_f64, true);
        for &b in &b_values {
            let o = oracle_ginibre_radii(b, None)?;
            let f = &o.forward;
            worst_v = worst_v.max(f.max_violation);
            worst_m = worst_m.max((f.mean_x - b).abs().max((f.mean_y - b).abs()));
            all &= o.pass;
            t.push(vec![
                b.into(),
                f.max_violation.into(),
                f.mean_diff.into(),
                f.mean_x.into(),
                f.mean_y.into(),
                o.reversed.max_violation.into(),
                o.pass.into(),
            ]);
        }
        Ok(Outcome {
            verdict: pass_fail(all),
            per_function: Vec::new(),
            mean_equality: serde_json::Value::Null,
            details: json!({"max_violation": worst_v, "max_mean_error": worst_m}),
            table: t,
        })
    }))
}

pub(super) fn ising_exact(p: &mut Params) -> Result<Job, SimError> {
    let mu1 = p.list("mu1", &[2.0, 3.0])?;
    let mu2 = p.list("mu2", &[0.0, 1.0])?;
    let p_plus = p.list("p_plus", &[0.5, 0.3])?;
    if mu1.len() != mu2.len() || mu1.len() != p_plus.len() {
        return Err(SimError::Config(
            "`mu1`, `mu2` and `p_plus` must list the same number of cases".into(),
        ));
    }
    let ks: Vec<usize> = p
        .list("k", &[2.0, 4.0, 8.0])?
        .into_iter()
        .map(|k| {
            if k.fract() == 0.0 && (1.0..=12.0).contains(&k) {
                Ok(k as usize)
            } else {
                Err(SimError::Config("`k`: site counts must be integers in 1..=12".into()))
            }
        })
        .collect::<Result<_, _>>()?;
    let class = p.class(OrderClass::Dcx)?;
    let suite_size = p.count("suite_size", 50)?;
    let spread = p.positive("site_spread", 2.0)?;
    let fields = (0..mu1.len())
        .map(|i| IsingField::new(mu1[i], mu2[i], p_plus[i]))
        .collect::<dcx_core::Result<Vec<_>>>()
        .map_err(|e| SimError::Config(format!("ising parameters: {e}")))?;
    Ok(Box::new(move |ctx: &Ctx| {
        let mut t = Table::new(&["mu1", "mu2", "p_plus", "k", "states", "worst_gap", "pass"]);
        let mut all = true;
        let mut worst = f64::INFINITY;
        for f in &fields {
            for &k in &ks {
                let mut rng = ctx.root.child(k as u64);
                let sites: Vec<Vec<f64>> = (0..k)
                    .map(|_| vec![rng.uniform() * spread, rng.uniform() * spread])
                    .collect();
                let suite = make_suite(class, suite_size, &vec![f.mean().max(1e-12); k], &mut rng)?;
                let o = oracle_ising_exact(f, &sites, &suite)?;
                all &= o.pass;
                worst = worst.min(o.worst_gap);
                t.push(vec![
                    f.mu1.into(),
                    f.mu2.into(),
                    f.p_plus.into(),
                    k.into(),
                    o.states.into(),
                    o.worst_gap.into(),
                    o.pass.into(),
                ]);
            }
        }
        Ok(Outcome {
            verdict: pass_fail(all),
            per_function: Vec::new(),
            mean_equality: serde_json::Value::Null,
            details: json!({"worst_gap": worst, "cases": t.rows.len(), "tolerance": 1e-9}),
            table: t,
        })
    }))
}
