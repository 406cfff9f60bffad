use alloc::string::String;
use alloc::vec::Vec;

use super::OrderClass;
use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Family a test function belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Linear,
    LinConvex,
    LinConcave,
    PairProduct,
    PgfUp,
    PgfDown,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::LinConvex => "lin_convex",
            Family::LinConcave => "lin_concave",
            Family::PairProduct => "pair_product",
            Family::PgfUp => "pgf_up",
            Family::PgfDown => "pgf_down",
        }
    }
}

/// Shape of a test function of `u = θ·x`, or of `x` directly.
#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// `sign · θ·x`.
    Linear { sign: f64 },
    /// `exp(θ·x)`.
    Exp,
    /// `((θ·x - t)₊)^p`, `p ≥ 1`.
    StopLoss { t: f64, p: f64 },
    /// `((t - θ·x)₊)^p`, `p ≥ 1`.
    StopLossDown { t: f64, p: f64 },
    /// `log(1 + θ·x)`.
    Log1p,
    /// `√(θ·x)`.
    Sqrt,
    /// `min(θ·x, t)`.
    Min { t: f64 },
    /// `θ_i x_i · θ_j x_j` with `θ_i, θ_j` the scales.
    PairProduct { i: usize, j: usize },
    /// `Π s_j^{x_j}`, `s_j = exp(θ_j) ≥ 1`.
    PgfUp,
    /// `Π s_j^{x_j}`, `s_j = exp(-θ_j) ≤ 1`.
    PgfDown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub kind: Kind,
    pub theta: Vec<f64>,
    pub class: OrderClass,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn powp(u: f64, p: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if p == 1.0 {
        u
    } else if p == 2.0 {
        u * u
    } else {
        libm::pow(u, p)
    }
}

impl TestFunction {
    pub fn new(kind: Kind, theta: Vec<f64>, class: OrderClass) -> Self {
        Self { kind, theta, class }
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Linear { .. } => Family::Linear,
            Kind::Exp | Kind::StopLoss { .. } | Kind::StopLossDown { .. } => Family::LinConvex,
            Kind::Log1p | Kind::Sqrt | Kind::Min { .. } => Family::LinConcave,
            Kind::PairProduct { .. } => Family::PairProduct,
            Kind::PgfUp => Family::PgfUp,
            Kind::PgfDown => Family::PgfDown,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Short identifier, unique within a suite when combined with its index.
    pub fn label(&self, index: usize) -> String {
        let tag = match self.kind {
            Kind::Linear { sign } if sign < 0.0 => "neg_linear",
            Kind::Linear { .. } => "linear",
            Kind::Exp => "exp",
            Kind::StopLoss { .. } => "stop_loss",
            Kind::StopLossDown { .. } => "stop_loss_down",
            Kind::Log1p => "log1p",
            Kind::Sqrt => "sqrt",
            Kind::Min { .. } => "min",
            Kind::PairProduct { .. } => "pair",
            Kind::PgfUp => "pgf_up",
            Kind::PgfDown => "pgf_down",
        };
        alloc::format!("f{index:03}_{tag}")
    }

    /// Exponent of the exponential-type members, for which `eval` equals
    /// `exp(log_arg)`; `None` for the others.
    pub fn log_arg(&self, x: &[f64]) -> Option<f64> {
        match self.kind {
            Kind::Exp | Kind::PgfUp => Some(dot(&self.theta, x)),
            Kind::PgfDown => Some(-dot(&self.theta, x)),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if let Some(a) = self.log_arg(x) {
            return libm::exp(a);
        }
        let u = dot(&self.theta, x);
        match self.kind {
            Kind::Linear { sign } => sign * u,
            Kind::StopLoss { t, p } => powp(u - t, p),
            Kind::StopLossDown { t, p } => powp(t - u, p),
            Kind::Log1p => libm::log1p(u.max(0.0)),
            Kind::Sqrt => libm::sqrt(u.max(0.0)),
            Kind::Min { t } => u.min(t),
            Kind::PairProduct { i, j } => self.theta[i] * x[i] * self.theta[j] * x[j],
            Kind::Exp | Kind::PgfUp | Kind::PgfDown => unreachable!(),
        }
    }
}

fn kinds_for(class: OrderClass) -> &'static [u8] {
    // 0 exp, 1 stop-loss, 2 stop-loss down, 3 pair, 4 pgf up, 5 pgf down,
    // 6 log1p, 7 sqrt, 8 min, 9 linear, 10 negative linear
    match class {
        OrderClass::Dcx => &[0, 1, 3, 2, 4, 5, 1, 9, 10],
        OrderClass::Idcx => &[0, 1, 3, 4, 1, 9],
        OrderClass::Ddcx => &[5, 2, 2, 10],
        OrderClass::Idcv => &[6, 7, 8, 8, 9],
        OrderClass::Cx => &[0, 1, 2, 5, 1, 9, 10],
        OrderClass::Icx => &[0, 1, 4, 1, 9],
        OrderClass::Icv => &[6, 7, 8, 9],
    }
}

/// A randomized suite of `count` functions valid for `class` on vectors of
/// dimension `scale.len()`. Weights are uniform on `[0, 1]^n` divided by the
/// per-coordinate scale (a pilot mean), so `θ·x̄` and thresholds sit on the
/// scale of the compared vectors and exponential arguments stay moderate.
pub fn make_suite(class: OrderClass, count: usize, scale: &[f64], rng: &mut RngStream) -> Result<Vec<TestFunction>> {
    let n = scale.len();
    if count == 0 {
        return Err(invalid("suite_size", "must be at least 1"));
    }
    if n == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    if scale.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(invalid("scale", "must be finite and non-negative"));
    }
    let unit: Vec<f64> = scale.iter().map(|&s| if s > 0.0 { 1.0 / s } else { 1.0 }).collect();
    let kinds = kinds_for(class);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let code = kinds[idx % kinds.len()];
        let u: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let total: f64 = u.iter().sum::<f64>().max(1e-3);
        // θ·x̄ = level when x = x̄
        let weights = |level: f64| -> Vec<f64> { u.iter().zip(&unit).map(|(a, s)| level * a / total * s).collect() };
        let p_exp = if rng.bernoulli(0.5) { 1.0 } else { 1.0 + rng.uniform() * 2.0 };
        let f = match code {
            0 => TestFunction::new(Kind::Exp, weights(rng.uniform_range(0.5, 3.0)), class),
            1 => TestFunction::new(
                Kind::StopLoss {
                    t: rng.uniform_range(0.6, 1.8),
                    p: p_exp,
                },
                weights(1.0),
                class,
            ),
            2 => TestFunction::new(
                Kind::StopLossDown {
                    t: rng.uniform_range(0.3, 1.2),
                    p: p_exp,
                },
                weights(1.0),
                class,
            ),
            3 => {
                let i = rng.below(n as u64) as usize;
                let j = rng.below(n as u64) as usize;
                TestFunction::new(Kind::PairProduct { i, j }, unit.clone(), class)
            }
            4 => TestFunction::new(Kind::PgfUp, weights(rng.uniform_range(0.5, 3.0)), class),
            5 => TestFunction::new(Kind::PgfDown, weights(rng.uniform_range(0.5, 3.0)), class),
            6 => TestFunction::new(Kind::Log1p, weights(rng.uniform_range(0.5, 3.0)), class),
            7 => TestFunction::new(Kind::Sqrt, weights(rng.uniform_range(0.5, 3.0)), class),
            8 => TestFunction::new(
                Kind::Min {
                    t: rng.uniform_range(0.5, 1.5),
                },
                weights(1.0),
                class,
            ),
            9 => TestFunction::new(Kind::Linear { sign: 1.0 }, weights(1.0), class),
            _ => TestFunction::new(Kind::Linear { sign: -1.0 }, weights(1.0), class),
        };
        out.push(f);
    }
    Ok(out)
}

/// Outcome of a finite-difference class check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericCheck {
    pub pass: bool,
    /// Most negative signed margin seen (0 when every condition held).
    pub worst: f64,
}

fn tolerance(vals: &[f64]) -> f64 {
    1e-9 * vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

struct Probe<'a> {
    f: &'a dyn Fn(&[f64]) -> f64,
    buf: Vec<f64>,
}

impl Probe<'_> {
    fn at(&mut self, x: &[f64], moves: &[(usize, f64)]) -> f64 {
        self.buf.clear();
        self.buf.extend_from_slice(x);
        for &(i, d) in moves {
            self.buf[i] += d;
        }
        (self.f)(&self.buf)
    }
}

/// Lemma-style check: every mixed second difference
/// `f(x+δe_i+δe_j) - f(x+δe_i) - f(x+δe_j) + f(x)`, `i ≤ j`, is `≥ -tol`.
pub fn verify_dcx_numeric(f: &dyn Fn(&[f64]) -> f64, probes: &[Vec<f64>], delta: f64) -> NumericCheck {
    let mut worst = 0.0_f64;
    for x in probes {
        let mut p = Probe { f, buf: Vec::new() };
        let n = x.len();
        for i in 0..n {
            for j in i..n {
                let v = [
                    p.at(x, &[(i, delta), (j, delta)]),
                    p.at(x, &[(i, delta)]),
                    p.at(x, &[(j, delta)]),
                    p.at(x, &[]),
                ];
                let m = v[0] - v[1] - v[2] + v[3];
                if m < -tolerance(&v) {
                    worst = worst.min(m);
                }
            }
        }
    }
    NumericCheck {
        pass: worst == 0.0,
        worst,
    }
}

/// Finite-difference check of membership in `class`: mixed second
/// differences (or second differences along coordinate and diagonal
/// directions for cx/icx/icv) with the class sign, plus monotone first
/// differences for the increasing and decreasing classes.
pub fn verify_numeric(test: &TestFunction, probes: &[Vec<f64>], delta: f64) -> NumericCheck {
    let f = |x: &[f64]| test.eval(x);
    let class = test.class;
    let mut worst = 0.0_f64;
    let mut note = |margin: f64, vals: &[f64]| {
        if margin < -tolerance(vals) {
            worst = worst.min(margin);
        }
    };
    for x in probes {
        let mut p = Probe { f: &f, buf: Vec::new() };
        let n = x.len();
        let base = p.at(x, &[]);
        if class.is_increasing() || class.is_decreasing() {
            for i in 0..n {
                let up = p.at(x, &[(i, delta)]);
                let m = if class.is_increasing() { up - base } else { base - up };
                note(m, &[up, base]);
            }
        }
        let sign = if class.is_concave_type() { -1.0 } else { 1.0 };
        if class.is_directional() {
            for i in 0..n {
                for j in i..n {
                    let v = [
                        p.at(x, &[(i, delta), (j, delta)]),
                        p.at(x, &[(i, delta)]),
                        p.at(x, &[(j, delta)]),
                        base,
                    ];
                    note(sign * (v[0] - v[1] - v[2] + v[3]), &v);
                }
            }
        } else {
            // central second differences along e_i, e_i + e_j and e_i - e_j;
            // probes are shifted up by δ so every evaluation stays in the orthant
            for i in 0..n {
                for j in i..n {
                    for s in [1.0, -1.0] {
                        if i == j && s < 0.0 {
                            continue;
                        }
                        let dirs: Vec<(usize, f64)> = if i == j {
                            alloc::vec![(i, delta)]
                        } else {
                            alloc::vec![(i, delta), (j, s * delta)]
                        };
                        let shift: Vec<(usize, f64)> = (0..n).map(|k| (k, 2.0 * delta)).collect();
                        let mut plus = shift.clone();
                        plus.extend(dirs.iter().copied());
                        let mut minus = shift.clone();
                        minus.extend(dirs.iter().map(|&(k, d)| (k, -d)));
                        let v = [p.at(x, &plus), p.at(x, &minus), p.at(x, &shift)];
                        note(sign * (v[0] + v[1] - 2.0 * v[2]), &v);
                    }
                }
            }
        }
    }
    NumericCheck {
        pass: worst == 0.0,
        worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn probes(n: usize, count: usize, scale: f64, rng: &mut RngStream) -> Vec<Vec<f64>> {
        (0..count).map(|_| (0..n).map(|_| 2.0 * scale * rng.uniform()).collect()).collect()
    }

    #[test]
    fn canonical_exp_member() {
        let f = TestFunction::new(Kind::Exp, vec![1.0, 1.0], OrderClass::Dcx);
        assert!((f.eval(&[0.5, 0.25]) - libm::exp(0.75)).abs() < 1e-15);
        let mut rng = RngStream::new(0, 0);
        assert!(verify_numeric(&f, &probes(2, 20, 1.0, &mut rng), 1e-3).pass);
    }

    #[test]
    fn product_check_signs() {
        let delta = 0.01;
        let pr = vec![vec![0.3, 0.7], vec![1.0, 2.0]];
        let good = verify_dcx_numeric(&|x: &[f64]| x[0] * x[1], &pr, delta);
        assert!(good.pass);
        let bad = verify_dcx_numeric(&|x: &[f64]| -x[0] * x[1], &pr, delta);
        assert!(!bad.pass);
        assert!((bad.worst + delta * delta).abs() < 1e-12);
    }

    #[test]
    fn idcv_has_no_exp() {
        let mut rng = RngStream::new(1, 0);
        let s = make_suite(OrderClass::Idcv, 40, &[3.0, 4.0, 5.0], &mut rng).unwrap();
        assert!(s.iter().all(|f| f.log_arg(&[1.0, 1.0, 1.0]).is_none()));
        assert!(s.iter().all(|f| matches!(f.family(), Family::LinConcave | Family::Linear)));
    }

    #[test]
    fn every_suite_member_is_certified() {
        let mut rng = RngStream::new(2, 0);
        for class in OrderClass::ALL {
            for n in [1, 2, 4] {
                let scale: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
                let suite = make_suite(class, 60, &scale, &mut rng).unwrap();
                let pr = probes(n, 50, 3.0, &mut rng);
                for f in &suite {
                    let c = verify_numeric(f, &pr, 1e-3);
                    assert!(c.pass, "{:?} {:?} {:?}", class, f, c);
                    if class.is_directional() && !class.is_concave_type() {
                        assert!(verify_dcx_numeric(&|x: &[f64]| f.eval(x), &pr, 1e-3).pass);
                    }
                }
            }
        }
    }

    #[test]
    fn suite_errors() {
        let mut rng = RngStream::new(3, 0);
        assert!(make_suite(OrderClass::Dcx, 0, &[1.0], &mut rng).is_err());
        assert!(make_suite(OrderClass::Dcx, 3, &[], &mut rng).is_err());
    }
}
