//! Boolean-model coverage and SINR success probabilities.

use alloc::vec::Vec;

use crate::dist::MassDistribution;
use crate::error::{invalid, Result};
use crate::exec::Replicator;
use crate::geometry::Window;
use crate::kernel::{ResponseKernel, ResponseShape};
use crate::ops::mark_iid;
use crate::pattern::{Marks, PointPattern};
use crate::processes::MeasureSampler;
use crate::rng::RngStream;
use crate::shotnoise::additive_sn;
use crate::stats::{coverage_field, Estimate, Moments};

/// Law of the fading factor multiplying every received power.
#[derive(Clone, Debug, PartialEq)]
pub enum Fading {
    /// Exponential power with the given mean.
    Rayleigh { mean: f64 },
    General(MassDistribution),
}

impl Fading {
    pub fn validate(&self) -> Result<()> {
        match self {
            Fading::Rayleigh { mean } if !(*mean > 0.0 && mean.is_finite()) => {
                Err(invalid("fading_mean", "must be positive"))
            }
            Fading::Rayleigh { .. } => Ok(()),
            Fading::General(d) => d.validate(),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            Fading::Rayleigh { mean } => crate::dist::exponential(*mean, rng),
            Fading::General(d) => d.sample(rng),
        }
    }
}

/// `n` emitter-receiver links sharing a threshold, noise law, path loss and fading.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkLayout {
    pub window: Window,
    pub emitters: Vec<Vec<f64>>,
    pub receivers: Vec<Vec<f64>>,
    pub threshold: f64,
    pub noise: MassDistribution,
    /// `P (1 + r)^(-β)`.
    pub path_loss: ResponseKernel,
    pub fading: Fading,
}

impl LinkLayout {
    pub fn validate(&self) -> Result<()> {
        let n = self.emitters.len();
        if n == 0 || self.receivers.len() != n {
            return Err(invalid("links", "need n >= 1 emitters and as many receivers"));
        }
        if self
            .emitters
            .iter()
            .chain(&self.receivers)
            .any(|x| x.len() != self.window.dim() || !self.window.contains(x))
        {
            return Err(invalid("links", "emitters and receivers must lie in the window"));
        }
        if !(self.threshold > 0.0) {
            return Err(invalid("threshold", "must be positive"));
        }
        if !matches!(self.path_loss.shape, ResponseShape::PowerLaw { .. }) {
            return Err(invalid("path_loss", "must be a power law"));
        }
        self.path_loss.validate(self.window.dim())?;
        self.noise.validate()?;
        self.fading.validate()
    }

    pub fn len(&self) -> usize {
        self.emitters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emitters.is_empty()
    }

    fn gain(&self, k: usize, i: usize) -> f64 {
        self.path_loss.value(self.window.dist(&self.emitters[k], &self.receivers[i]))
    }
}

/// Per-replication draws shared by both estimators: the interference-plus-
/// noise seen by each receiver, `W + I_i + V_i`.
fn interference<S: MeasureSampler>(layout: &LinkLayout, interferers: &S, rng: &RngStream) -> Result<Vec<f64>> {
    let n = layout.len();
    let pattern = interferers.sample_points(&mut rng.child(0))?;
    let mut fading_rng = rng.child(1);
    let mut cross_rng = rng.child(2);
    let mut noise_rng = rng.child(3);
    let mut out = Vec::with_capacity(n);
    let hs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..pattern.len()).map(|_| layout.fading.sample(&mut fading_rng)).collect())
        .collect();
    let w = layout.noise.sample(&mut noise_rng);
    for i in 0..n {
        let marked = pattern.clone().with_marks(Marks::Scalar(hs[i].clone()))?;
        let v = additive_sn(&marked.into(), &layout.path_loss, core::slice::from_ref(&layout.receivers[i]))?[0];
        let mut cross = 0.0;
        for k in 0..n {
            if k != i {
                cross += layout.fading.sample(&mut cross_rng) * layout.gain(k, i);
            }
        }
        out.push(w + cross + v);
    }
    Ok(out)
}

/// Per-replication values of the crude estimator, `Π_i 1[S_ii ≥ T (W + I_i + V_i)]`.
/// Replication `r` uses `root.child(r)`; own-link fading comes from its child 4.
pub fn sinr_samples<S: MeasureSampler, R: Replicator>(
    layout: &LinkLayout,
    interferers: &S,
    n_reps: usize,
    root: &RngStream,
    exec: &R,
) -> Result<Vec<f64>> {
    layout.validate()?;
    let rows = exec.run(n_reps, |r| -> Result<f64> {
        let rng = root.child(r as u64);
        let noise = interference(layout, interferers, &rng)?;
        let mut own = rng.child(4);
        let ok = noise.iter().enumerate().all(|(i, &u)| {
            let s = layout.fading.sample(&mut own) * layout.gain(i, i);
            s > 0.0 && s >= layout.threshold * u
        });
        Ok(if ok { 1.0 } else { 0.0 })
    });
    rows.into_iter().collect()
}

/// Per-replication values of the Rayleigh estimator, own-link fading
/// integrated out: `Π_i exp(-T (W + I_i + V_i) / (m g(d_ii)))`.
pub fn sinr_samples_rayleigh<S: MeasureSampler, R: Replicator>(
    layout: &LinkLayout,
    interferers: &S,
    n_reps: usize,
    root: &RngStream,
    exec: &R,
) -> Result<Vec<f64>> {
    layout.validate()?;
    let Fading::Rayleigh { mean } = layout.fading else {
        return Err(invalid("fading", "the conditional estimator needs Rayleigh fading"));
    };
    let rows = exec.run(n_reps, |r| -> Result<f64> {
        let rng = root.child(r as u64);
        let noise = interference(layout, interferers, &rng)?;
        let exponent: f64 = noise
            .iter()
            .enumerate()
            .map(|(i, &u)| layout.threshold * u / (mean * layout.gain(i, i)))
            .sum();
        Ok(libm::exp(-exponent))
    });
    rows.into_iter().collect()
}

/// Crude Monte-Carlo estimate of the joint success probability.
pub fn sinr_success<S: MeasureSampler, R: Replicator>(
    layout: &LinkLayout,
    interferers: &S,
    n_reps: usize,
    root: &RngStream,
    exec: &R,
) -> Result<Estimate> {
    Ok(Moments::from_slice(&sinr_samples(layout, interferers, n_reps, root, exec)?).estimate())
}

/// Rao-Blackwellized estimate under Rayleigh fading, on the same streams as
/// [`sinr_success`].
pub fn sinr_success_rayleigh<S: MeasureSampler, R: Replicator>(
    layout: &LinkLayout,
    interferers: &S,
    n_reps: usize,
    root: &RngStream,
    exec: &R,
) -> Result<Estimate> {
    Ok(Moments::from_slice(&sinr_samples_rayleigh(layout, interferers, n_reps, root, exec)?).estimate())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryCoverage {
    /// `P(V(y) ≥ 1)`.
    pub coverage: Estimate,
    /// `E V(y)`.
    pub mean: Estimate,
    /// `E V(y)²`.
    pub second_moment: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRun {
    pub queries: Vec<QueryCoverage>,
    /// Coverage numbers per replication.
    pub counts: Vec<Vec<u64>>,
}

/// Boolean model with germs from `germs` and i.i.d. ball grains of radius
/// drawn from `grain_radius`. Replication `r` draws germs from
/// `root.child(r).child(0)` and radii from its child 1.
pub fn boolean_coverage<S: MeasureSampler, R: Replicator>(
    germs: &S,
    grain_radius: &MassDistribution,
    queries: &[Vec<f64>],
    n_reps: usize,
    root: &RngStream,
    exec: &R,
) -> Result<CoverageRun> {
    grain_radius.validate()?;
    let rows = exec.run(n_reps, |r| -> Result<Vec<u64>> {
        let rng = root.child(r as u64);
        let p: PointPattern = germs.sample_points(&mut rng.child(0))?;
        let marked = mark_iid(&p, grain_radius, &mut rng.child(1))?;
        coverage_field(&marked, queries)
    });
    let counts: Vec<Vec<u64>> = rows.into_iter().collect::<Result<_>>()?;
    let queries = (0..queries.len())
        .map(|j| {
            let (mut c, mut m, mut s) = (Moments::new(), Moments::new(), Moments::new());
            for row in &counts {
                let v = row[j] as f64;
                c.push(if row[j] > 0 { 1.0 } else { 0.0 });
                m.push(v);
                s.push(v * v);
            }
            QueryCoverage {
                coverage: c.estimate(),
                mean: m.estimate(),
                second_moment: s.estimate(),
            }
        })
        .collect();
    Ok(CoverageRun { queries, counts })
}
