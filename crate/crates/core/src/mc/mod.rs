//! Monte-Carlo estimate of the exact risk: simulate, fit by maximum
//! likelihood, measure the divergence to the truth, average.

mod divergence;
mod mle;
mod sampling;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error_models::ErrorModel;
use crate::exec::{map_indexed, pairwise_sum, Execution};
use crate::{Error, Result};

pub use divergence::{divergence, pointwise_divergence, DivergenceOptions};
pub use mle::{mle_fit, ols, MleFit};
pub use sampling::{ErrorSampler, XDist};

/// Regression parameters: intercept first, then slopes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub beta: Vec<f64>,
    pub sigma: f64,
}

/// Rows of regressors without the intercept column, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct XSample {
    pub p: usize,
    pub data: Vec<f64>,
}

impl XSample {
    pub fn len(&self) -> usize {
        if self.p == 0 {
            self.data.len()
        } else {
            self.data.len() / self.p
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.p..(t + 1) * self.p]
    }

    /// Builds a regressor-free sample of `count` rows (intercept only).
    pub fn intercept_only(count: usize) -> Self {
        XSample { p: 0, data: vec![0.0; count] }
    }

    fn draw<R: rand::Rng>(dist: &XDist, p: usize, count: usize, rng: &mut R) -> Self {
        if p == 0 {
            return Self::intercept_only(count);
        }
        let mut data = vec![0.0; count * p];
        for row in data.chunks_mut(p) {
            dist.sample_into(rng, row);
        }
        XSample { p, data }
    }

    /// `(b1 - b2)' (1, x_t)` for every row.
    fn offsets(&self, b1: &[f64], b2: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = b1.iter().zip(b2).map(|(a, b)| a - b).collect();
        (0..self.len())
            .map(|t| {
                if self.p == 0 {
                    d[0]
                } else {
                    d[0] + self.row(t).iter().zip(&d[1..]).map(|(x, c)| x * c).sum::<f64>()
                }
            })
            .collect()
    }
}

/// One simulated data set.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub x: XSample,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub model: ErrorModel,
    pub x_dist: XDist,
    pub p: usize,
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub n: usize,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Fresh regressor draws per replication for the outer expectation.
    pub x_sample_size: usize,
}

impl SimConfig {
    /// Zero coefficients, unit scale, 10^4 outer draws.
    pub fn new(model: ErrorModel, x_dist: XDist, p: usize, n: usize, alpha: f64, replications: usize, seed: u64) -> Self {
        SimConfig {
            model,
            x_dist,
            p,
            beta: vec![0.0; p + 1],
            sigma: 1.0,
            n,
            replications,
            alpha,
            seed,
            x_sample_size: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.beta.len() != self.p + 1 {
            return bad(format!("beta needs {} entries, got {}", self.p + 1, self.beta.len()));
        }
        if self.n < self.p + 3 {
            return bad(format!("n must be at least p + 3 = {}", self.p + 3));
        }
        if self.replications == 0 {
            return bad("at least one replication is needed".into());
        }
        if self.x_sample_size == 0 {
            return bad("x_sample_size must be positive".into());
        }
        if !self.alpha.is_finite() {
            return bad("alpha must be finite".into());
        }
        self.x_dist.validate()?;
        ErrorSampler::new(&self.model)?;
        Ok(())
    }

    fn rng(&self, replication: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replication as u64);
        rng
    }

    fn truth(&self) -> Params {
        Params { beta: self.beta.clone(), sigma: self.sigma }
    }
}

fn draw_sample<R: rand::Rng>(cfg: &SimConfig, sampler: &ErrorSampler, rng: &mut R) -> Sample {
    let x = XSample::draw(&cfg.x_dist, cfg.p, cfg.n, rng);
    let y = (0..cfg.n)
        .map(|t| {
            let mean = if cfg.p == 0 {
                cfg.beta[0]
            } else {
                cfg.beta[0] + x.row(t).iter().zip(&cfg.beta[1..]).map(|(a, b)| a * b).sum::<f64>()
            };
            mean + cfg.sigma * sampler.draw(rng)
        })
        .collect();
    Sample { x, y }
}

/// The sample of replication `replication`; identical for identical seeds.
pub fn simulate(cfg: &SimConfig, replication: usize) -> Result<Sample> {
    cfg.validate()?;
    let sampler = ErrorSampler::new(&cfg.model)?;
    Ok(draw_sample(cfg, &sampler, &mut cfg.rng(replication)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    /// `None` when fewer than two replications succeeded.
    pub std_error: Option<f64>,
    pub replications_used: usize,
    pub divergence_failures: usize,
    pub fit_failures: usize,
}

enum Outcome {
    Value(f64),
    FitFailed,
    DivergenceFailed,
}

fn replicate(cfg: &SimConfig, sampler: &ErrorSampler, r: usize, opts: &DivergenceOptions) -> Outcome {
    let mut rng = cfg.rng(r);
    let sample = draw_sample(cfg, sampler, &mut rng);
    let fit = match mle_fit(&sample, &cfg.model, None) {
        Ok(f) if f.converged => f,
        _ => return Outcome::FitFailed,
    };
    let outer = XSample::draw(&cfg.x_dist, cfg.p, cfg.x_sample_size, &mut rng);
    let fitted = Params { beta: fit.beta, sigma: fit.sigma };
    match divergence::divergence_with(&cfg.model, &fitted, &cfg.truth(), cfg.alpha, &outer, opts) {
        Ok(v) => Outcome::Value(v),
        Err(_) => Outcome::DivergenceFailed,
    }
}

pub fn estimate_risk(cfg: &SimConfig) -> Result<RiskEstimate> {
    estimate_risk_with(cfg, Execution::default())
}

/// Replications run in any order; the reduction is in replication order, so
/// the result does not depend on the schedule.
pub fn estimate_risk_with(cfg: &SimConfig, exec: Execution) -> Result<RiskEstimate> {
    cfg.validate()?;
    let sampler = ErrorSampler::new(&cfg.model)?;
    let opts = DivergenceOptions::default();
    let outcomes = map_indexed(exec, cfg.replications, |r| replicate(cfg, &sampler, r, &opts));
    let mut values = Vec::with_capacity(outcomes.len());
    let (mut fit_failures, mut divergence_failures) = (0, 0);
    for o in outcomes {
        match o {
            Outcome::Value(v) => values.push(v),
            Outcome::FitFailed => fit_failures += 1,
            Outcome::DivergenceFailed => divergence_failures += 1,
        }
    }
    if values.is_empty() {
        return Err(Error::AllReplicationsFailed);
    }
    let m = values.len() as f64;
    let mean = pairwise_sum(&values) / m;
    let std_error = (values.len() > 1).then(|| {
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&dev) / (m - 1.0) / m).sqrt()
    });
    Ok(RiskEstimate { mean, std_error, replications_used: values.len(), divergence_failures, fit_failures })
}
