//! α-divergence between two regression densities sharing one error family.
//!
//! For a fixed regressor row the y-integral depends on the two parameter
//! points only through the mean offset `delta = (b1 - b2)'(1, x)` and the
//! scales. In `z = (y - mu2) / s2` it reads
//! `f1(z) = (s2/s1) f((s2 z - delta) / s1)`, `f2(z) = f(z)`.

use std::cell::Cell;

use super::{Params, XSample};
use crate::error_models::ErrorModel;
use crate::exec::pairwise_sum;
use crate::quadrature::{integrate_line, QuadOptions};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct DivergenceOptions {
    pub quad: QuadOptions,
    /// Rows at or below this count are integrated one by one.
    pub direct_below: usize,
    /// Starting Chebyshev degree for the offset interpolant; doubled on mismatch.
    pub cheb_nodes: usize,
    pub cheb_max_nodes: usize,
    pub cheb_rel_tol: f64,
}

impl Default for DivergenceOptions {
    fn default() -> Self {
        DivergenceOptions {
            quad: QuadOptions { abs_tol: 1e-13, max_level: 12, ..QuadOptions::default() },
            direct_below: 64,
            cheb_nodes: 24,
            cheb_max_nodes: 192,
            cheb_rel_tol: 1e-9,
        }
    }
}

/// Integrand of the divergence for log-ratio `u = ln f1 - ln f2`.
fn kernel(l1: f64, l2: f64, alpha: f64) -> f64 {
    if l1 < -745.0 && l2 < -745.0 {
        return 0.0;
    }
    let u = l1 - l2;
    if u.abs() < 1.0 {
        // Small log-ratio: factor out f2 to keep the cancellation exact.
        let f2 = l2.exp();
        let h = if alpha == -1.0 {
            u * u.exp() - u.exp_m1()
        } else if alpha == 1.0 {
            u.exp_m1() - u
        } else {
            let a = (1.0 - alpha) / 2.0;
            (a * u.exp_m1() - (a * u).exp_m1()) / (a * (1.0 - a))
        };
        return f2 * h;
    }
    let (f1, f2) = (l1.exp(), l2.exp());
    if alpha == -1.0 {
        f1 * u - (f1 - f2)
    } else if alpha == 1.0 {
        (f1 - f2) - f2 * u
    } else {
        let a = (1.0 - alpha) / 2.0;
        (a * f1 + (1.0 - a) * f2 - (a * l1 + (1.0 - a) * l2).exp()) / (a * (1.0 - a))
    }
}

/// Divergence at one regressor row, given the mean offset `delta = mu1 - mu2`.
pub fn pointwise_divergence(
    model: &ErrorModel,
    delta: f64,
    s1: f64,
    s2: f64,
    alpha: f64,
    quad: &QuadOptions,
) -> Result<f64> {
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::InvalidArgument(format!("scales must be positive, got {s1} and {s2}")));
    }
    let ratio = s2 / s1;
    let shift = delta / s1;
    let ln_ratio = ratio.ln();
    let opts = QuadOptions { center: 0.5 * shift / ratio, ..quad.clone() };
    let overflow = Cell::new(false);
    let r = integrate_line(
        |z| {
            let l1 = ln_ratio + model.ln_pdf(ratio * z - shift);
            let l2 = model.ln_pdf(z);
            let v = kernel(l1, l2, alpha);
            if v == f64::INFINITY {
                overflow.set(true);
                return Ok(0.0);
            }
            Ok(v)
        },
        &opts,
    );
    // For alpha outside [-1, 1] the weight f1^a f2^(1-a) can grow without
    // bound in the tails; the divergence is then infinite.
    if overflow.get() {
        return Ok(f64::INFINITY);
    }
    let r = r?;
    // The integrand is nonnegative; tiny negative totals are roundoff.
    Ok(r.value.max(0.0))
}

struct Chebyshev {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    fn fit<F: Fn(f64) -> Result<f64>>(lo: f64, hi: f64, nodes: usize, f: &F) -> Result<Self> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let angle = |k: usize| std::f64::consts::PI * (k as f64 + 0.5) / nodes as f64;
        let values = (0..nodes).map(|k| f(mid + half * angle(k).cos())).collect::<Result<Vec<_>>>()?;
        let coeffs = (0..nodes)
            .map(|j| {
                let s: f64 = values.iter().enumerate().map(|(k, v)| v * (j as f64 * angle(k)).cos()).sum();
                2.0 * s / nodes as f64
            })
            .collect();
        Ok(Chebyshev { lo, hi, coeffs })
    }

    fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + 0.5 * self.coeffs[0]
    }
}

/// `D[theta1 : theta2]` averaged over the rows of `x_sample`.
pub fn divergence(model: &ErrorModel, theta1: &Params, theta2: &Params, alpha: f64, x_sample: &XSample) -> Result<f64> {
    divergence_with(model, theta1, theta2, alpha, x_sample, &DivergenceOptions::default())
}

pub fn divergence_with(
    model: &ErrorModel,
    theta1: &Params,
    theta2: &Params,
    alpha: f64,
    x_sample: &XSample,
    opts: &DivergenceOptions,
) -> Result<f64> {
    if theta1.beta.len() != x_sample.p + 1 || theta2.beta.len() != x_sample.p + 1 {
        return Err(Error::InvalidArgument("coefficient length does not match the regressor dimension".into()));
    }
    if x_sample.is_empty() {
        return Err(Error::InvalidArgument("empty regressor sample".into()));
    }
    let offsets = x_sample.offsets(&theta1.beta, &theta2.beta);
    let g = |d: f64| pointwise_divergence(model, d, theta1.sigma, theta2.sigma, alpha, &opts.quad);
    let lo = offsets.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let values: Vec<f64> = if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        let v = g(0.5 * (lo + hi))?;
        vec![v; offsets.len()]
    } else if offsets.len() <= opts.direct_below {
        offsets.iter().map(|d| g(*d)).collect::<Result<_>>()?
    } else {
        if g(lo)?.is_infinite() || g(hi)?.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let interp = fit_checked(lo, hi, &g, opts)?;
        offsets.iter().map(|d| interp.eval(*d).max(0.0)).collect()
    };
    Ok(pairwise_sum(&values) / values.len() as f64)
}

/// Fits the interpolant and checks it at off-node points, doubling the
/// degree until it agrees with direct integration.
fn fit_checked<F: Fn(f64) -> Result<f64>>(lo: f64, hi: f64, g: &F, opts: &DivergenceOptions) -> Result<Chebyshev> {
    let probes = [0.137, 0.5, 0.911, 0.0, 1.0].map(|s| lo + s * (hi - lo));
    let truth = probes.iter().map(|p| g(*p)).collect::<Result<Vec<_>>>()?;
    let mut nodes = opts.cheb_nodes.max(4);
    loop {
        let c = Chebyshev::fit(lo, hi, nodes, g)?;
        let worst = probes
            .iter()
            .zip(&truth)
            .map(|(p, t)| (c.eval(*p) - t).abs() / (t.abs() + opts.quad.abs_tol * 100.0))
            .fold(0.0, f64::max);
        if worst <= opts.cheb_rel_tol {
            return Ok(c);
        }
        if nodes * 2 > opts.cheb_max_nodes {
            return Err(Error::QuadratureNonConvergence { achieved: worst });
        }
        nodes *= 2;
    }
}
