//! Double-exponential quadrature over the whole real line.
//!
//! Substitutes `y = c + s * sinh(pi/2 * sinh t)` and applies the trapezoid
//! rule in `t`, halving the step until successive levels agree.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub max_level: u32,
    pub center: f64,
    pub scale: f64,
    /// Truncation of the `t` range; 6 reaches |y| of about 1e137.
    pub t_max: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, max_level: 10, center: 0.0, scale: 1.0, t_max: 6.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub level: u32,
    pub evaluations: usize,
}

const MIN_LEVEL: u32 = 3;

/// Integrates `f` over the real line.
pub fn integrate_line<F>(f: F, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(opts.abs_tol > 0.0) || !(opts.scale > 0.0) {
        return Err(Error::InvalidArgument("quadrature needs positive tolerance and scale".into()));
    }
    let node = |t: f64| -> Result<(f64, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let y = opts.center + opts.scale * u.sinh();
        let jac = opts.scale * FRAC_PI_2 * t.cosh() * u.cosh();
        let v = f(y)?;
        if !v.is_finite() {
            return Err(Error::DensityEvaluation { y });
        }
        Ok((v * jac, (v * jac).abs()))
    };

    let mut h = 1.0;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut evaluations = 0usize;
    let k_max = (opts.t_max / h).floor() as i64;
    for k in -k_max..=k_max {
        let (v, a) = node(k as f64 * h)?;
        sum += v;
        abs_sum += a;
        evaluations += 1;
    }
    let mut estimate = sum * h;
    let mut last_err = f64::INFINITY;
    for level in 1..=opts.max_level {
        h /= 2.0;
        let k_max = (opts.t_max / h).floor() as i64;
        let mut k = -k_max;
        if k % 2 == 0 {
            k += 1;
        }
        while k <= k_max {
            let (v, a) = node(k as f64 * h)?;
            sum += v;
            abs_sum += a;
            evaluations += 1;
            k += 2;
        }
        let next = sum * h;
        let roundoff = 4.0 * f64::EPSILON * abs_sum * h;
        let err = (next - estimate).abs().max(roundoff);
        estimate = next;
        last_err = err;
        if level >= MIN_LEVEL && err <= opts.abs_tol {
            return Ok(QuadResult { value: estimate, abs_error: err, level, evaluations });
        }
    }
    Err(Error::QuadratureNonConvergence { achieved: last_err })
}
