//! Maximum likelihood for the location-scale regression by BFGS over
//! `(beta, log sigma)`.

use nalgebra::{DMatrix, DVector};

use super::Sample;
use crate::error_models::ErrorModel;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MleFit {
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm of the per-observation average score at the returned point.
    pub grad_norm: f64,
}

const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 200;

fn design(sample: &Sample) -> DMatrix<f64> {
    let (n, p) = (sample.y.len(), sample.x.p);
    DMatrix::from_fn(n, p + 1, |t, j| if j == 0 { 1.0 } else { sample.x.row(t)[j - 1] })
}

/// Least squares coefficients and the residual standard deviation.
pub fn ols(sample: &Sample) -> Result<(Vec<f64>, f64)> {
    let x = design(sample);
    let y = DVector::from_column_slice(&sample.y);
    let gram = x.transpose() * &x;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::InvalidConfig("regressor matrix is rank deficient".into()))?;
    let b = chol.solve(&(x.transpose() * &y));
    let resid = &y - &x * &b;
    let dof = (x.nrows() - x.ncols()).max(1) as f64;
    Ok((b.iter().copied().collect(), (resid.norm_squared() / dof).sqrt()))
}

struct Objective<'a> {
    model: &'a ErrorModel,
    x: DMatrix<f64>,
    y: &'a [f64],
}

impl Objective<'_> {
    /// Negative mean log-likelihood and its gradient; `theta = (beta, tau)`.
    fn eval(&self, theta: &DVector<f64>) -> (f64, DVector<f64>) {
        let k = self.x.ncols();
        let tau = theta[k];
        let inv = (-tau).exp();
        let n = self.y.len() as f64;
        let mut value = 0.0;
        let mut grad = DVector::zeros(k + 1);
        for (t, y) in self.y.iter().enumerate() {
            let row = self.x.row(t);
            let mu: f64 = (0..k).map(|j| row[j] * theta[j]).sum();
            let r = (y - mu) * inv;
            value -= self.model.ln_pdf(r);
            let d1 = self.model.log_deriv1(r);
            for j in 0..k {
                grad[j] += d1 * row[j];
            }
            grad[k] += d1 * r;
        }
        for j in 0..k {
            grad[j] *= inv / n;
        }
        grad[k] = 1.0 + grad[k] / n;
        (value / n + tau, grad)
    }
}

fn sup(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Fits `(beta, sigma)`. A fit that stops short of the gradient tolerance is
/// returned with `converged == false`.
pub fn mle_fit(sample: &Sample, model: &ErrorModel, init: Option<(Vec<f64>, f64)>) -> Result<MleFit> {
    let n = sample.y.len();
    let k = sample.x.p + 1;
    if n < k + 1 {
        return Err(Error::InvalidConfig(format!("need at least p + 2 = {} observations, got {n}", k + 1)));
    }
    let obj = Objective { model, x: design(sample), y: &sample.y };
    let (b0, s0) = match init {
        Some((b, s)) if b.len() == k && s > 0.0 => (b, s),
        Some(_) => return Err(Error::InvalidArgument("initial point has the wrong shape".into())),
        None => ols(sample)?,
    };
    let s0 = if s0 > 0.0 { s0 } else { 1.0 };

    // Inverse Hessian guess from the normal-error information.
    let gram = obj.x.transpose() * &obj.x / n as f64;
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::InvalidConfig("regressor matrix is rank deficient".into()))?;
    let mut h0 = DMatrix::zeros(k + 1, k + 1);
    h0.view_mut((0, 0), (k, k)).copy_from(&(gram_inv * (s0 * s0)));
    h0[(k, k)] = 0.5;

    let mut theta = DVector::from_iterator(k + 1, b0.iter().copied().chain([s0.ln()]));
    let (mut f, mut g) = obj.eval(&theta);
    let mut h = h0.clone();
    let mut iterations = 0;
    while iterations < MAX_ITER && sup(&g) >= GRAD_TOL {
        iterations += 1;
        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            h = h0.clone();
            dir = -(&h * &g);
            slope = g.dot(&dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &theta + &dir * step;
            let (fc, gc) = obj.eval(&cand);
            let armijo = fc <= f + 1e-4 * step * slope;
            // Near the optimum the decrease drowns in roundoff; a smaller
            // gradient is then the better acceptance signal.
            let flat = (fc - f).abs() <= 1e-14 * f.abs().max(1.0) && sup(&gc) < sup(&g);
            if fc.is_finite() && (armijo || flat) {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc, gc)) = accepted else { break };
        let s = &cand - &theta;
        let yv = &gc - &g;
        let sy = s.dot(&yv);
        if sy > 1e-14 * s.norm() * yv.norm() {
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(k + 1, k + 1);
            let left = &eye - (&s * yv.transpose()) * rho;
            h = &left * &h * left.transpose() + (&s * s.transpose()) * rho;
        }
        theta = cand;
        f = fc;
        g = gc;
    }
    let grad_norm = sup(&g);
    Ok(MleFit {
        beta: theta.iter().take(k).copied().collect(),
        sigma: theta[k].exp(),
        converged: grad_norm < GRAD_TOL,
        iterations,
        grad_norm,
    })
}
