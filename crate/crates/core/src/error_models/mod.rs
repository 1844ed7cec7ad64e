//! Error-term densities with their first three log-density derivatives.

mod expr;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::scalar::{rational_from_decimal_f64, Rational};
use crate::special::{inverse_mills, mills_terms, normal_ln_cdf, student_t_ln_norm, LN2, LN_SQRT_2PI};
use crate::{Error, Result};

pub use expr::{parse_density_file, Expr, ExprDensity};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorKind {
    Normal,
    StudentT(f64),
    SkewNormal(f64),
    Custom,
}

/// A user-supplied density. All three log-derivatives are mandatory.
pub trait Density: Send + Sync {
    fn ln_pdf(&self, y: f64) -> f64;
    /// `order`-th derivative of `ln f` at `y`, for order 1..=3.
    fn log_deriv(&self, order: u8, y: f64) -> f64;
}

#[derive(Clone)]
pub struct ErrorModel {
    kind: ErrorKind,
    label: String,
    nu_exact: Option<Rational>,
    ln_norm: f64,
    custom: Option<Arc<dyn Density>>,
}

impl fmt::Debug for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErrorModel").field("kind", &self.kind).field("label", &self.label).finish()
    }
}

/// Probe points used to reject densities without full support.
const SUPPORT_PROBES: [f64; 9] = [-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0];

impl ErrorModel {
    pub fn normal() -> Self {
        ErrorModel {
            kind: ErrorKind::Normal,
            label: "normal".into(),
            nu_exact: None,
            ln_norm: -LN_SQRT_2PI,
            custom: None,
        }
    }

    /// Student t with `nu` degrees of freedom; `nu` is read as the decimal it prints as.
    pub fn student_t(nu: f64) -> Result<Self> {
        Self::student_t_exact(rational_from_decimal_f64(nu)?)
    }

    pub fn student_t_exact(nu: Rational) -> Result<Self> {
        let v = crate::scalar::rational_to_f64(&nu);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidModel(format!("t degrees of freedom must be positive, got {v}")));
        }
        Ok(ErrorModel {
            kind: ErrorKind::StudentT(v),
            label: format!("t:{v}"),
            nu_exact: Some(nu),
            ln_norm: student_t_ln_norm(v),
            custom: None,
        })
    }

    pub fn skew_normal(b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::InvalidModel(format!("skewness parameter must be finite, got {b}")));
        }
        Ok(ErrorModel {
            kind: ErrorKind::SkewNormal(b),
            label: format!("skew-normal:{b}"),
            nu_exact: None,
            ln_norm: LN2 - LN_SQRT_2PI,
            custom: None,
        })
    }

    /// Wraps a user density after checking support, normalisation and the
    /// supplied derivatives.
    pub fn custom(label: impl Into<String>, density: impl Density + 'static) -> Result<Self> {
        let model = ErrorModel {
            kind: ErrorKind::Custom,
            label: label.into(),
            nu_exact: None,
            ln_norm: 0.0,
            custom: Some(Arc::new(density)),
        };
        model.check_custom()?;
        Ok(model)
    }

    pub fn custom_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let density = parse_density_file(&text)?;
        Self::custom(format!("custom:{}", path.display()), density)
    }

    /// Parses `normal`, `t:<nu>`, `skew-normal:<b>` or `custom:<file>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidModel(format!("unrecognised error model `{spec}`"));
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        match (head, arg) {
            ("normal", None) => Ok(Self::normal()),
            ("t", Some(a)) => Self::student_t_exact(crate::scalar::parse_rational(a).map_err(|_| bad())?),
            ("skew-normal", Some(a)) => Self::skew_normal(a.parse().map_err(|_| bad())?),
            ("custom", Some(a)) => Self::custom_from_file(Path::new(a)),
            _ => Err(bad()),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Exact degrees of freedom for the t family.
    pub fn nu_exact(&self) -> Option<&Rational> {
        self.nu_exact.as_ref()
    }

    /// True when `f(-y) = f(y)` by construction.
    pub fn is_symmetric(&self) -> bool {
        match self.kind {
            ErrorKind::Normal | ErrorKind::StudentT(_) => true,
            ErrorKind::SkewNormal(b) => b == 0.0,
            ErrorKind::Custom => false,
        }
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        match self.kind {
            ErrorKind::Normal => self.ln_norm - 0.5 * y * y,
            ErrorKind::StudentT(nu) => self.ln_norm - 0.5 * (nu + 1.0) * (y * y / nu).ln_1p(),
            ErrorKind::SkewNormal(b) => self.ln_norm - 0.5 * y * y + normal_ln_cdf(b * y),
            ErrorKind::Custom => self.custom.as_ref().expect("custom density").ln_pdf(y),
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    /// First log-derivative only; cheaper than [`ErrorModel::log_derivs`].
    pub fn log_deriv1(&self, y: f64) -> f64 {
        match self.kind {
            ErrorKind::Normal => -y,
            ErrorKind::StudentT(nu) => {
                if y == 0.0 {
                    0.0
                } else {
                    -(nu + 1.0) / (y + nu / y)
                }
            }
            ErrorKind::SkewNormal(b) => -y + b * inverse_mills(b * y),
            ErrorKind::Custom => self.custom.as_ref().expect("custom density").log_deriv(1, y),
        }
    }

    /// All three log-derivatives at once.
    pub fn log_derivs(&self, y: f64) -> [f64; 3] {
        match self.kind {
            ErrorKind::Normal => [-y, -1.0, 0.0],
            ErrorKind::StudentT(nu) => {
                // w = 1/(nu+y^2), t = y w, y^2 w = 1 - nu w; stable for huge |y|
                let w = 1.0 / (nu + y * y);
                let t = if y == 0.0 { 0.0 } else { 1.0 / (y + nu / y) };
                let a = nu + 1.0;
                [-a * t, a * (1.0 - 2.0 * nu * w) * w, 2.0 * a * t * (4.0 * nu * w - 1.0) * w]
            }
            ErrorKind::SkewNormal(b) => {
                let (r, re, k) = mills_terms(b * y);
                let b2 = b * b;
                [-y + b * r, -1.0 - b2 * re, b2 * b * r * k]
            }
            ErrorKind::Custom => {
                let d = self.custom.as_ref().expect("custom density");
                [d.log_deriv(1, y), d.log_deriv(2, y), d.log_deriv(3, y)]
            }
        }
    }

    pub fn log_deriv(&self, order: u8, y: f64) -> Result<f64> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order {order} not in 1..=3")));
        }
        if !y.is_finite() {
            return Err(Error::DensityEvaluation { y });
        }
        let v = self.log_derivs(y)[order as usize - 1];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::DensityEvaluation { y })
        }
    }

    fn check_custom(&self) -> Result<()> {
        for &y in &SUPPORT_PROBES {
            let lp = self.ln_pdf(y);
            if !lp.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "{}: density must be positive on the whole real line (log f({y}) = {lp})",
                    self.label
                )));
            }
        }
        let opts = crate::quadrature::QuadOptions { abs_tol: 1e-11, ..Default::default() };
        let total = crate::quadrature::integrate_line(|y| Ok(self.pdf(y)), &opts)?;
        if (total.value - 1.0).abs() > 1e-10 + total.abs_error {
            return Err(Error::InvalidModel(format!(
                "{}: density integrates to {} instead of 1",
                self.label, total.value
            )));
        }
        if let Some((order, y, got, fd)) = finite_difference_mismatch(self, 1e-5, 1e-5) {
            return Err(Error::InvalidModel(format!(
                "{}: derivative d{order} at y = {y} is {got}, finite difference gives {fd}",
                self.label
            )));
        }
        Ok(())
    }
}

/// Compares each derivative with a central difference of the one below it
/// (order 0 being `ln f`) at 50 points in [-6, 6]. Returns the first failure.
pub fn finite_difference_mismatch(model: &ErrorModel, step: f64, rel_tol: f64) -> Option<(u8, f64, f64, f64)> {
    let lower = |order: u8, y: f64| -> f64 {
        if order == 0 {
            model.ln_pdf(y)
        } else {
            model.log_derivs(y)[order as usize - 1]
        }
    };
    for idx in 0..50 {
        let y = -6.0 + 12.0 * idx as f64 / 49.0;
        let d = model.log_derivs(y);
        for order in 1..=3u8 {
            let fd = (lower(order - 1, y + step) - lower(order - 1, y - step)) / (2.0 * step);
            let got = d[order as usize - 1];
            if !got.is_finite() || (got - fd).abs() > rel_tol * got.abs().max(1.0) {
                return Some((order, y, got, fd));
            }
        }
    }
    None
}

pub fn log_deriv(model: &ErrorModel, order: u8, y: f64) -> Result<f64> {
    model.log_deriv(order, y)
}

pub fn pdf_eval(model: &ErrorModel, y: f64) -> f64 {
    model.pdf(y)
}
