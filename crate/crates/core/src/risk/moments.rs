//! Regressor moment summaries.

use num_traits::Zero;
use serde::Serialize;

use crate::scalar::{parse_rational, rational_from_f64, rational_to_f64, ratio, Rational};
use crate::{Error, Result};

/// Moments of a coordinate-permutation invariant regressor distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Homogeneous {
    pub m4: Rational,
    pub m22: Rational,
    pub m3: Rational,
    pub m21: Rational,
    pub m111: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregates {
    pub m2a: Rational,
    pub m2b: Rational,
    pub m1: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AggregatesF64 {
    #[serde(rename = "M2a")]
    pub m2a: f64,
    #[serde(rename = "M2b")]
    pub m2b: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
}

impl Aggregates {
    pub fn from_f64(m2a: f64, m2b: f64, m1: f64) -> Result<Self> {
        Ok(Aggregates { m2a: rational_from_f64(m2a)?, m2b: rational_from_f64(m2b)?, m1: rational_from_f64(m1)? })
    }

    pub fn to_f64(&self) -> AggregatesF64 {
        AggregatesF64 { m2a: rational_to_f64(&self.m2a), m2b: rational_to_f64(&self.m2b), m1: rational_to_f64(&self.m1) }
    }
}

impl Homogeneous {
    pub fn from_f64(m4: f64, m22: f64, m3: f64, m21: f64, m111: f64) -> Result<Self> {
        Ok(Homogeneous {
            m4: rational_from_f64(m4)?,
            m22: rational_from_f64(m22)?,
            m3: rational_from_f64(m3)?,
            m21: rational_from_f64(m21)?,
            m111: rational_from_f64(m111)?,
        })
    }

    /// Only the fourth-order moments; third-order ones are zero.
    pub fn even(m4: Rational, m22: Rational) -> Self {
        Homogeneous { m4, m22, m3: Rational::zero(), m21: Rational::zero(), m111: Rational::zero() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MomentForm {
    Homogeneous(Homogeneous),
    Aggregated(Aggregates),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentSummary {
    pub p: u32,
    pub form: MomentForm,
}

impl MomentSummary {
    pub fn homogeneous(p: u32, h: Homogeneous) -> Self {
        MomentSummary { p, form: MomentForm::Homogeneous(h) }
    }

    pub fn aggregated(p: u32, a: Aggregates) -> Self {
        MomentSummary { p, form: MomentForm::Aggregated(a) }
    }

    /// Checks the moment inequalities. Not enforced by the algebra itself.
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidMoments("p must be positive".into()));
        }
        match &self.form {
            MomentForm::Homogeneous(h) => {
                if h.m4 < ratio(1, 1) {
                    return Err(Error::InvalidMoments(format!("m4 = {} is below 1", rational_to_f64(&h.m4))));
                }
                if h.m22 < Rational::zero() {
                    return Err(Error::InvalidMoments("m22 is negative".into()));
                }
            }
            MomentForm::Aggregated(a) => {
                for (name, v) in [("M2a", &a.m2a), ("M2b", &a.m2b), ("M1", &a.m1)] {
                    if v < &Rational::zero() {
                        return Err(Error::InvalidMoments(format!("{name} is negative")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_aggregated(&self) -> Aggregates {
        to_aggregated(self)
    }
}

/// Reduces homogeneous moments to the three aggregates (identity on aggregates).
pub fn to_aggregated(summary: &MomentSummary) -> Aggregates {
    match &summary.form {
        MomentForm::Aggregated(a) => a.clone(),
        MomentForm::Homogeneous(h) => {
            let p = ratio(summary.p as i64, 1);
            let p1 = &p - ratio(1, 1);
            let p2 = &p - ratio(2, 1);
            let m3sq = &h.m3 * &h.m3;
            let m21sq = &h.m21 * &h.m21;
            let m111sq = &h.m111 * &h.m111;
            let m2a = &p * &m3sq + ratio(3, 1) * &p * &p1 * &m21sq + &p * &p1 * &p2 * m111sq;
            let m2b = &p * &m3sq + &p * &p1 * &p1 * &m21sq + ratio(2, 1) * &p * &p1 * &h.m3 * &h.m21;
            let m1 = &p * &h.m4 + &p * &p1 * &h.m22;
            Aggregates { m2a, m2b, m1 }
        }
    }
}

/// The four regressor distributions used in the worked examples.
#[derive(Clone, Debug, PartialEq)]
pub enum XPreset {
    /// Standard p-variate normal.
    Normal,
    /// Standardised multivariate t with `nu > 4` degrees of freedom.
    StudentT { nu: Rational },
    /// Independent fair +-1 coordinates.
    Controlled,
    /// Independent standardised Pareto(b) coordinates, `b > 4`.
    Pareto { b: Rational },
}

impl XPreset {
    pub fn student_t_default() -> Self {
        XPreset::StudentT { nu: ratio(21, 5) }
    }

    pub fn pareto_default() -> Self {
        XPreset::Pareto { b: ratio(21, 5) }
    }

    /// Parses `normal`, `t[:nu]`, `controlled` or `pareto[:b]`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let preset = match (head, arg) {
            ("normal", None) => XPreset::Normal,
            ("controlled", None) => XPreset::Controlled,
            ("t", None) => Self::student_t_default(),
            ("t", Some(a)) => XPreset::StudentT { nu: parse_rational(a)? },
            ("pareto", None) => Self::pareto_default(),
            ("pareto", Some(a)) => XPreset::Pareto { b: parse_rational(a)? },
            _ => return Err(Error::InvalidArgument(format!("unknown x preset `{spec}`"))),
        };
        preset.homogeneous().map(|_| preset)
    }

    pub fn homogeneous(&self) -> Result<Homogeneous> {
        let one = ratio(1, 1);
        match self {
            XPreset::Normal => Ok(Homogeneous::even(ratio(3, 1), one)),
            XPreset::Controlled => Ok(Homogeneous::even(one.clone(), one)),
            XPreset::StudentT { nu } => {
                if nu <= &ratio(4, 1) {
                    return Err(Error::InvalidMoments("multivariate t preset needs nu > 4".into()));
                }
                let m22 = (nu - ratio(2, 1)) / (nu - ratio(4, 1));
                Ok(Homogeneous::even(ratio(3, 1) * &m22, m22))
            }
            XPreset::Pareto { b } => {
                if b <= &ratio(4, 1) {
                    return Err(Error::InvalidMoments("Pareto preset needs b > 4".into()));
                }
                let b2 = b * b;
                let b3 = &b2 * b;
                let excess = ratio(6, 1) * (&b3 + &b2 - ratio(6, 1) * b - ratio(2, 1))
                    / (b * (b - ratio(3, 1)) * (b - ratio(4, 1)));
                let m4 = excess + ratio(3, 1);
                let bf = rational_to_f64(b);
                let skew = 2.0 * (1.0 + bf) / (bf - 3.0) * ((bf - 2.0) / bf).sqrt();
                Ok(Homogeneous { m4, m22: one, m3: rational_from_f64(skew)?, m21: Rational::zero(), m111: Rational::zero() })
            }
        }
    }

    /// Homogeneous form, except Pareto: its skewness is irrational but only
    /// its square enters, so the aggregates are returned exactly instead.
    pub fn summary(&self, p: u32) -> Result<MomentSummary> {
        let h = self.homogeneous()?;
        match self {
            XPreset::Pareto { b } => {
                let pr = ratio(p as i64, 1);
                let m3sq = ratio(4, 1) * (b + ratio(1, 1)) * (b + ratio(1, 1)) * (b - ratio(2, 1))
                    / ((b - ratio(3, 1)) * (b - ratio(3, 1)) * b);
                let m1 = &pr * &h.m4 + &pr * (&pr - ratio(1, 1)) * &h.m22;
                let m2 = &pr * m3sq;
                Ok(MomentSummary::aggregated(p, Aggregates { m2a: m2.clone(), m2b: m2, m1 }))
            }
            _ => Ok(MomentSummary::homogeneous(p, h)),
        }
    }
}
