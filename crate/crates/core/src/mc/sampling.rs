use rand::Rng;
use rand_distr::{ChiSquared, Distribution, SkewNormal, StandardNormal, StudentT};

use crate::error_models::{ErrorKind, ErrorModel};
use crate::{Error, Result};

/// Draws standardized-family errors (location 0, scale 1).
#[derive(Clone, Debug)]
pub enum ErrorSampler {
    Normal,
    StudentT(StudentT<f64>),
    SkewNormal(SkewNormal<f64>),
}

impl ErrorSampler {
    pub fn new(model: &ErrorModel) -> Result<Self> {
        let bad = |m: String| Error::InvalidConfig(m);
        match model.kind() {
            ErrorKind::Normal => Ok(ErrorSampler::Normal),
            ErrorKind::StudentT(nu) => {
                StudentT::new(nu).map(ErrorSampler::StudentT).map_err(|e| bad(format!("t sampler: {e}")))
            }
            ErrorKind::SkewNormal(b) => SkewNormal::new(0.0, 1.0, b)
                .map(ErrorSampler::SkewNormal)
                .map_err(|e| bad(format!("skew-normal sampler: {e}"))),
            ErrorKind::Custom => Err(bad(format!(
                "no sampler for user-supplied density '{}'; simulation needs normal, t or skew-normal errors",
                model.label()
            ))),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ErrorSampler::Normal => StandardNormal.sample(rng),
            ErrorSampler::StudentT(d) => d.sample(rng),
            ErrorSampler::SkewNormal(d) => d.sample(rng),
        }
    }
}

/// Regressor distributions, each standardized to mean 0 and unit covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XDist {
    NormalP,
    /// Multivariate t; all components share one chi-square mixing draw.
    StudentTP { nu: f64 },
    /// Independent fair signs.
    Controlled,
    /// Independent Pareto(b) with unit minimum, centered and scaled.
    ParetoIid { b: f64 },
}

impl XDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            XDist::StudentTP { nu } if !(nu > 2.0) => {
                Err(Error::InvalidConfig(format!("t regressors need nu > 2 for a covariance, got {nu}")))
            }
            XDist::ParetoIid { b } if !(b > 2.0) => {
                Err(Error::InvalidConfig(format!("Pareto regressors need b > 2 for a covariance, got {b}")))
            }
            _ => Ok(()),
        }
    }

    /// Parses `normal`, `t[:nu]`, `controlled`, `pareto[:b]`; 4.2 by default.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let num = |default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad number '{a}' in '{spec}'"))),
            }
        };
        let d = match head {
            "normal" => XDist::NormalP,
            "t" => XDist::StudentTP { nu: num(4.2)? },
            "controlled" => XDist::Controlled,
            "pareto" => XDist::ParetoIid { b: num(4.2)? },
            _ => return Err(Error::InvalidArgument(format!("unknown x distribution '{spec}'"))),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            XDist::NormalP => out.iter_mut().for_each(|v| *v = StandardNormal.sample(rng)),
            XDist::StudentTP { nu } => {
                let w: f64 = ChiSquared::new(nu).expect("validated nu").sample(rng);
                let scale = ((nu - 2.0) / w).sqrt();
                for v in out.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *v = z * scale;
                }
            }
            XDist::Controlled => out.iter_mut().for_each(|v| *v = if rng.random::<bool>() { 1.0 } else { -1.0 }),
            XDist::ParetoIid { b } => {
                let mean = b / (b - 1.0);
                let sd = (b / ((b - 1.0) * (b - 1.0) * (b - 2.0))).sqrt();
                for v in out.iter_mut() {
                    // 1 - U lies in (0, 1], so the power stays finite.
                    let u = 1.0 - rng.random::<f64>();
                    *v = (u.powf(-1.0 / b) - mean) / sd;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(d: XDist) -> (f64, f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 400_000;
        let mut buf = [0.0; 2];
        let (mut m1, mut m2, mut m22) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            d.sample_into(&mut rng, &mut buf);
            m1 += buf[0];
            m2 += buf[0] * buf[0];
            m22 += buf[0] * buf[0] * buf[1] * buf[1];
        }
        let k = n as f64;
        (m1 / k, m2 / k, m22 / k)
    }

    #[test]
    fn presets_are_standardized() {
        for d in [XDist::NormalP, XDist::Controlled, XDist::ParetoIid { b: 4.2 }, XDist::StudentTP { nu: 6.0 }] {
            let (m1, m2, _) = moments(d);
            assert!(m1.abs() < 0.02, "{d:?} mean {m1}");
            assert!((m2 - 1.0).abs() < 0.05, "{d:?} var {m2}");
        }
    }

    #[test]
    fn t_preset_shares_mixing() {
        // m22 = (nu - 2) / (nu - 4)
        let (_, _, m22) = moments(XDist::StudentTP { nu: 12.0 });
        assert!((m22 - 1.25).abs() < 0.05, "{m22}");
    }

    #[test]
    fn custom_has_no_sampler() {
        struct Laplace;
        impl crate::error_models::Density for Laplace {
            fn ln_pdf(&self, y: f64) -> f64 {
                -(1.0 + y * y).sqrt() - 1.0
            }
            fn log_deriv(&self, order: u8, y: f64) -> f64 {
                let r = (1.0 + y * y).sqrt();
                match order {
                    1 => -y / r,
                    2 => -1.0 / (r * r * r),
                    _ => 3.0 * y / (r * r * r * r * r),
                }
            }
        }
        let m = ErrorModel::custom("smooth-laplace", Laplace);
        if let Ok(m) = m {
            assert!(matches!(ErrorSampler::new(&m), Err(Error::InvalidConfig(_))));
        }
        assert!(ErrorSampler::new(&ErrorModel::normal()).is_ok());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(XDist::from_spec("t").unwrap(), XDist::StudentTP { nu: 4.2 });
        assert_eq!(XDist::from_spec("pareto:5").unwrap(), XDist::ParetoIid { b: 5.0 });
        assert!(XDist::from_spec("pareto:1.5").is_err());
        assert!(XDist::from_spec("cauchy").is_err());
    }
}
