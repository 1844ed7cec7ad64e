//! Binomial benchmark and the sample-size indicators derived from it.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::risk::RiskExpansion;
use crate::{Error, Result};

fn alpha_prime(alpha: f64) -> f64 {
    (1.0 - alpha) / 2.0
}

/// `1/m + 1/(1-m)`, at least 4.
pub fn binomial_m(m: f64) -> f64 {
    1.0 / m + 1.0 / (1.0 - m)
}

/// Second-order coefficient of the binomial risk for a given `M`.
pub fn binomial_q(big_m: f64, alpha: f64) -> f64 {
    let a = alpha_prime(alpha);
    (a * a * (3.0 * big_m - 9.0) + a * (-11.0 * big_m + 29.0) + 10.0 * big_m - 22.0) / 24.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinomialRisk {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

impl BinomialRisk {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidArgument(format!("success probability must lie in (0,1), got {m}")));
        }
        Ok(BinomialRisk { m, big_m: binomial_m(m) })
    }

    pub fn q(&self, alpha: f64) -> f64 {
        binomial_q(self.big_m, alpha)
    }

    pub fn ed(&self, alpha: f64, n: f64) -> f64 {
        0.5 / n + self.q(alpha) / (n * n)
    }
}

/// Truncated risk of the binomial model B(n, m).
pub fn binomial_risk(m: f64, alpha: f64, n: u64) -> Result<f64> {
    Ok(BinomialRisk::new(m)?.ed(alpha, n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ide {
    Root { m: f64, other: f64 },
    NoRealRoot,
}

impl Ide {
    pub fn value(&self) -> Option<f64> {
        match self {
            Ide::Root { m, .. } => Some(*m),
            Ide::NoRealRoot => None,
        }
    }
}

impl fmt::Display for Ide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ide::Root { m, .. } => write!(f, "{m:.2}"),
            Ide::NoRealRoot => f.write_str("*"),
        }
    }
}

impl Serialize for Ide {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ide::Root { m, .. } => s.serialize_f64(*m),
            Ide::NoRealRoot => s.serialize_str("*"),
        }
    }
}

fn ide_from_big_m(big_m: f64) -> Ide {
    if !(big_m >= 4.0) || !big_m.is_finite() {
        return Ide::NoRealRoot;
    }
    let r = (1.0 - 4.0 / big_m).max(0.0).sqrt();
    Ide::Root { m: (1.0 + r) / 2.0, other: (1.0 - r) / 2.0 }
}

/// Binomial probability whose estimation is as hard as the regression at
/// equal parameter-to-sample ratio. Independent of the benchmark size.
pub fn ide(expansion: &RiskExpansion, alpha: f64) -> Ide {
    let a = alpha_prime(alpha);
    let slope = 3.0 * a * a - 11.0 * a + 10.0;
    let constant = -9.0 * a * a + 29.0 * a - 22.0;
    if slope == 0.0 {
        return Ide::NoRealRoot;
    }
    let d = expansion.p as f64 + 2.0;
    let target = 24.0 * expansion.q_at(alpha) / (d * d);
    ide_from_big_m((target - constant) / slope)
}

/// The same equation solved with an explicit benchmark size `k`.
pub fn ide_at_k(expansion: &RiskExpansion, alpha: f64, k: u64) -> Ide {
    let a = alpha_prime(alpha);
    let slope = 3.0 * a * a - 11.0 * a + 10.0;
    let constant = -9.0 * a * a + 29.0 * a - 22.0;
    if slope == 0.0 {
        return Ide::NoRealRoot;
    }
    let k = k as f64;
    let n = (expansion.p as f64 + 2.0) * k;
    let gap = expansion.ed(alpha, n) - 0.5 / k;
    ide_from_big_m((24.0 * k * k * gap - constant) / slope)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RssOptions {
    pub k_start: u32,
    pub k_step: u32,
    pub k_max: u32,
}

impl Default for RssOptions {
    fn default() -> Self {
        RssOptions { k_start: 10, k_step: 10, k_max: 1000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rss {
    pub n: u64,
    pub k: u32,
    /// Unrounded root.
    pub n_real: f64,
}

impl fmt::Display for Rss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.n, self.k)
    }
}

/// Larger root of `b n^2 - main n - q = 0`, if real.
fn larger_root(b: f64, main: f64, q: f64) -> Option<f64> {
    let disc = main * main + 4.0 * b * q;
    (disc >= 0.0 && b > 0.0).then(|| (main + disc.sqrt()) / (2.0 * b))
}

/// Regression sample size matching a fair-coin benchmark of size `k`,
/// escalating `k` until the root lies in the validity region.
pub fn rss(expansion: &RiskExpansion, alpha: f64) -> Result<Rss> {
    rss_with(expansion, alpha, RssOptions::default())
}

pub fn rss_with(expansion: &RiskExpansion, alpha: f64, opts: RssOptions) -> Result<Rss> {
    if opts.k_start == 0 || opts.k_step == 0 {
        return Err(Error::InvalidArgument("benchmark sizes must be positive".into()));
    }
    let q = expansion.q_at(alpha);
    let coin = BinomialRisk { m: 0.5, big_m: 4.0 };
    let mut k = opts.k_start;
    while k <= opts.k_max {
        let b = coin.ed(alpha, k as f64);
        if let Some(root) = larger_root(b, expansion.main, q) {
            let n = root.round();
            if n >= expansion.validity_n_min as f64 {
                return Ok(Rss { n: n as u64, k, n_real: root });
            }
        }
        k += opts.k_step;
    }
    Err(Error::NoBenchmark { k_max: opts.k_max })
}

/// Size of a fair-coin experiment as hard as the regression at `n_actual`.
pub fn coin_equivalent(expansion: &RiskExpansion, alpha: f64, n_actual: u64) -> Result<u64> {
    if n_actual < expansion.p as u64 + 3 {
        return Err(Error::InvalidArgument(format!("n_actual must be at least p + 3 = {}", expansion.p + 3)));
    }
    let target = expansion.ed(alpha, n_actual as f64);
    let qb = binomial_q(4.0, alpha);
    larger_root(target, 0.5, qb)
        .map(|n| n.round() as u64)
        .ok_or_else(|| Error::InvalidArgument(format!("no coin-toss size matches risk {target}")))
}
