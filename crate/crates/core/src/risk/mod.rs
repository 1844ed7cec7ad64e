//! From an eta table and regressor moments to `ED(alpha, n) = main/n + q(alpha)/n^2`.

pub mod algebra;
pub mod moments;
pub mod pattern;
pub mod view;

use serde::{Serialize, Serializer};

use crate::eta::EtaTable;
use crate::scalar::{ratio, Bounded, Rational, Scalar};
use crate::Result;

pub use algebra::{geometric_invariants, GeometricInvariants, LTerms, MetricBlock};
pub use moments::{to_aggregated, Aggregates, AggregatesF64, Homogeneous, MomentForm, MomentSummary, XPreset};
pub use pattern::{eta_pattern, Pattern, Slot};
pub use view::EtaView;

/// Reference divergence index for the validity region.
pub const ALPHA_REF: f64 = -1.0;

pub fn metric_block(table: &EtaTable) -> Result<MetricBlock<f64>> {
    algebra::metric_block_in(&EtaView::<f64>::from_table(table)?)
}

pub fn l_terms(table: &EtaTable, moments: &MomentSummary) -> Result<LTerms<f64>> {
    algebra::l_terms_in(&EtaView::<f64>::from_table(table)?, &moments.to_aggregated(), moments.p)
}

/// Exact L-terms; needs a table whose entries are all rational.
pub fn l_terms_exact(table: &EtaTable, moments: &MomentSummary) -> Result<LTerms<Rational>> {
    algebra::l_terms_in(&EtaView::<Rational>::from_table(table)?, &moments.to_aggregated(), moments.p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskExpansion {
    pub p: u32,
    /// `(p + 2) / 2`
    pub main: f64,
    /// `[qa, qb, qc]`
    pub q: [f64; 3],
    #[serde(serialize_with = "ser_exact", skip_serializing_if = "Option::is_none")]
    pub q_exact: Option<[Rational; 3]>,
    /// Bound on the absolute error of each float coefficient.
    pub coeff_error: f64,
    pub validity_n_min: u64,
    /// Diagnostic: the same expansion with `p + 2` as the dimension symbol.
    pub q_full_dimension: [f64; 3],
}

fn ser_exact<S: Serializer>(v: &Option<[Rational; 3]>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(q) => q.iter().map(|r| r.to_string()).collect::<Vec<_>>().serialize(s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiskValue {
    pub value: f64,
    /// Set when `n` lies below the validity region.
    pub below_validity: bool,
}

impl RiskExpansion {
    pub fn q_at(&self, alpha: f64) -> f64 {
        let [a, b, c] = self.q;
        (a * alpha + b) * alpha + c
    }

    pub fn q_exact_at(&self, alpha: &Rational) -> Option<Rational> {
        self.q_exact.as_ref().map(|[a, b, c]| (a * alpha + b) * alpha + c)
    }

    pub fn main_exact(&self) -> Rational {
        ratio(self.p as i64 + 2, 2)
    }

    pub fn ed(&self, alpha: f64, n: f64) -> f64 {
        self.main / n + self.q_at(alpha) / (n * n)
    }

    pub fn evaluate(&self, alpha: f64, n: u64) -> RiskValue {
        RiskValue { value: self.ed(alpha, n as f64), below_validity: n < self.validity_n_min }
    }
}

pub fn evaluate_risk(expansion: &RiskExpansion, alpha: f64, n: u64) -> RiskValue {
    expansion.evaluate(alpha, n)
}

/// Smallest `n >= p + 3` where the truncated risk at the reference index is
/// positive and decreasing.
pub fn validity_n_min(main: f64, q_ref: f64, p: u32) -> u64 {
    let ok = |n: u64| {
        let n = n as f64;
        main * n + q_ref > 0.0 && main * n * (n + 1.0) + q_ref * (2.0 * n + 1.0) > 0.0
    };
    let lo = p as u64 + 3;
    if ok(lo) {
        return lo;
    }
    // The predicate is monotone in n: gallop, then bisect.
    let mut hi = lo.max(1) * 2;
    while !ok(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn dims<T: Scalar>(p: u32) -> (T, T) {
    (T::from_i64(p as i64), T::from_i64(p as i64 + 2))
}

fn assemble<T: Scalar>(l: &LTerms<T>, p: u32) -> ([T; 3], [T; 3]) {
    let (d, d_full) = dims::<T>(p);
    let q = algebra::q_coefficients(&geometric_invariants(l, d.clone()), d);
    let q_full = algebra::q_coefficients(&geometric_invariants(l, d_full.clone()), d_full);
    (q, q_full)
}

fn to_f64s<T: Scalar>(v: &[T; 3]) -> [f64; 3] {
    [v[0].to_f64(), v[1].to_f64(), v[2].to_f64()]
}

fn finish(p: u32, q: [f64; 3], q_exact: Option<[Rational; 3]>, coeff_error: f64, q_full: [f64; 3]) -> RiskExpansion {
    let main = (p as f64 + 2.0) / 2.0;
    let q_ref = (q[0] * ALPHA_REF + q[1]) * ALPHA_REF + q[2];
    RiskExpansion { p, main, q, q_exact, coeff_error, validity_n_min: validity_n_min(main, q_ref, p), q_full_dimension: q_full }
}

/// Float expansion from already computed invariants.
pub fn risk_expansion(inv: &GeometricInvariants<f64>, p: u32) -> RiskExpansion {
    let d = p as f64;
    let q = algebra::q_coefficients(inv, d);
    let full = GeometricInvariants {
        aaee1: inv.aaee1 + d - (d + 2.0),
        aaee2: inv.aaee2 + d * d - (d + 2.0) * (d + 2.0),
        ..inv.clone()
    };
    let q_full = algebra::q_coefficients(&full, d + 2.0);
    finish(p, q, None, 0.0, q_full)
}

/// Full pipeline. Exact when every table entry is rational, otherwise floats
/// with propagated error bounds.
pub fn expand(table: &EtaTable, moments: &MomentSummary) -> Result<RiskExpansion> {
    let agg = moments.to_aggregated();
    if table.is_exact() {
        let l = algebra::l_terms_in(&EtaView::<Rational>::from_table(table)?, &agg, moments.p)?;
        let (q, q_full) = assemble(&l, moments.p);
        return Ok(finish(moments.p, to_f64s(&q), Some(q), 0.0, to_f64s(&q_full)));
    }
    let l = algebra::l_terms_in(&EtaView::<Bounded>::from_table(table)?, &agg, moments.p)?;
    let (q, q_full) = assemble(&l, moments.p);
    let err = q.iter().map(|b| b.err).fold(0.0, f64::max);
    Ok(finish(moments.p, to_f64s(&q), None, err, to_f64s(&q_full)))
}
