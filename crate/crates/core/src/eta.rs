//! The moment functional `eta[i,j,k,l] = E[(ln f)'''^i (ln f)''^j (ln f)'^k y^l]`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error_models::{ErrorKind, ErrorModel};
use crate::exec::{map_indexed, Execution};
use crate::quadrature::{integrate_line, QuadOptions};
use crate::scalar::{binomial, double_factorial_odd, rational_to_f64, Rational, Scalar};
use crate::{Error, Result};

pub const I_MAX: u8 = 1;
pub const J_MAX: u8 = 2;
pub const K_MAX: u8 = 4;
pub const L_MAX: u8 = 4;
pub const GRID_LEN: usize = 2 * 3 * 5 * 5;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EtaIndex {
    pub i: u8,
    pub j: u8,
    pub k: u8,
    pub l: u8,
}

impl EtaIndex {
    pub const fn new(i: u8, j: u8, k: u8, l: u8) -> Self {
        EtaIndex { i, j, k, l }
    }

    pub fn in_grid(self) -> bool {
        self.i <= I_MAX && self.j <= J_MAX && self.k <= K_MAX && self.l <= L_MAX
    }

    /// Position in the flattened grid.
    pub fn slot(self) -> usize {
        ((self.i as usize * 3 + self.j as usize) * 5 + self.k as usize) * 5 + self.l as usize
    }

    pub fn grid() -> impl Iterator<Item = EtaIndex> {
        (0..=I_MAX).flat_map(|i| {
            (0..=J_MAX).flat_map(move |j| {
                (0..=K_MAX).flat_map(move |k| (0..=L_MAX).map(move |l| EtaIndex::new(i, j, k, l)))
            })
        })
    }

    /// The `"i,j,k,l"` key used in JSON output.
    pub fn key(self) -> String {
        format!("{},{},{},{}", self.i, self.j, self.k, self.l)
    }

    pub fn parse_key(s: &str) -> Option<EtaIndex> {
        let v: Vec<u8> = s.split(',').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
        match v[..] {
            [i, j, k, l] => Some(EtaIndex::new(i, j, k, l)).filter(|e| e.in_grid()),
            _ => None,
        }
    }

    fn check(self) -> Result<()> {
        if self.in_grid() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("eta index {self} outside the grid")))
        }
    }
}

impl fmt::Display for EtaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{}]", self.i, self.j, self.k, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaEntry {
    pub value: f64,
    pub exact: Option<Rational>,
    pub abs_error_bound: f64,
    pub method: EtaMethod,
}

impl EtaEntry {
    fn closed(exact: Rational) -> Self {
        EtaEntry { value: rational_to_f64(&exact), exact: Some(exact), abs_error_bound: 0.0, method: EtaMethod::ClosedForm }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EtaCell {
    Finite(EtaEntry),
    /// The defining integral does not converge for this model.
    Divergent,
}

/// Normal error: `(-1)^(j+k) (k+l-1)!!` for `i = 0` and even `k+l`, else 0.
pub fn eta_normal(index: EtaIndex) -> Rational {
    let EtaIndex { i, j, k, l } = index;
    let kl = (k + l) as u32;
    if i >= 1 || kl % 2 == 1 {
        return Rational::zero();
    }
    let v = Rational::from_integer(double_factorial_odd(kl / 2));
    if (j + k) % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `c(nu) H(a, nu + 2m)`: the t-density expectation of `y^a (1 + y^2/nu)^(-m)`
/// scaled back to the t normalisation. `None` when the integral diverges.
fn t_kernel<T: Scalar>(a: u32, m: u32, nu: &T, nu_f: f64) -> Option<T> {
    if (a as f64) >= nu_f + 2.0 * m as f64 {
        return None;
    }
    if a % 2 == 1 {
        return Some(T::from_i64(0));
    }
    let r = a / 2;
    let one = T::from_i64(1);
    let two = T::from_i64(2);
    let half_nu = nu.clone() / two.clone();
    let mut v = nu.powi(r)
        * T::from_rational(&Rational::new(double_factorial_odd(r), num_bigint::BigInt::from(2u64.pow(r))));
    for q in 0..m {
        v = v / ((nu.clone() + one.clone()) / two.clone() + T::from_i64(q as i64));
    }
    if m >= r {
        for q in 0..(m - r) {
            v = v * (half_nu.clone() + T::from_i64(q as i64));
        }
    } else {
        for q in 1..=(r - m) {
            v = v / (half_nu.clone() - T::from_i64(q as i64));
        }
    }
    Some(v)
}

fn eta_t_generic<T: Scalar>(index: EtaIndex, nu: &T) -> Result<T> {
    index.check()?;
    let nu_f = nu.to_f64();
    let EtaIndex { i, j, k, l } = index;
    let (i, j, k, l) = (i as u32, j as u32, k as u32, l as u32);
    let one = T::from_i64(1);
    let mut total = T::from_i64(0);
    let lead = (nu.clone() + one.clone()).powi(i + j + k);
    for s in 0..=i {
        for t in 0..=j {
            let a = i + k + l + 2 * s + 2 * t;
            let m = 3 * i + 2 * j + k;
            let kern = t_kernel(a, m, nu, nu_f).ok_or(Error::MomentDiverges { index })?;
            let sign = if (j + k + s + t) % 2 == 1 { -1 } else { 1 };
            let coeff = sign * (1i64 << i) * 3i64.pow(i - s) * binomial(i, s) * binomial(j, t);
            let term = T::from_i64(coeff) * lead.clone() / nu.powi(s + t + 2 * i + j + k) * kern;
            total = total + term;
        }
    }
    Ok(total)
}

/// Student t error with real `nu`.
pub fn eta_t(index: EtaIndex, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidModel(format!("t degrees of freedom must be positive, got {nu}")));
    }
    eta_t_generic(index, &nu)
}

/// Student t error with rational `nu`, in exact arithmetic.
pub fn eta_t_exact(index: EtaIndex, nu: &Rational) -> Result<Rational> {
    if nu <= &Rational::zero() {
        return Err(Error::InvalidModel("t degrees of freedom must be positive".into()));
    }
    eta_t_generic(index, nu)
}

fn ln_abs_pow(x: f64, e: u8, ln_acc: &mut f64, negative: &mut bool) -> bool {
    if e == 0 {
        return true;
    }
    if x == 0.0 {
        return false;
    }
    *ln_acc += e as f64 * x.abs().ln();
    if x < 0.0 && e % 2 == 1 {
        *negative = !*negative;
    }
    true
}

/// The integrand `d3^i d2^j d1^k y^l f(y)`, formed in log space so heavy tails
/// and large powers neither overflow nor produce `inf * 0`.
pub fn eta_integrand(model: &ErrorModel, index: EtaIndex, y: f64) -> Result<f64> {
    let lf = model.ln_pdf(y);
    if lf.is_nan() || lf == f64::INFINITY {
        return Err(Error::DensityEvaluation { y });
    }
    if lf == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let [d1, d2, d3] = model.log_derivs(y);
    if !(d1.is_finite() && d2.is_finite() && d3.is_finite()) {
        return Err(Error::DensityEvaluation { y });
    }
    let mut ln_acc = lf;
    let mut negative = false;
    let nonzero = ln_abs_pow(d3, index.i, &mut ln_acc, &mut negative)
        && ln_abs_pow(d2, index.j, &mut ln_acc, &mut negative)
        && ln_abs_pow(d1, index.k, &mut ln_acc, &mut negative)
        && ln_abs_pow(y, index.l, &mut ln_acc, &mut negative);
    if !nonzero {
        return Ok(0.0);
    }
    let v = ln_acc.exp();
    Ok(if negative { -v } else { v })
}

/// Adaptive quadrature of one entry.
pub fn eta_quadrature(model: &ErrorModel, index: EtaIndex, tol: f64) -> Result<EtaEntry> {
    index.check()?;
    let opts = QuadOptions { abs_tol: tol, ..Default::default() };
    let r = integrate_line(|y| eta_integrand(model, index, y), &opts)
        .map_err(|e| Error::EtaEntry { index, source: Box::new(e) })?;
    Ok(EtaEntry { value: r.value, exact: None, abs_error_bound: r.abs_error, method: EtaMethod::Quadrature })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct EtaTable {
    model: String,
    cells: BTreeMap<EtaIndex, EtaCell>,
    checks: Vec<InvariantCheck>,
}

impl EtaTable {
    /// Assembles a table and records the invariant checks. Missing grid
    /// entries are an error.
    pub fn from_cells(model: impl Into<String>, cells: BTreeMap<EtaIndex, EtaCell>) -> Result<Self> {
        if let Some(missing) = EtaIndex::grid().find(|ix| !cells.contains_key(ix)) {
            return Err(Error::EtaUnavailable { index: missing });
        }
        let mut table = EtaTable { model: model.into(), cells, checks: Vec::new() };
        table.checks = table.run_checks()?;
        Ok(table)
    }

    pub fn model_label(&self) -> &str {
        &self.model
    }

    pub fn cell(&self, index: EtaIndex) -> Option<&EtaCell> {
        self.cells.get(&index)
    }

    pub fn entry(&self, index: EtaIndex) -> Result<&EtaEntry> {
        match self.cells.get(&index) {
            Some(EtaCell::Finite(e)) => Ok(e),
            _ => Err(Error::EtaUnavailable { index }),
        }
    }

    pub fn get(&self, i: u8, j: u8, k: u8, l: u8) -> Result<f64> {
        self.entry(EtaIndex::new(i, j, k, l)).map(|e| e.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EtaIndex, &EtaCell)> {
        self.cells.iter()
    }

    /// True when every finite entry carries an exact rational.
    pub fn is_exact(&self) -> bool {
        self.cells.values().all(|c| match c {
            EtaCell::Finite(e) => e.exact.is_some(),
            EtaCell::Divergent => true,
        })
    }

    pub fn checks(&self) -> &[InvariantCheck] {
        &self.checks
    }

    pub fn invariants_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    /// Fails with the first violated invariant.
    pub fn verify(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.holds) {
            None => Ok(()),
            Some(c) => Err(Error::EtaInvariant(format!(
                "{} (residual {:e}, tolerance {:e})",
                c.name, c.residual, c.tolerance
            ))),
        }
    }

    fn run_checks(&self) -> Result<Vec<InvariantCheck>> {
        let e = |i, j, k, l| self.entry(EtaIndex::new(i, j, k, l));
        // Each check is a linear form c0 + sum(c * eta) that should vanish.
        let mut forms: Vec<(String, f64, Vec<(f64, EtaIndex)>)> = vec![
            ("normalisation eta[0,0,0,0] = 1".to_string(), -1.0, vec![(1.0, EtaIndex::new(0, 0, 0, 0))]),
            ("eta[0,0,1,0] = 0".to_string(), 0.0, vec![(1.0, EtaIndex::new(0, 0, 1, 0))]),
            (
                "eta[0,0,2,0] = -eta[0,1,0,0]".to_string(),
                0.0,
                vec![(1.0, EtaIndex::new(0, 0, 2, 0)), (1.0, EtaIndex::new(0, 1, 0, 0))],
            ),
            (
                "eta[0,0,2,1] = -eta[0,1,0,1]".to_string(),
                0.0,
                vec![(1.0, EtaIndex::new(0, 0, 2, 1)), (1.0, EtaIndex::new(0, 1, 0, 1))],
            ),
            (
                "1 + 2 eta[0,0,1,1] + eta[0,0,2,2] = -(1 + eta[0,1,0,2] + 2 eta[0,0,1,1])".to_string(),
                2.0,
                vec![
                    (4.0, EtaIndex::new(0, 0, 1, 1)),
                    (1.0, EtaIndex::new(0, 0, 2, 2)),
                    (1.0, EtaIndex::new(0, 1, 0, 2)),
                ],
            ),
        ];
        // d/dy [d2^j d1^k y^l f] integrates to zero whenever every entry it
        // produces is finite (the boundary term then vanishes too).
        for j in 0..=J_MAX {
            for k in 0..=K_MAX {
                for l in 0..=L_MAX {
                    let mut terms = vec![];
                    if j > 0 {
                        terms.push((j as f64, EtaIndex::new(1, j - 1, k, l)));
                    }
                    if k > 0 {
                        terms.push((k as f64, EtaIndex::new(0, j + 1, k - 1, l)));
                    }
                    if l > 0 {
                        terms.push((l as f64, EtaIndex::new(0, j, k, l - 1)));
                    }
                    terms.push((1.0, EtaIndex::new(0, j, k + 1, l)));
                    let usable = terms
                        .iter()
                        .all(|(_, ix)| ix.in_grid() && matches!(self.cell(*ix), Some(EtaCell::Finite(_))));
                    if usable {
                        forms.push((format!("integration by parts at j={j} k={k} l={l}"), 0.0, terms));
                    }
                }
            }
        }

        let mut out = Vec::with_capacity(forms.len() + 1);
        for (name, c0, terms) in forms {
            let mut residual = c0;
            let mut tol = 0.0;
            let mut scale = c0.abs();
            for (c, ix) in &terms {
                let entry = self.entry(*ix)?;
                residual += c * entry.value;
                tol += c.abs() * entry.abs_error_bound;
                scale += (c * entry.value).abs();
            }
            let tolerance = tol + 64.0 * f64::EPSILON * scale;
            out.push(InvariantCheck { name, residual, tolerance, holds: residual.abs() <= tolerance });
        }
        let fisher = e(0, 0, 2, 0)?;
        out.push(InvariantCheck {
            name: "eta[0,0,2,0] > 0".into(),
            residual: fisher.value,
            tolerance: fisher.abs_error_bound,
            holds: fisher.value - fisher.abs_error_bound > 0.0,
        });
        Ok(out)
    }
}

impl Serialize for EtaEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EtaEntry", 3)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("err", &self.abs_error_bound)?;
        st.serialize_field("method", &self.method)?;
        st.end()
    }
}

#[derive(Serialize)]
struct DivergentCell {
    value: Option<f64>,
    err: Option<f64>,
    method: &'static str,
}

impl Serialize for EtaTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.cells.len()))?;
        for (ix, cell) in &self.cells {
            match cell {
                EtaCell::Finite(e) => map.serialize_entry(&ix.key(), e)?,
                EtaCell::Divergent => {
                    map.serialize_entry(&ix.key(), &DivergentCell { value: None, err: None, method: "divergent" })?
                }
            }
        }
        map.end()
    }
}

/// Closed form for normal and t models, quadrature otherwise.
pub fn build_eta_table(model: &ErrorModel, tol: f64) -> Result<EtaTable> {
    build_eta_table_with(model, tol, Execution::default())
}

pub fn build_eta_table_with(model: &ErrorModel, tol: f64, exec: Execution) -> Result<EtaTable> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let grid: Vec<EtaIndex> = EtaIndex::grid().collect();
    let cells: Vec<Result<EtaCell>> = match model.kind() {
        ErrorKind::Normal => grid.iter().map(|&ix| Ok(EtaCell::Finite(EtaEntry::closed(eta_normal(ix))))).collect(),
        ErrorKind::StudentT(_) => {
            let nu = model.nu_exact().expect("t model carries exact nu").clone();
            map_indexed(exec, grid.len(), |n| match eta_t_exact(grid[n], &nu) {
                Ok(v) => Ok(EtaCell::Finite(EtaEntry::closed(v))),
                Err(Error::MomentDiverges { .. }) => Ok(EtaCell::Divergent),
                Err(e) => Err(e),
            })
        }
        ErrorKind::SkewNormal(_) | ErrorKind::Custom => {
            map_indexed(exec, grid.len(), |n| eta_quadrature(model, grid[n], tol).map(EtaCell::Finite))
        }
    };
    let mut map = BTreeMap::new();
    for (ix, cell) in grid.into_iter().zip(cells) {
        map.insert(ix, cell?);
    }
    let table = EtaTable::from_cells(model.label(), map)?;
    table.verify()?;
    Ok(table)
}

/// Quadrature for every grid entry, regardless of model family. Entries whose
/// integral diverges in closed form are marked divergent.
pub fn build_quadrature_table(model: &ErrorModel, tol: f64, exec: Execution) -> Result<EtaTable> {
    let grid: Vec<EtaIndex> = EtaIndex::grid().collect();
    let cells = map_indexed(exec, grid.len(), |n| {
        let ix = grid[n];
        if let ErrorKind::StudentT(nu) = model.kind() {
            if matches!(eta_t(ix, nu), Err(Error::MomentDiverges { .. })) {
                return Ok(EtaCell::Divergent);
            }
        }
        eta_quadrature(model, ix, tol).map(EtaCell::Finite)
    });
    let mut map = BTreeMap::new();
    for (ix, cell) in grid.into_iter().zip(cells) {
        map.insert(ix, cell?);
    }
    EtaTable::from_cells(model.label(), map)
}

/// Monte-Carlo estimate of every entry from `draws` samples of the error.
/// Error bounds are three standard errors. Invariants are recorded, not enforced.
pub fn build_monte_carlo_table(model: &ErrorModel, draws: usize, seed: u64, exec: Execution) -> Result<EtaTable> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CHUNKS: usize = 64;
    if draws < 2 {
        return Err(Error::InvalidArgument("need at least two draws".into()));
    }
    let sampler = crate::mc::ErrorSampler::new(model)?;
    let grid: Vec<EtaIndex> = EtaIndex::grid().collect();
    let partials = map_indexed(exec, CHUNKS, |c| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = draws / CHUNKS + usize::from(c < draws % CHUNKS);
        let mut sum = vec![0.0; grid.len()];
        let mut sq = vec![0.0; grid.len()];
        for _ in 0..count {
            let y = sampler.draw(&mut rng);
            let [d1, d2, d3] = model.log_derivs(y);
            if !(d1.is_finite() && d2.is_finite() && d3.is_finite()) {
                return Err(Error::DensityEvaluation { y });
            }
            let p1 = [1.0, d1, d1 * d1, d1 * d1 * d1, d1 * d1 * d1 * d1];
            let py = [1.0, y, y * y, y * y * y, y * y * y * y];
            for (n, ix) in grid.iter().enumerate() {
                let v = d3.powi(ix.i as i32) * d2.powi(ix.j as i32) * p1[ix.k as usize] * py[ix.l as usize];
                sum[n] += v;
                sq[n] += v * v;
            }
        }
        Ok((sum, sq))
    });
    let mut sum = vec![0.0; grid.len()];
    let mut sq = vec![0.0; grid.len()];
    for part in partials {
        let (s, q) = part?;
        for n in 0..grid.len() {
            sum[n] += s[n];
            sq[n] += q[n];
        }
    }
    let nf = draws as f64;
    let mut map = BTreeMap::new();
    for (n, ix) in grid.into_iter().enumerate() {
        let mean = sum[n] / nf;
        let var = ((sq[n] / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
        let se = (var / nf).sqrt();
        map.insert(
            ix,
            EtaCell::Finite(EtaEntry { value: mean, exact: None, abs_error_bound: 3.0 * se, method: EtaMethod::MonteCarlo }),
        );
    }
    EtaTable::from_cells(format!("{} (monte carlo)", model.label()), map)
}

/// Exact zero for the closed-form families when the integrand is odd.
pub fn vanishes_by_parity(model: &ErrorModel, index: EtaIndex) -> bool {
    model.is_symmetric() && (index.i + index.k + index.l) % 2 == 1
}

/// Convenience for tests and callers holding exact tables.
pub fn exact_value(table: &EtaTable, index: EtaIndex) -> Option<Rational> {
    table.entry(index).ok().and_then(|e| e.exact.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn grid_has_every_index_once() {
        let v: Vec<_> = EtaIndex::grid().collect();
        assert_eq!(v.len(), GRID_LEN);
        for (n, ix) in v.iter().enumerate() {
            assert_eq!(ix.slot(), n);
        }
        assert_eq!(EtaIndex::parse_key("1,2,4,4"), Some(EtaIndex::new(1, 2, 4, 4)));
        assert_eq!(EtaIndex::parse_key("2,0,0,0"), None);
    }

    #[test]
    fn normal_closed_form() {
        assert_eq!(eta_normal(EtaIndex::new(0, 0, 2, 0)), ratio(1, 1));
        assert_eq!(eta_normal(EtaIndex::new(1, 0, 1, 0)), ratio(0, 1));
        assert_eq!(eta_normal(EtaIndex::new(0, 0, 4, 0)), ratio(3, 1));
        assert_eq!(eta_normal(EtaIndex::new(0, 1, 0, 0)), ratio(-1, 1));
        assert_eq!(eta_normal(EtaIndex::new(0, 0, 3, 3)), ratio(-15, 1));
    }

    #[test]
    fn t_closed_form() {
        let nu = ratio(3, 1);
        assert_eq!(eta_t_exact(EtaIndex::new(0, 0, 2, 0), &nu).unwrap(), ratio(2, 3));
        assert_eq!(eta_t_exact(EtaIndex::new(0, 0, 1, 0), &nu).unwrap(), ratio(0, 1));
        assert_eq!(eta_t_exact(EtaIndex::new(0, 0, 0, 0), &nu).unwrap(), ratio(1, 1));
        assert_eq!(eta_t_exact(EtaIndex::new(0, 0, 0, 2), &nu).unwrap(), ratio(3, 1));
        assert!(matches!(eta_t_exact(EtaIndex::new(0, 0, 0, 4), &nu), Err(Error::MomentDiverges { .. })));
        assert!(matches!(eta_t_exact(EtaIndex::new(0, 0, 0, 3), &nu), Err(Error::MomentDiverges { .. })));
        let f = eta_t(EtaIndex::new(0, 0, 2, 0), 3.0).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn normal_table_is_exact_and_consistent() {
        let t = build_eta_table(&ErrorModel::normal(), DEFAULT_TOL).unwrap();
        assert!(t.is_exact());
        assert!(t.invariants_hold());
        assert_eq!(t.get(0, 0, 2, 2).unwrap(), 3.0);
        assert_eq!(t.get(0, 0, 1, 1).unwrap(), -1.0);
        assert_eq!(t.get(0, 1, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn t3_table_marks_divergent_entries() {
        let t = build_eta_table(&ErrorModel::student_t(3.0).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(t.cell(EtaIndex::new(0, 0, 0, 4)), Some(&EtaCell::Divergent));
        assert_eq!(t.cell(EtaIndex::new(0, 0, 0, 3)), Some(&EtaCell::Divergent));
        assert!(t.entry(EtaIndex::new(0, 0, 0, 2)).is_ok());
    }

    #[test]
    fn quadrature_reproduces_normal() {
        let e = eta_quadrature(&ErrorModel::normal(), EtaIndex::new(0, 0, 2, 0), 1e-10).unwrap();
        assert!((e.value - 1.0).abs() <= 1e-10);
        let sn0 = ErrorModel::skew_normal(0.0).unwrap();
        let e = eta_quadrature(&sn0, EtaIndex::new(0, 1, 0, 0), 1e-10).unwrap();
        assert!((e.value + 1.0).abs() <= 1e-10);
    }

    #[test]
    fn json_shape() {
        let t = build_eta_table(&ErrorModel::student_t(3.0).unwrap(), DEFAULT_TOL).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["0,0,2,0"]["method"], "closed_form");
        assert_eq!(v["0,0,2,0"]["err"], 0.0);
        assert_eq!(v["0,0,0,4"]["method"], "divergent");
        assert!(v["0,0,0,4"]["value"].is_null());
    }
}
