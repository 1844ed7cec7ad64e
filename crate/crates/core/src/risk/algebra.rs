//! Metric block, L-terms, geometric invariants and the bracket assembly.

use serde::Serialize;

use crate::eta::EtaIndex;
use crate::risk::moments::Aggregates;
use crate::risk::pattern::{four, pair_one, pair_pair, pair_two, triple};
use crate::risk::view::EtaView;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Inverse of the (intercept, scale) block of the Fisher information, with
/// the scale factors removed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricBlock<T = f64> {
    pub eta0020: T,
    pub delta: T,
    pub tg00: T,
    pub tg0s: T,
    pub tgss: T,
}

impl<T: Scalar> MetricBlock<T> {
    fn tg(&self) -> [[T; 2]; 2] {
        [[self.tg00.clone(), self.tg0s.clone()], [self.tg0s.clone(), self.tgss.clone()]]
    }
}

pub fn metric_block_in<T: Scalar>(view: &EtaView<T>) -> Result<MetricBlock<T>> {
    let e = |i, j, k, l| view.get(EtaIndex::new(i, j, k, l));
    let eta0020 = e(0, 0, 2, 0)?;
    let eta0101 = e(0, 1, 0, 1)?;
    let ss = T::from_i64(1) + T::from_i64(2) * e(0, 0, 1, 1)? + e(0, 0, 2, 2)?;
    let delta = eta0020.clone() * ss.clone() - eta0101.clone() * eta0101.clone();
    let (d, f) = (delta.to_f64(), eta0020.to_f64());
    if !(d.abs() >= 1e-12 * f.abs()) || f == 0.0 {
        return Err(Error::SingularInformation { delta: d });
    }
    Ok(MetricBlock {
        tg00: ss / delta.clone(),
        tg0s: eta0101 / delta.clone(),
        tgss: eta0020.clone() / delta.clone(),
        eta0020,
        delta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LTerms<T = f64> {
    pub l11: T,
    pub l12: T,
    pub l13: T,
    pub l14: T,
    pub l15: T,
    pub l21: T,
    pub l22: T,
    pub l23: T,
    pub l24: T,
    pub l25: T,
    pub l26: T,
}

/// Pattern values indexed by how many scale slots they carry.
struct PatternValues<T> {
    u2: [[T; 2]; 3],
    u3: [T; 4],
    u22: [[T; 3]; 3],
    u211: [[T; 3]; 3],
    u4: [T; 5],
}

impl<T: Scalar> PatternValues<T> {
    fn new(view: &EtaView<T>) -> Result<Self> {
        let c = |comb| view.combine(&comb);
        Ok(PatternValues {
            u2: [
                [c(pair_one(0, false))?, c(pair_one(0, true))?],
                [c(pair_one(1, false))?, c(pair_one(1, true))?],
                [c(pair_one(2, false))?, c(pair_one(2, true))?],
            ],
            u3: [c(triple(0))?, c(triple(1))?, c(triple(2))?, c(triple(3))?],
            u22: [
                [c(pair_pair(0, 0))?, c(pair_pair(0, 1))?, c(pair_pair(0, 2))?],
                [c(pair_pair(1, 0))?, c(pair_pair(1, 1))?, c(pair_pair(1, 2))?],
                [c(pair_pair(2, 0))?, c(pair_pair(2, 1))?, c(pair_pair(2, 2))?],
            ],
            u211: [
                [c(pair_two(0, 0))?, c(pair_two(0, 1))?, c(pair_two(0, 2))?],
                [c(pair_two(1, 0))?, c(pair_two(1, 1))?, c(pair_two(1, 2))?],
                [c(pair_two(2, 0))?, c(pair_two(2, 1))?, c(pair_two(2, 2))?],
            ],
            u4: [c(four(0))?, c(four(1))?, c(four(2))?, c(four(3))?, c(four(4))?],
        })
    }
}

/// Slot 0 is the intercept-type index, slot 1 the scale.
pub fn l_terms_in<T: Scalar>(view: &EtaView<T>, agg: &Aggregates, p: u32) -> Result<LTerms<T>> {
    let mb = metric_block_in(view)?;
    let pv = PatternValues::new(view)?;
    let tg = mb.tg();
    let i0 = T::from_i64(1) / mb.eta0020.clone();
    let i02 = i0.clone() * i0.clone();
    let i03 = i02.clone() * i0.clone();
    let p_t = T::from_i64(p as i64);
    let p2 = p_t.clone() * p_t.clone();
    let m2a = T::from_rational(&agg.m2a);
    let m2b = T::from_rational(&agg.m2b);
    let m1 = T::from_rational(&agg.m1);

    let u2 = |i: usize, j: usize, k: usize| pv.u2[i + j][k].clone();
    let u3 = |i: usize, j: usize, k: usize| pv.u3[i + j + k].clone();
    let u22 = |i: usize, j: usize, k: usize, l: usize| pv.u22[i + j][k + l].clone();
    let u211 = |i: usize, j: usize, k: usize, l: usize| pv.u211[i + j][k + l].clone();
    let u4 = |i: usize, j: usize, k: usize, l: usize| pv.u4[i + j + k + l].clone();

    let zero = || T::from_i64(0);
    let s2 = |f: &dyn Fn(usize, usize) -> T| {
        let mut acc = zero();
        for a in 0..2 {
            for b in 0..2 {
                acc = acc + tg[a][b].clone() * f(a, b);
            }
        }
        acc
    };
    let s4 = |f: &dyn Fn(usize, usize, usize, usize) -> T| {
        let mut acc = zero();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        acc = acc + tg[a][b].clone() * tg[c][d].clone() * f(a, b, c, d);
                    }
                }
            }
        }
        acc
    };
    let s6 = |f: &dyn Fn(usize, usize, usize, usize, usize, usize) -> T| {
        let mut acc = zero();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let w = tg[a][b].clone() * tg[c][d].clone();
                        for g in 0..2 {
                            for h in 0..2 {
                                acc = acc + w.clone() * tg[g][h].clone() * f(a, b, c, d, g, h);
                            }
                        }
                    }
                }
            }
        }
        acc
    };

    // Cross terms of the first kind: (ik)s against (jl)u.
    type F3<'a, T> = &'a dyn Fn(usize, usize, usize) -> T;
    let cross_a = |x: F3<T>, y: F3<T>| {
        i03.clone() * m2a.clone() * x(0, 0, 0) * y(0, 0, 0)
            + i02.clone() * p_t.clone() * s2(&|s, u| x(0, 0, s) * y(0, 0, u))
            + i02.clone() * p_t.clone() * s2(&|k, l| x(0, k, 0) * y(0, l, 0))
            + i02.clone() * p_t.clone() * s2(&|i, j| x(i, 0, 0) * y(j, 0, 0))
            + s6(&|i, j, k, l, s, u| x(i, k, s) * y(j, l, u))
    };
    // Cross terms of the second kind: (ij)k against l(su).
    let cross_b = |x: F3<T>, y: F3<T>, y_first: bool| {
        let yy = |a: usize, b: usize, c: usize| if y_first { y(a, b, c) } else { y(b, c, a) };
        i03.clone() * m2b.clone() * x(0, 0, 0) * y(0, 0, 0)
            + i02.clone() * p2.clone() * s2(&|k, l| x(0, 0, k) * yy(l, 0, 0))
            + i0.clone() * p_t.clone() * s4(&|k, l, s, u| x(0, 0, k) * yy(l, s, u))
            + i0.clone() * p_t.clone() * s4(&|i, j, k, l| x(i, j, k) * yy(l, 0, 0))
            + s6(&|i, j, k, l, s, u| x(i, j, k) * yy(l, s, u))
    };

    let l21 = cross_a(&u2, &u3);
    let l22 = cross_b(&u2, &u3, true);
    let l23 = cross_a(&u3, &u3);
    let l24 = cross_b(&u3, &u3, true);
    let l25 = cross_a(&u2, &u2);
    // u2(s,u,l): the pair sits on (s,u), the single on l.
    let l26 = cross_b(&u2, &u2, false);

    type F4<'a, T> = &'a dyn Fn(usize, usize, usize, usize) -> T;
    let quartic = |lead: T, x: F4<T>, cross: bool| {
        let first = i02.clone() * m1.clone() * lead;
        if cross {
            first
                + i0.clone() * p_t.clone() * s2(&|k, l| x(0, l, 0, k))
                + i0.clone() * p_t.clone() * s2(&|i, j| x(i, 0, j, 0))
        } else {
            first
                + i0.clone() * p_t.clone() * s2(&|k, l| x(0, 0, k, l))
                + i0.clone() * p_t.clone() * s2(&|i, j| x(i, j, 0, 0))
        }
    };
    let l11 = quartic(u211(0, 0, 0, 0), &u211, true) + s4(&|i, j, k, l| u211(i, l, j, k));
    let l12 = quartic(u22(0, 0, 0, 0), &u211, false) + s4(&|i, j, k, l| u211(i, j, k, l));
    let l13 = quartic(u4(0, 0, 0, 0), &u4, false) + s4(&|i, j, k, l| u4(i, j, k, l));
    let l14 = quartic(u22(0, 0, 0, 0), &u22, true) + s4(&|i, j, k, l| u22(i, k, j, l));
    let l15 = quartic(u22(0, 0, 0, 0), &u22, false) + s4(&|i, j, k, l| u22(i, j, k, l));

    Ok(LTerms { l11, l12, l13, l14, l15, l21, l22, l23, l24, l25, l26 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometricInvariants<T = f64> {
    pub ffe: T,
    pub tt1: T,
    pub tt2: T,
    pub rre: T,
    pub aaee1: T,
    pub aaee2: T,
    pub aaem1: T,
    pub aaem2: T,
}

/// `dim` is the dimension symbol subtracted in `aaee1` and `aaee2`.
pub fn geometric_invariants<T: Scalar>(l: &LTerms<T>, dim: T) -> GeometricInvariants<T> {
    let two = T::from_i64(2);
    let c = |x: &T| x.clone();
    GeometricInvariants {
        ffe: two.clone() * c(&l.l11) + c(&l.l12) + c(&l.l13) - two * c(&l.l21) - c(&l.l23) - c(&l.l22),
        tt1: c(&l.l23),
        tt2: c(&l.l24),
        rre: c(&l.l14) - c(&l.l15) + c(&l.l11) - c(&l.l12) - c(&l.l25) + c(&l.l26) + c(&l.l22) - c(&l.l21),
        aaee1: c(&l.l14) - c(&l.l25) - dim.clone(),
        aaee2: c(&l.l15) - c(&l.l26) - dim.clone() * dim,
        aaem1: c(&l.l11) + c(&l.l14) - c(&l.l25) - c(&l.l21),
        aaem2: c(&l.l12) + c(&l.l15) - c(&l.l26) - c(&l.l22),
    }
}

/// The bracket `A a'^2 + B a' + C` in `a' = (1 - alpha)/2`.
pub fn bracket<T: Scalar>(g: &GeometricInvariants<T>, dim: T) -> [T; 3] {
    let k = |v: i64| T::from_i64(v);
    let c = |x: &T| x.clone();
    let dd = k(3) * dim.clone() * dim.clone() + k(6) * dim;
    let a = k(3) * c(&g.ffe) + k(3) * c(&g.tt1) - k(6) * c(&g.aaem1) + k(6) * c(&g.aaee1) - k(3) * c(&g.aaem2)
        + k(3) * c(&g.aaee2)
        + dd.clone();
    let b = k(3) * c(&g.ffe) - k(5) * c(&g.tt1) - k(6) * c(&g.tt2) + k(6) * c(&g.aaem1) - k(6) * c(&g.aaee1)
        + k(3) * c(&g.aaem2)
        - k(3) * c(&g.aaee2)
        - dd;
    let cc = k(12) * c(&g.aaee1) - k(2) * c(&g.aaem1) - c(&g.aaem2) + c(&g.tt1) + k(9) * c(&g.tt2) + k(8) * c(&g.rre)
        - k(9) * c(&g.ffe);
    [a, b, cc]
}

/// `(qa, qb, qc)` with `q(alpha) = qa alpha^2 + qb alpha + qc`, i.e. the bracket
/// over 24 rewritten in `alpha`.
pub fn q_coefficients<T: Scalar>(g: &GeometricInvariants<T>, dim: T) -> [T; 3] {
    let [a, b, c] = bracket(g, dim);
    let k = |v: i64| T::from_i64(v);
    let qa = a.clone() / k(96);
    let qb = -(a.clone() + b.clone()) / k(48);
    let qc = (a / k(4) + b / k(2) + c) / k(24);
    [qa, qb, qc]
}
