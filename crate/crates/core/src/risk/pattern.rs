//! Expectations of products of score derivatives, as linear combinations of
//! eta entries. Index slots are `B` (a regression coefficient) or `S` (the
//! scale); grouping marks which indices share a derivative.

use std::fmt;
use std::str::FromStr;

use crate::eta::{EtaIndex, EtaTable};
use crate::risk::view::EtaView;
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    B,
    S,
}

impl Slot {
    fn count(slots: &[Slot]) -> usize {
        slots.iter().filter(|s| **s == Slot::S).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// `(xy)z`
    PairOne([Slot; 2], Slot),
    /// `xyz`
    Triple([Slot; 3]),
    /// `(xy)(zw)`
    PairPair([Slot; 2], [Slot; 2]),
    /// `(xyz)w`
    TripleOne([Slot; 3], Slot),
    /// `(xy)zw`
    PairTwo([Slot; 2], [Slot; 2]),
    /// `xyzw`
    Four([Slot; 4]),
}

/// `sum(coef * eta)`, with `None` standing for the constant 1.
pub type Combination = Vec<(i64, Option<EtaIndex>)>;

const fn e(i: u8, j: u8, k: u8, l: u8) -> Option<EtaIndex> {
    Some(EtaIndex::new(i, j, k, l))
}

/// `(xy)z` by number of `S` in the pair and whether `z` is `S`.
pub(crate) fn pair_one(pair_s: usize, last_s: bool) -> Combination {
    match (pair_s, last_s) {
        (0, false) => vec![(-1, e(0, 1, 1, 0))],
        (1, false) => vec![(-1, e(0, 1, 1, 1)), (-1, e(0, 0, 2, 0))],
        (0, true) => vec![(-1, e(0, 1, 0, 0)), (-1, e(0, 1, 1, 1))],
        (1, true) => vec![(-1, e(0, 1, 0, 1)), (-1, e(0, 1, 1, 2)), (-1, e(0, 0, 2, 1))],
        (2, false) => vec![(-1, e(0, 1, 1, 2)), (-2, e(0, 0, 2, 1))],
        _ => vec![(-1, None), (-3, e(0, 0, 1, 1)), (-1, e(0, 1, 0, 2)), (-2, e(0, 0, 2, 2)), (-1, e(0, 1, 1, 3))],
    }
}

pub(crate) fn triple(s: usize) -> Combination {
    match s {
        0 => vec![(-1, e(0, 0, 3, 0))],
        1 => vec![(-1, e(0, 0, 2, 0)), (-1, e(0, 0, 3, 1))],
        2 => vec![(-1, e(0, 0, 1, 0)), (-2, e(0, 0, 2, 1)), (-1, e(0, 0, 3, 2))],
        _ => vec![(-1, None), (-3, e(0, 0, 1, 1)), (-3, e(0, 0, 2, 2)), (-1, e(0, 0, 3, 3))],
    }
}

pub(crate) fn pair_pair(a: usize, b: usize) -> Combination {
    match (a.min(b), a.max(b)) {
        (0, 0) => vec![(1, e(0, 2, 0, 0))],
        (0, 1) => vec![(1, e(0, 2, 0, 1)), (1, e(0, 1, 1, 0))],
        (1, 1) => vec![(1, e(0, 2, 0, 2)), (2, e(0, 1, 1, 1)), (1, e(0, 0, 2, 0))],
        (0, 2) => vec![(1, e(0, 1, 0, 0)), (1, e(0, 2, 0, 2)), (2, e(0, 1, 1, 1))],
        (1, 2) => vec![(1, e(0, 1, 0, 1)), (1, e(0, 2, 0, 3)), (3, e(0, 1, 1, 2)), (2, e(0, 0, 2, 1))],
        _ => vec![
            (1, None),
            (1, e(0, 2, 0, 4)),
            (4, e(0, 0, 2, 2)),
            (2, e(0, 1, 0, 2)),
            (4, e(0, 0, 1, 1)),
            (4, e(0, 1, 1, 3)),
        ],
    }
}

pub(crate) fn triple_one(triple_s: usize, last_s: bool) -> Combination {
    match (triple_s, last_s) {
        (0, false) => vec![(1, e(1, 0, 1, 0))],
        (0, true) => vec![(1, e(1, 0, 0, 0)), (1, e(1, 0, 1, 1))],
        (1, false) => vec![(2, e(0, 1, 1, 0)), (1, e(1, 0, 1, 1))],
        (1, true) => vec![(2, e(0, 1, 0, 0)), (1, e(1, 0, 0, 1)), (2, e(0, 1, 1, 1)), (1, e(1, 0, 1, 2))],
        (2, false) => vec![(4, e(0, 1, 1, 1)), (2, e(0, 0, 2, 0)), (1, e(1, 0, 1, 2))],
        (2, true) => vec![
            (4, e(0, 1, 0, 1)),
            (1, e(1, 0, 0, 2)),
            (4, e(0, 1, 1, 2)),
            (2, e(0, 0, 2, 1)),
            (1, e(1, 0, 1, 3)),
        ],
        (_, false) => vec![(6, e(0, 1, 1, 2)), (6, e(0, 0, 2, 1)), (1, e(1, 0, 1, 3))],
        (_, true) => vec![
            (2, None),
            (6, e(0, 1, 0, 2)),
            (6, e(0, 0, 1, 1)),
            (1, e(1, 0, 0, 3)),
            (2, e(0, 0, 1, 1)),
            (6, e(0, 1, 1, 3)),
            (6, e(0, 0, 2, 2)),
            (1, e(1, 0, 1, 4)),
        ],
    }
}

/// `(xy)zw` by number of `S` in the pair and among the two singles.
pub(crate) fn pair_two(pair_s: usize, rest_s: usize) -> Combination {
    match (pair_s, rest_s) {
        (0, 0) => vec![(1, e(0, 1, 2, 0))],
        (0, 1) => vec![(1, e(0, 1, 1, 0)), (1, e(0, 1, 2, 1))],
        (1, 0) => vec![(1, e(0, 1, 2, 1)), (1, e(0, 0, 3, 0))],
        (0, 2) => vec![(1, e(0, 1, 0, 0)), (2, e(0, 1, 1, 1)), (1, e(0, 1, 2, 2))],
        (1, 1) => vec![(1, e(0, 1, 1, 1)), (1, e(0, 0, 2, 0)), (1, e(0, 1, 2, 2)), (1, e(0, 0, 3, 1))],
        (2, 0) => vec![(1, e(0, 0, 2, 0)), (2, e(0, 0, 3, 1)), (1, e(0, 1, 2, 2))],
        (1, 2) => vec![
            (1, e(0, 1, 0, 1)),
            (2, e(0, 1, 1, 2)),
            (2, e(0, 0, 2, 1)),
            (1, e(0, 1, 2, 3)),
            (1, e(0, 0, 3, 2)),
        ],
        // The published display lists eta[0,0,2,1] twice (weights 2 and 1).
        (2, 1) => vec![
            (2, e(0, 0, 2, 1)),
            (1, e(0, 1, 1, 2)),
            (1, e(0, 0, 2, 1)),
            (2, e(0, 0, 3, 2)),
            (1, e(0, 1, 2, 3)),
        ],
        _ => vec![
            (1, None),
            (4, e(0, 0, 1, 1)),
            (1, e(0, 1, 0, 2)),
            (5, e(0, 0, 2, 2)),
            (2, e(0, 1, 1, 3)),
            (2, e(0, 0, 3, 3)),
            (1, e(0, 1, 2, 4)),
        ],
    }
}

pub(crate) fn four(s: usize) -> Combination {
    match s {
        0 => vec![(1, e(0, 0, 4, 0))],
        1 => vec![(1, e(0, 0, 3, 0)), (1, e(0, 0, 4, 1))],
        2 => vec![(1, e(0, 0, 2, 0)), (2, e(0, 0, 3, 1)), (1, e(0, 0, 4, 2))],
        3 => vec![(3, e(0, 0, 2, 1)), (3, e(0, 0, 3, 2)), (1, e(0, 0, 4, 3))],
        _ => vec![(1, None), (4, e(0, 0, 1, 1)), (6, e(0, 0, 2, 2)), (4, e(0, 0, 3, 3)), (1, e(0, 0, 4, 4))],
    }
}

impl Pattern {
    /// The linear combination of eta entries this pattern equals.
    pub fn combination(&self) -> Combination {
        match self {
            Pattern::PairOne(p, z) => pair_one(Slot::count(p), *z == Slot::S),
            Pattern::Triple(t) => triple(Slot::count(t)),
            Pattern::PairPair(a, b) => pair_pair(Slot::count(a), Slot::count(b)),
            Pattern::TripleOne(t, w) => triple_one(Slot::count(t), *w == Slot::S),
            Pattern::PairTwo(p, r) => pair_two(Slot::count(p), Slot::count(r)),
            Pattern::Four(f) => four(Slot::count(f)),
        }
    }

    pub fn evaluate<T: Scalar>(&self, view: &EtaView<T>) -> Result<T> {
        view.combine(&self.combination())
    }
}

/// Value of a pattern against a table.
pub fn eta_pattern(table: &EtaTable, pattern: &Pattern) -> Result<f64> {
    let view = EtaView::<f64>::from_table(table)?;
    pattern.evaluate(&view)
}

fn parse_slots(s: &str, full: &str) -> Result<Vec<Slot>> {
    s.chars()
        .map(|c| match c {
            'B' => Ok(Slot::B),
            'S' => Ok(Slot::S),
            _ => Err(Error::UnknownPattern(full.to_string())),
        })
        .collect()
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::UnknownPattern(text.to_string());
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        // Split into groups: parenthesised runs and the trailing free slots.
        let mut groups: Vec<Vec<Slot>> = Vec::new();
        let mut free: Vec<Slot> = Vec::new();
        let mut rest = t.as_str();
        while !rest.is_empty() {
            if let Some(after) = rest.strip_prefix('(') {
                if !free.is_empty() {
                    return Err(bad());
                }
                let close = after.find(')').ok_or_else(bad)?;
                groups.push(parse_slots(&after[..close], text)?);
                rest = &after[close + 1..];
            } else {
                let end = rest.find('(').unwrap_or(rest.len());
                free.extend(parse_slots(&rest[..end], text)?);
                rest = &rest[end..];
            }
        }
        let arr2 = |v: &[Slot]| -> [Slot; 2] { [v[0], v[1]] };
        let arr3 = |v: &[Slot]| -> [Slot; 3] { [v[0], v[1], v[2]] };
        let shapes: Vec<usize> = groups.iter().map(Vec::len).collect();
        match (shapes.as_slice(), free.len()) {
            ([2], 1) => Ok(Pattern::PairOne(arr2(&groups[0]), free[0])),
            ([], 3) => Ok(Pattern::Triple(arr3(&free))),
            ([2, 2], 0) => Ok(Pattern::PairPair(arr2(&groups[0]), arr2(&groups[1]))),
            ([3], 1) => Ok(Pattern::TripleOne(arr3(&groups[0]), free[0])),
            ([2], 2) => Ok(Pattern::PairTwo(arr2(&groups[0]), arr2(&free))),
            ([], 4) => Ok(Pattern::Four([free[0], free[1], free[2], free[3]])),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: &[Slot]| -> String { v.iter().map(|x| if *x == Slot::B { 'B' } else { 'S' }).collect() };
        match self {
            Pattern::PairOne(p, z) => write!(f, "({}){}", s(p), s(&[*z])),
            Pattern::Triple(t) => write!(f, "{}", s(t)),
            Pattern::PairPair(a, b) => write!(f, "({})({})", s(a), s(b)),
            Pattern::TripleOne(t, w) => write!(f, "({}){}", s(t), s(&[*w])),
            Pattern::PairTwo(p, r) => write!(f, "({}){}", s(p), s(r)),
            Pattern::Four(x) => write!(f, "{}", s(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::{build_eta_table, DEFAULT_TOL};
    use crate::ErrorModel;

    #[test]
    fn parse_and_print() {
        for s in ["(BB)B", "SSS", "(SS)(SS)", "(BBS)B", "(BS)BS", "BSBS", "(SB)S"] {
            let p: Pattern = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        for s in ["", "B", "(BB)", "(BBBB)", "BB(BB)", "(BX)B", "((BB)B)"] {
            assert!(s.parse::<Pattern>().is_err(), "{s}");
        }
    }

    #[test]
    fn symmetric_orderings_agree() {
        let a: Pattern = "(BS)B".parse().unwrap();
        let b: Pattern = "(SB)B".parse().unwrap();
        assert_eq!(a.combination(), b.combination());
        let a: Pattern = "(BS)(SS)".parse().unwrap();
        let b: Pattern = "(SS)(SB)".parse().unwrap();
        assert_eq!(a.combination(), b.combination());
    }

    #[test]
    fn normal_values() {
        let t = build_eta_table(&ErrorModel::normal(), DEFAULT_TOL).unwrap();
        assert_eq!(eta_pattern(&t, &"(BB)B".parse().unwrap()).unwrap(), 0.0);
        // -(1 - 3 + 9 - 15)
        assert_eq!(eta_pattern(&t, &"SSS".parse().unwrap()).unwrap(), 8.0);
        // 1 + 3 + 12 - 2 - 4 + 12
        assert_eq!(eta_pattern(&t, &"(SS)(SS)".parse().unwrap()).unwrap(), 22.0);
    }
}
