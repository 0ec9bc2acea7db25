//! `(row, col, value)` relations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::plan::Combine;
use crate::reference::DenseMatrix;
use crate::semiring::{sr_add, ArithError, SemiringTag, Value};

pub type Tuple = (u32, u32, Value);

/// A matrix as a relation. Tuples are sorted by `(row, col)` with no
/// duplicate keys. A sparse relation holds no identities; a dense one holds
/// every position exactly once.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixRelation {
    pub rows: u64,
    pub cols: u64,
    pub sr: SemiringTag,
    pub dense: bool,
    pub tuples: Vec<Tuple>,
}

impl MatrixRelation {
    pub fn empty(rows: u64, cols: u64, sr: SemiringTag) -> MatrixRelation {
        MatrixRelation {
            rows,
            cols,
            sr,
            dense: false,
            tuples: Vec::new(),
        }
    }

    /// Builds a sparse relation from tuples in any order. Identities are
    /// dropped and duplicate keys are combined with semiring addition.
    pub fn from_tuples(
        rows: u64,
        cols: u64,
        sr: SemiringTag,
        mut tuples: Vec<Tuple>,
    ) -> Result<MatrixRelation, ArithError> {
        tuples.sort_by_key(|t| (t.0, t.1));
        let mut out: Vec<Tuple> = Vec::with_capacity(tuples.len());
        for (r, c, v) in tuples {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 = sr_add(sr, last.2, v)?,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|t| !t.2.is_zero());
        Ok(MatrixRelation {
            rows,
            cols,
            sr,
            dense: false,
            tuples: out,
        })
    }

    pub fn scalar(v: Value) -> MatrixRelation {
        let tuples = if v.is_zero() {
            Vec::new()
        } else {
            alloc::vec![(0, 0, v)]
        };
        MatrixRelation {
            rows: 1,
            cols: 1,
            sr: v.tag(),
            dense: false,
            tuples,
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Value at a position, the identity when absent.
    pub fn get(&self, r: u32, c: u32) -> Value {
        match self.tuples.binary_search_by_key(&(r, c), |t| (t.0, t.1)) {
            Ok(i) => self.tuples[i].2,
            Err(_) => self.sr.zero(),
        }
    }

    /// Tuples in row `r`.
    pub fn row(&self, r: u32) -> &[Tuple] {
        let lo = self.tuples.partition_point(|t| t.0 < r);
        let hi = self.tuples.partition_point(|t| t.0 <= r);
        &self.tuples[lo..hi]
    }

    /// Drops explicit identities.
    pub fn into_sparse(mut self) -> MatrixRelation {
        self.tuples.retain(|t| !t.2.is_zero());
        self.dense = false;
        self
    }

    /// Checks the relation invariants. Returns a description of the first
    /// violation.
    pub fn check(&self) -> Result<(), alloc::string::String> {
        for w in self.tuples.windows(2) {
            if (w[0].0, w[0].1) >= (w[1].0, w[1].1) {
                return Err(alloc::format!("keys out of order at ({}, {})", w[1].0, w[1].1));
            }
        }
        for &(r, c, v) in &self.tuples {
            if u64::from(r) >= self.rows || u64::from(c) >= self.cols {
                return Err(alloc::format!("({r}, {c}) outside {}x{}", self.rows, self.cols));
            }
            if v.tag() != self.sr {
                return Err(alloc::format!("value {v:?} is not {}", self.sr));
            }
            if !self.dense && v.is_zero() {
                return Err(alloc::format!("identity stored at ({r}, {c})"));
            }
        }
        if self.dense && self.tuples.len() as u64 != self.rows * self.cols {
            return Err("dense relation misses positions".into());
        }
        Ok(())
    }

    /// Merges `delta`, a bag in any order, into this relation:
    /// `state[k] := combine(state[k], delta[k])`. Keys absent from the state
    /// are inserted and results equal to the identity are dropped. Returns
    /// whether any stored entry changed.
    pub fn merge_in_place(&mut self, delta: &[Tuple], combine: Combine) -> Result<bool, ArithError> {
        match combine {
            Combine::Add => self.merge_add(delta),
            Combine::ArgminCol => Ok(self.merge_argmin(delta)),
        }
    }

    fn merge_add(&mut self, delta: &[Tuple]) -> Result<bool, ArithError> {
        if delta.is_empty() {
            return Ok(false);
        }
        let sr = self.sr;
        let mut d: Vec<Tuple> = delta.to_vec();
        d.sort_by_key(|t| (t.0, t.1));
        let mut folded: Vec<Tuple> = Vec::with_capacity(d.len());
        for (r, c, v) in d {
            match folded.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 = sr_add(sr, last.2, v)?,
                _ => folded.push((r, c, v)),
            }
        }
        let old = core::mem::take(&mut self.tuples);
        let mut out = Vec::with_capacity(old.len() + folded.len());
        let mut changed = false;
        let dense = self.dense;
        let keep = |out: &mut Vec<Tuple>, t: Tuple, changed: &mut bool, was: Option<Value>| {
            if t.2.is_zero() && !dense {
                *changed |= was.is_some_and(|w| !w.is_zero());
                return;
            }
            *changed |= was != Some(t.2);
            out.push(t);
        };
        let (mut i, mut j) = (0, 0);
        while i < old.len() || j < folded.len() {
            let ko = old.get(i).map(|t| (t.0, t.1));
            let kd = folded.get(j).map(|t| (t.0, t.1));
            match (ko, kd) {
                (Some(a), Some(b)) if a == b => {
                    let v = sr_add(sr, old[i].2, folded[j].2)?;
                    keep(&mut out, (a.0, a.1, v), &mut changed, Some(old[i].2));
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a < b => {
                    out.push(old[i]);
                    i += 1;
                }
                (Some(_), None) => {
                    out.push(old[i]);
                    i += 1;
                }
                _ => {
                    let t = folded[j];
                    keep(&mut out, t, &mut changed, None);
                    j += 1;
                }
            }
        }
        self.tuples = out;
        Ok(changed)
    }

    fn merge_argmin(&mut self, delta: &[Tuple]) -> bool {
        let mut best: BTreeMap<u32, Tuple> = BTreeMap::new();
        for &t in self.tuples.iter().chain(delta) {
            if t.2.is_zero() {
                continue;
            }
            best.entry(t.0)
                .and_modify(|b| {
                    if t.1 < b.1 {
                        *b = t;
                    }
                })
                .or_insert(t);
        }
        let new: Vec<Tuple> = best.into_values().collect();
        let changed = new != self.tuples;
        self.tuples = new;
        self.dense = false;
        changed
    }

    pub fn from_dense(m: &DenseMatrix) -> MatrixRelation {
        let tuples = m
            .nonzeros()
            .into_iter()
            .map(|(r, c, v)| (r as u32, c as u32, v))
            .collect();
        MatrixRelation {
            rows: m.rows as u64,
            cols: m.cols as u64,
            sr: m.sr,
            dense: false,
            tuples,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows as usize, self.cols as usize, self.sr);
        for &(r, c, v) in &self.tuples {
            m.set(r as usize, c as usize, v);
        }
        m
    }
}

/// Keeps, in every row, the nonzero tuple with the smallest column.
pub fn pick_any_aggregate(rel: &MatrixRelation) -> MatrixRelation {
    let mut out = MatrixRelation::empty(rel.rows, rel.cols, rel.sr);
    argmin_rows(&rel.tuples, &mut out.tuples);
    out
}

/// Smallest-column nonzero per row, output sorted by row. The input may be
/// in any order.
pub(crate) fn argmin_rows(input: &[Tuple], out: &mut Vec<Tuple>) {
    let mut best: BTreeMap<u32, Tuple> = BTreeMap::new();
    for &t in input {
        if t.2.is_zero() {
            continue;
        }
        best.entry(t.0)
            .and_modify(|b| {
                if t.1 < b.1 {
                    *b = t;
                }
            })
            .or_insert(t);
    }
    out.extend(best.into_values());
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Value::*;

    fn trop(tuples: Vec<Tuple>) -> MatrixRelation {
        MatrixRelation::from_tuples(3, 1, SemiringTag::Trop, tuples).unwrap()
    }

    #[test]
    fn min_merge() {
        let mut s = trop(vec![(1, 0, Trop(5.0))]);
        let changed = s
            .merge_in_place(&[(1, 0, Trop(3.0)), (2, 0, Trop(9.0))], Combine::Add)
            .unwrap();
        assert!(changed);
        assert_eq!(s.tuples, vec![(1, 0, Trop(3.0)), (2, 0, Trop(9.0))]);
    }

    #[test]
    fn empty_delta_is_unchanged() {
        let mut s = trop(vec![(1, 0, Trop(5.0))]);
        assert!(!s.merge_in_place(&[], Combine::Add).unwrap());
    }

    #[test]
    fn idempotent_bool_merge_is_unchanged() {
        let mut s = MatrixRelation::from_tuples(3, 1, SemiringTag::Bool, vec![(1, 0, Bool(true))]).unwrap();
        assert!(!s.merge_in_place(&[(1, 0, Bool(true))], Combine::Add).unwrap());
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn larger_value_does_not_change_a_min() {
        let mut s = trop(vec![(1, 0, Trop(2.0))]);
        assert!(!s.merge_in_place(&[(1, 0, Trop(7.0))], Combine::Add).unwrap());
    }

    #[test]
    fn int_merge_dropping_to_zero() {
        let mut s = MatrixRelation::from_tuples(3, 1, SemiringTag::Int, vec![(0, 0, Int(2))]).unwrap();
        assert!(s.merge_in_place(&[(0, 0, Int(-2))], Combine::Add).unwrap());
        assert!(s.is_empty());
    }

    #[test]
    fn pick_any_keeps_smallest_column() {
        let rel = MatrixRelation {
            rows: 2,
            cols: 6,
            sr: SemiringTag::Int,
            dense: false,
            tuples: vec![(0, 2, Int(1)), (0, 5, Int(2)), (1, 1, Int(3))],
        };
        assert_eq!(pick_any_aggregate(&rel).tuples, vec![(0, 2, Int(1)), (1, 1, Int(3))]);
        assert!(pick_any_aggregate(&MatrixRelation::empty(2, 2, SemiringTag::Int)).is_empty());
    }

    #[test]
    fn argmin_merge() {
        let mut s = MatrixRelation {
            rows: 2,
            cols: 4,
            sr: SemiringTag::Bool,
            dense: false,
            tuples: vec![(0, 2, Bool(true)), (1, 1, Bool(true))],
        };
        assert!(s
            .merge_in_place(&[(0, 0, Bool(true)), (1, 3, Bool(true))], Combine::ArgminCol)
            .unwrap());
        assert_eq!(s.tuples, vec![(0, 0, Bool(true)), (1, 1, Bool(true))]);
        assert!(!s.merge_in_place(&[(1, 3, Bool(true))], Combine::ArgminCol).unwrap());
    }
}
