//! Exact sparse Gaussian elimination over the rationals.
//!
//! [`Elimination`] brings a matrix to reduced row echelon form and records the
//! row operations, so the same factorisation can be replayed on many right
//! hand sides.  Solutions set every free variable to zero.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::polyring::Q;

#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<BTreeMap<usize, Q>>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> SparseMatrix {
        SparseMatrix { nrows, ncols, rows: vec![BTreeMap::new(); nrows] }
    }

    pub fn add(&mut self, r: usize, c: usize, q: &Q) {
        if q.is_zero() {
            return;
        }
        let e = self.rows[r].entry(c).or_insert_with(Q::zero);
        *e += q;
        if e.is_zero() {
            self.rows[r].remove(&c);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.rows[r].get(&c).cloned().unwrap_or_else(Q::zero)
    }
}

#[derive(Clone, Debug)]
enum RowOp {
    Swap(usize, usize),
    Scale(usize, Q),
    AddMul { dst: usize, src: usize, factor: Q },
}

#[derive(Clone, Debug)]
pub struct Elimination {
    nrows: usize,
    ncols: usize,
    ops: Vec<RowOp>,
    pivot_cols: Vec<usize>,
}

impl Elimination {
    pub fn new(m: SparseMatrix) -> Elimination {
        let SparseMatrix { nrows, ncols, mut rows } = m;
        let mut ops = Vec::new();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == nrows {
                break;
            }
            let pick = (r..nrows).filter(|&i| rows[i].contains_key(&c)).min_by_key(|&i| rows[i].len());
            let Some(p) = pick else { continue };
            if p != r {
                rows.swap(p, r);
                ops.push(RowOp::Swap(p, r));
            }
            let lead = rows[r][&c].clone();
            if !lead.is_one() {
                let inv = Q::one() / lead;
                for v in rows[r].values_mut() {
                    *v *= &inv;
                }
                ops.push(RowOp::Scale(r, inv));
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r {
                    continue;
                }
                let Some(f) = row.get(&c).cloned() else { continue };
                let factor = -f;
                for (&k, v) in &pivot_row {
                    let e = row.entry(k).or_insert_with(Q::zero);
                    *e += &factor * v;
                    if e.is_zero() {
                        row.remove(&k);
                    }
                }
                ops.push(RowOp::AddMul { dst: i, src: r, factor });
            }
            pivot_cols.push(c);
            r += 1;
        }
        Elimination { nrows, ncols, ops, pivot_cols }
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// A solution of `M x = b` with all free variables zero, if one exists.
    pub fn solve(&self, b: &BTreeMap<usize, Q>) -> Option<BTreeMap<usize, Q>> {
        let mut v = vec![Q::zero(); self.nrows];
        for (&i, q) in b {
            v[i] = q.clone();
        }
        for op in &self.ops {
            match op {
                RowOp::Swap(a, c) => v.swap(*a, *c),
                RowOp::Scale(a, s) => {
                    if !v[*a].is_zero() {
                        v[*a] *= s;
                    }
                }
                RowOp::AddMul { dst, src, factor } => {
                    if !v[*src].is_zero() {
                        let t = factor * &v[*src];
                        v[*dst] += t;
                    }
                }
            }
        }
        if v[self.rank()..].iter().any(|q| !q.is_zero()) {
            return None;
        }
        let mut x = BTreeMap::new();
        for (i, &c) in self.pivot_cols.iter().enumerate() {
            if !v[i].is_zero() {
                x.insert(c, v[i].clone());
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    fn apply(m: &SparseMatrix, x: &BTreeMap<usize, Q>) -> Vec<Q> {
        (0..m.nrows)
            .map(|r| x.iter().fold(Q::zero(), |acc, (&c, v)| acc + m.get(r, c) * v))
            .collect()
    }

    #[test]
    fn solves_consistent_and_rejects_inconsistent() {
        // rows: x + y = 3, 2x + 2y = 6, y - z = 1
        let mut m = SparseMatrix::new(3, 3);
        m.add(0, 0, &q(1));
        m.add(0, 1, &q(1));
        m.add(1, 0, &q(2));
        m.add(1, 1, &q(2));
        m.add(2, 1, &q(1));
        m.add(2, 2, &q(-1));
        let e = Elimination::new(m.clone());
        assert_eq!(e.rank(), 2);
        let b: BTreeMap<usize, Q> = [(0, q(3)), (1, q(6)), (2, q(1))].into_iter().collect();
        let x = e.solve(&b).unwrap();
        assert_eq!(apply(&m, &x), vec![q(3), q(6), q(1)]);
        assert!(!x.contains_key(&2), "free variable is set to zero");
        let bad: BTreeMap<usize, Q> = [(0, q(3)), (1, q(5))].into_iter().collect();
        assert!(e.solve(&bad).is_none());
    }

    #[test]
    fn rank_of_zero_and_identity() {
        assert_eq!(Elimination::new(SparseMatrix::new(4, 2)).rank(), 0);
        let mut id = SparseMatrix::new(3, 3);
        for i in 0..3 {
            id.add(i, i, &q(5));
        }
        assert_eq!(Elimination::new(id).rank(), 3);
    }
}
