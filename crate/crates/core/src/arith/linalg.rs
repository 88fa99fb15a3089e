//! Exact linear algebra over any [`Field`].

use std::collections::BTreeMap;

use super::Field;
use crate::error::{Error, Result};

pub type Matrix<E> = Vec<Vec<E>>;

/// Reduced row echelon form in place; returns the pivot columns. Zero rows are moved last.
pub fn rref<K: Field>(k: &K, m: &mut Matrix<K::Elem>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !k.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, pr);
        let inv = k.inv(&m[r][c]).expect("nonzero pivot");
        for x in m[r].iter_mut() {
            *x = k.mul(x, &inv);
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || k.is_zero(&row[c]) {
                continue;
            }
            let factor = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                k.sub_mul_assign(x, &factor, y);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<K: Field>(k: &K, m: &Matrix<K::Elem>) -> usize {
    let mut e = SparseEchelon::new(k.clone());
    for row in m {
        e.insert_dense(row);
    }
    e.rank()
}

/// Basis of the right kernel {v : m v = 0}.
pub fn kernel<K: Field>(k: &K, m: &Matrix<K::Elem>, ncols: usize) -> Vec<Vec<K::Elem>> {
    let mut a = m.clone();
    let pivots = rref(k, &mut a);
    let mut is_pivot = vec![false; ncols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![k.zero(); ncols];
            v[free] = k.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = k.neg(&a[r][free]);
            }
            v
        })
        .collect()
}

/// Solves A X = B for square nonsingular A, B given column by column.
pub fn solve_many<K: Field>(
    k: &K,
    a: &Matrix<K::Elem>,
    b: &[Vec<K::Elem>],
) -> Result<Vec<Vec<K::Elem>>> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) || b.iter().any(|c| c.len() != n) {
        return Err(Error::Internal("solve: dimension mismatch".into()));
    }
    let mut aug: Matrix<K::Elem> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(b.iter().map(|col| col[i].clone()));
            row
        })
        .collect();
    for c in 0..n {
        let pr = (c..n)
            .find(|&i| !k.is_zero(&aug[i][c]))
            .ok_or(Error::SingularMatrix)?;
        aug.swap(c, pr);
        let inv = k.inv(&aug[c][c]).expect("nonzero pivot");
        for x in aug[c].iter_mut().skip(c) {
            *x = k.mul(x, &inv);
        }
        let prow = aug[c].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == c || k.is_zero(&row[c]) {
                continue;
            }
            let factor = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                k.sub_mul_assign(x, &factor, y);
            }
        }
    }
    Ok((0..b.len())
        .map(|j| (0..n).map(|i| aug[i][n + j].clone()).collect())
        .collect())
}

pub fn solve<K: Field>(k: &K, a: &Matrix<K::Elem>, b: &[K::Elem]) -> Result<Vec<K::Elem>> {
    Ok(solve_many(k, a, &[b.to_vec()])?.remove(0))
}

pub fn inverse<K: Field>(k: &K, a: &Matrix<K::Elem>) -> Result<Matrix<K::Elem>> {
    let n = a.len();
    let id: Vec<Vec<K::Elem>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { k.one() } else { k.zero() }).collect())
        .collect();
    let cols = solve_many(k, a, &id)?;
    Ok((0..n)
        .map(|i| (0..n).map(|j| cols[j][i].clone()).collect())
        .collect())
}

pub fn determinant<K: Field>(k: &K, a: &Matrix<K::Elem>) -> K::Elem {
    let n = a.len();
    let mut m = a.clone();
    let mut det = k.one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !k.is_zero(&m[i][c])) else {
            return k.zero();
        };
        if pr != c {
            m.swap(c, pr);
            det = k.neg(&det);
        }
        det = k.mul(&det, &m[c][c]);
        let inv = k.inv(&m[c][c]).expect("nonzero pivot");
        for i in c + 1..n {
            if k.is_zero(&m[i][c]) {
                continue;
            }
            let factor = k.mul(&m[i][c], &inv);
            let prow = m[c].clone();
            for (x, y) in m[i].iter_mut().zip(&prow).skip(c) {
                k.sub_mul_assign(x, &factor, y);
            }
        }
    }
    det
}

pub fn mat_vec<K: Field>(k: &K, a: &Matrix<K::Elem>, v: &[K::Elem]) -> Vec<K::Elem> {
    a.iter()
        .map(|row| {
            let mut acc = k.zero();
            for (x, y) in row.iter().zip(v) {
                k.add_mul_assign(&mut acc, x, y);
            }
            acc
        })
        .collect()
}

pub fn mat_mul<K: Field>(k: &K, a: &Matrix<K::Elem>, b: &Matrix<K::Elem>) -> Matrix<K::Elem> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = k.zero();
                    for t in 0..inner {
                        k.add_mul_assign(&mut acc, &row[t], &b[t][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub type SparseVec<E> = Vec<(usize, E)>;

/// Incremental row echelon form for sparse rows.
///
/// Each stored row is normalized to leading coefficient one; insertion reduces the
/// incoming row by the stored pivots in increasing column order.
#[derive(Clone, Debug)]
pub struct SparseEchelon<K: Field> {
    k: K,
    pivots: BTreeMap<usize, SparseVec<K::Elem>>,
}

impl<K: Field> SparseEchelon<K> {
    pub fn new(k: K) -> Self {
        SparseEchelon {
            k,
            pivots: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    pub fn insert_dense(&mut self, row: &[K::Elem]) -> bool {
        let sparse = row
            .iter()
            .enumerate()
            .filter(|(_, x)| !self.k.is_zero(x))
            .map(|(i, x)| (i, x.clone()))
            .collect();
        self.insert(sparse)
    }

    /// Reduces `row` (sorted by column) modulo the stored rows.
    pub fn reduce(&self, mut row: SparseVec<K::Elem>) -> SparseVec<K::Elem> {
        let k = &self.k;
        let mut start = 0;
        loop {
            let Some(pos) = row[start..]
                .iter()
                .position(|(c, _)| self.pivots.contains_key(c))
            else {
                return row;
            };
            let pos = start + pos;
            let (c, factor) = row[pos].clone();
            let prow = &self.pivots[&c];
            row = axpy(k, &row, &k.neg(&factor), prow);
            start = pos;
        }
    }

    /// Inserts a row; returns true if it increased the rank.
    pub fn insert(&mut self, row: SparseVec<K::Elem>) -> bool {
        let row = self.reduce(row);
        let Some((lead, lc)) = row.first().cloned() else {
            return false;
        };
        let inv = self.k.inv(&lc).expect("nonzero");
        let row = row
            .into_iter()
            .map(|(c, x)| (c, self.k.mul(&x, &inv)))
            .collect();
        self.pivots.insert(lead, row);
        true
    }

    /// Brings the stored rows to reduced form (each pivot column cleared in all other rows).
    pub fn into_reduced(mut self) -> BTreeMap<usize, SparseVec<K::Elem>> {
        let cols: Vec<usize> = self.pivots.keys().rev().copied().collect();
        for &c in &cols {
            let row = self.pivots.remove(&c).expect("pivot");
            let mut tail: SparseVec<K::Elem> = vec![row[0].clone()];
            let mut rest = row[1..].to_vec();
            // eliminate later pivot columns, which are already reduced
            loop {
                let Some(pos) = rest.iter().position(|(cc, _)| self.pivots.contains_key(cc)) else {
                    break;
                };
                let (pc, factor) = rest[pos].clone();
                let prow = &self.pivots[&pc];
                rest = axpy(&self.k, &rest, &self.k.neg(&factor), prow);
            }
            tail.extend(rest);
            self.pivots.insert(c, tail);
        }
        self.pivots
    }

    /// Kernel basis of the matrix whose rows were inserted, one vector per free column.
    pub fn kernel(self, ncols: usize) -> Vec<SparseVec<K::Elem>> {
        let k = self.k.clone();
        let reduced = self.into_reduced();
        let mut by_free: BTreeMap<usize, SparseVec<K::Elem>> = BTreeMap::new();
        for (&pc, row) in &reduced {
            for (c, x) in &row[1..] {
                by_free.entry(*c).or_default().push((pc, k.neg(x)));
            }
        }
        (0..ncols)
            .filter(|c| !reduced.contains_key(c))
            .map(|free| {
                let mut v = by_free.remove(&free).unwrap_or_default();
                v.push((free, k.one()));
                v.sort_by_key(|(c, _)| *c);
                v
            })
            .collect()
    }
}

/// a + s * b for sorted sparse vectors.
pub fn axpy<K: Field>(
    k: &K,
    a: &SparseVec<K::Elem>,
    s: &K::Elem,
    b: &SparseVec<K::Elem>,
) -> SparseVec<K::Elem> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            let v = k.mul(s, &b[j].1);
            if !k.is_zero(&v) {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let mut v = a[i].1.clone();
            k.add_mul_assign(&mut v, s, &b[j].1);
            if !k.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, PrimeField, Rational, Rationals};

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter()
            .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
            .collect()
    }

    #[test]
    fn rank_and_kernel() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&Rationals, &m), 2);
        let ker = kernel(&Rationals, &m, 3);
        assert_eq!(ker.len(), 1);
        assert!(mat_vec(&Rationals, &m, &ker[0]).iter().all(|x| *x == rat(0, 1)));
    }

    #[test]
    fn sparse_kernel_matches_dense() {
        let m = q(&[&[0, 1, 0, 2, 1], &[1, 1, 1, 0, 0], &[1, 2, 1, 2, 1], &[3, 0, 1, 0, 5]]);
        let mut e = SparseEchelon::new(Rationals);
        for r in &m {
            e.insert_dense(r);
        }
        assert_eq!(e.rank(), 3);
        let ker = e.kernel(5);
        assert_eq!(ker.len(), 2);
        for v in ker {
            let mut dense = vec![rat(0, 1); 5];
            for (c, x) in v {
                dense[c] = x;
            }
            assert!(mat_vec(&Rationals, &m, &dense).iter().all(|x| *x == rat(0, 1)));
        }
    }

    #[test]
    fn solve_inverse_det() {
        let a = q(&[&[2, 1], &[1, 3]]);
        let x = solve(&Rationals, &a, &[rat(3, 1), rat(5, 1)]).unwrap();
        assert_eq!(x, vec![rat(4, 5), rat(7, 5)]);
        let inv = inverse(&Rationals, &a).unwrap();
        assert_eq!(mat_mul(&Rationals, &a, &inv), q(&[&[1, 0], &[0, 1]]));
        assert_eq!(determinant(&Rationals, &a), rat(5, 1));
        assert_eq!(solve(&Rationals, &q(&[&[1, 2], &[2, 4]]), &[rat(1, 1), rat(1, 1)]), Err(Error::SingularMatrix));
        let k = PrimeField::new(7);
        assert_eq!(determinant(&k, &vec![vec![2, 1], vec![1, 4]]), 0);
    }
}
