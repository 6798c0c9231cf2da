//! Gaussian elimination over any [`Field`].
//!
//! Matrices are plain row vectors (`Vec<Vec<S>>`). Every routine returns
//! canonical output (reduced row echelon form, pivot-normalised) so results
//! can be compared with `==` when the field is exact.

use crate::scalar::Field;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn transpose<S: Clone>(m: &[Vec<S>], ncols: usize) -> Matrix<S> {
    (0..ncols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Reduces `m` in place to reduced row echelon form and returns the pivot
/// columns. Zero rows are dropped.
pub fn rref<S: Field>(m: &mut Matrix<S>) -> Vec<usize> {
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let best = (r..m.len())
            .filter(|&i| !m[i][c].is_negligible())
            .max_by(|&a, &b| {
                m[a][c]
                    .pivot_magnitude()
                    .partial_cmp(&m[b][c].pivot_magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // prefer the earliest row on ties
                    .then(b.cmp(&a))
            });
        let Some(p) = best else {
            for row in m.iter_mut().skip(r) {
                row[c] = S::zero();
            }
            continue;
        };
        m.swap(r, p);
        let inv = S::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        m[r][c] = S::one();
        for i in 0..m.len() {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..ncols {
                if j == c {
                    m[i][j] = S::zero();
                } else if !m[r][j].is_zero() {
                    let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                    m[i][j] = if v.is_negligible() { S::zero() } else { v };
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank<S: Field>(m: &[Vec<S>]) -> usize {
    let mut w = m.to_vec();
    rref(&mut w).len()
}

/// Canonical basis (RREF rows) of the row space.
pub fn row_basis<S: Field>(rows: &[Vec<S>]) -> Matrix<S> {
    let mut w = rows.to_vec();
    rref(&mut w);
    w
}

/// Basis of `{x : m·x = 0}` for an `r × ncols` matrix, returned as RREF rows.
pub fn null_space<S: Field>(m: &[Vec<S>], ncols: usize) -> Matrix<S> {
    let mut w = m.to_vec();
    let pivots = rref(&mut w);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![S::zero(); ncols];
        v[free] = S::one();
        for (row, &pc) in w.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        basis.push(v);
    }
    row_basis(&basis)
}

/// Basis of `{y : yᵀ·B = 0}` where the columns of `B` are `cols`, i.e. the
/// covectors vanishing on the span of `cols`. Vectors live in `S^n`.
pub fn annihilator<S: Field>(cols: &[Vec<S>], n: usize) -> Matrix<S> {
    null_space(cols, n)
}

/// Indices of a maximal linearly independent subset, chosen greedily in order.
pub fn independent_subset<S: Field>(vectors: &[Vec<S>]) -> Vec<usize> {
    let mut kept: Matrix<S> = Vec::new();
    let mut idx = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        kept.push(v.clone());
        if rank(&kept) == kept.len() {
            idx.push(i);
        } else {
            kept.pop();
        }
    }
    idx
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span<S: Field>(basis: &[Vec<S>], v: &[S]) -> bool {
    let mut m = basis.to_vec();
    let r = rank(&m);
    m.push(v.to_vec());
    rank(&m) == r
}

pub fn dot<S: Field>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `m · x` for `m` given as rows.
pub fn mat_vec<S: Field>(m: &[Vec<S>], x: &[S]) -> Vec<S> {
    m.iter().map(|row| dot(row, x)).collect()
}
