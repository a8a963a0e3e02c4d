//! Smith normal form over ℤ with overflow-checked `i64` arithmetic.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type IntMatrix = DMatrix<i64>;

/// `U·M·V = D` with `U`, `V` unimodular and `D` diagonal, `d₁ | d₂ | …`, `dᵢ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
    /// `U⁻¹`, maintained alongside `U`.
    pub u_inv: IntMatrix,
}

impl SnfResult {
    /// The diagonal of `D`.
    pub fn invariants(&self) -> Vec<i64> {
        (0..self.d.nrows().min(self.d.ncols()))
            .map(|i| self.d[(i, i)])
            .collect()
    }

    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.invariants().iter().filter(|&&d| d != 0).count()
    }
}

/// Finitely generated abelian group `ℤᵏ / image(relations) ≅ ⊕ ℤ/dᵢ ⊕ ℤ^free_rank`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianSplit {
    pub torsion: Vec<i64>,
    pub free_rank: usize,
}

fn checked_axpy(a: i64, q: i64, b: i64) -> Result<i64> {
    q.checked_mul(b)
        .and_then(|qb| a.checked_sub(qb))
        .ok_or(Error::Overflow)
}

/// `row_i ← row_i − q·row_j`.
fn row_sub(m: &mut IntMatrix, i: usize, j: usize, q: i64) -> Result<()> {
    for c in 0..m.ncols() {
        m[(i, c)] = checked_axpy(m[(i, c)], q, m[(j, c)])?;
    }
    Ok(())
}

/// `col_i ← col_i − q·col_j`.
fn col_sub(m: &mut IntMatrix, i: usize, j: usize, q: i64) -> Result<()> {
    for r in 0..m.nrows() {
        m[(r, i)] = checked_axpy(m[(r, i)], q, m[(r, j)])?;
    }
    Ok(())
}

fn negate_row(m: &mut IntMatrix, i: usize) -> Result<()> {
    for c in 0..m.ncols() {
        m[(i, c)] = m[(i, c)].checked_neg().ok_or(Error::Overflow)?;
    }
    Ok(())
}

fn negate_col(m: &mut IntMatrix, i: usize) -> Result<()> {
    for r in 0..m.nrows() {
        m[(r, i)] = m[(r, i)].checked_neg().ok_or(Error::Overflow)?;
    }
    Ok(())
}

struct Reducer {
    d: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
}

impl Reducer {
    fn row_sub(&mut self, i: usize, j: usize, q: i64) -> Result<()> {
        if q == 0 {
            return Ok(());
        }
        row_sub(&mut self.d, i, j, q)?;
        row_sub(&mut self.u, i, j, q)?;
        col_sub(
            &mut self.u_inv,
            j,
            i,
            q.checked_neg().ok_or(Error::Overflow)?,
        )
    }

    fn col_sub(&mut self, i: usize, j: usize, q: i64) -> Result<()> {
        if q == 0 {
            return Ok(());
        }
        col_sub(&mut self.d, i, j, q)?;
        col_sub(&mut self.v, i, j, q)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.d.swap_rows(i, j);
            self.u.swap_rows(i, j);
            self.u_inv.swap_columns(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            self.d.swap_columns(i, j);
            self.v.swap_columns(i, j);
        }
    }

    fn negate_row(&mut self, i: usize) -> Result<()> {
        negate_row(&mut self.d, i)?;
        negate_row(&mut self.u, i)?;
        negate_col(&mut self.u_inv, i)
    }

    fn min_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for r in t..self.d.nrows() {
            for c in t..self.d.ncols() {
                let x = self.d[(r, c)];
                if x != 0
                    && best
                        .is_none_or(|(br, bc)| x.unsigned_abs() < self.d[(br, bc)].unsigned_abs())
                {
                    best = Some((r, c));
                }
            }
        }
        best
    }

    /// Diagonalizes position `t`; returns `false` once the trailing block is zero.
    fn reduce(&mut self, t: usize) -> Result<bool> {
        let (rows, cols) = self.d.shape();
        loop {
            let Some((r, c)) = self.min_pivot(t) else {
                return Ok(false);
            };
            self.swap_rows(t, r);
            self.swap_cols(t, c);
            let pivot = self.d[(t, t)];
            for i in t + 1..rows {
                self.row_sub(i, t, self.d[(i, t)] / pivot)?;
            }
            for j in t + 1..cols {
                self.col_sub(j, t, self.d[(t, j)] / pivot)?;
            }
            let dirty = (t + 1..rows).any(|i| self.d[(i, t)] != 0)
                || (t + 1..cols).any(|j| self.d[(t, j)] != 0);
            if dirty {
                continue;
            }
            let offender =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| self.d[(i, j)] % pivot != 0));
            match offender {
                Some(i) => self.row_sub(t, i, -1)?,
                None => {
                    if pivot < 0 {
                        self.negate_row(t)?;
                    }
                    return Ok(true);
                }
            }
        }
    }
}

/// Smith normal form by minimal-absolute-value pivoting.
///
/// Every intermediate product is overflow-checked; exceeding `i64` yields
/// [`Error::Overflow`] rather than a wrong answer.
pub fn smith_normal_form(m: &IntMatrix) -> Result<SnfResult> {
    let (rows, cols) = m.shape();
    let mut red = Reducer {
        d: m.clone(),
        u: IntMatrix::identity(rows, rows),
        u_inv: IntMatrix::identity(rows, rows),
        v: IntMatrix::identity(cols, cols),
    };
    for t in 0..rows.min(cols) {
        if !red.reduce(t)? {
            break;
        }
    }
    Ok(SnfResult {
        u: red.u,
        v: red.v,
        d: red.d,
        u_inv: red.u_inv,
    })
}

/// Splits `ℤᵏ / image(relations)`, where `relations` has `k` rows and one
/// column per relation, into its torsion invariants and free rank.
pub fn split_abelian(relations: &IntMatrix) -> Result<AbelianSplit> {
    let snf = smith_normal_form(relations)?;
    let invariants = snf.invariants();
    Ok(AbelianSplit {
        torsion: invariants.iter().copied().filter(|&d| d > 1).collect(),
        free_rank: relations.nrows() - snf.rank(),
    })
}

/// A unimodular `k×k` matrix whose first `r` columns generate the lattice
/// spanned by the columns of `generators` (`r` its rank).
///
/// Fails with [`Error::TorsionObstruction`] when `ℤᵏ / C` has torsion.
pub fn extend_lattice_basis(generators: &IntMatrix) -> Result<IntMatrix> {
    let snf = smith_normal_form(generators)?;
    let torsion: Vec<i64> = snf.invariants().into_iter().filter(|&d| d > 1).collect();
    if !torsion.is_empty() {
        return Err(Error::TorsionObstruction(torsion));
    }
    Ok(snf.u_inv)
}

/// Exact determinant by fraction-free (Bareiss) elimination in `i128`.
pub fn integer_determinant(m: &IntMatrix) -> Result<i128> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if n == 0 {
        return Ok(1);
    }
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|r| (0..n).map(|c| i128::from(m[(r, c)])).collect())
        .collect();
    let mut sign = 1;
    let mut prev = 1_i128;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| a[r][k] != 0) else {
            return Ok(0);
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j]
                    .checked_mul(a[k][k])
                    .zip(a[i][k].checked_mul(a[k][j]))
                    .and_then(|(x, y)| x.checked_sub(y))
                    .ok_or(Error::Overflow)?;
                a[i][j] = num / prev;
            }
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(rows: usize, cols: usize, entries: &[i64]) -> IntMatrix {
        IntMatrix::from_row_slice(rows, cols, entries)
    }

    fn widen(m: &IntMatrix) -> DMatrix<i128> {
        m.map(i128::from)
    }

    #[test]
    fn bareiss_matches_laplace() {
        let cases = [
            int(3, 3, &[2, -1, 0, 4, 3, 7, -5, 2, 1]),
            int(3, 3, &[0, 1, 2, 0, 3, 4, 5, 6, 7]),
            int(2, 2, &[2, 4, 1, 2]),
            int(4, 4, &[1, 2, 3, 4, 0, 0, 1, 2, 3, 0, 0, 1, 2, 3, 0, 0]),
        ];
        for m in &cases {
            assert_eq!(integer_determinant(m).unwrap(), det(m));
        }
        assert_eq!(integer_determinant(&IntMatrix::zeros(0, 0)).unwrap(), 1);
    }

    fn det(m: &IntMatrix) -> i128 {
        let n = m.nrows();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor = m.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * i128::from(m[(0, j)]) * det(&minor)
            })
            .sum()
    }

    fn check(m: &IntMatrix) -> SnfResult {
        let snf = smith_normal_form(m).unwrap();
        assert_eq!(widen(&snf.u) * widen(m) * widen(&snf.v), widen(&snf.d));
        assert_eq!(
            widen(&snf.u) * widen(&snf.u_inv),
            DMatrix::<i128>::identity(m.nrows(), m.nrows())
        );
        assert_eq!(det(&snf.u).abs(), 1);
        assert_eq!(det(&snf.v).abs(), 1);
        let inv = snf.invariants();
        for (r, c) in (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| (r, c))) {
            if r != c {
                assert_eq!(snf.d[(r, c)], 0);
            }
        }
        assert!(inv.iter().all(|&d| d >= 0));
        for w in inv.windows(2) {
            assert!(
                w[1] == 0 && w[0] == 0 || w[0] != 0 && w[1] % w[0] == 0,
                "{inv:?}"
            );
        }
        snf
    }

    #[test]
    fn identity_is_fixed() {
        let snf = check(&IntMatrix::identity(3, 3));
        assert_eq!(snf.d, IntMatrix::identity(3, 3));
        assert_eq!(snf.u, IntMatrix::identity(3, 3));
        assert_eq!(snf.v, IntMatrix::identity(3, 3));
    }

    #[test]
    fn documented_examples() {
        assert_eq!(check(&int(2, 2, &[2, 0, 0, 3])).invariants(), vec![1, 6]);
        assert_eq!(check(&int(2, 2, &[2, 4, 6, 8])).invariants(), vec![2, 4]);
    }

    #[test]
    fn rectangular_and_zero() {
        assert_eq!(
            check(&int(2, 3, &[0, 0, 0, 0, 0, 0])).invariants(),
            vec![0, 0]
        );
        assert_eq!(
            check(&int(3, 2, &[4, 6, 6, 9, 2, 3])).invariants(),
            vec![1, 0]
        );
        check(&IntMatrix::zeros(2, 0));
    }

    #[test]
    fn overflow_is_reported() {
        let big = i64::MAX / 2 + 1;
        let m = int(2, 2, &[big - 1, big, big - 2, big - 1]);
        match smith_normal_form(&m) {
            Err(Error::Overflow) => {}
            Ok(snf) => {
                assert_eq!(widen(&snf.u) * widen(&m) * widen(&snf.v), widen(&snf.d));
            }
            Err(e) => panic!("unexpected {e}"),
        }
        assert!(matches!(
            smith_normal_form(&int(1, 1, &[i64::MIN])),
            Err(Error::Overflow)
        ));
    }

    #[test]
    fn split_examples() {
        let split = split_abelian(&IntMatrix::zeros(2, 2)).unwrap();
        assert_eq!((split.torsion, split.free_rank), (vec![], 2));
        let split = split_abelian(&int(2, 2, &[2, 0, 0, 0])).unwrap();
        assert_eq!((split.torsion, split.free_rank), (vec![2], 1));
        let split = split_abelian(&int(2, 2, &[2, 4, 6, 8])).unwrap();
        assert_eq!((split.torsion, split.free_rank), (vec![2, 4], 0));
    }

    #[test]
    fn extension_examples() {
        let basis = extend_lattice_basis(&int(2, 1, &[1, 0])).unwrap();
        assert_eq!(basis, IntMatrix::identity(2, 2));

        assert_eq!(
            extend_lattice_basis(&int(2, 1, &[2, 0]))
                .unwrap_err()
                .to_string(),
            Error::TorsionObstruction(vec![2]).to_string()
        );

        let basis = extend_lattice_basis(&int(2, 1, &[1, 2])).unwrap();
        assert_eq!(det(&basis).abs(), 1);
        let first = basis.column(0).into_owned();
        assert!(
            first == nalgebra::DVector::from_vec(vec![1, 2])
                || first == nalgebra::DVector::from_vec(vec![-1, -2])
        );
    }
}
