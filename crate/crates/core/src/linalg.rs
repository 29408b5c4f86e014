//! Exact linear algebra over the rationals.
//!
//! Everything below works on dense matrices of `BigRational` entries and is
//! shared by the cone, surface and singularity modules. Negative definiteness
//! is decided through the inertia of a congruence diagonalization rather than
//! leading principal minors, so singular leading blocks need no special case.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{rat, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (entries ({i},{j}) and ({j},{i}) differ)")]
    NotSymmetric { i: usize, j: usize },
    #[error("dimension mismatch: matrix is {rows}x{cols}, vector has length {len}")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Inertia of a symmetric matrix: counts of positive, negative and zero
/// eigenvalue signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

/// Dense matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rat>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count mismatch");
        QMatrix { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix::new(rows, cols, vec![Rat::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zero(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix::new(r, c, rows.iter().flatten().map(|&v| rat(v)).collect())
    }

    pub fn from_rat_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn symmetry_violation(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if self.get(i, j) != self.get(j, i) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.symmetry_violation().is_none()
    }

    fn require_symmetric(&self) -> Result<(), LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        match self.symmetry_violation() {
            Some((i, j)) => Err(LinalgError::NotSymmetric { i, j }),
            None => Ok(()),
        }
    }

    /// Principal submatrix on the given row/column indices, in the given order.
    pub fn principal_submatrix(&self, idx: &[usize]) -> QMatrix {
        let mut data = Vec::with_capacity(idx.len() * idx.len());
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j).clone());
            }
        }
        QMatrix::new(idx.len(), idx.len(), data)
    }

    pub fn block_diag(blocks: &[QMatrix]) -> QMatrix {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = QMatrix::zero(n, n);
        let mut off = 0;
        for b in blocks {
            assert!(b.is_square(), "block-diagonal blocks must be square");
            for i in 0..b.rows {
                for j in 0..b.cols {
                    *m.get_mut(off + i, off + j) = b.get(i, j).clone();
                }
            }
            off += b.rows;
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                rows: self.rows,
                cols: self.cols,
                len: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Exact determinant by Gaussian elimination.
    pub fn determinant(&self) -> Result<Rat, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.row_vecs();
        let mut det = Rat::one();
        for k in 0..n {
            let pivot = match (k..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => p,
                None => return Ok(Rat::zero()),
            };
            if pivot != k {
                a.swap(k, pivot);
                det = -det;
            }
            det *= &a[k][k];
            let inv = a[k][k].recip();
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let f = &a[i][k] * &inv;
                for j in k..n {
                    let sub = &f * &a[k][j];
                    a[i][j] -= sub;
                }
            }
        }
        Ok(det)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut a = self.row_vecs();
        let (m, n) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..m).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            let inv = a[rank][col].recip();
            for i in 0..m {
                if i == rank || a[i][col].is_zero() {
                    continue;
                }
                let f = &a[i][col] * &inv;
                for j in col..n {
                    let sub = &f * &a[rank][j];
                    a[i][j] -= sub;
                }
            }
            rank += 1;
            if rank == m {
                break;
            }
        }
        rank
    }

    /// Diagonal of a congruence diagonalization `S^T A S` of a symmetric
    /// matrix. The multiset of entry signs is basis independent.
    pub fn congruent_diagonal(&self) -> Result<Vec<Rat>, LinalgError> {
        self.require_symmetric()?;
        let n = self.rows;
        let mut a = self.row_vecs();
        for k in 0..n {
            if a[k][k].is_zero() {
                if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                    // Swap basis vectors k and j.
                    a.swap(k, j);
                    for row in a.iter_mut() {
                        row.swap(k, j);
                    }
                } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                    // All remaining diagonal entries vanish; e_k += e_j makes
                    // the (k,k) entry 2*a[k][j], nonzero in characteristic 0.
                    for i in 0..n {
                        let add = a[i][j].clone();
                        a[i][k] += add;
                    }
                    for j2 in 0..n {
                        let add = a[j][j2].clone();
                        a[k][j2] += add;
                    }
                } else {
                    continue; // row/column k is zero on the remaining block
                }
            }
            if a[k][k].is_zero() {
                continue;
            }
            let inv = a[k][k].recip();
            for i in k + 1..n {
                if a[k][i].is_zero() {
                    continue;
                }
                let f = &a[k][i] * &inv;
                for j in k..n {
                    let sub = &f * &a[k][j];
                    a[i][j] -= sub;
                }
                for row in a.iter_mut().skip(k) {
                    let sub = &f * &row[k];
                    row[i] -= sub;
                }
            }
        }
        Ok((0..n).map(|i| a[i][i].clone()).collect())
    }

    /// Inertia (p, n, z) of a symmetric matrix, computed exactly.
    pub fn signature(&self) -> Result<Signature, LinalgError> {
        let diag = self.congruent_diagonal()?;
        let mut sig = Signature { plus: 0, minus: 0, zero: 0 };
        for d in &diag {
            if d.is_zero() {
                sig.zero += 1;
            } else if d.is_positive() {
                sig.plus += 1;
            } else {
                sig.minus += 1;
            }
        }
        Ok(sig)
    }

    pub fn is_negative_definite(&self) -> Result<bool, LinalgError> {
        let sig = self.signature()?;
        Ok(sig.plus == 0 && sig.zero == 0)
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[Rat]) -> Result<Vec<Rat>, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                rows: self.rows,
                cols: self.cols,
                len: b.len(),
            });
        }
        match self.solve_general(b)? {
            SolveOutcome::Unique(x) => Ok(x),
            _ => Err(LinalgError::Singular),
        }
    }

    /// Gauss-Jordan solve of a possibly singular square system.
    pub fn solve_general(&self, b: &[Rat]) -> Result<SolveOutcome, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                rows: self.rows,
                cols: self.cols,
                len: b.len(),
            });
        }
        let (m, n) = (self.rows, self.cols);
        let mut a = self.row_vecs();
        for (row, rhs) in a.iter_mut().zip(b) {
            row.push(rhs.clone());
        }
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..m).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            let inv = a[rank][col].recip();
            for j in col..=n {
                a[rank][j] = &a[rank][j] * &inv;
            }
            for i in 0..m {
                if i == rank || a[i][col].is_zero() {
                    continue;
                }
                let f = a[i][col].clone();
                for j in col..=n {
                    let sub = &f * &a[rank][j];
                    a[i][j] -= sub;
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        for row in a.iter().skip(rank) {
            if !row[n].is_zero() {
                return Ok(SolveOutcome::Inconsistent);
            }
        }
        let mut x = vec![Rat::zero(); n];
        for (r, &col) in pivot_cols.iter().enumerate() {
            x[col] = a[r][n].clone();
        }
        if rank == n {
            Ok(SolveOutcome::Unique(x))
        } else {
            Ok(SolveOutcome::Underdetermined(x))
        }
    }
}

/// Result of solving a linear system that may be singular. The
/// `Underdetermined` variant carries the particular solution with all free
/// variables set to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Unique(Vec<Rat>),
    Underdetermined(Vec<Rat>),
    Inconsistent,
}
