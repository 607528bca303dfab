//! Branch intersection matrices and the continuant determinant.
//!
//! The opposite self-intersection matrix of a branch is tridiagonal with -1
//! off the diagonal. Its determinant, computed by the integer three-term
//! recursion, is the invariant k(S); it equals r+s of the word matrix and
//! serves as the independent oracle for that identity.

use crate::error::{Error, Result};
use crate::signature::{branch_selfintersections, seq_to_matrix, DlousskySeq};

/// Tridiagonal symmetric matrix with -1 on the off-diagonals, given by its
/// diagonal of opposite self-intersections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMatrix {
    diag: Vec<i64>,
}

impl ChainMatrix {
    pub fn new(diag: Vec<i64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidSignature("empty branch has no chain matrix".into()));
        }
        if diag.iter().any(|&d| d < 2) {
            return Err(Error::InvalidSignature("diagonal entries must be >= 2".into()));
        }
        Ok(ChainMatrix { diag })
    }

    pub fn diag(&self) -> &[i64] {
        &self.diag
    }
}

/// Determinant by the continuant recursion D_i = d_i D_{i-1} - D_{i-2}.
pub fn chain_det(m: &ChainMatrix) -> i64 {
    let mut prev2: i64 = 1; // D_0
    let mut prev1: i64 = m.diag[0]; // D_1
    for &d in &m.diag[1..] {
        let next = d * prev1 - prev2;
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}

/// k(S) of the branch with singular sequences `ks`, as a chain determinant.
pub fn k_invariant(ks: &[u32]) -> Result<i64> {
    let diag = branch_selfintersections(ks);
    Ok(chain_det(&ChainMatrix::new(diag)?))
}

/// Exhaustive check that k(S) equals r+s over a range of sequences.
pub fn k_matches_matrix(ks: &[u32]) -> Result<bool> {
    let m = seq_to_matrix(&DlousskySeq::new(ks.to_vec(), 1)?);
    Ok(k_invariant(ks)? == m.r + m.s)
}
