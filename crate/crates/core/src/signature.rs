//! Blow-up combinatorics of one-branch Kato surfaces.
//!
//! A Dloussky sequence (k_1, ..., k_N) together with the regular-sequence
//! length l encodes the blow-up word in the two elementary matrices
//! A = [[1,1],[0,1]] and A' = [[0,1],[1,1]]. The matrix of the word is the
//! product of the blocks [[0,1],[1,k_i]] = A' A^(k_i - 1), and every integer
//! invariant of the surface derives from its entries (p, q, r, s) and l.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One letter of the blow-up word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    /// [[1,1],[0,1]]; blow-up at the intersection point kept in the plain chart.
    A,
    /// [[0,1],[1,1]]; blow-up entering the primed chart.
    APrime,
}

impl Letter {
    pub fn matrix(self) -> Mat2Z {
        match self {
            Letter::A => Mat2Z { p: 1, q: 1, r: 0, s: 1 },
            Letter::APrime => Mat2Z { p: 0, q: 1, r: 1, s: 1 },
        }
    }
}

/// The singular-sequence data (k_1, ..., k_N) and regular length l.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DlousskySeq {
    pub ks: Vec<u32>,
    pub l: u32,
}

impl DlousskySeq {
    pub fn new(ks: Vec<u32>, l: u32) -> Result<Self> {
        if ks.is_empty() || ks.iter().any(|&k| k == 0) || l == 0 {
            return Err(Error::InvalidSignature(
                "need N >= 1 singular sequences with k_i >= 1 and l >= 1".into(),
            ));
        }
        Ok(DlousskySeq { ks, l })
    }
}

/// A nonnegative integer 2x2 matrix with determinant +-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat2Z {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

impl Mat2Z {
    pub fn identity() -> Self {
        Mat2Z { p: 1, q: 0, r: 0, s: 1 }
    }

    pub fn det(&self) -> i64 {
        self.p * self.s - self.q * self.r
    }

    pub fn mul(&self, rhs: &Mat2Z) -> Mat2Z {
        Mat2Z {
            p: self.p * rhs.p + self.q * rhs.r,
            q: self.p * rhs.q + self.q * rhs.s,
            r: self.r * rhs.p + self.s * rhs.r,
            s: self.r * rhs.q + self.s * rhs.s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 0 || self.q < 0 || self.r < 0 || self.s < 0 {
            return Err(Error::InvalidSignature("matrix entries must be nonnegative".into()));
        }
        if self.det().abs() != 1 {
            return Err(Error::InvalidSignature(format!(
                "determinant must be +-1, got {}",
                self.det()
            )));
        }
        Ok(())
    }

    fn block(k: u32) -> Mat2Z {
        Mat2Z { p: 0, q: 1, r: 1, s: k as i64 }
    }
}

/// The matrix product of the singular-sequence blocks [[0,1],[1,k_i]].
pub fn seq_to_matrix(seq: &DlousskySeq) -> Mat2Z {
    seq.ks
        .iter()
        .fold(Mat2Z::identity(), |acc, &k| acc.mul(&Mat2Z::block(k)))
}

/// Recovers the Dloussky block lengths from a word matrix by peeling blocks
/// off the right, backtracking over the in-range quotients.
pub fn matrix_to_seq(m: &Mat2Z) -> Result<Vec<u32>> {
    m.validate()?;
    fn peel(m: &Mat2Z, out: &mut Vec<u32>) -> bool {
        if m.p == 0 {
            // base case [[0,1],[1,k]]
            if m.q == 1 && m.r == 1 && m.s >= 1 {
                out.push(m.s as u32);
                return true;
            }
            return false;
        }
        // m = m' * [[0,1],[1,k]] forces m' = [[q - k p, p],[s - k r, r]].
        let kmax = if m.r > 0 { (m.q / m.p).min(m.s / m.r) } else { m.q / m.p };
        for k in (1..=kmax).rev() {
            let prev = Mat2Z { p: m.q - k * m.p, q: m.p, r: m.s - k * m.r, s: m.r };
            if prev.p < 0 || prev.q < 0 || prev.r < 0 || prev.s < 0 || prev.det().abs() != 1 {
                continue;
            }
            if peel(&prev, out) {
                out.push(k as u32);
                return true;
            }
        }
        false
    }
    let mut out = Vec::new();
    if peel(m, &mut out) {
        Ok(out)
    } else {
        Err(Error::NotFactorable(format!("{m:?}")))
    }
}

/// Factors the word matrix into letters, one A' A^(k_i - 1) group per block.
pub fn matrix_to_word(m: &Mat2Z) -> Result<Vec<Letter>> {
    let ks = matrix_to_seq(m).map_err(|_| Error::NotFactorable(format!("{m:?}")))?;
    let mut word = Vec::new();
    for k in ks {
        word.push(Letter::APrime);
        for _ in 1..k {
            word.push(Letter::A);
        }
    }
    Ok(word)
}

/// Compiles a letter word back into its matrix.
pub fn word_to_matrix(word: &[Letter]) -> Mat2Z {
    word.iter().fold(Mat2Z::identity(), |acc, l| acc.mul(&l.matrix()))
}

/// Opposite self-intersections along the branch, per singular-sequence block.
pub fn branch_selfintersections(ks: &[u32]) -> Vec<i64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < ks.len() {
        for _ in 1..ks[i] {
            out.push(2);
        }
        out.push(ks[i + 1] as i64 + 2);
        i += 2;
    }
    if i < ks.len() {
        for _ in 0..ks[i] {
            out.push(2);
        }
    }
    out
}

/// A one-branch signature with every derived integer invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSignature {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
    pub l: u32,
    pub ks: Vec<u32>,
    /// ps - qr = +-1
    pub delta: i64,
    /// (r+s) - (p+q), in [1, r+s)
    pub d: i64,
    /// b_2 = l + sum k_i
    pub n: u32,
    /// p + q + l - 1
    pub sigma: u32,
    /// k(S) = r + s
    pub k_s: i64,
    /// max(0, floor((l-d)/(r+s-1)))
    pub cap_k: u32,
    /// l = d + k (r+s-1) for some k >= 0
    pub twisted: bool,
}

/// Populates every derived invariant from the matrix, l, and the sequence.
/// An empty `ks` is recovered from the matrix by block factorization.
pub fn derive_signature(m: &Mat2Z, l: u32, ks: &[u32]) -> Result<BranchSignature> {
    m.validate()?;
    if l == 0 {
        return Err(Error::InvalidSignature("l must be >= 1".into()));
    }
    let ks: Vec<u32> = if ks.is_empty() {
        matrix_to_seq(m)?
    } else {
        let check = seq_to_matrix(&DlousskySeq::new(ks.to_vec(), l)?);
        if check != *m {
            return Err(Error::WordMismatch(format!(
                "sequence {ks:?} compiles to {check:?}, not {m:?}"
            )));
        }
        ks.to_vec()
    };
    let (p, q, r, s) = (m.p, m.q, m.r, m.s);
    let delta = m.det();
    let d = (r + s) - (p + q);
    if d < 1 || d >= r + s {
        return Err(Error::InvalidSignature(format!(
            "d = (r+s)-(p+q) = {d} must satisfy 1 <= d < r+s"
        )));
    }
    let n = l + ks.iter().sum::<u32>();
    let sigma = (p + q) as u32 + l - 1;
    let k_s = r + s;
    let span = k_s - 1;
    let diff = l as i64 - d;
    let cap_k = diff.div_euclid(span).max(0) as u32;
    let twisted = diff >= 0 && diff.rem_euclid(span) == 0;
    Ok(BranchSignature {
        p,
        q,
        r,
        s,
        l,
        ks,
        delta,
        d,
        n,
        sigma,
        k_s,
        cap_k,
        twisted,
    })
}

impl BranchSignature {
    pub fn from_seq(seq: &DlousskySeq) -> Result<Self> {
        derive_signature(&seq_to_matrix(seq), seq.l, &seq.ks)
    }

    pub fn matrix(&self) -> Mat2Z {
        Mat2Z { p: self.p, q: self.q, r: self.r, s: self.s }
    }

    /// Index of a_{l+K}, the glueing coefficient.
    pub fn ak_index(&self) -> u32 {
        self.l + self.cap_k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_to_matrix_examples() {
        let m = seq_to_matrix(&DlousskySeq::new(vec![1], 1).unwrap());
        assert_eq!(m, Mat2Z { p: 0, q: 1, r: 1, s: 1 });
        let m = seq_to_matrix(&DlousskySeq::new(vec![1, 1], 1).unwrap());
        assert_eq!(m, Mat2Z { p: 1, q: 1, r: 1, s: 2 });
        let m = seq_to_matrix(&DlousskySeq::new(vec![2, 3], 1).unwrap());
        assert_eq!(m, Mat2Z { p: 1, q: 3, r: 2, s: 7 });
    }

    #[test]
    fn determinant_sign_alternates() {
        for n in 1..5usize {
            let seq = DlousskySeq::new(vec![2; n], 1).unwrap();
            assert_eq!(seq_to_matrix(&seq).det(), if n % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn word_factorization_examples() {
        let w = matrix_to_word(&Mat2Z { p: 0, q: 1, r: 1, s: 1 }).unwrap();
        assert_eq!(w, vec![Letter::APrime]);
        let w = matrix_to_word(&Mat2Z { p: 0, q: 1, r: 1, s: 2 }).unwrap();
        assert_eq!(w, vec![Letter::APrime, Letter::A]);
        let w = matrix_to_word(&Mat2Z { p: 1, q: 1, r: 1, s: 2 }).unwrap();
        assert_eq!(w, vec![Letter::APrime, Letter::APrime]);
    }

    #[test]
    fn word_round_trip_exhaustive() {
        // every sequence with N <= 3, k_i <= 4
        let mut seqs: Vec<Vec<u32>> = Vec::new();
        for a in 1..=4 {
            seqs.push(vec![a]);
            for b in 1..=4 {
                seqs.push(vec![a, b]);
                for c in 1..=4 {
                    seqs.push(vec![a, b, c]);
                }
            }
        }
        for ks in seqs {
            let seq = DlousskySeq::new(ks.clone(), 1).unwrap();
            let m = seq_to_matrix(&seq);
            assert_eq!(matrix_to_seq(&m).unwrap(), ks, "peel {ks:?}");
            let w = matrix_to_word(&m).unwrap();
            assert_eq!(word_to_matrix(&w), m, "compile {ks:?}");
            assert_eq!(w.len() as u32, ks.iter().sum::<u32>(), "length {ks:?}");
        }
    }

    #[test]
    fn not_factorable_matrix() {
        // identity is not a nonempty block product
        assert!(matrix_to_word(&Mat2Z::identity()).is_err());
    }

    #[test]
    fn selfintersection_sequences() {
        assert_eq!(branch_selfintersections(&[3]), vec![2, 2, 2]);
        assert_eq!(branch_selfintersections(&[2, 3]), vec![2, 5]);
        assert_eq!(branch_selfintersections(&[1, 1, 1]), vec![3, 2]);
    }

    #[test]
    fn derive_signature_examples() {
        let sig = derive_signature(&Mat2Z { p: 0, q: 1, r: 1, s: 1 }, 1, &[1]).unwrap();
        assert_eq!(
            (sig.delta, sig.d, sig.n, sig.sigma, sig.k_s, sig.cap_k, sig.twisted),
            (-1, 1, 2, 1, 2, 0, true)
        );
        let sig = derive_signature(&Mat2Z { p: 0, q: 1, r: 1, s: 2 }, 2, &[2]).unwrap();
        assert_eq!(
            (sig.delta, sig.d, sig.n, sig.sigma, sig.k_s, sig.cap_k, sig.twisted),
            (-1, 2, 4, 2, 3, 0, true)
        );
        let sig = derive_signature(&Mat2Z { p: 1, q: 1, r: 1, s: 2 }, 2, &[1, 1]).unwrap();
        assert_eq!(
            (sig.delta, sig.d, sig.n, sig.sigma, sig.k_s, sig.cap_k, sig.twisted),
            (1, 1, 4, 3, 3, 0, false)
        );
    }

    #[test]
    fn derive_signature_rejects_bad_input() {
        assert!(derive_signature(&Mat2Z { p: 1, q: 1, r: 1, s: 1 }, 1, &[]).is_err());
        assert!(derive_signature(&Mat2Z { p: 0, q: 1, r: 1, s: 1 }, 0, &[1]).is_err());
        // d out of range: identity has d = 0
        assert!(derive_signature(&Mat2Z::identity(), 1, &[]).is_err());
        // inconsistent ks
        assert!(matches!(
            derive_signature(&Mat2Z { p: 0, q: 1, r: 1, s: 2 }, 1, &[3]),
            Err(Error::WordMismatch(_))
        ));
    }

    #[test]
    fn gcd_invariant() {
        for ks in [vec![1], vec![2, 3], vec![4, 1, 2], vec![5, 5, 5, 5]] {
            let sig = BranchSignature::from_seq(&DlousskySeq::new(ks, 2).unwrap()).unwrap();
            assert_eq!(num::integer::gcd(sig.p + sig.q, sig.r + sig.s), 1);
        }
    }

    #[test]
    fn k_clamps_at_zero_when_l_below_d() {
        // (1,3,2,7): d = 9 - 4 = 5, l = 2 < d
        let sig = derive_signature(&Mat2Z { p: 1, q: 3, r: 2, s: 7 }, 2, &[2, 3]).unwrap();
        assert_eq!(sig.cap_k, 0);
        assert!(!sig.twisted);
    }
}
