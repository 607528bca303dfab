//! Truncated bivariate power series over a scalar domain.
//!
//! Series are sparse maps (i, j) -> coefficient of z1^i z2^j, truncated at a
//! fixed total degree. All stored coefficients are nonzero; operations
//! truncate to the common order. Values are immutable after construction.

use std::collections::BTreeMap;

use num::rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::{rat_to_f64, Rat, Scalar, ScalarDomain};

#[derive(Debug, Clone)]
pub struct TruncSeries2 {
    domain: ScalarDomain,
    order: u32,
    coeffs: BTreeMap<(u32, u32), Scalar>,
}

impl TruncSeries2 {
    pub fn zero(domain: &ScalarDomain, order: u32) -> Self {
        TruncSeries2 { domain: domain.clone(), order, coeffs: BTreeMap::new() }
    }

    pub fn constant(domain: &ScalarDomain, order: u32, value: Scalar) -> Self {
        Self::monomial(domain, order, 0, 0, value)
    }

    pub fn one(domain: &ScalarDomain, order: u32) -> Self {
        Self::constant(domain, order, domain.one())
    }

    pub fn monomial(domain: &ScalarDomain, order: u32, i: u32, j: u32, value: Scalar) -> Self {
        let mut coeffs = BTreeMap::new();
        if i + j <= order && !value.is_zero() {
            coeffs.insert((i, j), value);
        }
        TruncSeries2 { domain: domain.clone(), order, coeffs }
    }

    pub fn var1(domain: &ScalarDomain, order: u32) -> Self {
        Self::monomial(domain, order, 1, 0, domain.one())
    }

    pub fn var2(domain: &ScalarDomain, order: u32) -> Self {
        Self::monomial(domain, order, 0, 1, domain.one())
    }

    pub fn domain(&self) -> &ScalarDomain {
        &self.domain
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, i: u32, j: u32) -> Scalar {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(|| self.domain.zero())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Scalar)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Minimal total degree of a stored monomial; order + 1 for the zero
    /// series at this truncation.
    pub fn min_order(&self) -> u32 {
        self.coeffs.keys().map(|&(i, j)| i + j).min().unwrap_or(self.order + 1)
    }

    /// Largest coefficient modulus, for floating-mode residual reports.
    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn insert(&mut self, i: u32, j: u32, value: Scalar) {
        if i + j > self.order {
            return;
        }
        if value.is_zero() {
            self.coeffs.remove(&(i, j));
        } else {
            self.coeffs.insert((i, j), value);
        }
    }

    pub fn truncate_to(&self, order: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&(i, j), _)| i + j <= order)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        TruncSeries2 { domain: self.domain.clone(), order, coeffs }
    }

    fn check_mode(&self, rhs: &TruncSeries2, what: &str) -> Result<()> {
        if !self.domain.same_mode(&rhs.domain) {
            return Err(Error::ModeMismatch(what.into()));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &TruncSeries2) -> Result<TruncSeries2> {
        self.check_mode(rhs, "add")?;
        let order = self.order.min(rhs.order);
        let mut out = self.truncate_to(order);
        for (&(i, j), v) in rhs.coeffs.iter() {
            if i + j > order {
                continue;
            }
            let sum = out.coeff(i, j).add(v);
            out.insert(i, j, sum);
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &TruncSeries2) -> Result<TruncSeries2> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> TruncSeries2 {
        let coeffs = self.coeffs.iter().map(|(k, v)| (*k, v.neg())).collect();
        TruncSeries2 { domain: self.domain.clone(), order: self.order, coeffs }
    }

    pub fn scale(&self, s: &Scalar) -> TruncSeries2 {
        if s.is_zero() {
            return TruncSeries2::zero(&self.domain, self.order);
        }
        let mut out = TruncSeries2::zero(&self.domain, self.order);
        for (&(i, j), v) in self.coeffs.iter() {
            out.insert(i, j, v.mul(s));
        }
        out
    }

    pub fn scale_rat(&self, r: &Rat) -> TruncSeries2 {
        self.scale(&self.domain.from_rat(r))
    }

    pub fn mul(&self, rhs: &TruncSeries2) -> Result<TruncSeries2> {
        self.check_mode(rhs, "mul")?;
        let order = self.order.min(rhs.order);
        let mut out = TruncSeries2::zero(&self.domain, order);
        for (&(i1, j1), a) in self.coeffs.iter() {
            if i1 + j1 > order {
                continue;
            }
            for (&(i2, j2), b) in rhs.coeffs.iter() {
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j > order {
                    continue;
                }
                let acc = out.coeff(i, j).add(&a.mul(b));
                out.insert(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn pow_usize(&self, e: usize) -> Result<TruncSeries2> {
        let mut acc = TruncSeries2::one(&self.domain, self.order);
        let mut sq = self.clone();
        let mut n = e;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq.clone())?;
            }
        }
        Ok(acc)
    }

    /// Binomial series (1 + h)^e for rational e, where h = self - 1. Requires
    /// a unit constant term. Agrees with `pow_usize` for integer e >= 0.
    pub fn pow_ratio(&self, e: &Rat) -> Result<TruncSeries2> {
        if !self.coeff(0, 0).is_one() {
            return Err(Error::NonUnitConstant);
        }
        let one = TruncSeries2::one(&self.domain, self.order);
        let h = self.sub(&one)?;
        let mut result = one;
        let mut hpow = TruncSeries2::one(&self.domain, self.order);
        let mut binom = Rat::from_integer(1.into());
        let mut m: i64 = 0;
        loop {
            m += 1;
            if (m as u32) > self.order {
                break;
            }
            // binom(e, m) = binom(e, m-1) * (e - m + 1) / m
            binom = binom * (e - crate::scalar::rat_i64(m - 1)) / crate::scalar::rat_i64(m);
            hpow = hpow.mul(&h)?;
            if hpow.is_zero() {
                break;
            }
            result = result.add(&hpow.scale_rat(&binom))?;
        }
        Ok(result)
    }

    /// Substitution f(g1, g2) for substituents vanishing at the origin.
    pub fn compose_pair(&self, g1: &TruncSeries2, g2: &TruncSeries2) -> Result<TruncSeries2> {
        self.check_mode(g1, "compose")?;
        self.check_mode(g2, "compose")?;
        if !g1.coeff(0, 0).is_zero() || !g2.coeff(0, 0).is_zero() {
            return Err(Error::NonVanishingSubstituent);
        }
        let order = self.order.min(g1.order).min(g2.order);
        let mut out = TruncSeries2::zero(&self.domain, order);
        // Power tables, extended on demand; powers stay truncated at `order`.
        let mut p1: Vec<TruncSeries2> = vec![TruncSeries2::one(&self.domain, order)];
        let mut p2: Vec<TruncSeries2> = vec![TruncSeries2::one(&self.domain, order)];
        for (&(i, j), c) in self.coeffs.iter() {
            if i + j > order {
                continue;
            }
            while p1.len() <= i as usize {
                let next = p1.last().unwrap().mul(g1)?;
                p1.push(next);
            }
            while p2.len() <= j as usize {
                let next = p2.last().unwrap().mul(g2)?;
                p2.push(next);
            }
            let term = p1[i as usize].mul(&p2[j as usize])?.scale(c);
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Partial derivative with respect to variable 1 or 2.
    pub fn derivative(&self, var: usize) -> TruncSeries2 {
        let mut out = TruncSeries2::zero(&self.domain, self.order);
        for (&(i, j), c) in self.coeffs.iter() {
            match var {
                1 if i > 0 => {
                    let scaled = c.mul_rat(&crate::scalar::rat_i64(i as i64));
                    let prev = out.coeff(i - 1, j).add(&scaled);
                    out.insert(i - 1, j, prev);
                }
                2 if j > 0 => {
                    let scaled = c.mul_rat(&crate::scalar::rat_i64(j as i64));
                    let prev = out.coeff(i, j - 1).add(&scaled);
                    out.insert(i, j - 1, prev);
                }
                _ => {}
            }
        }
        out
    }

    /// Exact structural equality after pruning; coefficients compared with
    /// `strict_eq`.
    pub fn strict_eq(&self, rhs: &TruncSeries2) -> bool {
        if self.coeffs.len() != rhs.coeffs.len() {
            return false;
        }
        self.coeffs
            .iter()
            .all(|(k, v)| rhs.coeffs.get(k).is_some_and(|w| v.strict_eq(w)))
    }

    pub fn approx_eq(&self, rhs: &TruncSeries2, tol: f64) -> bool {
        match self.sub(rhs) {
            Ok(d) => d.max_coeff_abs() <= tol,
            Err(_) => false,
        }
    }

    /// Numeric evaluation at a point (complex embedding in exact mode).
    pub fn eval_complex(&self, z1: num::complex::Complex64, z2: num::complex::Complex64) -> num::complex::Complex64 {
        let mut acc = num::complex::Complex64::new(0.0, 0.0);
        for (&(i, j), c) in self.coeffs.iter() {
            acc += c.approx() * z1.powu(i) * z2.powu(j);
        }
        acc
    }
}

pub fn rat_series_to_f64(r: &BigRational) -> f64 {
    rat_to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat_i64, ratio_i64};

    fn dom() -> ScalarDomain {
        ScalarDomain::rationals()
    }

    fn s(d: &ScalarDomain, n: i64) -> Scalar {
        d.from_i64(n)
    }

    #[test]
    fn mul_difference_of_squares() {
        let d = dom();
        let one = TruncSeries2::one(&d, 4);
        let z1 = TruncSeries2::var1(&d, 4);
        let f = one.add(&z1).unwrap();
        let g = one.sub(&z1).unwrap();
        let prod = f.mul(&g).unwrap();
        let mut expect = TruncSeries2::one(&d, 4);
        expect.insert(2, 0, s(&d, -1));
        assert!(prod.strict_eq(&expect));
    }

    #[test]
    fn truncation_drops_high_terms() {
        let d = dom();
        let z2 = TruncSeries2::var2(&d, 1);
        let sq = z2.mul(&z2).unwrap();
        assert!(sq.is_zero());
    }

    #[test]
    fn binomial_square() {
        let d = dom();
        let one = TruncSeries2::one(&d, 2);
        let f = one
            .add(&TruncSeries2::var1(&d, 2))
            .unwrap()
            .add(&TruncSeries2::var2(&d, 2))
            .unwrap();
        let sq = f.mul(&f).unwrap();
        // 1 + 2 z1 + 2 z2 + z1^2 + 2 z1 z2 + z2^2
        assert!(sq.coeff(0, 0).is_one());
        assert!(sq.coeff(1, 0).strict_eq(&s(&d, 2)));
        assert!(sq.coeff(0, 1).strict_eq(&s(&d, 2)));
        assert!(sq.coeff(2, 0).is_one());
        assert!(sq.coeff(1, 1).strict_eq(&s(&d, 2)));
        assert!(sq.coeff(0, 2).is_one());
        assert_eq!(sq.num_terms(), 6);
    }

    #[test]
    fn pow_ratio_square_root() {
        let d = dom();
        let f = TruncSeries2::one(&d, 2).add(&TruncSeries2::var2(&d, 2)).unwrap();
        let r = f.pow_ratio(&ratio_i64(1, 2)).unwrap();
        assert!(r.coeff(0, 0).is_one());
        assert!(r.coeff(0, 1).strict_eq(&d.from_rat(&ratio_i64(1, 2))));
        assert!(r.coeff(0, 2).strict_eq(&d.from_rat(&ratio_i64(-1, 8))));
    }

    #[test]
    fn pow_ratio_geometric() {
        let d = dom();
        let f = TruncSeries2::one(&d, 2).add(&TruncSeries2::var2(&d, 2)).unwrap();
        let r = f.pow_ratio(&rat_i64(-1)).unwrap();
        assert!(r.coeff(0, 1).strict_eq(&s(&d, -1)));
        assert!(r.coeff(0, 2).is_one());
    }

    #[test]
    fn pow_ratio_exponent_laws_on_units() {
        let d = dom();
        let f = TruncSeries2::one(&d, 5).add(&TruncSeries2::var2(&d, 5)).unwrap();
        let sq = f.mul(&f).unwrap();
        let back = sq.pow_ratio(&ratio_i64(1, 2)).unwrap();
        assert!(back.strict_eq(&f));
        let nonunit = TruncSeries2::var2(&d, 5);
        assert!(matches!(nonunit.pow_ratio(&ratio_i64(1, 2)), Err(Error::NonUnitConstant)));
    }

    #[test]
    fn pow_ratio_addition_law() {
        let d = dom();
        let mut f = TruncSeries2::one(&d, 6);
        f.insert(1, 0, s(&d, 2));
        f.insert(0, 1, d.from_rat(&ratio_i64(1, 3)));
        f.insert(1, 1, s(&d, -1));
        let a = ratio_i64(2, 3);
        let b = ratio_i64(-1, 2);
        let lhs = f.pow_ratio(&a).unwrap().mul(&f.pow_ratio(&b).unwrap()).unwrap();
        let rhs = f.pow_ratio(&(a + b)).unwrap();
        assert!(lhs.strict_eq(&rhs));
    }

    #[test]
    fn compose_swap_and_projection() {
        let d = dom();
        let ord = 6;
        let z1 = TruncSeries2::var1(&d, ord);
        let z2 = TruncSeries2::var2(&d, ord);
        let f = z1.mul(&z2).unwrap();
        let swapped = f.compose_pair(&z2, &z1).unwrap();
        assert!(swapped.strict_eq(&f));
        let proj = z1.compose_pair(&z1.mul(&z1).unwrap(), &z2).unwrap();
        assert!(proj.strict_eq(&z1.mul(&z1).unwrap()));
    }

    #[test]
    fn compose_substitution_by_hand() {
        // f = z1 + z2^2, g = (z2, z1 z2) -> z2 + z1^2 z2^2
        let d = dom();
        let ord = 6;
        let z1 = TruncSeries2::var1(&d, ord);
        let z2 = TruncSeries2::var2(&d, ord);
        let f = z1.add(&z2.mul(&z2).unwrap()).unwrap();
        let got = f.compose_pair(&z2, &z1.mul(&z2).unwrap()).unwrap();
        let mut expect = TruncSeries2::zero(&d, ord);
        expect.insert(0, 1, s(&d, 1));
        expect.insert(2, 2, s(&d, 1));
        assert!(got.strict_eq(&expect));
    }

    #[test]
    fn compose_rejects_nonvanishing() {
        let d = dom();
        let z1 = TruncSeries2::var1(&d, 3);
        let one = TruncSeries2::one(&d, 3);
        assert!(matches!(
            z1.compose_pair(&one, &z1),
            Err(Error::NonVanishingSubstituent)
        ));
    }

    #[test]
    fn min_order_examples() {
        let d = dom();
        let ord = 7;
        let mut f = TruncSeries2::zero(&d, ord);
        f.insert(2, 1, s(&d, 1));
        f.insert(0, 5, s(&d, 1));
        assert_eq!(f.min_order(), 3);
        let zero = TruncSeries2::zero(&d, 7);
        assert_eq!(zero.min_order(), 8);
        let z12 = TruncSeries2::var1(&d, 7).mul(&TruncSeries2::var2(&d, 7)).unwrap();
        assert_eq!(z12.pow_usize(3).unwrap().min_order(), 6);
    }

    #[test]
    fn mode_mismatch_detected() {
        let d = dom();
        let c = ScalarDomain::Complex;
        let f = TruncSeries2::one(&d, 3);
        let g = TruncSeries2::one(&c, 3);
        assert!(matches!(f.add(&g), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn derivative_basics() {
        let d = dom();
        let mut f = TruncSeries2::zero(&d, 5);
        f.insert(2, 1, s(&d, 3)); // 3 z1^2 z2
        let fx = f.derivative(1);
        assert!(fx.coeff(1, 1).strict_eq(&s(&d, 6)));
        let fy = f.derivative(2);
        assert!(fy.coeff(2, 0).strict_eq(&s(&d, 3)));
    }

    #[test]
    fn exact_and_complex_agree() {
        let d = dom();
        let c = ScalarDomain::Complex;
        let build = |dm: &ScalarDomain| {
            let mut f = TruncSeries2::one(dm, 8);
            f.insert(1, 0, dm.from_rat(&ratio_i64(1, 2)));
            f.insert(0, 2, dm.from_rat(&ratio_i64(-2, 7)));
            f.insert(1, 1, dm.from_rat(&ratio_i64(3, 5)));
            f
        };
        let fe = build(&d).pow_ratio(&ratio_i64(2, 3)).unwrap();
        let fc = build(&c).pow_ratio(&ratio_i64(2, 3)).unwrap();
        for (&(i, j), v) in fe.iter() {
            let w = fc.coeff(i, j).approx();
            assert!((v.approx() - w).norm() < 1e-10, "({i},{j})");
        }
    }
}
