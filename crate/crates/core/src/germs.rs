//! Contracting germ families and their closed-form invariants.
//!
//! The central object is the birational germ G attached to a one-branch
//! signature, in two polynomial presentations: the origin-chart form used by
//! the composition oracle and the Jacobian identity, and the generic-chart
//! form consumed by the conjugation solver. Favre polynomial germs and the
//! classical Enoki / Inoue-Hirzebruch / Hopf normal forms are carried along
//! for evaluation and iteration.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::integer::gcd;
use num::Signed;

use crate::error::{Error, Result};
use crate::scalar::{rat_i64, Rat, Scalar, ScalarDomain};
use crate::series::TruncSeries2;
use crate::signature::{BranchSignature, Letter};

/// Favre polynomial germ (lambda z1 z2^sigma + P(z2) + c z2^(sigma k/(k-1)), z2^k).
#[derive(Debug, Clone)]
pub struct FavreGerm {
    pub domain: ScalarDomain,
    pub lambda: Scalar,
    pub sigma: u32,
    pub k: u32,
    /// Coefficients of P; keys are the z2-exponents.
    pub b: BTreeMap<u32, Scalar>,
    pub c: Scalar,
}

impl FavreGerm {
    pub fn new(
        domain: ScalarDomain,
        lambda: Scalar,
        sigma: u32,
        k: u32,
        b: BTreeMap<u32, Scalar>,
        c: Scalar,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::Invalid("Favre germ needs k >= 2".into()));
        }
        if lambda.is_zero() {
            return Err(Error::Invalid("Favre germ needs lambda != 0".into()));
        }
        let germ = FavreGerm { domain, lambda, sigma, k, b, c };
        let j = germ.min_b_index().ok_or_else(|| Error::Invalid("P must be nonzero".into()))?;
        if j == 0 || j >= k {
            return Err(Error::Invalid(format!("type root j = {j} must satisfy 0 < j < k")));
        }
        Ok(germ)
    }

    pub fn min_b_index(&self) -> Option<u32> {
        self.b.iter().find(|(_, v)| !v.is_zero()).map(|(k, _)| *k)
    }

    /// Exponent of the twisting monomial, defined when (k-1) | sigma k.
    pub fn c_exponent(&self) -> Option<u32> {
        let num = self.sigma * self.k;
        if num % (self.k - 1) == 0 {
            Some(num / (self.k - 1))
        } else {
            None
        }
    }

    pub fn as_series(&self, order: u32) -> (TruncSeries2, TruncSeries2) {
        let d = &self.domain;
        let mut f1 = TruncSeries2::monomial(d, order, 1, self.sigma, self.lambda.clone());
        for (&i, bi) in self.b.iter() {
            if bi.is_zero() {
                continue;
            }
            let cur = f1.coeff(0, i).add(bi);
            f1.insert(0, i, cur);
        }
        if !self.c.is_zero() {
            let e = self.c_exponent().expect("c != 0 requires (k-1) | sigma k");
            let cur = f1.coeff(0, e).add(&self.c);
            f1.insert(0, e, cur);
        }
        let f2 = TruncSeries2::monomial(d, order, 0, self.k, d.one());
        (f1, f2)
    }

    pub fn eval_complex(&self, z: (Complex64, Complex64)) -> (Complex64, Complex64) {
        let (z1, z2) = z;
        let mut w1 = self.lambda.approx() * z1 * z2.powu(self.sigma);
        for (&i, bi) in self.b.iter() {
            w1 += bi.approx() * z2.powu(i);
        }
        if !self.c.is_zero() {
            let e = self.c_exponent().expect("c != 0 requires (k-1) | sigma k");
            w1 += self.c.approx() * z2.powu(e);
        }
        (w1, z2.powu(self.k))
    }
}

/// The birational germ of a one-branch signature, with coefficient vector
/// a_0, a_1..a_{l-1} and the glueing coefficient a_{l+K}.
#[derive(Debug, Clone)]
pub struct BiratGerm {
    pub sig: BranchSignature,
    pub domain: ScalarDomain,
    pub a0: Scalar,
    /// a_1 .. a_{l-1}
    pub a: Vec<Scalar>,
    /// a_{l+K}
    pub a_k: Scalar,
}

impl BiratGerm {
    pub fn new(
        sig: BranchSignature,
        domain: ScalarDomain,
        a0: Scalar,
        a: Vec<Scalar>,
        a_k: Scalar,
    ) -> Result<Self> {
        if a0.is_zero() {
            return Err(Error::Invalid("a0 must be nonzero".into()));
        }
        if a.len() as u32 != sig.l - 1 {
            return Err(Error::Invalid(format!(
                "expected {} free coefficients a_1..a_{}, got {}",
                sig.l - 1,
                sig.l - 1,
                a.len()
            )));
        }
        Ok(BiratGerm { sig, domain, a0, a, a_k })
    }

    /// The coefficient a_i for 0 <= i <= l-1 or i = l+K.
    pub fn coeff_a(&self, i: u32) -> Scalar {
        if i == 0 {
            self.a0.clone()
        } else if i < self.sig.l {
            self.a[(i - 1) as usize].clone()
        } else if i == self.sig.ak_index() {
            self.a_k.clone()
        } else {
            self.domain.zero()
        }
    }

    /// Copy with the superfluous glueing coefficient dropped.
    pub fn without_ak(&self) -> BiratGerm {
        let mut g = self.clone();
        g.a_k = self.domain.zero();
        g
    }

    /// Origin-chart polynomial pair
    /// (z1^(p+rl) z2^(q+sl) + sum a_i (z1^r z2^s)^(i+1) + a_{l+K} (z1^r z2^s)^(l+K+1), z1^r z2^s).
    pub fn origin_form(&self, order: u32) -> (TruncSeries2, TruncSeries2) {
        let d = &self.domain;
        let sig = &self.sig;
        let (p, q, r, s, l) = (sig.p as u32, sig.q as u32, sig.r as u32, sig.s as u32, sig.l);
        let mut g1 = TruncSeries2::monomial(d, order, p + r * l, q + s * l, d.one());
        for i in 0..l {
            let ai = self.coeff_a(i);
            if ai.is_zero() {
                continue;
            }
            let e = i + 1;
            let cur = g1.coeff(r * e, s * e).add(&ai);
            g1.insert(r * e, s * e, cur);
        }
        if !self.a_k.is_zero() {
            let e = sig.ak_index() + 1;
            let cur = g1.coeff(r * e, s * e).add(&self.a_k);
            g1.insert(r * e, s * e, cur);
        }
        let g2 = TruncSeries2::monomial(d, order, r, s, d.one());
        (g1, g2)
    }

    /// Natural polynomial degree of the origin form; forms computed at this
    /// order or higher are exact polynomials, not truncations.
    pub fn origin_degree(&self) -> u32 {
        let sig = &self.sig;
        let rs = (sig.r + sig.s) as u32;
        let dom = (sig.p + sig.q) as u32 + rs * sig.l;
        dom.max(rs * (sig.ak_index() + 1))
    }

    /// The root polynomial B(z) = z1 z2^l + sum a_i z2^(i+1) + a_{l+K} z2^(l+K+1)
    /// of the generic chart.
    pub fn root_poly(&self, order: u32) -> TruncSeries2 {
        let d = &self.domain;
        let l = self.sig.l;
        let mut b = TruncSeries2::monomial(d, order, 1, l, d.one());
        for i in 0..l {
            let ai = self.coeff_a(i);
            if ai.is_zero() {
                continue;
            }
            let cur = b.coeff(0, i + 1).add(&ai);
            b.insert(0, i + 1, cur);
        }
        if !self.a_k.is_zero() {
            let e = self.sig.ak_index() + 1;
            let cur = b.coeff(0, e).add(&self.a_k);
            b.insert(0, e, cur);
        }
        b
    }

    /// Generic-chart polynomial pair (B^p z2^q, B^r z2^s).
    pub fn generic_form(&self, order: u32) -> Result<(TruncSeries2, TruncSeries2)> {
        let d = &self.domain;
        let sig = &self.sig;
        let b = self.root_poly(order);
        let z2q = TruncSeries2::monomial(d, order, 0, sig.q as u32, d.one());
        let z2s = TruncSeries2::monomial(d, order, 0, sig.s as u32, d.one());
        let g1 = b.pow_usize(sig.p as usize)?.mul(&z2q)?;
        let g2 = b.pow_usize(sig.r as usize)?.mul(&z2s)?;
        Ok((g1, g2))
    }

    /// Recomposes the germ from its individual blow-ups and the glueing map,
    /// the independent oracle for `origin_form`.
    pub fn compose_blowups_oracle(&self, order: u32) -> Result<(TruncSeries2, TruncSeries2)> {
        let d = &self.domain;
        let sig = &self.sig;
        let l = sig.l;
        let word = crate::signature::matrix_to_word(&sig.matrix())
            .map_err(|e| Error::WordMismatch(e.to_string()))?;
        if word.first() != Some(&Letter::APrime) {
            return Err(Error::WordMismatch("word must start with a primed blow-up".into()));
        }

        // Apply innermost-first: Pi_{n-1}, ..., Pi_{l+1}, Pi_l, Pi_{l-1}, ..., Pi_0, sigma-bar.
        let mut h1 = TruncSeries2::var1(d, order);
        let mut h2 = TruncSeries2::var2(d, order);

        // Non-generic blow-ups Pi_{l+1}..Pi_{n-1}: letters after the first.
        for letter in word.iter().skip(1).rev() {
            let prod = h1.mul(&h2)?;
            match letter {
                Letter::A => h1 = prod,               // (u v, v)
                Letter::APrime => {
                    h1 = std::mem::replace(&mut h2, prod); // (v, u v)
                }
            }
        }
        // Pi_l: (v + a_{l-1}, u v), the primed generic blow-up.
        {
            let prod = h1.mul(&h2)?;
            let mut shifted = h2.clone();
            let a = self.coeff_a(l - 1);
            let cur = shifted.coeff(0, 0).add(&a);
            shifted.insert(0, 0, cur);
            h1 = shifted;
            h2 = prod;
        }
        // Pi_{l-1}..Pi_1: (u v + a_{i-1}, v); then Pi_0: (u v, v).
        for i in (0..l).rev() {
            let mut prod = h1.mul(&h2)?;
            if i >= 1 {
                let a = self.coeff_a(i - 1);
                let cur = prod.coeff(0, 0).add(&a);
                prod.insert(0, 0, cur);
            }
            h1 = prod;
        }
        // sigma-bar: (u + a_{l+K} v^(l+K+1), v).
        if !self.a_k.is_zero() {
            let e = sig.ak_index() + 1;
            let bump = h2.pow_usize(e as usize)?.scale(&self.a_k);
            h1 = h1.add(&bump)?;
        }
        Ok((h1, h2))
    }

    /// det DG of the origin form, computed symbolically from the partials.
    pub fn jacobian_det(&self) -> Result<TruncSeries2> {
        let order = 2 * self.origin_degree();
        let (g1, g2) = self.origin_form(order);
        let a = g1.derivative(1).mul(&g2.derivative(2))?;
        let b = g1.derivative(2).mul(&g2.derivative(1))?;
        a.sub(&b)
    }

    /// The monomial delta z1^(p+r(l+1)-1) z2^(q+s(l+1)-1) the Jacobian must equal.
    pub fn jacobian_expected(&self) -> TruncSeries2 {
        let sig = &self.sig;
        let order = 2 * self.origin_degree();
        let i = (sig.p + sig.r * (sig.l as i64 + 1) - 1) as u32;
        let j = (sig.q + sig.s * (sig.l as i64 + 1) - 1) as u32;
        TruncSeries2::monomial(&self.domain, order, i, j, self.domain.from_i64(sig.delta))
    }

    pub fn eval_complex(&self, z: (Complex64, Complex64)) -> (Complex64, Complex64) {
        let sig = &self.sig;
        let (z1, z2) = z;
        let w = z1.powu(sig.r as u32) * z2.powu(sig.s as u32);
        let mut w1 = z1.powu((sig.p + sig.r * sig.l as i64) as u32)
            * z2.powu((sig.q + sig.s * sig.l as i64) as u32);
        for i in 0..sig.l {
            let ai = self.coeff_a(i);
            if !ai.is_zero() {
                w1 += ai.approx() * w.powu(i + 1);
            }
        }
        if !self.a_k.is_zero() {
            w1 += self.a_k.approx() * w.powu(sig.ak_index() + 1);
        }
        (w1, w)
    }
}

/// Vanishing orders (u, v) of the anticanonical 2-vector field along the two
/// curve germs, solved from the 2x2 linear system they satisfy.
pub fn uv_exponents(sig: &BranchSignature) -> (Rat, Rat) {
    let (p, q, r, s, l) = (sig.p, sig.q, sig.r, sig.s, sig.l as i64);
    // (r-1) u + r v = p + r(l+1) - 1
    // s u + (s-1) v = q + s(l+1) - 1
    let a11 = rat_i64(r - 1);
    let a12 = rat_i64(r);
    let a21 = rat_i64(s);
    let a22 = rat_i64(s - 1);
    let b1 = rat_i64(p + r * (l + 1) - 1);
    let b2 = rat_i64(q + s * (l + 1) - 1);
    let det = &a11 * &a22 - &a12 * &a21;
    let u = (&b1 * &a22 - &a12 * &b2) / det.clone();
    let v = (&a11 * &b2 - &b1 * &a21) / det;
    (u, v)
}

/// Index of the surface: (r+s-1) / gcd(r+s-1, sigma).
pub fn index(sig: &BranchSignature) -> i64 {
    let span = sig.k_s - 1;
    span / gcd(span, sig.sigma as i64)
}

/// Left-hand side of the global vector field criterion
/// 1 - delta (r+s) a0^((K+1) r - p + 1); zero iff a global field exists.
pub fn vf_condition(sig: &BranchSignature, a0: &Scalar) -> Result<Scalar> {
    if !sig.twisted {
        return Err(Error::NotTwisted);
    }
    let u = (sig.cap_k as i64 + 1) * sig.r - sig.p + 1;
    let term = a0
        .pow_i64(u)?
        .mul_rat(&rat_i64(sig.delta * sig.k_s));
    Ok(a0.domain().one().sub(&term))
}

fn pow_fractional(a0: &Scalar, num: i64, den: i64) -> Result<Scalar> {
    // a0^(num/den), den >= 1. Integer exponents are direct; otherwise exact
    // mode requires a0 = tau^den for the field generator tau.
    if num % den == 0 {
        return a0.pow_i64(num / den);
    }
    match a0 {
        Scalar::Complex(z) => {
            let e = num as f64 / den as f64;
            Ok(Scalar::Complex(z.powf(e)))
        }
        Scalar::Exact(_) => {
            let dom = a0.domain();
            let tau = dom.generator();
            let check = tau.pow_i64(den)?;
            if check.strict_eq(a0) {
                tau.pow_i64(num)
            } else {
                Err(Error::FractionalPower(format!(
                    "a0^({num}/{den}) needs a0 = tau^{den} in the chosen field"
                )))
            }
        }
    }
}

/// The twisting factor lambda = delta / (eps^sigma k) a0^(p - 1 - r sigma / (k-1)).
pub fn lambda_of(sig: &BranchSignature, a0: &Scalar, eps: &Scalar) -> Result<Scalar> {
    let k = sig.k_s;
    let num = (sig.p - 1) * (k - 1) - sig.r * sig.sigma as i64;
    let pow = pow_fractional(a0, num, k - 1)?;
    let eps_pow = eps.pow_i64(sig.sigma as i64)?;
    pow.mul_rat(&Rat::new(sig.delta.into(), k.into())).div(&eps_pow)
}

/// The anticanonical twisting factor kappa = delta^mu a0^(mu (r sigma/(k-1) - p + 1)).
pub fn kappa_of(sig: &BranchSignature, a0: &Scalar) -> Result<Scalar> {
    let mu = index(sig);
    let k = sig.k_s;
    let e = Rat::new((mu * (sig.r * sig.sigma as i64 - (sig.p - 1) * (k - 1))).into(), (k - 1).into());
    if !e.is_integer() || !e.is_positive() {
        return Err(Error::NonIntegerExponent(e.to_string()));
    }
    let e = e.to_integer();
    use num::ToPrimitive;
    let pow = a0.pow_i64(e.to_i64().ok_or_else(|| Error::NonIntegerExponent(e.to_string()))?)?;
    let sign = if sig.delta == -1 && mu % 2 == 1 { -1 } else { 1 };
    Ok(pow.mul_rat(&rat_i64(sign)))
}

/// The type (m_1, .., m_rho) of a Favre germ in normal form.
pub fn favre_type(f: &FavreGerm) -> Result<(Vec<u32>, usize)> {
    let j = f.min_b_index().ok_or(Error::NonTerminating)?;
    let mut ms = vec![j];
    let mut i_cur = gcd(f.k, j);
    let mut last = j;
    while i_cur != 1 {
        let next = f
            .b
            .iter()
            .filter(|(&m, v)| m > last && !v.is_zero() && gcd(i_cur, m) < i_cur)
            .map(|(&m, _)| m)
            .next();
        match next {
            Some(m) => {
                ms.push(m);
                i_cur = gcd(i_cur, m);
                last = m;
            }
            None => return Err(Error::NonTerminating),
        }
    }
    let rho = ms.len();
    Ok((ms, rho))
}

/// Classical one-parameter germ families, for evaluation and iteration only.
#[derive(Debug, Clone)]
pub enum AuxGerm {
    Enoki { t: Scalar, a: Vec<Scalar> },
    InoueHirzebruch { p: u32, q: u32, r: u32, s: u32 },
    Hopf { alpha: Scalar, beta: Scalar, lambda: Scalar, m: u32 },
}

impl AuxGerm {
    pub fn validate(&self) -> Result<()> {
        match self {
            AuxGerm::Enoki { t, .. } => {
                let tn = t.abs();
                if !(tn > 0.0 && tn < 1.0) {
                    return Err(Error::Invalid("Enoki germ needs 0 < |t| < 1".into()));
                }
            }
            AuxGerm::InoueHirzebruch { p, q, r, s } => {
                let det = (*p as i64) * (*s as i64) - (*q as i64) * (*r as i64);
                if det.abs() != 1 {
                    return Err(Error::Invalid("monomial germ matrix must have det +-1".into()));
                }
            }
            AuxGerm::Hopf { alpha, beta, lambda, m } => {
                let (an, bn) = (alpha.abs(), beta.abs());
                if !(an > 0.0 && an <= bn && bn < 1.0) {
                    return Err(Error::Invalid("Hopf germ needs 0 < |alpha| <= |beta| < 1".into()));
                }
                let stray = beta.pow_i64(*m as i64)?.sub(alpha).mul(lambda);
                if stray.abs() > 1e-12 {
                    return Err(Error::Invalid("Hopf germ needs (beta^m - alpha) lambda = 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval_complex(&self, z: (Complex64, Complex64)) -> (Complex64, Complex64) {
        let (z1, z2) = z;
        match self {
            AuxGerm::Enoki { t, a } => {
                let n = a.len() as u32;
                let tv = t.approx();
                let mut w1 = tv.powu(n) * z1 * z2.powu(n);
                for (i, ai) in a.iter().enumerate() {
                    w1 += ai.approx() * tv.powu(i as u32 + 1) * z2.powu(i as u32 + 1);
                }
                (w1, tv * z2)
            }
            AuxGerm::InoueHirzebruch { p, q, r, s } => {
                (z1.powu(*p) * z2.powu(*q), z1.powu(*r) * z2.powu(*s))
            }
            AuxGerm::Hopf { alpha, beta, lambda, m } => (
                alpha.approx() * z1 + lambda.approx() * z2.powu(*m),
                beta.approx() * z2,
            ),
        }
    }
}

/// Forward orbit of a numeric germ; errors out when the orbit overflows.
pub fn iterate<F>(step: F, z: (Complex64, Complex64), nsteps: usize) -> Result<Vec<(Complex64, Complex64)>>
where
    F: Fn((Complex64, Complex64)) -> (Complex64, Complex64),
{
    let mut orbit = Vec::with_capacity(nsteps + 1);
    let mut cur = z;
    orbit.push(cur);
    for step_idx in 0..nsteps {
        cur = step(cur);
        if !cur.0.is_finite() || !cur.1.is_finite() || cur.0.norm() > 1e50 || cur.1.norm() > 1e50 {
            return Err(Error::Overflow(step_idx + 1));
        }
        orbit.push(cur);
    }
    Ok(orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio_i64;
    use crate::signature::{derive_signature, DlousskySeq, Mat2Z};

    fn sig(p: i64, q: i64, r: i64, s: i64, l: u32) -> BranchSignature {
        derive_signature(&Mat2Z { p, q, r, s }, l, &[]).unwrap()
    }

    fn rational_germ(s: &BranchSignature, a0: (i64, i64), a: &[(i64, i64)], ak: (i64, i64)) -> BiratGerm {
        let d = ScalarDomain::rationals();
        BiratGerm::new(
            s.clone(),
            d.clone(),
            d.from_rat(&ratio_i64(a0.0, a0.1)),
            a.iter().map(|&(n, m)| d.from_rat(&ratio_i64(n, m))).collect(),
            d.from_rat(&ratio_i64(ak.0, ak.1)),
        )
        .unwrap()
    }

    #[test]
    fn origin_form_examples() {
        let g = rational_germ(&sig(0, 1, 1, 1, 1), (2, 1), &[], (0, 1));
        let (g1, g2) = g.origin_form(10);
        // (z1 z2^2 + a0 z1 z2, z1 z2)
        assert!(g1.coeff(1, 2).is_one());
        assert!(g1.coeff(1, 1).strict_eq(&g.a0));
        assert_eq!(g1.num_terms(), 2);
        assert!(g2.coeff(1, 1).is_one());
        assert_eq!(g2.num_terms(), 1);

        let g = rational_germ(&sig(1, 1, 1, 2, 1), (3, 1), &[], (0, 1));
        let (g1, g2) = g.origin_form(12);
        // (z1^2 z2^3 + a0 z1 z2^2, z1 z2^2)
        assert!(g1.coeff(2, 3).is_one());
        assert!(g1.coeff(1, 2).strict_eq(&g.a0));
        assert!(g2.coeff(1, 2).is_one());
    }

    #[test]
    fn generic_form_examples() {
        // sig (0,1,1,1,l=1): (z2, (z1 z2 + a0 z2 + aK z2^2) z2)
        let g = rational_germ(&sig(0, 1, 1, 1, 1), (2, 1), &[], (5, 1));
        let (g1, g2) = g.generic_form(10).unwrap();
        assert!(g1.coeff(0, 1).is_one());
        assert_eq!(g1.num_terms(), 1);
        assert!(g2.coeff(1, 2).is_one());
        assert!(g2.coeff(0, 2).strict_eq(&g.a0));
        assert!(g2.coeff(0, 3).strict_eq(&g.a_k));
        // min order of second component is r+s
        assert_eq!(g2.min_order(), 2);

        let g = rational_germ(&sig(1, 1, 1, 2, 1), (3, 1), &[], (7, 1));
        let (g1, g2) = g.generic_form(10).unwrap();
        // B = z1 z2 + a0 z2 + aK z2^2; G = (B z2, B z2^2)
        assert!(g1.coeff(1, 2).is_one());
        assert!(g1.coeff(0, 2).strict_eq(&g.a0));
        assert!(g1.coeff(0, 3).strict_eq(&g.a_k));
        assert!(g2.coeff(1, 3).is_one());
        assert_eq!(g2.min_order(), 3);
    }

    #[test]
    fn oracle_matches_hand_composition() {
        let g = rational_germ(&sig(0, 1, 1, 1, 1), (2, 3), &[], (0, 1));
        let (o1, o2) = g.compose_blowups_oracle(10).unwrap();
        let (f1, f2) = g.origin_form(10);
        assert!(o1.strict_eq(&f1));
        assert!(o2.strict_eq(&f2));
    }

    #[test]
    fn oracle_monomial_when_coeffs_vanish() {
        let s = sig(1, 3, 2, 7, 1);
        let d = ScalarDomain::rationals();
        let g = BiratGerm::new(s.clone(), d.clone(), d.one(), vec![], d.zero()).unwrap();
        let order = g.origin_degree();
        let (_, o2) = g.compose_blowups_oracle(order).unwrap();
        assert!(o2.strict_eq(&TruncSeries2::monomial(&d, order, s.r as u32, s.s as u32, d.one())));
    }

    #[test]
    fn oracle_equals_origin_form_sweep() {
        let cases: Vec<(Vec<u32>, u32)> = vec![
            (vec![1], 1),
            (vec![1], 3),
            (vec![2], 2),
            (vec![3], 1),
            (vec![1, 1], 2),
            (vec![2, 1], 1),
            (vec![1, 2], 3),
            (vec![2, 3], 2),
            (vec![1, 1, 1], 2),
            (vec![2, 1, 2], 1),
        ];
        for (ks, l) in cases {
            let seq = DlousskySeq::new(ks.clone(), l).unwrap();
            let s = BranchSignature::from_seq(&seq).unwrap();
            let d = ScalarDomain::rationals();
            let a: Vec<Scalar> = (1..l).map(|i| d.from_rat(&ratio_i64(i as i64, 2))).collect();
            let g = BiratGerm::new(s, d.clone(), d.from_rat(&ratio_i64(3, 5)), a, d.from_rat(&ratio_i64(-1, 4)))
                .unwrap();
            let order = g.origin_degree();
            let (o1, o2) = g.compose_blowups_oracle(order).unwrap();
            let (f1, f2) = g.origin_form(order);
            assert!(o1.strict_eq(&f1), "ks={ks:?} l={l}");
            assert!(o2.strict_eq(&f2), "ks={ks:?} l={l}");
        }
    }

    #[test]
    fn jacobian_examples() {
        let g = rational_germ(&sig(0, 1, 1, 1, 1), (4, 7), &[], (2, 9));
        assert!(g.jacobian_det().unwrap().strict_eq(&g.jacobian_expected()));
        let g = rational_germ(&sig(1, 1, 1, 2, 1), (1, 2), &[], (0, 1));
        let det = g.jacobian_det().unwrap();
        assert!(det.strict_eq(&g.jacobian_expected()));
        assert!(det.coeff(2, 4).is_one()); // +1 z1^2 z2^4
    }

    #[test]
    fn uv_examples_and_twisted_integrality() {
        let (u, v) = uv_exponents(&sig(0, 1, 1, 1, 1));
        assert_eq!((u, v), (rat_i64(2), rat_i64(1)));
        let (u, v) = uv_exponents(&sig(0, 1, 1, 2, 2));
        assert_eq!((u, v), (rat_i64(2), rat_i64(2)));
        for (ks, l) in [(vec![1], 1u32), (vec![2], 2), (vec![1, 1], 1), (vec![1, 1], 2), (vec![2, 3], 2), (vec![3], 4)] {
            let s = BranchSignature::from_seq(&DlousskySeq::new(ks, l).unwrap()).unwrap();
            let (u, v) = uv_exponents(&s);
            assert_eq!(u.is_integer() && v.is_integer(), s.twisted, "{s:?}");
        }
    }

    #[test]
    fn index_examples() {
        assert_eq!(index(&sig(0, 1, 1, 2, 2)), 1);
        assert_eq!(index(&sig(1, 1, 1, 2, 2)), 2);
        // index = 1 whenever (k-1) | sigma
        let s = sig(0, 1, 1, 1, 5);
        assert_eq!(index(&s), 1);
    }

    #[test]
    fn vf_condition_examples() {
        let d = ScalarDomain::rationals();
        let s = sig(1, 1, 1, 2, 1);
        let got = vf_condition(&s, &d.from_rat(&ratio_i64(1, 3))).unwrap();
        assert!(got.is_zero());
        let s = sig(0, 1, 1, 1, 1);
        let got = vf_condition(&s, &d.one()).unwrap();
        assert!(got.strict_eq(&d.from_i64(3)));
        let untwisted = sig(1, 1, 1, 2, 2);
        assert!(matches!(vf_condition(&untwisted, &d.one()), Err(Error::NotTwisted)));
    }

    #[test]
    fn lambda_examples() {
        let d = ScalarDomain::rationals();
        let one = d.one();
        // (0,1,1,1,l=1): lambda = -1/(2 a0^2)
        let a0 = d.from_rat(&ratio_i64(1, 2));
        let lam = lambda_of(&sig(0, 1, 1, 1, 1), &a0, &one).unwrap();
        assert!(lam.strict_eq(&d.from_i64(-2)));
        // (1,1,1,2,l=1) at a0 = 1/3: lambda = 1
        let lam = lambda_of(&sig(1, 1, 1, 2, 1), &d.from_rat(&ratio_i64(1, 3)), &one).unwrap();
        assert!(lam.is_one());
        // (0,1,1,2,l=2): lambda = -1/(3 a0^2)
        let lam = lambda_of(&sig(0, 1, 1, 2, 2), &d.from_i64(2), &one).unwrap();
        assert!(lam.strict_eq(&d.from_rat(&ratio_i64(-1, 12))));
    }

    #[test]
    fn kappa_examples_and_identity() {
        let d = ScalarDomain::rationals();
        let a0 = d.from_rat(&ratio_i64(2, 5));
        let kap = kappa_of(&sig(0, 1, 1, 1, 1), &a0).unwrap();
        assert!(kap.strict_eq(&a0.pow_i64(2).unwrap().neg()));
        let kap = kappa_of(&sig(0, 1, 1, 2, 2), &a0).unwrap();
        assert!(kap.strict_eq(&a0.pow_i64(2).unwrap().neg()));
        // lambda * kappa * k(S) = 1 when index = 1
        for s in [sig(0, 1, 1, 1, 2), sig(0, 1, 1, 2, 2), sig(1, 1, 1, 2, 1)] {
            if index(&s) != 1 {
                continue;
            }
            for n in 1..6i64 {
                let a0 = d.from_rat(&ratio_i64(n, 7));
                let lam = lambda_of(&s, &a0, &d.one()).unwrap();
                let kap = kappa_of(&s, &a0).unwrap();
                let prod = lam.mul(&kap).mul_rat(&rat_i64(s.k_s));
                assert!(prod.is_one(), "{s:?} n={n}");
            }
        }
    }

    #[test]
    fn vf_condition_iff_lambda_one() {
        let d = ScalarDomain::rationals();
        for s in [sig(1, 1, 1, 2, 1), sig(0, 1, 1, 1, 1), sig(0, 1, 1, 2, 2)] {
            assert!(s.twisted);
            for n in [-3i64, -1, 1, 2, 5] {
                for m in [1i64, 2, 3] {
                    let a0 = d.from_rat(&ratio_i64(n, m));
                    let vf = vf_condition(&s, &a0).unwrap();
                    let lam = lambda_of(&s, &a0, &d.one()).unwrap();
                    assert_eq!(vf.is_zero(), lam.is_one(), "{s:?} {n}/{m}");
                }
            }
        }
    }

    #[test]
    fn favre_type_examples() {
        let d = ScalarDomain::rationals();
        let mut b = BTreeMap::new();
        b.insert(1, d.one());
        let f = FavreGerm::new(d.clone(), d.one(), 2, 3, b, d.zero()).unwrap();
        assert_eq!(favre_type(&f).unwrap(), (vec![1], 1));

        let mut b = BTreeMap::new();
        b.insert(2, d.one());
        b.insert(3, d.from_i64(5));
        let f = FavreGerm::new(d.clone(), d.one(), 4, 4, b, d.zero()).unwrap();
        assert_eq!(favre_type(&f).unwrap(), (vec![2, 3], 2));

        let mut b = BTreeMap::new();
        b.insert(2, d.one());
        let f = FavreGerm::new(d.clone(), d.one(), 4, 4, b, d.zero()).unwrap();
        assert!(matches!(favre_type(&f), Err(Error::NonTerminating)));
    }

    #[test]
    fn iterate_fixed_point_and_hopf() {
        let d = ScalarDomain::Complex;
        let s = sig(0, 1, 1, 1, 1);
        let g = BiratGerm::new(s, d.clone(), d.one(), vec![], d.zero()).unwrap();
        let orbit = iterate(|z| g.eval_complex(z), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), 5).unwrap();
        assert!(orbit.iter().all(|(a, b)| a.norm() == 0.0 && b.norm() == 0.0));

        let hopf = AuxGerm::Hopf {
            alpha: Scalar::Complex(Complex64::new(0.3, 0.0)),
            beta: Scalar::Complex(Complex64::new(0.5, 0.0)),
            lambda: Scalar::Complex(Complex64::new(0.0, 0.0)),
            m: 2,
        };
        hopf.validate().unwrap();
        let orbit = iterate(|z| hopf.eval_complex(z), (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)), 4).unwrap();
        for (n, (w1, w2)) in orbit.iter().enumerate() {
            assert!((w1 - Complex64::new(0.3f64.powi(n as i32), 0.0)).norm() < 1e-12);
            assert!((w2 - Complex64::new(0.5f64.powi(n as i32), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn superattracting_orbit_contracts() {
        let d = ScalarDomain::Complex;
        let s = sig(0, 1, 1, 1, 1);
        let g = BiratGerm::new(s, d.clone(), d.one(), vec![], d.zero()).unwrap();
        let z0 = (Complex64::new(0.05, 0.0), Complex64::new(0.05, 0.0));
        let orbit = iterate(|z| g.eval_complex(z), z0, 5).unwrap();
        let last = orbit.last().unwrap();
        assert!(last.0.norm().max(last.1.norm()) < 1e-6);
    }
}
