//! Scalar domains for all exact and floating computations.
//!
//! Exact scalars live in a number field Q(tau) = Q[x]/(m(x)) with a
//! caller-supplied defining polynomial m. With the default m(tau) = tau the
//! field degenerates to plain rationals. Floating scalars are complex doubles.
//! A computation never mixes the two modes.

use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio_i64(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// A number field Q(tau) presented by a defining polynomial.
///
/// The polynomial is stored monic, low degree first. Irreducibility is the
/// caller's responsibility; construction only rejects rational roots of
/// polynomials of degree >= 2, which would make division degenerate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberField {
    minpoly: Vec<Rat>,
}

impl NumberField {
    /// Field presented by `minpoly` (coefficients low degree first, need not
    /// be monic). Degree 1 gives Q(c) = Q for the root c of the polynomial.
    pub fn new(minpoly: &[Rat]) -> Result<Arc<Self>> {
        let mut coeffs: Vec<Rat> = minpoly.to_vec();
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::Invalid(
                "defining polynomial must have degree >= 1".into(),
            ));
        }
        let lead = coeffs.last().unwrap().clone();
        for c in coeffs.iter_mut() {
            *c = &*c / &lead;
        }
        if coeffs.len() > 2 {
            if let Some(root) = rational_root(&coeffs) {
                return Err(Error::ReducibleMinPoly(root.to_string()));
            }
        }
        Ok(Arc::new(NumberField { minpoly: coeffs }))
    }

    /// Plain rationals, presented as Q[x]/(x).
    pub fn rationals() -> Arc<Self> {
        NumberField::new(&[Rat::zero(), Rat::one()]).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn minpoly(&self) -> &[Rat] {
        &self.minpoly
    }

    /// Reduces a coefficient vector modulo the defining polynomial.
    fn reduce(&self, coeffs: &mut Vec<Rat>) {
        let deg = self.degree();
        while coeffs.len() > deg {
            let top = coeffs.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let k = coeffs.len() - deg;
            // x^(deg+k) = -(m_0 x^k + ... + m_{deg-1} x^(deg+k-1))
            for (i, m) in self.minpoly.iter().take(deg).enumerate() {
                let delta = &top * m;
                coeffs[k + i] = &coeffs[k + i] - delta;
            }
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
    }

    /// A numeric root of the defining polynomial, used to embed exact values
    /// into the complex numbers for cross-mode comparisons and display.
    pub fn complex_root(&self) -> Complex64 {
        let coeffs: Vec<Complex64> = self
            .minpoly
            .iter()
            .map(|c| Complex64::new(rat_to_f64(c), 0.0))
            .collect();
        durand_kerner(&coeffs)
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // Split into quotient and remainder so huge rationals stay accurate.
    let (q, rem) = (n / d, n % d);
    use num::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN) + rem.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

fn rational_root(monic: &[Rat]) -> Option<Rat> {
    // Clear denominators, then try p/q with p | a_0 and q | a_n.
    let mut lcm = BigInt::one();
    for c in monic {
        lcm = num::integer::lcm(lcm, c.denom().clone());
    }
    let ints: Vec<BigInt> = monic.iter().map(|c| (c * Rat::from_integer(lcm.clone())).to_integer()).collect();
    let a0 = ints[0].clone();
    let an = ints.last().unwrap().clone();
    if a0.is_zero() {
        return Some(Rat::zero());
    }
    let mut candidates = Vec::new();
    for p in small_divisors(&a0) {
        for q in small_divisors(&an) {
            candidates.push(Rat::new(p.clone(), q.clone()));
            candidates.push(Rat::new(-p.clone(), q));
        }
    }
    candidates.into_iter().find(|cand| {
        let mut acc = Rat::zero();
        for c in monic.iter().rev() {
            acc = acc * cand + c;
        }
        acc.is_zero()
    })
}

fn small_divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::one();
    // Cap the scan; large coefficients are no less sound, just unscanned.
    let cap = BigInt::from(100_000u32);
    while &d * &d <= n && d <= cap {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            out.push(&n / &d);
        }
        d += 1;
    }
    out
}

fn durand_kerner(coeffs: &[Complex64]) -> Complex64 {
    let deg = coeffs.len() - 1;
    if deg == 1 {
        return -coeffs[0] / coeffs[1];
    }
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::new(0.4, 0.9).powu(k as u32 + 1))
        .collect();
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    // Prefer a real positive root, then real, then any: matches the intended
    // "local determination" of tau for defining polynomials like 3t^2 - 1.
    let mut best = roots[0];
    let mut best_score = f64::NEG_INFINITY;
    for r in roots {
        let realish = if r.im.abs() < 1e-9 { 1.0 } else { 0.0 };
        let score = realish * 10.0 + if realish > 0.0 && r.re > 0.0 { 5.0 } else { 0.0 } - r.norm() * 1e-6;
        if score > best_score {
            best_score = score;
            best = r;
        }
    }
    best
}

/// An element of a number field, as a polynomial in the generator.
#[derive(Debug, Clone)]
pub struct NfElem {
    field: Arc<NumberField>,
    coeffs: Vec<Rat>,
}

impl NfElem {
    pub fn from_rat(field: &Arc<NumberField>, r: Rat) -> Self {
        let coeffs = if r.is_zero() { Vec::new() } else { vec![r] };
        NfElem { field: field.clone(), coeffs }
    }

    pub fn generator(field: &Arc<NumberField>) -> Self {
        let mut coeffs = vec![Rat::zero(), Rat::one()];
        field.reduce(&mut coeffs);
        NfElem { field: field.clone(), coeffs }
    }

    pub fn from_coeffs(field: &Arc<NumberField>, coeffs: &[Rat]) -> Self {
        let mut c = coeffs.to_vec();
        field.reduce(&mut c);
        NfElem { field: field.clone(), coeffs: c }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The rational value, if the element lies in the prime field.
    pub fn as_rat(&self) -> Option<Rat> {
        match self.coeffs.len() {
            0 => Some(Rat::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    fn assert_same_field(&self, rhs: &NfElem) {
        assert_eq!(
            self.field.minpoly, rhs.field.minpoly,
            "number field elements from different fields"
        );
    }

    pub fn add(&self, rhs: &NfElem) -> NfElem {
        self.assert_same_field(rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] = out[i].clone() + c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            out[i] = out[i].clone() + c;
        }
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        NfElem { field: self.field.clone(), coeffs: out }
    }

    pub fn neg(&self) -> NfElem {
        NfElem {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn sub(&self, rhs: &NfElem) -> NfElem {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &NfElem) -> NfElem {
        self.assert_same_field(rhs);
        if self.is_zero() || rhs.is_zero() {
            return NfElem { field: self.field.clone(), coeffs: Vec::new() };
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        self.field.reduce(&mut out);
        NfElem { field: self.field.clone(), coeffs: out }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x].
    pub fn inv(&self) -> Result<NfElem> {
        if self.is_zero() {
            return Err(Error::NotInvertible);
        }
        // gcd(self, minpoly) over Q[x]; the Bezout coefficient of self is the
        // inverse when the gcd is a nonzero constant.
        let mut r0: Vec<Rat> = self.field.minpoly.clone();
        let mut r1: Vec<Rat> = self.coeffs.clone();
        let mut s0: Vec<Rat> = Vec::new();
        let mut s1: Vec<Rat> = vec![Rat::one()];
        while !r1.is_empty() {
            let (q, rem) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        if r0.len() != 1 {
            return Err(Error::NotInvertible);
        }
        let scale = r0[0].clone();
        let mut coeffs: Vec<Rat> = s0.iter().map(|c| c / &scale).collect();
        self.field.reduce(&mut coeffs);
        Ok(NfElem { field: self.field.clone(), coeffs })
    }

    pub fn approx(&self) -> Complex64 {
        let tau = self.field.complex_root();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * tau + Complex64::new(rat_to_f64(c), 0.0);
        }
        acc
    }
}

impl PartialEq for NfElem {
    fn eq(&self, other: &Self) -> bool {
        self.field.minpoly == other.field.minpoly && self.coeffs == other.coeffs
    }
}
impl Eq for NfElem {}

fn poly_divmod(num: &[Rat], den: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    assert!(!den.is_empty());
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return (Vec::new(), rem);
    }
    let mut quot = vec![Rat::zero(); rem.len() - dd];
    let lead = den.last().unwrap();
    while rem.len() > dd {
        let k = rem.len() - 1 - dd;
        let c = rem.last().unwrap() / lead;
        quot[k] = c.clone();
        for (i, d) in den.iter().enumerate() {
            let t = &c * d;
            rem[k + i] = &rem[k + i] - t;
        }
        while rem.last().is_some_and(|x| x.is_zero()) {
            rem.pop();
        }
        if rem.len() <= dd {
            break;
        }
    }
    (quot, rem)
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + x * y;
        }
    }
    out
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] = out[i].clone() + x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = out[i].clone() - y;
    }
    while out.last().is_some_and(|x| x.is_zero()) {
        out.pop();
    }
    out
}

/// The scalar mode of a computation: a fixed number field or complex doubles.
#[derive(Debug, Clone)]
pub enum ScalarDomain {
    Exact(Arc<NumberField>),
    Complex,
}

impl ScalarDomain {
    pub fn rationals() -> ScalarDomain {
        ScalarDomain::Exact(NumberField::rationals())
    }

    pub fn same_mode(&self, other: &ScalarDomain) -> bool {
        match (self, other) {
            (ScalarDomain::Exact(f), ScalarDomain::Exact(g)) => f.minpoly == g.minpoly,
            (ScalarDomain::Complex, ScalarDomain::Complex) => true,
            _ => false,
        }
    }

    pub fn zero(&self) -> Scalar {
        match self {
            ScalarDomain::Exact(f) => Scalar::Exact(NfElem::from_rat(f, Rat::zero())),
            ScalarDomain::Complex => Scalar::Complex(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            ScalarDomain::Exact(f) => Scalar::Exact(NfElem::from_rat(f, Rat::one())),
            ScalarDomain::Complex => Scalar::Complex(Complex64::new(1.0, 0.0)),
        }
    }

    pub fn from_rat(&self, r: &Rat) -> Scalar {
        match self {
            ScalarDomain::Exact(f) => Scalar::Exact(NfElem::from_rat(f, r.clone())),
            ScalarDomain::Complex => Scalar::Complex(Complex64::new(rat_to_f64(r), 0.0)),
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        self.from_rat(&rat_i64(n))
    }

    /// The field generator tau (exact mode) or its numeric value.
    pub fn generator(&self) -> Scalar {
        match self {
            ScalarDomain::Exact(f) => Scalar::Exact(NfElem::generator(f)),
            ScalarDomain::Complex => Scalar::Complex(ScalarDomain::complex_field_root()),
        }
    }

    fn complex_field_root() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    /// exp(2 pi i j / m) in complex mode; 1 or -1 in exact mode when they are
    /// m-th roots, anything else is rejected.
    pub fn root_of_unity(&self, m: i64, j: i64) -> Result<Scalar> {
        match self {
            ScalarDomain::Complex => {
                let theta = 2.0 * std::f64::consts::PI * (j as f64) / (m as f64);
                Ok(Scalar::Complex(Complex64::new(theta.cos(), theta.sin())))
            }
            ScalarDomain::Exact(_) => {
                let j = j.rem_euclid(m);
                if j == 0 {
                    Ok(self.one())
                } else if 2 * j == m {
                    Ok(self.from_i64(-1))
                } else {
                    Err(Error::FractionalPower(format!(
                        "exact mode only represents the roots of unity +-1, not exp(2 pi i {j}/{m})"
                    )))
                }
            }
        }
    }
}

/// A scalar value tagged with its mode.
#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(NfElem),
    Complex(Complex64),
}

impl Scalar {
    pub fn domain(&self) -> ScalarDomain {
        match self {
            Scalar::Exact(e) => ScalarDomain::Exact(e.field().clone()),
            Scalar::Complex(_) => ScalarDomain::Complex,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(e) => e.is_zero(),
            Scalar::Complex(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(e) => e.as_rat().is_some_and(|r| r.is_one()),
            Scalar::Complex(z) => *z == Complex64::new(1.0, 0.0),
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.add(b)),
            (Scalar::Complex(a), Scalar::Complex(b)) => Scalar::Complex(a + b),
            _ => panic!("scalar mode mismatch in add"),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.sub(b)),
            (Scalar::Complex(a), Scalar::Complex(b)) => Scalar::Complex(a - b),
            _ => panic!("scalar mode mismatch in sub"),
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
            (Scalar::Complex(a), Scalar::Complex(b)) => Scalar::Complex(a * b),
            _ => panic!("scalar mode mismatch in mul"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.neg()),
            Scalar::Complex(a) => Scalar::Complex(-a),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Exact(a) => Ok(Scalar::Exact(a.inv()?)),
            Scalar::Complex(a) => {
                if a.re == 0.0 && a.im == 0.0 {
                    Err(Error::NotInvertible)
                } else {
                    Ok(Scalar::Complex(a.inv()))
                }
            }
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&rhs.inv()?))
    }

    pub fn pow_i64(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = self.domain().one();
        let mut n = e.unsigned_abs();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq.clone());
            n >>= 1;
        }
        Ok(acc)
    }

    /// Scale by a rational, staying in mode.
    pub fn mul_rat(&self, r: &Rat) -> Scalar {
        self.mul(&self.domain().from_rat(r))
    }

    pub fn approx(&self) -> Complex64 {
        match self {
            Scalar::Exact(e) => e.approx(),
            Scalar::Complex(z) => *z,
        }
    }

    pub fn abs(&self) -> f64 {
        self.approx().norm()
    }

    /// Exact structural equality in exact mode, bitwise in complex mode.
    pub fn strict_eq(&self, rhs: &Scalar) -> bool {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Complex(a), Scalar::Complex(b)) => a == b,
            _ => false,
        }
    }

    pub fn approx_eq(&self, rhs: &Scalar, tol: f64) -> bool {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.approx() - rhs.approx()).norm() <= tol,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(e) => match e.as_rat() {
                Some(r) => write!(f, "{r}"),
                None => {
                    let parts: Vec<String> = e.coeffs().iter().map(|c| c.to_string()).collect();
                    write!(f, "[{}]", parts.join(","))
                }
            },
            Scalar::Complex(z) => write!(f, "{}+{}i", z.re, z.im),
        }
    }
}
