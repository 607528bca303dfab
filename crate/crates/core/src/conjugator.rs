//! Conjugation of birational germs to Favre polynomial normal form.
//!
//! Given G in the generic chart and a choice of the root w = a0^(1/(r+s-1))
//! and of eps with eps^(r+s-1) = 1, the solver determines the polynomial germ
//! F = (lambda z1 z2^sigma + P(z2) + c z2^(sigma k/(k-1)), z2^k) and a
//! biholomorphism phi = (phi1, C z2 (1 + mu)) with F o phi = phi o G. The
//! second component is closed-form: C = eps w^r and 1 + mu is an infinite
//! product over the forward orbit of G. The first component reduces to one
//! square linear system whose unknowns are the Favre coefficients
//! b_{p+q+1}..b_sigma, the twisting coefficient c in the vector-field case,
//! and the phi1 coefficients A_ij; each unknown is pinned by one bidegree of
//! the conjugacy equation ((0, p+q+j) for b, (i, j+sigma) for A_ij,
//! (0, sigma k/(k-1)) for c). On twisted signatures the slot A at
//! (0, sigma/(k-1)) is resonant: its pin coefficient is C^sigma (1 - lambda),
//! so for lambda = 1 that slot is gauge-fixed to zero and c takes over its
//! equation. Certificates are checked by recomputing both compositions from
//! scratch; any surviving residual is reported, never hidden.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::germs::{BiratGerm, FavreGerm};
use crate::scalar::{rat_i64, Rat, Scalar, ScalarDomain};
use crate::series::TruncSeries2;
use crate::signature::BranchSignature;

/// A weighted lattice region {(i,j) : i(p+q) + j(r+s) bounded}, i in {0,1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSet {
    pub bound: Rat,
    pub strict: bool,
    pub points: Vec<(u32, u32)>,
}

impl LatticeSet {
    pub fn contains(&self, i: u32, j: u32) -> bool {
        self.points.contains(&(i, j))
    }
}

fn lattice(sig: &BranchSignature, bound: Rat, strict: bool) -> LatticeSet {
    let mut points = Vec::new();
    let (w1, w2) = (rat_i64(sig.p + sig.q), rat_i64(sig.k_s));
    for i in 0..=1u32 {
        let mut j = 0u32;
        loop {
            let weight = &w1 * rat_i64(i as i64) + &w2 * rat_i64(j as i64);
            let inside = if strict { weight < bound } else { weight <= bound };
            if !inside {
                break;
            }
            points.push((i, j));
            j += 1;
        }
    }
    points.sort();
    LatticeSet { bound, strict, points }
}

/// E_infinity = {(i,j) : i(p+q) + j(r+s) < sigma (r+s)/(r+s-1)}.
pub fn e_infty(sig: &BranchSignature) -> LatticeSet {
    let bound = rat_i64(sig.sigma as i64) * Rat::new(sig.k_s.into(), (sig.k_s - 1).into());
    lattice(sig, bound, true)
}

/// E_m = {(i,j) : i(p+q) + j(r+s) <= sigma (1 + 1/(r+s) + ... + (r+s)^-m)}.
pub fn e_m(sig: &BranchSignature, m: u32) -> LatticeSet {
    let k = rat_i64(sig.k_s);
    let mut geom = Rat::zero();
    let mut term = Rat::one();
    for _ in 0..=m {
        geom = geom + &term;
        term = term / &k;
    }
    lattice(sig, rat_i64(sig.sigma as i64) * geom, false)
}

/// max(d, l + floor((l-d)/(r+s-1))): past this total degree the tangent-to-
/// identity coefficients of a conjugation are forced.
pub fn mu_bound(sig: &BranchSignature) -> i64 {
    let diff = sig.l as i64 - sig.d;
    sig.d.max(sig.l as i64 + diff.div_euclid(sig.k_s - 1))
}

/// An integral solution of the resonance system, with its order gamma = k + l.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resonance {
    pub i: i64,
    pub j: i64,
    pub gamma: i64,
}

/// All resonances (k r - p, k s - q), k >= 1, within the total-degree cap.
pub fn resonances(sig: &BranchSignature, degree_cap: i64) -> Vec<Resonance> {
    let mut out = Vec::new();
    let mut k = 1i64;
    loop {
        let i = k * sig.r - sig.p;
        let j = k * sig.s - sig.q;
        if i + j > degree_cap {
            break;
        }
        out.push(Resonance { i, j, gamma: k + sig.l as i64 });
        k += 1;
    }
    out
}

/// The normalized bracket of the second-component equation:
/// beta(z) = (1/a0)(sum_{i=1}^{l-1} a_i z2^i + a_{l+K} z2^(l+K) + z1 z2^(l-1)).
fn beta_series(g: &BiratGerm, order: u32) -> Result<TruncSeries2> {
    let d = &g.domain;
    let inv_a0 = g.a0.inv()?;
    let l = g.sig.l;
    let mut beta = TruncSeries2::monomial(d, order, 1, l - 1, inv_a0.clone());
    for i in 1..l {
        let ai = g.coeff_a(i);
        if !ai.is_zero() {
            beta.insert(0, i, ai.mul(&inv_a0));
        }
    }
    if !g.a_k.is_zero() {
        let e = g.sig.ak_index();
        let cur = beta.coeff(0, e).add(&g.a_k.mul(&inv_a0));
        beta.insert(0, e, cur);
    }
    Ok(beta)
}

/// The infinite product 1 + mu = prod_j (1 + beta(G^j))^(r/(r+s)^(j+1)),
/// truncated at `order`; factors stop contributing once the bracket's
/// minimal order passes the truncation.
pub fn mu_product(g: &BiratGerm, order: u32) -> Result<TruncSeries2> {
    let d = &g.domain;
    let beta = beta_series(g, order)?;
    let (g1, g2) = g.generic_form(order)?;
    let mut result = TruncSeries2::one(d, order);
    let mut h1 = TruncSeries2::var1(d, order);
    let mut h2 = TruncSeries2::var2(d, order);
    let r = rat_i64(g.sig.r);
    let k = rat_i64(g.sig.k_s);
    let mut weight = &r / &k; // r/(r+s)^(j+1)
    for _ in 0..128 {
        let bracket = beta.compose_pair(&h1, &h2)?;
        if bracket.min_order() > order {
            break;
        }
        let base = TruncSeries2::one(d, order).add(&bracket)?;
        result = result.mul(&base.pow_ratio(&weight)?)?;
        let next1 = g1.compose_pair(&h1, &h2)?;
        let next2 = g2.compose_pair(&h1, &h2)?;
        h1 = next1;
        h2 = next2;
        weight = weight / &k;
    }
    Ok(result)
}

/// The solved change of coordinates phi = (phi1, C z2 (1 + mu)).
#[derive(Debug, Clone)]
pub struct PhiData {
    /// C = eps a0^(r/(r+s-1))
    pub big_c: Scalar,
    /// Coefficients A_ij of phi1; A_00 is never present.
    pub a: BTreeMap<(u32, u32), Scalar>,
    /// mu, zero constant term; phi2 = C z2 (1 + mu).
    pub mu: TruncSeries2,
}

impl PhiData {
    pub fn a10(&self) -> Scalar {
        self.a
            .get(&(1, 0))
            .cloned()
            .unwrap_or_else(|| self.mu.domain().zero())
    }

    pub fn phi1_series(&self, domain: &ScalarDomain, order: u32) -> TruncSeries2 {
        let mut phi1 = TruncSeries2::zero(domain, order);
        for (&(i, j), v) in self.a.iter() {
            phi1.insert(i, j, v.clone());
        }
        phi1
    }

    pub fn phi2_series(&self, order: u32) -> Result<TruncSeries2> {
        let d = self.mu.domain().clone();
        let one_plus = TruncSeries2::one(&d, order).add(&self.mu.truncate_to(order))?;
        let z2c = TruncSeries2::monomial(&d, order, 0, 1, self.big_c.clone());
        z2c.mul(&one_plus)
    }
}

/// A normalization certificate: the target Favre germ, the conjugating map,
/// and the independently recomputed residual of F o phi - phi o G.
#[derive(Debug, Clone)]
pub struct ConjugacyCertificate {
    pub source: BiratGerm,
    pub target: FavreGerm,
    pub phi: PhiData,
    pub order: u32,
    pub a0_root: Scalar,
    pub eps: Scalar,
    pub residual: (TruncSeries2, TruncSeries2),
    /// Pin slots the solver could not discharge; empty for a valid
    /// certificate. Anything here means the triangular structure predicted
    /// by the normal-form theory failed at that slot.
    pub extended_support: Vec<(u32, u32)>,
}

impl ConjugacyCertificate {
    pub fn residual_is_zero(&self) -> bool {
        self.residual.0.is_zero() && self.residual.1.is_zero()
    }

    pub fn residual_max(&self) -> f64 {
        self.residual.0.max_coeff_abs().max(self.residual.1.max_coeff_abs())
    }
}

fn is_complex(domain: &ScalarDomain) -> bool {
    matches!(domain, ScalarDomain::Complex)
}

fn lambda_is_one(lambda: &Scalar) -> bool {
    match lambda {
        Scalar::Exact(_) => lambda.is_one(),
        Scalar::Complex(z) => (z - num::complex::Complex64::new(1.0, 0.0)).norm() <= 1e-9,
    }
}

/// Shift a series by the monomial z1^di z2^dj.
fn shift(series: &TruncSeries2, di: u32, dj: u32) -> TruncSeries2 {
    let mut out = TruncSeries2::zero(series.domain(), series.order());
    for (&(i, j), v) in series.iter() {
        out.insert(i + di, j + dj, v.clone());
    }
    out
}

struct Solver<'a> {
    g: &'a BiratGerm,
    domain: ScalarDomain,
    order: u32,
    sigma: u32,
    k: i64,
    lambda: Scalar,
    a10: Scalar,
    big_c: Scalar,
    c_exponent: Option<u32>,
    vf_case: bool,
    g1_pows: Vec<TruncSeries2>,
    g2_pows: Vec<TruncSeries2>,
    v_sigma: TruncSeries2,
    w_pows: BTreeMap<u32, TruncSeries2>,
    w_c: Option<TruncSeries2>,
    mu: TruncSeries2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unknown {
    B(u32),
    C,
    A(u32, u32),
}

impl<'a> Solver<'a> {
    fn new(g: &'a BiratGerm, a0_root: &Scalar, eps: &Scalar, order: u32) -> Result<Self> {
        let sig = &g.sig;
        let domain = g.domain.clone();
        let k = sig.k_s;
        let sigma = sig.sigma;

        let root_check = a0_root.pow_i64(k - 1)?;
        if !root_check.approx_eq(&g.a0, 1e-12) || (matches!(domain, ScalarDomain::Exact(_)) && !root_check.strict_eq(&g.a0)) {
            return Err(Error::FractionalPower(format!(
                "a0_root^(r+s-1) = {root_check} does not equal a0 = {}",
                g.a0
            )));
        }
        let eps_check = eps.pow_i64(k - 1)?;
        if !(eps_check.is_one() || (is_complex(&domain) && eps_check.approx_eq(&domain.one(), 1e-9))) {
            return Err(Error::Invalid(format!("eps^(r+s-1) = {eps_check} must be 1")));
        }

        let big_c = eps.mul(&a0_root.pow_i64(sig.r)?);
        // (R_0): A_10 a0^p = b_{p+q} C^{p+q} with b_{p+q} = 1.
        let a10 = big_c.pow_i64(sig.p + sig.q)?.div(&g.a0.pow_i64(sig.p)?)?;
        // bidegree (1, sigma): A_10 p a0^(p-1) = lambda A_10 C^sigma + r(p+q)/(r+s) C^(p+q)/a0
        let lambda = g
            .a0
            .pow_i64(sig.p - 1)?
            .mul_rat(&Rat::new(sig.delta.into(), k.into()))
            .div(&big_c.pow_i64(sigma as i64)?)?;

        let c_exponent = if sig.twisted { Some(sigma + sigma / (k as u32 - 1)) } else { None };
        let vf_case = sig.twisted && lambda_is_one(&lambda);

        let (g1, g2) = g.generic_form(order)?;
        let mu = mu_product(g, order)?;

        // Power tables for G1^i, G2^j, truncated to zero once out of range.
        let max_i = (order - sigma) as usize;
        let mut g1_pows = vec![TruncSeries2::one(&domain, order)];
        for _ in 0..max_i {
            let next = g1_pows.last().unwrap().mul(&g1)?;
            let stop = next.is_zero();
            g1_pows.push(next);
            if stop {
                break;
            }
        }
        let mut g2_pows = vec![TruncSeries2::one(&domain, order)];
        for _ in 0..max_i {
            let next = g2_pows.last().unwrap().mul(&g2)?;
            let stop = next.is_zero();
            g2_pows.push(next);
            if stop {
                break;
            }
        }

        // V = C z2 (1 + mu) and its powers.
        let v = TruncSeries2::monomial(&domain, order, 0, 1, big_c.clone()).mul(&mu)?;
        let v_sigma = v.pow_usize(sigma as usize)?;
        let mut w_pows = BTreeMap::new();
        let mut cur = v.pow_usize((sig.p + sig.q) as usize)?;
        for i in (sig.p + sig.q) as u32..=sigma {
            w_pows.insert(i, cur.clone());
            if i < sigma {
                cur = cur.mul(&v)?;
            }
        }
        let w_c = match (c_exponent, vf_case) {
            (Some(e), _) => Some(v.pow_usize(e as usize)?),
            _ => None,
        };

        Ok(Solver {
            g,
            domain,
            order,
            sigma,
            k,
            lambda,
            a10,
            big_c,
            c_exponent,
            vf_case,
            g1_pows,
            g2_pows,
            v_sigma,
            w_pows,
            w_c,
            mu: mu.sub(&TruncSeries2::one(&g.domain, order))?,
        })
    }

    fn g_power(&self, i: u32, j: u32) -> Result<TruncSeries2> {
        let zero = TruncSeries2::zero(&self.domain, self.order);
        let a = match self.g1_pows.get(i as usize) {
            Some(s) if !s.is_zero() || i == 0 => s.clone(),
            _ => return Ok(zero),
        };
        let b = match self.g2_pows.get(j as usize) {
            Some(s) if !s.is_zero() || j == 0 => s.clone(),
            _ => return Ok(zero),
        };
        a.mul(&b)
    }

    /// Sensitivity series of the residual with respect to one unknown.
    fn column_series(&self, u: Unknown) -> Result<TruncSeries2> {
        match u {
            Unknown::B(i) => Ok(self.w_pows[&i].neg()),
            Unknown::C => Ok(self.w_c.as_ref().expect("c column without twisted case").neg()),
            Unknown::A(i, j) => {
                let lhs = self.g_power(i, j)?;
                let rhs = shift(&self.v_sigma, i, j).scale(&self.lambda);
                lhs.sub(&rhs)
            }
        }
    }

    /// The unknown-free part of the residual.
    fn constant_series(&self) -> Result<TruncSeries2> {
        let a10_part = self.column_series(Unknown::A(1, 0))?.scale(&self.a10);
        let b_base = self.w_pows[&((self.g.sig.p + self.g.sig.q) as u32)].clone();
        a10_part.sub(&b_base)
    }

    fn unknowns(&self) -> Vec<Unknown> {
        let sig = &self.g.sig;
        let pplusq = (sig.p + sig.q) as u32;
        let mut list = Vec::new();
        for j in 1..sig.l {
            list.push(Unknown::B(pplusq + j));
        }
        if self.vf_case {
            list.push(Unknown::C);
        }
        let resonant_gauge = if self.vf_case {
            Some((0u32, self.sigma / (self.k as u32 - 1)))
        } else {
            None
        };
        let max_total = self.order - self.sigma;
        for t in 1..=max_total {
            for i in (0..=t).rev() {
                let j = t - i;
                if (i, j) == (1, 0) {
                    continue;
                }
                if resonant_gauge == Some((i, j)) {
                    continue;
                }
                list.push(Unknown::A(i, j));
            }
        }
        list
    }

    fn pin_bidegree(&self, u: Unknown) -> (u32, u32) {
        match u {
            Unknown::B(i) => (0, i),
            Unknown::C => (0, self.c_exponent.expect("c pin without twisted case")),
            Unknown::A(i, j) => (i, j + self.sigma),
        }
    }

    fn solve(&self) -> Result<(BTreeMap<u32, Scalar>, Scalar, BTreeMap<(u32, u32), Scalar>)> {
        let unknowns = self.unknowns();
        let n = unknowns.len();
        let pins: Vec<(u32, u32)> = unknowns.iter().map(|&u| self.pin_bidegree(u)).collect();

        let mut matrix: Vec<Vec<Scalar>> = vec![Vec::with_capacity(n); n];
        for &u in unknowns.iter() {
            let s = self.column_series(u)?;
            for (ri, &(a, b)) in pins.iter().enumerate() {
                matrix[ri].push(s.coeff(a, b));
            }
        }

        let sconst = self.constant_series()?;
        let rhs: Vec<Scalar> = pins.iter().map(|&(a, b)| sconst.coeff(a, b).neg()).collect();

        let x = solve_linear(&self.domain, matrix, rhs)?;

        let mut b_out = BTreeMap::new();
        let mut c_out = self.domain.zero();
        let mut a_out = BTreeMap::new();
        for (&u, val) in unknowns.iter().zip(x.into_iter()) {
            match u {
                Unknown::B(i) => {
                    b_out.insert(i, val);
                }
                Unknown::C => c_out = val,
                Unknown::A(i, j) => {
                    if !val.is_zero() {
                        a_out.insert((i, j), val);
                    }
                }
            }
        }
        Ok((b_out, c_out, a_out))
    }
}

fn solve_linear(domain: &ScalarDomain, mut m: Vec<Vec<Scalar>>, mut rhs: Vec<Scalar>) -> Result<Vec<Scalar>> {
    let n = m.len();
    let complex = is_complex(domain);
    for col in 0..n {
        let mut piv = None;
        if complex {
            let mut best = 1e-12;
            for (row, mrow) in m.iter().enumerate().skip(col) {
                let a = mrow[col].abs();
                if a > best {
                    best = a;
                    piv = Some(row);
                }
            }
        } else {
            piv = (col..n).find(|&row| !m[row][col].is_zero());
        }
        let piv = piv.ok_or_else(|| Error::SingularSystem(format!("no pivot in column {col}")))?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].inv()?;
        for row in col + 1..n {
            if m[row][col].is_zero() {
                continue;
            }
            let factor = m[row][col].mul(&inv);
            for k in col + 1..n {
                if m[col][k].is_zero() {
                    continue;
                }
                let delta = factor.mul(&m[col][k]);
                m[row][k] = m[row][k].sub(&delta);
            }
            let delta = factor.mul(&rhs[col]);
            rhs[row] = rhs[row].sub(&delta);
            m[row][col] = domain.zero();
        }
    }
    let mut x = vec![domain.zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for k in row + 1..n {
            if !m[row][k].is_zero() && !x[k].is_zero() {
                acc = acc.sub(&m[row][k].mul(&x[k]));
            }
        }
        x[row] = acc.mul(&m[row][row].inv()?);
    }
    Ok(x)
}

/// Default truncation order 3 sigma + r + s; always covers the c-coefficient
/// bidegree sigma k/(k-1).
pub fn default_order(sig: &BranchSignature) -> u32 {
    3 * sig.sigma + sig.k_s as u32
}

fn min_order_for(sig: &BranchSignature) -> u32 {
    let mut need = sig.sigma + 2;
    if sig.twisted {
        need = need.max(sig.sigma + sig.sigma / (sig.k_s as u32 - 1) + 1);
    }
    need
}

/// Solves F o phi = phi o G for the Favre germ F and the conjugation phi,
/// then certifies the result by an independent residual computation.
pub fn normalize(
    g: &BiratGerm,
    a0_root: &Scalar,
    eps: &Scalar,
    order: Option<u32>,
) -> Result<ConjugacyCertificate> {
    let sig = &g.sig;
    let order = order.unwrap_or_else(|| default_order(sig)).max(min_order_for(sig));

    let solver = Solver::new(g, a0_root, eps, order)?;
    let (mut b, c, mut a) = solver.solve()?;

    b.insert((sig.p + sig.q) as u32, g.domain.one());
    a.insert((1, 0), solver.a10.clone());

    let target = FavreGerm::new(
        g.domain.clone(),
        solver.lambda.clone(),
        sig.sigma,
        sig.k_s as u32,
        b,
        c,
    )?;
    let phi = PhiData { big_c: solver.big_c.clone(), a, mu: solver.mu.clone() };

    let mut cert = ConjugacyCertificate {
        source: g.clone(),
        target,
        phi,
        order,
        a0_root: a0_root.clone(),
        eps: eps.clone(),
        residual: (
            TruncSeries2::zero(&g.domain, order),
            TruncSeries2::zero(&g.domain, order),
        ),
        extended_support: Vec::new(),
    };
    let residual = conjugacy_residual(&cert, order)?;
    let tol = if is_complex(&g.domain) { 1e-9 } else { 0.0 };
    let mut failed = Vec::new();
    for part in [&residual.0, &residual.1] {
        for (&(i, j), v) in part.iter() {
            if v.abs() > tol || (!is_complex(&g.domain) && !v.is_zero()) {
                let slot = if j >= sig.sigma { (i, j - sig.sigma) } else { (i, j) };
                if !failed.contains(&slot) {
                    failed.push(slot);
                }
            }
        }
    }
    failed.sort();
    cert.residual = residual;
    cert.extended_support = failed;
    Ok(cert)
}

/// Recomputes (F1 o phi - phi1 o G, F2 o phi - phi2 o G) from certificate
/// data alone, at the requested truncation order.
pub fn conjugacy_residual(cert: &ConjugacyCertificate, order: u32) -> Result<(TruncSeries2, TruncSeries2)> {
    let g = &cert.source;
    let d = &g.domain;
    let order = order.min(cert.order);
    let (g1, g2) = g.generic_form(order)?;
    let (f1, f2) = cert.target.as_series(order);
    let phi1 = cert.phi.phi1_series(d, order);
    let phi2 = cert.phi.phi2_series(order)?;

    let lhs1 = f1.compose_pair(&phi1, &phi2)?;
    let rhs1 = phi1.compose_pair(&g1, &g2)?;
    let r1 = lhs1.sub(&rhs1)?;

    let lhs2 = f2.compose_pair(&phi1, &phi2)?;
    let mu_g = cert.phi.mu.truncate_to(order).compose_pair(&g1, &g2)?;
    let one_plus = TruncSeries2::one(d, order).add(&mu_g)?;
    let rhs2 = g2.scale(&cert.phi.big_c).mul(&one_plus)?;
    let r2 = lhs2.sub(&rhs2)?;
    Ok((r1, r2))
}

/// Full re-verification of a certificate: exact mode demands identically
/// zero residual, complex mode allows 1e-9 on every coefficient.
pub fn verify(cert: &ConjugacyCertificate) -> Result<bool> {
    verify_at_order(cert, cert.order)
}

pub fn verify_at_order(cert: &ConjugacyCertificate, order: u32) -> Result<bool> {
    let (r1, r2) = conjugacy_residual(cert, order)?;
    Ok(match &cert.source.domain {
        ScalarDomain::Exact(_) => r1.is_zero() && r2.is_zero(),
        ScalarDomain::Complex => r1.max_coeff_abs() <= 1e-9 && r2.max_coeff_abs() <= 1e-9,
    })
}

/// The diagonal symmetry group L: pairs (A, B) of m-th roots of unity with
/// B = A^r B^s and A = A^(p+rl) B^(q+sl), where m = p + s + rl - delta - 1.
pub fn l_group_modulus(sig: &BranchSignature) -> i64 {
    sig.p + sig.s + sig.r * sig.l as i64 - sig.delta - 1
}

/// Exponent pairs (j1, j2) mod m of the members of L.
pub fn l_group_exponents(sig: &BranchSignature) -> Vec<(i64, i64)> {
    let m = l_group_modulus(sig);
    let mut out = Vec::new();
    for j1 in 0..m {
        for j2 in 0..m {
            let cond1 = (sig.r * j1 + (sig.s - 1) * j2).rem_euclid(m) == 0;
            let cond2 = ((sig.p + sig.r * sig.l as i64 - 1) * j1 + (sig.q + sig.s * sig.l as i64) * j2)
                .rem_euclid(m)
                == 0;
            if cond1 && cond2 {
                out.push((j1, j2));
            }
        }
    }
    out
}

/// Members of L realizable in the scalar domain (all of them in complex
/// mode, the +-1 pairs in exact mode).
pub fn l_group_elements(sig: &BranchSignature, domain: &ScalarDomain) -> Vec<(Scalar, Scalar)> {
    let m = l_group_modulus(sig);
    l_group_exponents(sig)
        .into_iter()
        .filter_map(|(j1, j2)| {
            let a = domain.root_of_unity(m, j1).ok()?;
            let b = domain.root_of_unity(m, j2).ok()?;
            Some((a, b))
        })
        .collect()
}

/// The action of phi_{A,B}(z) = (A z1, B z2): A a'_i = B^(i+1) a_i.
pub fn apply_l_action(g: &BiratGerm, a: &Scalar, b: &Scalar) -> Result<BiratGerm> {
    let inv_a = a.inv()?;
    let tweak = |i: u32, v: &Scalar| -> Result<Scalar> {
        Ok(b.pow_i64(i as i64 + 1)?.mul(v).mul(&inv_a))
    };
    let mut out = g.clone();
    out.a0 = tweak(0, &g.a0)?;
    for (idx, v) in g.a.iter().enumerate() {
        out.a[idx] = tweak(idx as u32 + 1, v)?;
    }
    out.a_k = tweak(g.sig.ak_index(), &g.a_k)?;
    Ok(out)
}

/// The root-of-unity action on Favre germs:
/// lambda' = eps^sigma lambda, b'_m = eps^(m-j) b_m, c' = eps^(sigma k/(k-1)) c.
pub fn apply_eps_action(f: &FavreGerm, eps: &Scalar) -> Result<FavreGerm> {
    let j = f.min_b_index().ok_or(Error::NonTerminating)? as i64;
    let mut b = BTreeMap::new();
    for (&m, v) in f.b.iter() {
        b.insert(m, eps.pow_i64(m as i64 - j)?.mul(v));
    }
    let lambda = eps.pow_i64(f.sigma as i64)?.mul(&f.lambda);
    let c = match f.c_exponent() {
        Some(e) => eps.pow_i64(e as i64)?.mul(&f.c),
        None => f.c.clone(),
    };
    FavreGerm::new(f.domain.clone(), lambda, f.sigma, f.k, b, c)
}

/// Searches for eps with eps^(k-1) = 1 conjugating f1 to f2. Exact mode
/// enumerates the rational roots +-1, complex mode all k-1 roots (tol 1e-9).
pub fn favre_equivalent(f1: &FavreGerm, f2: &FavreGerm, tol: f64) -> Result<Option<Scalar>> {
    if f1.k != f2.k || f1.sigma != f2.sigma {
        return Err(Error::ParameterMismatch(format!(
            "(k, sigma) = ({}, {}) vs ({}, {})",
            f1.k, f1.sigma, f2.k, f2.sigma
        )));
    }
    let d = &f1.domain;
    let m = f1.k as i64 - 1;
    let candidates: Vec<Scalar> = match d {
        ScalarDomain::Complex => (0..m).map(|j| d.root_of_unity(m, j).unwrap()).collect(),
        ScalarDomain::Exact(_) => (0..m).filter_map(|j| d.root_of_unity(m, j).ok()).collect(),
    };
    for eps in candidates {
        let moved = apply_eps_action(f1, &eps)?;
        if favre_close(&moved, f2, tol) {
            return Ok(Some(eps));
        }
    }
    Ok(None)
}

fn favre_close(f1: &FavreGerm, f2: &FavreGerm, tol: f64) -> bool {
    if !f1.lambda.approx_eq(&f2.lambda, tol) || !f1.c.approx_eq(&f2.c, tol) {
        return false;
    }
    let keys: std::collections::BTreeSet<u32> = f1.b.keys().chain(f2.b.keys()).cloned().collect();
    keys.iter().all(|&m| {
        let x = f1.b.get(&m).cloned().unwrap_or_else(|| f1.domain.zero());
        let y = f2.b.get(&m).cloned().unwrap_or_else(|| f2.domain.zero());
        x.approx_eq(&y, tol)
    })
}

/// Searches L for a pair (A, B) with g2 = phi_{A,B}^(-1) g1 phi_{A,B}.
/// The modulus of a0 is invariant under the action; inputs violating that
/// are rejected as mismatched parameters.
pub fn birat_equivalent(
    g1: &BiratGerm,
    g2: &BiratGerm,
    tol: f64,
) -> Result<Option<(Scalar, Scalar)>> {
    if g1.sig != g2.sig {
        return Err(Error::ParameterMismatch("signatures differ".into()));
    }
    let ratio_ok = match (&g1.a0, &g2.a0) {
        (Scalar::Complex(x), Scalar::Complex(y)) => (x.norm() - y.norm()).abs() <= tol * x.norm().max(1.0),
        _ => {
            let r = g2.a0.div(&g1.a0).map_err(|_| Error::ParameterMismatch("a0 = 0".into()))?;
            r.is_one() || r.strict_eq(&g1.domain.from_i64(-1))
        }
    };
    if !ratio_ok {
        return Err(Error::ParameterMismatch(
            "a0 moduli differ; no diagonal root-of-unity conjugation exists".into(),
        ));
    }
    for (a, b) in l_group_elements(&g1.sig, &g1.domain) {
        let moved = apply_l_action(g1, &a, &b)?;
        let close = moved.a0.approx_eq(&g2.a0, tol)
            && moved
                .a
                .iter()
                .zip(g2.a.iter())
                .all(|(x, y)| x.approx_eq(y, tol))
            && moved.a_k.approx_eq(&g2.a_k, tol);
        if close {
            return Ok(Some((a, b)));
        }
    }
    Ok(None)
}
