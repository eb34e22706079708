use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cyclo::{gamma0_image, CycloSeries, RingParams};
use crate::error::{Result, WachError};
use crate::padic::{binomial, factorial, val_factorial, val_rational, PadicScalar};

/// Dense polynomials over `Q`, truncated by the caller.
pub(crate) mod qpoly {
    use super::*;

    pub fn from_ints(v: &[BigInt]) -> Vec<BigRational> {
        v.iter().map(|c| BigRational::from_integer(c.clone())).collect()
    }

    pub fn add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
                let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
                x + y
            })
            .collect()
    }

    pub fn scale(a: &[BigRational], c: &BigRational) -> Vec<BigRational> {
        a.iter().map(|x| x * c).collect()
    }

    pub fn mul(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); len.min(a.len() + b.len())];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if i + j >= out.len() {
                    break;
                }
                out[i + j] += x * y;
            }
        }
        out
    }

    /// Quotient and remainder by a monic polynomial.
    pub fn divmod_monic(a: &[BigRational], m: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let d = m.len() - 1;
        let mut r = a.to_vec();
        if r.len() <= d {
            r.resize(d, BigRational::zero());
            return (vec![], r);
        }
        let mut q = vec![BigRational::zero(); r.len() - d];
        for k in (d..r.len()).rev() {
            let c = r[k].clone();
            if c.is_zero() {
                continue;
            }
            q[k - d] = c.clone();
            for (i, mi) in m.iter().enumerate() {
                r[k - d + i] -= &c * mi;
            }
        }
        r.truncate(d);
        (q, r)
    }

    pub fn is_zero(a: &[BigRational]) -> bool {
        a.iter().all(|c| c.is_zero())
    }
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `(1+u)^n − 1` with integer coefficients.
pub fn one_plus_u_pow_minus_one(n: u64) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = (0..=n).map(|k| BigInt::from(binomial(n, k))).collect();
    v[0] = BigInt::zero();
    v
}

/// The Eisenstein polynomial `P(u) = Σ_{i<p} (1+u)^{i p^{m-1}}`, monic of degree `e`.
pub fn eisenstein(p: u64, m: u32) -> Vec<BigInt> {
    let step = p.pow(m - 1);
    let mut out = vec![BigInt::zero(); (step * (p - 1) + 1) as usize];
    for i in 0..p {
        let n = i * step;
        for k in 0..=n {
            out[k as usize] += BigInt::from(binomial(n, k));
        }
    }
    out
}

/// `⌊k/e⌋!`.
fn fl_fact(params: &RingParams, k: usize) -> BigUint {
    factorial(k as u64 / params.e)
}

fn carry_table(params: &RingParams) -> &Result<Vec<BigUint>> {
    params.pd_carry.get_or_init(|| {
        let n = params.pd_deg;
        let facts: Vec<BigUint> = (0..=(2 * n) as u64 / params.e).map(factorial).collect();
        let f = |k: usize| &facts[k / params.e as usize];
        let mut table = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let num = f(j + k);
                let den = f(j) * f(k);
                let (q, r) = num.div_rem(&den);
                if !r.is_zero() {
                    return Err(WachError::IntegralityViolation(format!(
                        "carry factor c({j},{k}) is not integral"
                    )));
                }
                table.push(q);
            }
        }
        Ok(table)
    })
}

/// Element of the truncated PD ring in the basis `b_k = u^k/⌊k/e⌋!`.
#[derive(Clone, Debug)]
pub struct PDSeries {
    params: Arc<RingParams>,
    coeffs: Vec<PadicScalar>,
}

impl PartialEq for PDSeries {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl PDSeries {
    pub fn from_coeffs(params: &Arc<RingParams>, coeffs: Vec<PadicScalar>) -> Self {
        let n = params.prec;
        let mut coeffs: Vec<PadicScalar> = coeffs.into_iter().map(|c| c.with_prec(n)).collect();
        coeffs.truncate(params.pd_deg);
        while coeffs.len() < params.pd_deg {
            coeffs.push(PadicScalar::zero(params.p, n));
        }
        PDSeries {
            params: params.clone(),
            coeffs,
        }
    }

    pub fn zero(params: &Arc<RingParams>) -> Self {
        Self::from_coeffs(params, vec![])
    }

    pub fn one(params: &Arc<RingParams>) -> Self {
        Self::from_coeffs(params, vec![params.int(1)])
    }

    pub fn basis(params: &Arc<RingParams>, k: usize) -> Self {
        let mut v = vec![PadicScalar::zero(params.p, params.prec); k];
        v.push(params.int(1));
        Self::from_coeffs(params, v)
    }

    pub fn params(&self) -> &Arc<RingParams> {
        &self.params
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &PadicScalar {
        &self.coeffs[k]
    }

    pub fn min_prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(self.params.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .all(|(a, b)| a.eq_to_prec(b))
    }

    /// The ring map from the series ring: `u^k = ⌊k/e⌋!·b_k`.
    pub fn from_cyclo(s: &CycloSeries) -> Self {
        let params = s.params();
        let coeffs = s
            .coeffs()
            .iter()
            .take(params.pd_deg)
            .enumerate()
            .map(|(k, c)| c.mul_ref(&params.ubig(&fl_fact(params, k))))
            .collect();
        Self::from_coeffs(params, coeffs)
    }

    /// Rational `u`-polynomial to PD coordinates, asserting integrality.
    pub fn from_rational_poly(params: &Arc<RingParams>, poly: &[BigRational]) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(params.pd_deg);
        for (k, c) in poly.iter().take(params.pd_deg).enumerate() {
            let f = BigRational::from_integer(BigInt::from(fl_fact(params, k)));
            let v = c * f;
            if let Some(val) = val_rational(&v, params.p) {
                if val < 0 {
                    return Err(WachError::IntegralityViolation(format!(
                        "coefficient of b[{k}] has valuation {val}"
                    )));
                }
            }
            coeffs.push(PadicScalar::from_rational(params.p, &v, params.prec)?);
        }
        Ok(Self::from_coeffs(params, coeffs))
    }

    /// Rational `u`-polynomial with the lifted coefficients.
    pub fn to_rational_poly(&self) -> Vec<BigRational> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                BigRational::new(c.lift(), BigInt::from(fl_fact(&self.params, k)))
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        PDSeries {
            params: self.params.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        PDSeries {
            params: self.params.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg_ref()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        let n = self.params.prec;
        PDSeries {
            params: self.params.clone(),
            coeffs: self.coeffs.iter().map(|a| a.mul_ref(c).with_prec(n)).collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let table = carry_table(&self.params).as_ref().map_err(|e| e.clone())?;
        let n = self.params.pd_deg;
        let p = self.params.p;
        let mut acc = vec![BigUint::zero(); n];
        let mut precs = vec![self.params.prec; n];
        for (j, a) in self.coeffs.iter().enumerate() {
            for (k, b) in other.coeffs.iter().enumerate().take(n - j) {
                let pr = (a.prec() + b.val()).min(b.prec() + a.val());
                if pr < precs[j + k] {
                    precs[j + k] = pr;
                }
                if !a.residue().is_zero() && !b.residue().is_zero() {
                    acc[j + k] += a.residue() * b.residue() * &table[j * n + k];
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .zip(precs)
            .map(|(s, pr)| PadicScalar::from_biguint(p, &s, pr))
            .collect();
        Ok(PDSeries {
            params: self.params.clone(),
            coeffs,
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("carry factors are integral")
    }

    /// Substitution `u ↦ g` for a series `g` of order at least one.
    pub fn substitute(&self, g: &CycloSeries) -> Self {
        let params = &self.params;
        let n = params.pd_deg;
        let mut out = PDSeries::zero(params);
        let mut gk = CycloSeries::one(params);
        for k in 0..n {
            let ak = &self.coeffs[k];
            if !ak.is_zero() || ak.prec() < params.prec {
                let fk = fl_fact(params, k);
                let img: Vec<PadicScalar> = (0..n)
                    .map(|i| {
                        if i < k {
                            return PadicScalar::zero(params.p, params.prec);
                        }
                        let ratio = fl_fact(params, i) / &fk;
                        gk.coeff(i).mul_ref(&params.ubig(&ratio))
                    })
                    .collect();
                let img = PDSeries::from_coeffs(params, img);
                out = out.add(&img.scale(ak));
            }
            gk = gk.mul(g);
        }
        out
    }

    pub fn frobenius(&self) -> Self {
        self.substitute(&CycloSeries::pi_m(&self.params).frobenius())
    }

    pub fn gamma0(&self, c: &PadicScalar) -> Result<Self> {
        crate::cyclo::check_character(&self.params, c)?;
        Ok(self.substitute(&gamma0_image(&self.params, c)))
    }

    pub fn to_text(&self) -> String {
        let n = self.params.prec;
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !(c.is_zero() && c.prec() >= n))
            .map(|(k, c)| {
                if c.prec() >= n {
                    format!("{}*b[{}]", c.residue(), k)
                } else {
                    format!("{}@{}*b[{}]", c.residue(), c.prec(), k)
                }
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn parse(params: &Arc<RingParams>, text: &str) -> Result<Self> {
        let text = text.trim();
        let mut coeffs = vec![PadicScalar::zero(params.p, params.prec); params.pd_deg];
        if text.is_empty() || text == "0" {
            return Ok(Self::from_coeffs(params, coeffs));
        }
        for term in text.split(" + ") {
            let term = term.trim();
            let (c, k) = term
                .strip_suffix(']')
                .and_then(|t| t.split_once("*b["))
                .ok_or_else(|| WachError::Parse(format!("expected c*b[k], got {term}")))?;
            let k: usize = k
                .parse()
                .map_err(|_| WachError::Parse(format!("bad index in {term}")))?;
            if k >= params.pd_deg {
                return Err(WachError::Parse(format!("index {k} beyond truncation")));
            }
            let (v, pr) = match c.split_once('@') {
                Some((v, pr)) => (
                    v,
                    pr.parse::<u32>()
                        .map_err(|_| WachError::Parse(format!("bad precision in {term}")))?,
                ),
                None => (c, params.prec),
            };
            let v: BigInt = v
                .parse()
                .map_err(|_| WachError::Parse(format!("bad coefficient in {term}")))?;
            coeffs[k] = coeffs[k].add_ref(&PadicScalar::new(params.p, &v, pr.min(params.prec)));
        }
        Ok(Self::from_coeffs(params, coeffs))
    }
}

impl fmt::Display for PDSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn check_degree(params: &RingParams) -> Result<()> {
    if params.pd_deg as u64 <= params.p_m() {
        return Err(WachError::InsufficientDegree(format!(
            "PD degree {} must exceed p^m = {}",
            params.pd_deg,
            params.p_m()
        )));
    }
    Ok(())
}

fn pi_poly(params: &RingParams) -> Vec<BigRational> {
    qpoly::from_ints(&one_plus_u_pow_minus_one(params.p_m()))
}

/// `ξ = P(u)`.
pub fn xi_element(params: &Arc<RingParams>) -> PDSeries {
    let p = eisenstein(params.p, params.m);
    PDSeries::from_rational_poly(params, &qpoly::from_ints(&p)).expect("integral polynomial")
}

/// `ξ^{[k]} = P(u)^k/k!`.
pub fn xi_divided_power(params: &Arc<RingParams>, k: u64) -> Result<PDSeries> {
    let p = qpoly::from_ints(&eisenstein(params.p, params.m));
    let mut acc = vec![BigRational::one()];
    for _ in 0..k {
        acc = qpoly::mul(&acc, &p, params.pd_deg);
    }
    let f = BigRational::from_integer(BigInt::from(factorial(k)));
    PDSeries::from_rational_poly(params, &qpoly::scale(&acc, &f.recip()))
}

/// `Σ_k w_k π^k` summed over `k < terms`, as a rational `u`-polynomial.
fn pi_series(params: &RingParams, weights: &[BigRational]) -> Vec<BigRational> {
    let len = params.pd_deg;
    let pi = pi_poly(params);
    let mut acc = vec![BigRational::zero(); len];
    let mut pik = vec![BigRational::one()];
    for w in weights.iter().take(len) {
        if !w.is_zero() {
            acc = qpoly::add(&acc, &qpoly::scale(&pik, w));
        }
        pik = qpoly::mul(&pik, &pi, len);
    }
    acc.truncate(len);
    acc
}

/// `t = log(1+π) = Σ_{k≥1} (−1)^{k−1} π^k/k`.
pub fn t_element(params: &Arc<RingParams>) -> Result<PDSeries> {
    check_degree(params)?;
    let w: Vec<BigRational> = (0..params.pd_deg as i64)
        .map(|k| {
            if k == 0 {
                BigRational::zero()
            } else {
                let s = if k % 2 == 1 { 1 } else { -1 };
                BigRational::new(BigInt::from(s), BigInt::from(k))
            }
        })
        .collect();
    PDSeries::from_rational_poly(params, &pi_series(params, &w))
}

/// `t/π = Σ_{k≥0} (−1)^k π^k/(k+1)`.
pub fn t_over_pi(params: &Arc<RingParams>) -> Result<PDSeries> {
    check_degree(params)?;
    let w = t_over_pi_weights(params.pd_deg);
    PDSeries::from_rational_poly(params, &pi_series(params, &w))
}

pub fn t_over_pi_weights(n: usize) -> Vec<BigRational> {
    (0..n as i64)
        .map(|k| {
            let s = if k % 2 == 0 { 1 } else { -1 };
            BigRational::new(BigInt::from(s), BigInt::from(k + 1))
        })
        .collect()
}

/// Coefficients `b_k` of `π/t = Σ b_k π^k`, by power-series inversion.
pub fn pi_over_t_weights(n: usize) -> Vec<BigRational> {
    let a = t_over_pi_weights(n);
    let mut b = vec![BigRational::zero(); n];
    if n > 0 {
        b[0] = BigRational::one();
    }
    for k in 1..n {
        let mut s = BigRational::zero();
        for j in 1..=k {
            s += &a[j] * &b[k - j];
        }
        b[k] = -s;
    }
    b
}

/// First `K` such that every `k ≥ K` has `−k/(p−1) + v_p(⌊p^m k/e⌋!) ≥ N`.
pub fn unit_cutoff(p: u64, prec: u32) -> usize {
    let scaled = |k: u64| -> i64 {
        let n = p * k / (p - 1);
        (val_factorial(n, p) * (p - 1)) as i64 - k as i64
    };
    let target = (prec as u64 * (p - 1)) as i64;
    let limit = 64 * (p - 1) * (p - 1) * (prec as u64 + 16) + 256;
    let mut last_fail = 0u64;
    for k in 1..limit {
        if scaled(k) < target {
            last_fail = k;
        }
    }
    last_fail as usize + 1
}

#[derive(Clone, Debug)]
pub struct UnitInverse {
    pub value: PDSeries,
    pub cutoff_bound: usize,
    pub terms_used: usize,
}

/// `π/t` in the PD basis, summed up to the proof-bound cutoff.
pub fn invert_t_over_pi(params: &Arc<RingParams>) -> Result<UnitInverse> {
    check_degree(params)?;
    let cutoff = unit_cutoff(params.p, params.prec);
    let used = cutoff.min(params.pd_deg);
    let mut w = pi_over_t_weights(used);
    w.resize(params.pd_deg, BigRational::zero());
    let value = PDSeries::from_rational_poly(params, &pi_series(params, &w))?;
    Ok(UnitInverse {
        value,
        cutoff_bound: cutoff,
        terms_used: used,
    })
}

/// Element of `O_K = Z_p[x]/P(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OKElement {
    pub p: u64,
    pub coeffs: Vec<PadicScalar>,
}

impl OKElement {
    fn modulus(params: &RingParams) -> Vec<BigInt> {
        eisenstein(params.p, params.m)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .all(|(a, b)| a.eq_to_prec(b))
    }

    pub fn add(&self, other: &Self) -> Self {
        OKElement {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self, params: &RingParams) -> Self {
        let e = self.coeffs.len();
        let prec = params.exact_prec();
        let mut prod = vec![PadicScalar::zero(self.p, prec); 2 * e - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                prod[i + j] = prod[i + j].add_ref(&a.mul_ref(b));
            }
        }
        let modulus = Self::modulus(params);
        for k in (e..prod.len()).rev() {
            let c = prod[k].clone();
            for (i, mi) in modulus.iter().enumerate().take(e) {
                let t = c.mul_ref(&PadicScalar::new(self.p, mi, prec));
                prod[k - e + i] = prod[k - e + i].sub_ref(&t);
            }
        }
        prod.truncate(e);
        OKElement {
            p: self.p,
            coeffs: prod,
        }
    }
}

/// Absolute precision of `θ` images: the truncated tail maps into `p^cap O_K`.
pub fn theta_precision_cap(params: &RingParams) -> u32 {
    let p = params.p;
    if p == 2 {
        return 1.min(params.prec);
    }
    let start = params.pd_deg as u64 / params.e;
    let mut best = params.prec as u64;
    let mut j = start;
    while j * (p - 2) < best * (p - 1) {
        best = best.min(j - val_factorial(j, p));
        j += 1;
    }
    best as u32
}

/// `θ(a)`: `u ↦ x` modulo `P(x)`, dividing out the PD denominators.
pub fn theta_reduce(a: &PDSeries) -> Result<OKElement> {
    let params = a.params();
    let e = params.e as usize;
    let p = params.p;
    let modulus = OKElement::modulus(params);
    let cap = theta_precision_cap(params).min(a.min_prec());
    let mut xk: Vec<BigInt> = vec![BigInt::one()];
    let mut acc = vec![PadicScalar::zero(p, cap); e];
    for k in 0..params.pd_deg {
        let fk = BigInt::from(fl_fact(params, k));
        let ak = a.coeff(k);
        for (i, c) in xk.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let q = BigRational::new(c.clone(), fk.clone());
            let s = PadicScalar::from_rational(p, &q, params.exact_prec()).map_err(|_| {
                WachError::IntegralityViolation(format!("θ(b[{k}]) is not integral"))
            })?;
            acc[i] = acc[i].add_ref(&ak.mul_ref(&s).with_prec(cap));
        }
        xk = int_poly_mul(&xk, &[BigInt::zero(), BigInt::one()]);
        if xk.len() > e {
            let top = xk.pop().unwrap();
            for (i, mi) in modulus.iter().enumerate().take(e) {
                xk[i] -= &top * mi;
            }
        }
    }
    Ok(OKElement { p, coeffs: acc })
}

/// Largest `r ≤ ⌊M_PD/e⌋` with `a ∈ (ξ^{[k]} : k ≥ r)`.
pub fn fil_degree(a: &PDSeries) -> Result<usize> {
    if a.is_zero() {
        return Err(WachError::ZeroElement);
    }
    let params = a.params();
    let cap = params.pd_deg / params.e as usize;
    let prec = a.min_prec() as i64;
    let modulus = qpoly::from_ints(&eisenstein(params.p, params.m));
    let mut rest = a.to_rational_poly();
    let mut fact = BigRational::one();
    for j in 0..cap {
        if qpoly::is_zero(&rest) {
            return Ok(cap);
        }
        if j > 0 {
            fact *= BigRational::from_integer(BigInt::from(j));
        }
        let (q, r) = qpoly::divmod_monic(&rest, &modulus);
        let nonzero = r.iter().any(|c| {
            let v = c * &fact;
            match val_rational(&v, params.p) {
                Some(val) => val < prec,
                None => false,
            }
        });
        if nonzero {
            return Ok(j);
        }
        rest = q;
    }
    Ok(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::Chi0Policy;

    fn params(p: u64, m: u32, n: u32, mpd: usize) -> Arc<RingParams> {
        RingParams::new(p, m, n, 64, mpd, &Chi0Policy::Default).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn carry_examples() {
        let pr = params(2, 1, 8, 12);
        let pr2 = params(3, 1, 8, 12);
        let b1 = PDSeries::basis(&pr2, 1);
        let b2 = PDSeries::basis(&pr2, 2);
        assert!(b1.mul(&b1).eq_to_prec(&b2));
        let b4 = PDSeries::basis(&pr2, 4);
        assert!(b2.mul(&b2).eq_to_prec(&b4.scale(&pr2.int(2))));
        let x = PDSeries::basis(&pr, 3).add(&PDSeries::basis(&pr, 5));
        assert_eq!(PDSeries::one(&pr).mul(&x), x);
    }

    #[test]
    fn xi_examples() {
        let pr = params(2, 1, 8, 12);
        let xi = xi_element(&pr);
        assert_eq!(xi.coeff(0).to_u64(), Some(2));
        assert_eq!(xi.coeff(1).to_u64(), Some(1));
        for (p, m) in [(2, 2), (3, 1), (3, 2), (5, 1)] {
            let pr = params(p, m, 8, 40);
            let poly = eisenstein(p, m);
            assert_eq!(poly.len() as u64, pr.e + 1);
            assert!(poly.last().unwrap().is_one());
            let th = theta_reduce(&xi_element(&pr)).unwrap();
            assert!(th.is_zero());
        }
    }

    #[test]
    fn theta_examples() {
        let pr = params(3, 1, 8, 40);
        let one = theta_reduce(&PDSeries::one(&pr)).unwrap();
        assert_eq!(one.coeffs[0].to_u64(), Some(1));
        assert!(one.coeffs[1].is_zero());
        let u = theta_reduce(&PDSeries::basis(&pr, 1)).unwrap();
        assert!(u.coeffs[0].is_zero());
        assert_eq!(u.coeffs[1].to_u64(), Some(1));
    }

    #[test]
    fn t_examples() {
        let w = t_over_pi_weights(3);
        assert_eq!(w[0], q(1, 1));
        assert_eq!(w[1], q(-1, 2));
        let b = pi_over_t_weights(3);
        assert_eq!(b[0], q(1, 1));
        assert_eq!(b[1], q(1, 2));
        assert_eq!(b[2], q(-1, 12));
        for (p, m) in [(3, 1), (2, 2), (5, 1)] {
            let pr = params(p, m, 8, 40);
            let t = t_element(&pr).unwrap();
            let c = pr.chi0.clone();
            assert!(t.gamma0(&c).unwrap().eq_to_prec(&t.scale(&c)));
        }
    }

    #[test]
    fn unit_product_is_one() {
        for (p, m) in [(2, 2), (3, 1), (3, 2), (5, 1)] {
            let pr = params(p, m, 8, 40);
            let top = t_over_pi(&pr).unwrap();
            let inv = invert_t_over_pi(&pr).unwrap();
            assert_eq!(inv.value.coeff(0).to_u64(), Some(1));
            let prod = top.mul(&inv.value);
            assert!(prod.eq_to_prec(&PDSeries::one(&pr)), "{p},{m}: {prod}");
        }
        assert!(matches!(
            invert_t_over_pi(&params(3, 2, 8, 9)),
            Err(WachError::InsufficientDegree(_))
        ));
    }

    #[test]
    fn cutoff_matches_full_sum() {
        let pr = params(2, 2, 8, 40);
        let inv = invert_t_over_pi(&pr).unwrap();
        assert!(inv.terms_used < 40);
        let full = PDSeries::from_rational_poly(&pr, &pi_series(&pr, &pi_over_t_weights(40))).unwrap();
        assert!(full.eq_to_prec(&inv.value));
    }

    #[test]
    fn fil_examples() {
        let pr = params(2, 1, 8, 40);
        assert_eq!(fil_degree(&xi_element(&pr)).unwrap(), 1);
        assert_eq!(fil_degree(&PDSeries::one(&pr)).unwrap(), 0);
        assert_eq!(fil_degree(&xi_divided_power(&pr, 2).unwrap()).unwrap(), 2);
        assert_eq!(fil_degree(&PDSeries::zero(&pr)), Err(WachError::ZeroElement));
        let pr3 = params(3, 1, 8, 40);
        let t = t_element(&pr3).unwrap();
        assert_eq!(fil_degree(&t).unwrap(), 1);
    }

    #[test]
    fn text_round_trip() {
        let pr = params(3, 1, 6, 20);
        let x = t_over_pi(&pr).unwrap().scale(&pr.int(3)).add(&PDSeries::basis(&pr, 2).scale(&PadicScalar::from_i64(3, 4, 3)));
        assert_eq!(PDSeries::parse(&pr, &x.to_text()).unwrap(), x);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn elem(pr: &Arc<RingParams>, v: &[i64]) -> PDSeries {
            PDSeries::from_coeffs(pr, v.iter().map(|&x| pr.int(x)).collect())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(30))]

            #[test]
            fn mul_is_commutative_and_associative(
                a in prop::collection::vec(-40i64..40, 1..12),
                b in prop::collection::vec(-40i64..40, 1..12),
                c in prop::collection::vec(-40i64..40, 1..12),
            ) {
                let pr = params(3, 1, 8, 24);
                let (x, y, z) = (elem(&pr, &a), elem(&pr, &b), elem(&pr, &c));
                prop_assert!(x.mul(&y).eq_to_prec(&y.mul(&x)));
                prop_assert!(x.mul(&y).mul(&z).eq_to_prec(&x.mul(&y.mul(&z))));
            }

            #[test]
            fn theta_is_a_ring_map(
                a in prop::collection::vec(-40i64..40, 1..12),
                b in prop::collection::vec(-40i64..40, 1..12),
            ) {
                let pr = params(5, 1, 6, 40);
                let (x, y) = (elem(&pr, &a), elem(&pr, &b));
                let tx = theta_reduce(&x).unwrap();
                let ty = theta_reduce(&y).unwrap();
                prop_assert!(theta_reduce(&x.add(&y)).unwrap().eq_to_prec(&tx.add(&ty)));
                prop_assert!(theta_reduce(&x.mul(&y)).unwrap().eq_to_prec(&tx.mul(&ty, &pr)));
            }

            #[test]
            fn fil_is_superadditive(
                a in prop::collection::vec(-40i64..40, 1..10),
                b in prop::collection::vec(-40i64..40, 1..10),
                i in 0u64..3,
                j in 0u64..3,
            ) {
                let pr = params(3, 1, 8, 40);
                let x = elem(&pr, &a).mul(&xi_divided_power(&pr, i).unwrap());
                let y = elem(&pr, &b).mul(&xi_divided_power(&pr, j).unwrap());
                let xy = x.mul(&y);
                if !x.is_zero() && !y.is_zero() && !xy.is_zero() {
                    let fx = fil_degree(&x).unwrap();
                    let fy = fil_degree(&y).unwrap();
                    prop_assert!(fil_degree(&xy).unwrap() >= (fx + fy).min(20));
                }
            }
        }
    }
}
