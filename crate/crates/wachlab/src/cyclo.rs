use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Result, WachError};
use crate::padic::{
    binomial, binomial_padic, exp_padic, is_prime, p_pow, val_factorial, PadicScalar,
};

/// How the value `c = χ(γ_0)` is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chi0Policy {
    /// `exp(p^m)` where the series converges, `1 + p^m` otherwise.
    Default,
    /// `exp(p^m)`; a configuration error when the series diverges.
    Exp,
    /// An explicit integer representative.
    Value(BigInt),
}

#[derive(Debug)]
pub struct RingParams {
    pub p: u64,
    pub m: u32,
    pub e: u64,
    pub prec: u32,
    pub series_deg: usize,
    pub pd_deg: usize,
    pub chi0: PadicScalar,
    frob: OnceLock<SeriesSubst>,
    gamma0: OnceLock<SeriesSubst>,
    pub(crate) pd_carry: OnceLock<Result<Vec<BigUint>>>,
}

impl RingParams {
    pub fn new(
        p: u64,
        m: u32,
        prec: u32,
        series_deg: usize,
        pd_deg: usize,
        policy: &Chi0Policy,
    ) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(WachError::Config(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(WachError::Config("level m must be at least 1".into()));
        }
        if prec == 0 || series_deg < 2 || pd_deg < 2 {
            return Err(WachError::Config(
                "precision must be positive and truncation degrees at least 2".into(),
            ));
        }
        if pd_deg > series_deg {
            return Err(WachError::Config(
                "PD truncation degree cannot exceed the series truncation degree".into(),
            ));
        }
        let work = Self::chi0_work_prec(p, prec, series_deg.max(pd_deg));
        let pm = p_pow(p, m);
        let chi0 = match policy {
            Chi0Policy::Default => {
                if p == 2 && m == 1 {
                    PadicScalar::from_biguint(p, &(pm + 1u32), work)
                } else {
                    exp_padic(&PadicScalar::from_biguint(p, &pm, work))?
                }
            }
            Chi0Policy::Exp => exp_padic(&PadicScalar::from_biguint(p, &pm, work))
                .map_err(|e| WachError::Config(format!("χ(γ_0) = exp(p^m) unusable: {e}")))?,
            Chi0Policy::Value(c) => {
                let c = PadicScalar::new(p, c, work);
                let cm1 = c.sub_ref(&PadicScalar::one(p, work));
                if cm1.val() < m {
                    return Err(WachError::BadCharacterValue { m });
                }
                if cm1.is_zero() {
                    return Err(WachError::Config("χ(γ_0) must differ from 1".into()));
                }
                c
            }
        };
        Ok(Arc::new(RingParams {
            p,
            m,
            e: p.pow(m - 1) * (p - 1),
            prec,
            series_deg,
            pd_deg,
            chi0,
            frob: OnceLock::new(),
            gamma0: OnceLock::new(),
            pd_carry: OnceLock::new(),
        }))
    }

    pub fn chi0_work_prec(p: u64, prec: u32, deg: usize) -> u32 {
        prec + val_factorial(deg.max(64) as u64, p) as u32 + 16
    }

    pub fn p_m(&self) -> u64 {
        self.p.pow(self.m)
    }

    /// Precision used for exact integer constants.
    pub fn exact_prec(&self) -> u32 {
        self.prec + 64
    }

    pub fn int(&self, v: i64) -> PadicScalar {
        PadicScalar::from_i64(self.p, v, self.exact_prec())
    }

    pub fn big(&self, v: &BigInt) -> PadicScalar {
        PadicScalar::new(self.p, v, self.exact_prec())
    }

    pub fn ubig(&self, v: &BigUint) -> PadicScalar {
        PadicScalar::from_biguint(self.p, v, self.exact_prec())
    }

    pub fn same_as(&self, other: &RingParams) -> bool {
        self.p == other.p
            && self.m == other.m
            && self.prec == other.prec
            && self.series_deg == other.series_deg
            && self.pd_deg == other.pd_deg
            && self.chi0.eq_to_prec(&other.chi0)
    }

    fn frob_subst(self: &Arc<Self>) -> &SeriesSubst {
        self.frob.get_or_init(|| {
            let coeffs: Vec<i64> = (0..=self.p)
                .map(|k| if k == 0 { 0 } else { binomial(self.p, k).try_into().unwrap() })
                .collect();
            SeriesSubst::new(&CycloSeries::from_ints(self, &coeffs))
        })
    }

    fn gamma0_subst(self: &Arc<Self>) -> &SeriesSubst {
        self.gamma0
            .get_or_init(|| SeriesSubst::new(&gamma0_image(self, &self.chi0)))
    }
}

/// A truncated series in `u = π_m` with `series_deg` coefficients.
#[derive(Clone, Debug)]
pub struct CycloSeries {
    params: Arc<RingParams>,
    coeffs: Vec<PadicScalar>,
}

fn cap(c: PadicScalar, n: u32) -> PadicScalar {
    c.with_prec(n)
}

impl CycloSeries {
    pub fn from_coeffs(params: &Arc<RingParams>, coeffs: Vec<PadicScalar>) -> Self {
        let n = params.prec;
        let mut coeffs: Vec<PadicScalar> = coeffs.into_iter().map(|c| cap(c, n)).collect();
        coeffs.truncate(params.series_deg);
        while coeffs.len() < params.series_deg {
            coeffs.push(PadicScalar::zero(params.p, n));
        }
        CycloSeries {
            params: params.clone(),
            coeffs,
        }
    }

    pub fn from_ints(params: &Arc<RingParams>, ints: &[i64]) -> Self {
        let c = ints.iter().map(|&v| params.int(v)).collect();
        Self::from_coeffs(params, c)
    }

    pub fn zero(params: &Arc<RingParams>) -> Self {
        Self::from_coeffs(params, vec![])
    }

    pub fn one(params: &Arc<RingParams>) -> Self {
        Self::constant(params, params.int(1))
    }

    pub fn constant(params: &Arc<RingParams>, c: PadicScalar) -> Self {
        Self::from_coeffs(params, vec![c])
    }

    pub fn monomial(params: &Arc<RingParams>, k: usize, c: PadicScalar) -> Self {
        let mut v = vec![PadicScalar::zero(params.p, params.prec); k];
        v.push(c);
        Self::from_coeffs(params, v)
    }

    /// The coordinate `π_m`.
    pub fn pi_m(params: &Arc<RingParams>) -> Self {
        Self::monomial(params, 1, params.int(1))
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

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Smallest coefficient precision.
    pub fn min_prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(self.params.prec)
    }

    /// Smallest coefficient valuation.
    pub fn content(&self) -> u32 {
        self.coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.val())
            .min()
            .unwrap_or(self.params.prec)
    }

    /// Index of the first coefficient that is not zero to precision.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .all(|(a, b)| a.eq_to_prec(b))
    }

    pub fn with_prec(&self, k: u32) -> Self {
        CycloSeries {
            params: self.params.clone(),
            coeffs: self.coeffs.iter().map(|c| c.with_prec(k)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.add_ref(b))
            .collect();
        CycloSeries {
            params: self.params.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Self {
        CycloSeries {
            params: self.params.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg_ref()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        let n = self.params.prec;
        CycloSeries {
            params: self.params.clone(),
            coeffs: self.coeffs.iter().map(|a| cap(a.mul_ref(c), n)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.coeffs.len();
        let n = self.params.prec;
        let p = self.params.p;
        let mut acc: Vec<BigUint> = vec![BigUint::zero(); len];
        let mut precs: Vec<u32> = vec![n; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                let k = i + j;
                let pr = (a.prec() + b.val()).min(b.prec() + a.val());
                if pr < precs[k] {
                    precs[k] = pr;
                }
                if !a.residue().is_zero() && !b.residue().is_zero() {
                    acc[k] += a.residue() * b.residue();
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .zip(precs)
            .map(|(s, pr)| PadicScalar::from_biguint(p, &s, pr))
            .collect();
        CycloSeries {
            params: self.params.clone(),
            coeffs,
        }
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut result = Self::one(&self.params);
        for _ in 0..k {
            result = result.mul(self);
        }
        result
    }

    /// `f(g)` for `g` without constant term.
    pub fn compose(&self, g: &Self) -> Self {
        SeriesSubst::new(g).apply(self)
    }

    /// Substitution `π_m ↦ (1+π_m)^p − 1`.
    pub fn frobenius(&self) -> Self {
        self.params.frob_subst().apply(self)
    }

    /// Substitution `π_m ↦ (1+π_m)^c − 1`.
    pub fn gamma0(&self, c: &PadicScalar) -> Result<Self> {
        check_character(&self.params, c)?;
        if self.params.chi0.eq_to_prec(c) && c.prec() >= self.params.chi0.prec() {
            return Ok(self.params.gamma0_subst().apply(self));
        }
        Ok(SeriesSubst::new(&gamma0_image(&self.params, c)).apply(self))
    }

    pub fn gamma0_default(&self) -> Self {
        self.params.gamma0_subst().apply(self)
    }

    /// `π = (1+π_m)^{p^m} − 1`.
    pub fn pi_element(params: &Arc<RingParams>) -> Self {
        let pm = params.p_m();
        let coeffs = (0..=pm)
            .map(|k| {
                if k == 0 {
                    params.int(0)
                } else {
                    params.ubig(&binomial(pm, k))
                }
            })
            .collect();
        Self::from_coeffs(params, coeffs)
    }

    /// `q = φ(π)/π = Σ_{k=1}^{p} C(p,k) π^{k-1}`.
    pub fn q_element(params: &Arc<RingParams>) -> Self {
        let pi = Self::pi_element(params);
        let mut result = Self::zero(params);
        let mut pik = Self::one(params);
        for k in 1..=params.p {
            result = result.add(&pik.scale(&params.ubig(&binomial(params.p, k))));
            pik = pik.mul(&pi);
        }
        result
    }

    /// `(1+π)^k` for an integer `k` of either sign.
    pub fn one_plus_pi_pow(params: &Arc<RingParams>, k: &BigInt) -> Self {
        let pi = Self::pi_element(params);
        let mut result = Self::zero(params);
        let mut pij = Self::one(params);
        for j in 0..params.series_deg as u64 {
            let b = crate::padic::binomial_int(k, j);
            if !b.is_zero() {
                result = result.add(&pij.scale(&params.big(&b)));
            }
            pij = pij.mul(&pi);
            if pij.is_zero() {
                break;
            }
        }
        result
    }

    /// Exact quotient `self / b` to the precision the truncation supports.
    pub fn divide_exact(&self, b: &Self) -> Result<Self> {
        let params = &self.params;
        let len = self.coeffs.len();
        let p = params.p;
        let v = b
            .order()
            .ok_or_else(|| WachError::NotDivisible("division by zero".into()))?;
        for k in 0..v {
            if !self.coeffs[k].is_zero() {
                return Err(WachError::NotDivisible(format!(
                    "coefficient of u^{k} is not zero"
                )));
            }
        }
        let l = len - v;
        let mut a: Vec<PadicScalar> = self.coeffs[v..].to_vec();
        let mut bb: Vec<PadicScalar> = b.coeffs[v..].to_vec();
        let w = bb
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.val())
            .min()
            .unwrap_or(0);
        if w > 0 {
            for c in bb.iter_mut() {
                *c = c.div_p_pow(w)?;
            }
            for (k, c) in a.iter_mut().enumerate() {
                *c = c.div_p_pow(w).map_err(|_| {
                    WachError::NotDivisible(format!("content p^{w} does not divide u^{}", k + v))
                })?;
            }
        }
        let d = bb.iter().position(|c| c.is_unit()).unwrap_or(usize::MAX);
        let degree = bb.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
        let mut q: Vec<PadicScalar> = vec![PadicScalar::zero(p, 0); len];
        if d == 0 {
            let inv = bb[0].invert()?;
            for k in 0..l {
                let mut s = a[k].clone();
                for j in 0..k {
                    s = s.sub_ref(&q[j].mul_ref(&bb[k - j]));
                }
                q[k] = s.mul_ref(&inv);
            }
        } else if d != usize::MAX && d == degree {
            let inv = bb[d].invert()?;
            if l > d {
                for k in (d..l).rev() {
                    let qk = a[k].mul_ref(&inv);
                    for i in 0..=d {
                        let t = qk.mul_ref(&bb[i]);
                        a[k - d + i] = a[k - d + i].sub_ref(&t);
                    }
                    q[k - d] = qk;
                }
            }
            let rem_cap = (l.saturating_sub(d) + 1).div_ceil(d) as u32;
            for (i, r) in a.iter().take(d.min(l)).enumerate() {
                if !r.with_prec(rem_cap).is_zero() {
                    return Err(WachError::NotDivisible(format!(
                        "nonzero remainder at u^{i}"
                    )));
                }
            }
            for (j, c) in q.iter_mut().enumerate().take(l.saturating_sub(d)) {
                let cap_j = (l - d - j).div_ceil(d) as u32;
                *c = c.with_prec(cap_j);
            }
        } else {
            for k in 0..l {
                let mut s = a[k].clone();
                for j in 0..k {
                    s = s.sub_ref(&q[j].mul_ref(&bb[k - j]));
                }
                q[k] = s.div_exact(&bb[0])?;
            }
        }
        Ok(Self::from_coeffs(params, q))
    }

    pub fn to_text(&self) -> String {
        let n = self.params.prec;
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && c.prec() >= n {
                continue;
            }
            if c.prec() >= n {
                parts.push(format!("{}*u^{}", c.residue(), k));
            } else {
                parts.push(format!("{}@{}*u^{}", c.residue(), c.prec(), k));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    pub fn parse(params: &Arc<RingParams>, text: &str) -> Result<Self> {
        let text = text.trim();
        let mut coeffs = vec![PadicScalar::zero(params.p, params.prec); params.series_deg];
        if text == "0" || text.is_empty() {
            return Ok(Self::from_coeffs(params, coeffs));
        }
        for term in text.split(" + ") {
            let (c, k) = parse_term(term)?;
            let (value, prec) = match c.split_once('@') {
                Some((v, pr)) => (
                    v,
                    pr.parse::<u32>()
                        .map_err(|_| WachError::Parse(format!("bad precision in {term}")))?,
                ),
                None => (c, params.prec),
            };
            let value: BigInt = value
                .parse()
                .map_err(|_| WachError::Parse(format!("bad coefficient in {term}")))?;
            if k >= params.series_deg {
                return Err(WachError::Parse(format!("degree {k} beyond truncation")));
            }
            let s = PadicScalar::new(params.p, &value, prec.min(params.prec));
            coeffs[k] = coeffs[k].add_ref(&s);
            if prec < params.prec {
                coeffs[k] = coeffs[k].with_prec(prec);
            }
        }
        Ok(Self::from_coeffs(params, coeffs))
    }
}

fn parse_term(term: &str) -> Result<(&str, usize)> {
    let term = term.trim();
    let (c, k) = term
        .split_once("*u^")
        .ok_or_else(|| WachError::Parse(format!("expected c*u^k, got {term}")))?;
    let k = k
        .parse::<usize>()
        .map_err(|_| WachError::Parse(format!("bad exponent in {term}")))?;
    Ok((c, k))
}

impl fmt::Display for CycloSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl PartialEq for CycloSeries {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

pub fn check_character(params: &RingParams, c: &PadicScalar) -> Result<()> {
    let one = PadicScalar::one(params.p, c.prec());
    let cm1 = c.sub_ref(&one);
    if cm1.val() < params.m {
        return Err(WachError::BadCharacterValue { m: params.m });
    }
    Ok(())
}

/// `(1+π_m)^c − 1 = Σ_{k≥1} C(c,k) π_m^k`.
pub fn gamma0_image(params: &Arc<RingParams>, c: &PadicScalar) -> CycloSeries {
    let coeffs = (0..params.series_deg as u64)
        .map(|k| {
            if k == 0 {
                PadicScalar::zero(params.p, params.exact_prec())
            } else {
                binomial_padic(c, k)
            }
        })
        .collect();
    CycloSeries::from_coeffs(params, coeffs)
}

/// Cached powers of a substitution series without constant term.
#[derive(Debug)]
pub struct SeriesSubst {
    powers: Vec<CycloSeries>,
}

impl SeriesSubst {
    pub fn new(g: &CycloSeries) -> Self {
        let len = g.len();
        let mut powers = Vec::with_capacity(len);
        let mut cur = CycloSeries::one(g.params());
        for _ in 0..len {
            let next = cur.mul(g);
            powers.push(cur);
            cur = next;
        }
        SeriesSubst { powers }
    }

    pub fn apply(&self, f: &CycloSeries) -> CycloSeries {
        let params = f.params();
        let len = f.len();
        let p = params.p;
        let mut acc: Vec<BigUint> = vec![BigUint::zero(); len];
        let mut precs: Vec<u32> = vec![params.prec; len];
        for (k, fk) in f.coeffs().iter().enumerate() {
            let gk = &self.powers[k];
            for (j, c) in gk.coeffs().iter().enumerate() {
                let pr = (fk.prec() + c.val()).min(c.prec() + fk.val());
                if pr < precs[j] {
                    precs[j] = pr;
                }
                if !fk.residue().is_zero() && !c.residue().is_zero() {
                    acc[j] += fk.residue() * c.residue();
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .zip(precs)
            .map(|(s, pr)| PadicScalar::from_biguint(p, &s, pr))
            .collect();
        CycloSeries::from_coeffs(params, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u64, m: u32) -> Arc<RingParams> {
        RingParams::new(p, m, 8, 24, 24, &Chi0Policy::Default).unwrap()
    }

    fn ints(s: &CycloSeries) -> Vec<i64> {
        let mut v: Vec<i64> = s
            .coeffs()
            .iter()
            .map(|c| {
                let l = c.lift_centered();
                i64::try_from(l).unwrap()
            })
            .collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    #[test]
    fn pi_element_examples() {
        assert_eq!(ints(&CycloSeries::pi_element(&params(2, 1))), vec![0, 2, 1]);
        assert_eq!(ints(&CycloSeries::pi_element(&params(3, 1))), vec![0, 3, 3, 1]);
        let pi = CycloSeries::pi_element(&params(3, 2));
        assert!(pi.coeff(0).is_zero());
        assert_eq!(pi.coeff(1).to_u64(), Some(9));
    }

    #[test]
    fn frobenius_examples() {
        let pr = params(2, 1);
        let u = CycloSeries::pi_m(&pr);
        assert_eq!(ints(&u.frobenius()), vec![0, 2, 1]);
        let one = CycloSeries::one(&pr);
        assert_eq!(one.frobenius(), one);
        for (p, m) in [(2, 1), (3, 1), (2, 2)] {
            let pr = params(p, m);
            let pi = CycloSeries::pi_element(&pr);
            let lhs = pi.frobenius();
            let rhs = CycloSeries::one(&pr).add(&pi).pow(p).sub(&CycloSeries::one(&pr));
            assert!(lhs.eq_to_prec(&rhs));
        }
    }

    #[test]
    fn gamma0_examples() {
        let pr = RingParams::new(2, 1, 8, 24, 24, &Chi0Policy::Value(3.into())).unwrap();
        let u = CycloSeries::pi_m(&pr);
        let c3 = pr.int(3);
        assert_eq!(ints(&u.gamma0(&c3).unwrap()), vec![0, 3, 3, 1]);
        let c1 = pr.int(1);
        assert_eq!(u.gamma0(&c1).unwrap(), u);
        let pi = CycloSeries::pi_element(&pr);
        let one = CycloSeries::one(&pr);
        let rhs = one.add(&pi).pow(3).sub(&one);
        assert!(pi.gamma0(&c3).unwrap().eq_to_prec(&rhs));
        assert!(matches!(
            u.gamma0(&pr.int(2)),
            Err(WachError::BadCharacterValue { .. })
        ));
    }

    #[test]
    fn q_examples() {
        for (p, m) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let pr = params(p, m);
            let q = CycloSeries::q_element(&pr);
            assert_eq!(q.coeff(0).to_u64(), Some(p));
            let pi = CycloSeries::pi_element(&pr);
            assert!(q.mul(&pi).eq_to_prec(&pi.frobenius()));
        }
    }

    #[test]
    fn divide_examples() {
        let pr = params(3, 1);
        let pi = CycloSeries::pi_element(&pr);
        let one = CycloSeries::one(&pr);
        let q = pi.divide_exact(&pi).unwrap();
        assert!(q.coeff(0).eq_to_prec(&pr.int(1)));
        assert!(q.coeffs()[1..4].iter().all(|c| c.is_zero()));
        let pi2 = pi.mul(&pi);
        let r = pi2.divide_exact(&pi).unwrap();
        for k in 0..6 {
            assert!(r.coeff(k).eq_to_prec(pi.coeff(k)));
        }
        assert!(matches!(
            one.divide_exact(&pi),
            Err(WachError::NotDivisible(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let pr = params(3, 1);
        let s = CycloSeries::q_element(&pr).with_prec(5);
        let t = s.to_text();
        assert_eq!(CycloSeries::parse(&pr, &t).unwrap(), s);
        let z = CycloSeries::zero(&pr);
        assert_eq!(CycloSeries::parse(&pr, &z.to_text()).unwrap(), z);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn series(pr: &Arc<RingParams>, v: &[i64]) -> CycloSeries {
            CycloSeries::from_ints(pr, v)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn frobenius_commutes_with_gamma0(v in prop::collection::vec(-50i64..50, 1..10)) {
                let pr = RingParams::new(3, 1, 6, 20, 20, &Chi0Policy::Default).unwrap();
                let x = series(&pr, &v);
                let c = pr.chi0.clone();
                let lhs = x.gamma0(&c).unwrap().frobenius();
                let rhs = x.frobenius().gamma0(&c).unwrap();
                prop_assert!(lhs.eq_to_prec(&rhs));
            }

            #[test]
            fn gamma0_composes(v in prop::collection::vec(-50i64..50, 1..10), a in 0i64..20, b in 0i64..20) {
                let pr = RingParams::new(2, 2, 6, 20, 20, &Chi0Policy::Default).unwrap();
                let x = series(&pr, &v);
                let c1 = pr.int(1 + 4 * a);
                let c2 = pr.int(1 + 4 * b);
                let lhs = x.gamma0(&c2).unwrap().gamma0(&c1).unwrap();
                let rhs = x.gamma0(&c1.mul_ref(&c2)).unwrap();
                prop_assert!(lhs.eq_to_prec(&rhs));
            }

            #[test]
            fn divide_inverts_multiply(v in prop::collection::vec(-50i64..50, 1..6)) {
                let pr = RingParams::new(3, 1, 6, 30, 30, &Chi0Policy::Default).unwrap();
                let a = series(&pr, &v);
                let pi = CycloSeries::pi_element(&pr);
                let q = a.mul(&pi).divide_exact(&pi).unwrap();
                prop_assert!(q.eq_to_prec(&a));
                let qq = CycloSeries::q_element(&pr);
                let r = a.mul(&qq).divide_exact(&qq).unwrap();
                prop_assert!(r.eq_to_prec(&a));
            }

            #[test]
            fn text_round_trips(v in prop::collection::vec(-500i64..500, 0..12)) {
                let pr = RingParams::new(5, 1, 4, 16, 16, &Chi0Policy::Default).unwrap();
                let a = series(&pr, &v);
                prop_assert_eq!(CycloSeries::parse(&pr, &a.to_text()).unwrap(), a);
            }
        }
    }
}
