use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use super::{RelParams, MAX_VARS};
use crate::cyclo::CycloSeries;
use crate::error::{Result, WachError};
use crate::padic::PadicScalar;

/// Laurent monomial `a^α b^β` in the torus symbols.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub a: [i8; MAX_VARS],
    pub b: [i8; MAX_VARS],
}

impl Mono {
    pub const ONE: Mono = Mono {
        a: [0; MAX_VARS],
        b: [0; MAX_VARS],
    };

    pub fn b_var(i: usize, e: i8) -> Mono {
        let mut m = Mono::ONE;
        m.b[i] = e;
        m
    }

    pub fn a_var(i: usize, e: i8) -> Mono {
        let mut m = Mono::ONE;
        m.a[i] = e;
        m
    }

    pub fn mul(&self, other: &Mono, rp: &RelParams) -> Result<Mono> {
        let mut out = Mono::ONE;
        for i in 0..MAX_VARS {
            out.a[i] = rp.check_exp(self.a[i] as i64 + other.a[i] as i64)?;
            out.b[i] = rp.check_exp(self.b[i] as i64 + other.b[i] as i64)?;
        }
        Ok(out)
    }

    pub fn inv(&self) -> Mono {
        let mut out = Mono::ONE;
        for i in 0..MAX_VARS {
            out.a[i] = -self.a[i];
            out.b[i] = -self.b[i];
        }
        out
    }

    pub fn pow(&self, e: i64, rp: &RelParams) -> Result<Mono> {
        let mut out = Mono::ONE;
        for i in 0..MAX_VARS {
            out.a[i] = rp.check_exp(self.a[i] as i64 * e)?;
            out.b[i] = rp.check_exp(self.b[i] as i64 * e)?;
        }
        Ok(out)
    }

    fn text(&self) -> String {
        let mut s = String::new();
        for (sym, exps) in [("a", &self.a), ("b", &self.b)] {
            for (i, &e) in exps.iter().enumerate() {
                if e != 0 {
                    s.push_str(&format!("*{sym}{}^{e}", i + 1));
                }
            }
        }
        s
    }
}

/// Element of the truncated base ring: Laurent polynomial in `a_i`, `b_i` over series in `u`.
#[derive(Clone, Debug)]
pub struct RelBase {
    rp: Arc<RelParams>,
    terms: BTreeMap<Mono, CycloSeries>,
}

impl PartialEq for RelBase {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl RelBase {
    pub fn zero(rp: &Arc<RelParams>) -> Self {
        RelBase {
            rp: rp.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rp: &Arc<RelParams>) -> Self {
        Self::from_series(rp, CycloSeries::one(&rp.ring))
    }

    pub fn int(rp: &Arc<RelParams>, v: i64) -> Self {
        Self::from_series(rp, CycloSeries::constant(&rp.ring, rp.ring.int(v)))
    }

    pub fn from_series(rp: &Arc<RelParams>, s: CycloSeries) -> Self {
        Self::term(rp, Mono::ONE, s)
    }

    pub fn term(rp: &Arc<RelParams>, m: Mono, s: CycloSeries) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, s);
        RelBase {
            rp: rp.clone(),
            terms,
        }
    }

    /// `b_i^e` for a torus variable index `i` counted from 0.
    pub fn b_var(rp: &Arc<RelParams>, i: usize, e: i8) -> Result<Self> {
        rp.check_exp(e as i64)?;
        Ok(Self::term(rp, Mono::b_var(i, e), CycloSeries::one(&rp.ring)))
    }

    pub fn a_var(rp: &Arc<RelParams>, i: usize, e: i8) -> Result<Self> {
        rp.check_exp(e as i64)?;
        Ok(Self::term(rp, Mono::a_var(i, e), CycloSeries::one(&rp.ring)))
    }

    pub fn rp(&self) -> &Arc<RelParams> {
        &self.rp
    }

    pub fn terms(&self) -> &BTreeMap<Mono, CycloSeries> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|s| s.is_zero())
    }

    /// The series coefficient of the trivial monomial, if that is the only one present.
    pub fn as_series(&self) -> Option<CycloSeries> {
        let mut nz = self.terms.iter().filter(|(_, s)| !s.is_zero());
        match nz.next() {
            None => Some(CycloSeries::zero(&self.rp.ring)),
            Some((m, s)) if *m == Mono::ONE && nz.next().is_none() => Some(s.clone()),
            _ => None,
        }
    }

    pub fn min_prec(&self) -> u32 {
        self.terms
            .values()
            .map(|s| s.min_prec())
            .min()
            .unwrap_or(self.rp.ring.prec)
    }

    fn normalize(mut self) -> Self {
        let n = self.rp.ring.prec;
        self.terms.retain(|_, s| !(s.is_zero() && s.min_prec() >= n));
        self
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (m, s) in &other.terms {
            let v = match terms.get(m) {
                Some(t) => t.add(s),
                None => s.clone(),
            };
            terms.insert(*m, v);
        }
        RelBase {
            rp: self.rp.clone(),
            terms,
        }
        .normalize()
    }

    pub fn neg(&self) -> Self {
        RelBase {
            rp: self.rp.clone(),
            terms: self.terms.iter().map(|(m, s)| (*m, s.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        RelBase {
            rp: self.rp.clone(),
            terms: self.terms.iter().map(|(m, s)| (*m, s.scale(c))).collect(),
        }
        .normalize()
    }

    pub fn mul_series(&self, c: &CycloSeries) -> Self {
        RelBase {
            rp: self.rp.clone(),
            terms: self.terms.iter().map(|(m, s)| (*m, s.mul(c))).collect(),
        }
        .normalize()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut terms: BTreeMap<Mono, CycloSeries> = BTreeMap::new();
        for (m1, s1) in &self.terms {
            for (m2, s2) in &other.terms {
                let m = m1.mul(m2, &self.rp)?;
                let prod = s1.mul(s2);
                let v = match terms.get(&m) {
                    Some(t) => t.add(&prod),
                    None => prod,
                };
                terms.insert(m, v);
            }
        }
        Ok(RelBase {
            rp: self.rp.clone(),
            terms,
        }
        .normalize())
    }

    pub fn pow(&self, e: u64) -> Result<Self> {
        let mut acc = Self::one(&self.rp);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `γ_0` with character value `c`: acts on the series coefficients only.
    pub fn gamma0(&self, c: &PadicScalar) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (m, s) in &self.terms {
            terms.insert(*m, s.gamma0(c)?);
        }
        Ok(RelBase {
            rp: self.rp.clone(),
            terms,
        })
    }

    /// `γ_i^k` for `i ≥ 1`: `b_i ↦ (1+π)^k b_i`.
    pub fn gamma_geom(&self, i: usize, k: &BigInt) -> Self {
        let mut cache: BTreeMap<i8, CycloSeries> = BTreeMap::new();
        let mut terms = BTreeMap::new();
        for (m, s) in &self.terms {
            let e = m.b[i - 1];
            let f = cache.entry(e).or_insert_with(|| {
                CycloSeries::one_plus_pi_pow(&self.rp.ring, &(k * BigInt::from(e)))
            });
            terms.insert(*m, s.mul(f));
        }
        RelBase {
            rp: self.rp.clone(),
            terms,
        }
        .normalize()
    }

    /// Generator `s`: `0` for the arithmetic generator with the configured character value.
    pub fn gamma(&self, s: usize) -> Result<Self> {
        if s == 0 {
            self.gamma0(&self.rp.ring.chi0)
        } else {
            Ok(self.gamma_geom(s, &BigInt::from(1)))
        }
    }

    /// Frobenius: `u ↦ (1+u)^p − 1`, `a ↦ a^p`, `b ↦ b^p`.
    pub fn frobenius(&self) -> Result<Self> {
        let p = self.rp.ring.p as i64;
        let mut terms = BTreeMap::new();
        for (m, s) in &self.terms {
            terms.insert(m.pow(p, &self.rp)?, s.frobenius());
        }
        Ok(RelBase {
            rp: self.rp.clone(),
            terms,
        })
    }

    /// Exact division by a monomial multiple of a series.
    pub fn divide_exact(&self, b: &Self) -> Result<Self> {
        let mut nz = b.terms.iter().filter(|(_, s)| !s.is_zero());
        let (mb, sb) = nz
            .next()
            .ok_or_else(|| WachError::NotDivisible("division by zero".into()))?;
        if nz.next().is_some() {
            return Err(WachError::NotDivisible(
                "divisor is not a monomial multiple of a series".into(),
            ));
        }
        let inv = mb.inv();
        let mut terms = BTreeMap::new();
        for (m, s) in &self.terms {
            terms.insert(m.mul(&inv, &self.rp)?, s.divide_exact(sb)?);
        }
        Ok(RelBase {
            rp: self.rp.clone(),
            terms,
        }
        .normalize())
    }

    pub fn divide_series(&self, b: &CycloSeries) -> Result<Self> {
        self.divide_exact(&Self::from_series(&self.rp, b.clone()))
    }

    pub fn to_text(&self) -> String {
        let n = self.rp.ring.prec;
        let mut parts = Vec::new();
        for (m, s) in &self.terms {
            let mono = m.text();
            for (k, c) in s.coeffs().iter().enumerate() {
                if c.is_zero() && c.prec() >= n {
                    continue;
                }
                if c.prec() >= n {
                    parts.push(format!("{}*u^{}{}", c.residue(), k, mono));
                } else {
                    parts.push(format!("{}@{}*u^{}{}", c.residue(), c.prec(), k, mono));
                }
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn parse(rp: &Arc<RelParams>, text: &str) -> Result<Self> {
        let text = text.trim();
        let mut acc = Self::zero(rp);
        if text.is_empty() || text == "0" {
            return Ok(acc);
        }
        for term in text.split(" + ") {
            let mut factors = term.trim().split('*');
            let c = factors
                .next()
                .ok_or_else(|| WachError::Parse(format!("empty term in {text}")))?;
            let (value, prec) = match c.split_once('@') {
                Some((v, pr)) => (
                    v,
                    pr.parse::<u32>()
                        .map_err(|_| WachError::Parse(format!("bad precision in {term}")))?,
                ),
                None => (c, rp.ring.prec),
            };
            let value: BigInt = value
                .parse()
                .map_err(|_| WachError::Parse(format!("bad coefficient in {term}")))?;
            let mut deg = 0usize;
            let mut mono = Mono::ONE;
            for f in factors {
                let (sym, e) = f
                    .split_once('^')
                    .ok_or_else(|| WachError::Parse(format!("bad factor {f}")))?;
                let e: i64 = e
                    .parse()
                    .map_err(|_| WachError::Parse(format!("bad exponent in {f}")))?;
                if sym == "u" {
                    if e < 0 || e as usize >= rp.ring.series_deg {
                        return Err(WachError::Parse(format!("u-degree {e} out of range")));
                    }
                    deg = e as usize;
                    continue;
                }
                let (kind, idx) = sym.split_at(1);
                let idx: usize = idx
                    .parse()
                    .map_err(|_| WachError::Parse(format!("bad variable {sym}")))?;
                if idx == 0 || idx > rp.d {
                    return Err(WachError::Parse(format!("variable {sym} outside 1..={}", rp.d)));
                }
                let e = rp.check_exp(e)?;
                match kind {
                    "a" => mono.a[idx - 1] = e,
                    "b" => mono.b[idx - 1] = e,
                    _ => return Err(WachError::Parse(format!("unknown symbol {sym}"))),
                }
            }
            let coeff = PadicScalar::new(rp.ring.p, &value, prec.min(rp.ring.prec));
            let s = CycloSeries::monomial(&rp.ring, deg, coeff);
            acc = acc.add(&Self::term(rp, mono, s));
        }
        Ok(acc)
    }
}

impl fmt::Display for RelBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::{Chi0Policy, RingParams};

    fn rp(p: u64, m: u32, d: usize) -> Arc<RelParams> {
        let ring = RingParams::new(p, m, 6, 32, 32, &Chi0Policy::Default).unwrap();
        RelParams::new(&ring, d, 8, 6).unwrap()
    }

    #[test]
    fn gamma_on_torus_symbols() {
        let r = rp(3, 1, 2);
        let b1 = RelBase::b_var(&r, 0, 1).unwrap();
        let b2 = RelBase::b_var(&r, 1, 1).unwrap();
        let pi = CycloSeries::pi_element(&r.ring);
        let one_pi = CycloSeries::one(&r.ring).add(&pi);
        assert!(b1.gamma(1).unwrap().eq_to_prec(&b1.mul_series(&one_pi)));
        assert!(b2.gamma(1).unwrap().eq_to_prec(&b2));
        assert!(b1.gamma(0).unwrap().eq_to_prec(&b1));
        let binv = RelBase::b_var(&r, 0, -1).unwrap();
        let prod = b1.gamma(1).unwrap().mul(&binv.gamma(1).unwrap()).unwrap();
        assert!(prod.eq_to_prec(&RelBase::one(&r)));
    }

    #[test]
    fn box_overflow() {
        let r = rp(3, 1, 1);
        let b = RelBase::b_var(&r, 0, 3).unwrap();
        assert!(matches!(b.frobenius(), Err(WachError::BoxOverflow { .. })));
        assert!(matches!(
            b.pow(3),
            Err(WachError::BoxOverflow { exp: 9, bound: 8 })
        ));
    }

    #[test]
    fn text_round_trip() {
        let r = rp(3, 1, 2);
        let t = "1*u^0 + 3*u^1*b1^1 + 1*u^2*a1^-1";
        let x = RelBase::parse(&r, t).unwrap();
        assert_eq!(RelBase::parse(&r, &x.to_text()).unwrap(), x);
        let y = x.mul(&RelBase::b_var(&r, 1, -2).unwrap()).unwrap().scale(&PadicScalar::from_i64(3, 5, 4));
        assert_eq!(RelBase::parse(&r, &y.to_text()).unwrap(), y);
    }

    #[test]
    fn divide_by_pi() {
        let r = rp(3, 1, 1);
        let pi = CycloSeries::pi_element(&r.ring);
        let x = RelBase::parse(&r, "2*u^0*b1^1 + 1*u^3*a1^-1").unwrap();
        let y = x.mul_series(&pi).divide_series(&pi).unwrap();
        assert!(y.eq_to_prec(&x));
        assert!(matches!(x.divide_series(&pi), Err(WachError::NotDivisible(_))));
    }
}
