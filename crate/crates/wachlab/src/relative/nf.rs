use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::{RelBase, RelParams, MAX_VARS};
use crate::error::{Result, WachError};
use crate::padic::{binomial, factorial, p_pow, val_factorial, PadicScalar};
use crate::pd::eisenstein;

/// Which PD envelope an element lives in.
///
/// `SHat(n)`: monomials `(π/p^n)^{[k_0]} Π (V_i − 1)^{[k_i]}`.
/// `OaPd`: monomials `ξ^{[k_0]} Π z_i^{[k_i]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    SHat(u32),
    OaPd,
}

/// Normal-form monomial `u^r a^α X^{[k]}` with `r` below the `u`-relation degree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub k: [u8; 4],
    pub r: u8,
    pub alpha: [i8; MAX_VARS],
}

impl Key {
    pub const ONE: Key = Key {
        k: [0; 4],
        r: 0,
        alpha: [0; MAX_VARS],
    };

    pub fn var(v: usize, e: u8) -> Key {
        let mut key = Key::ONE;
        key.k[v] = e;
        key
    }

    pub fn deg(&self) -> usize {
        self.k.iter().map(|&x| x as usize).sum()
    }

    /// Degree in the torus variables only.
    pub fn geom_deg(&self) -> usize {
        self.k[1..].iter().map(|&x| x as usize).sum()
    }
}

fn binom_table() -> &'static Vec<Vec<BigUint>> {
    static TABLE: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 200;
        let mut t = vec![vec![BigUint::one()]];
        for i in 1..=n {
            let prev: &Vec<BigUint> = &t[i - 1];
            let mut row = vec![BigUint::one(); i + 1];
            for j in 1..i {
                row[j] = &prev[j - 1] + &prev[j];
            }
            t.push(row);
        }
        t
    })
}

pub(crate) fn binom(n: usize, k: usize) -> &'static BigUint {
    &binom_table()[n][k]
}

/// `x(x−1)…(x−l+1)` for an integer `x`.
pub(crate) fn falling_int(x: &BigInt, l: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..l {
        acc *= x - BigInt::from(i);
    }
    acc
}

/// `x(x−1)…(x−l+1)` for a p-adic `x`.
pub(crate) fn falling_padic(x: &PadicScalar, l: u64) -> PadicScalar {
    let mut acc = PadicScalar::one(x.p(), x.prec());
    for i in 0..l {
        acc = acc.mul_ref(&x.sub_ref(&PadicScalar::from_i64(x.p(), i as i64, x.prec())));
    }
    acc
}

pub(crate) type Raw = (u32, BTreeMap<Key, PadicScalar>);

/// Truncated PD element in normal form, with per-coefficient precision.
///
/// Keys of total degree `d` absent from `terms` are zero modulo `p^{prec[d]}`.
#[derive(Clone, Debug)]
pub struct RelPD {
    rp: Arc<RelParams>,
    flavor: Flavor,
    prec: Vec<u32>,
    terms: BTreeMap<Key, PadicScalar>,
}

impl PartialEq for RelPD {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor && self.prec == other.prec && self.terms == other.terms
    }
}

impl RelPD {
    pub fn index_bound_for(rp: &RelParams, flavor: Flavor) -> usize {
        let i = rp.pd_index;
        match flavor {
            Flavor::SHat(_) => i,
            Flavor::OaPd => i + (i - 1) / (rp.ring.p as usize - 1),
        }
    }

    pub fn u_degree_for(rp: &RelParams, flavor: Flavor) -> usize {
        match flavor {
            Flavor::SHat(_) => rp.ring.p_m() as usize,
            Flavor::OaPd => rp.ring.e as usize,
        }
    }

    pub fn index_bound(&self) -> usize {
        Self::index_bound_for(&self.rp, self.flavor)
    }

    pub fn u_degree(&self) -> usize {
        Self::u_degree_for(&self.rp, self.flavor)
    }

    pub fn zero(rp: &Arc<RelParams>, flavor: Flavor) -> Self {
        RelPD {
            rp: rp.clone(),
            flavor,
            prec: vec![rp.ring.prec; Self::index_bound_for(rp, flavor)],
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(rp: &Arc<RelParams>, flavor: Flavor, c: PadicScalar) -> Self {
        Self::from_terms(rp, flavor, rp.ring.prec, [(Key::ONE, c)])
    }

    pub fn one(rp: &Arc<RelParams>, flavor: Flavor) -> Self {
        Self::scalar(rp, flavor, rp.ring.int(1))
    }

    pub fn int(rp: &Arc<RelParams>, flavor: Flavor, v: i64) -> Self {
        Self::scalar(rp, flavor, rp.ring.int(v))
    }

    /// Monomial `c·u^r a^α X^{[k]}`; `u^r` is reduced when `r` reaches the relation degree.
    pub fn monomial(rp: &Arc<RelParams>, flavor: Flavor, key: Key, c: PadicScalar) -> Result<Self> {
        let d = Self::u_degree_for(rp, flavor);
        if (key.r as usize) < d {
            return Ok(Self::from_terms(rp, flavor, rp.ring.prec, [(key, c)]));
        }
        let mut base = key;
        base.r = 0;
        let m = Self::from_terms(rp, flavor, rp.ring.prec, [(base, c)]);
        m.mul(&Self::u_power(rp, flavor, key.r as usize))
    }

    pub fn from_terms(
        rp: &Arc<RelParams>,
        flavor: Flavor,
        prec: u32,
        terms: impl IntoIterator<Item = (Key, PadicScalar)>,
    ) -> Self {
        let prec = prec.min(rp.ring.prec);
        let bound = Self::index_bound_for(rp, flavor);
        let mut out = RelPD {
            rp: rp.clone(),
            flavor,
            prec: vec![prec; bound],
            terms: BTreeMap::new(),
        };
        for (k, c) in terms {
            if k.deg() < bound {
                out.accumulate(k, c);
            }
        }
        out.normalize();
        out
    }

    fn accumulate(&mut self, k: Key, c: PadicScalar) {
        let c = c.with_prec(self.prec[k.deg()]);
        match self.terms.get_mut(&k) {
            Some(v) => *v = v.add_ref(&c),
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    fn normalize(&mut self) {
        let prec = &self.prec;
        self.terms.retain(|k, c| !(c.is_zero() && c.prec() >= prec[k.deg()]));
    }

    pub fn rp(&self) -> &Arc<RelParams> {
        &self.rp
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Smallest absent-key precision over all degrees.
    pub fn prec(&self) -> u32 {
        self.prec.iter().copied().min().unwrap_or(0)
    }

    pub fn prec_profile(&self) -> &[u32] {
        &self.prec
    }

    /// Caps the absent-key precision degree by degree.
    pub fn with_prec_profile(&self, profile: &[u32]) -> Self {
        let mut out = self.clone();
        for (a, b) in out.prec.iter_mut().zip(profile) {
            *a = (*a).min(*b);
        }
        let prec = out.prec.clone();
        for (k, c) in out.terms.iter_mut() {
            *c = c.with_prec(prec[k.deg()]);
        }
        out.normalize();
        out
    }

    pub fn terms(&self) -> &BTreeMap<Key, PadicScalar> {
        &self.terms
    }

    pub fn coeff(&self, k: &Key) -> PadicScalar {
        self.terms
            .get(k)
            .cloned()
            .unwrap_or_else(|| PadicScalar::zero(self.rp.ring.p, self.prec[k.deg()]))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    /// Smallest precision of any coefficient, absent ones included.
    pub fn min_prec(&self) -> u32 {
        self.terms.values().map(|c| c.prec()).fold(self.prec(), u32::min)
    }

    pub fn vmin(&self) -> u32 {
        self.terms.values().map(|c| c.val()).fold(self.prec(), u32::min)
    }

    /// Per degree: smallest valuation among terms and the absent-key precision.
    fn vmin_profile(&self) -> Vec<u32> {
        let mut v = self.prec.clone();
        for (k, c) in &self.terms {
            let d = k.deg();
            v[d] = v[d].min(c.val());
        }
        v
    }

    /// Smallest total index of a nonzero term.
    pub fn degree(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, _)| k.deg())
            .min()
    }

    pub fn with_prec(&self, k: u32) -> Self {
        let mut out = self.clone();
        for p in out.prec.iter_mut() {
            *p = (*p).min(k);
        }
        for c in out.terms.values_mut() {
            *c = c.with_prec(k);
        }
        out.normalize();
        out
    }

    pub fn filter(&self, f: impl Fn(&Key) -> bool) -> Self {
        RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: self.prec.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| f(k))
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    /// Re-indexes terms; the absent-key precision becomes uniform.
    pub fn map_keys(&self, f: impl Fn(&Key) -> Option<Key>) -> Self {
        let mut out = RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: vec![self.prec(); self.prec.len()],
            terms: BTreeMap::new(),
        };
        for (k, c) in &self.terms {
            if let Some(k2) = f(k) {
                out.accumulate(k2, c.clone());
            }
        }
        out.normalize();
        out
    }

    /// Coefficient of `X^{[k]}` as a degree-0 element.
    pub fn coeff_at(&self, k: [u8; 4]) -> RelPD {
        let d: usize = k.iter().map(|&x| x as usize).sum();
        let prec = self.prec[d];
        let mut out = RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: vec![prec; self.prec.len()],
            terms: BTreeMap::new(),
        };
        for (key, c) in &self.terms {
            if key.k == k {
                out.accumulate(Key { k: [0; 4], ..*key }, c.clone());
            }
        }
        out.normalize();
        out
    }

    /// `X^{[k]}·self` for a degree-0 element.
    pub fn place_at(&self, k: [u8; 4]) -> RelPD {
        debug_assert!(self.terms.keys().all(|key| key.deg() == 0));
        let d: usize = k.iter().map(|&x| x as usize).sum();
        let cap = self.rp.ring.prec;
        let p0 = self.prec();
        let mut out = RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: (0..self.prec.len()).map(|e| if e < d { cap } else { p0 }).collect(),
            terms: BTreeMap::new(),
        };
        if d < self.prec.len() {
            for (key, c) in &self.terms {
                out.accumulate(Key { k, ..*key }, c.clone());
            }
        }
        out.normalize();
        out
    }

    /// Declares every degree other than `d` exact; only for elements supported in degree `d`.
    pub fn exact_outside(&self, d: usize) -> RelPD {
        let cap = self.rp.ring.prec;
        let mut out = self.clone();
        for (e, p) in out.prec.iter_mut().enumerate() {
            if e != d {
                *p = cap;
            }
        }
        out
    }

    /// Terms of total degree `d`; other degrees are exact zeros.
    pub fn degree_part(&self, d: usize) -> RelPD {
        let cap = self.rp.ring.prec;
        RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: (0..self.prec.len()).map(|e| if e == d { self.prec[e] } else { cap }).collect(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.deg() == d)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.flavor == other.flavor && self.sub(other).is_zero()
    }

    fn check_flavor(&self, other: &Self) {
        assert_eq!(self.flavor, other.flavor, "mixing PD flavors");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_flavor(other);
        let mut out = RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: self.prec.iter().zip(&other.prec).map(|(a, b)| *a.min(b)).collect(),
            terms: BTreeMap::new(),
        };
        for (k, c) in &self.terms {
            out.accumulate(*k, c.clone());
        }
        for (k, c) in &other.terms {
            out.accumulate(*k, c.clone());
        }
        out.normalize();
        out
    }

    pub fn neg(&self) -> Self {
        RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: self.prec.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, c.neg_ref())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        let cap = self.rp.ring.prec;
        let prec = self
            .prec
            .iter()
            .zip(self.vmin_profile())
            .map(|(p, v)| (p + c.val()).min(c.prec() + v).min(cap))
            .collect();
        let mut out = RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec,
            terms: BTreeMap::new(),
        };
        for (k, a) in &self.terms {
            out.accumulate(*k, a.mul_ref(c));
        }
        out.normalize();
        out
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&self.rp.ring.int(c))
    }

    /// Exact division by `p^k`; fails when a coefficient is not divisible.
    pub fn div_p_pow(&self, k: u32) -> Result<Self> {
        if self.prec.iter().all(|&p| p <= k) {
            return Err(WachError::PrecisionExhausted(format!(
                "dividing by p^{k} leaves no precision"
            )));
        }
        let mut terms = BTreeMap::new();
        for (key, c) in &self.terms {
            terms.insert(
                *key,
                c.div_p_pow(k).map_err(|_| {
                    WachError::IntegralityViolation(format!("coefficient of {key:?} not divisible by p^{k}"))
                })?,
            );
        }
        let mut out = RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: self.prec.iter().map(|p| p.saturating_sub(k)).collect(),
            terms,
        };
        out.normalize();
        Ok(out)
    }

    /// Multiply every `a`-exponent vector by `delta`.
    pub fn shift_alpha(&self, delta: [i64; MAX_VARS]) -> Result<Self> {
        if delta == [0; MAX_VARS] {
            return Ok(self.clone());
        }
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let mut k2 = *k;
            for i in 0..MAX_VARS {
                k2.alpha[i] = self.rp.check_exp(k.alpha[i] as i64 + delta[i])?;
            }
            terms.insert(k2, c.clone());
        }
        Ok(RelPD {
            rp: self.rp.clone(),
            flavor: self.flavor,
            prec: self.prec.clone(),
            terms,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_flavor(other);
        let rp = &self.rp;
        let p = rp.ring.p;
        let bound = self.index_bound();
        let dd = self.u_degree();
        let gain = match self.flavor {
            Flavor::SHat(n) => n,
            Flavor::OaPd => 0,
        };
        let prec = product_profile(
            &self.prec,
            &self.vmin_profile(),
            &other.prec,
            &other.vmin_profile(),
            rp.ring.prec,
            gain,
        );
        let table = reduction_table(rp, self.flavor);
        let mut acc: HashMap<Key, (BigUint, u32)> = HashMap::new();
        let mut push = |key: Key, v: BigUint, pr: u32| {
            let e = acc.entry(key).or_insert_with(|| (BigUint::zero(), u32::MAX));
            e.0 += v;
            e.1 = e.1.min(pr);
        };
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let mut kk = [0u8; 4];
                let mut deg = 0;
                for v in 0..4 {
                    kk[v] = k1.k[v] + k2.k[v];
                    deg += kk[v] as usize;
                }
                if deg >= bound {
                    continue;
                }
                let mut alpha = [0i8; MAX_VARS];
                for i in 0..MAX_VARS {
                    alpha[i] = rp.check_exp(k1.alpha[i] as i64 + k2.alpha[i] as i64)?;
                }
                let pr = (c1.prec() + c2.val()).min(c2.prec() + c1.val());
                let mut coeff = c1.residue() * c2.residue();
                if coeff.is_zero() && pr >= prec[deg] {
                    continue;
                }
                for v in 0..4 {
                    if k1.k[v] > 0 && k2.k[v] > 0 {
                        coeff *= binom(kk[v] as usize, k1.k[v] as usize);
                    }
                }
                let r = k1.r as usize + k2.r as usize;
                if r < dd {
                    push(Key { k: kk, r: r as u8, alpha }, coeff, pr);
                    continue;
                }
                let v12 = c1.val() + c2.val();
                for (kt, ct) in table[r - dd].1.iter() {
                    let mut k3 = [0u8; 4];
                    let mut deg3 = 0;
                    for v in 0..4 {
                        k3[v] = kk[v] + kt.k[v];
                        deg3 += k3[v] as usize;
                    }
                    if deg3 >= bound {
                        continue;
                    }
                    let mut c = &coeff * ct.residue();
                    for v in 0..4 {
                        if kk[v] > 0 && kt.k[v] > 0 {
                            c *= binom(k3[v] as usize, kk[v] as usize);
                        }
                    }
                    let pr3 = (pr + ct.val()).min(ct.prec() + v12);
                    push(
                        Key {
                            k: k3,
                            r: kt.r,
                            alpha,
                        },
                        c,
                        pr3,
                    );
                }
            }
        }
        let mut out = RelPD {
            rp: rp.clone(),
            flavor: self.flavor,
            prec: prec.clone(),
            terms: BTreeMap::new(),
        };
        for (k, (v, pr)) in acc {
            let pr = pr.min(prec[k.deg()]);
            out.terms.insert(k, PadicScalar::from_biguint(p, &v, pr));
        }
        out.normalize();
        Ok(out)
    }

    /// Divided powers `x^{[0]}, …, x^{[kmax]}` of an element of the PD ideal.
    pub fn pd_powers(&self, kmax: usize) -> Result<Vec<RelPD>> {
        let rp = &self.rp;
        let bound = self.index_bound();
        let one = Self::one(rp, self.flavor).with_prec_profile(&self.prec);
        let mut acc: Vec<RelPD> = vec![one.clone()];
        acc.extend((0..kmax).map(|_| Self::zero(rp, self.flavor).with_prec_profile(&self.prec)));
        for (key, c) in &self.terms {
            let deg = key.deg();
            if deg == 0 {
                return Err(WachError::IntegralityViolation(
                    "divided power of an element outside the PD ideal".into(),
                ));
            }
            let amax = kmax.min((bound - 1) / deg);
            let mut tp: Vec<RelPD> = vec![one.clone()];
            let mut ca = PadicScalar::one(rp.ring.p, rp.ring.prec);
            for a in 1..=amax {
                ca = ca.mul_ref(c);
                let mut k2 = Key::ONE;
                let mut factor = BigUint::one();
                let mut first = true;
                for v in 0..4 {
                    let kv = key.k[v] as u64;
                    k2.k[v] = (kv * a as u64) as u8;
                    if kv == 0 {
                        continue;
                    }
                    let mut f = factorial(kv * a as u64) / factorial(kv).pow(a as u32);
                    if first {
                        f /= factorial(a as u64);
                        first = false;
                    }
                    factor *= f;
                }
                for i in 0..MAX_VARS {
                    k2.alpha[i] = rp.check_exp(key.alpha[i] as i64 * a as i64)?;
                }
                let coeff = ca.mul_ref(&rp.ring.ubig(&factor));
                let ur = key.r as usize * a;
                let mono = Self::from_terms(rp, self.flavor, self.prec(), [(k2, coeff)]);
                let mono = if ur == 0 {
                    mono
                } else {
                    mono.mul(&Self::u_power(rp, self.flavor, ur))?
                };
                tp.push(mono);
            }
            let mut next = Vec::with_capacity(kmax + 1);
            for n in 0..=kmax {
                let mut s = acc[n].clone();
                for a in 1..=amax.min(n) {
                    if acc[n - a].terms.is_empty() && acc[n - a].prec == self.prec {
                        continue;
                    }
                    s = s.add(&acc[n - a].mul(&tp[a])?);
                }
                next.push(s);
            }
            acc = next;
        }
        Ok(acc)
    }

    /// `u^r` in normal form.
    pub fn u_power(rp: &Arc<RelParams>, flavor: Flavor, r: usize) -> RelPD {
        let pows = u_powers(rp, flavor, r + 1);
        RelPD::from_raw(rp, flavor, &pows[r])
    }

    pub(crate) fn from_raw(rp: &Arc<RelParams>, flavor: Flavor, raw: &Raw) -> RelPD {
        RelPD {
            rp: rp.clone(),
            flavor,
            prec: vec![raw.0; Self::index_bound_for(rp, flavor)],
            terms: raw.1.clone(),
        }
    }

    fn into_raw(self) -> Raw {
        (self.prec(), self.terms)
    }

    /// Image of a base-ring element; precision is capped by the series truncation.
    pub fn from_base(x: &RelBase, flavor: Flavor) -> Result<RelPD> {
        let rp = x.rp();
        let ring = &rp.ring;
        let pows = u_powers(rp, flavor, ring.series_deg);
        let mut total = Self::zero(rp, flavor);
        let mut binom_cache: HashMap<(usize, i8), RelPD> = HashMap::new();
        for (mono, series) in x.terms() {
            let mut poly = Self::zero(rp, flavor);
            for (k, c) in series.coeffs().iter().enumerate() {
                if c.is_zero() && c.prec() >= ring.prec {
                    continue;
                }
                poly = poly.add(&Self::from_raw(rp, flavor, &pows[k]).scale(c));
            }
            let mut delta = [0i64; MAX_VARS];
            for i in 0..MAX_VARS {
                delta[i] = mono.a[i] as i64 + mono.b[i] as i64;
            }
            let mut term = poly.shift_alpha(delta)?;
            for i in 0..rp.d {
                let beta = mono.b[i];
                if beta == 0 {
                    continue;
                }
                if !binom_cache.contains_key(&(i, beta)) {
                    binom_cache.insert((i, beta), one_plus_y_pow(rp, flavor, i + 1, beta)?);
                }
                term = term.mul(&binom_cache[&(i, beta)])?;
            }
            total = total.add(&term);
        }
        let cap = base_precision_cap(rp, flavor);
        Ok(total.with_prec(cap))
    }

    pub fn to_text(&self) -> String {
        let n = self.rp.ring.prec;
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            if k.k[0] > 0 {
                factors.push(match self.flavor {
                    Flavor::SHat(n) => format!("pi^[{}]/p^({}*{})", k.k[0], n, k.k[0]),
                    Flavor::OaPd => format!("xi^[{}]", k.k[0]),
                });
            }
            for v in 1..4 {
                if k.k[v] > 0 {
                    factors.push(match self.flavor {
                        Flavor::SHat(_) => format!("(V{v}-1)^[{}]", k.k[v]),
                        Flavor::OaPd => format!("z{v}^[{}]", k.k[v]),
                    });
                }
            }
            let mut coeff = if c.prec() >= n {
                format!("{}*u^{}", c.residue(), k.r)
            } else {
                format!("{}@{}*u^{}", c.residue(), c.prec(), k.r)
            };
            for (i, &e) in k.alpha.iter().enumerate() {
                if e != 0 {
                    coeff.push_str(&format!("*a{}^{}", i + 1, e));
                }
            }
            let mono = if factors.is_empty() {
                "1".to_string()
            } else {
                factors.join(" * ")
            };
            parts.push(format!("{mono} {{{coeff}}}"));
        }
        if parts.is_empty() {
            format!("0 @{}", self.prec())
        } else {
            format!("{} @{}", parts.join(" + "), self.prec())
        }
    }
}

impl fmt::Display for RelPD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// `min_{d1+d2≤d} min(P1[d1] + V2[d2], P2[d2] + V1[d1])`, capped.
/// Absent-term precision of a product; the `u`-relation moves terms up one degree at valuation `gain`.
fn product_profile(p1: &[u32], v1: &[u32], p2: &[u32], v2: &[u32], cap: u32, gain: u32) -> Vec<u32> {
    let n = p1.len();
    let mut out = vec![cap; n];
    for d1 in 0..n {
        for d2 in 0..n - d1 {
            let x = (p1[d1] + v2[d2]).min(p2[d2] + v1[d1]);
            let o = &mut out[d1 + d2];
            *o = (*o).min(x);
        }
    }
    for d in 1..n {
        out[d] = out[d].min(out[d - 1].saturating_add(gain));
    }
    out
}

/// Valuation bound for the series tail cut off by the truncation degree.
pub fn base_precision_cap(rp: &RelParams, flavor: Flavor) -> u32 {
    let n_eff = match flavor {
        Flavor::SHat(n) => n as u64,
        Flavor::OaPd => 0,
    };
    let dd = RelPD::u_degree_for(rp, flavor) as u64;
    let bound = RelPD::index_bound_for(rp, flavor) as u64;
    let j = rp.ring.series_deg as u64 / dd;
    let p = rp.ring.p;
    let mut best = rp.ring.prec as u64;
    for i in 0..bound.min(j + 1) {
        best = best.min(j - i + n_eff * i + val_factorial(i, p));
    }
    best as u32
}

/// `(1+Y_i)^β` in the flavor's coordinates.
fn one_plus_y_pow(rp: &Arc<RelParams>, flavor: Flavor, var: usize, beta: i8) -> Result<RelPD> {
    let bound = RelPD::index_bound_for(rp, flavor);
    let b = BigInt::from(beta);
    let mut terms = Vec::new();
    for j in 0..bound as u64 {
        let f = falling_int(&b, j);
        if f.is_zero() {
            break;
        }
        let mut key = Key::var(var, j as u8);
        let c = match flavor {
            Flavor::SHat(_) => f,
            Flavor::OaPd => {
                key.alpha[var - 1] = rp.check_exp(-(j as i64))?;
                if j % 2 == 1 {
                    -f
                } else {
                    f
                }
            }
        };
        terms.push((key, rp.ring.big(&c)));
    }
    Ok(RelPD::from_terms(rp, flavor, rp.ring.prec, terms))
}

/// `u^{D+j}` for `j` in `0..max(1, D−1)`, where `D` is the relation degree.
fn reduction_table(rp: &Arc<RelParams>, flavor: Flavor) -> Arc<Vec<Raw>> {
    if let Some(t) = rp.cache_get(flavor, 0) {
        return t;
    }
    let dd = RelPD::u_degree_for(rp, flavor);
    let p = rp.ring.p;
    let prec = rp.ring.prec;
    let mut rel: Vec<(Key, PadicScalar)> = Vec::new();
    match flavor {
        Flavor::SHat(n) => {
            rel.push((Key::var(0, 1), PadicScalar::from_biguint(p, &p_pow(p, n), prec)));
            for i in 1..dd {
                let c = BigInt::from(binomial(dd as u64, i as u64));
                let key = Key {
                    r: i as u8,
                    ..Key::ONE
                };
                rel.push((key, PadicScalar::new(p, &(-c), prec)));
            }
        }
        Flavor::OaPd => {
            rel.push((Key::var(0, 1), PadicScalar::one(p, prec)));
            let poly = eisenstein(p, rp.ring.m);
            for (i, c) in poly.iter().enumerate().take(dd) {
                let key = Key {
                    r: i as u8,
                    ..Key::ONE
                };
                rel.push((key, PadicScalar::new(p, &(-c), prec)));
            }
        }
    }
    let first = RelPD::from_terms(rp, flavor, prec, rel);
    let count = (dd.max(2) - 1).max(1);
    let mut table = vec![first.clone()];
    while table.len() < count {
        let prev = table.last().unwrap();
        let mut next = RelPD::zero(rp, flavor);
        for (k, c) in prev.terms() {
            if (k.r as usize) + 1 < dd {
                let mut k2 = *k;
                k2.r += 1;
                next = next.add(&RelPD::from_terms(rp, flavor, prec, [(k2, c.clone())]));
            } else {
                let mut k2 = *k;
                k2.r = 0;
                let mono = RelPD::from_terms(rp, flavor, prec, [(k2, c.clone())]);
                next = next.add(&mono.mul_plain(&first));
            }
        }
        table.push(next);
    }
    let t: Arc<Vec<Raw>> = Arc::new(table.into_iter().map(|x| x.into_raw()).collect());
    rp.cache_put(flavor, 0, t.clone());
    t
}

impl RelPD {
    /// Product of two elements whose `u`-degrees sum below the relation degree.
    fn mul_plain(&self, other: &Self) -> RelPD {
        let bound = self.index_bound();
        let mut out = RelPD::zero(&self.rp, self.flavor);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let mut k = Key::ONE;
                for v in 0..4 {
                    k.k[v] = k1.k[v] + k2.k[v];
                }
                if k.deg() >= bound {
                    continue;
                }
                k.r = k1.r + k2.r;
                for i in 0..MAX_VARS {
                    k.alpha[i] = k1.alpha[i] + k2.alpha[i];
                }
                let mut c = c1.mul_ref(c2);
                for v in 0..4 {
                    if k1.k[v] > 0 && k2.k[v] > 0 {
                        c = c.mul_ref(&self.rp.ring.ubig(binom(k.k[v] as usize, k1.k[v] as usize)));
                    }
                }
                out.accumulate(k, c);
            }
        }
        out.normalize();
        out
    }
}

/// `u^0, …, u^{count−1}` in normal form.
fn u_powers(rp: &Arc<RelParams>, flavor: Flavor, count: usize) -> Arc<Vec<Raw>> {
    if let Some(t) = rp.cache_get(flavor, 1) {
        if t.len() >= count {
            return t;
        }
    }
    let count = count.max(rp.ring.series_deg);
    let dd = RelPD::u_degree_for(rp, flavor);
    let table = reduction_table(rp, flavor);
    let prec = rp.ring.prec;
    let mut pows = Vec::with_capacity(count);
    for r in 0..count {
        if r < dd {
            let key = Key {
                r: r as u8,
                ..Key::ONE
            };
            pows.push(RelPD::from_terms(rp, flavor, prec, [(key, rp.ring.int(1))]));
        } else if r < dd + table.len() {
            pows.push(RelPD::from_raw(rp, flavor, &table[r - dd]));
        } else {
            let u1: RelPD = pows[1].clone();
            let prev: &RelPD = &pows[r - 1];
            let next = prev.mul(&u1).expect("u-powers stay inside the exponent box");
            pows.push(next);
        }
    }
    let t: Arc<Vec<Raw>> = Arc::new(pows.into_iter().map(|x| x.into_raw()).collect());
    rp.cache_put(flavor, 1, t.clone());
    t
}
