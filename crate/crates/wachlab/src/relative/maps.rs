use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use super::nf::{falling_int, falling_padic};
use super::{Flavor, Key, RelPD, RelParams, MAX_VARS};
use crate::error::{Result, WachError};
use crate::padic::{binomial, factorial, p_pow, val_factorial, PadicScalar};
use crate::pd::{eisenstein, one_plus_u_pow_minus_one};

/// Image of one PD variable under a substitution.
pub(crate) enum VarImg {
    Same,
    Img(RelPD),
    Table(Vec<RelPD>),
}

/// Ring map defined by images of `u`, the `a`-exponent scaling and the PD variables.
pub(crate) struct Subst {
    pub target: Flavor,
    pub u_img: Option<RelPD>,
    pub a_mult: i64,
    pub vars: [VarImg; 4],
    /// Digits an unknown term of degree `d` may lose: `d · loss_per_degree`.
    pub loss_per_degree: u32,
    /// Valuation carried by every term that raises the degree by one.
    pub gain_per_degree: u32,
}

impl Subst {
    pub fn identity(target: Flavor) -> Self {
        Subst {
            target,
            u_img: None,
            a_mult: 1,
            vars: [VarImg::Same, VarImg::Same, VarImg::Same, VarImg::Same],
            loss_per_degree: 0,
            gain_per_degree: 0,
        }
    }

    pub fn apply(&self, x: &RelPD) -> Result<RelPD> {
        let rp = x.rp();
        let mut kmax = [0usize; 4];
        let mut rmax = 0usize;
        let mut groups: BTreeMap<[u8; 4], Vec<(&Key, &PadicScalar)>> = BTreeMap::new();
        for (k, c) in x.terms() {
            for v in 0..4 {
                kmax[v] = kmax[v].max(k.k[v] as usize);
            }
            rmax = rmax.max(k.r as usize);
            groups.entry(k.k).or_default().push((k, c));
        }
        let mut tables: Vec<Vec<RelPD>> = Vec::with_capacity(4);
        for v in 0..4 {
            let t = match &self.vars[v] {
                VarImg::Same => (0..=kmax[v])
                    .map(|j| RelPD::from_terms(rp, self.target, rp.ring.prec, [(Key::var(v, j as u8), rp.ring.int(1))]))
                    .collect(),
                VarImg::Img(f) => f.pd_powers(kmax[v])?,
                VarImg::Table(t) => {
                    if t.len() <= kmax[v] {
                        return Err(WachError::InsufficientDegree(format!(
                            "substitution table for variable {v} too short"
                        )));
                    }
                    t.clone()
                }
            };
            tables.push(t);
        }
        let mut upows: Vec<RelPD> = Vec::with_capacity(rmax + 1);
        for r in 0..=rmax {
            let next = match &self.u_img {
                None => RelPD::u_power(rp, self.target, r),
                Some(g) => {
                    if r == 0 {
                        RelPD::one(rp, self.target)
                    } else {
                        upows[r - 1].mul(g)?
                    }
                }
            };
            upows.push(next);
        }
        let mut total = RelPD::zero(rp, self.target);
        for (kk, terms) in groups {
            let mut coeff = RelPD::zero(rp, self.target);
            for (key, c) in terms {
                let mut delta = [0i64; MAX_VARS];
                for i in 0..MAX_VARS {
                    delta[i] = key.alpha[i] as i64 * self.a_mult;
                }
                coeff = coeff.add(&upows[key.r as usize].shift_alpha(delta)?.scale(c));
            }
            let mut prod = coeff;
            for v in 0..4 {
                if kk[v] > 0 || !matches!(self.vars[v], VarImg::Same) {
                    prod = prod.mul(&tables[v][kk[v] as usize])?;
                }
            }
            total = total.add(&prod);
        }
        let mut profile = Vec::with_capacity(total.prec_profile().len());
        let mut run = u32::MAX;
        for (d, &p) in x.prec_profile().iter().enumerate() {
            run = run
                .saturating_add(self.gain_per_degree)
                .min(p.saturating_sub(self.loss_per_degree * d as u32));
            profile.push(run);
        }
        profile.resize(total.prec_profile().len(), run);
        Ok(total.with_prec_profile(&profile))
    }
}

fn shat_n(x: &RelPD, what: &str) -> Result<u32> {
    match x.flavor() {
        Flavor::SHat(n) => Ok(n),
        Flavor::OaPd => Err(WachError::FlavorMismatch(format!("{what} needs the S-hat flavor"))),
    }
}

/// `(1+π)^x = Σ_l x(x−1)…(x−l+1) p^{nl} (π/p^n)^{[l]}` for a p-adic exponent.
pub fn one_plus_pi_pow(rp: &Arc<RelParams>, n: u32, x: &PadicScalar) -> RelPD {
    let flavor = Flavor::SHat(n);
    let bound = RelPD::index_bound_for(rp, flavor);
    let p = rp.ring.p;
    let terms = (0..bound as u64).map(|l| {
        let c = falling_padic(x, l).mul_ref(&PadicScalar::from_biguint(p, &p_pow(p, n * l as u32), rp.ring.exact_prec()));
        (Key::var(0, l as u8), c)
    });
    RelPD::from_terms(rp, flavor, rp.ring.prec, terms)
}

fn one_plus_pi_pow_int(rp: &Arc<RelParams>, n: u32, k: &BigInt) -> RelPD {
    let flavor = Flavor::SHat(n);
    let bound = RelPD::index_bound_for(rp, flavor);
    let p = rp.ring.p;
    let terms = (0..bound as u64).map(|l| {
        let c = falling_int(k, l) * BigInt::from(p_pow(p, n * l as u32));
        (Key::var(0, l as u8), rp.ring.big(&c))
    });
    RelPD::from_terms(rp, flavor, rp.ring.prec, terms)
}

/// `γ_s^k` for a geometric generator `s ≥ 1`: `V_s − 1 ↦ (1+π)^k V_s − 1`.
pub fn gamma_geom(x: &RelPD, s: usize, k: &BigInt) -> Result<RelPD> {
    let n = shat_n(x, "γ_i")?;
    let rp = x.rp();
    let flavor = x.flavor();
    let onepi = one_plus_pi_pow_int(rp, n, k);
    let ys = RelPD::from_terms(rp, flavor, rp.ring.prec, [(Key::var(s, 1), rp.ring.int(1))]);
    let img = onepi.sub(&RelPD::one(rp, flavor)).add(&onepi.mul(&ys)?);
    let mut sub = Subst::identity(flavor);
    sub.gain_per_degree = n;
    sub.vars[s] = VarImg::Img(img);
    sub.apply(x)
}

/// `γ_0` with character value `c`: fixes `a_i`, `V_i`; `π ↦ (1+π)^c − 1`.
pub fn gamma0(x: &RelPD, c: &PadicScalar) -> Result<RelPD> {
    let n = shat_n(x, "γ_0")?;
    let rp = x.rp();
    crate::cyclo::check_character(&rp.ring, c)?;
    let flavor = x.flavor();
    let p = rp.ring.p;
    let m = rp.ring.m;
    let c = c.with_prec(rp.ring.exact_prec().max(c.prec()).min(c.prec()));
    let one = PadicScalar::one(p, c.prec());
    let expo = c.sub_ref(&one).div_p_pow(m)?;
    let u = RelPD::u_power(rp, flavor, 1);
    let u_img = RelPD::one(rp, flavor)
        .add(&u)
        .mul(&one_plus_pi_pow(rp, n, &expo))?
        .sub(&RelPD::one(rp, flavor));
    let bound = x.index_bound();
    let y0 = (1..bound as u64).map(|j| {
        let coeff = falling_padic(&c, j)
            .mul_ref(&PadicScalar::from_biguint(p, &p_pow(p, n * (j as u32 - 1)), rp.ring.exact_prec()));
        (Key::var(0, j as u8), coeff)
    });
    let y0 = RelPD::from_terms(rp, flavor, rp.ring.prec, y0);
    let mut sub = Subst::identity(flavor);
    sub.gain_per_degree = n;
    sub.u_img = Some(u_img);
    sub.vars[0] = VarImg::Img(y0);
    sub.apply(x)
}

/// Generator `s` with the configured character value for `s = 0`.
pub fn gamma(x: &RelPD, s: usize) -> Result<RelPD> {
    if s == 0 {
        gamma0(x, &x.rp().ring.chi0)
    } else {
        gamma_geom(x, s, &BigInt::from(1))
    }
}

/// `(γ_s − 1)/π` on `(V_s − 1)^{[k]}`, computed without dividing.
fn delta_monomial(rp: &Arc<RelParams>, n: u32, s: usize, k: usize) -> Result<RelPD> {
    let flavor = Flavor::SHat(n);
    let p = rp.ring.p;
    let mut terms: Vec<(Key, PadicScalar)> = Vec::new();
    for l in 1..=k {
        let c = BigInt::from(binomial(k as u64, l as u64))
            * BigInt::from(p_pow(p, n * (l as u32 - 1)))
            * BigInt::from(factorial(l as u64 - 1));
        let mut key = Key::var(0, (l - 1) as u8);
        key.k[s] = k as u8;
        terms.push((key, rp.ring.big(&c)));
    }
    let mut out = RelPD::from_terms(rp, flavor, rp.ring.prec, terms);
    for a in 1..=k {
        let va = crate::padic::val_biguint(&num_bigint::BigUint::from(a as u64), p).unwrap_or(0);
        if va > n * (a as u32 - 1) {
            return Err(WachError::IntegralityViolation(format!("π^{}/{}! is not integral", a - 1, a)));
        }
        let unit = rp.ring.int(a as i64 / p.pow(va) as i64).invert()?;
        let coeff = unit.mul_p_pow(n * (a as u32 - 1) - va);
        let lead = RelPD::from_terms(rp, flavor, rp.ring.prec, [(Key::var(0, (a - 1) as u8), coeff)]);
        let onepi = one_plus_pi_pow_int(rp, n, &BigInt::from((k - a) as u64));
        let mut ys = Key::ONE;
        ys.k[s] = (k - a) as u8;
        let ys = RelPD::from_terms(rp, flavor, rp.ring.prec, [(ys, rp.ring.int(1))]);
        out = out.add(&lead.mul(&onepi)?.mul(&ys)?);
    }
    Ok(out)
}

/// `(γ_s − 1)x/π` for a geometric generator, exact and without precision loss.
pub fn delta_geom(x: &RelPD, s: usize) -> Result<RelPD> {
    let n = shat_n(x, "Δ_s")?;
    if n == 0 {
        return Err(WachError::FlavorMismatch("Δ_s needs n ≥ 1".into()));
    }
    let rp = x.rp();
    let mut by_ks: BTreeMap<u8, Vec<(Key, PadicScalar)>> = BTreeMap::new();
    for (k, c) in x.terms() {
        let mut k2 = *k;
        k2.k[s] = 0;
        by_ks.entry(k.k[s]).or_default().push((k2, c.clone()));
    }
    let mut total = RelPD::zero(rp, x.flavor());
    for (ks, terms) in by_ks {
        if ks == 0 {
            continue;
        }
        let part = RelPD::from_terms(rp, x.flavor(), rp.ring.prec, terms);
        total = total.add(&part.mul(&delta_monomial(rp, n, s, ks as usize)?)?);
    }
    let src = x.prec_profile();
    let mut profile = vec![0; src.len()];
    let mut fwd = u32::MAX;
    for d in 0..src.len() {
        let next = if d + 1 < src.len() { src[d + 1] } else { u32::MAX };
        fwd = fwd.min(src[d]).min(next);
        profile[d] = fwd;
    }
    Ok(total.with_prec_profile(&profile))
}

/// Frobenius `S-hat(n) → S-hat(n−1)`.
pub fn frobenius(x: &RelPD) -> Result<RelPD> {
    let n = shat_n(x, "Frobenius")?;
    if n == 0 {
        return Err(WachError::FlavorMismatch("Frobenius needs n ≥ 1".into()));
    }
    let rp = x.rp();
    let target = Flavor::SHat(n - 1);
    let p = rp.ring.p;
    let fu: Vec<(Key, PadicScalar)> = one_plus_u_pow_minus_one(p)
        .iter()
        .enumerate()
        .map(|(i, c)| (Key { r: i as u8, ..Key::ONE }, rp.ring.big(c)))
        .collect();
    let mut u_img = RelPD::zero(rp, target);
    for (k, c) in fu {
        u_img = u_img.add(&RelPD::monomial(rp, target, k, c)?);
    }
    let mut y0 = Vec::new();
    let mut yi: Vec<Vec<(Key, PadicScalar)>> = vec![Vec::new(); 4];
    for j in 1..=p {
        let cj = BigInt::from(binomial(p, j)) * BigInt::from(factorial(j));
        let num = &cj * BigInt::from(p_pow(p, (n - 1) * j as u32));
        let den = BigInt::from(p_pow(p, n));
        if !(&num % &den).is_zero() {
            return Err(WachError::IntegralityViolation("Frobenius of π/p^n".into()));
        }
        y0.push((Key::var(0, j as u8), rp.ring.big(&(num / den))));
        for (v, list) in yi.iter_mut().enumerate().skip(1) {
            list.push((Key::var(v, j as u8), rp.ring.big(&cj)));
        }
    }
    let mut sub = Subst::identity(target);
    sub.u_img = Some(u_img);
    sub.a_mult = p as i64;
    sub.vars[0] = VarImg::Img(RelPD::from_terms(rp, target, rp.ring.prec, y0));
    for v in 1..=rp.d {
        sub.vars[v] = VarImg::Img(RelPD::from_terms(rp, target, rp.ring.prec, yi[v].clone()));
    }
    sub.apply(x)
}

/// Inclusion `S-hat(n) ⊂ S-hat(n′)` for `n′ ≥ n`: `π/p^n = p^{n′−n}·π/p^{n′}`.
pub fn relevel(x: &RelPD, to: u32) -> Result<RelPD> {
    let n = shat_n(x, "relevel")?;
    if to < n {
        return Err(WachError::FlavorMismatch(format!("cannot move from level {n} down to {to}")));
    }
    let rp = x.rp();
    let terms = x.terms().iter().map(|(k, c)| {
        let shift = (to - n) * k.k[0] as u32;
        (*k, c.mul_p_pow(shift))
    });
    let out = RelPD::from_terms(rp, Flavor::SHat(to), rp.ring.prec, terms);
    Ok(out.with_prec_profile(x.prec_profile()))
}

fn int_poly_pow(poly: &[BigInt], k: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::from(1)];
    for _ in 0..k {
        let mut out = vec![BigInt::zero(); acc.len() + poly.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in poly.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        acc = out;
    }
    acc
}

fn poly_to_nf(rp: &Arc<RelParams>, flavor: Flavor, poly: &[BigInt]) -> RelPD {
    let mut out = RelPD::zero(rp, flavor);
    for (r, c) in poly.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        out = out.add(&RelPD::u_power(rp, flavor, r).scale(&rp.ring.big(c)));
    }
    out
}

/// Change of basis between the two flavors; `S-hat(n)` is the other side.
pub fn convert(x: &RelPD, n: u32) -> Result<RelPD> {
    match x.flavor() {
        Flavor::SHat(n0) => to_oa(x, n0),
        Flavor::OaPd => from_oa(x, n),
    }
}

fn to_oa(x: &RelPD, n: u32) -> Result<RelPD> {
    let rp = x.rp();
    let target = Flavor::OaPd;
    let p = rp.ring.p;
    let kmax = x.terms().keys().map(|k| k.k[0] as usize).max().unwrap_or(0);
    let pi1 = one_plus_u_pow_minus_one(p.pow(rp.ring.m - 1));
    let mut table = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let xi = RelPD::from_terms(rp, target, rp.ring.prec, [(Key::var(0, k as u8), rp.ring.int(1))]);
        let t = xi.mul(&poly_to_nf(rp, target, &int_poly_pow(&pi1, k)))?;
        let loss = n * k as u32;
        let t = if loss == 0 { t } else { t.div_p_pow(loss)? };
        table.push(t);
    }
    let mut sub = Subst::identity(target);
    sub.vars[0] = VarImg::Table(table);
    sub.loss_per_degree = n;
    for v in 1..=rp.d {
        let mut key = Key::var(v, 1);
        key.alpha[v - 1] = -1;
        sub.vars[v] = VarImg::Img(RelPD::from_terms(rp, target, rp.ring.prec, [(key, rp.ring.int(-1))]));
    }
    sub.apply(x)
}

fn from_oa(x: &RelPD, n: u32) -> Result<RelPD> {
    let rp = x.rp();
    let target = Flavor::SHat(n);
    let p = rp.ring.p;
    let kmax = x.terms().keys().map(|k| k.k[0] as u64).max().unwrap_or(0);
    let loss = val_factorial(kmax, p) as u32;
    let poly = eisenstein(p, rp.ring.m);
    let mut table = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let f = factorial(k);
        let vf = val_factorial(k, p) as u32;
        let unit = PadicScalar::from_biguint(p, &(f / p_pow(p, vf)), rp.ring.exact_prec());
        let scale = unit
            .invert()?
            .mul_ref(&PadicScalar::from_biguint(p, &p_pow(p, loss - vf), rp.ring.exact_prec()));
        table.push(poly_to_nf(rp, target, &int_poly_pow(&poly, k as usize)).scale(&scale));
    }
    let mut sub = Subst::identity(target);
    sub.vars[0] = VarImg::Table(table);
    for v in 1..=rp.d {
        let mut key = Key::var(v, 1);
        key.alpha[v - 1] = 1;
        sub.vars[v] = VarImg::Img(RelPD::from_terms(rp, target, rp.ring.prec, [(key, rp.ring.int(-1))]));
    }
    let y = sub.apply(x)?;
    if loss == 0 {
        Ok(y)
    } else {
        y.div_p_pow(loss).map_err(|e| match e {
            WachError::IntegralityViolation(s) => WachError::IntegralityViolation(format!("OA to S-hat: {s}")),
            other => other,
        })
    }
}

/// `∂_i`: derivation with `∂a_i = 1`, `∂z_i^{[k]} = z_i^{[k−1]}`, `∂u = ∂ξ = 0`.
pub fn connection(x: &RelPD, i: usize) -> Result<RelPD> {
    if x.flavor() != Flavor::OaPd {
        return Err(WachError::FlavorMismatch("the connection acts on the OA flavor".into()));
    }
    if i == 0 || i > x.rp().d {
        return Err(WachError::Config(format!("no torus variable {i}")));
    }
    let rp = x.rp();
    let mut terms = Vec::new();
    for (k, c) in x.terms() {
        let e = k.alpha[i - 1];
        if e != 0 {
            let mut k2 = *k;
            k2.alpha[i - 1] = rp.check_exp(e as i64 - 1)?;
            terms.push((k2, c.mul_ref(&rp.ring.int(e as i64))));
        }
        if k.k[i] > 0 {
            let mut k2 = *k;
            k2.k[i] -= 1;
            terms.push((k2, c.clone()));
        }
    }
    Ok(RelPD::from_terms(rp, Flavor::OaPd, x.prec(), terms))
}

/// Filtration degree on the OA flavor: smallest `k_0 + Σ k_i` over nonzero terms.
pub fn fil_degree_rel(x: &RelPD) -> Result<usize> {
    if x.flavor() != Flavor::OaPd {
        return Err(WachError::FlavorMismatch("filtration is defined on the OA flavor".into()));
    }
    x.degree().ok_or(WachError::ZeroElement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::{Chi0Policy, RingParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rp(p: u64, m: u32, d: usize, prec: u32, index: usize) -> Arc<RelParams> {
        let ring = RingParams::new(p, m, prec, 32, 32, &Chi0Policy::Default).unwrap();
        RelParams::new(&ring, d, 8, index).unwrap()
    }

    fn mono(r: &Arc<RelParams>, f: Flavor, k: [u8; 4], c: i64) -> RelPD {
        let key = Key { k, ..Key::ONE };
        RelPD::from_terms(r, f, r.ring.prec, [(key, r.ring.int(c))])
    }

    fn random_element(r: &Arc<RelParams>, f: Flavor, seed: u64, max_deg: u8, alpha: i8) -> RelPD {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dd = RelPD::u_degree_for(r, f) as u8;
        let modulus = r.ring.p.pow(r.ring.prec) as i64;
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(1..5) {
            let mut key = Key::ONE;
            for v in 0..=r.d {
                key.k[v] = rng.gen_range(0..=max_deg);
            }
            key.r = rng.gen_range(0..dd);
            for i in 0..r.d {
                key.alpha[i] = rng.gen_range(-alpha..=alpha);
            }
            terms.push((key, r.ring.int(rng.gen_range(0..modulus))));
        }
        RelPD::from_terms(r, f, r.ring.prec, terms)
    }

    #[test]
    fn frobenius_on_torus_coordinate() {
        let r = rp(2, 1, 1, 8, 8);
        let f = Flavor::SHat(1);
        let y = mono(&r, f, [0, 1, 0, 0], 1);
        let t = Flavor::SHat(0);
        let want = mono(&r, t, [0, 2, 0, 0], 2).add(&mono(&r, t, [0, 1, 0, 0], 2));
        assert!(frobenius(&y).unwrap().eq_to_prec(&want));
        let y2 = mono(&r, f, [0, 2, 0, 0], 1);
        let want = mono(&r, t, [0, 4, 0, 0], 12)
            .add(&mono(&r, t, [0, 3, 0, 0], 12))
            .add(&mono(&r, t, [0, 2, 0, 0], 4));
        assert!(frobenius(&y2).unwrap().eq_to_prec(&want));
        let one = RelPD::one(&r, f);
        assert!(frobenius(&one).unwrap().eq_to_prec(&RelPD::one(&r, t)));
    }

    #[test]
    fn frobenius_needs_positive_level() {
        let r = rp(2, 1, 1, 8, 8);
        let y = mono(&r, Flavor::SHat(0), [0, 1, 0, 0], 1);
        assert!(matches!(frobenius(&y), Err(WachError::FlavorMismatch(_))));
        let z = mono(&r, Flavor::OaPd, [0, 1, 0, 0], 1);
        assert!(matches!(gamma(&z, 1), Err(WachError::FlavorMismatch(_))));
    }

    #[test]
    fn gamma_on_torus_coordinates() {
        let r = rp(3, 1, 2, 6, 6);
        let f = Flavor::SHat(1);
        let y1 = mono(&r, f, [0, 1, 0, 0], 1);
        let pi = mono(&r, f, [1, 0, 0, 0], 3);
        let want = y1.add(&pi.mul(&y1).unwrap()).add(&pi);
        assert!(gamma(&y1, 1).unwrap().eq_to_prec(&want));
        assert!(gamma(&y1, 2).unwrap().eq_to_prec(&y1));
        let x = random_element(&r, f, 7, 2, 2);
        let c = PadicScalar::one(3, 6);
        assert!(gamma0(&x, &c).unwrap().eq_to_prec(&x));
    }

    #[test]
    fn pi_is_the_u_polynomial() {
        let r = rp(2, 2, 1, 8, 6);
        let f = Flavor::SHat(2);
        let u = RelPD::u_power(&r, f, 1);
        let pi = RelPD::one(&r, f).add(&u);
        let pi = (0..3).fold(pi.clone(), |acc, _| acc.mul(&pi).unwrap()).sub(&RelPD::one(&r, f));
        assert!(pi.eq_to_prec(&mono(&r, f, [1, 0, 0, 0], 4)));
    }

    #[test]
    fn convert_examples() {
        let r = rp(3, 1, 2, 6, 6);
        let y1 = mono(&r, Flavor::SHat(1), [0, 1, 0, 0], 1);
        let mut key = Key::var(1, 1);
        key.alpha[0] = -1;
        let want = RelPD::from_terms(&r, Flavor::OaPd, 6, [(key, r.ring.int(-1))]);
        assert!(convert(&y1, 1).unwrap().eq_to_prec(&want));
        let one = RelPD::one(&r, Flavor::SHat(1));
        assert!(convert(&one, 1).unwrap().eq_to_prec(&RelPD::one(&r, Flavor::OaPd)));
        let back = convert(&want, 1).unwrap();
        assert!(back.eq_to_prec(&y1));
    }

    #[test]
    fn pi_divided_powers_in_both_flavors() {
        let r = rp(3, 1, 1, 6, 6);
        let s0 = Flavor::SHat(0);
        for k in 0..4u8 {
            let x = mono(&r, s0, [k, 0, 0, 0], 1);
            let oa = convert(&x, 0).unwrap();
            let back = convert(&oa, 0).unwrap();
            assert!(back.eq_to_prec(&x), "k = {k}: {back}");
        }
    }

    #[test]
    fn connection_examples() {
        let r = rp(3, 1, 2, 6, 6);
        let oa = Flavor::OaPd;
        let z2 = mono(&r, oa, [0, 2, 0, 0], 1);
        assert!(connection(&z2, 1).unwrap().eq_to_prec(&mono(&r, oa, [0, 1, 0, 0], 1)));
        let scalar = mono(&r, oa, [3, 0, 0, 0], 5).add(&RelPD::u_power(&r, oa, 1));
        assert!(connection(&scalar, 1).unwrap().is_zero());
        assert!(connection(&scalar, 2).unwrap().is_zero());
        assert!(matches!(connection(&z2, 3), Err(WachError::Config(_))));
    }

    #[test]
    fn filtration_examples() {
        let r = rp(3, 1, 1, 6, 6);
        let oa = Flavor::OaPd;
        let y2 = mono(&r, Flavor::SHat(1), [0, 2, 0, 0], 1);
        assert_eq!(fil_degree_rel(&convert(&y2, 1).unwrap()).unwrap(), 2);
        let y1 = convert(&mono(&r, Flavor::SHat(1), [0, 1, 0, 0], 1), 1).unwrap();
        let xi = mono(&r, oa, [1, 0, 0, 0], 1);
        assert_eq!(fil_degree_rel(&xi.mul(&y1).unwrap()).unwrap(), 2);
        assert_eq!(fil_degree_rel(&RelPD::one(&r, oa)).unwrap(), 0);
        assert!(matches!(fil_degree_rel(&RelPD::zero(&r, oa)), Err(WachError::ZeroElement)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn delta_times_pi_is_gamma_minus_one(seed in any::<u64>(), s in 1usize..=2) {
            let r = rp(3, 1, 2, 6, 6);
            let x = random_element(&r, Flavor::SHat(1), seed, 2, 2);
            let pi = mono(&r, Flavor::SHat(1), [1, 0, 0, 0], 3);
            let lhs = pi.mul(&delta_geom(&x, s).unwrap()).unwrap();
            let rhs = gamma(&x, s).unwrap().sub(&x);
            prop_assert!(lhs.eq_to_prec(&rhs));
        }

        #[test]
        fn gamma_is_multiplicative(seed in any::<u64>(), s in 0usize..=2) {
            let r = rp(3, 1, 2, 6, 6);
            let x = random_element(&r, Flavor::SHat(1), seed, 2, 2);
            let y = random_element(&r, Flavor::SHat(1), seed ^ 0x55, 2, 2);
            let lhs = gamma(&x.mul(&y).unwrap(), s).unwrap();
            let rhs = gamma(&x, s).unwrap().mul(&gamma(&y, s).unwrap()).unwrap();
            prop_assert!(lhs.eq_to_prec(&rhs));
        }

        #[test]
        fn semidirect_relation(seed in any::<u64>(), s in 1usize..=2) {
            let r = rp(3, 1, 2, 6, 6);
            let x = random_element(&r, Flavor::SHat(1), seed, 2, 2);
            let c = r.ring.chi0.clone();
            let lhs = gamma0(&gamma(&x, s).unwrap(), &c).unwrap();
            let rhs = gamma_geom(&gamma0(&x, &c).unwrap(), s, &c.lift().into()).unwrap();
            prop_assert!(lhs.eq_to_prec(&rhs));
        }

        #[test]
        fn frobenius_commutes_with_gamma(seed in any::<u64>(), s in 0usize..=2) {
            let r = rp(3, 1, 2, 6, 6);
            let x = random_element(&r, Flavor::SHat(1), seed, 2, 1);
            let lhs = frobenius(&gamma(&x, s).unwrap()).unwrap();
            let rhs = gamma(&frobenius(&x).unwrap(), s).unwrap();
            prop_assert!(lhs.eq_to_prec(&rhs));
        }

        #[test]
        fn convert_round_trip(seed in any::<u64>()) {
            let r = rp(3, 1, 2, 6, 6);
            let x = random_element(&r, Flavor::SHat(1), seed, 2, 2).filter(|k| k.k[0] == 0);
            let back = convert(&convert(&x, 1).unwrap(), 1).unwrap();
            prop_assert!(back.eq_to_prec(&x));
        }

        #[test]
        fn connection_leibniz_and_integrability(seed in any::<u64>()) {
            let r = rp(3, 1, 2, 6, 6);
            let x = random_element(&r, Flavor::OaPd, seed, 2, 2);
            let y = random_element(&r, Flavor::OaPd, seed ^ 0xaa, 2, 2);
            let top = x.index_bound() - 1;
            for i in 1..=2 {
                let lhs = connection(&x.mul(&y).unwrap(), i).unwrap().filter(|k| k.deg() < top);
                let rhs = connection(&x, i).unwrap().mul(&y).unwrap()
                    .add(&x.mul(&connection(&y, i).unwrap()).unwrap())
                    .filter(|k| k.deg() < top);
                prop_assert!(lhs.eq_to_prec(&rhs));
            }
            let d12 = connection(&connection(&x, 2).unwrap(), 1).unwrap();
            let d21 = connection(&connection(&x, 1).unwrap(), 2).unwrap();
            prop_assert!(d12.eq_to_prec(&d21));
        }

        #[test]
        fn griffiths_transversality(seed in any::<u64>(), i in 1usize..=2) {
            let r = rp(3, 1, 2, 6, 6);
            let x = random_element(&r, Flavor::OaPd, seed, 3, 2);
            for (k, c) in x.terms() {
                let m = RelPD::from_terms(&r, Flavor::OaPd, 6, [(*k, c.clone())]);
                let dm = connection(&m, i).unwrap();
                if m.is_zero() || dm.is_zero() {
                    continue;
                }
                prop_assert!(fil_degree_rel(&dm).unwrap() + 1 >= fil_degree_rel(&m).unwrap());
            }
        }
    }
}
