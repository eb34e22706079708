use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::Serialize;

use crate::cyclo::CycloSeries;
use crate::error::{Result, WachError};
use crate::matrix::Mat;
use crate::padic::{binomial, factorial, p_pow, val_biguint, PadicScalar};
use crate::relative::maps;
use crate::relative::{Flavor, RelBase, RelPD, RelParams};
use crate::wach::WachModule;

/// Module element: one `RelPD` per basis coordinate.
pub type ModVec = Vec<RelPD>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Certificate {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Certificate {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepLoss {
    pub stage: String,
    pub degree: usize,
    pub nominal_loss: u32,
    pub precision: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Ledger {
    pub start_precision: u32,
    pub base_cap: u32,
    pub steps: Vec<StepLoss>,
    /// `Σ v_p(c^n − 1)` over the arithmetic steps.
    pub arithmetic_loss: u32,
    pub extraction_budget: u32,
    pub extraction_used: u32,
    pub surviving_by_degree: Vec<u32>,
    pub surviving: u32,
    pub consistency_checks: usize,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct DescentOptions {
    pub check_uniqueness: bool,
    pub push_to_oa: bool,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            check_uniqueness: true,
            push_to_oa: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InvariantBasis {
    /// `f_j`, as coordinate vectors over `e_1..e_h`.
    pub f: Vec<ModVec>,
    /// `A_ij` = coordinate `i` of `f_j`.
    pub a: Mat<RelPD>,
    /// Output of the geometric stage.
    pub geometric: Vec<ModVec>,
    pub certificates: Vec<Certificate>,
    pub ledger: Ledger,
    pub oa: Option<Vec<ModVec>>,
}

impl InvariantBasis {
    pub fn all_pass(&self) -> bool {
        self.certificates.iter().all(|c| c.passed)
    }
}

pub fn vec_eq(a: &[RelPD], b: &[RelPD]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.eq_to_prec(y))
}

fn vec_add(a: &[RelPD], b: &[RelPD]) -> ModVec {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn min_degree(v: &[RelPD]) -> Option<usize> {
    v.iter().filter_map(|x| x.degree()).min()
}

fn profile_min(v: &[RelPD], out: &mut [u32]) {
    for x in v {
        for (d, &p) in x.prec_profile().iter().enumerate() {
            out[d] = out[d].min(p);
        }
        for (k, c) in x.terms() {
            let d = k.deg();
            out[d] = out[d].min(c.prec());
        }
    }
}

/// Multi-indices `(i_0, …, i_d)` of total degree `n`, in lexicographic order.
pub fn multi_indices(d: usize, n: usize) -> Vec<[u8; 4]> {
    fn rec(pos: usize, d: usize, left: usize, cur: &mut [u8; 4], out: &mut Vec<[u8; 4]>) {
        if pos == d {
            cur[pos] = left as u8;
            out.push(*cur);
            cur[pos] = 0;
            return;
        }
        for v in 0..=left {
            cur[pos] = v as u8;
            rec(pos + 1, d, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(0, d, n, &mut [0; 4], &mut out);
    out
}

/// The module's `γ_s`, its difference quotient `(γ_s − 1)/π`, and `φ`, on `S-hat(m)`.
pub struct Descent<'a> {
    pub w: &'a WachModule,
    flavor: Flavor,
    g: Vec<Mat<RelPD>>,
    h: Vec<Option<Mat<RelPD>>>,
}

impl<'a> Descent<'a> {
    pub fn new(w: &'a WachModule) -> Result<Self> {
        let rp = &w.rp;
        let flavor = Flavor::SHat(rp.ring.m);
        let pi = CycloSeries::pi_element(&rp.ring);
        let id = Mat::identity(&RelBase::one(rp), w.rank());
        let mut g = Vec::with_capacity(w.g.len());
        let mut h = Vec::with_capacity(w.g.len());
        for (s, gs) in w.g.iter().enumerate() {
            g.push(gs.map(|x| RelPD::from_base(x, flavor))?);
            if s == 0 {
                h.push(None);
                continue;
            }
            let hs = gs.sub(&id)?.map(|x| x.divide_series(&pi)).map_err(|_| {
                WachError::IntegralityViolation(format!("G_{s} − Id is not divisible by π"))
            })?;
            h.push(Some(hs.map(|x| RelPD::from_base(x, flavor))?));
        }
        Ok(Descent { w, flavor, g, h })
    }

    pub fn rp(&self) -> &Arc<RelParams> {
        &self.w.rp
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    fn one(&self) -> RelPD {
        RelPD::one(self.rp(), self.flavor)
    }

    fn zero(&self) -> RelPD {
        RelPD::zero(self.rp(), self.flavor)
    }

    pub fn basis_vector(&self, j: usize) -> ModVec {
        (0..self.w.rank())
            .map(|i| if i == j { self.one() } else { self.zero() })
            .collect()
    }

    /// `γ_s(v) = G_s·γ_s(coordinates)`.
    pub fn gamma(&self, v: &[RelPD], s: usize) -> Result<ModVec> {
        let gv: ModVec = v.iter().map(|x| maps::gamma(x, s)).collect::<Result<_>>()?;
        self.g[s].mul_vec(&gv)
    }

    /// `(γ_s − 1)v/π = G_s·Δ_s(v) + ((G_s − Id)/π)·v` for `s ≥ 1`.
    pub fn quotient(&self, v: &[RelPD], s: usize) -> Result<ModVec> {
        let hs = self.h.get(s).and_then(|h| h.as_ref()).ok_or_else(|| {
            WachError::Config(format!("no geometric generator {s}"))
        })?;
        let dv: ModVec = v.iter().map(|x| maps::delta_geom(x, s)).collect::<Result<_>>()?;
        Ok(vec_add(&self.g[s].mul_vec(&dv)?, &hs.mul_vec(v)?))
    }

    /// `φ` from `S-hat(n)` to `S-hat(n−1)`.
    pub fn frobenius(&self, v: &[RelPD]) -> Result<ModVec> {
        let fv: ModVec = v.iter().map(maps::frobenius).collect::<Result<_>>()?;
        let target = fv.first().map(|x| x.flavor()).unwrap_or(self.flavor);
        let phi = self.w.phi.map(|x| RelPD::from_base(x, target))?;
        phi.mul_vec(&fv)
    }

    /// `C(k_0, j_0)·p^{m(k_0−j_0)}/(k_0+1−j_0)`.
    fn recursion_coeff(&self, k0: usize, j0: usize) -> Result<PadicScalar> {
        let ring = &self.rp().ring;
        let p = ring.p;
        let a = (k0 + 1 - j0) as u64;
        let va = val_biguint(&BigUint::from(a), p).unwrap_or(0);
        let shift = ring.m * (k0 - j0) as u32;
        if va > shift {
            return Err(WachError::IntegralityViolation(format!(
                "p^{shift}/{a} is not integral"
            )));
        }
        let unit = ring.int((a / p.pow(va)) as i64).invert()?;
        Ok(unit
            .mul_ref(&ring.ubig(&binomial(k0 as u64, j0 as u64)))
            .mul_p_pow(shift - va))
    }

    fn geometric(&self, j: usize, order: &[usize], ledger: &mut Ledger) -> Result<ModVec> {
        let d = self.rp().d;
        let bound = RelPD::index_bound_for(self.rp(), self.flavor);
        let mut x = self.basis_vector(j);
        if order.is_empty() {
            return Ok(x);
        }
        for n in 1..bound {
            let mut sol: BTreeMap<[u8; 4], (usize, ModVec)> = BTreeMap::new();
            for &s in order {
                let q = self.quotient(&x, s)?;
                if let Some(dq) = min_degree(&q) {
                    if dq + 1 < n {
                        return Err(WachError::ConsistencyViolation {
                            degree: n,
                            index: vec![],
                            detail: format!(
                                "(γ_{s} − 1)x_{n} has a term of degree {} outside π·J^[{}]",
                                dq + 1,
                                n - 1
                            ),
                        });
                    }
                }
                let mut fam: BTreeMap<[u8; 4], ModVec> = BTreeMap::new();
                for i in multi_indices(d, n) {
                    if i[s] == 0 {
                        continue;
                    }
                    let mut k = i;
                    k[s] -= 1;
                    let k0 = k[0] as usize;
                    let mut acc: ModVec = q.iter().map(|c| c.coeff_at(k)).collect();
                    for j0 in 0..k0 {
                        let mut jj = k;
                        jj[0] = j0 as u8;
                        jj[s] = k[s] + (k0 + 1 - j0) as u8;
                        let coef = self.recursion_coeff(k0, j0)?;
                        let zj = &fam[&jj];
                        for (a, z) in acc.iter_mut().zip(zj) {
                            *a = a.add(&z.scale(&coef));
                        }
                    }
                    fam.insert(i, acc.iter().map(|a| a.neg()).collect());
                }
                for (i, z) in fam {
                    match sol.get(&i) {
                        Some((s0, z0)) => {
                            ledger.consistency_checks += 1;
                            if !vec_eq(z0, &z) {
                                return Err(WachError::ConsistencyViolation {
                                    degree: n,
                                    index: i[..=d].iter().map(|&v| v as usize).collect(),
                                    detail: format!(
                                        "corrections from γ_{s0} and γ_{s} differ modulo π (basis vector {})",
                                        j + 1
                                    ),
                                });
                            }
                        }
                        None => {
                            sol.insert(i, (s, z));
                        }
                    }
                }
            }
            for (i, (_, z)) in sol {
                for (xc, zc) in x.iter_mut().zip(&z) {
                    *xc = xc.add(&zc.place_at(i));
                }
            }
        }
        for &s in order {
            let q = self.quotient(&x, s)?;
            if let Some(dq) = min_degree(&q) {
                if dq + 1 < bound {
                    return Err(WachError::ConsistencyViolation {
                        degree: bound,
                        index: vec![],
                        detail: format!("γ_{s} does not fix the geometric limit"),
                    });
                }
            }
        }
        Ok(x)
    }

    /// Geometric stage for every basis vector, generators in the given order.
    pub fn geometric_stage(&self, order: &[usize], ledger: &mut Ledger) -> Result<Vec<ModVec>> {
        (0..self.w.rank()).map(|j| self.geometric(j, order, ledger)).collect()
    }

    /// Arithmetic stage: the matrix `B` with `Σ_i B_ij x′_i` fixed by `γ_0`.
    pub fn arithmetic_stage(
        &self,
        xs: &[ModVec],
        ledger: &mut Ledger,
        certs: &mut Vec<Certificate>,
    ) -> Result<Mat<RelPD>> {
        let h = self.w.rank();
        let ring = &self.rp().ring;
        let bound = RelPD::index_bound_for(self.rp(), self.flavor);
        let gx: Vec<ModVec> = xs.iter().map(|x| self.gamma(x, 0)).collect::<Result<_>>()?;
        let c = Mat::from_fn(h, h, |i, j| gx[j][i].filter(|k| k.geom_deg() == 0));
        let mut stable = true;
        for j in 0..h {
            let mut recon = vec![self.zero(); h];
            for (i, xi) in xs.iter().enumerate() {
                for (r, xc) in recon.iter_mut().zip(xi) {
                    *r = r.add(&c.get(i, j).mul(xc)?);
                }
            }
            stable &= vec_eq(&recon, &gx[j]);
        }
        certs.push(Certificate::new(
            "geometric-span-stable",
            stable,
            if stable {
                "γ_0 maps the geometric invariants into their span"
            } else {
                "γ_0 leaves the span of the geometric invariants"
            },
        ));
        let one = self.one();
        let c0_id = (0..h).all(|i| {
            (0..h).all(|j| {
                let want = if i == j { one.clone() } else { self.zero() };
                c.get(i, j).degree_part(0).eq_to_prec(&want)
            })
        });
        certs.push(Certificate::new(
            "gamma0-trivial-mod-J",
            c0_id,
            if c0_id { "γ_0 ≡ Id modulo J^[1]" } else { "γ_0 is not the identity modulo J^[1]" },
        ));
        let chi0 = &ring.chi0;
        let mut a = Mat::identity(&one, h);
        for n in 1..bound {
            let cn1 = chi0.pow(n as u64).sub_ref(&PadicScalar::one(ring.p, chi0.prec()));
            if cn1.is_zero() {
                return Err(WachError::PrecisionExhausted(format!(
                    "c^{n} − 1 vanishes to the working precision"
                )));
            }
            let v = cn1.val();
            let unit = cn1.div_p_pow(v)?.invert()?;
            let ga = a.map(|e| maps::gamma0(e, chi0))?;
            let r = c.mul(&ga)?.sub(&a)?;
            let an = r.map(|e| {
                let part = e.degree_part(n);
                let q = part.div_p_pow(v).map_err(|err| match err {
                    WachError::PrecisionExhausted(_) => WachError::PrecisionExhausted(format!(
                        "arithmetic step {n}: dividing by c^{n} − 1 (valuation {v}) leaves no digits"
                    )),
                    other => other,
                })?;
                Ok(q.scale(&unit).neg().exact_outside(n))
            })?;
            let prec_n = an.entries().iter().map(|e| e.prec_profile()[n]).min().unwrap_or(0);
            ledger.arithmetic_loss += v;
            ledger.steps.push(StepLoss {
                stage: "arithmetic".into(),
                degree: n,
                nominal_loss: v,
                precision: prec_n,
            });
            if prec_n == 0 {
                return Err(WachError::PrecisionExhausted(format!(
                    "arithmetic step {n}: dividing by c^{n} − 1 (valuation {v}) leaves no digits"
                )));
            }
            a = a.add(&an)?;
        }
        Ok(a)
    }

    /// `φ^m` into `S-hat(0)`, then into the OA flavor.
    pub fn push_to_oa(&self, f: &[RelPD]) -> Result<ModVec> {
        let mut v = f.to_vec();
        for _ in 0..self.rp().ring.m {
            v = self.frobenius(&v)?;
        }
        v.iter().map(|x| maps::convert(x, 0)).collect()
    }
}

/// Reverse of a generator order; used for the uniqueness certificate.
fn geometric_order(d: usize) -> Vec<usize> {
    (1..=d).collect()
}

pub fn descend(w: &WachModule, opts: &DescentOptions) -> Result<InvariantBasis> {
    let ctx = Descent::new(w)?;
    let rp = w.rp.clone();
    let ring = &rp.ring;
    let h = w.rank();
    let bound = RelPD::index_bound_for(&rp, ctx.flavor);
    let mut ledger = Ledger {
        start_precision: ring.prec,
        base_cap: crate::relative::base_precision_cap(&rp, ctx.flavor),
        extraction_budget: bound as u32 * ring.m,
        ..Ledger::default()
    };
    ledger.notes.push("difference quotients (γ_s − 1)/π are formed without division".into());
    let mut certs = Vec::new();

    let order = geometric_order(rp.d);
    let xs = ctx.geometric_stage(&order, &mut ledger)?;
    let mut geom_prof = vec![u32::MAX; bound];
    for x in &xs {
        profile_min(x, &mut geom_prof);
    }
    ledger.steps.push(StepLoss {
        stage: "geometric".into(),
        degree: bound - 1,
        nominal_loss: 0,
        precision: geom_prof.iter().copied().min().unwrap_or(0).min(ring.prec),
    });
    certs.push(Certificate::new(
        "cross-generator-consistency",
        true,
        format!("{} overlapping corrections agree modulo π", ledger.consistency_checks),
    ));

    if opts.check_uniqueness && rp.d >= 2 {
        let mut rev = order.clone();
        rev.reverse();
        let mut scratch = Ledger::default();
        let ys = ctx.geometric_stage(&rev, &mut scratch)?;
        for (j, (x, y)) in xs.iter().zip(&ys).enumerate() {
            if !vec_eq(x, y) {
                return Err(WachError::UniquenessViolation(format!(
                    "geometric limit of basis vector {} depends on the generator order",
                    j + 1
                )));
            }
        }
        certs.push(Certificate::new("uniqueness", true, "generator order does not change the result"));
    }

    let b = ctx.arithmetic_stage(&xs, &mut ledger, &mut certs)?;
    let mut f = Vec::with_capacity(h);
    for j in 0..h {
        let mut fj = vec![ctx.zero(); h];
        for (i, xi) in xs.iter().enumerate() {
            for (acc, xc) in fj.iter_mut().zip(xi) {
                *acc = acc.add(&b.get(i, j).mul(xc)?);
            }
        }
        f.push(fj);
    }

    for s in 0..=rp.d {
        let mut bad = Vec::new();
        for (j, fj) in f.iter().enumerate() {
            if !vec_eq(&ctx.gamma(fj, s)?, fj) {
                bad.push(j + 1);
            }
        }
        certs.push(Certificate::new(
            format!("invariance:g{s}"),
            bad.is_empty(),
            if bad.is_empty() {
                format!("γ_{s} fixes every f_j")
            } else {
                format!("γ_{s} moves f_j for j in {bad:?}")
            },
        ));
    }

    let a = Mat::from_fn(h, h, |i, j| f[j][i].clone());
    let one = ctx.one();
    let red_ok = (0..h).all(|i| {
        (0..h).all(|j| {
            let want = if i == j { one.clone() } else { ctx.zero() };
            a.get(i, j).degree_part(0).eq_to_prec(&want)
        })
    });
    certs.push(Certificate::new(
        "reduction-mod-J",
        red_ok,
        if red_ok { "f_j ≡ e_j modulo J^[1]" } else { "f_j differs from e_j modulo J^[1]" },
    ));
    let det = a.det()?;
    let det_ok = det.degree_part(0).eq_to_prec(&one);
    certs.push(Certificate::new(
        "det-unit",
        det_ok,
        if det_ok { "det A ∈ 1 + J^[1]" } else { "det A ∉ 1 + J^[1]" },
    ));

    let mut prof = vec![u32::MAX; bound];
    for fj in &f {
        profile_min(fj, &mut prof);
    }
    let prof: Vec<u32> = prof.into_iter().map(|p| p.min(ring.prec)).collect();
    ledger.surviving = prof.iter().copied().min().unwrap_or(0);
    ledger.surviving_by_degree = prof;
    if ledger.surviving == 0 {
        return Err(WachError::PrecisionExhausted(
            "no p-adic digit of the invariant basis survives".into(),
        ));
    }

    let oa = if opts.push_to_oa {
        let pushed: Result<Vec<ModVec>> = f.iter().map(|fj| ctx.push_to_oa(fj)).collect();
        match pushed {
            Ok(v) => {
                certs.push(Certificate::new("push-to-oa", true, format!("φ^{} image computed", ring.m)));
                Some(v)
            }
            Err(e) => {
                certs.push(Certificate::new("push-to-oa", false, e.to_string()));
                None
            }
        }
    } else {
        None
    };

    Ok(InvariantBasis {
        f,
        a,
        geometric: xs,
        certificates: certs,
        ledger,
        oa,
    })
}

/// `t/π = Σ_k (−1)^k k!·p^{mk}/(k+1)·(π/p^m)^{[k]}` in `S-hat(m)`.
pub fn t_over_pi(rp: &Arc<RelParams>) -> Result<RelPD> {
    let ring = &rp.ring;
    let flavor = Flavor::SHat(ring.m);
    let bound = RelPD::index_bound_for(rp, flavor);
    let mut terms = Vec::with_capacity(bound);
    for k in 0..bound {
        let num = BigInt::from(factorial(k as u64)) * BigInt::from(p_pow(ring.p, ring.m * k as u32));
        let num = if k % 2 == 0 { num } else { -num };
        let q = BigRational::new(num, BigInt::from(k as u64 + 1));
        terms.push((crate::relative::Key::var(0, k as u8), PadicScalar::from_rational(ring.p, &q, ring.prec)?));
    }
    Ok(RelPD::from_terms(rp, flavor, ring.prec, terms))
}

/// Closed-form invariant basis: `φ(f_j) = λ_j f_j`, Hodge-Tate weight `w_j` on `e_j`.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub f: Vec<ModVec>,
    pub weights: Vec<u32>,
    pub eigen: Vec<RelBase>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub checks: Vec<Certificate>,
    pub surviving: u32,
}

impl Comparison {
    pub fn matched(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Compares a computed basis with a closed form: coefficients, Frobenius and filtration degrees.
pub fn compare_dcris(w: &WachModule, got: &InvariantBasis, expected: &ClosedForm) -> Comparison {
    let mut checks = Vec::new();
    let h = w.rank();
    if expected.f.len() != got.f.len() {
        checks.push(Certificate::new("rank", false, "different number of basis vectors"));
        return Comparison {
            checks,
            surviving: got.ledger.surviving,
        };
    }
    let surv = got.ledger.surviving;
    for (j, (g, e)) in got.f.iter().zip(&expected.f).enumerate() {
        let ok = g.len() == e.len()
            && g.iter().zip(e).all(|(x, y)| x.with_prec(surv).eq_to_prec(&y.with_prec(surv)));
        checks.push(Certificate::new(
            format!("coefficients:f{}", j + 1),
            ok,
            if ok {
                format!("agree to p^{surv}")
            } else {
                format!("differ below p^{surv}")
            },
        ));
    }
    let frob = (|| -> Result<Vec<Certificate>> {
        let ctx = Descent::new(w)?;
        let mut out = Vec::new();
        for (j, fj) in got.f.iter().enumerate() {
            let lhs: ModVec = ctx
                .frobenius(fj)?
                .iter()
                .map(|x| maps::relevel(x, w.rp.ring.m))
                .collect::<Result<_>>()?;
            let lambda = RelPD::from_base(&expected.eigen[j], ctx.flavor())?;
            let rhs: ModVec = fj.iter().map(|x| x.mul(&lambda)).collect::<Result<_>>()?;
            let ok = vec_eq(&lhs, &rhs);
            let shown = expected.eigen[j].to_text();
            out.push(Certificate::new(
                format!("frobenius:f{}", j + 1),
                ok,
                if ok {
                    format!("φ(f) = ({shown})·f")
                } else {
                    format!("φ(f) ≠ ({shown})·f")
                },
            ));
        }
        Ok(out)
    })();
    match frob {
        Ok(c) => checks.extend(c),
        Err(e) => checks.push(Certificate::new("frobenius", false, e.to_string())),
    }
    for j in 0..h {
        let wj = expected.weights[j] as i64;
        let mut e = vec![RelBase::zero(&w.rp); h];
        e[j] = RelBase::one(&w.rp);
        let res = w.in_fil(&e, wj).and_then(|a| Ok((a, w.in_fil(&e, wj + 1)?)));
        let (ok, detail) = match res {
            Ok((true, false)) => (true, format!("e_{} has filtration degree {wj}", j + 1)),
            Ok((a, b)) => (false, format!("e_{} in Fil^{wj}: {a}, in Fil^{}: {b}", j + 1, wj + 1)),
            Err(err) => (false, err.to_string()),
        };
        checks.push(Certificate::new(format!("fil-degree:e{}", j + 1), ok, detail));
    }
    Comparison {
        checks,
        surviving: surv,
    }
}

/// Whether `(γ_s − 1)x ∈ π·J^{[n]}` for `x = Σ X^{[i]} x_i` with `|i| = n`.
pub fn divisibility_witness(ctx: &Descent, x: &[([u8; 4], Vec<RelBase>)], s: usize) -> Result<bool> {
    let h = ctx.w.rank();
    let mut n = None;
    let mut v = vec![ctx.zero(); h];
    for (i, xi) in x {
        let deg: usize = i.iter().map(|&e| e as usize).sum();
        if *n.get_or_insert(deg) != deg {
            return Err(WachError::Config("x must be supported in a single degree".into()));
        }
        let mono = RelPD::one(ctx.rp(), ctx.flavor).place_at(*i);
        for (acc, c) in v.iter_mut().zip(xi) {
            *acc = acc.add(&RelPD::from_base(c, ctx.flavor)?.mul(&mono)?);
        }
    }
    let Some(n) = n else { return Ok(true) };
    let q = ctx.quotient(&v, s)?;
    Ok(min_degree(&q).map_or(true, |dq| dq >= n))
}

/// Brute-force side: `x_i ∈ πN` whenever `i_s ≥ 1`.
pub fn divisibility_criterion(x: &[([u8; 4], Vec<RelBase>)], s: usize) -> bool {
    x.iter().filter(|(i, _)| i[s] >= 1).all(|(_, xi)| {
        xi.iter().all(|c| {
            let pi = CycloSeries::pi_element(&c.rp().ring);
            c.is_zero() || c.divide_series(&pi).is_ok()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::{Chi0Policy, RingParams};
    use crate::fixtures::Fixture;

    fn rp(p: u64, m: u32, d: usize, prec: u32, index: usize) -> Arc<RelParams> {
        let ring = RingParams::new(p, m, prec, 64, 40, &Chi0Policy::Default).unwrap();
        RelParams::new(&ring, d, 8, index).unwrap()
    }

    fn run(fx: &str, r: &Arc<RelParams>) -> (WachModule, InvariantBasis, Comparison) {
        let fx: Fixture = fx.parse().unwrap();
        let w = fx.module(r).unwrap();
        let got = descend(&w, &DescentOptions::default()).unwrap();
        let want = fx.closed_form(r).unwrap().unwrap();
        let cmp = compare_dcris(&w, &got, &want);
        (w, got, cmp)
    }

    #[test]
    fn twist_one_matches_t_over_pi() {
        let r = rp(3, 1, 1, 6, 8);
        let t0 = std::time::Instant::now();
        let (_, got, cmp) = run("twist:1", &r);
        assert!(t0.elapsed().as_secs() < 10);
        assert!(got.all_pass(), "{:?}", got.certificates);
        assert!(cmp.matched(), "{:?}", cmp.checks);
        assert!(got.ledger.surviving >= 1);
        let v: u32 = (1..8u64)
            .map(|n| {
                let c = &r.ring.chi0;
                c.pow(n).sub_ref(&PadicScalar::one(3, c.prec())).val()
            })
            .sum();
        assert_eq!(got.ledger.arithmetic_loss, v);
    }

    #[test]
    fn other_levels_and_weights() {
        for (p, m, fx) in [(2, 2, "twist:1"), (2, 2, "twist:2"), (3, 1, "twist:2"), (3, 2, "twist:1"), (5, 1, "twist:1")] {
            let r = rp(p, m, 1, 8, 8);
            let (_, got, cmp) = run(fx, &r);
            assert!(got.all_pass(), "({p},{m}) {fx}: {:?}", got.certificates);
            assert!(cmp.matched(), "({p},{m}) {fx}: {:?}", cmp.checks);
        }
    }

    #[test]
    fn trivial_gives_identity() {
        let r = rp(3, 1, 2, 6, 6);
        let (_, got, cmp) = run("trivial", &r);
        assert!(got.all_pass() && cmp.matched());
        let one = RelPD::one(&r, Flavor::SHat(1));
        assert!(got.a.get(0, 0).eq_to_prec(&one) && got.a.get(0, 1).is_zero());
    }

    #[test]
    fn sums_descend_blockwise_and_tensors_match_twists() {
        let r = rp(3, 1, 1, 6, 8);
        let (_, sum, cmp) = run("sum:1,2", &r);
        assert!(sum.all_pass() && cmp.matched(), "{:?}", cmp.checks);
        let (_, t1, _) = run("twist:1", &r);
        let (_, t2, _) = run("twist:2", &r);
        assert!(sum.f[0][0].eq_to_prec(&t1.f[0][0]) && sum.f[1][1].eq_to_prec(&t2.f[0][0]));
        assert!(sum.f[0][1].is_zero() && sum.f[1][0].is_zero());
        let (_, ten, cmp) = run("tensor:1,1", &r);
        assert!(ten.all_pass() && cmp.matched(), "{:?}", cmp.checks);
        assert!(ten.f[0][0].eq_to_prec(&t2.f[0][0]));
    }

    #[test]
    fn gauge_exercises_both_geometric_generators() {
        for (p, m) in [(3, 1), (2, 2)] {
            let r = rp(p, m, 2, 6, 6);
            let (_, got, cmp) = run("gauge:1", &r);
            assert!(got.all_pass(), "{:?}", got.certificates);
            assert!(cmp.matched(), "({p},{m}) {:?}", cmp.checks);
            assert!(got.ledger.consistency_checks > 0);
        }
    }

    #[test]
    fn corrupt_commutation_is_caught() {
        let r = rp(3, 1, 2, 6, 6);
        let w = Fixture::CorruptCommutation.module(&r).unwrap();
        assert!(!w.axioms_check().all_pass());
        match descend(&w, &DescentOptions::default()) {
            Err(WachError::ConsistencyViolation { degree, .. }) => assert_eq!(degree, 2),
            other => panic!("expected a consistency violation, got {other:?}"),
        }
    }

    #[test]
    fn low_precision_is_flagged() {
        let r = rp(3, 1, 1, 2, 8);
        let w = WachModule::twist(&r, 1).unwrap();
        assert!(matches!(
            descend(&w, &DescentOptions::default()),
            Err(WachError::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn pushes_into_the_oa_flavor() {
        let r = rp(3, 1, 1, 6, 6);
        let w = WachModule::twist(&r, 1).unwrap();
        let opts = DescentOptions {
            push_to_oa: true,
            ..DescentOptions::default()
        };
        let got = descend(&w, &opts).unwrap();
        assert!(got.all_pass(), "{:?}", got.certificates);
        assert_eq!(got.oa.unwrap()[0][0].flavor(), Flavor::OaPd);
    }

    #[test]
    fn multi_indices_are_lexicographic() {
        let idx = multi_indices(2, 2);
        assert_eq!(idx.len(), 6);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(idx[0], [0, 0, 2, 0]);
    }

    #[test]
    fn divisibility_witness_matches_coefficient_criterion() {
        use rand::SeedableRng;
        for (p, m, d) in [(3, 1, 1), (3, 1, 2), (2, 2, 2)] {
            let r = rp(p, m, d, 6, 6);
            let w = Fixture::Gauge(1).module(&r).unwrap();
            let ctx = Descent::new(&w).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7 + p + d as u64);
            let (mut yes, mut no) = (0, 0);
            for _ in 0..100 {
                let (x, s) = crate::random::divisibility_instance(&mut rng, &r);
                let want = divisibility_criterion(&x, s);
                let shown: Vec<String> = x.iter().map(|(i, c)| format!("{i:?}:{}", c[0].to_text())).collect();
                assert_eq!(divisibility_witness(&ctx, &x, s).unwrap(), want, "({p},{m},{d}) {shown:?} s={s}");
                if want { yes += 1 } else { no += 1 }
            }
            assert!(yes > 10 && no > 10);
        }
        let r = rp(3, 1, 1, 6, 6);
        let w = WachModule::twist(&r, 0).unwrap();
        let ctx = Descent::new(&w).unwrap();
        assert!(divisibility_witness(&ctx, &[], 1).unwrap());
        let unit = vec![([0, 2, 0, 0], vec![RelBase::one(&r)])];
        assert!(!divisibility_witness(&ctx, &unit, 1).unwrap());
    }
}
