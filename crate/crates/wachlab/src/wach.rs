use std::sync::Arc;

use crate::cyclo::CycloSeries;
use crate::error::{Result, WachError};
use crate::matrix::Mat;
use crate::padic::{binomial_padic, PadicScalar};
use crate::pd::eisenstein;
use crate::relative::{Mono, RelBase, RelParams};

/// Free Wach module with Frobenius matrix `Phi` and generator matrices `G_0..G_d`.
///
/// Column convention: `φ(e_j) = Σ_i Phi_ij e_i`, `γ_s(e_j) = Σ_i (G_s)_ij e_i`.
#[derive(Clone, Debug)]
pub struct WachModule {
    pub rp: Arc<RelParams>,
    pub r1: u32,
    pub phi: Mat<RelBase>,
    pub g: Vec<Mat<RelBase>>,
    /// Witness for the height condition `Phi·Psi = Psi·Phi = q^{r_1}`.
    pub psi: Option<Mat<RelBase>>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed(&self, prefix: &str) -> bool {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .all(|c| c.passed)
    }
}

/// Generators of `Fil^k` of the form `ξ^{j_i} e_i`.
#[derive(Clone, Debug)]
pub struct FilBasis {
    pub k: i64,
    pub exponents: Vec<u32>,
    pub generators: Vec<Vec<RelBase>>,
}

impl FilBasis {
    /// Whether `x` lies in the span of the generators.
    pub fn contains(&self, x: &[RelBase]) -> bool {
        x.iter().zip(&self.exponents).all(|(xi, &j)| {
            if j == 0 || xi.is_zero() {
                return true;
            }
            let xi_pow = xi_series(xi.rp()).pow(j as u64);
            xi.divide_series(&xi_pow).is_ok()
        })
    }

    pub fn is_whole_module(&self) -> bool {
        self.exponents.iter().all(|&j| j == 0)
    }
}

/// `ξ = Φ_p((1+π_m)^{p^{m-1}})` as a series in `π_m`.
pub fn xi_series(rp: &RelParams) -> CycloSeries {
    let ring = &rp.ring;
    let ints: Vec<PadicScalar> = eisenstein(ring.p, ring.m).iter().map(|c| ring.big(c)).collect();
    CycloSeries::from_coeffs(ring, ints)
}

/// `γ_0(π)/π = Σ_{j≥1} C(c, j) π^{j−1}`.
pub fn gamma0_pi_ratio(rp: &RelParams, c: &PadicScalar) -> CycloSeries {
    let ring = &rp.ring;
    let pi = CycloSeries::pi_element(ring);
    let mut out = CycloSeries::zero(ring);
    let mut pow = CycloSeries::one(ring);
    for j in 1..=ring.series_deg as u64 {
        out = out.add(&pow.scale(&binomial_padic(c, j)));
        pow = pow.mul(&pi);
        if pow.is_zero() {
            break;
        }
    }
    out
}

fn vec_gamma(v: &[RelBase], s: usize) -> Result<Vec<RelBase>> {
    v.iter().map(|x| x.gamma(s)).collect()
}

impl WachModule {
    pub fn new(rp: &Arc<RelParams>, r1: u32, phi: Mat<RelBase>, g: Vec<Mat<RelBase>>) -> Result<Self> {
        let h = phi.rows();
        if phi.cols() != h || h == 0 {
            return Err(WachError::Config("Frobenius matrix must be square".into()));
        }
        if g.len() != rp.d + 1 {
            return Err(WachError::Config(format!(
                "expected {} generator matrices, got {}",
                rp.d + 1,
                g.len()
            )));
        }
        if g.iter().any(|m| m.rows() != h || m.cols() != h) {
            return Err(WachError::Config("generator matrices must match the rank".into()));
        }
        Ok(WachModule {
            rp: rp.clone(),
            r1,
            phi,
            g,
            psi: None,
        })
    }

    pub fn rank(&self) -> usize {
        self.phi.rows()
    }

    fn one(&self) -> RelBase {
        RelBase::one(&self.rp)
    }

    pub fn trivial(rp: &Arc<RelParams>, h: usize) -> Self {
        let id = Mat::identity(&RelBase::one(rp), h);
        WachModule {
            rp: rp.clone(),
            r1: 0,
            phi: id.clone(),
            g: vec![id.clone(); rp.d + 1],
            psi: Some(id),
        }
    }

    /// Rank-1 module on `f = π^r e_{−r}`: `Phi = [q^r]`, `G_0 = [(γ_0(π)/π)^r c^{−r}]`.
    pub fn twist(rp: &Arc<RelParams>, r: u32) -> Result<Self> {
        let ring = &rp.ring;
        let q = CycloSeries::q_element(ring).pow(r as u64);
        let c = &ring.chi0;
        let cinv = c.invert()?.pow(r as u64);
        let g0 = gamma0_pi_ratio(rp, c).pow(r as u64).scale(&cinv);
        let mut g = vec![Mat::scalar(RelBase::from_series(rp, g0))];
        for _ in 0..rp.d {
            g.push(Mat::scalar(RelBase::one(rp)));
        }
        let mut w = Self::new(rp, r, Mat::scalar(RelBase::from_series(rp, q)), g)?;
        w.psi = Some(Mat::scalar(RelBase::one(rp)));
        Ok(w)
    }

    fn q_pow(&self, k: u32) -> RelBase {
        RelBase::from_series(&self.rp, CycloSeries::q_element(&self.rp.ring).pow(k as u64))
    }

    fn check_params(&self, other: &Self) -> Result<()> {
        if !self.rp.same_as(&other.rp) {
            return Err(WachError::ParamMismatch("modules over different rings".into()));
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.check_params(other)?;
        let g = self.g.iter().zip(&other.g).map(|(a, b)| a.block_diag(b)).collect();
        let r1 = self.r1.max(other.r1);
        let mut w = Self::new(&self.rp, r1, self.phi.block_diag(&other.phi), g)?;
        if let (Some(a), Some(b)) = (&self.psi, &other.psi) {
            let qa = self.q_pow(r1 - self.r1);
            let qb = self.q_pow(r1 - other.r1);
            w.psi = Some(a.map(|x| x.mul(&qa))?.block_diag(&b.map(|x| x.mul(&qb))?));
        }
        Ok(w)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.check_params(other)?;
        let g = self
            .g
            .iter()
            .zip(&other.g)
            .map(|(a, b)| a.kron(b))
            .collect::<Result<_>>()?;
        let mut w = Self::new(&self.rp, self.r1 + other.r1, self.phi.kron(&other.phi)?, g)?;
        if let (Some(a), Some(b)) = (&self.psi, &other.psi) {
            w.psi = Some(a.kron(b)?);
        }
        Ok(w)
    }

    /// Module on the basis `e′_j = Σ_i U_ij e_i`; needs `U·U_inv = Id`.
    pub fn change_basis(&self, u: &Mat<RelBase>, u_inv: &Mat<RelBase>) -> Result<Self> {
        let h = self.rank();
        if !u.mul(u_inv)?.eq_to_prec(&Mat::identity(&self.one(), h)) {
            return Err(WachError::Config("basis change is not invertible".into()));
        }
        let phi = u_inv.mul(&self.phi)?.mul(&u.map(|x| x.frobenius())?)?;
        let mut g = Vec::with_capacity(self.g.len());
        for (s, gs) in self.g.iter().enumerate() {
            g.push(u_inv.mul(gs)?.mul(&u.map(|x| x.gamma(s))?)?);
        }
        let mut w = Self::new(&self.rp, self.r1, phi, g)?;
        if let Some(psi) = &self.psi {
            w.psi = Some(u_inv.map(|x| x.frobenius())?.mul(psi)?.mul(u)?);
        }
        Ok(w)
    }

    /// `γ_s` on a coordinate vector.
    pub fn gamma_vec(&self, v: &[RelBase], s: usize) -> Result<Vec<RelBase>> {
        self.g[s].mul_vec(&vec_gamma(v, s)?)
    }

    /// `φ` on a coordinate vector.
    pub fn frobenius_vec(&self, v: &[RelBase]) -> Result<Vec<RelBase>> {
        let fv: Vec<RelBase> = v.iter().map(|x| x.frobenius()).collect::<Result<_>>()?;
        self.phi.mul_vec(&fv)
    }

    /// `q^{r_1} Phi^{−1}`: the carried witness, else the adjugate formula.
    pub fn psi(&self) -> Result<Mat<RelBase>> {
        if let Some(psi) = &self.psi {
            return Ok(psi.clone());
        }
        let det = self.phi.det()?;
        let qr = RelBase::from_series(&self.rp, CycloSeries::q_element(&self.rp.ring).pow(self.r1 as u64));
        self.phi.adjugate()?.map(|a| a.mul(&qr)?.divide_exact(&det))
    }

    pub fn axioms_check(&self) -> AxiomReport {
        let mut checks = Vec::new();
        let h = self.rank();
        let pi = CycloSeries::pi_element(&self.rp.ring);
        let id = Mat::identity(&self.one(), h);
        for (s, gs) in self.g.iter().enumerate() {
            let mut bad = Vec::new();
            match gs.sub(&id) {
                Ok(diff) => {
                    for i in 0..h {
                        for j in 0..h {
                            if diff.get(i, j).divide_series(&pi).is_err() {
                                bad.push(format!("({},{})", i + 1, j + 1));
                            }
                        }
                    }
                }
                Err(e) => bad.push(e.to_string()),
            }
            checks.push(AxiomCheck {
                name: format!("trivial-mod-pi:g{s}"),
                passed: bad.is_empty(),
                detail: if bad.is_empty() {
                    "G - Id divisible by pi".into()
                } else {
                    format!("not divisible by pi at {}", bad.join(" "))
                },
            });
        }
        let q = RelBase::from_series(&self.rp, CycloSeries::q_element(&self.rp.ring).pow(self.r1 as u64));
        let zero = RelBase::zero(&self.rp);
        let qr = Mat::from_fn(h, h, |i, j| if i == j { q.clone() } else { zero.clone() });
        let height = self.psi().and_then(|psi| {
            let left = self.phi.mul(&psi)?.diff_positions(&qr);
            let right = psi.mul(&self.phi)?.diff_positions(&qr);
            Ok((left, right))
        });
        checks.push(match height {
            Ok((l, r)) if l.is_empty() && r.is_empty() => AxiomCheck {
                name: "q-height".into(),
                passed: true,
                detail: format!("Phi*Psi = Psi*Phi = q^{}", self.r1),
            },
            Ok((l, r)) => AxiomCheck {
                name: "q-height".into(),
                passed: false,
                detail: format!("mismatch at {:?} / {:?}", l, r),
            },
            Err(e) => AxiomCheck {
                name: "q-height".into(),
                passed: false,
                detail: format!("no Psi with Phi*Psi = q^{}: {e}", self.r1),
            },
        });
        for s in 0..self.g.len() {
            let res = (|| -> Result<Vec<(usize, usize)>> {
                let lhs = self.g[s].mul(&self.phi.map(|x| x.gamma(s))?)?;
                let rhs = self.phi.mul(&self.g[s].map(|x| x.frobenius())?)?;
                Ok(lhs.diff_positions(&rhs))
            })();
            checks.push(match res {
                Ok(bad) if bad.is_empty() => AxiomCheck {
                    name: format!("commutation:g{s}"),
                    passed: true,
                    detail: "G*gamma(Phi) = Phi*phi(G)".into(),
                },
                Ok(bad) => AxiomCheck {
                    name: format!("commutation:g{s}"),
                    passed: false,
                    detail: format!(
                        "G*gamma(Phi) != Phi*phi(G) at {}",
                        bad.iter()
                            .map(|(i, j)| format!("({},{})", i + 1, j + 1))
                            .collect::<Vec<_>>()
                            .join(" ")
                    ),
                },
                Err(e) => AxiomCheck {
                    name: format!("commutation:g{s}"),
                    passed: false,
                    detail: e.to_string(),
                },
            });
        }
        AxiomReport { checks }
    }

    /// `Fil^k = {x : φ(x) ∈ q^k N}`, searched over generators `ξ^j e_i`.
    pub fn fil_wach(&self, k: i64) -> Result<FilBasis> {
        let h = self.rank();
        let rp = &self.rp;
        let xi = RelBase::from_series(rp, xi_series(rp));
        let mut exponents = Vec::with_capacity(h);
        let mut generators = Vec::with_capacity(h);
        for i in 0..h {
            let mut found = None;
            if k <= 0 {
                found = Some(0);
            } else {
                let qk = CycloSeries::q_element(&rp.ring).pow(k as u64);
                for j in 0..=k as u32 {
                    let mut x = vec![RelBase::zero(rp); h];
                    x[i] = xi.pow(j as u64)?;
                    let fx = self.frobenius_vec(&x)?;
                    if fx.iter().all(|c| c.divide_series(&qk).is_ok()) {
                        found = Some(j);
                        break;
                    }
                }
            }
            let j = found.ok_or_else(|| {
                WachError::NotDivisible(format!("no generator of Fil^{k} found along e_{}", i + 1))
            })?;
            let mut x = vec![RelBase::zero(rp); h];
            x[i] = xi.pow(j as u64)?;
            exponents.push(j);
            generators.push(x);
        }
        Ok(FilBasis {
            k,
            exponents,
            generators,
        })
    }

    /// Whether `φ(x) ∈ q^k N`.
    pub fn in_fil(&self, x: &[RelBase], k: i64) -> Result<bool> {
        if k <= 0 {
            return Ok(true);
        }
        let qk = CycloSeries::q_element(&self.rp.ring).pow(k as u64);
        Ok(self.frobenius_vec(x)?.iter().all(|c| c.divide_series(&qk).is_ok()))
    }

    /// `b_1 ⋯ b_d` as a rank-1 basis change.
    pub fn torus_gauge(rp: &Arc<RelParams>) -> Result<(RelBase, RelBase)> {
        let mut m = Mono::ONE;
        for i in 0..rp.d {
            m = m.mul(&Mono::b_var(i, 1), rp)?;
        }
        let one = CycloSeries::one(&rp.ring);
        Ok((RelBase::term(rp, m, one.clone()), RelBase::term(rp, m.inv(), one)))
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
    fn frobenius_of_xi_is_q() {
        for (p, m) in [(2, 2), (3, 1), (3, 2)] {
            let r = rp(p, m, 1);
            let xi = xi_series(&r);
            assert!(xi.frobenius().eq_to_prec(&CycloSeries::q_element(&r.ring)));
        }
    }

    #[test]
    fn twists_satisfy_the_axioms() {
        for (p, m) in [(2, 2), (3, 1), (3, 2)] {
            let r = rp(p, m, 1);
            for k in 0..=3 {
                let w = WachModule::twist(&r, k).unwrap();
                let rep = w.axioms_check();
                assert!(rep.all_pass(), "({p},{m}) twist {k}: {rep:?}");
            }
        }
        assert!(WachModule::trivial(&rp(3, 1, 2), 2).axioms_check().all_pass());
    }

    #[test]
    fn twist_generator_matches_exact_division() {
        let r = rp(3, 1, 1);
        let ring = &r.ring;
        let pi = CycloSeries::pi_element(ring);
        let ratio = pi.gamma0(&ring.chi0).unwrap().divide_exact(&pi).unwrap();
        assert!(gamma0_pi_ratio(&r, &ring.chi0).eq_to_prec(&ratio));
        let w = WachModule::twist(&r, 1).unwrap();
        let g0 = w.g[0].get(0, 0).sub(&RelBase::one(&r));
        assert!(g0.divide_series(&pi).is_ok());
        assert!(w.phi.get(0, 0).eq_to_prec(&RelBase::from_series(&r, CycloSeries::q_element(ring))));
    }

    #[test]
    fn corrupted_generator_breaks_commutation() {
        let r = rp(3, 1, 1);
        let mut w = WachModule::twist(&r, 1).unwrap();
        let bad = w.g[1].get(0, 0).add(&RelBase::from_series(&r, CycloSeries::pi_m(&r.ring)));
        w.g[1].set(0, 0, bad);
        let rep = w.axioms_check();
        assert!(!rep.passed("commutation:g1"));
        assert!(rep.passed("commutation:g0"));
        assert!(rep.passed("q-height"));
    }

    #[test]
    fn sums_and_tensors() {
        let r = rp(3, 1, 2);
        let t1 = WachModule::twist(&r, 1).unwrap();
        let t2 = WachModule::twist(&r, 2).unwrap();
        let s = t1.direct_sum(&t2).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.r1, 2);
        assert!(s.axioms_check().all_pass());
        let t = t1.tensor(&t1).unwrap();
        assert_eq!(t.rank(), 1);
        assert!(t.phi.eq_to_prec(&t2.phi));
        for (a, b) in t.g.iter().zip(&t2.g) {
            assert!(a.eq_to_prec(b));
        }
        let big = s.tensor(&s).unwrap();
        assert_eq!(big.rank(), 4);
        assert!(big.axioms_check().all_pass());
        let other = WachModule::twist(&rp(3, 2, 2), 1).unwrap();
        assert!(matches!(t1.direct_sum(&other), Err(WachError::ParamMismatch(_))));
    }

    #[test]
    fn gauged_twist_keeps_the_axioms() {
        let r = rp(3, 1, 2);
        let (u, ui) = WachModule::torus_gauge(&r).unwrap();
        let w = WachModule::twist(&r, 1)
            .unwrap()
            .change_basis(&Mat::scalar(u), &Mat::scalar(ui))
            .unwrap();
        assert!(w.axioms_check().all_pass());
        let pi = CycloSeries::pi_element(&r.ring);
        let one_pi = RelBase::from_series(&r, CycloSeries::one(&r.ring).add(&pi));
        assert!(w.g[1].get(0, 0).eq_to_prec(&one_pi));
    }

    #[test]
    fn filtration_of_twists() {
        let r = rp(3, 1, 1);
        let t0 = WachModule::twist(&r, 0).unwrap();
        let t1 = WachModule::twist(&r, 1).unwrap();
        assert!(t1.fil_wach(0).unwrap().is_whole_module());
        assert!(t1.fil_wach(1).unwrap().is_whole_module());
        assert_eq!(t1.fil_wach(2).unwrap().exponents, vec![1]);
        assert_eq!(t0.fil_wach(1).unwrap().exponents, vec![1]);
        let f3 = t1.fil_wach(3).unwrap();
        let f2 = t1.fil_wach(2).unwrap();
        for g in &f3.generators {
            assert!(f2.contains(g));
            assert!(t1.in_fil(g, 3).unwrap());
        }
        assert!(!f3.contains(&f2.generators[0]));
    }
}
