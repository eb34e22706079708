use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::cyclo::{CycloSeries, RingParams};
use crate::descent::{compare_dcris, descend, divisibility_criterion, divisibility_witness, vec_eq};
use crate::descent::{Certificate, Descent, DescentOptions, InvariantBasis};
use crate::error::{Result, WachError};
use crate::fixtures::Fixture;
use crate::padic::{val_factorial, PadicScalar};
use crate::pd::{invert_t_over_pi, t_over_pi, PDSeries};
use crate::random;
use crate::relative::maps::{connection, fil_degree_rel, frobenius, gamma, gamma0, gamma_geom};
use crate::relative::{Flavor, RelBase, RelPD, RelParams};
use crate::report::{Report, Status};
use crate::wach::{gamma0_pi_ratio, xi_series, WachModule};

pub const MODULES: &[&str] = &[
    "padic-core",
    "cyclo-series",
    "pd-ring",
    "relative-ring",
    "wach-modules",
    "descent",
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub modules: Vec<&'static str>,
    pub status: Status,
    pub checks: Vec<Certificate>,
    pub ledgers: Map<String, Value>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub status: Status,
    pub passed: usize,
    pub failed: usize,
    pub exhausted: usize,
    pub criteria: Vec<CriterionResult>,
}

/// Accumulates checks for one criterion.
pub struct Out {
    status: Status,
    checks: Vec<Certificate>,
    ledgers: Map<String, Value>,
}

impl Out {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        if !passed {
            self.status = self.status.combine(Status::CertifiedFailure);
        }
        self.checks.push(Certificate::new(name, passed, detail));
    }

    fn error(&mut self, name: impl Into<String>, e: &WachError) {
        let s = match Status::of_error(e) {
            Status::UsageError => Status::CertifiedFailure,
            s => s,
        };
        self.status = self.status.combine(s);
        self.checks.push(Certificate::new(name, false, format!("{}: {e}", s.label())));
    }

    fn timed(&mut self, name: impl Into<String>, start: Instant, limit_secs: u64) {
        let ok = start.elapsed() <= Duration::from_secs(limit_secs);
        self.check(name, ok, format!("limit {limit_secs} s"));
    }

    fn ledger(&mut self, name: impl Into<String>, v: Value) {
        self.ledgers.insert(name.into(), v);
    }

    /// Records `f`'s failures under `name`, with the first counterexample as detail.
    fn all(&mut self, name: impl Into<String>, count: usize, mut f: impl FnMut(usize) -> Result<Option<String>>) {
        let name = name.into();
        for i in 0..count {
            match f(i) {
                Ok(None) => {}
                Ok(Some(why)) => return self.check(name, false, format!("case {i}: {why}")),
                Err(e) => return self.error(name, &e),
            }
        }
        self.check(name, true, format!("{count} cases"));
    }
}

/// Builds parameters for a criterion from the run configuration.
pub struct Ctx {
    pub cfg: RunConfig,
}

impl Ctx {
    /// Precision: the criterion's nominal value, capped by `--prec`.
    pub fn prec(&self, nominal: u32) -> u32 {
        nominal.min(self.cfg.prec)
    }

    pub fn ring(&self, p: u64, m: u32, prec: u32) -> Result<Arc<RingParams>> {
        let mut c = self.cfg.clone();
        c.p = p;
        c.m = m;
        c.prec = prec;
        c.ring()
    }

    pub fn rel(&self, p: u64, m: u32, d: usize, prec: u32) -> Result<Arc<RelParams>> {
        RelParams::new(&self.ring(p, m, prec)?, d, self.cfg.box_bound, self.cfg.pd_index)
    }

    pub fn rel_index(&self, p: u64, m: u32, d: usize, prec: u32, index: usize) -> Result<Arc<RelParams>> {
        RelParams::new(&self.ring(p, m, prec)?, d, self.cfg.box_bound, index)
    }
}

type PartFn = fn(&Ctx, &mut Out) -> Result<()>;

struct Criterion {
    id: u32,
    title: &'static str,
    parts: &'static [(&'static str, PartFn)],
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "factorial valuation matches the Legendre sum",
        parts: &[("padic-core", legendre)],
    },
    Criterion {
        id: 2,
        title: "t/pi is a unit with the computed inverse",
        parts: &[("pd-ring", unit)],
    },
    Criterion {
        id: 3,
        title: "Frobenius commutes with Gamma and Gamma composes",
        parts: &[
            ("cyclo-series", commute_cyclo),
            ("relative-ring", commute_relative),
            ("wach-modules", commute_modules),
        ],
    },
    Criterion {
        id: 4,
        title: "semidirect relation between gamma_0 and gamma_i",
        parts: &[("relative-ring", semidirect)],
    },
    Criterion {
        id: 5,
        title: "rank-one descent reproduces (t/pi)^r",
        parts: &[("descent", rank_one)],
    },
    Criterion {
        id: 6,
        title: "descent respects tensor products and direct sums",
        parts: &[("descent", functoriality)],
    },
    Criterion {
        id: 7,
        title: "cross-generator consistency certificate",
        parts: &[("descent", consistency)],
    },
    Criterion {
        id: 8,
        title: "divisibility witness matches the coefficient criterion",
        parts: &[("descent", divisibility)],
    },
    Criterion {
        id: 9,
        title: "Wach filtration and the twist identity",
        parts: &[("wach-modules", filtration)],
    },
    Criterion {
        id: 10,
        title: "connection: Leibniz, constants, integrability, Griffiths",
        parts: &[("relative-ring", connection_checks)],
    },
];

fn selected<'a>(filter: Option<&str>) -> Result<Vec<(&'a Criterion, Vec<(&'static str, PartFn)>)>> {
    let mut out = Vec::new();
    for c in CRITERIA {
        let parts: Vec<_> = match filter {
            None => c.parts.to_vec(),
            Some(f) if f.trim() == c.id.to_string() => c.parts.to_vec(),
            Some(f) => c.parts.iter().filter(|(tag, _)| *tag == f.trim()).copied().collect(),
        };
        if !parts.is_empty() {
            out.push((c, parts));
        }
    }
    if out.is_empty() {
        return Err(WachError::Config(format!(
            "filter {:?} matches nothing; use a criterion number 1-10 or one of {}",
            filter.unwrap_or(""),
            MODULES.join(", ")
        )));
    }
    Ok(out)
}

pub fn run_suite(cfg: &RunConfig) -> Result<SuiteSummary> {
    cfg.chi0_policy()?;
    let ctx = Ctx { cfg: cfg.clone() };
    let mut criteria = Vec::new();
    for (c, parts) in selected(cfg.filter.as_deref())? {
        let start = Instant::now();
        let mut out = Out {
            status: Status::Success,
            checks: Vec::new(),
            ledgers: Map::new(),
        };
        let mut modules = Vec::new();
        for (tag, f) in parts {
            if !modules.contains(&tag) {
                modules.push(tag);
            }
            if let Err(e) = f(&ctx, &mut out) {
                out.error(format!("{tag}:aborted"), &e);
            }
        }
        criteria.push(CriterionResult {
            id: c.id,
            title: c.title,
            modules,
            status: out.status,
            checks: out.checks,
            ledgers: out.ledgers,
            elapsed: start.elapsed(),
        });
    }
    let status = criteria.iter().fold(Status::Success, |s, c| s.combine(c.status));
    let count = |s: Status| criteria.iter().filter(|c| c.status == s).count();
    Ok(SuiteSummary {
        status,
        passed: count(Status::Success),
        failed: count(Status::CertifiedFailure),
        exhausted: count(Status::PrecisionExhausted),
        criteria,
    })
}

pub fn render(summary: &SuiteSummary) -> String {
    let mut s = String::new();
    for c in &summary.criteria {
        s.push_str(&format!(
            "criterion {:>2} [{}] {} ({:.2} s): {}\n",
            c.id,
            c.modules.join(","),
            c.status.label(),
            c.elapsed.as_secs_f64(),
            c.title
        ));
        for k in c.checks.iter().filter(|k| !k.passed) {
            s.push_str(&format!("    {}: {}\n", k.name, k.detail));
        }
    }
    s.push_str(&format!(
        "{} passed, {} failed, {} precision-exhausted\n",
        summary.passed, summary.failed, summary.exhausted
    ));
    s
}

pub fn suite_report(cfg: &RunConfig) -> Report {
    match run_suite(cfg) {
        Ok(summary) => {
            let ledger: Map<String, Value> = summary
                .criteria
                .iter()
                .filter(|c| !c.ledgers.is_empty())
                .map(|c| (c.id.to_string(), Value::Object(c.ledgers.clone())))
                .collect();
            let text = render(&summary);
            let result = serde_json::to_value(&summary).expect("summary serializes");
            Report::new("suite", cfg, summary.status, Value::Object(ledger), result, text)
        }
        Err(e) => Report::from_error("suite", cfg, &e),
    }
}

fn legendre_oracle(n: u64, p: u64) -> u64 {
    let mut s = 0;
    let mut q = p;
    while q <= n {
        s += n / q;
        q *= p;
    }
    s
}

fn legendre(_: &Ctx, out: &mut Out) -> Result<()> {
    let start = Instant::now();
    for p in [2u64, 3, 5, 7] {
        let bad = (0..=10_000u64).find(|&n| val_factorial(n, p) != legendre_oracle(n, p));
        out.check(
            format!("legendre:p{p}"),
            bad.is_none(),
            match bad {
                None => "n = 0..=10000".to_string(),
                Some(n) => format!("n = {n}"),
            },
        );
    }
    out.timed("time", start, 1);
    Ok(())
}

fn unit(ctx: &Ctx, out: &mut Out) -> Result<()> {
    for (p, m) in [(2u64, 2u32), (3, 1), (3, 2), (5, 1)] {
        let start = Instant::now();
        let name = format!("unit:({p},{m})");
        let res = (|| -> Result<_> {
            let ring = ctx.ring(p, m, ctx.prec(8))?;
            let inv = invert_t_over_pi(&ring)?;
            let prod = t_over_pi(&ring)?.mul(&inv.value);
            Ok((inv, prod.sub(&PDSeries::one(&ring))))
        })();
        match res {
            Ok((inv, diff)) => {
                let bad: Vec<usize> = (0..diff.coeffs().len()).filter(|&k| !diff.coeff(k).is_zero()).collect();
                out.check(
                    &name,
                    bad.is_empty(),
                    format!(
                        "cutoff {}, {} terms, surviving precision {}{}",
                        inv.cutoff_bound,
                        inv.terms_used,
                        diff.min_prec(),
                        if bad.is_empty() { String::new() } else { format!(", nonzero at {bad:?}") }
                    ),
                );
                out.ledger(
                    &name,
                    json!({"cutoff": inv.cutoff_bound, "terms_used": inv.terms_used, "surviving": diff.min_prec()}),
                );
            }
            Err(e) => out.error(&name, &e),
        }
        out.timed(format!("time:({p},{m})"), start, 5);
    }
    Ok(())
}

fn character<R: Rng>(rng: &mut R, ring: &RingParams) -> PadicScalar {
    let pm = ring.p_m() as i64;
    let work = ring.chi0.prec();
    PadicScalar::from_i64(ring.p, 1 + pm * rng.gen_range(1..50), work)
}

fn commute_cyclo(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let rings = [ctx.ring(3, 1, ctx.prec(8))?, ctx.ring(2, 2, ctx.prec(8))?];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut xs = Vec::new();
    for i in 0..200 {
        let ring = &rings[i % 2];
        let len = rng.gen_range(1..10);
        xs.push((random::series(&mut rng, ring, len), character(&mut rng, ring), character(&mut rng, ring)));
    }
    out.all("cyclo:phi-gamma0", 200, |i| {
        let (x, _, _) = &xs[i];
        let c = &x.params().chi0;
        Ok((!x.gamma0(c)?.frobenius().eq_to_prec(&x.frobenius().gamma0(c)?)).then(|| x.to_text()))
    });
    out.all("cyclo:gamma0-composition", 200, |i| {
        let (x, a, b) = &xs[i];
        let lhs = x.gamma0(b)?.gamma0(a)?;
        Ok((!lhs.eq_to_prec(&x.gamma0(&a.mul_ref(b))?)).then(|| x.to_text()))
    });
    Ok(())
}

fn commute_relative(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let rp = ctx.rel_index(3, 1, 2, ctx.prec(6), 6)?;
    let f = Flavor::SHat(1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<RelPD> = (0..200).map(|_| random::rel(&mut rng, &rp, f, 2, 1)).collect();
    out.all("relative:phi-gamma", 200, |i| {
        let s = i % 3;
        let x = &xs[i];
        let lhs = frobenius(&gamma(x, s)?)?;
        Ok((!lhs.eq_to_prec(&gamma(&frobenius(x)?, s)?)).then(|| format!("s = {s}: {}", x.to_text())))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    out.all("relative:gamma-composition", 200, |i| {
        let x = &xs[i];
        if i % 3 == 0 {
            let (a, b) = (character(&mut rng, &rp.ring), character(&mut rng, &rp.ring));
            let lhs = gamma0(&gamma0(x, &b)?, &a)?;
            return Ok((!lhs.eq_to_prec(&gamma0(x, &a.mul_ref(&b))?)).then(|| x.to_text()));
        }
        let s = i % 3;
        let (a, b) = (rng.gen_range(-5i64..=5), rng.gen_range(-5i64..=5));
        let lhs = gamma_geom(&gamma_geom(x, s, &BigInt::from(a))?, s, &BigInt::from(b))?;
        let rhs = gamma_geom(x, s, &BigInt::from(a + b))?;
        Ok((!lhs.eq_to_prec(&rhs)).then(|| format!("s = {s}, {a}+{b}: {}", x.to_text())))
    });
    Ok(())
}

fn commute_modules(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let n = ctx.prec(8);
    let mut mods = Vec::new();
    for (p, m) in [(3u64, 1u32), (2, 2)] {
        let rp = ctx.rel(p, m, 1, n)?;
        for r in [1u32, 2] {
            mods.push((r, Fixture::Twist(r).module(&rp)?));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let xs: Vec<Vec<RelBase>> = (0..200).map(|i| random::base_vec(&mut rng, &mods[i % mods.len()].1.rp, 1)).collect();
    out.all("module:phi-gamma", 200, |i| {
        let (_, w) = &mods[i % mods.len()];
        let x = &xs[i];
        for s in 0..=w.rp.d {
            let lhs = w.frobenius_vec(&w.gamma_vec(x, s)?)?;
            let rhs = w.gamma_vec(&w.frobenius_vec(x)?, s)?;
            if !lhs.iter().zip(&rhs).all(|(a, b)| a.eq_to_prec(b)) {
                return Ok(Some(format!("s = {s}")));
            }
        }
        Ok(None)
    });
    out.all("module:gamma-composition", 200, |i| {
        let (r, w) = &mods[i % mods.len()];
        let rp = &w.rp;
        let x = &xs[i];
        let c = &rp.ring.chi0;
        let c2 = c.mul_ref(c);
        let g = gamma0_pi_ratio(rp, &c2).pow(*r as u64).scale(&c2.invert()?.pow(*r as u64));
        let want = x[0].gamma0(&c2)?.mul_series(&g);
        let got = w.gamma_vec(&w.gamma_vec(x, 0)?, 0)?;
        if !got[0].eq_to_prec(&want) {
            return Ok(Some("gamma_0 twice".into()));
        }
        let want = x[0].gamma_geom(1, &BigInt::from(2));
        let got = w.gamma_vec(&w.gamma_vec(x, 1)?, 1)?;
        Ok((!got[0].eq_to_prec(&want)).then(|| "gamma_1 twice".into()))
    });
    Ok(())
}

fn semidirect(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (p, m, d) in [(3u64, 1u32, 2usize), (2, 2, 1)] {
        let rp = ctx.rel_index(p, m, d, ctx.prec(6), 6)?;
        let c = rp.ring.chi0.clone();
        let rep: BigInt = c.lift();
        let xs: Vec<RelPD> = (0..25).map(|_| random::rel(&mut rng, &rp, Flavor::SHat(m), 2, 1)).collect();
        out.all(format!("semidirect:({p},{m},{d})"), 25, |i| {
            let s = 1 + i % d;
            let x = &xs[i];
            let lhs = gamma0(&gamma(x, s)?, &c)?;
            let rhs = gamma_geom(&gamma0(x, &c)?, s, &rep)?;
            Ok((!lhs.eq_to_prec(&rhs)).then(|| format!("s = {s}: {}", x.to_text())))
        });
        out.ledger(
            format!("semidirect:({p},{m},{d})"),
            json!({"representative": rep.to_string(), "representative_precision": c.prec()}),
        );
    }
    Ok(())
}

fn descend_fixture(rp: &Arc<RelParams>, fx: &Fixture) -> Result<(WachModule, InvariantBasis)> {
    let w = fx.module(rp)?;
    let got = descend(&w, &DescentOptions::default())?;
    Ok((w, got))
}

fn rank_one(ctx: &Ctx, out: &mut Out) -> Result<()> {
    for (p, m, r) in [(3u64, 1u32, 1u32), (2, 2, 1), (3, 1, 2), (2, 2, 2)] {
        let name = format!("twist{r}:({p},{m},1)");
        let start = Instant::now();
        let res = (|| -> Result<_> {
            let rp = ctx.rel(p, m, 1, ctx.prec(6))?;
            let fx = Fixture::Twist(r);
            let (w, got) = descend_fixture(&rp, &fx)?;
            let want = fx.closed_form(&rp)?.expect("twists have closed forms");
            Ok((compare_dcris(&w, &got, &want), got))
        })();
        match res {
            Ok((cmp, got)) => {
                let failed: Vec<&str> = got
                    .certificates
                    .iter()
                    .chain(&cmp.checks)
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                out.check(
                    &name,
                    failed.is_empty(),
                    if failed.is_empty() {
                        format!("matches (t/pi)^{r} to surviving precision {}", cmp.surviving)
                    } else {
                        format!("failed: {}", failed.join(", "))
                    },
                );
                out.ledger(&name, serde_json::to_value(&got.ledger).expect("ledger serializes"));
            }
            Err(e) => {
                out.error(&name, &e);
                if matches!(e, WachError::PrecisionExhausted(_)) {
                    let n = ctx.prec(6);
                    let first = (n + 1..=n + 4).find(|&k| {
                        ctx.rel(p, m, 1, k)
                            .and_then(|rp| descend_fixture(&rp, &Fixture::Twist(r)))
                            .is_ok_and(|(_, got)| got.all_pass())
                    });
                    out.ledger(&name, json!({"exhausted_at_precision": n, "first_certifying_precision": first}));
                }
            }
        }
        out.timed(format!("time:{name}"), start, 10);
    }
    Ok(())
}

fn functoriality(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let rp = ctx.rel(3, 1, 1, ctx.prec(6))?;
    let (_, t2) = descend_fixture(&rp, &Fixture::Twist(2))?;
    let (_, tt) = descend_fixture(&rp, &Fixture::Tensor(1, 1))?;
    out.check(
        "tensor:1,1 = twist:2",
        tt.all_pass() && t2.all_pass() && tt.f.len() == 1 && vec_eq(&tt.f[0], &t2.f[0]),
        "e (x) e identified with e",
    );
    let (_, t1) = descend_fixture(&rp, &Fixture::Twist(1))?;
    let (_, sum) = descend_fixture(&rp, &Fixture::Sum(1, 2))?;
    let zero = RelPD::zero(&rp, sum.a.get(0, 0).flavor());
    let blocks = sum.all_pass()
        && sum.a.get(0, 0).eq_to_prec(t1.a.get(0, 0))
        && sum.a.get(1, 1).eq_to_prec(t2.a.get(0, 0))
        && sum.a.get(0, 1).eq_to_prec(&zero)
        && sum.a.get(1, 0).eq_to_prec(&zero);
    out.check("sum:1,2 blockwise", blocks, "A(sum) = diag(A(twist:1), A(twist:2))");
    out.ledger("tensor:1,1", serde_json::to_value(&tt.ledger).expect("ledger serializes"));
    out.ledger("sum:1,2", serde_json::to_value(&sum.ledger).expect("ledger serializes"));
    Ok(())
}

fn consistency(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let rp = ctx.rel(3, 1, 2, ctx.prec(6))?;
    for fx in [Fixture::Twist(1), Fixture::Gauge(1), Fixture::Sum(0, 1)] {
        let name = format!("{fx}:d2");
        match descend_fixture(&rp, &fx) {
            Ok((_, got)) => {
                let cert = got.certificates.iter().find(|c| c.name == "cross-generator-consistency");
                out.check(
                    &name,
                    cert.is_some_and(|c| c.passed) && got.all_pass(),
                    cert.map_or("certificate missing".to_string(), |c| c.detail.clone()),
                );
                out.ledger(&name, serde_json::to_value(&got.ledger).expect("ledger serializes"));
            }
            Err(e) => out.error(&name, &e),
        }
    }
    match descend_fixture(&rp, &Fixture::CorruptCommutation) {
        Err(WachError::ConsistencyViolation { degree, index, .. }) => out.check(
            "corrupt-commutation",
            true,
            format!("ConsistencyViolation at degree {degree}, index {index:?}"),
        ),
        Err(e) => out.check("corrupt-commutation", false, format!("unexpected error: {e}")),
        Ok(_) => out.check("corrupt-commutation", false, "descent succeeded on a corrupt module"),
    }
    Ok(())
}

fn divisibility(ctx: &Ctx, out: &mut Out) -> Result<()> {
    for (p, m, d) in [(3u64, 1u32, 1usize), (3, 1, 2), (2, 2, 2)] {
        let rp = ctx.rel_index(p, m, d, ctx.prec(6), 6)?;
        let w = Fixture::Gauge(1).module(&rp)?;
        let dctx = Descent::new(&w)?;
        let mut rng = ChaCha8Rng::seed_from_u64(7 + p + d as u64);
        let (mut yes, mut no) = (0, 0);
        out.all(format!("witness:({p},{m},{d})"), 100, |_| {
            let (x, s) = random::divisibility_instance(&mut rng, &rp);
            let want = divisibility_criterion(&x, s);
            if want {
                yes += 1
            } else {
                no += 1
            }
            Ok((divisibility_witness(&dctx, &x, s)? != want).then(|| format!("s = {s}, criterion says {want}")))
        });
        out.ledger(format!("witness:({p},{m},{d})"), json!({"divisible": yes, "not_divisible": no}));
    }
    Ok(())
}

fn filtration(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let rp = ctx.rel(3, 1, 1, ctx.prec(8))?;
    let mut mods: Vec<(String, WachModule)> = Vec::new();
    for fx in ["twist:0", "twist:1", "twist:2", "twist:3", "sum:1,2", "tensor:1,1", "gauge:1"] {
        mods.push((fx.to_string(), fx.parse::<Fixture>()?.module(&rp)?));
    }
    for (name, w) in &mods {
        let mut ok = true;
        let mut prev: Option<Vec<u32>> = None;
        for k in -3..=4i64 {
            let fk = w.fil_wach(k)?;
            let next = w.fil_wach(k + 1)?;
            for g in &next.generators {
                ok &= w.in_fil(g, k)?;
            }
            if let Some(prev) = &prev {
                ok &= prev.iter().zip(&fk.exponents).all(|(a, b)| a <= b);
            }
            prev = Some(fk.exponents);
        }
        out.check(format!("decreasing:{name}"), ok, "Fil^(k+1) in Fil^k for k = -3..=4");
        out.check(format!("fil0:{name}"), w.fil_wach(0)?.is_whole_module(), "Fil^0 = N");
    }
    let t1 = &mods[1].1;
    out.check("fil1:twist:1", t1.fil_wach(1)?.is_whole_module(), "Fil^1 = N");
    let w0 = &mods[0].1;
    let xi = RelBase::from_series(&rp, xi_series(&rp));
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut ok = true;
    let mut first_bad = None;
    for r in 0..=2u32 {
        let wr = &mods[r as usize].1;
        let t1r = t1.tensor(wr)?;
        for k in -3..=3i64 {
            ok &= wr.fil_wach(k)?.exponents == w0.fil_wach(k - r as i64)?.exponents;
            for _ in 0..6 {
                let j = rng.gen_range(0..4u64);
                let x = vec![random::base(&mut rng, &rp, 1, 2, 1).mul(&xi.pow(j)?)?];
                let a = wr.in_fil(&x, k)? == w0.in_fil(&x, k - r as i64)?;
                let b = t1r.in_fil(&x, k)? == t1.in_fil(&x, k - r as i64)?;
                if !(a && b) && first_bad.is_none() {
                    first_bad = Some(format!("r = {r}, k = {k}, x = {}", x[0]));
                }
                ok &= a && b;
            }
        }
    }
    out.check(
        "twist-identity",
        ok && first_bad.is_none(),
        first_bad.unwrap_or_else(|| "r = 0..=2, k = -3..=3".into()),
    );
    Ok(())
}

fn connection_checks(ctx: &Ctx, out: &mut Out) -> Result<()> {
    let rp = ctx.rel_index(3, 1, 2, ctx.prec(6), 6)?;
    let f = Flavor::OaPd;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let pairs: Vec<(RelPD, RelPD)> = (0..100)
        .map(|_| (random::rel(&mut rng, &rp, f, 2, 2), random::rel(&mut rng, &rp, f, 2, 2)))
        .collect();
    out.all("leibniz", 100, |i| {
        let (x, y) = &pairs[i];
        let top = x.index_bound() - 1;
        for s in 1..=2 {
            let lhs = connection(&x.mul(y)?, s)?.filter(|k| k.deg() < top);
            let rhs = connection(x, s)?
                .mul(y)?
                .add(&x.mul(&connection(y, s)?)?)
                .filter(|k| k.deg() < top);
            if !lhs.eq_to_prec(&rhs) {
                return Ok(Some(format!("i = {s}")));
            }
        }
        Ok(None)
    });
    out.all("constants", 100, |i| {
        let x = pairs[i].0.filter(|k| k.k[1..].iter().all(|&e| e == 0) && k.alpha.iter().all(|&a| a == 0));
        let x = x.add(&RelPD::from_base(
            &RelBase::from_series(&rp, CycloSeries::pi_element(&rp.ring)),
            f,
        )?);
        for s in 1..=2 {
            if !connection(&x, s)?.is_zero() {
                return Ok(Some(format!("i = {s}: {}", x.to_text())));
            }
        }
        Ok(None)
    });
    out.all("integrability", 100, |i| {
        let x = &pairs[i].0;
        let d12 = connection(&connection(x, 2)?, 1)?;
        let d21 = connection(&connection(x, 1)?, 2)?;
        Ok((!d12.eq_to_prec(&d21)).then(|| x.to_text()))
    });
    out.all("griffiths", 100, |i| {
        let x = &pairs[i].1;
        for (k, c) in x.terms() {
            let mono = RelPD::from_terms(&rp, f, rp.ring.prec, [(*k, c.clone())]);
            for s in 1..=2 {
                let dm = connection(&mono, s)?;
                if mono.is_zero() || dm.is_zero() {
                    continue;
                }
                if fil_degree_rel(&dm)? + 1 < fil_degree_rel(&mono)? {
                    return Ok(Some(mono.to_text()));
                }
            }
        }
        Ok(None)
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_parts() {
        let ids = |f: &str| -> Vec<(u32, Vec<&str>)> {
            selected(Some(f))
                .unwrap()
                .into_iter()
                .map(|(c, parts)| (c.id, parts.into_iter().map(|(t, _)| t).collect()))
                .collect()
        };
        assert_eq!(ids("pd-ring"), vec![(2, vec!["pd-ring"])]);
        assert_eq!(ids("cyclo-series"), vec![(3, vec!["cyclo-series"])]);
        assert_eq!(ids("3").len(), 1);
        assert_eq!(ids("3")[0].1.len(), 3);
        assert_eq!(ids("descent").iter().map(|x| x.0).collect::<Vec<_>>(), vec![5, 6, 7, 8]);
        assert!(selected(Some("nothing")).is_err());
    }

    #[test]
    fn pd_ring_suite_passes() {
        let cfg = RunConfig {
            filter: Some("pd-ring".into()),
            ..RunConfig::default()
        };
        let s = run_suite(&cfg).unwrap();
        assert_eq!(s.status, Status::Success, "{}", render(&s));
    }
}
