use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::descent::{compare_dcris, descend, DescentOptions, InvariantBasis};
use crate::error::{Result, WachError};
use crate::fixtures::Fixture;
use crate::io;
use crate::padic::PadicScalar;
use crate::pd::{invert_t_over_pi, t_over_pi, PDSeries};
use crate::report::{Report, Status};
use crate::suite;
use crate::wach::WachModule;

/// `residue mod p^N (val v)`.
pub fn scalar_text(c: &PadicScalar) -> String {
    format!("{} mod {}^{} (val {})", c.residue(), c.p(), c.prec(), c.val())
}

pub fn verify_unit(cfg: &RunConfig) -> Report {
    match verify_unit_inner(cfg) {
        Ok(r) => r,
        Err(e) => Report::from_error("verify-unit", cfg, &e),
    }
}

fn verify_unit_inner(cfg: &RunConfig) -> Result<Report> {
    let ring = cfg.ring()?;
    let inv = invert_t_over_pi(&ring)?;
    let prod = t_over_pi(&ring)?.mul(&inv.value);
    let diff = prod.sub(&PDSeries::one(&ring));
    let bad: Vec<usize> = (0..diff.coeffs().len()).filter(|&k| !diff.coeff(k).is_zero()).collect();
    let surviving = diff.min_prec();
    let status = if !bad.is_empty() {
        Status::CertifiedFailure
    } else if surviving == 0 {
        Status::PrecisionExhausted
    } else {
        Status::Success
    };
    let coeffs: Vec<Value> = inv
        .value
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| json!({"k": k, "value": scalar_text(c)}))
        .collect();
    let mut text = format!(
        "verify-unit p = {} m = {} e = {} N = {} M_PD = {}\n",
        ring.p, ring.m, ring.e, ring.prec, ring.pd_deg
    );
    text.push_str(&format!(
        "proof-bound cutoff {}, terms used {}\n  k  coefficient of b[k] in pi/t\n",
        inv.cutoff_bound, inv.terms_used
    ));
    for (k, c) in inv.value.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        text.push_str(&format!("{k:>3}  {}\n", scalar_text(c)));
    }
    text.push_str(&format!(
        "(t/pi)(pi/t) = 1: {}, surviving precision {surviving}\n{}\n",
        if bad.is_empty() { "yes".to_string() } else { format!("no, differs at {bad:?}") },
        status.label()
    ));
    let result = json!({
        "ring": {"p": ring.p, "m": ring.m, "e": ring.e, "N": ring.prec, "M_PD": ring.pd_deg},
        "cutoff_bound": inv.cutoff_bound,
        "terms_used": inv.terms_used,
        "coefficients": coeffs,
        "product": prod.to_text(),
        "product_is_one": bad.is_empty(),
        "mismatched_coefficients": bad,
    });
    let ledger = json!({
        "start_precision": ring.prec,
        "cutoff_bound": inv.cutoff_bound,
        "terms_used": inv.terms_used,
        "surviving": surviving,
    });
    Ok(Report::new("verify-unit", cfg, status, ledger, result, text))
}

/// The module a `descend` run works on, and the configuration it implies.
pub struct Source {
    pub label: String,
    pub module: WachModule,
    pub fixture: Option<Fixture>,
    pub config: RunConfig,
}

/// Resolves `--fixture` against `cfg`, or a module file's text against its own header.
pub fn load_source(cfg: &RunConfig, module_text: Option<&str>) -> Result<Source> {
    match (&cfg.fixture, module_text) {
        (Some(_), Some(_)) => Err(WachError::Config("give either a fixture or a module file, not both".into())),
        (None, None) => Err(WachError::Config("descend needs --fixture or --module-file".into())),
        (Some(fx), None) => {
            let fixture: Fixture = fx.parse()?;
            let mut config = cfg.clone();
            let mut label = format!("fixture {fixture}");
            if config.d < fixture.min_d() {
                config.d = fixture.min_d();
                label.push_str(&format!(" (d raised to {})", config.d));
            }
            let module = fixture.module(&config.rel()?)?;
            Ok(Source {
                label,
                module,
                fixture: Some(fixture),
                config,
            })
        }
        (None, Some(text)) => {
            let (header, _, _) = io::module_config(text)?;
            let module = io::read_module(text)?;
            let config = RunConfig {
                fixture: None,
                module_file: cfg.module_file.clone(),
                out: cfg.out.clone(),
                filter: cfg.filter.clone(),
                push_oa: cfg.push_oa,
                ..header
            };
            Ok(Source {
                label: format!("module file {}", cfg.module_file.as_deref().unwrap_or("<inline>")),
                module,
                fixture: None,
                config,
            })
        }
    }
}

fn basis_json(b: &InvariantBasis) -> Value {
    let vecs = |v: &[Vec<crate::relative::RelPD>]| -> Value {
        v.iter()
            .map(|f| f.iter().map(|x| x.to_text()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into()
    };
    json!({
        "f": vecs(&b.f),
        "geometric": vecs(&b.geometric),
        "oa": b.oa.as_deref().map(vecs),
        "precision_profiles": b.f.iter()
            .map(|f| f.iter().map(|x| x.prec_profile().to_vec()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn descend_cmd(cfg: &RunConfig, module_text: Option<&str>) -> Report {
    let src = match load_source(cfg, module_text) {
        Ok(s) => s,
        Err(e) => return Report::from_error("descend", cfg, &e),
    };
    let cfg = &src.config;
    let w = &src.module;
    let axioms = w.axioms_check();
    let mut text = format!(
        "descend {}: p = {} m = {} d = {} N = {} I = {}, rank {}, height {}\n",
        src.label,
        cfg.p,
        cfg.m,
        cfg.d,
        cfg.prec,
        cfg.pd_index,
        w.rank(),
        w.r1
    );
    for c in &axioms.checks {
        text.push_str(&format!("  axiom {}: {} ({})\n", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail));
    }
    let mut status = if axioms.all_pass() { Status::Success } else { Status::CertifiedFailure };
    let opts = DescentOptions {
        push_to_oa: cfg.push_oa,
        ..DescentOptions::default()
    };
    let module = json!({"source": src.label, "rank": w.rank(), "r1": w.r1});
    let got = match descend(w, &opts) {
        Ok(b) => b,
        Err(e) => {
            let mut r = Report::from_error("descend", cfg, &e);
            r.status = status.combine(Status::of_error(&e));
            r.exit_code = r.status.exit_code();
            r.result = json!({"module": module, "axioms": axioms.checks});
            r.text = format!("{text}{}", r.text);
            return r;
        }
    };
    for c in &got.certificates {
        if !c.passed {
            status = status.combine(Status::CertifiedFailure);
        }
        text.push_str(&format!("  certificate {}: {} ({})\n", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail));
    }
    let closed = match &src.fixture {
        Some(fx) => match fx.closed_form(&w.rp) {
            Ok(c) => c,
            Err(e) => return Report::from_error("descend", cfg, &e),
        },
        None => None,
    };
    let comparison = closed.map(|want| compare_dcris(w, &got, &want));
    if let Some(cmp) = &comparison {
        for c in &cmp.checks {
            if !c.passed {
                status = status.combine(Status::CertifiedFailure);
            }
            text.push_str(&format!("  compare {}: {} ({})\n", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail));
        }
    }
    for (j, f) in got.f.iter().enumerate() {
        for (i, x) in f.iter().enumerate() {
            text.push_str(&format!("  f{}[e{}] = {}\n", j + 1, i + 1, x.to_text()));
        }
    }
    let l = &got.ledger;
    text.push_str(&format!(
        "  ledger: start {}, arithmetic loss {}, surviving {} by degree {:?}\n{}\n",
        l.start_precision,
        l.arithmetic_loss,
        l.surviving,
        l.surviving_by_degree,
        status.label()
    ));
    let result = json!({
        "module": module,
        "axioms": axioms.checks,
        "certificates": got.certificates,
        "comparison": comparison,
        "basis": basis_json(&got),
    });
    let ledger = serde_json::to_value(&got.ledger).expect("ledger serializes");
    Report::new("descend", cfg, status, ledger, result, text)
}

pub fn suite_cmd(cfg: &RunConfig) -> Report {
    suite::suite_report(cfg)
}

/// Module file for a builtin fixture.
pub fn fixture_file(cfg: &RunConfig) -> Result<String> {
    let fx: Fixture = cfg
        .fixture
        .as_deref()
        .ok_or_else(|| WachError::Config("fixture needs --fixture".into()))?
        .parse()?;
    Ok(io::write_module(&fx.module(&cfg.rel()?)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kv: &str) -> RunConfig {
        let mut c = RunConfig::default();
        c.apply_kv_text(kv).unwrap();
        c
    }

    #[test]
    fn verify_unit_default_succeeds() {
        let r = verify_unit(&cfg("p = 3\nm = 1\nprec = 8\npd-deg = 40"));
        assert_eq!(r.exit_code, 0, "{}", r.text);
        assert!(r.text.contains("cutoff"));
        assert!(r.result["coefficients"].as_array().unwrap().len() > 3);
    }

    #[test]
    fn descend_fixture_and_file_agree() {
        let c = cfg("p = 3\nm = 1\nprec = 6\nfixture = twist:1");
        let a = descend_cmd(&c, None);
        assert_eq!(a.exit_code, 0, "{}", a.text);
        let text = fixture_file(&c).unwrap();
        let b = descend_cmd(&RunConfig::default(), Some(&text));
        assert_eq!(b.exit_code, 0, "{}", b.text);
        assert_eq!(a.result["basis"], b.result["basis"]);
        assert_eq!(a.ledger, b.ledger);
        assert!(b.result["comparison"].is_null());
    }

    #[test]
    fn descend_exit_codes() {
        let bad = descend_cmd(&cfg("prec = 6\nfixture = corrupt-commutation"), None);
        assert_eq!(bad.exit_code, 1);
        assert_eq!(bad.config.d, 2);
        assert!(bad.error.as_deref().unwrap().contains("consistency violation"));
        let low = descend_cmd(&cfg("prec = 2\nfixture = twist:1"), None);
        assert_eq!(low.exit_code, 3, "{}", low.text);
        let neither = descend_cmd(&RunConfig::default(), None);
        assert_eq!(neither.exit_code, 2);
    }

    #[test]
    fn reports_are_deterministic() {
        let c = cfg("prec = 6\nfixture = sum:1,2");
        assert_eq!(descend_cmd(&c, None).to_json(), descend_cmd(&c, None).to_json());
    }
}
