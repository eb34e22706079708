use std::collections::BTreeMap;
use std::sync::Arc;

use crate::config::RunConfig;
use crate::error::{Result, WachError};
use crate::matrix::Mat;
use crate::relative::{RelBase, RelParams};
use crate::wach::WachModule;

const MAGIC: &str = "wach-lab module v1";

fn mat_section(out: &mut String, name: &str, m: &Mat<RelBase>) {
    out.push_str(name);
    out.push('\n');
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let x = m.get(i, j);
            if !x.is_zero() {
                out.push_str(&format!("  {} {} : {}\n", i + 1, j + 1, x.to_text()));
            }
        }
    }
}

/// Serializes a module together with every parameter needed to rebuild it.
pub fn write_module(w: &WachModule) -> String {
    let rp = &w.rp;
    let ring = &rp.ring;
    let mut out = format!("{MAGIC}\n");
    for (k, v) in [
        ("p", ring.p.to_string()),
        ("m", ring.m.to_string()),
        ("d", rp.d.to_string()),
        ("h", w.rank().to_string()),
        ("r1", w.r1.to_string()),
        ("N", ring.prec.to_string()),
        ("M", ring.series_deg.to_string()),
        ("M_PD", ring.pd_deg.to_string()),
        ("B", rp.box_bound.to_string()),
        ("I", rp.pd_index.to_string()),
        ("chi0", ring.chi0.residue().to_string()),
    ] {
        out.push_str(&format!("{k} = {v}\n"));
    }
    mat_section(&mut out, "[phi]", &w.phi);
    for (s, g) in w.g.iter().enumerate() {
        mat_section(&mut out, &format!("[g{s}]"), g);
    }
    if let Some(psi) = &w.psi {
        mat_section(&mut out, "[psi]", psi);
    }
    out
}

fn perr(line: usize, msg: impl std::fmt::Display) -> WachError {
    WachError::Parse(format!("line {line}: {msg}"))
}

/// Header values of a module file, as a run configuration.
pub fn module_config(text: &str) -> Result<(RunConfig, usize, u32)> {
    let mut header = BTreeMap::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(perr(1, format!("expected {MAGIC:?}"))),
    }
    for (no, line) in lines {
        let line = line.trim();
        if line.starts_with('[') {
            break;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| perr(no + 1, "expected key = value"))?;
        header.insert(k.trim().to_string(), (no + 1, v.trim().to_string()));
    }
    let get = |k: &str| -> Result<&(usize, String)> {
        header
            .get(k)
            .ok_or_else(|| WachError::Parse(format!("header is missing {k}")))
    };
    let mut cfg = RunConfig::default();
    for (key, cfg_key) in [
        ("p", "p"),
        ("m", "m"),
        ("d", "d"),
        ("N", "prec"),
        ("M", "series-deg"),
        ("B", "box"),
        ("I", "pd-index"),
    ] {
        let (no, v) = get(key)?;
        cfg.set(cfg_key, v).map_err(|e| perr(*no, e))?;
    }
    cfg.pd_deg = cfg.pd_deg.min(cfg.series_deg);
    for (key, cfg_key) in [("M_PD", "pd-deg"), ("chi0", "chi0")] {
        if let Some((no, v)) = header.get(key) {
            cfg.set(cfg_key, v).map_err(|e| perr(*no, e))?;
        }
    }
    let (no, h) = get("h")?;
    let h: usize = h.parse().map_err(|_| perr(*no, "bad rank"))?;
    let (no, r1) = get("r1")?;
    let r1: u32 = r1.parse().map_err(|_| perr(*no, "bad height"))?;
    if h == 0 {
        return Err(perr(*no, "rank must be positive"));
    }
    Ok((cfg, h, r1))
}

/// Parses a module file. The header determines the parameters.
pub fn read_module(text: &str) -> Result<WachModule> {
    let (cfg, h, r1) = module_config(text)?;
    let rp = cfg.rel()?;
    read_module_with(text, &rp, h, r1)
}

fn read_module_with(text: &str, rp: &Arc<RelParams>, h: usize, r1: u32) -> Result<WachModule> {
    let zero = RelBase::zero(rp);
    let mut sections: BTreeMap<String, Mat<RelBase>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (no, line) in text.lines().enumerate() {
        let no = no + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let ok = name == "phi"
                || name == "psi"
                || name
                    .strip_prefix('g')
                    .and_then(|s| s.parse::<usize>().ok())
                    .is_some_and(|s| s <= rp.d);
            if !ok {
                return Err(perr(no, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(perr(no, format!("duplicate section [{name}]")));
            }
            sections.insert(name.to_string(), Mat::from_fn(h, h, |_, _| zero.clone()));
            current = Some(name.to_string());
            continue;
        }
        let Some(name) = &current else { continue };
        let (idx, value) = line
            .split_once(':')
            .ok_or_else(|| perr(no, "expected `i j : entry`"))?;
        let ij: Vec<usize> = idx
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| perr(no, "bad entry position"))?;
        let (i, j) = match ij[..] {
            [i, j] if (1..=h).contains(&i) && (1..=h).contains(&j) => (i - 1, j - 1),
            _ => return Err(perr(no, format!("entry position outside 1..={h}"))),
        };
        let x = RelBase::parse(rp, value).map_err(|e| perr(no, e))?;
        sections.get_mut(name).expect("section exists").set(i, j, x);
    }
    let mut take = |name: &str| {
        sections
            .remove(name)
            .ok_or_else(|| WachError::Parse(format!("missing section [{name}]")))
    };
    let phi = take("phi")?;
    let g = (0..=rp.d)
        .map(|s| take(&format!("g{s}")))
        .collect::<Result<Vec<_>>>()?;
    let psi = sections.remove("psi");
    let mut w = WachModule::new(rp, r1, phi, g)?;
    w.psi = psi;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;

    fn rp(p: u64, m: u32, d: usize) -> Arc<RelParams> {
        let mut cfg = RunConfig::default();
        cfg.p = p;
        cfg.m = m;
        cfg.d = d;
        cfg.prec = 6;
        cfg.rel().unwrap()
    }

    fn same(a: &WachModule, b: &WachModule) -> bool {
        a.rp.same_as(&b.rp)
            && a.r1 == b.r1
            && a.phi.eq_to_prec(&b.phi)
            && a.g.len() == b.g.len()
            && a.g.iter().zip(&b.g).all(|(x, y)| x.eq_to_prec(y))
            && a.psi.is_some() == b.psi.is_some()
    }

    #[test]
    fn fixtures_round_trip() {
        for (p, m, d, fx) in [
            (3, 1, 1, "twist:1"),
            (2, 2, 1, "sum:1,2"),
            (3, 1, 2, "corrupt-commutation"),
            (3, 1, 1, "gauge:1"),
        ] {
            let w = fx.parse::<Fixture>().unwrap().module(&rp(p, m, d)).unwrap();
            let text = write_module(&w);
            let back = read_module(&text).unwrap();
            assert!(same(&w, &back), "{fx}");
            assert_eq!(write_module(&back), text);
        }
    }

    #[test]
    fn rejects_malformed_files() {
        let w = Fixture::Twist(1).module(&rp(3, 1, 1)).unwrap();
        let text = write_module(&w);
        assert!(read_module(&text.replace("wach-lab", "other")).is_err());
        assert!(read_module(&text.replace("[g1]", "[g7]")).is_err());
        assert!(read_module(&text.replace("h = 1", "h = 0")).is_err());
        assert!(read_module(&text.replace("B = 8", "")).is_err());
        assert!(read_module(&text.replace("[g0]\n", "")).is_err());
        assert!(read_module(&format!("{text}  1 2 : 1*u^0\n")).is_err());
    }
}
