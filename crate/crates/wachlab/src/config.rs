use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::cyclo::{Chi0Policy, RingParams};
use crate::error::{Result, WachError};
use crate::relative::RelParams;

/// Parameters of one run. Field names double as config-file keys (with `-` for `_`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u64,
    pub m: u32,
    pub d: usize,
    /// Absolute p-adic precision `N`.
    pub prec: u32,
    /// Series truncation degree `M`.
    pub series_deg: usize,
    /// PD truncation degree `M_PD`.
    pub pd_deg: usize,
    /// Laurent exponent box `B`.
    pub box_bound: i32,
    /// PD index bound `I`.
    pub pd_index: usize,
    /// `default`, `exp`, or an integer representative.
    pub chi0: String,
    pub fixture: Option<String>,
    pub module_file: Option<String>,
    pub out: Option<String>,
    pub filter: Option<String>,
    pub push_oa: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 3,
            m: 1,
            d: 1,
            prec: 8,
            series_deg: 64,
            pd_deg: 40,
            box_bound: 8,
            pd_index: 8,
            chi0: "default".into(),
            fixture: None,
            module_file: None,
            out: None,
            filter: None,
            push_oa: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "p",
    "m",
    "d",
    "prec",
    "series-deg",
    "pd-deg",
    "box",
    "pd-index",
    "chi0",
    "fixture",
    "module-file",
    "out",
    "filter",
    "push-oa",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| WachError::Config(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let opt = || if v.is_empty() { None } else { Some(v.to_string()) };
        match key.trim().replace('_', "-").as_str() {
            "p" => self.p = num(key, v)?,
            "m" => self.m = num(key, v)?,
            "d" => self.d = num(key, v)?,
            "prec" | "n" => self.prec = num(key, v)?,
            "series-deg" => self.series_deg = num(key, v)?,
            "pd-deg" => self.pd_deg = num(key, v)?,
            "box" => self.box_bound = num(key, v)?,
            "pd-index" => self.pd_index = num(key, v)?,
            "chi0" => self.chi0 = v.to_string(),
            "fixture" => self.fixture = opt(),
            "module-file" => self.module_file = opt(),
            "out" => self.out = opt(),
            "filter" => self.filter = opt(),
            "push-oa" => {
                self.push_oa = match v {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(WachError::Config(format!("push-oa: expected a boolean, got {v:?}"))),
                }
            }
            other => return Err(WachError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// `key = value` lines; `#` starts a comment; later lines override earlier ones.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| WachError::Config(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v)
                .map_err(|e| WachError::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("p", self.p.to_string());
        put("m", self.m.to_string());
        put("d", self.d.to_string());
        put("prec", self.prec.to_string());
        put("series-deg", self.series_deg.to_string());
        put("pd-deg", self.pd_deg.to_string());
        put("box", self.box_bound.to_string());
        put("pd-index", self.pd_index.to_string());
        put("chi0", self.chi0.clone());
        for (k, v) in [
            ("fixture", &self.fixture),
            ("module-file", &self.module_file),
            ("out", &self.out),
            ("filter", &self.filter),
        ] {
            if let Some(v) = v {
                put(k, v.clone());
            }
        }
        put("push-oa", self.push_oa.to_string());
        out
    }

    pub fn chi0_policy(&self) -> Result<Chi0Policy> {
        match self.chi0.trim() {
            "" | "default" => Ok(Chi0Policy::Default),
            "exp" => Ok(Chi0Policy::Exp),
            s => s
                .parse::<BigInt>()
                .map(Chi0Policy::Value)
                .map_err(|_| WachError::Config(format!("chi0: expected default, exp or an integer, got {s:?}"))),
        }
    }

    pub fn ring(&self) -> Result<Arc<RingParams>> {
        RingParams::new(
            self.p,
            self.m,
            self.prec,
            self.series_deg,
            self.pd_deg,
            &self.chi0_policy()?,
        )
    }

    pub fn rel(&self) -> Result<Arc<RelParams>> {
        RelParams::new(&self.ring()?, self.d, self.box_bound, self.pd_index)
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        self.rel()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut c = RunConfig::default();
        c.apply_kv_text("p = 5\n# comment\nprec=6  # inline\nfixture = twist:2\npush-oa = yes\n")
            .unwrap();
        assert_eq!((c.p, c.prec, c.fixture.as_deref(), c.push_oa), (5, 6, Some("twist:2"), true));
        let mut back = RunConfig::default();
        back.apply_kv_text(&c.to_kv_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn kv_errors_name_the_line() {
        let mut c = RunConfig::default();
        let err = c.apply_kv_text("p = 3\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(c.apply_kv_text("p three").is_err());
        assert!(c.set("prec", "-1").is_err());
    }

    #[test]
    fn exp_policy_diverges_for_p_two_level_one() {
        let mut c = RunConfig::default();
        c.set("p", "2").unwrap();
        c.set("chi0", "exp").unwrap();
        assert!(c.validate().is_err());
        c.set("m", "2").unwrap();
        assert!(c.validate().is_ok());
    }
}
