use serde_json::Value;
use wasm_bindgen::prelude::*;
use wachlab::commands;
use wachlab::config::RunConfig;
use wachlab::report::Report;

fn config(text: &str) -> Result<RunConfig, Report> {
    let mut cfg = RunConfig::default();
    cfg.apply_kv_text(text)
        .and_then(|_| cfg.validate())
        .map(|_| cfg.clone())
        .map_err(|e| Report::from_error("config", &cfg, &e))
}

/// The JSON report with its text rendering under `"text"`.
fn with_text(r: &Report) -> String {
    let mut v = serde_json::to_value(r).expect("report serializes");
    if let Value::Object(map) = &mut v {
        map.insert("text".into(), Value::String(r.text.clone()));
    }
    v.to_string()
}

/// Runs `verify-unit` on a key-value configuration.
#[wasm_bindgen]
pub fn verify_unit(config_text: &str) -> String {
    match config(config_text) {
        Ok(cfg) => with_text(&commands::verify_unit(&cfg)),
        Err(r) => with_text(&r),
    }
}

/// Runs `descend` on the configuration's `fixture`.
#[wasm_bindgen]
pub fn descend(config_text: &str) -> String {
    match config(config_text) {
        Ok(cfg) => with_text(&commands::descend_cmd(&cfg, None)),
        Err(r) => with_text(&r),
    }
}

/// `v_p(n!)`.
#[wasm_bindgen]
pub fn val_factorial(n: u32, p: u32) -> Result<u32, JsError> {
    if !wachlab::padic::is_prime(p as u64) {
        return Err(JsError::new(&format!("{p} is not prime")));
    }
    Ok(wachlab::padic::val_factorial(n as u64, p as u64) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ops_return_reports() {
        let v: Value = serde_json::from_str(&verify_unit("p = 5\nprec = 6")).unwrap();
        assert_eq!(v["exit_code"], 0);
        assert!(v["text"].as_str().unwrap().contains("cutoff"));
        let v: Value = serde_json::from_str(&descend("prec = 6\nfixture = twist:1")).unwrap();
        assert_eq!(v["schema"], "wach-lab/v1");
        assert_eq!(v["exit_code"], 0);
        let v: Value = serde_json::from_str(&descend("p = 4")).unwrap();
        assert_eq!(v["exit_code"], 2);
        assert_eq!(val_factorial(100, 5).unwrap(), 24);
    }
}
