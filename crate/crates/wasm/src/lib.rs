//! Browser bindings: each function takes plain numbers and returns a JSON
//! string (an object with an `"error"` key on failure).

use serde_json::json;
use wasm_bindgen::prelude::*;
use weakram_core::dwork::DworkSeries;
use weakram_core::verify::{emit_report, gauss_case, run_suite, EpsSelect, Format, RunConfig};

fn error_json(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// Full check suite for `(p, d)`; `eps = 0` selects every class.
#[wasm_bindgen]
pub fn verify(p: u32, d: u32, eps: u32, precision: u32) -> String {
    let mut cfg = RunConfig::new(p, d as usize);
    cfg.precision = precision as i64;
    cfg.ceiling = 49;
    if eps > 0 {
        cfg.eps = EpsSelect::Index(eps as usize);
    }
    match run_suite(&cfg) {
        Ok(r) => {
            let report = emit_report(Some(&cfg), &r.reports, Format::Json, true);
            let mut v: serde_json::Value = serde_json::from_str(&report).expect("report is JSON");
            v["exit_code"] = json!(r.exit_code);
            v.to_string()
        }
        Err(e) => error_json(e),
    }
}

/// Norm-resolvent exponent and modified Gauss sum for one `(eps, j)`.
#[wasm_bindgen]
pub fn gauss_sum(p: u32, d: u32, eps: u32, j: u32) -> String {
    if (p as u64).pow(d) > 49 {
        return error_json("p^d above the demo ceiling of 49");
    }
    match gauss_case(p, d as usize, eps as usize, j, 8, 1) {
        Ok(c) => serde_json::to_string(&c).expect("serializable"),
        Err(e) => error_json(e),
    }
}

/// First coefficients of the Dwork series and their valuations.
#[wasm_bindgen]
pub fn dwork_profile(p: u32, terms: u32) -> String {
    let s = match DworkSeries::new(p, 8) {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let n = (terms as usize).min(s.truncation() + 1);
    let rows: Vec<_> = weakram_core::dwork::leading_terms(&s, n)
        .into_iter()
        .enumerate()
        .map(|(k, t)| {
            let ord = s.ord(k).map(|o| format!("{}/{}", o.numer(), o.denom()));
            let bound = format!("{}/{}", k * (p as usize - 1), p * p);
            json!({ "n": k, "e_n": t, "ord": ord, "bound": bound })
        })
        .collect();
    json!({ "p": p, "truncation": s.truncation(), "terms": rows }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_q3_reports_pass() {
        let v: serde_json::Value = serde_json::from_str(&verify(3, 1, 0, 8)).unwrap();
        assert_eq!(v["exit_code"], json!(0));
        assert!(v["reports"].as_array().unwrap().iter().all(|r| r["status"] == "pass"));
    }

    #[test]
    fn gauss_sum_q3() {
        let v: serde_json::Value = serde_json::from_str(&gauss_sum(3, 1, 1, 1)).unwrap();
        assert_eq!(v["norm_resolvent"], json!(1));
        assert_eq!(v["candidates"][0]["tau_star_log"], json!(8));
        assert_eq!(v["candidates"][0]["product_is_one"], json!(true));
    }

    #[test]
    fn dwork_profile_rows() {
        let v: serde_json::Value = serde_json::from_str(&dwork_profile(3, 4)).unwrap();
        assert_eq!(v["terms"][0]["e_n"], json!("1*g^0"));
        assert_eq!(v["terms"].as_array().unwrap().len(), 4);
        assert!(serde_json::from_str::<serde_json::Value>(&dwork_profile(4, 3)).unwrap()["error"].is_string());
    }
}
