//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Each export takes plain strings and numbers and returns a JSON document. The
//! `*_json` functions do the work and are usable from native code and tests.

// Exports mirror the flat argument lists on the JS side.
#![allow(clippy::too_many_arguments)]

use std::sync::Arc;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use twisted_blocks::lie::{Series, SimpleLieAlgebra};
use twisted_blocks::linalg::{fmt_q, parse_q, Q};
use twisted_blocks::loops::LoopAlgebra;
use twisted_blocks::rep::HighestWeightModule;
use twisted_blocks::sugawara::{self, Sugawara};
use twisted_blocks::twist::{fmt_weight, standard, Automorphism, DiagramAutomorphism, TauKind, Weight};
use twisted_blocks::{Error, Result};

/// Largest truncation the page will build.
pub const MAX_DEPTH: usize = 8;

fn ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Invalid(format!("not an integer: {t}"))))
        .collect()
}

fn automorphism(series: &str, rank: usize, tau: &str, h: &str, m: usize) -> Result<Arc<Automorphism>> {
    let series = Series::parse(series)?;
    let kind = TauKind::parse(tau)?;
    let mut h = ints(h)?;
    if h.is_empty() {
        let g = SimpleLieAlgebra::build(series, rank)?;
        h = vec![0; DiagramAutomorphism::new(&g, kind)?.folded_rank];
    }
    Ok(Arc::new(standard(series, rank, kind, h, m)?))
}

fn weight(s: &str, rank: usize) -> Result<Weight> {
    let parts: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if parts.is_empty() {
        return Ok(vec![Q::from_integer(0.into()); rank]);
    }
    if parts.len() != rank {
        return Err(Error::Invalid(format!("weight needs {rank} coordinates, got {}", parts.len())));
    }
    parts.iter().map(|t| parse_q(t).ok_or_else(|| Error::Invalid(format!("not a rational number: {t}")))).collect()
}

fn module(s: &Arc<Automorphism>, lambda: &str, c: i64, d_max: usize) -> Result<HighestWeightModule> {
    if d_max > MAX_DEPTH {
        return Err(Error::Window(format!("depth {d_max} above the demo limit {MAX_DEPTH}")));
    }
    let lam = weight(lambda, s.rank())?;
    HighestWeightModule::new(Arc::new(LoopAlgebra::new(s.clone())?), &lam, c, d_max)
}

pub fn dc_json(series: &str, rank: usize, tau: &str, h: &str, m: usize, c: i64) -> Result<Value> {
    let s = automorphism(series, rank, tau, h, m)?;
    let rows: Vec<Value> = s
        .enumerate_dc(c)?
        .iter()
        .map(|w| {
            let ns: Vec<String> = s.n_coefficients(w, c).iter().map(fmt_q).collect();
            json!({"weight": fmt_weight(w), "n": ns})
        })
        .collect();
    Ok(json!({"sigma": s.describe(), "level": c, "zero_in_dc": s.zero_in_dc(c), "weights": rows}))
}

pub fn graded_dims_json(series: &str, rank: usize, tau: &str, h: &str, m: usize, lambda: &str, c: i64, d_max: usize) -> Result<Value> {
    let s = automorphism(series, rank, tau, h, m)?;
    let hm = module(&s, lambda, c, d_max)?;
    Ok(json!({"sigma": s.describe(), "lambda": fmt_weight(&hm.lambda), "level": c, "dims": hm.dims}))
}

pub fn virasoro_json(
    series: &str,
    rank: usize,
    tau: &str,
    h: &str,
    m: usize,
    lambda: &str,
    c: i64,
    d_max: usize,
    n: i64,
    k: i64,
) -> Result<Value> {
    let s = automorphism(series, rank, tau, h, m)?;
    let need = sugawara::required_d_max(m as i64, n, k);
    if need > d_max {
        return Err(Error::Window(format!("required depth {need} for (n, k) = ({n}, {k})")));
    }
    let hm = module(&s, lambda, c, d_max)?;
    let layers: Vec<Value> = sugawara::virasoro_defect(&hm, n, k)?
        .into_iter()
        .map(|r| json!({"degree": r.degree, "scalar": r.scalar.as_ref().map(fmt_q)}))
        .collect();
    Ok(json!({
        "sigma": s.describe(),
        "central_charge": fmt_q(&Sugawara::new(&hm).central_charge()),
        "n": n,
        "k": k,
        "layers": layers,
    }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

// JS numbers: 32-bit integer arguments avoid BigInt at the boundary.

/// `D_c` with the coefficients `n_{lambda,i}`.
#[wasm_bindgen]
pub fn dc(series: &str, rank: usize, tau: &str, h: &str, m: usize, c: i32) -> std::result::Result<String, JsError> {
    to_js(dc_json(series, rank, tau, h, m, c.into()))
}

/// Layer dimensions of the truncated `H(lambda)`.
#[wasm_bindgen]
pub fn graded_dims(
    series: &str,
    rank: usize,
    tau: &str,
    h: &str,
    m: usize,
    lambda: &str,
    c: i32,
    d_max: usize,
) -> std::result::Result<String, JsError> {
    to_js(graded_dims_json(series, rank, tau, h, m, lambda, c.into(), d_max))
}

#[wasm_bindgen]
pub fn virasoro_defect(
    series: &str,
    rank: usize,
    tau: &str,
    h: &str,
    m: usize,
    lambda: &str,
    c: i32,
    d_max: usize,
    n: i32,
    k: i32,
) -> std::result::Result<String, JsError> {
    to_js(virasoro_json(series, rank, tau, h, m, lambda, c.into(), d_max, n.into(), k.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl2_level_two() {
        let v = dc_json("A", 1, "id", "", 1, 2).unwrap();
        assert_eq!(v["weights"].as_array().unwrap().len(), 3);
        assert_eq!(v["zero_in_dc"], true);
    }

    #[test]
    fn flip_needs_even_level() {
        let v = dc_json("A", 2, "flip", "0", 2, 1).unwrap();
        assert_eq!(v["zero_in_dc"], false);
        assert_eq!(v["weights"][0]["weight"], "(1)");
    }

    #[test]
    fn vacuum_character() {
        let v = graded_dims_json("A", 1, "id", "", 1, "0", 1, 4).unwrap();
        assert_eq!(v["dims"], json!([1, 3, 4, 7, 13]));
    }

    #[test]
    fn defect_and_limits() {
        let v = virasoro_json("A", 1, "id", "", 1, "", 1, 4, 2, -2).unwrap();
        assert_eq!(v["central_charge"], "1");
        assert!(v["layers"].as_array().unwrap().iter().all(|l| l["scalar"] == "1/2"));
        assert!(matches!(virasoro_json("A", 1, "id", "", 1, "", 1, 1, -2, -1), Err(Error::Window(_))));
        assert!(matches!(graded_dims_json("A", 1, "id", "", 1, "", 1, 20), Err(Error::Window(_))));
        assert!(matches!(dc_json("A", 1, "id", "x", 1, 1), Err(Error::Invalid(_))));
    }
}
