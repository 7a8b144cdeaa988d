//! Browser bindings: F4 evaluation, ellipse-family generation with an exact
//! residual check, and the ellipse billiard.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and run natively as well.

use appell_sep::billiard::{run, SimConfig, SimPotential};
use appell_sep::hypergeom::{f4_eval, F4Params};
use appell_sep::mechanics::PhasePoint;
use appell_sep::potentials::{EllipseFamilySpec, FamilySpec};
use appell_sep::residuals::{residual_exact, System};
use appell_sep::scalar::{f64_to_rational, parse_rational};
use appell_sep::{Error, LaurentPoly, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_json(v: &impl Serialize) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Simulation(e.to_string()))
}

#[derive(Serialize)]
struct F4Out {
    value: f64,
    terms_used: usize,
    tail_estimate: f64,
    in_domain: bool,
}

pub fn f4_json(a: f64, b: f64, c: f64, d: f64, x: f64, y: f64, order: usize) -> Result<String> {
    let v = f4_eval(&F4Params::new(a, b, c, d), &x, &y, order)?;
    to_json(&F4Out { value: v.value, terms_used: v.terms_used, tail_estimate: v.tail_estimate, in_domain: v.in_domain })
}

#[derive(Serialize)]
struct FamilyOut {
    laurent: String,
    terms: usize,
    kappa: String,
    residual_zero: bool,
}

pub fn ellipse_family_json(k: u32, lambda: &str) -> Result<String> {
    let lambda = parse_rational(lambda)?;
    let spec = FamilySpec::Ellipse(EllipseFamilySpec::new(k as f64, lambda.clone()));
    let v = spec.laurent()?;
    let report = residual_exact(&System::Eq1 { lambda }, &v)?;
    to_json(&FamilyOut { laurent: v.to_canonical_string(), terms: v.len(), kappa: spec.kappa()?.to_string(), residual_zero: report.pass })
}

#[derive(Serialize)]
struct SimOut {
    x: Vec<f64>,
    y: Vec<f64>,
    bounces: usize,
    t_end: f64,
    drift_h: f64,
    drift_k1: f64,
    aborted: Option<String>,
}

/// Billiard in `x²/a + y²/b = 1`. `potential` is `"family"` for
/// `alpha · V_2` with `λ = a - b`, `"quartic"` for `alpha · x⁴` or
/// anything else for free motion.
#[allow(clippy::too_many_arguments)]
pub fn simulate_json(
    a: f64,
    b: f64,
    potential: &str,
    alpha: f64,
    x0: f64,
    y0: f64,
    px0: f64,
    py0: f64,
    dt: f64,
    bounces: usize,
) -> Result<String> {
    let v = match potential {
        "family" => {
            let lambda = f64_to_rational(a)? - f64_to_rational(b)?;
            Some(FamilySpec::Ellipse(EllipseFamilySpec::new(2.0, lambda)).laurent()?)
        }
        "quartic" => Some("1 * x0^4 x1^0".parse::<LaurentPoly>()?),
        _ => None,
    };
    let initial = PhasePoint::new(vec![x0, y0], vec![px0, py0])?;
    let mut cfg = SimConfig::new(a, b, v.map(|v| SimPotential::laurent(v, alpha)), initial);
    cfg.dt = dt;
    cfg.bounce_max = bounces;
    cfg.sample_every = 10;
    let (traj, report) = run(&cfg)?;
    to_json(&SimOut {
        x: traj.samples.iter().map(|s| s.x).collect(),
        y: traj.samples.iter().map(|s| s.y).collect(),
        bounces: report.bounces,
        t_end: report.t_end,
        drift_h: report.max_rel_drift_h,
        drift_k1: report.max_rel_drift_k1tilde,
        aborted: report.aborted,
    })
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn f4(a: f64, b: f64, c: f64, d: f64, x: f64, y: f64, order: usize) -> std::result::Result<String, JsError> {
    js(f4_json(a, b, c, d, x, y, order))
}

#[wasm_bindgen(js_name = ellipseFamily)]
pub fn ellipse_family(k: u32, lambda: &str) -> std::result::Result<String, JsError> {
    js(ellipse_family_json(k, lambda))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    a: f64,
    b: f64,
    potential: &str,
    alpha: f64,
    x0: f64,
    y0: f64,
    px0: f64,
    py0: f64,
    dt: f64,
    bounces: usize,
) -> std::result::Result<String, JsError> {
    js(simulate_json(a, b, potential, alpha, x0, y0, px0, py0, dt, bounces))
}
