//! Browser bindings. Each export takes plain numbers and returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dyncorr::bounds::{cnimp_error_surface, grid_from_zero, lambda_grid, snimp_bound_model, CnimpTarget};
use dyncorr::models::{HamiltonianSpec, SiteAngles, System, SystemStateSpec};
use dyncorr::oracle::{exact_correlation, CorrelationQuery};
use dyncorr::protocols::{projective_correlate, CouplingChoice, Snimp};
use dyncorr::spin::{Axis, SpinRegister};

/// Two Pauli spins under `σ^x σ^x`, prepared from per-site angles.
pub fn two_spins(alpha: [f64; 2], theta: [f64; 2]) -> dyncorr::Result<System> {
    let sites = alpha
        .iter()
        .zip(theta)
        .map(|(&alpha, theta)| SiteAngles { alpha, theta })
        .collect();
    System::new(&SpinRegister::qubits(2, 0)?, &HamiltonianSpec::IsingXx, &SystemStateSpec::Angles(sites))
}

fn zz(t1: f64, t2: f64) -> CorrelationQuery {
    CorrelationQuery::new(0, Axis::Z, t1, 1, Axis::Z, t2)
}

#[derive(Serialize)]
pub struct Sweep {
    pub lambda: Vec<f64>,
    pub sys: Vec<f64>,
    pub stat: Vec<f64>,
    pub total: Vec<f64>,
    pub best: usize,
}

pub fn sweep(system: &System, t1: f64, t2: f64, n: f64, step: f64) -> dyncorr::Result<Sweep> {
    let grid = lambda_grid(step, 1.0)?;
    let model = snimp_bound_model(system, &Snimp::new(zz(t1, t2), 1.0, CouplingChoice::B1), &grid)?;
    let (best, _) = model.argmin(n);
    Ok(Sweep {
        stat: (0..grid.len()).map(|k| model.stat(k, n)).collect(),
        total: (0..grid.len()).map(|k| model.total(k, n)).collect(),
        sys: model.sys,
        lambda: grid,
        best,
    })
}

#[derive(Serialize)]
pub struct Surface {
    pub grid: Vec<f64>,
    /// Row-major over `(λ1, λ2)`; `null` where the estimator is undefined.
    pub total: Vec<Option<f64>>,
    pub best: [f64; 3],
}

pub fn surface(system: &System, t: [f64; 3], n: f64, step: f64, target: u32) -> dyncorr::Result<Surface> {
    let target = *CnimpTarget::ALL
        .get(target as usize)
        .ok_or_else(|| dyncorr::Error::InvalidArgument(format!("no estimator {target}")))?;
    let grid = grid_from_zero(step, 1.0)?;
    let s = cnimp_error_surface(system, &zz(t[0], t[1]).with_t3(t[2]), &grid)?;
    let model = s.model(target);
    let (k, min) = model.argmin(n);
    Ok(Surface {
        total: (0..model.points.len())
            .map(|k| Some(model.total(k, n)).filter(|v| v.is_finite()))
            .collect(),
        best: [model.points[k].0, model.points[k].1.unwrap_or(0.0), min],
        grid,
    })
}

#[derive(Serialize)]
pub struct Trace {
    pub t: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub projective: Vec<f64>,
}

/// `C(t1, t)` and the projective value for `t` from `t1` to `t_max`.
pub fn trace(system: &System, t1: f64, t_max: f64, steps: usize) -> dyncorr::Result<Trace> {
    let mut out = Trace { t: vec![], re: vec![], im: vec![], projective: vec![] };
    for k in 0..=steps.max(1) {
        let t = t1 + (t_max - t1) * k as f64 / steps.max(1) as f64;
        let q = zz(t1, t);
        let c = exact_correlation(system, &q)?;
        out.t.push(t);
        out.re.push(c.re);
        out.im.push(c.im);
        out.projective.push(projective_correlate(system, &q)?);
    }
    Ok(out)
}

fn js<T: Serialize>(r: dyncorr::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn lambda_sweep(alpha1: f64, alpha2: f64, theta1: f64, theta2: f64, t1: f64, t2: f64, n: f64) -> Result<String, JsError> {
    js(two_spins([alpha1, alpha2], [theta1, theta2]).and_then(|s| sweep(&s, t1, t2, n, 0.005)))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn cnimp_surface(alpha1: f64, alpha2: f64, theta1: f64, theta2: f64, t1: f64, t2: f64, t3: f64, n: f64, target: u32) -> Result<String, JsError> {
    js(two_spins([alpha1, alpha2], [theta1, theta2]).and_then(|s| surface(&s, [t1, t2, t3], n, 0.02, target)))
}

#[wasm_bindgen]
pub fn correlation_trace(alpha1: f64, alpha2: f64, theta1: f64, theta2: f64, t1: f64, t_max: f64) -> Result<String, JsError> {
    js(two_spins([alpha1, alpha2], [theta1, theta2]).and_then(|s| trace(&s, t1, t_max, 200)))
}
