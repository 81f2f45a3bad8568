//! Browser bindings for the curvature engine. Each export is a thin wrapper
//! over a plain Rust function so the logic is testable natively.

use gqe_core::curvature::{scaled_residual, Geometry, MetricJet};
use gqe_core::gqe::{self, ClassifyTolerances};
use gqe_core::zoo::{self, ZooInstance};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn instance(key: &str) -> Result<ZooInstance, String> {
    zoo::lookup(key).map_err(|e| e.to_string())
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad coordinate `{}`", t.trim())))
        .collect()
}

fn center(inst: &ZooInstance) -> Vec<f64> {
    inst.metric.domain().bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()
}

/// Curvature summary at a point as JSON.
pub fn curvature_summary(key: &str, point: &str) -> Result<String, String> {
    let inst = instance(key)?;
    let p = parse_point(point)?;
    let geom = Geometry::new(MetricJet::new(&inst.metric, &p).map_err(|e| e.to_string())?);
    let m = geom.metric();
    let ric = geom.ricci();
    let n = geom.dim();
    let ricci_rows: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| ric.get(&[a, b])).collect()).collect();
    let trace_free = ric.axpy(-geom.scalar() / n as f64, &m.g);
    let mut out = json!({
        "instance": inst.name,
        "dimension": n,
        "point": p,
        "scalar": geom.scalar(),
        "ricci": ricci_rows,
        "riemann_norm": geom.riemann().norm(m),
        "weyl_norm": geom.weyl().map(|w| w.norm(m)).ok(),
        "cotton_norm": geom.cotton().norm(m),
        "einstein_residual": scaled_residual(&trace_free, &[&ric]),
    });
    if let Some(d) = &inst.gqe {
        let res = gqe::gqe_residual_in(&geom, d).map_err(|e| e.to_string())?;
        let (_, radial) = gqe::radial_weyl_in(&geom, &d.f).map_err(|e| e.to_string())?;
        out["gqe"] = json!({
            "mu": d.mu.eval(&p),
            "lambda": d.lambda.eval(&p),
            "residual": res.norm(m),
            "radial_weyl_norm": radial,
        });
    }
    Ok(out.to_string())
}

/// Scalar curvature on a `res × res` grid over the `(i, j)` coordinate plane
/// through the chart centre, row-major with `j` varying fastest. Points
/// outside the chart are NaN.
pub fn scalar_slice(key: &str, i: usize, j: usize, res: usize) -> Result<Vec<f64>, String> {
    let inst = instance(key)?;
    let n = inst.dim();
    if i >= n || j >= n || i == j {
        return Err(format!("axes must be distinct and below {n}"));
    }
    if !(2..=256).contains(&res) {
        return Err("resolution must lie in 2..=256".into());
    }
    let bounds = &inst.metric.domain().bounds;
    let base = center(&inst);
    let coord = |axis: usize, k: usize| {
        let (lo, hi) = bounds[axis];
        lo + (hi - lo) * (k as f64 + 0.5) / res as f64
    };
    let mut out = Vec::with_capacity(res * res);
    for a in 0..res {
        for b in 0..res {
            let mut p = base.clone();
            p[i] = coord(i, a);
            p[j] = coord(j, b);
            out.push(MetricJet::new(&inst.metric, &p).map_or(f64::NAN, |jet| Geometry::new(jet).scalar()));
        }
    }
    Ok(out)
}

/// `μ`, `λ` and the radial Weyl norm along the `x1` axis through the chart
/// centre, with the classification over those points, as JSON.
pub fn gqe_profile(key: &str, count: usize) -> Result<String, String> {
    let inst = instance(key)?;
    let d = inst.gqe.as_ref().ok_or_else(|| format!("{key} has no potential"))?;
    let count = count.clamp(2, 400);
    let (lo, hi) = inst.metric.domain().bounds[0];
    let base = center(&inst);
    let mut x1 = Vec::new();
    let mut fitted_mu = Vec::new();
    let mut fitted_lambda = Vec::new();
    let mut radial = Vec::new();
    let mut points = Vec::new();
    for k in 0..count {
        let mut p = base.clone();
        p[0] = lo + (hi - lo) * (k as f64 + 0.5) / count as f64;
        let Ok(jet) = MetricJet::new(&inst.metric, &p) else { continue };
        let geom = Geometry::new(jet);
        let fit = gqe::fit_mu_lambda_in(&geom, &d.f).map_err(|e| e.to_string())?;
        let (_, w) = gqe::radial_weyl_in(&geom, &d.f).map_err(|e| e.to_string())?;
        x1.push(p[0]);
        fitted_mu.push(fit.mu);
        fitted_lambda.push(fit.lambda);
        radial.push(w);
        points.push(p);
    }
    if points.is_empty() {
        return Err("no chart points on the x1 axis".into());
    }
    let class = gqe::classify(&inst.metric, d, &points, ClassifyTolerances::default()).map_err(|e| e.to_string())?;
    Ok(json!({
        "instance": inst.name,
        "x1": x1,
        "mu": fitted_mu,
        "lambda": fitted_lambda,
        "radial_weyl": radial,
        "classification": class,
    })
    .to_string())
}

pub fn instance_keys() -> String {
    let examples = [
        "sphere:4",
        "hyperbolic:4",
        "gaussian:4",
        "remark:2,4",
        "almost-soliton:4",
        "warped-gqe:4,sphere",
        "warped-gqe:5,flat",
        "warped-gqe:4,hyperbolic",
        "product:2,4",
        "random:4,7",
    ];
    let dims: Vec<_> = examples
        .iter()
        .filter_map(|k| zoo::lookup(k).ok().map(|i| json!({"key": k, "dim": i.dim(), "name": i.name, "center": center(&i)})))
        .collect();
    serde_json::Value::Array(dims).to_string()
}

#[wasm_bindgen(js_name = curvatureSummary)]
pub fn curvature_summary_js(key: &str, point: &str) -> Result<String, JsValue> {
    curvature_summary(key, point).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = scalarSlice)]
pub fn scalar_slice_js(key: &str, i: usize, j: usize, res: usize) -> Result<Vec<f64>, JsValue> {
    scalar_slice(key, i, j, res).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = gqeProfile)]
pub fn gqe_profile_js(key: &str, count: usize) -> Result<String, JsValue> {
    gqe_profile(key, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = instanceKeys)]
pub fn instance_keys_js() -> String {
    instance_keys()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_the_unit_sphere() {
        let v: serde_json::Value = serde_json::from_str(&curvature_summary("sphere:3", "0.1, 0.2, -0.1").unwrap()).unwrap();
        assert!((v["scalar"].as_f64().unwrap() - 6.0).abs() < 1e-12);
        assert!(v["einstein_residual"].as_f64().unwrap() < 1e-12);
        assert!(v["gqe"]["residual"].as_f64().unwrap() < 1e-12);
    }

    #[test]
    fn summary_errors_are_messages() {
        assert!(curvature_summary("sphere:3", "0,0").unwrap_err().contains("outside"));
        assert!(curvature_summary("sphere:3", "a,b,c").unwrap_err().contains("bad coordinate"));
        assert!(curvature_summary("moebius:3", "0,0,0").is_err());
    }

    #[test]
    fn slice_marks_points_outside_the_ball() {
        let grid = scalar_slice("hyperbolic:3", 0, 1, 16).unwrap();
        assert_eq!(grid.len(), 256);
        assert!(grid[0].is_nan());
        let inside: Vec<f64> = grid.iter().copied().filter(|v| !v.is_nan()).collect();
        assert!(!inside.is_empty());
        assert!(inside.iter().all(|v| (v + 6.0).abs() < 1e-10));
        assert!(scalar_slice("hyperbolic:3", 1, 1, 16).is_err());
    }

    #[test]
    fn profile_of_the_product_soliton() {
        let v: serde_json::Value = serde_json::from_str(&gqe_profile("remark:2,4", 9).unwrap()).unwrap();
        assert_eq!(v["classification"]["tag"]["tag"], "gradient-soliton");
        let lambda = v["lambda"].as_array().unwrap();
        assert!(lambda.iter().all(|l| (l.as_f64().unwrap() - 1.0).abs() < 1e-10));
        // Radial Weyl grows with |x1| and vanishes only on the axis x1 = 0.
        let w = v["radial_weyl"].as_array().unwrap();
        assert!(w.first().unwrap().as_f64().unwrap() > 0.05);
    }

    #[test]
    fn keys_resolve() {
        let v: serde_json::Value = serde_json::from_str(&instance_keys()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 10);
    }
}
