//! Jet values against independent oracles: central finite differences of
//! plain metric evaluations, and closed-form curvatures of classical metrics.

use gqe_core::curvature::{ChartDomain, Geometry, MetricField, MetricJet};
use gqe_core::expr::{parse, ScalarExpr};
use gqe_core::tensor::TensorValue;
use gqe_core::zoo;

const H: f64 = 1e-4;

fn geometry(m: &MetricField, p: &[f64]) -> Geometry {
    Geometry::new(MetricJet::new(m, p).unwrap())
}

fn shifted(p: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += h;
    q
}

fn rel(a: &TensorValue, b: &TensorValue) -> f64 {
    a.sub(b).max_abs() / a.max_abs().max(1e-12)
}

fn metric_from_rows(n: usize, rows: &[&[&str]], domain: ChartDomain) -> MetricField {
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    MetricField::parse(n, &rows, domain).unwrap()
}

#[test]
fn christoffel_symbols_match_differenced_metric() {
    for n in 3..=5 {
        for seed in 0..4 {
            let m = zoo::random_metric(n, 40 + seed).unwrap();
            let p: Vec<f64> = (0..n).map(|i| 0.3 * ((i + seed as usize) as f64).sin()).collect();
            let g0 = m.at(&p).unwrap();
            let dg: Vec<_> = (0..n)
                .map(|c| {
                    let (gp, gm) = (m.at(&shifted(&p, c, H)).unwrap(), m.at(&shifted(&p, c, -H)).unwrap());
                    move |a: usize, b: usize| (gp.g(a, b) - gm.g(a, b)) / (2.0 * H)
                })
                .collect();
            let jet = geometry(&m, &p).christoffel();
            let fd = TensorValue::from_fn(n, jet.signature(), |i| {
                let (c, a, b) = (i[0], i[1], i[2]);
                (0..n).map(|e| 0.5 * g0.g_inv(c, e) * (dg[a](e, b) + dg[b](e, a) - dg[e](a, b))).sum()
            });
            assert!(rel(&jet, &fd) < 1e-7, "n={n} seed={seed}: {}", rel(&jet, &fd));
        }
    }
}

#[test]
fn scalar_curvature_gradient_matches_differences() {
    let m = zoo::random_metric(4, 3).unwrap();
    let p = [0.1, -0.2, 0.3, 0.05];
    let g = geometry(&m, &p);
    let grad = g.grad_scalar();
    for i in 0..4 {
        let fd = (geometry(&m, &shifted(&p, i, H)).scalar() - geometry(&m, &shifted(&p, i, -H)).scalar()) / (2.0 * H);
        assert!((grad.get(&[i]) - fd).abs() < 1e-6 * (1.0 + fd.abs()), "axis {i}");
    }
}

#[test]
fn ricci_derivative_matches_differences() {
    let m = zoo::random_metric(3, 12).unwrap();
    let p = [0.2, 0.1, -0.4];
    let nr = geometry(&m, &p).nabla_ricci();
    let gamma = geometry(&m, &p).christoffel();
    let ric = geometry(&m, &p).ricci();
    // ∇_c R_ab = ∂_c R_ab − Γ^e_ca R_eb − Γ^e_cb R_ae
    for c in 0..3 {
        let d = geometry(&m, &shifted(&p, c, H)).ricci().sub(&geometry(&m, &shifted(&p, c, -H)).ricci()).scale(0.5 / H);
        for a in 0..3 {
            for b in 0..3 {
                let mut v = d.get(&[a, b]);
                for e in 0..3 {
                    v -= gamma.get(&[e, c, a]) * ric.get(&[e, b]) + gamma.get(&[e, c, b]) * ric.get(&[a, e]);
                }
                assert!((nr.get(&[a, b, c]) - v).abs() < 1e-6, "{a}{b}{c}");
            }
        }
    }
}

#[test]
fn hessian_matches_differenced_gradient() {
    let m = zoo::random_metric(4, 5).unwrap();
    let f = zoo::random_function(4, 5, 1.0);
    let p = [0.3, 0.0, -0.1, 0.2];
    let g = geometry(&m, &p);
    let hess = g.hessian(&f.eval_jet(&p).unwrap());
    let gamma = g.christoffel();
    let df = |q: &[f64], i: usize| (f.eval(&shifted(q, i, H)) - f.eval(&shifted(q, i, -H))) / (2.0 * H);
    for a in 0..4 {
        for b in 0..4 {
            let d2 = (df(&shifted(&p, b, H), a) - df(&shifted(&p, b, -H), a)) / (2.0 * H);
            let v = d2 - (0..4).map(|e| gamma.get(&[e, a, b]) * df(&p, e)).sum::<f64>();
            assert!((hess.get(&[a, b]) - v).abs() < 1e-6, "{a}{b}");
        }
    }
}

/// `dx² + e^{2x}(dy² + dz²)` is hyperbolic space in horospherical coordinates.
#[test]
fn horospherical_hyperbolic_space() {
    let m = metric_from_rows(
        3,
        &[&["1", "0", "0"], &["0", "exp(2*x1)", "0"], &["0", "0", "exp(2*x1)"]],
        ChartDomain::cube(3, 2.0),
    );
    let g = geometry(&m, &[0.7, -1.0, 0.4]);
    assert!((g.scalar() + 6.0).abs() < 1e-12);
    let einstein = g.ricci().axpy(2.0, &g.metric().g);
    assert!(einstein.max_abs() < 1e-12);
}

/// Left-invariant Heisenberg metric `dx² + dy² + (dz − x dy)²` has `R = −1/2`
/// and Ricci eigenvalues `(−1/2, −1/2, 1/2)` in an orthonormal frame.
#[test]
fn heisenberg_group() {
    let m = metric_from_rows(
        3,
        &[&["1", "0", "0"], &["0", "1 + x1^2", "-x1"], &["0", "-x1", "1"]],
        ChartDomain::cube(3, 2.0),
    );
    for p in [[0.0, 0.0, 0.0], [1.3, -0.4, 0.9]] {
        let g = geometry(&m, &p);
        assert!((g.scalar() + 0.5).abs() < 1e-13, "{}", g.scalar());
        // |Ric|² = 3/4 is frame independent.
        let ric = g.ricci();
        let norm_sq = ric.norm(g.metric()).powi(2);
        assert!((norm_sq - 0.75).abs() < 1e-12);
    }
}

/// A round 2-sphere of radius 2 times a line: `R = 2/r² = 1/2`.
#[test]
fn cylinder_over_sphere() {
    let s2 = "64/(4 + x1^2 + x2^2)^2";
    let m = metric_from_rows(3, &[&[s2, "0", "0"], &["0", s2, "0"], &["0", "0", "1"]], ChartDomain::cube(3, 1.0));
    let g = geometry(&m, &[0.4, -0.3, 0.8]);
    assert!((g.scalar() - 0.5).abs() < 1e-13);
    assert!(g.cotton().max_abs() < 1e-13);
}

/// Derivatives of expressions agree with differenced evaluation.
#[test]
fn expression_jets_match_differences() {
    let e: ScalarExpr = parse("sin(x1*x2) + exp(-x3^2)*cosh(x1) + sqrt(2 + x2) - log(3 + x1*x3)", 3).unwrap();
    let p = [0.3, -0.6, 0.8];
    let jet = e.eval_jet(&p).unwrap();
    for i in 0..3 {
        let fd = (e.eval(&shifted(&p, i, H)) - e.eval(&shifted(&p, i, -H))) / (2.0 * H);
        assert!((jet.grad(i) - fd).abs() < 1e-7);
        for j in 0..3 {
            let dj = |q: &[f64]| (e.eval(&shifted(q, j, H)) - e.eval(&shifted(q, j, -H))) / (2.0 * H);
            let fd2 = (dj(&shifted(&p, i, H)) - dj(&shifted(&p, i, -H))) / (2.0 * H);
            assert!((jet.hess(i, j) - fd2).abs() < 1e-5, "{i}{j}");
        }
    }
}
