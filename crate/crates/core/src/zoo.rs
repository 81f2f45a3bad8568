//! Canonical metrics and potentials: constant curvature spaces, products,
//! warped products, the flat-times-sphere shrinking soliton with non-vanishing
//! radial Weyl curvature, and seeded random analytic metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{ChartDomain, CurvatureError, MetricField};
use crate::expr::{Func, ScalarExpr};
use crate::gqe::{GqeData, GqeTag, SolitonKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZooError {
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error(transparent)]
    Metric(#[from] CurvatureError),
}

/// Properties an instance is expected to have. `None` means "not asserted".
/// Every asserted flag is checked numerically by the verification suites.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpectedFlags {
    pub einstein: Option<bool>,
    pub conformally_flat: Option<bool>,
    pub harmonic_weyl: Option<bool>,
    pub radial_weyl_zero: Option<bool>,
    pub gqe_class: Option<GqeTag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fiber {
    Sphere,
    Flat,
    Hyperbolic,
}

impl Fiber {
    /// Sectional curvature of the unit fiber.
    pub fn curvature(self) -> f64 {
        match self {
            Fiber::Sphere => 1.0,
            Fiber::Flat => 0.0,
            Fiber::Hyperbolic => -1.0,
        }
    }

    fn parse(s: &str) -> Option<Fiber> {
        match s {
            "sphere" => Some(Fiber::Sphere),
            "flat" => Some(Fiber::Flat),
            "hyperbolic" => Some(Fiber::Hyperbolic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZooInstance {
    pub name: String,
    pub key: String,
    pub metric: MetricField,
    pub gqe: Option<GqeData>,
    pub flags: ExpectedFlags,
    /// `g_1i = 0` for `i >= 2` and leaves `{x1 = const}` (warped instances).
    pub adapted: bool,
    /// Normalizations and conventions worth recording in reports.
    pub notes: Vec<String>,
}

impl ZooInstance {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }
}

fn check_dim(n: usize) -> Result<(), ZooError> {
    if n < 3 {
        return Err(ZooError::InvalidParameter(format!("dimension must be at least 3, got {n}")));
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<(), ZooError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(ZooError::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// `4 r^4 / (r^2 + |y|^2)^2` over the variables in `range`: the round metric of
/// radius `r` in stereographic coordinates.
pub fn stereographic_factor(range: std::ops::Range<usize>, r: f64) -> ScalarExpr {
    let r2 = ScalarExpr::num(r * r);
    ScalarExpr::num(4.0 * r.powi(4)).div(&r2.add(&ScalarExpr::squared_norm(range)).powi(2))
}

/// `4 / (1 − |y|^2)^2`: the Poincaré ball.
pub fn poincare_factor(range: std::ops::Range<usize>) -> ScalarExpr {
    ScalarExpr::num(4.0).div(&ScalarExpr::one().sub(&ScalarExpr::squared_norm(range)).powi(2))
}

fn ball_constraint(range: std::ops::Range<usize>, radius: f64) -> ScalarExpr {
    ScalarExpr::num(radius * radius).sub(&ScalarExpr::squared_norm(range))
}

fn gqe(f: ScalarExpr, mu: ScalarExpr, lambda: ScalarExpr) -> Option<GqeData> {
    Some(GqeData { f, mu, lambda })
}

fn trivial_flags(einstein_class: bool) -> ExpectedFlags {
    ExpectedFlags {
        einstein: Some(true),
        conformally_flat: Some(true),
        harmonic_weyl: Some(true),
        radial_weyl_zero: Some(true),
        gqe_class: einstein_class.then_some(GqeTag::Trivial),
    }
}

pub fn euclidean(n: usize) -> Result<ZooInstance, ZooError> {
    check_dim(n)?;
    let metric = MetricField::diagonal(vec![ScalarExpr::one(); n], ChartDomain::cube(n, 2.0))?;
    Ok(ZooInstance {
        name: format!("Euclidean space R^{n}"),
        key: format!("euclidean:{n}"),
        metric,
        gqe: gqe(ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::zero()),
        flags: trivial_flags(true),
        adapted: false,
        notes: Vec::new(),
    })
}

/// Round sphere of radius `r` in a stereographic chart, sampled on `|x| < r`.
pub fn sphere(n: usize, r: f64) -> Result<ZooInstance, ZooError> {
    check_dim(n)?;
    check_radius(r)?;
    let domain = ChartDomain::cube(n, r).with_constraint(ball_constraint(0..n, r));
    let metric = MetricField::conformally_flat(n, stereographic_factor(0..n, r), domain)?;
    Ok(ZooInstance {
        name: format!("round sphere S^{n} of radius {r}"),
        key: format!("sphere:{n},{r}"),
        metric,
        gqe: gqe(ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::num((n as f64 - 1.0) / (r * r))),
        flags: trivial_flags(true),
        adapted: false,
        notes: vec!["stereographic chart from the north pole".into()],
    })
}

/// Hyperbolic space in the Poincaré ball, sampled on `|x| < 0.8`.
pub fn hyperbolic(n: usize) -> Result<ZooInstance, ZooError> {
    check_dim(n)?;
    let domain = ChartDomain::cube(n, 0.8).with_constraint(ball_constraint(0..n, 0.8));
    let metric = MetricField::conformally_flat(n, poincare_factor(0..n), domain)?;
    Ok(ZooInstance {
        name: format!("hyperbolic space H^{n}"),
        key: format!("hyperbolic:{n}"),
        metric,
        gqe: gqe(ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::num(-(n as f64 - 1.0))),
        flags: trivial_flags(true),
        adapted: false,
        notes: vec!["Poincaré ball chart".into()],
    })
}

fn check_split(k: usize, n: usize) -> Result<(), ZooError> {
    if n < 4 || k < 2 || k + 2 > n {
        return Err(ZooError::InvalidParameter(format!(
            "product R^k x S^(n-k) needs n >= 4 and 2 <= k <= n-2 (got k={k}, n={n})"
        )));
    }
    Ok(())
}

fn product_metric(k: usize, n: usize, r: f64) -> Result<MetricField, ZooError> {
    let factor = stereographic_factor(k..n, r);
    let diag = (0..n).map(|i| if i < k { ScalarExpr::one() } else { factor.clone() }).collect();
    let bounds = (0..n).map(|i| if i < k { (-2.0, 2.0) } else { (-r, r) }).collect();
    let domain = ChartDomain::boxed(bounds).with_constraint(ball_constraint(k..n, r));
    Ok(MetricField::diagonal(diag, domain)?)
}

/// Flat `R^k` times a round `S^(n−k)` of radius `r`.
pub fn product_flat_sphere(k: usize, n: usize, r: f64) -> Result<ZooInstance, ZooError> {
    check_split(k, n)?;
    check_radius(r)?;
    Ok(ZooInstance {
        name: format!("R^{k} x S^{}({r})", n - k),
        key: format!("product:{k},{n},{r}"),
        metric: product_metric(k, n, r)?,
        gqe: None,
        flags: ExpectedFlags {
            einstein: Some(false),
            conformally_flat: Some(false),
            harmonic_weyl: Some(true),
            ..Default::default()
        },
        adapted: false,
        notes: Vec::new(),
    })
}

/// Flat space with `f = |x|²/2`, `μ = 0`, `λ = 1`.
pub fn gaussian_shrinker(n: usize) -> Result<ZooInstance, ZooError> {
    check_dim(n)?;
    let mut inst = euclidean(n)?;
    inst.name = format!("Gaussian shrinking soliton on R^{n}");
    inst.key = format!("gaussian:{n}");
    inst.gqe = gqe(ScalarExpr::squared_norm(0..n).scale(0.5), ScalarExpr::zero(), ScalarExpr::one());
    inst.flags.gqe_class = Some(GqeTag::GradientSoliton(SolitonKind::Shrinking));
    Ok(inst)
}

/// The shrinking soliton on `R^k × S^(n−k)` with `f = (x1² + … + xk²)/2`.
///
/// The sphere radius is fixed to `sqrt(n−k−1)` so that its Einstein constant
/// is 1 and `μ = 0, λ = 1` solve the structure equation exactly. The metric has
/// harmonic Weyl tensor but `W(∇f, ·, ·, ·) ≠ 0`.
pub fn remark_counterexample(k: usize, n: usize) -> Result<ZooInstance, ZooError> {
    check_split(k, n)?;
    let r = ((n - k - 1) as f64).sqrt();
    Ok(ZooInstance {
        name: format!("shrinking soliton R^{k} x S^{}(sqrt({}))", n - k, n - k - 1),
        key: format!("remark:{k},{n}"),
        metric: product_metric(k, n, r)?,
        gqe: gqe(ScalarExpr::squared_norm(0..k).scale(0.5), ScalarExpr::zero(), ScalarExpr::one()),
        flags: ExpectedFlags {
            einstein: Some(false),
            conformally_flat: Some(false),
            harmonic_weyl: Some(true),
            radial_weyl_zero: Some(false),
            gqe_class: Some(GqeTag::GradientSoliton(SolitonKind::Shrinking)),
        },
        adapted: false,
        notes: vec![format!("sphere radius normalized to sqrt(n-k-1) = {r}")],
    })
}

fn fiber_metric_factor(fiber: Fiber, n: usize) -> (ScalarExpr, Vec<(f64, f64)>, Option<ScalarExpr>) {
    match fiber {
        Fiber::Sphere => (
            stereographic_factor(1..n, 1.0),
            vec![(-1.0, 1.0); n - 1],
            Some(ball_constraint(1..n, 1.0)),
        ),
        Fiber::Flat => (ScalarExpr::one(), vec![(-1.0, 1.0); n - 1], None),
        Fiber::Hyperbolic => (poincare_factor(1..n), vec![(-0.8, 0.8); n - 1], Some(ball_constraint(1..n, 0.8))),
    }
}

/// `(dx1)² + e^{ψ(x1)} G` with `G` the unit sphere, flat or hyperbolic metric
/// on `x2..xn`. `x1` ranges over `[-1, 1]`.
pub fn warped(n: usize, psi: ScalarExpr, fiber: Fiber) -> Result<ZooInstance, ZooError> {
    check_dim(n)?;
    if psi.max_var().is_some_and(|v| v > 0) {
        return Err(ZooError::InvalidParameter("warping exponent may only depend on x1".into()));
    }
    let (factor, leaf_bounds, constraint) = fiber_metric_factor(fiber, n);
    let warp = psi.exp().mul(&factor);
    let diag = (0..n).map(|i| if i == 0 { ScalarExpr::one() } else { warp.clone() }).collect();
    let mut bounds = vec![(-1.0, 1.0)];
    bounds.extend(leaf_bounds);
    let mut domain = ChartDomain::boxed(bounds);
    if let Some(c) = constraint {
        domain = domain.with_constraint(c);
    }
    Ok(ZooInstance {
        name: format!("warped product dx1^2 + exp({psi}) g_{fiber:?} in dimension {n}"),
        key: format!("warped:{n},{fiber:?},{psi}").to_lowercase(),
        metric: MetricField::diagonal(diag, domain)?,
        gqe: None,
        flags: ExpectedFlags {
            conformally_flat: Some(true),
            harmonic_weyl: Some(true),
            ..Default::default()
        },
        adapted: true,
        notes: Vec::new(),
    })
}

/// A warped product with a potential `f(x1)`; `μ` and `λ` are the unique
/// functions of `x1` that make the structure equation hold where `f' ≠ 0`.
pub fn warped_gqe(n: usize, psi: ScalarExpr, fiber: Fiber, f: ScalarExpr) -> Result<ZooInstance, ZooError> {
    if f.max_var().is_some_and(|v| v > 0) {
        return Err(ZooError::InvalidParameter("potential may only depend on x1".into()));
    }
    let mut inst = warped(n, psi.clone(), fiber)?;
    let nf = n as f64;
    let (p1, p2) = (psi.derivative(0), psi.derivative(0).derivative(0));
    let (f1, f2) = (f.derivative(0), f.derivative(0).derivative(0));
    // λ = (n−2)κ e^{−ψ} − ψ''/2 − (n−1)ψ'²/4 + f'ψ'/2
    let lambda = psi
        .neg()
        .exp()
        .scale((nf - 2.0) * fiber.curvature())
        .sub(&p2.scale(0.5))
        .sub(&p1.powi(2).scale((nf - 1.0) / 4.0))
        .add(&f1.mul(&p1).scale(0.5));
    // μ = (f'' − (n−1)(ψ''/2 + ψ'²/4) − λ) / f'²
    let radial = p2.scale(0.5).add(&p1.powi(2).scale(0.25)).scale(nf - 1.0);
    let mu = f2.sub(&radial).sub(&lambda).div(&f1.powi(2));
    inst.name = format!("{} with potential f = {f}", inst.name);
    inst.key = format!("{},{f}", inst.key);
    inst.gqe = gqe(f, mu, lambda);
    inst.flags.radial_weyl_zero = Some(true);
    Ok(inst)
}

/// Unit sphere with `f` the first coordinate of the embedding in `R^{n+1}`;
/// `∇²f = −f g`, so `μ = 0` and `λ = n − 1 − f` (a non-constant function).
pub fn round_sphere_almost_soliton(n: usize) -> Result<ZooInstance, ZooError> {
    let mut inst = sphere(n, 1.0)?;
    let f = ScalarExpr::var(0).scale(2.0).div(&ScalarExpr::one().add(&ScalarExpr::squared_norm(0..n)));
    let lambda = ScalarExpr::num(n as f64 - 1.0).sub(&f);
    inst.name = format!("Ricci almost soliton on the unit sphere S^{n}");
    inst.key = format!("almost-soliton:{n}");
    inst.gqe = gqe(f, ScalarExpr::zero(), lambda);
    inst.flags.gqe_class = Some(GqeTag::AlmostSoliton);
    Ok(inst)
}

/// Named warped GQE instances used by the verification suites.
pub fn warped_gqe_named(n: usize, fiber: Fiber) -> Result<ZooInstance, ZooError> {
    let (psi, f) = match fiber {
        Fiber::Sphere => ("0.6*x1 + 0.2*sin(2*x1)", "x1 + 0.25*x1^2"),
        Fiber::Flat => ("0.8*x1 - 0.3*x1^2", "0.5*x1 + sin(x1)"),
        Fiber::Hyperbolic => ("0.5*x1 + 0.1*x1^3", "exp(0.5*x1)"),
    };
    let mut inst = warped_gqe(n, psi.parse().unwrap(), fiber, f.parse().unwrap())?;
    inst.key = format!("warped-gqe:{n},{fiber:?}").to_lowercase();
    Ok(inst)
}

fn rounded(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo..hi) * 1000.0).round() / 1000.0
}

fn random_linear_form(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ScalarExpr {
    let mut acc = ScalarExpr::num(rounded(rng, -1.0, 1.0));
    for i in 0..n {
        let c = rounded(rng, -scale, scale);
        if c != 0.0 {
            acc = acc.add(&ScalarExpr::var(i).scale(c));
        }
    }
    acc
}

/// Random smooth function on the cube `[-1,1]^n`, bounded by roughly `amp`.
pub fn random_function(n: usize, seed: u64, amp: f64) -> ScalarExpr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let a = random_linear_form(&mut rng, n, 1.2);
    let b = random_linear_form(&mut rng, n, 0.8);
    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
    let t1 = ScalarExpr::call(Func::Sin, a).scale(0.5 * amp);
    let t2 = ScalarExpr::var(i).mul(&ScalarExpr::var(j)).scale(0.3 * amp);
    let t3 = ScalarExpr::call(Func::Cos, b).scale(0.2 * amp);
    t1.add(&t2).add(&t3)
}

/// Seeded random analytic metric on `[-1,1]^n`. Diagonal entries lie in
/// `[1.5, 2.5]` and each row's off-diagonal entries sum to at most `0.9` in
/// magnitude, so the metric is positive definite on the whole cube.
pub fn random_metric(n: usize, seed: u64) -> Result<MetricField, ZooError> {
    if n < 2 {
        return Err(ZooError::InvalidParameter("dimension must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = vec![ScalarExpr::zero(); n * n];
    let off_amp = 0.6 / (n as f64 - 1.0);
    for a in 0..n {
        for b in a..n {
            let e = if a == b {
                let s = random_linear_form(&mut rng, n, 1.0);
                let c = random_linear_form(&mut rng, n, 1.0);
                ScalarExpr::num(2.0)
                    .add(&ScalarExpr::call(Func::Sin, s).scale(rounded(&mut rng, 0.1, 0.3)))
                    .add(&ScalarExpr::call(Func::Cos, c).scale(rounded(&mut rng, 0.05, 0.2)))
            } else {
                let s = random_linear_form(&mut rng, n, 1.0);
                let amp = rounded(&mut rng, 0.2, 0.6) * off_amp;
                let poly = ScalarExpr::var(a).mul(&ScalarExpr::var(b)).scale(0.3 * off_amp);
                ScalarExpr::call(Func::Sin, s).scale(amp).add(&poly)
            };
            entries[a * n + b] = e.clone();
            entries[b * n + a] = e;
        }
    }
    Ok(MetricField::new(n, entries, ChartDomain::cube(n, 1.0))?)
}

pub fn random(n: usize, seed: u64) -> Result<ZooInstance, ZooError> {
    Ok(ZooInstance {
        name: format!("random analytic metric (n={n}, seed={seed})"),
        key: format!("random:{n},{seed}"),
        metric: random_metric(n, seed)?,
        gqe: None,
        flags: ExpectedFlags::default(),
        adapted: false,
        notes: Vec::new(),
    })
}

/// Catalogue of addressable keys with a short description.
pub fn catalogue() -> Vec<(&'static str, &'static str)> {
    vec![
        ("euclidean:N", "flat R^N"),
        ("sphere:N[,R]", "round sphere of radius R (default 1), stereographic chart"),
        ("hyperbolic:N", "hyperbolic space, Poincaré ball chart"),
        ("product:K,N[,R]", "R^K x S^(N-K)(R)"),
        ("gaussian:N", "Gaussian shrinking soliton on R^N"),
        ("remark:K,N", "shrinking soliton R^K x S^(N-K)(sqrt(N-K-1)) with nonzero radial Weyl"),
        ("almost-soliton:N", "unit sphere with a coordinate potential (mu = 0, lambda non-constant)"),
        ("warped-gqe:N,FIBER", "warped GQE instance, FIBER in sphere|flat|hyperbolic"),
        ("warped:N,FIBER,PSI", "dx1^2 + exp(PSI(x1)) g_FIBER"),
        ("random:N[,SEED]", "seeded random analytic metric on [-1,1]^N"),
    ]
}

/// Resolve a key such as `remark:2,4` or `warped-gqe:4,sphere`.
pub fn lookup(key: &str) -> Result<ZooInstance, ZooError> {
    let unknown = || ZooError::UnknownInstance(key.to_string());
    let (name, args) = key.split_once(':').unwrap_or((key, ""));
    let parts: Vec<&str> = if args.is_empty() { Vec::new() } else { args.splitn(3, ',').map(str::trim).collect() };
    let int = |i: usize| -> Result<usize, ZooError> { parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(unknown) };
    let real = |i: usize, default: f64| -> Result<f64, ZooError> {
        match parts.get(i) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| unknown()),
        }
    };
    match name {
        "euclidean" => euclidean(int(0)?),
        "sphere" => sphere(int(0)?, real(1, 1.0)?),
        "hyperbolic" => hyperbolic(int(0)?),
        "product" => product_flat_sphere(int(0)?, int(1)?, real(2, 1.0)?),
        "gaussian" => gaussian_shrinker(int(0)?),
        "remark" => remark_counterexample(int(0)?, int(1)?),
        "almost-soliton" => round_sphere_almost_soliton(int(0)?),
        "warped-gqe" => {
            let fiber = parts.get(1).and_then(|s| Fiber::parse(s)).ok_or_else(unknown)?;
            warped_gqe_named(int(0)?, fiber)
        }
        "warped" => {
            let fiber = parts.get(1).and_then(|s| Fiber::parse(s)).ok_or_else(unknown)?;
            let psi: ScalarExpr = crate::expr::parse(parts.get(2).ok_or_else(unknown)?, 1)
                .map_err(|e| ZooError::InvalidParameter(e.to_string()))?;
            warped(int(0)?, psi, fiber)
        }
        "random" => random(int(0)?, real(1, 1.0)? as u64),
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{scaled_residual, Geometry, MetricJet};
    use crate::gqe::gqe_residual_in;
    use crate::sampling::sample_points;

    fn keys() -> Vec<&'static str> {
        vec![
            "euclidean:3",
            "sphere:4",
            "sphere:3,2.5",
            "hyperbolic:5",
            "product:2,5",
            "product:2,4,1.5",
            "gaussian:4",
            "remark:2,4",
            "remark:2,5",
            "almost-soliton:4",
            "warped-gqe:4,sphere",
            "warped-gqe:5,flat",
            "warped-gqe:4,hyperbolic",
            "warped:4,sphere,0.3*x1",
            "random:4,17",
        ]
    }

    #[test]
    fn every_key_resolves_and_metrics_are_positive_definite() {
        for key in keys() {
            let inst = lookup(key).unwrap_or_else(|e| panic!("{key}: {e}"));
            for p in sample_points(inst.metric.domain(), 10, 3).unwrap() {
                inst.metric.at(&p).unwrap_or_else(|e| panic!("{key} at {p:?}: {e}"));
            }
        }
    }

    #[test]
    fn every_potential_solves_the_structure_equation() {
        for key in keys() {
            let inst = lookup(key).unwrap();
            let Some(d) = &inst.gqe else { continue };
            for p in sample_points(inst.metric.domain(), 10, 5).unwrap() {
                let geom = Geometry::new(MetricJet::new(&inst.metric, &p).unwrap());
                let res = gqe_residual_in(&geom, d).unwrap();
                let r = scaled_residual(&res, &[&geom.ricci(), &geom.metric().g]);
                assert!(r < 1e-10, "{key} at {p:?}: {r}");
            }
        }
    }

    #[test]
    fn bad_keys_are_rejected() {
        for key in ["", "torus:3", "sphere", "sphere:x", "warped-gqe:4,cylinder", "warped:4,flat"] {
            assert!(matches!(lookup(key), Err(ZooError::UnknownInstance(_))), "{key}");
        }
        for key in ["euclidean:2", "product:1,4", "product:3,4", "sphere:3,-1", "remark:2,3"] {
            assert!(matches!(lookup(key), Err(ZooError::InvalidParameter(_))), "{key}");
        }
    }

    #[test]
    fn warped_rejects_leaf_dependence() {
        let psi: ScalarExpr = "x2".parse().unwrap();
        assert!(warped(4, psi, Fiber::Flat).is_err());
    }

    #[test]
    fn random_instances_are_seeded() {
        let a = random_metric(4, 9).unwrap();
        let b = random_metric(4, 9).unwrap();
        let c = random_metric(4, 10).unwrap();
        assert_eq!(a.entries(), b.entries());
        assert_ne!(a.entries(), c.entries());
        assert_eq!(random_function(3, 1, 0.5), random_function(3, 1, 0.5));
    }

    #[test]
    fn remark_radius_is_normalized() {
        let inst = remark_counterexample(2, 5).unwrap();
        // S^3 of radius sqrt(2) has Ricci = (2/r²) g = g.
        let geom = Geometry::new(MetricJet::new(&inst.metric, &[0.3, -0.2, 0.1, 0.4, 0.0]).unwrap());
        let ric = geom.ricci();
        let g = &geom.metric().g;
        for i in 2..5 {
            assert!((ric.get(&[i, i]) - g.get(&[i, i])).abs() < 1e-12);
        }
        assert!(ric.get(&[0, 0]).abs() < 1e-14);
    }
}
