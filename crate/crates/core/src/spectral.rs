//! Weighted inner products on `[0, 1]`, the first-order eigenvalue shift of the deformed
//! hypergeometric operator and its Cauchy–Schwarz bound.
//!
//! The weight is `ω(x) = x^{c−1}(1−x)^{a+b−c}` and `y₁ = ₂F₁(a, b; c; x)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cjson;
use crate::error::{Error, Result};
use crate::hypergeom::UnitIntervalBasis;
use crate::linalg::{distance_to_integer, re, C64};
use crate::quad::{adaptive, gauss_legendre, graded_unit_rule};
use crate::varpar::{particular_solution_2nd, RealFn, DEFAULT_TOL};

pub const DEFAULT_NODES: usize = 64;
pub const MIN_NODES: usize = 8;

/// Tolerances of the adaptive cross-check rule.
pub const ADAPTIVE_ABS_TOL: f64 = 1e-15;
pub const ADAPTIVE_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadRule {
    /// Graded cells with Gauss–Jacobi at each endpoint.
    GaussJacobiEndpoint,
    /// Global adaptive Gauss–Kronrod on the full weighted integrand.
    AdaptiveSubdivision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuadRaw")]
pub struct QuadratureSpec {
    pub rule: QuadRule,
    pub nodes: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadRaw {
    #[serde(default = "default_rule")]
    rule: QuadRule,
    #[serde(default = "default_nodes")]
    nodes: usize,
}

fn default_rule() -> QuadRule {
    QuadRule::GaussJacobiEndpoint
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

impl TryFrom<QuadRaw> for QuadratureSpec {
    type Error = Error;

    fn try_from(r: QuadRaw) -> Result<Self> {
        Self::new(r.rule, r.nodes)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadRule::GaussJacobiEndpoint,
            nodes: DEFAULT_NODES,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rule: QuadRule, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::Invalid(format!("quadrature needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        Ok(Self { rule, nodes })
    }

    pub fn adaptive() -> Self {
        Self {
            rule: QuadRule::AdaptiveSubdivision,
            nodes: DEFAULT_NODES,
        }
    }

    /// The other rule, used as an independent cross-check.
    pub fn other(&self) -> Self {
        let rule = match self.rule {
            QuadRule::GaussJacobiEndpoint => QuadRule::AdaptiveSubdivision,
            QuadRule::AdaptiveSubdivision => QuadRule::GaussJacobiEndpoint,
        };
        Self { rule, nodes: self.nodes }
    }
}

/// Real hypergeometric parameters with an integrable weight and a basis at 0.
#[derive(Debug, Clone)]
pub struct SpectralParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    basis: Arc<UnitIntervalBasis>,
}

impl SpectralParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Invalid(format!("parameters ({a}, {b}, {c}) must be finite")));
        }
        if c <= 0.0 || a + b - c <= -1.0 {
            return Err(Error::NonIntegrableWeight(format!(
                "ω has endpoint exponents ({}, {}); both must exceed −1",
                c - 1.0,
                a + b - c
            )));
        }
        let basis = UnitIntervalBasis::new(re(a), re(b), re(c))?;
        Ok(Self {
            a,
            b,
            c,
            basis: Arc::new(basis),
        })
    }

    /// Exponents of `ω` at 0 and at 1.
    pub fn endpoint_exponents(&self) -> (f64, f64) {
        (self.c - 1.0, self.a + self.b - self.c)
    }

    pub fn omega(&self, x: f64) -> f64 {
        self.omega_split(x, 1.0 - x)
    }

    /// `ω` with `1 − x` supplied exactly.
    pub fn omega_split(&self, x: f64, xm: f64) -> f64 {
        x.powf(self.c - 1.0) * xm.powf(self.a + self.b - self.c)
    }

    pub fn basis(&self) -> &UnitIntervalBasis {
        &self.basis
    }

    pub fn y1(&self, x: f64) -> Result<C64> {
        Ok(self.basis.eval(re(x))?[0][0])
    }

    pub fn y1_jet(&self, x: f64) -> Result<[C64; 3]> {
        Ok(self.basis.eval(re(x))?[0])
    }

    /// Requires `|y₁|^{power}·ω` to be integrable at 1, where `y₁ ~ (1−x)^{min(0, c−a−b)}`.
    fn check_power(&self, power: f64) -> Result<()> {
        let s = self.c - self.a - self.b;
        let e = power * s.min(0.0) + (self.a + self.b - self.c);
        if e <= -1.0 || (s == 0.0 && self.a + self.b - self.c <= -1.0) {
            return Err(Error::NonIntegrableWeight(format!("|y₁|^{power}·ω has exponent {e} at 1")));
        }
        Ok(())
    }
}

/// `∫₀¹ h(x)·ω(x) dx` for a vector-valued `h`.
pub fn integrate_weighted<H>(h: H, params: &SpectralParams, quad: &QuadratureSpec) -> Result<Vec<C64>>
where
    H: Fn(f64) -> Result<Vec<C64>>,
{
    match quad.rule {
        QuadRule::GaussJacobiEndpoint => {
            let (e0, e1) = params.endpoint_exponents();
            let rule = graded_unit_rule(quad.nodes, e0, e1)?;
            let mut sum: Option<Vec<C64>> = None;
            for node in &rule {
                let v = h(node.x)?;
                match &mut sum {
                    None => sum = Some(v.into_iter().map(|z| z * node.w).collect()),
                    Some(s) => s.iter_mut().zip(v).for_each(|(s, z)| *s += z * node.w),
                }
            }
            Ok(sum.unwrap_or_default())
        }
        QuadRule::AdaptiveSubdivision => {
            let width = h(0.5)?.len();
            // the right half runs in t = 1 − x; each t is snapped to the exact complement of
            // the double x = 1 − t that the integrand sees, and t below the spacing of doubles
            // at 1 contributes nothing (its mass is O(ε^{1+e₁}))
            let left = adaptive(
                |x| Ok(h(x)?.into_iter().map(|z| z * params.omega_split(x, 1.0 - x)).collect()),
                0.0,
                0.5,
                ADAPTIVE_ABS_TOL,
                ADAPTIVE_REL_TOL,
            )?;
            let right = adaptive(
                |t| {
                    let x = 1.0 - t;
                    if x == 1.0 {
                        return Ok(vec![C64::new(0.0, 0.0); width]);
                    }
                    Ok(h(x)?.into_iter().map(|z| z * params.omega_split(x, 1.0 - x)).collect())
                },
                0.0,
                0.5,
                ADAPTIVE_ABS_TOL,
                ADAPTIVE_REL_TOL,
            )?;
            Ok(left.value.iter().zip(&right.value).map(|(l, r)| l + r).collect())
        }
    }
}

/// `⟨f, g⟩_ω = ∫₀¹ f·ḡ·ω dx`.
pub fn inner_product(f: &RealFn, g: &RealFn, params: &SpectralParams, quad: &QuadratureSpec) -> Result<C64> {
    Ok(integrate_weighted(|x| Ok(vec![f(x)? * g(x)?.conj()]), params, quad)?[0])
}

/// First-order shift and its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftResult {
    /// `⟨f·y₁, y₁⟩_ω / ⟨y₁, y₁⟩_ω`.
    #[serde(with = "cjson::complex")]
    pub lambda1: C64,
    /// `∫ f·|y₁|²·ω`, which assumes `⟨y₁, y₁⟩_ω = 1`.
    #[serde(with = "cjson::complex")]
    pub lambda1_raw: C64,
    pub norm_y1: f64,
    /// `(∫ |y₁|⁴·ω)^{1/2}`.
    pub bound: f64,
    /// `‖f‖_ω`.
    pub f_norm: f64,
    /// `|λ₁,raw| / (bound·‖f‖_ω)`, at most 1 by Cauchy–Schwarz.
    pub saturation: f64,
}

pub fn eigenvalue_shift(f: &RealFn, params: &SpectralParams, quad: &QuadratureSpec) -> Result<ShiftResult> {
    params.check_power(4.0)?;
    let m = integrate_weighted(
        |x| {
            let y = params.y1(x)?.norm_sqr();
            let fx = f(x)?;
            Ok(vec![re(y), fx * y, re(y * y), re(fx.norm_sqr())])
        },
        params,
        quad,
    )?;
    let (norm_y1, raw, bound, f_norm) = (m[0].re, m[1], m[2].re.sqrt(), m[3].re.sqrt());
    let saturation = if f_norm == 0.0 { 0.0 } else { raw.norm() / (bound * f_norm) };
    Ok(ShiftResult {
        lambda1: raw / norm_y1,
        lambda1_raw: raw,
        norm_y1,
        bound,
        f_norm,
        saturation,
    })
}

/// `(∫₀¹ |y₁|⁴·ω dx)^{1/2}`.
pub fn shift_bound(params: &SpectralParams, quad: &QuadratureSpec) -> Result<f64> {
    params.check_power(4.0)?;
    let m = integrate_weighted(|x| Ok(vec![re(params.y1(x)?.norm_sqr().powi(2))]), params, quad)?;
    Ok(m[0].re.sqrt())
}

/// The density `ρ = |y₁|²·ω` as a function to pair against `ω`, i.e. `|y₁|²`.
pub fn density_shape(params: &SpectralParams) -> RealFn {
    let p = params.clone();
    Arc::new(move |x| Ok(re(p.y1(x)?.norm_sqr())))
}

/// Measured Gram entries of the basis at 0 under `⟨·,·⟩_ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gram {
    pub y1y1: f64,
    #[serde(with = "cjson::complex")]
    pub y1y2: C64,
    pub y2y2: f64,
}

pub fn orthonormality(params: &SpectralParams, quad: &QuadratureSpec) -> Result<Gram> {
    params.check_power(2.0)?;
    if params.c >= 2.0 {
        return Err(Error::NonIntegrableWeight(format!("|y₂|²·ω has exponent {} at 0", 1.0 - params.c)));
    }
    if distance_to_integer(re(params.c)) < 1e-8 {
        return Err(Error::DegenerateParams("c is an integer".into()));
    }
    let m = integrate_weighted(
        |x| {
            let [p, q] = params.basis.eval(re(x))?;
            Ok(vec![re(p[0].norm_sqr()), p[0] * q[0].conj(), re(q[0].norm_sqr())])
        },
        params,
        quad,
    )?;
    Ok(Gram {
        y1y1: m[0].re,
        y1y2: m[1],
        y2y2: m[2].re,
    })
}

/// Diagnostics of the first-order hierarchy equation `L̃y₁,₁ − ab·y₁,₁ = (λ₁ − f)·y₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HierarchyCheck {
    #[serde(with = "cjson::complex")]
    pub lambda1: C64,
    /// `|⟨(λ₁ − f)·y₁, y₁⟩_ω|`, evaluated with the rule not used for `λ₁`.
    pub orthogonality_residual: f64,
    /// Weighted L² norm of the equation residual of the variation-of-parameters `y₁,₁`,
    /// with derivatives taken by finite differences of its values.
    pub equation_residual: f64,
    pub interval: (f64, f64),
}

/// Step of the five-point difference stencils in the hierarchy residual.
pub const FD_STEP: f64 = 2e-3;

/// `[y, y′, y″]` from five-point central differences of sampled values, so that the
/// residual tests the computed solution rather than the identities used to build it.
fn difference_jet<F: Fn(f64) -> Result<C64>>(y: F, x: f64, h: f64) -> Result<[C64; 3]> {
    let v = [y(x - 2.0 * h)?, y(x - h)?, y(x)?, y(x + h)?, y(x + 2.0 * h)?];
    let d1 = (v[0] - v[1] * 8.0 + v[3] * 8.0 - v[4]) / (12.0 * h);
    let d2 = (-v[0] + v[1] * 16.0 - v[2] * 30.0 + v[3] * 16.0 - v[4]) / (12.0 * h * h);
    Ok([v[2], d1, d2])
}

/// Interior interval on which the hierarchy residual is measured.
pub const HIERARCHY_INTERVAL: (f64, f64) = (0.1, 0.9);

pub fn hierarchy_check(f: &RealFn, params: &SpectralParams, quad: &QuadratureSpec, interval: (f64, f64)) -> Result<HierarchyCheck> {
    let (lo, hi) = interval;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Error::Invalid(format!("interval ({lo}, {hi}) must lie inside (0, 1)")));
    }
    let shift = eigenvalue_shift(f, params, quad)?;
    let lambda1 = shift.lambda1;
    let orth = integrate_weighted(
        |x| {
            let y = params.y1(x)?;
            Ok(vec![(lambda1 - f(x)?) * y.norm_sqr()])
        },
        params,
        &quad.other(),
    )?[0]
        .norm();

    let (a, b, c) = (params.a, params.b, params.c);
    let src = params.clone();
    let ff = f.clone();
    let rhs: RealFn = Arc::new(move |x| Ok((lambda1 - ff(x)?) * src.y1(x)?));
    let monic_rhs = {
        let rhs = rhs.clone();
        Arc::new(move |x: f64| Ok(rhs(x)? / (x * (1.0 - x)))) as RealFn
    };
    let y11 = particular_solution_2nd(re(a), re(b), re(c), monic_rhs, 0.5, DEFAULT_TOL)?;
    let gl = gauss_legendre(24);
    let half = 0.5 * (hi - lo);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, w) in gl.nodes.iter().zip(&gl.weights) {
        let x = lo + half * (1.0 + t);
        let j = difference_jet(|t| y11.eval(t), x, FD_STEP)?;
        let lhs = x * (1.0 - x) * j[2] + (c - (a + b + 1.0) * x) * j[1] - a * b * j[0];
        let r = lhs - rhs(x)?;
        let wx = w * half * params.omega(x);
        num += wx * r.norm_sqr();
        den += wx;
    }
    Ok(HierarchyCheck {
        lambda1,
        orthogonality_residual: orth,
        equation_residual: (num / den).sqrt(),
        interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta;

    fn constant(v: f64) -> RealFn {
        Arc::new(move |_| Ok(re(v)))
    }

    fn identity() -> RealFn {
        Arc::new(|x| Ok(re(x)))
    }

    fn params() -> SpectralParams {
        SpectralParams::new(0.3, 0.7, 1.2).unwrap()
    }

    #[test]
    fn trivial_products() {
        let q = QuadratureSpec::default();
        assert_eq!(inner_product(&constant(0.0), &constant(0.0), &params(), &q).unwrap(), re(0.0));
        let unit = SpectralParams::new(0.4, 0.6, 1.0 + 1e-7).unwrap();
        let v = inner_product(&constant(1.0), &constant(1.0), &unit, &q).unwrap();
        assert!((v.re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn weight_integral_is_beta() {
        for (a, b, c) in [(0.3, 0.7, 1.2), (0.2, 0.1, 0.6), (1.1, 0.4, 0.7)] {
            let p = SpectralParams::new(a, b, c).unwrap();
            let want = beta(c, a + b - c + 1.0);
            for q in [QuadratureSpec::default(), QuadratureSpec::adaptive()] {
                let v = inner_product(&constant(1.0), &constant(1.0), &p, &q).unwrap();
                assert!((v.re / want - 1.0).abs() < 1e-10, "{:?} {a} {b} {c}: {} vs {want}", q.rule, v.re);
            }
        }
    }

    #[test]
    fn rejects_non_integrable_weight() {
        assert!(matches!(SpectralParams::new(0.3, 0.7, 0.0), Err(Error::NonIntegrableWeight(_))));
        assert!(matches!(SpectralParams::new(0.1, 0.1, 1.5), Err(Error::NonIntegrableWeight(_))));
        assert!(QuadratureSpec::new(QuadRule::GaussJacobiEndpoint, 4).is_err());
    }

    #[test]
    fn constant_shift_normalizes_to_one() {
        let q = QuadratureSpec::default();
        let s = eigenvalue_shift(&constant(1.0), &params(), &q).unwrap();
        assert!((s.lambda1 - re(1.0)).norm() < 1e-12);
        assert!((s.lambda1_raw.re - s.norm_y1).abs() < 1e-12);
        let z = eigenvalue_shift(&constant(0.0), &params(), &q).unwrap();
        assert_eq!(z.lambda1, re(0.0));
    }

    #[test]
    fn rules_agree_on_smooth_integrands() {
        let p = params();
        let a = eigenvalue_shift(&identity(), &p, &QuadratureSpec::default()).unwrap();
        let b = eigenvalue_shift(&identity(), &p, &QuadratureSpec::adaptive()).unwrap();
        assert!((a.lambda1 - b.lambda1).norm() < 1e-8 * a.lambda1.norm());
        assert!((a.bound - b.bound).abs() < 1e-8 * a.bound);
    }

    #[test]
    fn rules_agree_when_y1_blows_up_at_one() {
        // c − a − b < 0: y₁ ~ (1−x)^{c−a−b} and graded nodes crowd against 1
        let p = SpectralParams::new(0.203, 0.474, 0.583).unwrap();
        let a = eigenvalue_shift(&identity(), &p, &QuadratureSpec::default()).unwrap();
        let b = eigenvalue_shift(&identity(), &p, &QuadratureSpec::adaptive()).unwrap();
        assert!(a.lambda1.is_finite() && b.lambda1.is_finite());
        assert!((a.lambda1 - b.lambda1).norm() < 1e-8 * a.lambda1.norm(), "{} vs {}", a.lambda1, b.lambda1);
        assert!((a.bound - b.bound).abs() < 1e-8 * a.bound, "{} vs {}", a.bound, b.bound);
    }

    #[test]
    fn equality_case_saturates() {
        let p = params();
        let s = eigenvalue_shift(&density_shape(&p), &p, &QuadratureSpec::default()).unwrap();
        assert!((s.saturation - 1.0).abs() < 1e-10, "{}", s.saturation);
        let t = eigenvalue_shift(&identity(), &p, &QuadratureSpec::default()).unwrap();
        assert!(t.saturation < 1.0);
    }

    #[test]
    fn gram_is_measured() {
        let g = orthonormality(&params(), &QuadratureSpec::default()).unwrap();
        assert!(g.y1y1 > 0.0 && g.y2y2 > 0.0);
        // generically not orthonormal
        assert!((g.y1y1 - 1.0).abs() > 1e-3);
    }

    #[test]
    fn hierarchy_equation_holds() {
        let h = hierarchy_check(&identity(), &params(), &QuadratureSpec::default(), HIERARCHY_INTERVAL).unwrap();
        assert!(h.orthogonality_residual < 1e-7, "{}", h.orthogonality_residual);
        assert!(h.equation_residual < 1e-6, "{}", h.equation_residual);
    }
}
