//! Quadrature rules: Gauss–Legendre, Gauss–Jacobi, a graded endpoint-weighted rule on
//! `[0, 1]`, adaptive Gauss–Kronrod and tanh–sinh for endpoint singularities.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Nodes and weights on `[−1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Jacobi rule for the weight `(1−t)^α (1+t)^β` on `[−1, 1]`.
///
/// Nodes start from Golub–Welsch and are polished by Newton on the orthonormal recurrence;
/// weights come from the Christoffel function.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Rule> {
    if n == 0 {
        return Err(Error::Invalid("quadrature needs at least one node".into()));
    }
    if alpha <= -1.0 || beta <= -1.0 {
        return Err(Error::NonIntegrableWeight(format!(
            "Jacobi exponents ({alpha}, {beta}) must exceed −1"
        )));
    }
    let (diag, off) = jacobi_recurrence(n, alpha, beta);
    let mu0 = ((alpha + beta + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(alpha + beta + 2.0))
    .exp();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = diag[i];
        if i + 1 < n {
            t[(i, i + 1)] = off[i + 1];
            t[(i + 1, i)] = off[i + 1];
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let p0 = 1.0 / mu0.sqrt();
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (pn, dpn, _) = orthonormal_eval(*x, n, &diag, &off, p0);
            if dpn == 0.0 {
                break;
            }
            let step = pn / dpn;
            if step.abs() > 1e-6 {
                break;
            }
            *x -= step;
        }
        let (_, _, christoffel) = orthonormal_eval(*x, n, &diag, &off, p0);
        weights.push(1.0 / christoffel);
    }
    Ok(Rule { nodes, weights })
}

pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi(n, 0.0, 0.0).expect("Legendre weight is integrable")
}

/// Diagonal `a_k` and off-diagonal `b_k` (`b_k` couples `k−1` and `k`) of the Jacobi matrix.
fn jacobi_recurrence(n: usize, al: f64, be: f64) -> (Vec<f64>, Vec<f64>) {
    let s = al + be;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n + 1];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 {
            (be - al) / (s + 2.0)
        } else {
            (be * be - al * al) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
        };
    }
    for (k, o) in off.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let sq = if k == 1 {
            4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s).powi(2) * (3.0 + s))
        } else {
            4.0 * kf * (kf + al) * (kf + be) * (kf + s)
                / ((2.0 * kf + s).powi(2) * (2.0 * kf + s + 1.0) * (2.0 * kf + s - 1.0))
        };
        *o = sq.sqrt();
    }
    (diag, off)
}

/// `(p̂_n(x), p̂_n′(x), Σ_{k<n} p̂_k(x)²)` for the orthonormal family.
fn orthonormal_eval(x: f64, n: usize, diag: &[f64], off: &[f64], p0: f64) -> (f64, f64, f64) {
    let (mut p_prev, mut p) = (0.0, p0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    let mut sum = 0.0;
    for k in 0..n {
        sum += p * p;
        let next = ((x - diag[k]) * p - off[k] * p_prev) / off[k + 1];
        let dnext = ((x - diag[k]) * d + p - off[k] * d_prev) / off[k + 1];
        p_prev = p;
        p = next;
        d_prev = d;
        d = dnext;
    }
    (p, d, sum)
}

/// A quadrature node on `[0, 1]` carrying `1 − x` exactly for nodes near 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitNode {
    pub x: f64,
    pub xm: f64,
    pub w: f64,
}

/// Relative size below which endpoint cells stop being refined.
pub const GRADING_TARGET: f64 = 1e-14;
pub const MAX_GRADING_DEPTH: usize = 200;

/// Composite rule for `∫₀¹ g(x)·x^{e₀}(1−x)^{e₁} dx`.
///
/// Each half of `[0, 1]` is split into cells that halve geometrically toward the endpoint.
/// The cell touching an endpoint uses Gauss–Jacobi with that endpoint's exponent; all other
/// cells use Gauss–Legendre with the weight evaluated pointwise. Weights include `ω`.
pub fn graded_unit_rule(n: usize, e0: f64, e1: f64) -> Result<Vec<UnitNode>> {
    if e0 <= -1.0 || e1 <= -1.0 {
        return Err(Error::NonIntegrableWeight(format!(
            "endpoint exponents ({e0}, {e1}) must exceed −1"
        )));
    }
    let gl = gauss_legendre(n);
    let mut left = half_rule(n, e0, e1, &gl)?;
    let right = half_rule(n, e1, e0, &gl)?;
    // mirror: the right half is the left half of the reflected weight. Each node is moved to
    // the nearest double x with xm = 1 − x exact, so integrands that only see x agree with
    // the weight; nodes closer to 1 than that spacing carry O(ε^{1+e₁}) mass and are dropped.
    left.extend(right.into_iter().rev().filter_map(|nd| {
        let x = 1.0 - nd.x;
        (x < 1.0).then(|| UnitNode { x, xm: 1.0 - x, w: nd.w })
    }));
    Ok(left)
}

fn grading_depth(e: f64) -> usize {
    // smallest L with (2^{-L-1})^{1+e} <= target
    let need = GRADING_TARGET.log2() / (1.0 + e);
    ((-need - 1.0).ceil().max(1.0) as usize).min(MAX_GRADING_DEPTH)
}

/// Nodes on `[0, ½]` for the weight `x^{e_near}(1−x)^{e_far}`, ascending in `x`.
fn half_rule(n: usize, e_near: f64, e_far: f64, gl: &Rule) -> Result<Vec<UnitNode>> {
    let depth = grading_depth(e_near);
    let mut out = Vec::with_capacity(n * (depth + 1));
    let tip = 0.5_f64.powi(depth as i32 + 1);
    let gj = gauss_jacobi(n, 0.0, e_near)?;
    let scale = (tip / 2.0).powf(e_near + 1.0);
    for (t, w) in gj.nodes.iter().zip(&gj.weights) {
        let x = tip * (1.0 + t) / 2.0;
        out.push(UnitNode {
            x,
            xm: 1.0 - x,
            w: w * scale * (1.0 - x).powf(e_far),
        });
    }
    let mut lo = tip;
    for _ in 0..depth {
        let hi = 2.0 * lo;
        let half = (hi - lo) / 2.0;
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            let x = lo + half * (1.0 + t);
            out.push(UnitNode {
                x,
                xm: 1.0 - x,
                w: w * half * x.powf(e_near) * (1.0 - x).powf(e_far),
            });
        }
        lo = hi;
    }
    Ok(out)
}

// Gauss–Kronrod 7/15 abscissae and weights
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<C64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    lo: f64,
    hi: f64,
    value: Vec<C64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk15<F>(f: &F, lo: f64, hi: f64, dim: usize) -> Result<Piece>
where
    F: Fn(f64) -> Result<Vec<C64>>,
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut k = vec![C64::new(0.0, 0.0); dim];
    let mut g = vec![C64::new(0.0, 0.0); dim];
    let mut add = |x: f64, wk: f64, wg: f64| -> Result<()> {
        let v = f(x)?;
        if v.len() != dim {
            return Err(Error::ShapeMismatch("integrand changed length".into()));
        }
        for i in 0..dim {
            k[i] += v[i] * wk;
            g[i] += v[i] * wg;
        }
        Ok(())
    };
    add(c, WGK[7], WG[3])?;
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        add(c - h * XGK[j], WGK[j], wg)?;
        add(c + h * XGK[j], WGK[j], wg)?;
    }
    let value: Vec<C64> = k.iter().map(|z| z * h).collect();
    let error = k
        .iter()
        .zip(&g)
        .map(|(a, b)| ((a - b) * h).norm())
        .fold(0.0, f64::max);
    Ok(Piece { lo, hi, value, error })
}

pub const MAX_PIECES: usize = 4000;

/// Global adaptive Gauss–Kronrod (7/15) for vector-valued integrands.
///
/// Bisects the piece with the largest error estimate until the total estimate drops below
/// `max(abs_tol, rel_tol·‖I‖)`.
pub fn adaptive<F>(f: F, lo: f64, hi: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Result<Vec<C64>>,
{
    let probe = f(0.5 * (lo + hi))?;
    let dim = probe.len();
    if lo == hi {
        return Ok(Integral {
            value: vec![C64::new(0.0, 0.0); dim],
            error: 0.0,
            evaluations: 1,
        });
    }
    let first = gk15(&f, lo, hi, dim)?;
    let mut heap = BinaryHeap::new();
    let mut total = first.value.clone();
    let mut err = first.error;
    heap.push(first);
    let mut evals = 16;
    loop {
        let norm = total.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err <= abs_tol.max(rel_tol * norm) {
            break;
        }
        if heap.len() >= MAX_PIECES {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            heap.push(worst);
            break;
        }
        let l = gk15(&f, worst.lo, mid, dim)?;
        let r = gk15(&f, mid, worst.hi, dim)?;
        evals += 30;
        for i in 0..dim {
            total[i] += l.value[i] + r.value[i] - worst.value[i];
        }
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    // re-sum in interval order so the result does not depend on heap history
    let mut pieces = heap.into_vec();
    pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = vec![C64::new(0.0, 0.0); dim];
    let mut error = 0.0;
    for p in &pieces {
        for i in 0..dim {
            value[i] += p.value[i];
        }
        error += p.error;
    }
    Ok(Integral {
        value,
        error,
        evaluations: evals,
    })
}

pub fn adaptive_scalar<F>(f: F, lo: f64, hi: f64, abs_tol: f64, rel_tol: f64) -> Result<(C64, f64)>
where
    F: Fn(f64) -> Result<C64>,
{
    let r = adaptive(|x| f(x).map(|v| vec![v]), lo, hi, abs_tol, rel_tol)?;
    Ok((r.value[0], r.error))
}

/// Tanh–sinh integration of `∫_{s_min}^1 g(s) ds` for integrands singular at `s = 0`.
///
/// The integrand receives `s` and `1 − s`. Levels halve the step until two successive
/// estimates agree to `tol` (max-entry, relative to the larger of 1 and the estimate).
pub fn tanh_sinh<F>(g: F, s_min: f64, tol: f64) -> Result<Integral>
where
    F: Fn(f64, f64) -> Result<Vec<C64>>,
{
    if !(s_min > 0.0 && s_min < 1.0) {
        return Err(Error::Invalid(format!("tanh–sinh cutoff {s_min} outside (0, 1)")));
    }
    // s(t) = 1/(1 + e^{−π sinh t})
    let t_lo = (s_min.ln() / PI).asinh();
    let t_hi = (40.0 / PI).asinh();
    let node = |t: f64| {
        let u = PI * t.sinh();
        let (s, sm) = if u < 0.0 {
            let e = u.exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        } else {
            let e = (-u).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        };
        (s, sm, PI * t.cosh() * s * sm)
    };
    let mut h = 0.5;
    let mut evals = 0;
    let eval_at = |t: f64, acc: &mut Vec<C64>| -> Result<()> {
        let (s, sm, w) = node(t);
        if s < s_min || w == 0.0 {
            return Ok(());
        }
        let v = g(s, sm)?;
        if acc.is_empty() {
            acc.resize(v.len(), C64::new(0.0, 0.0));
        }
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b * w;
        }
        Ok(())
    };
    // level 0: every multiple of h
    let mut raw = Vec::new();
    let k_lo = (t_lo / h).floor() as i64;
    let k_hi = (t_hi / h).ceil() as i64;
    for k in k_lo..=k_hi {
        eval_at(k as f64 * h, &mut raw)?;
        evals += 1;
    }
    let mut estimate: Vec<C64> = raw.iter().map(|z| z * h).collect();
    for _level in 0..12 {
        // add midpoints
        let mut mids = Vec::new();
        let k_lo = (t_lo / h).floor() as i64;
        let k_hi = (t_hi / h).ceil() as i64;
        for k in k_lo..k_hi {
            eval_at((k as f64 + 0.5) * h, &mut mids)?;
            evals += 1;
        }
        if mids.is_empty() {
            mids = vec![C64::new(0.0, 0.0); raw.len()];
        }
        if raw.is_empty() {
            raw = vec![C64::new(0.0, 0.0); mids.len()];
        }
        for (a, b) in raw.iter_mut().zip(&mids) {
            *a += b;
        }
        h /= 2.0;
        let next: Vec<C64> = raw.iter().map(|z| z * h).collect();
        let diff = next
            .iter()
            .zip(&estimate)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = next.iter().map(|z| z.norm()).fold(1.0, f64::max);
        estimate = next;
        if diff <= tol * scale {
            return Ok(Integral {
                value: estimate,
                error: diff,
                evaluations: evals,
            });
        }
    }
    Err(Error::NoConvergence { terms: evals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        for k in 0..20 {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn jacobi_moments() {
        let (al, be) = (-0.6, 0.3);
        let r = gauss_jacobi(12, al, be).unwrap();
        // ∫ (1−t)^α (1+t)^β dt = 2^{α+β+1} B(α+1, β+1)
        let total: f64 = r.weights.iter().sum();
        let want = 2f64.powf(al + be + 1.0) * beta(al + 1.0, be + 1.0);
        assert!((total - want).abs() < 1e-13 * want);
        // first moment: ∫ t (1−t)^α (1+t)^β = want·(β−α)/(α+β+2)
        let m1: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x).sum();
        assert!((m1 - want * (be - al) / (al + be + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn graded_rule_reproduces_beta() {
        let (e0, e1) = (-0.6, 0.4);
        let rule = graded_unit_rule(32, e0, e1).unwrap();
        let total: f64 = rule.iter().map(|n| n.w).sum();
        let want = beta(e0 + 1.0, e1 + 1.0);
        assert!((total - want).abs() < 1e-13 * want);
        assert!(rule.windows(2).all(|w| w[0].x <= w[1].x));
        assert!(rule.iter().all(|n| n.x > 0.0 && n.xm > 0.0));
    }

    #[test]
    fn graded_rule_handles_extra_branch_factor() {
        // ∫ x^{0.2}(1−x)^{0.3}·(1−x)^{0.25} dx
        let rule = graded_unit_rule(32, 0.2, 0.3).unwrap();
        let got: f64 = rule.iter().map(|n| n.w * n.xm.powf(0.25)).sum();
        let want = beta(1.2, 1.55);
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn adaptive_matches_closed_forms() {
        let (v, _) = adaptive_scalar(|x| Ok(C64::new(x.cos(), x.sin())), 0.0, 2.0, 1e-14, 1e-14).unwrap();
        let want = C64::new(0.0, 2.0).exp() / C64::new(0.0, 1.0) - 1.0 / C64::new(0.0, 1.0);
        assert!((v - want).norm() < 1e-13);
        let (v, _) = adaptive_scalar(|x| Ok(C64::new(x.powf(-0.6), 0.0)), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((v.re - 2.5).abs() < 1e-9);
    }

    #[test]
    fn adaptive_propagates_errors() {
        let r = adaptive_scalar(|_| Err(Error::NonFiniteValue(C64::new(0.0, 0.0))), 0.0, 1.0, 1e-8, 1e-8);
        assert!(r.is_err());
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let r = tanh_sinh(|s, _| Ok(vec![C64::new(s.powf(-0.7), 0.0), C64::new(s.ln(), 0.0)]), 1e-120, 1e-13).unwrap();
        assert!((r.value[0].re - 1.0 / 0.3).abs() < 1e-11);
        assert!((r.value[1].re + 1.0).abs() < 1e-12);
    }
}
