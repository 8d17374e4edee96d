//! Order-by-order solution of deformed equations by variation of parameters.
//!
//! The deformed equation is `L y + ρ·q(x)·y = 0` with `L` monic of order `n`. Expanding
//! `y = Σ ρᵏ y_k` gives `L y_0 = 0` and `L y_k = −q·y_{k−1}` for `k ≥ 1`; each level is solved
//! with `y_p = Σ u_i y_i`, `u_i′` from Cramer's rule and `u_i(x₀) = 0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypergeom::UnitIntervalBasis;
use crate::linalg::{determinant, CMat, C64};
use crate::odecore::ScalarODE;
use crate::quad::adaptive;

/// A basis `y_1 … y_n` of solutions of an order-`n` equation.
pub trait SolutionBasis: Send + Sync {
    fn order(&self) -> usize;

    /// `(n+1) × n` matrix whose row `j` holds the `j`-th derivatives of every member.
    fn jet(&self, x: C64) -> Result<CMat>;

    /// Wronskian matrix (rows 0 … n−1 of the jet).
    fn wronskian(&self, x: C64) -> Result<CMat> {
        let n = self.order();
        Ok(self.jet(x)?.rows(0, n).into_owned())
    }
}

/// A complex-valued function of a real variable.
pub type RealFn = Arc<dyn Fn(f64) -> Result<C64> + Send + Sync>;

/// Default quadrature tolerance for the coefficient integrals.
pub const DEFAULT_TOL: f64 = 1e-13;

/// Relative size of `det W` (against the product of column norms) treated as singular.
pub const WRONSKIAN_FLOOR: f64 = 1e-14;

/// Level `k` of the hierarchy: `L y_k = −q·y_{k−1}`.
#[derive(Clone)]
pub struct LevelProblem {
    pub level: usize,
    pub source_level: usize,
    pub ode: ScalarODE,
    coupling: RealFn,
}

impl LevelProblem {
    /// Right-hand side built from the previous level's solution.
    pub fn forcing(&self, previous: RealFn) -> RealFn {
        let q = self.coupling.clone();
        Arc::new(move |x| Ok(-q(x)? * previous(x)?))
    }
}

impl fmt::Debug for LevelProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelProblem")
            .field("level", &self.level)
            .field("source_level", &self.source_level)
            .field("ode", &self.ode)
            .finish_non_exhaustive()
    }
}

/// The inhomogeneous problems for levels `1 … K`.
pub fn hierarchy(ode: &ScalarODE, coupling: RealFn, k: usize) -> Result<Vec<LevelProblem>> {
    if k == 0 {
        return Err(Error::Invalid("series order must be at least 1".into()));
    }
    Ok((1..=k)
        .map(|level| LevelProblem {
            level,
            source_level: level - 1,
            ode: ode.clone(),
            coupling: coupling.clone(),
        })
        .collect())
}

/// Coupling `q = −f/(x(1−x))` of the hypergeometric deformation, so that level forcings read
/// `f·y_{k−1}/(x(1−x))`.
pub fn hypergeometric_coupling(f: RealFn) -> RealFn {
    Arc::new(move |x| Ok(-f(x)? / (x * (1.0 - x))))
}

/// `1/det W` for the basis at 0 of the hypergeometric equation, from Abel's formula
/// `det W = (1−c)·x^{−c}(1−x)^{c−a−b−1}`.
pub fn hypergeometric_inverse_wronskian(a: C64, b: C64, c: C64) -> RealFn {
    Arc::new(move |x| {
        let (x, xm) = (C64::new(x, 0.0), C64::new(1.0 - x, 0.0));
        Ok((c * x.ln() + (a + b + 1.0 - c) * xm.ln()).exp() / (1.0 - c))
    })
}

/// `y_p = Σ u_i y_i` with `u_i(x₀) = 0`.
#[derive(Clone)]
pub struct ParticularSolution {
    basis: Arc<dyn SolutionBasis>,
    forcing: RealFn,
    x0: f64,
    inv_wronskian: Option<RealFn>,
    tol: f64,
}

impl fmt::Debug for ParticularSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParticularSolution")
            .field("x0", &self.x0)
            .field("order", &self.basis.order())
            .field("abel", &self.inv_wronskian.is_some())
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

impl ParticularSolution {
    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn basepoint(&self) -> f64 {
        self.x0
    }

    /// `u_i′(x) = det Ω_i / det W`, with `Ω_i` the Wronskian matrix whose column `i` is
    /// replaced by `(0, …, 0, g)ᵀ`.
    pub fn coefficient_derivatives(&self, x: f64) -> Result<Vec<C64>> {
        let n = self.order();
        let g = (self.forcing)(x)?;
        if !g.is_finite() {
            return Err(Error::NonIntegrableForcing(format!("forcing is {g} at x = {x}")));
        }
        let w = self.basis.wronskian(C64::new(x, 0.0))?;
        let inv_det = match &self.inv_wronskian {
            Some(inv) => inv(x)?,
            None => {
                let det = determinant(&w);
                let scale: f64 = w.column_iter().map(|col| col.norm()).product();
                if !(det.norm() > WRONSKIAN_FLOOR * scale) {
                    return Err(Error::WronskianVanishes(C64::new(x, 0.0)));
                }
                1.0 / det
            }
        };
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut omega = w.clone();
            for r in 0..n {
                omega[(r, i)] = C64::new(0.0, 0.0);
            }
            omega[(n - 1, i)] = g;
            out.push(determinant(&omega) * inv_det);
        }
        Ok(out)
    }

    /// `u_i(x) = ∫_{x₀}^x u_i′`.
    pub fn coefficients(&self, x: f64) -> Result<Vec<C64>> {
        let n = self.order();
        if x == self.x0 {
            return Ok(vec![C64::new(0.0, 0.0); n]);
        }
        let (lo, hi, sign) = if x > self.x0 { (self.x0, x, 1.0) } else { (x, self.x0, -1.0) };
        let r = adaptive(|t| self.coefficient_derivatives(t), lo, hi, self.tol, self.tol)?;
        Ok(r.value.into_iter().map(|v| v * sign).collect())
    }

    /// `[y_p, y_p′, …, y_p⁽ⁿ⁾]`. The top derivative picks up `Σ u_i′ y_i⁽ⁿ⁻¹⁾ = g`.
    pub fn jet(&self, x: f64) -> Result<Vec<C64>> {
        let n = self.order();
        let u = self.coefficients(x)?;
        let du = self.coefficient_derivatives(x)?;
        let j = self.basis.jet(C64::new(x, 0.0))?;
        let mut out: Vec<C64> = (0..=n)
            .map(|r| (0..n).map(|i| u[i] * j[(r, i)]).sum())
            .collect();
        out[n] += (0..n).map(|i| du[i] * j[(n - 1, i)]).sum::<C64>();
        Ok(out)
    }

    pub fn eval(&self, x: f64) -> Result<C64> {
        let u = self.coefficients(x)?;
        let j = self.basis.jet(C64::new(x, 0.0))?;
        Ok((0..self.order()).map(|i| u[i] * j[(0, i)]).sum())
    }

    /// Largest `|Σ u_i′ y_i⁽ʲ⁾|` over `j ≤ n−2`; zero by construction.
    pub fn constraint_residual(&self, x: f64) -> Result<f64> {
        let n = self.order();
        let du = self.coefficient_derivatives(x)?;
        let j = self.basis.jet(C64::new(x, 0.0))?;
        Ok((0..n.saturating_sub(1))
            .map(|r| (0..n).map(|i| du[i] * j[(r, i)]).sum::<C64>().norm())
            .fold(0.0, f64::max))
    }
}

/// Particular solution of the monic hypergeometric equation `y″ + P y′ + Q y = g` on `(0, 1)`,
/// using the basis at 0 and the Abel form of its Wronskian.
pub fn particular_solution_2nd(a: C64, b: C64, c: C64, forcing: RealFn, x0: f64, tol: f64) -> Result<ParticularSolution> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::Invalid(format!("basepoint {x0} must lie in (0, 1)")));
    }
    Ok(ParticularSolution {
        basis: Arc::new(UnitIntervalBasis::new(a, b, c)?),
        forcing,
        x0,
        inv_wronskian: Some(hypergeometric_inverse_wronskian(a, b, c)),
        tol,
    })
}

/// Particular solution of an order-`n` monic equation from any basis, with `det W` computed.
pub fn particular_solution_nth(basis: Arc<dyn SolutionBasis>, forcing: RealFn, x0: f64, tol: f64) -> Result<ParticularSolution> {
    let det = determinant(&basis.wronskian(C64::new(x0, 0.0))?);
    if det.norm() == 0.0 || !det.is_finite() {
        return Err(Error::WronskianVanishes(C64::new(x0, 0.0)));
    }
    Ok(ParticularSolution {
        basis,
        forcing,
        x0,
        inv_wronskian: None,
        tol,
    })
}

/// One term `y_k` of the series, with how it was obtained.
#[derive(Debug, Clone)]
pub enum SeriesTerm {
    /// `Σ coeffs_i·y_i`.
    Homogeneous(HomogeneousTerm),
    /// Variation-of-parameters integral with zero data at the basepoint.
    Particular(ParticularSolution),
}

#[derive(Clone)]
pub struct HomogeneousTerm {
    basis: Arc<dyn SolutionBasis>,
    pub coeffs: Vec<C64>,
}

impl fmt::Debug for HomogeneousTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousTerm").field("coeffs", &self.coeffs).finish_non_exhaustive()
    }
}

impl SeriesTerm {
    pub fn jet(&self, x: f64) -> Result<Vec<C64>> {
        match self {
            SeriesTerm::Homogeneous(h) => {
                let j = h.basis.jet(C64::new(x, 0.0))?;
                Ok((0..j.nrows())
                    .map(|r| h.coeffs.iter().enumerate().map(|(i, a)| a * j[(r, i)]).sum())
                    .collect())
            }
            SeriesTerm::Particular(p) => p.jet(x),
        }
    }

    pub fn eval(&self, x: f64) -> Result<C64> {
        match self {
            SeriesTerm::Homogeneous(h) => {
                let j = h.basis.jet(C64::new(x, 0.0))?;
                Ok(h.coeffs.iter().enumerate().map(|(i, a)| a * j[(0, i)]).sum())
            }
            SeriesTerm::Particular(p) => p.eval(x),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, SeriesTerm::Homogeneous(_))
    }
}

/// Truncated expansion `y_ρ ≈ Σ_{k≤K} ρᵏ y_k`.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub order: usize,
    pub basepoint: f64,
    pub terms: Vec<Arc<SeriesTerm>>,
}

impl SeriesSolution {
    /// `[y_0(x), …, y_K(x)]`.
    pub fn term_values(&self, x: f64) -> Result<Vec<C64>> {
        self.terms.iter().map(|t| t.eval(x)).collect()
    }

    pub fn eval(&self, x: f64, rho: C64) -> Result<C64> {
        Ok(horner(&self.term_values(x)?, rho))
    }

    /// Jet of the truncated sum at `ρ`.
    pub fn jet(&self, x: f64, rho: C64) -> Result<Vec<C64>> {
        let jets = self.terms.iter().map(|t| t.jet(x)).collect::<Result<Vec<_>>>()?;
        let len = jets[0].len();
        Ok((0..len)
            .map(|d| horner(&jets.iter().map(|j| j[d]).collect::<Vec<_>>(), rho))
            .collect())
    }

    /// `L y + ρ q y` applied to the truncated sum; of size `O(ρ^{K+1})`.
    pub fn residual(&self, ode: &ScalarODE, coupling: &RealFn, x: f64, rho: C64) -> Result<C64> {
        let jet = self.jet(x, rho)?;
        Ok(ode.residual(C64::new(x, 0.0), &jet) + rho * coupling(x)? * jet[0])
    }
}

fn horner(values: &[C64], rho: C64) -> C64 {
    values.iter().rev().fold(C64::new(0.0, 0.0), |acc, v| acc * rho + v)
}

/// How the particular integrals obtain `1/det W`.
#[derive(Clone)]
pub enum WronskianSource {
    /// Determinant of the basis' Wronskian matrix.
    Numeric,
    /// A closed form such as Abel's formula.
    Closed(RealFn),
}

/// Builds `y_0 = Σ ψ_i y_i` and the particular terms `y_1 … y_K`, each with zero data at `x₀`.
pub fn deformed_series(
    ode: &ScalarODE,
    basis: Arc<dyn SolutionBasis>,
    coupling: RealFn,
    k: usize,
    x0: f64,
    initial: &[C64],
    wronskian: WronskianSource,
    tol: f64,
) -> Result<SeriesSolution> {
    if basis.order() != ode.order() || initial.len() != ode.order() {
        return Err(Error::ShapeMismatch(format!(
            "equation of order {}, basis of order {}, {} initial coefficients",
            ode.order(),
            basis.order(),
            initial.len()
        )));
    }
    let mut terms = vec![Arc::new(SeriesTerm::Homogeneous(HomogeneousTerm {
        basis: basis.clone(),
        coeffs: initial.to_vec(),
    }))];
    for level in hierarchy(ode, coupling, k)? {
        let prev = terms[level.source_level].clone();
        let forcing = level.forcing(Arc::new(move |x| prev.eval(x)));
        let p = ParticularSolution {
            basis: basis.clone(),
            forcing,
            x0,
            inv_wronskian: match &wronskian {
                WronskianSource::Numeric => None,
                WronskianSource::Closed(f) => Some(f.clone()),
            },
            tol,
        };
        terms.push(Arc::new(SeriesTerm::Particular(p)));
    }
    Ok(SeriesSolution {
        order: k,
        basepoint: x0,
        terms,
    })
}

/// Series for the hypergeometric deformation `B = [[0,0],[f/(x(1−x)),0]]`, starting from
/// `y_0 = ψ₁y₁ + ψ₂y₂` in the basis at 0.
pub fn hypergeometric_series(a: C64, b: C64, c: C64, f: RealFn, k: usize, x0: f64, initial: [C64; 2], tol: f64) -> Result<SeriesSolution> {
    deformed_series(
        &ScalarODE::hypergeometric(a, b, c),
        Arc::new(UnitIntervalBasis::new(a, b, c)?),
        hypergeometric_coupling(f),
        k,
        x0,
        &initial,
        WronskianSource::Closed(hypergeometric_inverse_wronskian(a, b, c)),
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    fn constant(v: f64) -> RealFn {
        Arc::new(move |_| Ok(re(v)))
    }

    /// `y′ + a y = g` with basis `e^{−ax}`.
    struct Exponential(f64);

    impl SolutionBasis for Exponential {
        fn order(&self) -> usize {
            1
        }
        fn jet(&self, x: C64) -> Result<CMat> {
            let e = (-self.0 * x).exp();
            Ok(CMat::from_row_slice(2, 1, &[e, -self.0 * e]))
        }
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let p = particular_solution_2nd(re(0.3), re(0.7), re(0.4), constant(0.0), 0.5, 1e-12).unwrap();
        assert_eq!(p.eval(0.7).unwrap(), re(0.0));
        let h = hierarchy(&ScalarODE::hypergeometric(re(0.3), re(0.7), re(0.4)), constant(0.0), 1).unwrap();
        assert_eq!(h[0].forcing(constant(2.0))(0.3).unwrap(), re(0.0));
    }

    #[test]
    fn levels_read_the_previous_level() {
        let ode = ScalarODE::hypergeometric(re(0.3), re(0.7), re(0.4));
        let h = hierarchy(&ode, hypergeometric_coupling(constant(1.0)), 3).unwrap();
        for (i, l) in h.iter().enumerate() {
            assert_eq!(l.level, i + 1);
            assert_eq!(l.source_level, i);
        }
        // f ≡ 1: level 1 forcing is y₀/(x(1−x))
        let g = h[0].forcing(constant(2.0))(0.25).unwrap();
        assert!((g - re(2.0 / (0.25 * 0.75))).norm() < 1e-14);
        assert!(hierarchy(&ode, constant(1.0), 0).is_err());
    }

    #[test]
    fn first_order_integrating_factor() {
        let a = 0.7;
        let p = particular_solution_nth(Arc::new(Exponential(a)), constant(1.0), 0.0, 1e-13).unwrap();
        for x in [0.3, 1.0, 2.5] {
            let want = (1.0 - (-a * x).exp()) / a;
            assert!((p.eval(x).unwrap() - re(want)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_column_gives_zero_derivative() {
        let p = particular_solution_nth(Arc::new(Exponential(1.0)), constant(0.0), 0.0, 1e-13).unwrap();
        assert_eq!(p.coefficient_derivatives(0.4).unwrap(), vec![re(0.0)]);
    }

    #[test]
    fn abel_and_cramer_agree() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let g: RealFn = Arc::new(|x| Ok(re(x * x + 0.5)));
        let p2 = particular_solution_2nd(a, b, c, g.clone(), 0.5, 1e-13).unwrap();
        let pn = particular_solution_nth(Arc::new(UnitIntervalBasis::new(a, b, c).unwrap()), g, 0.5, 1e-13).unwrap();
        for x in [0.2, 0.45, 0.8] {
            assert!((p2.eval(x).unwrap() - pn.eval(x).unwrap()).norm() < 1e-11);
        }
    }

    #[test]
    fn substitution_residual_and_constraint() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let ode = ScalarODE::hypergeometric(a, b, c);
        let g: RealFn = Arc::new(|x| Ok(re((3.0 * x).sin())));
        let p = particular_solution_2nd(a, b, c, g.clone(), 0.5, 1e-13).unwrap();
        for i in 0..20 {
            let x = 0.1 + 0.8 * i as f64 / 19.0;
            let jet = p.jet(x).unwrap();
            let r = (ode.residual(re(x), &jet) - g(x).unwrap()) * (x * (1.0 - x));
            assert!(r.norm() < 1e-7, "x = {x}: {r}");
            assert!(p.constraint_residual(x).unwrap() < 1e-10);
        }
    }

    #[test]
    fn quadrature_values_differentiate_to_the_jet() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let g: RealFn = Arc::new(|x| Ok(re((3.0 * x).sin())));
        let p = particular_solution_2nd(a, b, c, g, 0.5, 1e-13).unwrap();
        let h = 2e-3;
        for i in 0..15 {
            let x = 0.1 + 0.7 * i as f64 / 14.0;
            let v: Vec<C64> = (-2..=2).map(|k| p.eval(x + h * k as f64).unwrap()).collect();
            let d1 = (v[0] - v[1] * 8.0 + v[3] * 8.0 - v[4]) / (12.0 * h);
            let d2 = (-v[0] + v[1] * 16.0 - v[2] * 30.0 + v[3] * 16.0 - v[4]) / (12.0 * h * h);
            let jet = p.jet(x).unwrap();
            assert!((jet[1] - d1).norm() < 1e-7, "x = {x}");
            assert!((jet[2] - d2).norm() < 1e-5 * (1.0 + jet[2].norm()), "x = {x}");
        }
    }

    #[test]
    fn series_without_coupling_is_homogeneous() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let s = hypergeometric_series(a, b, c, constant(0.0), 2, 0.5, [re(1.0), re(0.0)], 1e-13).unwrap();
        let v = s.term_values(0.3).unwrap();
        assert!(s.terms[0].is_homogeneous());
        assert!((v[0] - crate::hypergeom::hyp2f1(a, b, c, re(0.3)).unwrap()).norm() < 1e-13);
        assert_eq!(v[1], re(0.0));
        assert_eq!(v[2], re(0.0));
    }

    #[test]
    fn series_residual_scales_with_rho_cubed() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let ode = ScalarODE::hypergeometric(a, b, c);
        let coupling = hypergeometric_coupling(constant(1.0));
        let s = hypergeometric_series(a, b, c, constant(1.0), 2, 0.5, [re(1.0), re(0.0)], 1e-13).unwrap();
        let r1 = s.residual(&ode, &coupling, 0.7, re(0.1)).unwrap().norm();
        let r2 = s.residual(&ode, &coupling, 0.7, re(0.05)).unwrap().norm();
        let ratio = r1 / r2;
        assert!((ratio / 8.0 - 1.0).abs() < 0.05, "ratio {ratio}");
    }
}
