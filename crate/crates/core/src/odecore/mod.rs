//! Rational-coefficient linear ODEs, companion reduction and perturbed right-hand sides.

mod poly;
mod rational;

pub use poly::ComplexPoly;
pub use rational::{RationalFn, ROOT_MATCH_TOL};

use serde::{Deserialize, Serialize};

use crate::cjson;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::transport::BranchState;

/// Relative radius around a pole inside which evaluation is refused.
pub const POLE_EXCLUSION: f64 = 1e-6;

/// Singularity sets are deduplicated at this distance.
pub const DEDUP_TOL: f64 = 1e-9;

pub fn pole_exclusion_radius(x: C64) -> f64 {
    POLE_EXCLUSION * (1.0 + x.norm())
}

/// Monic scalar equation `y⁽ⁿ⁾ + A_{n−1} y⁽ⁿ⁻¹⁾ + … + A_0 y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalarOdeRaw")]
pub struct ScalarODE {
    order: usize,
    coeffs: Vec<RationalFn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarOdeRaw {
    order: Option<usize>,
    coeffs: Vec<RationalFn>,
}

impl TryFrom<ScalarOdeRaw> for ScalarODE {
    type Error = String;
    fn try_from(r: ScalarOdeRaw) -> std::result::Result<Self, String> {
        let order = r.order.unwrap_or(r.coeffs.len());
        Self::new(r.coeffs)
            .filter(|o| o.order == order)
            .ok_or_else(|| format!("order {order} needs exactly {order} coefficients"))
    }
}

impl ScalarODE {
    /// Coefficients `A_0 … A_{n−1}`; `None` for an empty list.
    pub fn new(coeffs: Vec<RationalFn>) -> Option<Self> {
        if coeffs.is_empty() {
            return None;
        }
        Some(Self {
            order: coeffs.len(),
            coeffs,
        })
    }

    /// Normalizes `Σ p_k y⁽ᵏ⁾ = 0` (with `p_n` the leading polynomial) to monic form.
    pub fn from_polynomial_coeffs(polys: &[ComplexPoly]) -> Result<Self> {
        let (lead, rest) = polys
            .split_last()
            .ok_or_else(|| Error::Invalid("empty coefficient list".into()))?;
        if lead.is_zero() {
            return Err(Error::Invalid("leading coefficient vanishes".into()));
        }
        let coeffs = rest
            .iter()
            .map(|p| RationalFn::new(p.clone(), lead.clone()))
            .collect();
        Self::new(coeffs).ok_or_else(|| Error::Invalid("equation of order zero".into()))
    }

    /// `x(1−x)y″ + [c − (a+b+1)x]y′ − ab·y = 0`.
    pub fn hypergeometric(a: C64, b: C64, c: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::from_polynomial_coeffs(&[
            ComplexPoly::constant(-a * b),
            ComplexPoly::new(vec![c, -(a + b + one)]),
            ComplexPoly::new(vec![C64::new(0.0, 0.0), one, -one]),
        ])
        .expect("hypergeometric leading coefficient is nonzero")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[RationalFn] {
        &self.coeffs
    }

    /// `y⁽ⁿ⁾ + Σ A_k y⁽ᵏ⁾` given the jet `[y, y′, …, y⁽ⁿ⁾]`.
    pub fn residual(&self, x: C64, jet: &[C64]) -> C64 {
        assert_eq!(jet.len(), self.order + 1, "jet must hold n+1 derivatives");
        self.coeffs
            .iter()
            .zip(jet)
            .fold(jet[self.order], |acc, (a, &y)| acc + a.eval(x) * y)
    }

    pub fn singularities(&self) -> Vec<C64> {
        dedup(self.coeffs.iter().flat_map(|r| r.poles()).collect())
    }
}

/// First-order system `ψ′ = A(x)ψ` with rational entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRaw", into = "SystemRaw")]
pub struct MeromorphicSystem {
    dim: usize,
    entries: Vec<RationalFn>,
    singularities: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemRaw {
    entries: Vec<Vec<RationalFn>>,
}

impl From<MeromorphicSystem> for SystemRaw {
    fn from(s: MeromorphicSystem) -> Self {
        Self {
            entries: s.entries.chunks(s.dim).map(|r| r.to_vec()).collect(),
        }
    }
}

impl TryFrom<SystemRaw> for MeromorphicSystem {
    type Error = String;
    fn try_from(r: SystemRaw) -> std::result::Result<Self, String> {
        Self::from_grid(r.entries).map_err(|e| e.to_string())
    }
}

impl MeromorphicSystem {
    /// Row-major `dim × dim` entries.
    pub fn new(dim: usize, entries: Vec<RationalFn>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {dim}x{dim} system",
                entries.len()
            )));
        }
        let singularities = dedup(entries.iter().flat_map(|r| r.poles()).collect());
        Ok(Self {
            dim,
            entries,
            singularities,
        })
    }

    pub fn from_grid(rows: Vec<Vec<RationalFn>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("system matrix must be square".into()));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn constant(m: &CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch("system matrix must be square".into()));
        }
        let n = m.nrows();
        Self::new(
            n,
            (0..n * n)
                .map(|k| RationalFn::constant(m[(k / n, k % n)]))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFn {
        &self.entries[i * self.dim + j]
    }

    pub fn singularities(&self) -> &[C64] {
        &self.singularities
    }

    /// `A(x)` without any pole guard.
    pub fn eval(&self, x: C64) -> CMat {
        CMat::from_fn(self.dim, self.dim, |i, j| self.entry(i, j).eval(x))
    }

    /// `tr A(x)`.
    pub fn trace(&self, x: C64) -> C64 {
        (0..self.dim).map(|i| self.entry(i, i).eval(x)).sum()
    }
}

/// How the perturbation factor multiplies `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PerturbationKind {
    Meromorphic,
    #[serde(rename = "power")]
    PowerWeighted {
        #[serde(with = "cjson::complex")]
        lambda: C64,
    },
    #[serde(rename = "log")]
    LogWeighted,
}

impl PerturbationKind {
    pub fn is_multivalued(&self) -> bool {
        !matches!(self, Self::Meromorphic)
    }
}

/// `B(x) = H(x)`, `x^λ·H(x)` or `log(x)·H(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PerturbationRaw", into = "PerturbationRaw")]
pub struct PerturbationSpec {
    kind: PerturbationKind,
    dim: usize,
    h: Vec<RationalFn>,
}

#[derive(Serialize, Deserialize)]
struct PerturbationRaw {
    #[serde(flatten)]
    kind: PerturbationKind,
    #[serde(rename = "H")]
    h: Vec<Vec<RationalFn>>,
}

impl From<PerturbationSpec> for PerturbationRaw {
    fn from(p: PerturbationSpec) -> Self {
        Self {
            kind: p.kind,
            h: p.h.chunks(p.dim).map(|r| r.to_vec()).collect(),
        }
    }
}

impl TryFrom<PerturbationRaw> for PerturbationSpec {
    type Error = String;
    fn try_from(r: PerturbationRaw) -> std::result::Result<Self, String> {
        Self::from_grid(r.kind, r.h).map_err(|e| e.to_string())
    }
}

/// Branch point of the multivalued factors `x^λ` and `log x`.
pub const BRANCH_POINT: C64 = C64 { re: 0.0, im: 0.0 };

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, dim: usize, h: Vec<RationalFn>) -> Result<Self> {
        if dim == 0 || h.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {dim}x{dim} perturbation",
                h.len()
            )));
        }
        Ok(Self { kind, dim, h })
    }

    pub fn from_grid(kind: PerturbationKind, rows: Vec<Vec<RationalFn>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("H must be square".into()));
        }
        Self::new(kind, dim, rows.into_iter().flatten().collect())
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same `H` with a different kind.
    pub fn with_kind(&self, kind: PerturbationKind) -> Self {
        Self {
            kind,
            ..self.clone()
        }
    }

    /// Entries of `H` in row-major order.
    pub fn h_entries(&self) -> &[RationalFn] {
        &self.h
    }

    pub fn h(&self, x: C64) -> CMat {
        CMat::from_fn(self.dim, self.dim, |i, j| self.h[i * self.dim + j].eval(x))
    }

    /// Poles of `H` plus the branch point for multivalued kinds.
    pub fn singularities(&self) -> Vec<C64> {
        let mut pts: Vec<C64> = self.h.iter().flat_map(|r| r.poles()).collect();
        if self.kind.is_multivalued() {
            pts.push(BRANCH_POINT);
        }
        dedup(pts)
    }

    /// Scalar factor multiplying `H` at `x` on the tracked branch.
    pub fn factor(&self, x: C64, branch: Option<&BranchState>) -> Result<C64> {
        match self.kind {
            PerturbationKind::Meromorphic => Ok(C64::new(1.0, 0.0)),
            kind => {
                let state = branch.ok_or(Error::BranchRequired)?;
                crate::transport::branch_factor(state, kind, x)
            }
        }
    }

    /// `B(x)`.
    pub fn eval(&self, x: C64, branch: Option<&BranchState>) -> Result<CMat> {
        let f = self.factor(x, branch)?;
        Ok(self.h(x) * f)
    }
}

/// Standard companion matrix: ones on the superdiagonal, last row `(−A_0 … −A_{n−1})`.
pub fn companion(ode: &ScalarODE) -> MeromorphicSystem {
    let n = ode.order();
    let one = RationalFn::constant(C64::new(1.0, 0.0));
    let entries = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i + 1 == n {
                ode.coeffs()[j].neg()
            } else if j == i + 1 {
                one.clone()
            } else {
                RationalFn::zero()
            }
        })
        .collect();
    MeromorphicSystem::new(n, entries).expect("companion shape is consistent")
}

pub fn system_singularities(sys: &MeromorphicSystem) -> Vec<C64> {
    sys.singularities().to_vec()
}

fn check_clear(x: C64, poles: &[C64]) -> Result<()> {
    let r = pole_exclusion_radius(x);
    match poles.iter().find(|&&p| (x - p).norm() < r) {
        Some(&pole) => Err(Error::SingularPoint { x, pole }),
        None => Ok(()),
    }
}

/// `A(x) + ρ·B(x)` with multivalued factors read from `branch`.
///
/// At `ρ = 0` this is exactly `A(x)`, and the perturbation is not evaluated.
pub fn perturbed_rhs(
    sys: &MeromorphicSystem,
    pert: Option<&PerturbationSpec>,
    rho: C64,
    x: C64,
    branch: Option<&BranchState>,
) -> Result<CMat> {
    check_clear(x, sys.singularities())?;
    let a = sys.eval(x);
    match pert {
        Some(p) if rho != C64::new(0.0, 0.0) => {
            if p.dim() != sys.dim() {
                return Err(Error::ShapeMismatch("perturbation and system differ in size".into()));
            }
            check_clear(x, &p.singularities())?;
            Ok(a + p.eval(x, branch)? * rho)
        }
        _ => Ok(a),
    }
}

/// Removes near-duplicates, keeping first occurrences.
pub fn dedup(pts: Vec<C64>) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().any(|q| (p - q).norm() <= DEDUP_TOL * (1.0 + p.norm())) {
            out.push(p);
        }
    }
    out
}

/// The perturbation `B = [[0,0],[1/(x(1−x)),0]]` that leaves the hypergeometric monodromy unchanged.
pub fn trivial_hypergeometric_perturbation() -> PerturbationSpec {
    let x1mx = ComplexPoly::from_real(&[0.0, 1.0, -1.0]);
    PerturbationSpec::new(
        PerturbationKind::Meromorphic,
        2,
        vec![
            RationalFn::zero(),
            RationalFn::zero(),
            RationalFn::new(ComplexPoly::one(), x1mx),
            RationalFn::zero(),
        ],
    )
    .expect("2x2 perturbation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    fn const_ode(vals: &[f64]) -> ScalarODE {
        ScalarODE::new(vals.iter().map(|&v| RationalFn::constant(re(v))).collect()).unwrap()
    }

    #[test]
    fn companion_of_trivial_equation() {
        let sys = companion(&const_ode(&[0.0, 0.0]));
        let m = sys.eval(re(0.7));
        assert_eq!(m, CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]));
    }

    #[test]
    fn companion_constant_third_order() {
        let sys = companion(&const_ode(&[1.0, 1.0, 1.0]));
        let m = sys.eval(re(0.0));
        let want = CMat::from_row_slice(
            3,
            3,
            &[0., 1., 0., 0., 0., 1., -1., -1., -1.].map(re),
        );
        assert_eq!(m, want);
    }

    #[test]
    fn hypergeometric_companion_last_row() {
        let (a, b, cc) = (re(0.3), re(0.7), re(0.4));
        let sys = companion(&ScalarODE::hypergeometric(a, b, cc));
        let x = c(0.37, 0.11);
        let m = sys.eval(x);
        let d = x * (1.0 - x);
        assert!((m[(1, 0)] - a * b / d).norm() < 1e-13);
        assert!((m[(1, 1)] + (cc - (a + b + 1.0) * x) / d).norm() < 1e-13);
        let mut s = system_singularities(&sys);
        s.sort_by(|p, q| p.re.total_cmp(&q.re));
        assert_eq!(s.len(), 2);
        assert!(s[0].norm() < 1e-14 && (s[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn singularities_of_quadratic_denominator() {
        let e = RationalFn::new(ComplexPoly::one(), ComplexPoly::from_real(&[-4.0, 0.0, 1.0]));
        let sys = MeromorphicSystem::new(1, vec![e]).unwrap();
        let mut s: Vec<f64> = sys.singularities().iter().map(|z| z.re).collect();
        s.sort_by(f64::total_cmp);
        assert!((s[0] + 2.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
        assert!(MeromorphicSystem::constant(&CMat::identity(2, 2))
            .unwrap()
            .singularities()
            .is_empty());
    }

    #[test]
    fn trivial_perturbation_at_half() {
        let sys = companion(&ScalarODE::hypergeometric(re(0.3), re(0.7), re(0.4)));
        let pert = trivial_hypergeometric_perturbation();
        let rho = c(1e-3, 0.0);
        let got = perturbed_rhs(&sys, Some(&pert), rho, re(0.5), None).unwrap();
        let mut want = sys.eval(re(0.5));
        want[(1, 0)] += rho * 4.0;
        assert!(crate::linalg::max_abs_diff(&got, &want) < 1e-15);
    }

    #[test]
    fn zero_rho_is_exactly_a() {
        let sys = companion(&ScalarODE::hypergeometric(re(0.3), re(0.7), re(0.4)));
        let pert = trivial_hypergeometric_perturbation().with_kind(PerturbationKind::LogWeighted);
        let x = c(0.2, -0.4);
        let got = perturbed_rhs(&sys, Some(&pert), re(0.0), x, None).unwrap();
        assert_eq!(got, sys.eval(x));
    }

    #[test]
    fn guards_poles_and_missing_branch() {
        let sys = companion(&ScalarODE::hypergeometric(re(0.3), re(0.7), re(0.4)));
        assert!(matches!(
            perturbed_rhs(&sys, None, re(0.0), re(1e-8), None),
            Err(Error::SingularPoint { .. })
        ));
        let pert = trivial_hypergeometric_perturbation()
            .with_kind(PerturbationKind::PowerWeighted { lambda: re(0.5) });
        assert_eq!(
            perturbed_rhs(&sys, Some(&pert), re(1e-3), re(0.5), None),
            Err(Error::BranchRequired)
        );
    }

    #[test]
    fn scalar_residual_of_exponential() {
        // y' − y = 0 has solution e^x
        let ode = const_ode(&[-1.0]);
        let x = re(0.3);
        assert!(ode.residual(x, &[x.exp(), x.exp()]).norm() < 1e-15);
    }

    #[test]
    fn perturbation_json() {
        let p: PerturbationSpec = serde_json::from_str(
            r#"{"kind":"power","lambda":[0.5,0],"H":[[[[1,0]],[]],[[],[[1,0]]]]}"#,
        )
        .unwrap();
        assert_eq!(p.kind(), PerturbationKind::PowerWeighted { lambda: re(0.5) });
        assert_eq!(p.singularities(), vec![re(0.0)]);
    }
}
