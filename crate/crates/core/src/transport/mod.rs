//! Analytic continuation of fundamental matrices along paths and monodromy extraction.

mod branch;
mod integrator;
mod path;

pub use branch::{branch_factor, BranchState, Winding};
pub use integrator::{dopri5, ComplexOde, StepStats};
pub use path::{compose_loops, default_loop_radius, loop_around, PathSpec, Segment, CONTINUITY_TOL};

use serde::Serialize;

use crate::cjson;
use crate::error::{Error, Result};
use crate::hypergeom::{LocalBasis, LocalPoint};
use crate::linalg::{condition_number, eigenvalues, inverse, mat_to_vec, vec_to_mat, CMat, C64};
use crate::odecore::{dedup, perturbed_rhs, pole_exclusion_radius, MeromorphicSystem, PerturbationSpec};

/// Default integration tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Fundamental matrices with a larger condition number are refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Steps may not exceed this fraction of the distance to the nearest singular point.
pub const STEP_CLEARANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisTag {
    IdentityAtBasepoint,
    #[serde(rename = "frobenius-at-0")]
    FrobeniusAt0,
    #[serde(rename = "frobenius-at-1")]
    FrobeniusAt1,
    Custom,
}

/// A fundamental matrix `W` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalMatrix {
    #[serde(with = "cjson::complex")]
    pub basepoint: C64,
    #[serde(with = "cjson::matrix")]
    pub value: CMat,
    pub tag: BasisTag,
}

impl FundamentalMatrix {
    pub fn new(basepoint: C64, value: CMat, tag: BasisTag) -> Self {
        Self {
            basepoint,
            value,
            tag,
        }
    }

    pub fn identity(basepoint: C64, dim: usize) -> Self {
        Self::new(basepoint, CMat::identity(dim, dim), BasisTag::IdentityAtBasepoint)
    }

    pub fn condition_number(&self) -> f64 {
        condition_number(&self.value)
    }
}

/// `W(x₀)` with columns `(y_i, y_i′)` of the Frobenius basis at 0 or 1.
pub fn frobenius_basis_at(a: C64, b: C64, c: C64, point: LocalPoint, x0: C64) -> Result<FundamentalMatrix> {
    let (basis, tag) = match point {
        LocalPoint::Zero => (LocalBasis::at_zero(a, b, c)?, BasisTag::FrobeniusAt0),
        LocalPoint::One => (LocalBasis::at_one(a, b, c)?, BasisTag::FrobeniusAt1),
    };
    Ok(FundamentalMatrix::new(x0, basis.fundamental(x0)?, tag))
}

/// A linear system together with an optional perturbation and integration tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Transporter<'a> {
    pub sys: &'a MeromorphicSystem,
    pub pert: Option<&'a PerturbationSpec>,
    pub rho: C64,
    pub tol: f64,
}

impl<'a> Transporter<'a> {
    pub fn new(sys: &'a MeromorphicSystem, tol: f64) -> Self {
        Self {
            sys,
            pert: None,
            rho: C64::new(0.0, 0.0),
            tol,
        }
    }

    pub fn perturbed(sys: &'a MeromorphicSystem, pert: &'a PerturbationSpec, rho: C64, tol: f64) -> Self {
        Self {
            sys,
            pert: Some(pert),
            rho,
            tol,
        }
    }

    /// Poles of `A`, poles of `H` and the branch point of multivalued kinds.
    pub fn singular_points(&self) -> Vec<C64> {
        let mut pts = self.sys.singularities().to_vec();
        if let Some(p) = self.pert {
            pts.extend(p.singularities());
        }
        dedup(pts)
    }

    pub fn branch_at(&self, anchor: C64) -> BranchState {
        BranchState::new(anchor, &self.singular_points())
    }

    /// Integrates `dy/dx = rhs(x, branch, y)` along `path`, updating `branch`.
    pub fn drive<F>(&self, path: &PathSpec, y: &mut [C64], branch: &mut BranchState, rhs: &F) -> Result<StepStats>
    where
        F: Fn(C64, &BranchState, &[C64], &mut [C64]) -> Result<()>,
    {
        let sings = self.singular_points();
        if (branch.position() - path.start()).norm() > 1e-9 * (1.0 + path.start().norm()) {
            return Err(Error::InconsistentBasepoint(branch.position(), path.start()));
        }
        let mut stats = StepStats::default();
        for seg in path.segments() {
            for piece in seg.pieces() {
                if let Some((d, p)) = PathSpec::new(vec![piece])?.clearance(&sings) {
                    if d < pole_exclusion_radius(p) {
                        return Err(Error::PathThroughSingularity { point: p, distance: d });
                    }
                }
                let arc_center = match piece {
                    Segment::Arc { center, th0, th1, .. } => Some((center.0, th1 - th0)),
                    Segment::Line(..) => None,
                };
                let before = arc_center.and_then(|(c, _)| branch.current_arg(c));
                let mut ode = PieceOde {
                    piece,
                    rhs,
                    branch: &mut *branch,
                    sings: &sings,
                };
                stats.merge(dopri5(&mut ode, 0.0, piece.length(), y, self.tol)?);
                match arc_center {
                    Some((c, dth)) => branch.settle_arc(c, before, dth, piece.end()),
                    None => branch.advance_to(piece.end()),
                }
            }
        }
        Ok(stats)
    }

    /// Continues `W` along `path`: `W′ = (A + ρB)W`.
    pub fn propagate(&self, path: &PathSpec, w: &CMat, branch: &mut BranchState) -> Result<(CMat, StepStats)> {
        let n = self.sys.dim();
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::ShapeMismatch(format!("W must be {n}x{n}")));
        }
        let mut y = vec![C64::new(0.0, 0.0); n * n];
        mat_to_vec(w, &mut y);
        let rhs = |x: C64, br: &BranchState, y: &[C64], dy: &mut [C64]| -> Result<()> {
            let a = perturbed_rhs(self.sys, self.pert, self.rho, x, Some(br))?;
            mat_to_vec(&(a * vec_to_mat(n, y)), dy);
            Ok(())
        };
        let stats = self.drive(path, &mut y, branch, &rhs)?;
        Ok((vec_to_mat(n, &y), stats))
    }
}

struct PieceOde<'b, F> {
    piece: Segment,
    rhs: &'b F,
    branch: &'b mut BranchState,
    sings: &'b [C64],
}

impl<F> ComplexOde for PieceOde<'_, F>
where
    F: Fn(C64, &BranchState, &[C64], &mut [C64]) -> Result<()>,
{
    fn rhs(&self, s: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let (z, t) = self.piece.point(s);
        (self.rhs)(z, self.branch, y, dy)?;
        for v in dy.iter_mut() {
            *v *= t;
        }
        Ok(())
    }

    fn accept(&mut self, s: f64, y: &[C64]) -> Result<()> {
        let (z, _) = self.piece.point(s);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(z));
        }
        self.branch.advance_to(z);
        Ok(())
    }

    fn max_step(&self, s: f64) -> f64 {
        let (z, _) = self.piece.point(s);
        let d = self.sings.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
        STEP_CLEARANCE * d
    }

    fn locate(&self, s: f64) -> C64 {
        self.piece.point(s).0
    }
}

/// Continues `w0` along `path` for the (optionally perturbed) system.
pub fn transport(
    sys: &MeromorphicSystem,
    pert: Option<&PerturbationSpec>,
    rho: C64,
    path: &PathSpec,
    w0: &FundamentalMatrix,
    tol: f64,
) -> Result<(FundamentalMatrix, BranchState)> {
    let t = Transporter {
        sys,
        pert,
        rho,
        tol,
    };
    let mut branch = t.branch_at(path.start());
    if (w0.basepoint - path.start()).norm() > 1e-9 * (1.0 + path.start().norm()) {
        return Err(Error::InconsistentBasepoint(w0.basepoint, path.start()));
    }
    let (w, _) = t.propagate(path, &w0.value, &mut branch)?;
    Ok((FundamentalMatrix::new(path.end(), w, w0.tag), branch))
}

/// Monodromy of a closed loop in the convention `W(γ·x) = W(x)·M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyDatum {
    #[serde(with = "cjson::complex")]
    pub center: C64,
    #[serde(rename = "loop")]
    pub path: PathSpec,
    #[serde(with = "cjson::matrix")]
    pub matrix: CMat,
    #[serde(with = "cjson::complex_vec")]
    pub eigenvalues: Vec<C64>,
    pub condition_number: f64,
    pub steps: StepStats,
    pub windings: Vec<Winding>,
    pub path_hash: String,
    pub tol: f64,
}

pub fn monodromy(sys: &MeromorphicSystem, basis: &FundamentalMatrix, path: &PathSpec, tol: f64) -> Result<MonodromyDatum> {
    monodromy_with(&Transporter::new(sys, tol), basis, path)
}

/// `M = W(x₀)⁻¹·W_transported(x₀)` for the transporter's (possibly perturbed) system.
pub fn monodromy_with(t: &Transporter<'_>, basis: &FundamentalMatrix, path: &PathSpec) -> Result<MonodromyDatum> {
    if !path.is_closed() {
        return Err(Error::Invalid("monodromy needs a closed loop".into()));
    }
    if (basis.basepoint - path.start()).norm() > 1e-9 * (1.0 + path.start().norm()) {
        return Err(Error::InconsistentBasepoint(basis.basepoint, path.start()));
    }
    let cond = basis.condition_number();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let mut branch = t.branch_at(path.start());
    let (w, steps) = t.propagate(path, &basis.value, &mut branch)?;
    let matrix = inverse(&basis.value)? * w;
    let windings = branch.windings();
    let center = windings
        .iter()
        .find(|w| w.turns.abs() > 0.5)
        .map(|w| w.point)
        .unwrap_or(path.start());
    Ok(MonodromyDatum {
        center,
        eigenvalues: eigenvalues(&matrix),
        matrix,
        condition_number: cond,
        steps,
        windings,
        path_hash: path.hash(),
        path: path.clone(),
        tol: t.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, multiset_distance, re, TWO_PI_I};
    use crate::odecore::{companion, ScalarODE};

    fn hyp() -> MeromorphicSystem {
        companion(&ScalarODE::hypergeometric(re(0.3), re(0.7), re(0.4)))
    }

    #[test]
    fn zero_system_leaves_w_unchanged() {
        let sys = MeromorphicSystem::constant(&CMat::zeros(2, 2)).unwrap();
        let path = PathSpec::line(re(0.0), C64::new(1.0, 2.0)).unwrap();
        let w0 = FundamentalMatrix::new(re(0.0), CMat::from_row_slice(2, 2, &[re(1.0), re(2.0), re(3.0), re(4.0)]), BasisTag::Custom);
        let (w, _) = transport(&sys, None, re(0.0), &path, &w0, 1e-12).unwrap();
        assert_eq!(w.value, w0.value);
    }

    #[test]
    fn nilpotent_constant_system() {
        let sys = MeromorphicSystem::constant(&CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)])).unwrap();
        let l = 2.5;
        let path = PathSpec::line(re(0.0), re(l)).unwrap();
        let (w, _) = transport(&sys, None, re(0.0), &path, &FundamentalMatrix::identity(re(0.0), 2), 1e-12).unwrap();
        let want = CMat::from_row_slice(2, 2, &[re(1.0), re(l), re(0.0), re(1.0)]);
        assert!(max_abs_diff(&w.value, &want) < 1e-12);
    }

    #[test]
    fn hypergeometric_monodromy_at_zero() {
        let sys = hyp();
        let x0 = re(0.5);
        let basis = frobenius_basis_at(re(0.3), re(0.7), re(0.4), LocalPoint::Zero, x0).unwrap();
        let r = default_loop_radius(re(0.0), x0, sys.singularities());
        let gamma = loop_around(re(0.0), r, x0, &[re(1.0)]).unwrap();
        let m = monodromy(&sys, &basis, &gamma, 1e-11).unwrap();
        let want = [re(1.0), (-TWO_PI_I * 0.4).exp()];
        assert!(multiset_distance(&m.eigenvalues, &want) < 1e-8);
        assert!((m.center - re(0.0)).norm() < 1e-12);
        let turns = m.windings.iter().find(|w| w.point == re(0.0)).unwrap().turns;
        assert!((turns - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_loop_around_regular_point_is_identity() {
        let sys = hyp();
        let x0 = C64::new(0.5, 0.3);
        let path = loop_around(C64::new(0.5, 0.2), 0.05, x0, sys.singularities()).unwrap();
        let m = monodromy(&sys, &FundamentalMatrix::identity(x0, 2), &path, 1e-11).unwrap();
        assert!(max_abs_diff(&m.matrix, &CMat::identity(2, 2)) < 1e-9);
    }

    #[test]
    fn path_through_pole_is_refused() {
        let sys = hyp();
        let path = PathSpec::line(re(0.5), re(1.5)).unwrap();
        let r = transport(&sys, None, re(0.0), &path, &FundamentalMatrix::identity(re(0.5), 2), 1e-10);
        assert!(matches!(r, Err(Error::PathThroughSingularity { .. })));
    }
}
