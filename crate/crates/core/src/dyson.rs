//! Gauge corrections `C(x) = ∫ W⁻¹BW`, path-ordered Dyson terms, first-order monodromy
//! deformation, cocycle jumps and the cocycle identity.

use serde::Serialize;

use crate::cjson;
use crate::error::{Error, Result};
use crate::hypergeom::LocalBasis;
use crate::linalg::{
    inverse, mat_to_vec, max_abs, max_abs_diff, vec_to_mat, CMat, C64, TWO_PI_I,
};
use crate::odecore::{perturbed_rhs, MeromorphicSystem, PerturbationKind, PerturbationSpec};
use crate::par;
use crate::quad::tanh_sinh;
use crate::transport::{
    default_loop_radius, loop_around, BranchState, FundamentalMatrix, PathSpec, StepStats,
    Transporter, Winding,
};

/// Integrands whose local exponent is at most `−1 + EXPONENT_MARGIN` are refused.
pub const EXPONENT_MARGIN: f64 = 0.02;

/// Smallest distance (relative to the ray length) at which singular integrals are cut off.
pub const MIN_CUTOFF: f64 = 1e-200;

/// Probe offsets, as fractions of the distance to the nearest other singularity.
pub const PROBE_FRACTIONS: [f64; 3] = [0.3, 0.5, 0.7];

/// A solution basis known in closed form near a singular point.
pub trait LocalFundamental: Sync {
    fn center(&self) -> C64;
    fn fundamental(&self, x: C64) -> Result<CMat>;
}

impl LocalFundamental for LocalBasis {
    fn center(&self) -> C64 {
        LocalBasis::center(self)
    }

    fn fundamental(&self, x: C64) -> Result<CMat> {
        LocalBasis::fundamental(self, x)
    }
}

/// Unperturbed system `A` and perturbation `B` of `ψ′ = (A + ρB)ψ`.
#[derive(Debug, Clone, Copy)]
pub struct Deformation<'a> {
    pub sys: &'a MeromorphicSystem,
    pub pert: &'a PerturbationSpec,
    pub tol: f64,
}

/// Where the lower limit of `C` sits.
#[derive(Clone, Copy)]
pub enum CorrectionOrigin<'a> {
    /// `C(x₀) = 0` at the start of the path.
    Basepoint,
    /// `C` integrated from the local basis' singular point, whose basis must be the one transported.
    Singular(&'a dyn LocalFundamental),
}

impl<'a> Deformation<'a> {
    pub fn new(sys: &'a MeromorphicSystem, pert: &'a PerturbationSpec, tol: f64) -> Self {
        Self { sys, pert, tol }
    }

    /// Unperturbed transport that still tracks the perturbation's singular points.
    pub fn transporter(&self) -> Transporter<'a> {
        Transporter {
            sys: self.sys,
            pert: Some(self.pert),
            rho: C64::new(0.0, 0.0),
            tol: self.tol,
        }
    }

    pub fn perturbed_transporter(&self, rho: C64) -> Transporter<'a> {
        Transporter::perturbed(self.sys, self.pert, rho, self.tol)
    }

    pub fn branch_at(&self, x: C64) -> BranchState {
        self.transporter().branch_at(x)
    }

    /// `W⁻¹BW` at `x`.
    pub fn integrand(&self, x: C64, w: &CMat, branch: &BranchState) -> Result<CMat> {
        let b = self.pert.eval(x, Some(branch))?;
        Ok(inverse(w)? * b * w)
    }

    /// Transports `W` together with nested terms `C_k′ = (W⁻¹BW)·C_{k−1}`, `C_0 = I`.
    pub fn propagate(
        &self,
        path: &PathSpec,
        w: &CMat,
        cs: &[CMat],
        branch: &mut BranchState,
    ) -> Result<(CMat, Vec<CMat>, StepStats)> {
        let n = self.sys.dim();
        let k = cs.len();
        let mut y = vec![C64::new(0.0, 0.0); n * n * (k + 1)];
        mat_to_vec(w, &mut y[..n * n]);
        for (i, c) in cs.iter().enumerate() {
            mat_to_vec(c, &mut y[(i + 1) * n * n..(i + 2) * n * n]);
        }
        let rhs = |x: C64, br: &BranchState, y: &[C64], dy: &mut [C64]| -> Result<()> {
            let w = vec_to_mat(n, &y[..n * n]);
            let a = perturbed_rhs(self.sys, None, C64::new(0.0, 0.0), x, None)?;
            mat_to_vec(&(a * &w), &mut dy[..n * n]);
            let g = self.integrand(x, &w, br)?;
            for i in 0..k {
                let prev = if i == 0 {
                    CMat::identity(n, n)
                } else {
                    vec_to_mat(n, &y[i * n * n..(i + 1) * n * n])
                };
                mat_to_vec(&(&g * prev), &mut dy[(i + 1) * n * n..(i + 2) * n * n]);
            }
            Ok(())
        };
        let stats = self.transporter().drive(path, &mut y, branch, &rhs)?;
        let w = vec_to_mat(n, &y[..n * n]);
        let cs = (0..k)
            .map(|i| vec_to_mat(n, &y[(i + 1) * n * n..(i + 2) * n * n]))
            .collect();
        Ok((w, cs, stats))
    }

    /// `∫ W⁻¹BW` along the ray from the local basis' center to `x`, by tanh–sinh.
    ///
    /// `branch` must sit at `x`. The integrand's local exponent at the center is estimated
    /// from two nearby samples; a non-integrable exponent is an error.
    pub fn ray_correction(&self, local: &dyn LocalFundamental, x: C64, branch: &BranchState) -> Result<CMat> {
        let p = local.center();
        let v = x - p;
        let n = self.sys.dim();
        let g = |s: f64| -> Result<CMat> {
            let z = p + v * s;
            let w = local.fundamental(z)?;
            Ok(self.integrand(z, &w, branch)? * v)
        };
        let (s1, s2) = (1e-6, 1e-7);
        let (n1, n2) = (max_abs(&g(s1)?), max_abs(&g(s2)?));
        let mu = if n1 == 0.0 || n2 == 0.0 { 0.0 } else { (n1 / n2).log10() };
        if mu <= -1.0 + EXPONENT_MARGIN {
            return Err(Error::NonIntegrableEndpoint {
                point: p,
                exponent: mu,
            });
        }
        let scale = n1 / s1.powf(mu);
        let s_min = if scale == 0.0 {
            1e-6
        } else {
            (self.tol * 1e-3 * (1.0 + mu) / scale)
                .powf(1.0 / (1.0 + mu))
                .clamp(MIN_CUTOFF, 1e-6)
        };
        let r = tanh_sinh(
            |s, _| {
                let m = g(s)?;
                Ok(m.iter().copied().collect())
            },
            s_min,
            self.tol,
        )?;
        Ok(CMat::from_iterator(n, n, r.value))
    }

    /// `C(x₀)` for the chosen origin, with `branch` at `x₀`.
    pub fn initial_c(&self, origin: CorrectionOrigin<'_>, x0: C64, branch: &BranchState) -> Result<CMat> {
        match origin {
            CorrectionOrigin::Basepoint => Ok(CMat::zeros(self.sys.dim(), self.sys.dim())),
            CorrectionOrigin::Singular(local) => self.ray_correction(local, x0, branch),
        }
    }
}

/// `C` at the end of a path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionC {
    #[serde(with = "cjson::complex")]
    pub endpoint: C64,
    #[serde(with = "cjson::matrix")]
    pub value: CMat,
    #[serde(with = "cjson::matrix")]
    pub w: CMat,
    pub path_hash: String,
    pub windings: Vec<Winding>,
    pub steps: StepStats,
    pub tol: f64,
}

/// `C(x) = ∫ W⁻¹BW dt` along `path`, with `W` transported alongside.
pub fn correction_c(
    def: &Deformation<'_>,
    basis: &FundamentalMatrix,
    path: &PathSpec,
    origin: CorrectionOrigin<'_>,
) -> Result<CorrectionC> {
    check_start(basis, path)?;
    let mut branch = def.branch_at(path.start());
    let c0 = def.initial_c(origin, path.start(), &branch)?;
    let (w, cs, steps) = def.propagate(path, &basis.value, &[c0], &mut branch)?;
    Ok(CorrectionC {
        endpoint: path.end(),
        value: cs.into_iter().next().expect("one term"),
        w,
        path_hash: path.hash(),
        windings: branch.windings(),
        steps,
        tol: def.tol,
    })
}

fn check_start(basis: &FundamentalMatrix, path: &PathSpec) -> Result<()> {
    if (basis.basepoint - path.start()).norm() > 1e-9 * (1.0 + path.start().norm()) {
        return Err(Error::InconsistentBasepoint(basis.basepoint, path.start()));
    }
    Ok(())
}

/// Truncated path-ordered series `W_ρ ≈ W(I + Σ ρᵏ C_k)` at the end of a path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DysonExpansion {
    pub order: usize,
    #[serde(with = "cjson::matrix_vec")]
    pub terms: Vec<CMat>,
    #[serde(with = "cjson::matrix")]
    pub w: CMat,
    #[serde(with = "cjson::complex")]
    pub basepoint: C64,
    #[serde(with = "cjson::complex")]
    pub endpoint: C64,
    pub path_hash: String,
    pub windings: Vec<Winding>,
    pub steps: StepStats,
    pub tol: f64,
}

impl DysonExpansion {
    /// `W(I + Σ_{k≤K} ρᵏ C_k)`.
    pub fn fundamental_matrix(&self, rho: C64) -> CMat {
        self.truncated(rho, self.order)
    }

    /// The same sum stopped at order `k ≤ K`.
    pub fn truncated(&self, rho: C64, k: usize) -> CMat {
        let n = self.w.nrows();
        let mut sum = CMat::identity(n, n);
        let mut pow = C64::new(1.0, 0.0);
        for c in self.terms.iter().take(k) {
            pow *= rho;
            sum += c * pow;
        }
        &self.w * sum
    }
}

/// Nested terms `C_1 … C_K` along `path`, each vanishing at its start.
pub fn dyson_expand(def: &Deformation<'_>, order: usize, path: &PathSpec, basis: &FundamentalMatrix) -> Result<DysonExpansion> {
    if order == 0 {
        return Err(Error::Invalid("Dyson order must be at least 1".into()));
    }
    check_start(basis, path)?;
    let n = def.sys.dim();
    let mut branch = def.branch_at(path.start());
    let zeros = vec![CMat::zeros(n, n); order];
    let (w, terms, steps) = def.propagate(path, &basis.value, &zeros, &mut branch)?;
    Ok(DysonExpansion {
        order,
        terms,
        w,
        basepoint: path.start(),
        endpoint: path.end(),
        path_hash: path.hash(),
        windings: branch.windings(),
        steps,
        tol: def.tol,
    })
}

/// `(M₀, (M₀·C(γx)·M₀⁻¹ − C(x))·M₀)`: the monodromy and its first-order coefficient in `ρ`.
pub fn perturbed_monodromy_first_order(m0: &CMat, c_at_x: &CMat, c_looped: &CMat) -> Result<(CMat, CMat)> {
    let s = m0.shape();
    if c_at_x.shape() != s || c_looped.shape() != s || s.0 != s.1 {
        return Err(Error::ShapeMismatch("M₀ and both C values must be square and equal in size".into()));
    }
    let jump = m0 * c_looped * inverse(m0)? - c_at_x;
    Ok((m0.clone(), jump * m0))
}

/// `Δ_a C(x) = M_a·C(γ_a x)·M_a⁻¹ − C(x)`.
pub fn jump(m: &CMat, c_at_x: &CMat, c_looped: &CMat) -> Result<CMat> {
    Ok(m * c_looped * inverse(m)? - c_at_x)
}

/// Monodromy and correction data of one loop traversed from `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopJump {
    #[serde(with = "cjson::complex")]
    pub x: C64,
    #[serde(with = "cjson::matrix")]
    pub monodromy: CMat,
    #[serde(with = "cjson::matrix")]
    pub c_at_x: CMat,
    #[serde(with = "cjson::matrix")]
    pub c_looped: CMat,
    #[serde(with = "cjson::matrix")]
    pub delta: CMat,
    pub path_hash: String,
    pub windings: Vec<Winding>,
    pub steps: StepStats,
}

/// Carries `(W, C)` around `gamma` (which starts at the branch position).
pub fn loop_jump(def: &Deformation<'_>, w: &CMat, c_at_x: &CMat, gamma: &PathSpec, branch: &BranchState) -> Result<LoopJump> {
    let mut br = branch.clone();
    let (w_end, cs, steps) = def.propagate(gamma, w, std::slice::from_ref(c_at_x), &mut br)?;
    let m = inverse(w)? * w_end;
    let c_looped = cs.into_iter().next().expect("one term");
    let delta = jump(&m, c_at_x, &c_looped)?;
    Ok(LoopJump {
        x: gamma.start(),
        monodromy: m,
        c_at_x: c_at_x.clone(),
        c_looped,
        delta,
        path_hash: gamma.hash(),
        windings: br.windings(),
        steps,
    })
}

/// How `W` and `C` are set up at each probe point.
#[derive(Clone, Copy)]
pub enum JumpSetup<'a> {
    /// `W` is the local basis at the loop center and `C` is integrated from that center.
    Frobenius(&'a dyn LocalFundamental),
    /// `W` is continued from a reference basis along straight lines, with `C = 0` at its basepoint.
    Reference(&'a FundamentalMatrix),
}

/// Cocycle jump `Δ_a C` evaluated at several probes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleJump {
    #[serde(with = "cjson::complex")]
    pub center: C64,
    #[serde(with = "cjson::matrix")]
    pub delta: CMat,
    #[serde(with = "cjson::complex")]
    pub x_probe: C64,
    pub constancy_residual: f64,
    pub probes: Vec<LoopJump>,
    pub tol: f64,
}

/// `{0.3, 0.5, 0.7}·d` along the ray from `center` toward the nearest other singularity
/// (or toward `reference` when there is none).
pub fn default_probes(center: C64, singularities: &[C64], reference: C64) -> Vec<C64> {
    let target = singularities
        .iter()
        .copied()
        .filter(|p| (p - center).norm() > 1e-12)
        .min_by(|p, q| (p - center).norm().total_cmp(&(q - center).norm()))
        .unwrap_or(reference);
    let d = target - center;
    PROBE_FRACTIONS.iter().map(|f| center + d * *f).collect()
}

/// `Δ_a C` at every probe, with the largest pairwise difference as constancy residual.
pub fn cocycle_jump(def: &Deformation<'_>, setup: JumpSetup<'_>, center: C64, probes: &[C64]) -> Result<CocycleJump> {
    if probes.is_empty() {
        return Err(Error::Invalid("at least one probe point is required".into()));
    }
    let sings = def.transporter().singular_points();
    let results = par::try_map(probes, |&x| {
        let (w, c, branch) = match setup {
            JumpSetup::Frobenius(local) => {
                let branch = def.branch_at(x);
                let w = local.fundamental(x)?;
                let c = def.ray_correction(local, x, &branch)?;
                (w, c, branch)
            }
            JumpSetup::Reference(basis) => {
                let mut branch = def.branch_at(basis.basepoint);
                let n = def.sys.dim();
                if (x - basis.basepoint).norm() <= 1e-15 {
                    (basis.value.clone(), CMat::zeros(n, n), branch)
                } else {
                    let path = PathSpec::line(basis.basepoint, x)?;
                    let (w, cs, _) = def.propagate(&path, &basis.value, &[CMat::zeros(n, n)], &mut branch)?;
                    (w, cs.into_iter().next().expect("one term"), branch)
                }
            }
        };
        let others: Vec<C64> = sings.iter().copied().filter(|p| (p - center).norm() > 1e-12).collect();
        let r = default_loop_radius(center, x, &sings);
        let gamma = loop_around(center, r, x, &others)?;
        loop_jump(def, &w, &c, &gamma, &branch)
    })?;
    let mut residual = 0.0_f64;
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            residual = residual.max(max_abs_diff(&results[i].delta, &results[j].delta));
        }
    }
    Ok(CocycleJump {
        center,
        delta: results[0].delta.clone(),
        x_probe: probes[0],
        constancy_residual: residual,
        probes: results,
        tol: def.tol,
    })
}

/// Closed-form prediction of `Δ₀C` at a probe.
///
/// Power kind: `(e^{2πiλ} − 1)·C`. Log kind: `2πi·C_H`, where `C_H = ∫₀ˣ W⁻¹HW` is the
/// correction without the logarithm (required for this kind). Meromorphic kind with `C`
/// integrated from the singular point: `0`.
pub fn closed_form_jump(kind: PerturbationKind, c_at_probe: &CMat, c_h: Option<&CMat>) -> Result<CMat> {
    match kind {
        PerturbationKind::Meromorphic => Ok(CMat::zeros(c_at_probe.nrows(), c_at_probe.ncols())),
        PerturbationKind::PowerWeighted { lambda } => Ok(c_at_probe * ((TWO_PI_I * lambda).exp() - 1.0)),
        PerturbationKind::LogWeighted => c_h
            .map(|h| h * TWO_PI_I)
            .ok_or_else(|| Error::Invalid("log kind needs the correction without the log factor".into())),
    }
}

/// The literal reading `2πi·C(x)` of the logarithmic jump, kept for comparison.
pub fn literal_log_jump(c_at_probe: &CMat) -> CMat {
    c_at_probe * TWO_PI_I
}

/// Relative max-entry distance between a numeric jump and a prediction.
pub fn relative_mismatch(numeric: &CMat, predicted: &CMat) -> f64 {
    max_abs_diff(numeric, predicted) / max_abs(predicted).max(f64::MIN_POSITIVE)
}

/// `δ(γ) = M_γ·C(γx₀)·M_γ⁻¹ − C(x₀)` for a loop based at `x₀`, with `C(x₀) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopCocycle {
    #[serde(with = "cjson::complex")]
    pub basepoint: C64,
    #[serde(with = "cjson::matrix")]
    pub monodromy: CMat,
    #[serde(with = "cjson::matrix")]
    pub delta: CMat,
    pub path_hash: String,
}

pub fn loop_cocycle(def: &Deformation<'_>, basis: &FundamentalMatrix, gamma: &PathSpec) -> Result<LoopCocycle> {
    check_start(basis, gamma)?;
    if !gamma.is_closed() {
        return Err(Error::Invalid("cocycle needs a closed loop".into()));
    }
    let n = def.sys.dim();
    let branch = def.branch_at(gamma.start());
    let j = loop_jump(def, &basis.value, &CMat::zeros(n, n), gamma, &branch)?;
    Ok(LoopCocycle {
        basepoint: gamma.start(),
        monodromy: j.monodromy,
        delta: j.delta,
        path_hash: j.path_hash,
    })
}

/// `‖δ(γ_a) − δ(γ_aγ_b) + M_a·δ(γ_b)·M_a⁻¹‖` (max-entry), where `γ_aγ_b` has monodromy `M_a·M_b`.
pub fn cocycle_identity_residual(a: &LoopCocycle, b: &LoopCocycle, ab: &LoopCocycle) -> Result<f64> {
    for other in [b, ab] {
        if (other.basepoint - a.basepoint).norm() > 1e-12 {
            return Err(Error::InconsistentBasepoint(a.basepoint, other.basepoint));
        }
    }
    let ad = &a.monodromy * &b.delta * inverse(&a.monodromy)?;
    Ok(max_abs(&(&a.delta - &ab.delta + ad)))
}

/// Largest `|ψ − Wφ|` at segment ends, where `ψ′ = (A + ρB)ψ`, `W′ = AW` and
/// `φ′ = ρW⁻¹BWφ` start from `ψ = Wφ`.
pub fn gauge_frame_residual(def: &Deformation<'_>, rho: C64, basis: &FundamentalMatrix, path: &PathSpec, phi0: &[C64]) -> Result<f64> {
    check_start(basis, path)?;
    let n = def.sys.dim();
    if phi0.len() != n {
        return Err(Error::ShapeMismatch(format!("initial vector must have {n} entries")));
    }
    let nn = n * n;
    let mut y = vec![C64::new(0.0, 0.0); nn + 2 * n];
    mat_to_vec(&basis.value, &mut y[..nn]);
    let psi0 = &basis.value * nalgebra::DVector::from_column_slice(phi0);
    y[nn..nn + n].copy_from_slice(psi0.as_slice());
    y[nn + n..].copy_from_slice(phi0);
    let t = def.perturbed_transporter(rho);
    let rhs = |x: C64, br: &BranchState, y: &[C64], dy: &mut [C64]| -> Result<()> {
        let w = vec_to_mat(n, &y[..nn]);
        let a = perturbed_rhs(def.sys, None, C64::new(0.0, 0.0), x, None)?;
        let ab = perturbed_rhs(def.sys, Some(def.pert), rho, x, Some(br))?;
        mat_to_vec(&(&a * &w), &mut dy[..nn]);
        let psi = nalgebra::DVector::from_column_slice(&y[nn..nn + n]);
        let phi = nalgebra::DVector::from_column_slice(&y[nn + n..]);
        dy[nn..nn + n].copy_from_slice((ab * psi).as_slice());
        let g = def.integrand(x, &w, br)? * rho;
        dy[nn + n..].copy_from_slice((g * phi).as_slice());
        Ok(())
    };
    let mut branch = t.branch_at(path.start());
    let mut worst = 0.0_f64;
    for seg in path.segments() {
        let piece = PathSpec::new(vec![*seg])?;
        t.drive(&piece, &mut y, &mut branch, &rhs)?;
        let w = vec_to_mat(n, &y[..nn]);
        let phi = nalgebra::DVector::from_column_slice(&y[nn + n..]);
        let wphi = w * phi;
        for i in 0..n {
            worst = worst.max((y[nn + i] - wphi[i]).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use crate::odecore::{companion, trivial_hypergeometric_perturbation, ComplexPoly, RationalFn, ScalarODE};

    fn hyp() -> MeromorphicSystem {
        companion(&ScalarODE::hypergeometric(re(0.3), re(0.7), re(0.4)))
    }

    #[test]
    fn zero_perturbation_gives_zero_c() {
        let sys = hyp();
        let pert = PerturbationSpec::new(PerturbationKind::Meromorphic, 2, vec![RationalFn::zero(); 4]).unwrap();
        let def = Deformation::new(&sys, &pert, 1e-10);
        let path = PathSpec::line(re(0.5), c(0.4, 0.2)).unwrap();
        let r = correction_c(&def, &FundamentalMatrix::identity(re(0.5), 2), &path, CorrectionOrigin::Basepoint).unwrap();
        assert_eq!(max_abs(&r.value), 0.0);
    }

    #[test]
    fn constant_b_over_zero_a_is_exponential() {
        let sys = MeromorphicSystem::constant(&CMat::zeros(2, 2)).unwrap();
        let b = CMat::from_row_slice(2, 2, &[re(0.2), re(1.0), re(-0.5), re(0.1)]);
        let h = (0..4).map(|k| RationalFn::constant(b[(k / 2, k % 2)])).collect();
        let pert = PerturbationSpec::new(PerturbationKind::Meromorphic, 2, h).unwrap();
        let def = Deformation::new(&sys, &pert, 1e-12);
        let x = 0.8;
        let path = PathSpec::line(re(0.0), re(x)).unwrap();
        let d = dyson_expand(&def, 3, &path, &FundamentalMatrix::identity(re(0.0), 2)).unwrap();
        let xb = &b * re(x);
        let mut want = CMat::identity(2, 2);
        for (k, term) in d.terms.iter().enumerate() {
            want = &want * &xb / re((k + 1) as f64);
            assert!(max_abs_diff(term, &want) < 1e-11, "term {}", k + 1);
        }
    }

    #[test]
    fn trivial_deformation_lower_left_vanishes_like_x_to_c() {
        let sys = hyp();
        let pert = trivial_hypergeometric_perturbation();
        let def = Deformation::new(&sys, &pert, 1e-12);
        let local = LocalBasis::at_zero(re(0.3), re(0.7), re(0.4)).unwrap();
        let ratio = |x: f64| {
            let c = def.ray_correction(&local, re(x), &def.branch_at(re(x))).unwrap();
            c[(1, 0)] / re(x).powf(0.4)
        };
        let (r1, r2) = (ratio(1e-3), ratio(1e-4));
        assert!((r1 - r2).norm() < 1e-2 * r1.norm());
    }

    #[test]
    fn first_order_coefficient_vanishes_for_conjugate_c() {
        let m = CMat::from_row_slice(2, 2, &[re(1.0), re(2.0), re(0.0), c(0.3, 0.4)]);
        let cx = CMat::from_row_slice(2, 2, &[re(0.1), re(-1.0), re(2.0), c(0.0, 1.0)]);
        let looped = inverse(&m).unwrap() * &cx * &m;
        let (_, coeff) = perturbed_monodromy_first_order(&m, &cx, &looped).unwrap();
        assert!(max_abs(&coeff) < 1e-14);
        assert!(perturbed_monodromy_first_order(&m, &CMat::zeros(3, 3), &looped).is_err());
    }

    #[test]
    fn closed_form_special_cases() {
        let cm = CMat::from_row_slice(2, 2, &[re(1.0), re(2.0), re(3.0), re(4.0)]);
        let p0 = closed_form_jump(PerturbationKind::PowerWeighted { lambda: re(0.0) }, &cm, None).unwrap();
        assert!(max_abs(&p0) < 1e-15);
        let half = closed_form_jump(PerturbationKind::PowerWeighted { lambda: re(0.5) }, &cm, None).unwrap();
        assert!(max_abs_diff(&half, &(&cm * re(-2.0))) < 1e-14);
        let lg = closed_form_jump(PerturbationKind::LogWeighted, &cm, Some(&cm)).unwrap();
        assert!(max_abs_diff(&lg, &literal_log_jump(&cm)) == 0.0);
        assert!(closed_form_jump(PerturbationKind::LogWeighted, &cm, None).is_err());
    }

    #[test]
    fn cocycle_residual_trivial_and_mismatched() {
        let z = LoopCocycle {
            basepoint: re(0.5),
            monodromy: CMat::identity(2, 2),
            delta: CMat::zeros(2, 2),
            path_hash: String::new(),
        };
        assert_eq!(cocycle_identity_residual(&z, &z, &z).unwrap(), 0.0);
        let mut other = z.clone();
        other.basepoint = re(0.6);
        assert!(matches!(cocycle_identity_residual(&z, &other, &z), Err(Error::InconsistentBasepoint(..))));
    }

    #[test]
    fn log_system_is_not_integrable_from_zero() {
        // A = [[0,1],[0,−1/z]], B = (1/z)[[1,1],[0,1]]: W⁻¹BW has a 1/z² entry
        let zero = RationalFn::zero();
        let one = RationalFn::constant(re(1.0));
        let inv_z = RationalFn::new(ComplexPoly::one(), ComplexPoly::x());
        let sys = MeromorphicSystem::new(2, vec![zero.clone(), one, zero.clone(), inv_z.neg()]).unwrap();
        let pert = PerturbationSpec::new(PerturbationKind::Meromorphic, 2, vec![inv_z.clone(), inv_z.clone(), zero, inv_z]).unwrap();
        let def = Deformation::new(&sys, &pert, 1e-10);
        struct LogSystemW;
        impl LocalFundamental for LogSystemW {
            fn center(&self) -> C64 {
                re(0.0)
            }
            fn fundamental(&self, z: C64) -> Result<CMat> {
                Ok(CMat::from_row_slice(2, 2, &[re(1.0), z.ln() / TWO_PI_I, re(0.0), 1.0 / (TWO_PI_I * z)]))
            }
        }
        let r = def.ray_correction(&LogSystemW, re(1.0), &def.branch_at(re(1.0)));
        assert!(matches!(r, Err(Error::NonIntegrableEndpoint { .. })));
    }
}
