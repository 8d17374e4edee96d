//! Task pipelines: each turns a checked specification into results, diagnostics and
//! optional CSV tables.

use std::sync::Arc;

use monodromy::dyson::{
    closed_form_jump, cocycle_identity_residual, cocycle_jump, default_probes, dyson_expand, literal_log_jump,
    loop_cocycle, loop_jump, perturbed_monodromy_first_order, relative_mismatch, Deformation, JumpSetup,
};
use monodromy::hypergeom::{LocalBasis, LocalPoint};
use monodromy::linalg::{max_abs, max_abs_diff, CMat, C64};
use monodromy::odecore::{MeromorphicSystem, PerturbationKind, PerturbationSpec, RationalFn};
use monodromy::par;
use monodromy::spectral::{
    density_shape, eigenvalue_shift, hierarchy_check, orthonormality, QuadratureSpec, SpectralParams,
    HIERARCHY_INTERVAL,
};
use monodromy::transport::{
    compose_loops, default_loop_radius, frobenius_basis_at, loop_around, monodromy_with, BasisTag,
    FundamentalMatrix, PathSpec, Segment, Transporter,
};
use monodromy::varpar::{hypergeometric_series, RealFn};
use monodromy::Error;
use serde_json::{json, Value};

use crate::report::Table;
use crate::spec::{BasisChoice, Forcing, Origin, ProblemSpec, Sample, Task, DEFAULT_SAMPLE};

pub struct Output {
    pub results: Value,
    pub diagnostics: Value,
    pub tables: Vec<Table>,
}

/// A numeric error tagged with where it happened, plus whatever finished before it.
#[derive(Debug)]
pub struct NumericFailure {
    pub module: &'static str,
    pub operation: &'static str,
    pub error: Error,
    pub partial: Value,
}

impl std::fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}::{} failed: {}", self.module, self.operation, self.error)
    }
}

type Outcome = Result<Output, NumericFailure>;

fn at<T>(r: monodromy::Result<T>, module: &'static str, operation: &'static str) -> Result<T, NumericFailure> {
    r.map_err(|error| NumericFailure {
        module,
        operation,
        error,
        partial: Value::Null,
    })
}

/// Collects per-entry results, failing on the first error with the finished entries attached.
fn gather<T: serde::Serialize>(
    items: Vec<monodromy::Result<T>>,
    module: &'static str,
    operation: &'static str,
) -> Result<Vec<T>, NumericFailure> {
    let mut done = Vec::new();
    for item in items {
        match item {
            Ok(v) => done.push(v),
            Err(error) => {
                return Err(NumericFailure {
                    module,
                    operation,
                    error,
                    partial: serde_json::to_value(&done).unwrap_or(Value::Null),
                })
            }
        }
    }
    Ok(done)
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

fn mat_json(m: &CMat) -> Value {
    to_json(&monodromy::cjson::matrix::to_rows(m))
}

fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn run(spec: &ProblemSpec) -> Outcome {
    match spec.task {
        Task::Monodromy => monodromy_task(spec),
        Task::Dyson => dyson_task(spec),
        Task::Cocycle => cocycle_task(spec),
        Task::Eigenshift => eigenshift_task(spec),
        Task::Series => series_task(spec),
        Task::Sample => sample_task(spec),
    }
}

fn basepoint(spec: &ProblemSpec) -> C64 {
    spec.basepoint()
        .or_else(|| spec.paths.first().map(|p| p.start()))
        .expect("checked: basepoint or path present")
}

fn basis_at(spec: &ProblemSpec, x0: C64) -> Result<FundamentalMatrix, NumericFailure> {
    let n = spec.system().dim();
    let frob = |point| {
        let (a, b, c) = spec.equation.hypergeometric().expect("checked: hypergeometric").params();
        at(frobenius_basis_at(a, b, c, point, x0), "transport", "frobenius_basis_at")
    };
    match &spec.basis {
        BasisChoice::Identity => Ok(FundamentalMatrix::identity(x0, n)),
        BasisChoice::FrobeniusAt0 => frob(LocalPoint::Zero),
        BasisChoice::FrobeniusAt1 => frob(LocalPoint::One),
        BasisChoice::Custom(m) => Ok(FundamentalMatrix::new(x0, m.clone(), BasisTag::Custom)),
    }
}

fn centers(spec: &ProblemSpec) -> Vec<C64> {
    match &spec.centers {
        Some(c) => c.iter().map(|z| z.0).collect(),
        None => spec.singular_points(),
    }
}

/// Closed paths from the specification, or one default loop per center.
fn loops(spec: &ProblemSpec, x0: C64) -> Result<Vec<(C64, PathSpec)>, NumericFailure> {
    let closed: Vec<&PathSpec> = spec.paths.iter().filter(|p| p.is_closed()).collect();
    if !closed.is_empty() {
        return Ok(closed.into_iter().map(|p| (p.start(), p.clone())).collect());
    }
    let sings = spec.singular_points();
    centers(spec)
        .into_iter()
        .map(|c| {
            let others: Vec<C64> = sings.iter().copied().filter(|p| (p - c).norm() > 1e-12).collect();
            let r = default_loop_radius(c, x0, &sings);
            at(loop_around(c, r, x0, &others), "transport", "loop_around").map(|l| (c, l))
        })
        .collect()
}

fn monodromy_task(spec: &ProblemSpec) -> Outcome {
    let sys = spec.system();
    let tol = spec.numerics.tol;
    let t = match (&spec.perturbation, spec.rho.norm() > 0.0) {
        (Some(p), true) => Transporter::perturbed(&sys, p, spec.rho, tol),
        _ => Transporter::new(&sys, tol),
    };
    let x0 = basepoint(spec);
    let basis = basis_at(spec, x0)?;
    let loops = loops(spec, x0)?;
    let data = gather(
        par::map(&loops, |(_, l)| monodromy_with(&t, &basis, l)),
        "transport",
        "monodromy",
    )?;
    let mut results = json!({ "basis": to_json(&basis), "monodromy": to_json(&data) });
    if let Some(first) = data.first() {
        results["eigenvalues"] = Value::Array(first.eigenvalues.iter().map(|z| cx(*z)).collect());
        results["matrix"] = mat_json(&first.matrix);
    }
    let mut table = Table::new("monodromy", &["loop", "center_re", "center_im", "eigenvalue_re", "eigenvalue_im"]);
    for (i, d) in data.iter().enumerate() {
        for e in &d.eigenvalues {
            table.push(vec![i as f64, d.center.re, d.center.im, e.re, e.im]);
        }
    }
    Ok(Output {
        results,
        diagnostics: json!({
            "steps": data.iter().map(|d| to_json(&d.steps)).collect::<Vec<_>>(),
            "condition_numbers": data.iter().map(|d| d.condition_number).collect::<Vec<_>>(),
        }),
        tables: vec![table],
    })
}

fn perturbation(spec: &ProblemSpec) -> &PerturbationSpec {
    spec.perturbation.as_ref().expect("checked: perturbation present")
}

/// Splits a path into `m` consecutive pieces per segment.
fn subdivide(path: &PathSpec, m: usize) -> Vec<PathSpec> {
    let mut out = Vec::new();
    for seg in path.segments() {
        for k in 0..m {
            let (s0, s1) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
            let piece = match *seg {
                Segment::Line(a, b) => Segment::line(a.0 + (b.0 - a.0) * s0, a.0 + (b.0 - a.0) * s1),
                Segment::Arc { center, r, th0, th1 } => {
                    Segment::arc(center.0, r, th0 + (th1 - th0) * s0, th0 + (th1 - th0) * s1)
                }
            };
            out.push(PathSpec::new(vec![piece]).expect("sub-piece of a valid segment"));
        }
    }
    out
}

/// `C_1` entries sampled along a path.
fn c_table(def: &Deformation<'_>, path: &PathSpec, basis: &FundamentalMatrix) -> Result<Table, NumericFailure> {
    let n = def.sys.dim();
    let mut header = vec!["x_re".to_string(), "x_im".to_string()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("c{}{}_re", i + 1, j + 1));
            header.push(format!("c{}{}_im", i + 1, j + 1));
        }
    }
    let mut table = Table::with_header("c_entries", header);
    let mut branch = def.branch_at(path.start());
    let (mut w, mut c) = (basis.value.clone(), CMat::zeros(n, n));
    let mut push = |x: C64, c: &CMat| {
        let mut row = vec![x.re, x.im];
        for i in 0..n {
            for j in 0..n {
                row.push(c[(i, j)].re);
                row.push(c[(i, j)].im);
            }
        }
        table.push(row);
    };
    push(path.start(), &c);
    for piece in subdivide(path, 16) {
        let (w1, cs, _) = at(def.propagate(&piece, &w, &[c], &mut branch), "dyson", "correction_c")?;
        w = w1;
        c = cs.into_iter().next().expect("one term");
        push(piece.end(), &c);
    }
    Ok(table)
}

fn dyson_task(spec: &ProblemSpec) -> Outcome {
    let sys = spec.system();
    let pert = perturbation(spec);
    let def = Deformation::new(&sys, pert, spec.numerics.tol);
    let k = spec.numerics.order;
    let rho = spec.rho;
    let bases = spec
        .paths
        .iter()
        .map(|p| basis_at(spec, p.start()))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(&PathSpec, &FundamentalMatrix)> = spec.paths.iter().zip(&bases).collect();
    let entries = gather(
        par::map(&jobs, |(path, basis)| -> monodromy::Result<Value> {
            let d = dyson_expand(&def, k, path, basis)?;
            let t = def.perturbed_transporter(rho);
            let (direct, _) = t.propagate(path, &basis.value, &mut t.branch_at(path.start()))?;
            let w_rho = d.fundamental_matrix(rho);
            Ok(json!({
                "expansion": to_json(&d),
                "w_rho": mat_json(&w_rho),
                "direct": mat_json(&direct),
                "oracle_delta": max_abs_diff(&w_rho, &direct),
            }))
        }),
        "dyson",
        "dyson_expand",
    )?;
    let deltas: Vec<Value> = entries.iter().map(|e| e["oracle_delta"].clone()).collect();
    let steps: Vec<Value> = entries.iter().map(|e| e["expansion"]["steps"].clone()).collect();
    let table = c_table(&def, &spec.paths[0], &bases[0])?;
    Ok(Output {
        results: json!({ "order": k, "rho": cx(rho), "paths": entries }),
        diagnostics: json!({ "oracle_deltas": deltas, "steps": steps }),
        tables: vec![table],
    })
}

fn cocycle_task(spec: &ProblemSpec) -> Outcome {
    match spec.origin {
        Origin::Basepoint => cocycle_from_basepoint(spec),
        Origin::Singular => cocycle_from_singular(spec),
    }
}

fn cocycle_from_basepoint(spec: &ProblemSpec) -> Outcome {
    let sys = spec.system();
    let pert = perturbation(spec);
    let def = Deformation::new(&sys, pert, spec.numerics.tol);
    let x0 = basepoint(spec);
    let basis = basis_at(spec, x0)?;
    let loops = loops(spec, x0)?;
    let n = sys.dim();
    let branch = def.branch_at(x0);
    let per_loop = gather(
        par::map(&loops, |(center, l)| -> monodromy::Result<Value> {
            let j = loop_jump(&def, &basis.value, &CMat::zeros(n, n), l, &branch)?;
            let (_, coeff) = perturbed_monodromy_first_order(&j.monodromy, &j.c_at_x, &j.c_looped)?;
            Ok(json!({
                "center": cx(*center),
                "delta": mat_json(&j.delta),
                "monodromy": mat_json(&j.monodromy),
                "first_order_coefficient": mat_json(&coeff),
                "windings": to_json(&j.windings),
                "path_hash": j.path_hash,
                "steps": to_json(&j.steps),
            }))
        }),
        "dyson",
        "loop_jump",
    )?;

    let mut constancy = Vec::new();
    if matches!(pert.kind(), PerturbationKind::Meromorphic) {
        let sings = spec.singular_points();
        for (center, _) in &loops {
            let probes = match &spec.probes {
                Some(p) => p.iter().map(|z| z.0).collect(),
                None => default_probes(*center, &sings, x0),
            };
            let j = at(cocycle_jump(&def, JumpSetup::Reference(&basis), *center, &probes), "dyson", "cocycle_jump")?;
            constancy.push(json!({ "center": cx(*center), "constancy_residual": j.constancy_residual }));
        }
    }

    let mut identity = Vec::new();
    if loops.len() >= 2 {
        let cocycles = loops
            .iter()
            .map(|(_, l)| at(loop_cocycle(&def, &basis, l), "dyson", "loop_cocycle"))
            .collect::<Result<Vec<_>, _>>()?;
        for i in 0..loops.len() {
            for j in 0..loops.len() {
                if i == j {
                    continue;
                }
                let composite = at(compose_loops(&loops[i].1, &loops[j].1), "transport", "compose_loops")?;
                let ab = at(loop_cocycle(&def, &basis, &composite), "dyson", "loop_cocycle")?;
                let r = at(cocycle_identity_residual(&cocycles[i], &cocycles[j], &ab), "dyson", "cocycle_identity_residual")?;
                identity.push(json!({ "a": cx(loops[i].0), "b": cx(loops[j].0), "residual": r }));
            }
        }
    }
    let delta = per_loop.first().map(|l| l["delta"].clone()).unwrap_or(Value::Null);
    Ok(Output {
        results: json!({ "delta": delta, "loops": per_loop, "cocycle_identity": identity }),
        diagnostics: json!({ "constancy": constancy }),
        tables: Vec::new(),
    })
}

fn cocycle_from_singular(spec: &ProblemSpec) -> Outcome {
    let sys = spec.system();
    let pert = perturbation(spec);
    let def = Deformation::new(&sys, pert, spec.numerics.tol);
    let (a, b, c) = spec.equation.hypergeometric().expect("checked: hypergeometric").params();
    let sings = spec.singular_points();
    let mut per_center = Vec::new();
    let mut worst = 0.0_f64;
    for center in centers(spec) {
        let local = if center.norm() < 1e-12 {
            at(LocalBasis::at_zero(a, b, c), "hypergeom", "LocalBasis::at_zero")?
        } else if (center - 1.0).norm() < 1e-12 {
            at(LocalBasis::at_one(a, b, c), "hypergeom", "LocalBasis::at_one")?
        } else {
            return Err(NumericFailure {
                module: "dyson",
                operation: "cocycle_jump",
                error: Error::Invalid(format!("no local basis at {center}")),
                partial: to_json(&per_center),
            });
        };
        let probes = match &spec.probes {
            Some(p) => p.iter().map(|z| z.0).collect(),
            None => default_probes(center, &sings, C64::new(0.5, 0.0)),
        };
        let j = at(cocycle_jump(&def, JumpSetup::Frobenius(&local), center, &probes), "dyson", "cocycle_jump")?;
        let plain = pert.with_kind(PerturbationKind::Meromorphic);
        let def_plain = Deformation::new(&sys, &plain, spec.numerics.tol);
        let mut mismatch = Vec::new();
        let mut literal = Vec::new();
        for p in &j.probes {
            let c_h = if matches!(pert.kind(), PerturbationKind::LogWeighted) {
                Some(at(def_plain.ray_correction(&local, p.x, &def_plain.branch_at(p.x)), "dyson", "correction_c")?)
            } else {
                None
            };
            // closed forms describe jumps around the branch point at 0
            if center.norm() < 1e-12 {
                let want = at(closed_form_jump(pert.kind(), &p.c_at_x, c_h.as_ref()), "dyson", "closed_form_jump")?;
                let m = relative_mismatch(&p.delta, &want);
                worst = worst.max(m);
                mismatch.push(m);
                if matches!(pert.kind(), PerturbationKind::LogWeighted) {
                    literal.push(relative_mismatch(&p.delta, &literal_log_jump(&p.c_at_x)));
                }
            }
        }
        per_center.push(json!({
            "center": cx(center),
            "delta": mat_json(&j.delta),
            "x_probe": cx(j.x_probe),
            // only a single-valued H gives a probe-independent jump
            "constancy_residual": (!pert.kind().is_multivalued()).then_some(j.constancy_residual),
            "probes": j.probes.iter().map(|p| json!({
                "x": cx(p.x), "delta": mat_json(&p.delta), "c": mat_json(&p.c_at_x),
            })).collect::<Vec<_>>(),
            "closed_form_mismatch": mismatch,
            "literal_log_mismatch": literal,
        }));
    }
    let delta = per_center.first().map(|l| l["delta"].clone()).unwrap_or(Value::Null);
    Ok(Output {
        results: json!({ "delta": delta, "centers": per_center }),
        diagnostics: json!({ "oracle_delta": worst }),
        tables: Vec::new(),
    })
}

fn real_params(spec: &ProblemSpec) -> (f64, f64, f64) {
    let (a, b, c) = spec.equation.hypergeometric().expect("checked: hypergeometric").params();
    (a.re, b.re, c.re)
}

fn forcing_fn(spec: &ProblemSpec, params: Option<&SpectralParams>) -> Result<RealFn, NumericFailure> {
    let f = spec.f.as_ref().expect("checked: f present");
    match (f.polynomial(), params) {
        (Some(p), _) => Ok(Arc::new(move |x| Ok(p.eval(C64::new(x, 0.0))))),
        (None, Some(sp)) => Ok(density_shape(sp)),
        (None, None) => {
            let (a, b, c) = real_params(spec);
            let sp = at(SpectralParams::new(a, b, c), "spectral", "SpectralParams::new")?;
            Ok(density_shape(&sp))
        }
    }
}

fn eigenshift_task(spec: &ProblemSpec) -> Outcome {
    let (a, b, c) = real_params(spec);
    let params = at(SpectralParams::new(a, b, c), "spectral", "SpectralParams::new")?;
    let quad = at(QuadratureSpec::new(spec.numerics.quad_rule, spec.numerics.quad_nodes), "spectral", "QuadratureSpec")?;
    let f = forcing_fn(spec, Some(&params))?;
    let shift = at(eigenvalue_shift(&f, &params, &quad), "spectral", "eigenvalue_shift")?;
    let cross = at(eigenvalue_shift(&f, &params, &quad.other()), "spectral", "eigenvalue_shift")?;
    let gram = orthonormality(&params, &quad).map(|g| to_json(&g)).unwrap_or_else(|e| json!({ "unavailable": e.to_string() }));
    let hierarchy = at(hierarchy_check(&f, &params, &quad, HIERARCHY_INTERVAL), "spectral", "hierarchy_check")?;
    let grid = spec.sample.unwrap_or(Sample {
        from: 0.01,
        to: 0.99,
        points: 99,
    });
    let rows = gather(
        par::map(&grid.grid(), |&x| -> monodromy::Result<Vec<f64>> {
            let y = params.y1(x)?;
            let fx = f(x)?;
            Ok(vec![x, y.norm_sqr() * params.omega(x), fx.re, fx.im])
        }),
        "spectral",
        "density",
    )?;
    let mut table = Table::new("density", &["x", "rho", "f_re", "f_im"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Output {
        results: json!({
            "shift": to_json(&shift),
            "gram": gram,
            "hierarchy": to_json(&hierarchy),
            "quadrature": to_json(&quad),
        }),
        diagnostics: json!({
            "oracle_delta": (shift.lambda1 - cross.lambda1).norm(),
            "cross_rule": to_json(&quad.other()),
        }),
        tables: vec![table],
    })
}

/// `H = [[0,0],[f/(x(1−x)),0]]` for a polynomial `f`.
fn hypergeometric_deformation(f: &monodromy::odecore::ComplexPoly) -> PerturbationSpec {
    let den = monodromy::odecore::ComplexPoly::from_real(&[0.0, 1.0, -1.0]);
    let z = RationalFn::zero();
    PerturbationSpec::new(
        PerturbationKind::Meromorphic,
        2,
        vec![z.clone(), z.clone(), RationalFn::new(f.clone(), den), z],
    )
    .expect("2x2 perturbation")
}

fn series_task(spec: &ProblemSpec) -> Outcome {
    let (a, b, c) = spec.equation.hypergeometric().expect("checked: hypergeometric").params();
    let x0 = basepoint(spec).re;
    let k = spec.numerics.order;
    let rho = spec.rho;
    let f = forcing_fn(spec, None)?;
    let initial = spec.initial.map(|[p, q]| [p.0, q.0]).unwrap_or([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let series = at(
        hypergeometric_series(a, b, c, f.clone(), k, x0, initial, spec.numerics.tol.min(1e-12)),
        "varpar",
        "deformed_series",
    )?;
    let ode = monodromy::odecore::ScalarODE::hypergeometric(a, b, c);
    let coupling = monodromy::varpar::hypergeometric_coupling(f);
    let direct = match spec.f.as_ref().and_then(Forcing::polynomial) {
        Some(p) => {
            let pert = hypergeometric_deformation(&p);
            let basis = at(frobenius_basis_at(a, b, c, LocalPoint::Zero, C64::new(x0, 0.0)), "transport", "frobenius_basis_at")?;
            Some((pert, basis))
        }
        None => None,
    };
    let sys = spec.system();
    let grid = spec.sample.unwrap_or(DEFAULT_SAMPLE).grid();
    let rows = gather(
        par::map(&grid, |&x| -> monodromy::Result<(Vec<C64>, C64, C64, Option<C64>)> {
            let terms = series.term_values(x)?;
            let sum = series.eval(x, rho)?;
            let residual = series.residual(&ode, &coupling, x, rho)?;
            let direct = match &direct {
                Some((pert, basis)) if (x - x0).abs() > 1e-15 => {
                    let t = Transporter::perturbed(&sys, pert, rho, spec.numerics.tol);
                    let path = PathSpec::line(C64::new(x0, 0.0), C64::new(x, 0.0))?;
                    let (w, _) = t.propagate(&path, &basis.value, &mut t.branch_at(path.start()))?;
                    Some(w[(0, 0)] * initial[0] + w[(0, 1)] * initial[1])
                }
                Some(_) => Some(sum),
                None => None,
            };
            Ok((terms, sum, residual, direct))
        }),
        "varpar",
        "deformed_series",
    )?;
    let mut header = vec!["x".to_string()];
    for i in 0..=k {
        header.push(format!("y{i}_re"));
        header.push(format!("y{i}_im"));
    }
    header.extend(["sum_re".to_string(), "sum_im".to_string()]);
    let mut table = Table::with_header("series", header);
    let mut samples = Vec::new();
    let mut oracle = None::<f64>;
    let mut worst_residual = 0.0_f64;
    for (x, (terms, sum, residual, direct)) in grid.iter().zip(&rows) {
        let mut row = vec![*x];
        for t in terms {
            row.extend([t.re, t.im]);
        }
        row.extend([sum.re, sum.im]);
        table.push(row);
        worst_residual = worst_residual.max(residual.norm());
        if let Some(d) = direct {
            oracle = Some(oracle.unwrap_or(0.0).max((d - sum).norm()));
        }
        samples.push(json!({
            "x": x,
            "terms": terms.iter().map(|t| cx(*t)).collect::<Vec<_>>(),
            "sum": cx(*sum),
        }));
    }
    Ok(Output {
        results: json!({ "order": k, "rho": cx(rho), "basepoint": x0, "samples": samples }),
        diagnostics: json!({ "max_residual": worst_residual, "oracle_delta": oracle }),
        tables: vec![table],
    })
}

fn sample_task(spec: &ProblemSpec) -> Outcome {
    if let Some(h) = spec.equation.hypergeometric() {
        if spec.paths.is_empty() {
            return sample_basis(spec, h.params());
        }
    }
    sample_path(spec)
}

fn sample_basis(spec: &ProblemSpec, (a, b, c): (C64, C64, C64)) -> Outcome {
    let basis = at(monodromy::hypergeom::UnitIntervalBasis::new(a, b, c), "hypergeom", "UnitIntervalBasis::new")?;
    let grid = spec
        .sample
        .unwrap_or(Sample {
            from: 0.05,
            to: 0.95,
            points: 19,
        })
        .grid();
    let rows = gather(
        par::map(&grid, |&x| -> monodromy::Result<Vec<f64>> {
            let [p, q] = basis.eval(C64::new(x, 0.0))?;
            let w = monodromy::hypergeom::weight_omega(a, b, c, x);
            Ok(vec![x, p[0].re, p[0].im, q[0].re, q[0].im, w.re, w.im])
        }),
        "hypergeom",
        "UnitIntervalBasis::eval",
    )?;
    let mut table = Table::new("samples", &["x", "y1_re", "y1_im", "y2_re", "y2_im", "omega_re", "omega_im"]);
    let values: Vec<Value> = rows.iter().map(|r| json!({ "x": r[0], "y1": [r[1], r[2]], "y2": [r[3], r[4]], "omega": [r[5], r[6]] })).collect();
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Output {
        results: json!({ "samples": values }),
        diagnostics: json!({}),
        tables: vec![table],
    })
}

fn sample_path(spec: &ProblemSpec) -> Outcome {
    let sys: MeromorphicSystem = spec.system();
    let path = &spec.paths[0];
    let basis = basis_at(spec, path.start())?;
    let t = match (&spec.perturbation, spec.rho.norm() > 0.0) {
        (Some(p), true) => Transporter::perturbed(&sys, p, spec.rho, spec.numerics.tol),
        _ => Transporter::new(&sys, spec.numerics.tol),
    };
    let n = sys.dim();
    let mut header = vec!["x_re".to_string(), "x_im".to_string()];
    for j in 0..n {
        header.push(format!("y{}_re", j + 1));
        header.push(format!("y{}_im", j + 1));
    }
    let mut table = Table::with_header("path_samples", header);
    let mut branch = t.branch_at(path.start());
    let mut w = basis.value.clone();
    let mut push = |x: C64, w: &CMat| {
        let mut row = vec![x.re, x.im];
        for j in 0..n {
            row.extend([w[(0, j)].re, w[(0, j)].im]);
        }
        table.push(row);
    };
    push(path.start(), &w);
    let mut largest = max_abs(&w);
    for piece in subdivide(path, 16) {
        w = at(t.propagate(&piece, &w, &mut branch), "transport", "transport")?.0;
        largest = largest.max(max_abs(&w));
        push(piece.end(), &w);
    }
    Ok(Output {
        results: json!({ "endpoint": cx(path.end()), "w": mat_json(&w), "windings": to_json(&branch.windings()) }),
        diagnostics: json!({ "max_entry": largest }),
        tables: vec![table],
    })
}
