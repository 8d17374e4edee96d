//! Problem specification: the JSON schema with its defaults, plus semantic checks.

use std::fmt;

use monodromy::cjson::{self, Cx};
use monodromy::linalg::{distance_to_integer, CMat, C64};
use monodromy::odecore::{
    companion, pole_exclusion_radius, ComplexPoly, MeromorphicSystem, PerturbationSpec, ScalarODE,
};
use monodromy::transport::PathSpec;
use serde::{Deserialize, Serialize};

pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub equation: Equation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default, with = "cjson::complex")]
    pub rho: C64,
    pub task: Task,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<PathSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<Cx>,
    #[serde(default)]
    pub basis: BasisChoice,
    /// Loop centers; defaults to every finite singular point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<Cx>>,
    #[serde(default)]
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Forcing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<[Cx; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<Sample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Hypergeometric(HypergeomSpec),
    Scalar(ScalarODE),
    System(MeromorphicSystem),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergeomSpec {
    pub a: Cx,
    pub b: Cx,
    pub c: Cx,
}

impl HypergeomSpec {
    pub fn params(&self) -> (C64, C64, C64) {
        (self.a.0, self.b.0, self.c.0)
    }
}

impl Equation {
    pub fn system(&self) -> MeromorphicSystem {
        match self {
            Equation::Hypergeometric(h) => {
                let (a, b, c) = h.params();
                companion(&ScalarODE::hypergeometric(a, b, c))
            }
            Equation::Scalar(ode) => companion(ode),
            Equation::System(sys) => sys.clone(),
        }
    }

    pub fn hypergeometric(&self) -> Option<HypergeomSpec> {
        match self {
            Equation::Hypergeometric(h) => Some(*h),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Monodromy,
    Dyson,
    Cocycle,
    Eigenshift,
    Series,
    Sample,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("task serializes");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(rename = "K", default = "default_order")]
    pub order: usize,
    #[serde(default = "default_nodes")]
    pub quad_nodes: usize,
    #[serde(default = "default_rule")]
    pub quad_rule: monodromy::spectral::QuadRule,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_order() -> usize {
    2
}

fn default_nodes() -> usize {
    monodromy::spectral::DEFAULT_NODES
}

fn default_rule() -> monodromy::spectral::QuadRule {
    monodromy::spectral::QuadRule::GaussJacobiEndpoint
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            order: default_order(),
            quad_nodes: default_nodes(),
            quad_rule: default_rule(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub enum BasisChoice {
    #[default]
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "frobenius-at-0")]
    FrobeniusAt0,
    #[serde(rename = "frobenius-at-1")]
    FrobeniusAt1,
    #[serde(rename = "custom")]
    Custom(#[serde(with = "cjson::matrix")] CMat),
}

/// Lower limit of the correction integral in the cocycle task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    #[default]
    Basepoint,
    Singular,
}

/// `f(x)`: a polynomial (ascending coefficients) or a named builtin.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Forcing {
    Builtin(Builtin),
    Polynomial(ComplexPoly),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    #[serde(rename = "one")]
    One,
    #[serde(rename = "x")]
    X,
    #[serde(rename = "x(1-x)")]
    XOneMinusX,
    #[serde(rename = "density")]
    Density,
}

impl Forcing {
    /// The polynomial form, when there is one.
    pub fn polynomial(&self) -> Option<ComplexPoly> {
        match self {
            Forcing::Polynomial(p) => Some(p.clone()),
            Forcing::Builtin(Builtin::One) => Some(ComplexPoly::one()),
            Forcing::Builtin(Builtin::X) => Some(ComplexPoly::x()),
            Forcing::Builtin(Builtin::XOneMinusX) => Some(ComplexPoly::from_real(&[0.0, 1.0, -1.0])),
            Forcing::Builtin(Builtin::Density) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Sample {
    pub fn grid(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.from];
        }
        (0..self.points)
            .map(|i| self.from + (self.to - self.from) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

pub const DEFAULT_SAMPLE: Sample = Sample {
    from: 0.2,
    to: 0.8,
    points: 13,
};

/// Parse failure with the JSON-pointer location of the offending value.
#[derive(Debug, Clone, Serialize)]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema error at '{}': {}", self.pointer, self.message)
    }
}

impl std::error::Error for SchemaError {}

pub fn parse(text: &str) -> Result<ProblemSpec, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| SchemaError {
        pointer: pointer(e.path()),
        message: e.inner().to_string(),
    })
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        let token = match seg {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } => key.replace('~', "~0").replace('/', "~1"),
            Segment::Enum { variant } => variant.clone(),
            Segment::Unknown => continue,
        };
        out.push('/');
        out.push_str(&token);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub pointer: String,
    pub message: String,
}

fn diag(severity: Severity, pointer: &str, message: String) -> Diagnostic {
    Diagnostic {
        severity,
        pointer: pointer.to_string(),
        message,
    }
}

impl ProblemSpec {
    pub fn system(&self) -> MeromorphicSystem {
        self.equation.system()
    }

    /// Basepoint, defaulting to ½ for the hypergeometric equation.
    pub fn basepoint(&self) -> Option<C64> {
        self.basepoint
            .map(|b| b.0)
            .or_else(|| self.equation.hypergeometric().map(|_| C64::new(0.5, 0.0)))
    }

    /// Singular points of the equation and of the perturbation.
    pub fn singular_points(&self) -> Vec<C64> {
        let mut pts = self.system().singularities().to_vec();
        if let Some(p) = &self.perturbation {
            pts.extend(p.singularities());
        }
        monodromy::odecore::dedup(pts)
    }

    /// Schema-level and semantic checks that need no numerics.
    pub fn check(&self) -> Vec<Diagnostic> {
        use Severity::*;
        let mut out = Vec::new();
        let tol = self.numerics.tol;
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            out.push(diag(Error, "/numerics/tol", format!("tol {tol:e} outside [{MIN_TOL:e}, {MAX_TOL:e}]")));
        }
        if self.numerics.order == 0 {
            out.push(diag(Error, "/numerics/K", "series order K must be at least 1".into()));
        }
        if self.numerics.quad_nodes < monodromy::spectral::MIN_NODES {
            out.push(diag(
                Error,
                "/numerics/quad_nodes",
                format!("quadrature needs at least {} nodes", monodromy::spectral::MIN_NODES),
            ));
        }
        if let Some(p) = &self.perturbation {
            if p.dim() != self.system().dim() {
                out.push(diag(
                    Error,
                    "/perturbation/H",
                    format!("H is {0}x{0} but the system has dimension {1}", p.dim(), self.system().dim()),
                ));
            }
        }
        if let Some(h) = self.equation.hypergeometric() {
            let (a, b, c) = h.params();
            let ptr = "/equation/hypergeometric";
            if distance_to_integer(c) < 1e-12 {
                out.push(diag(
                    Warning,
                    ptr,
                    format!("c = {c} is an integer: the Frobenius basis at 0 needs c outside the integers"),
                ));
            }
            if distance_to_integer(c - a - b) < 1e-12 {
                out.push(diag(
                    Warning,
                    ptr,
                    format!("c − a − b = {} is an integer: the Frobenius basis at 1 is unavailable", c - a - b),
                ));
            }
            if distance_to_integer(a - b) < 1e-12 {
                out.push(diag(Warning, ptr, format!("a − b = {} is an integer: exponents at infinity coincide mod 1", a - b)));
            }
        }
        let needs = |cond: bool, ptr: &str, what: &str, out: &mut Vec<Diagnostic>| {
            if !cond {
                out.push(diag(Error, ptr, format!("task '{}' requires {what}", self.task)));
            }
        };
        match self.task {
            Task::Monodromy => {}
            Task::Dyson => {
                needs(self.perturbation.is_some(), "/perturbation", "a perturbation", &mut out);
                needs(!self.paths.is_empty(), "/paths", "at least one path", &mut out);
            }
            Task::Cocycle => {
                needs(self.perturbation.is_some(), "/perturbation", "a perturbation", &mut out);
                if self.origin == Origin::Singular {
                    needs(
                        self.equation.hypergeometric().is_some(),
                        "/equation",
                        "the hypergeometric equation when origin is 'singular'",
                        &mut out,
                    );
                }
            }
            Task::Eigenshift | Task::Series => {
                needs(self.equation.hypergeometric().is_some(), "/equation", "the hypergeometric equation", &mut out);
                needs(self.f.is_some(), "/f", "a function f", &mut out);
            }
            Task::Sample => {
                needs(
                    self.equation.hypergeometric().is_some() || !self.paths.is_empty(),
                    "/paths",
                    "a path (or the hypergeometric equation)",
                    &mut out,
                );
            }
        }
        if matches!(self.task, Task::Eigenshift | Task::Series) {
            if let Some(h) = self.equation.hypergeometric() {
                let (a, b, c) = h.params();
                if [a, b, c].iter().any(|z| z.im != 0.0) {
                    out.push(diag(Error, "/equation/hypergeometric", "only real parameters are supported for this task".into()));
                } else if self.task == Task::Eigenshift && (c.re <= 0.0 || (a + b - c).re <= -1.0) {
                    out.push(diag(
                        Error,
                        "/equation/hypergeometric",
                        format!("weight exponents ({}, {}) must exceed −1", c.re - 1.0, (a + b - c).re),
                    ));
                }
            }
        }
        if self.task == Task::Series {
            match self.basepoint() {
                Some(x0) if x0.im == 0.0 && x0.re > 0.0 && x0.re < 1.0 => {}
                _ => out.push(diag(Error, "/basepoint", "the series basepoint must be real and inside (0, 1)".into())),
            }
        }
        if self.basepoint().is_none() && matches!(self.task, Task::Monodromy | Task::Cocycle) && self.paths.is_empty() {
            out.push(diag(Error, "/basepoint", "a basepoint is required for this equation".into()));
        }
        if matches!(self.basis, BasisChoice::FrobeniusAt0 | BasisChoice::FrobeniusAt1) && self.equation.hypergeometric().is_none() {
            out.push(diag(Error, "/basis", "Frobenius bases are available for the hypergeometric equation only".into()));
        }
        if let BasisChoice::Custom(m) = &self.basis {
            let n = self.system().dim();
            if m.nrows() != n || m.ncols() != n {
                out.push(diag(Error, "/basis/custom", format!("custom basis must be {n}x{n}")));
            }
        }
        let sings = self.singular_points();
        for (i, path) in self.paths.iter().enumerate() {
            if let Some((d, p)) = path.clearance(&sings) {
                if d < pole_exclusion_radius(p) {
                    out.push(diag(
                        Error,
                        &format!("/paths/{i}"),
                        format!("path passes within {d:.3e} of the singular point {} (clearance error)", fmt_c(p)),
                    ));
                }
            }
        }
        out
    }
}

pub fn fmt_c(z: C64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_numerics_and_basis() {
        let s = parse(r#"{"equation":{"hypergeometric":{"a":0.3,"b":0.7,"c":0.4}},"task":"monodromy"}"#).unwrap();
        assert_eq!(s.numerics.tol, 1e-10);
        assert_eq!(s.numerics.order, 2);
        assert!(matches!(s.basis, BasisChoice::Identity));
        assert_eq!(s.basepoint(), Some(C64::new(0.5, 0.0)));
        assert!(s.check().is_empty());
    }

    #[test]
    fn forcing_accepts_builtins_and_coefficients() {
        let f: Forcing = serde_json::from_str(r#""x(1-x)""#).unwrap();
        assert_eq!(f.polynomial().unwrap(), ComplexPoly::from_real(&[0.0, 1.0, -1.0]));
        let f: Forcing = serde_json::from_str("[1, [0, 2]]").unwrap();
        assert_eq!(f.polynomial().unwrap().eval(C64::new(1.0, 0.0)), C64::new(1.0, 2.0));
        assert!(serde_json::from_str::<Forcing>(r#""density""#).unwrap().polynomial().is_none());
    }

    #[test]
    fn unknown_field_points_at_its_parent() {
        let e = parse(r#"{"equation":{"hypergeometric":{"a":0.3,"b":0.7,"c":0.4}},"task":"monodromy","numerics":{"tolerance":1}}"#)
            .unwrap_err();
        assert_eq!(e.pointer, "/numerics/tolerance");
    }

    #[test]
    fn task_requirements_are_reported() {
        let s = parse(r#"{"equation":{"hypergeometric":{"a":0.3,"b":0.7,"c":0.4}},"task":"dyson"}"#).unwrap();
        let ptrs: Vec<String> = s.check().into_iter().map(|d| d.pointer).collect();
        assert_eq!(ptrs, ["/perturbation", "/paths"]);
    }
}
