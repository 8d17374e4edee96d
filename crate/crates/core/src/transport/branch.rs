use std::f64::consts::TAU;

use serde::Serialize;

use crate::cjson;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::odecore::{PerturbationKind, BRANCH_POINT};

/// Points closer than this are identified when looking up a tracked branch point.
const POINT_TOL: f64 = 1e-12;

/// Continuous arguments of `x − p` for a set of branch points, following a path.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    anchor: C64,
    pos: C64,
    points: Vec<C64>,
    args: Vec<f64>,
    initial: Vec<f64>,
}

/// Net winding of the path about one tracked point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Winding {
    #[serde(with = "cjson::complex")]
    pub point: C64,
    pub turns: f64,
}

impl BranchState {
    /// Principal arguments at `anchor`.
    pub fn new(anchor: C64, points: &[C64]) -> Self {
        let mut pts: Vec<C64> = Vec::new();
        for &p in points {
            if !pts.iter().any(|q| (q - p).norm() <= POINT_TOL) {
                pts.push(p);
            }
        }
        let args: Vec<f64> = pts.iter().map(|&p| (anchor - p).arg()).collect();
        Self {
            anchor,
            pos: anchor,
            points: pts,
            initial: args.clone(),
            args,
        }
    }

    pub fn anchor(&self) -> C64 {
        self.anchor
    }

    pub fn position(&self) -> C64 {
        self.pos
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    fn index(&self, p: C64) -> Option<usize> {
        self.points.iter().position(|q| (q - p).norm() <= POINT_TOL)
    }

    /// Moves to `x` along a short straight step that does not pass through any point.
    pub fn advance_to(&mut self, x: C64) {
        for (p, a) in self.points.iter().zip(self.args.iter_mut()) {
            *a += ((x - p) / (self.pos - p)).arg();
        }
        self.pos = x;
    }

    /// Records a circular arc about `center` swept through `dtheta`, ending at `end`.
    ///
    /// The argument about `center` changes by exactly `dtheta`; other points are updated by
    /// `advance`, which the caller has already applied along the arc.
    pub(crate) fn settle_arc(&mut self, center: C64, arg_before: Option<f64>, dtheta: f64, end: C64) {
        self.pos = end;
        if let (Some(i), Some(before)) = (self.index(center), arg_before) {
            self.args[i] = before + dtheta;
        }
    }

    /// Tracked argument of `p` at the current position.
    pub fn current_arg(&self, p: C64) -> Option<f64> {
        self.index(p).map(|i| self.args[i])
    }

    /// Argument of `x − p` continued from the current position (valid near it).
    pub fn arg_at(&self, p: C64, x: C64) -> Result<f64> {
        let i = self.index(p).ok_or(Error::BranchRequired)?;
        Ok(self.args[i] + ((x - p) / (self.pos - p)).arg())
    }

    /// `ln|x − p| + i·arg(x − p)` on the tracked branch.
    pub fn log_at(&self, p: C64, x: C64) -> Result<C64> {
        Ok(C64::new((x - p).norm().ln(), self.arg_at(p, x)?))
    }

    pub fn windings(&self) -> Vec<Winding> {
        self.points
            .iter()
            .zip(self.args.iter().zip(&self.initial))
            .map(|(&point, (a, a0))| Winding {
                point,
                turns: (a - a0) / TAU,
            })
            .collect()
    }

    pub fn winding(&self, p: C64) -> Option<f64> {
        self.index(p).map(|i| (self.args[i] - self.initial[i]) / TAU)
    }
}

/// `x^λ` or `log x` on the tracked branch; 1 for meromorphic kinds.
pub fn branch_factor(state: &BranchState, kind: PerturbationKind, x: C64) -> Result<C64> {
    match kind {
        PerturbationKind::Meromorphic => Ok(C64::new(1.0, 0.0)),
        PerturbationKind::PowerWeighted { lambda } => {
            Ok((lambda * state.log_at(BRANCH_POINT, x)?).exp())
        }
        PerturbationKind::LogWeighted => state.log_at(BRANCH_POINT, x),
    }
}
