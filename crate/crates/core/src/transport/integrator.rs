//! Dormand–Prince 5(4) for complex-valued states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// An ODE `dy/ds = f(s, y)` with a hook for accepted steps.
pub trait ComplexOde {
    fn rhs(&self, s: f64, y: &[C64], dy: &mut [C64]) -> Result<()>;

    /// Called after each accepted step with the new state.
    fn accept(&mut self, _s: f64, _y: &[C64]) -> Result<()> {
        Ok(())
    }

    /// Largest admissible step starting at `s`.
    fn max_step(&self, _s: f64) -> f64 {
        f64::INFINITY
    }

    /// Point reported in errors.
    fn locate(&self, s: f64) -> C64 {
        C64::new(s, 0.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl StepStats {
    pub fn merge(&mut self, o: StepStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates from `s0` to `s1` in place.
///
/// A step is accepted when `max|err| ≤ tol·(1 + max|y|)`.
pub fn dopri5<O: ComplexOde>(ode: &mut O, s0: f64, s1: f64, y: &mut [C64], tol: f64) -> Result<StepStats> {
    let n = y.len();
    let span = s1 - s0;
    let mut stats = StepStats::default();
    if span == 0.0 {
        return Ok(stats);
    }
    let dir = span.signum();
    let z = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = vec![vec![z; n]; 7];
    let mut tmp = vec![z; n];
    let mut ynew = vec![z; n];
    let mut s = s0;
    ode.rhs(s, y, &mut k[0])?;
    stats.evaluations += 1;
    let mut h = (0.05 * span.abs()).min(ode.max_step(s)).min(tol.powf(0.2) * 0.1).max(1e-6 * span.abs());
    let stage = |y: &[C64], k: &[Vec<C64>], coeffs: &[f64], h: f64, out: &mut [C64]| {
        for i in 0..y.len() {
            let mut acc = z;
            for (j, &c) in coeffs.iter().enumerate() {
                if c != 0.0 {
                    acc += k[j][i] * c;
                }
            }
            out[i] = y[i] + acc * h;
        }
    };
    while (s1 - s) * dir > 0.0 {
        h = h.min(ode.max_step(s));
        let last = h >= (s1 - s).abs();
        if last {
            h = (s1 - s).abs();
        }
        let hs = h * dir;
        let underflow = h < 1e-14 * (1.0 + s.abs());
        if underflow {
            return Err(Error::StepSizeUnderflow { s, h });
        }
        stage(y, &k, &[A21], hs, &mut tmp);
        ode.rhs(s + C2 * hs, &tmp, &mut k[1])?;
        stage(y, &k, &[A31, A32], hs, &mut tmp);
        ode.rhs(s + C3 * hs, &tmp, &mut k[2])?;
        stage(y, &k, &[A41, A42, A43], hs, &mut tmp);
        ode.rhs(s + C4 * hs, &tmp, &mut k[3])?;
        stage(y, &k, &[A51, A52, A53, A54], hs, &mut tmp);
        ode.rhs(s + C5 * hs, &tmp, &mut k[4])?;
        stage(y, &k, &[A61, A62, A63, A64, A65], hs, &mut tmp);
        ode.rhs(s + hs, &tmp, &mut k[5])?;
        stage(y, &k, &[B1, 0.0, B3, B4, B5, B6], hs, &mut ynew);
        let s_next = if last { s1 } else { s + hs };
        ode.rhs(s_next, &ynew, &mut k[6])?;
        stats.evaluations += 6;
        let mut err = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * hs;
            err = err.max(e.norm());
            scale = scale.max(y[i].norm()).max(ynew[i].norm());
        }
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            if h < 1e-10 * span.abs() {
                return Err(Error::NonFiniteValue(ode.locate(s)));
            }
            stats.rejected += 1;
            h *= 0.1;
            continue;
        }
        let ratio = err / (tol * (1.0 + scale));
        if ratio <= 1.0 {
            s = s_next;
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            stats.accepted += 1;
            ode.accept(s, y)?;
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            stats.rejected += 1;
            h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(stats)
}
