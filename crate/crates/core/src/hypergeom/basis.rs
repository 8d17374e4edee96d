use crate::error::{Error, Result};
use crate::linalg::{distance_to_integer, inverse, CMat, C64};
use crate::varpar::SolutionBasis;

use super::series::hyp2f1_jet;

/// Distance to ℤ below which parameters count as non-generic.
pub const GENERIC_TOL: f64 = 1e-8;

/// `[y, y′, y″]` of one basis member.
pub type Jet = [C64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalPoint {
    Zero,
    One,
}

/// Frobenius basis of the hypergeometric equation at 0 or at 1.
///
/// At 0: `y₁ = ₂F₁(a,b;c;x)`, `y₂ = x^{1−c}₂F₁(a−c+1,b−c+1;2−c;x)`.
/// At 1: `y₁ = ₂F₁(a,b;a+b−c+1;1−x)`, `y₂ = (1−x)^{c−a−b}₂F₁(c−a,c−b;c−a−b+1;1−x)`.
/// Powers use the principal branch of the local coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub point: LocalPoint,
}

impl LocalBasis {
    pub fn at_zero(a: C64, b: C64, c: C64) -> Result<Self> {
        if distance_to_integer(c) < GENERIC_TOL {
            return Err(Error::DegenerateParams(format!("c = {c} is an integer")));
        }
        Ok(Self {
            a,
            b,
            c,
            point: LocalPoint::Zero,
        })
    }

    pub fn at_one(a: C64, b: C64, c: C64) -> Result<Self> {
        if distance_to_integer(c - a - b) < GENERIC_TOL {
            return Err(Error::DegenerateParams(format!(
                "c − a − b = {} is an integer",
                c - a - b
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            point: LocalPoint::One,
        })
    }

    pub fn center(&self) -> C64 {
        match self.point {
            LocalPoint::Zero => C64::new(0.0, 0.0),
            LocalPoint::One => C64::new(1.0, 0.0),
        }
    }

    /// Local exponents of `(y₁, y₂)`.
    pub fn exponents(&self) -> [C64; 2] {
        match self.point {
            LocalPoint::Zero => [C64::new(0.0, 0.0), 1.0 - self.c],
            LocalPoint::One => [C64::new(0.0, 0.0), self.c - self.a - self.b],
        }
    }

    /// Jets of both members at `x`.
    pub fn eval(&self, x: C64) -> Result<[Jet; 2]> {
        let (a, b, c) = (self.a, self.b, self.c);
        match self.point {
            LocalPoint::Zero => {
                let y1 = hyp2f1_jet(a, b, c, x)?;
                let g = hyp2f1_jet(a - c + 1.0, b - c + 1.0, 2.0 - c, x)?;
                let y2 = times_power(1.0 - c, x, g);
                Ok([y1, y2])
            }
            LocalPoint::One => {
                let t = 1.0 - x;
                let s = c - a - b;
                let f = hyp2f1_jet(a, b, a + b - c + 1.0, t)?;
                let g = hyp2f1_jet(c - a, c - b, s + 1.0, t)?;
                let y2 = times_power(s, t, g);
                // d/dx = −d/dt
                Ok([flip(f), flip(y2)])
            }
        }
    }

    /// `[[y₁, y₂], [y₁′, y₂′]]`.
    pub fn fundamental(&self, x: C64) -> Result<CMat> {
        let [p, q] = self.eval(x)?;
        Ok(CMat::from_row_slice(2, 2, &[p[0], q[0], p[1], q[1]]))
    }
}

fn flip(j: Jet) -> Jet {
    [j[0], -j[1], j[2]]
}

/// Jet of `t^s·g(t)` from the jet of `g` (principal branch of `t^s`).
fn times_power(s: C64, t: C64, g: Jet) -> Jet {
    let p0 = (s * t.ln()).exp();
    let p1 = s * p0 / t;
    let p2 = (s - 1.0) * p1 / t;
    [
        p0 * g[0],
        p1 * g[0] + p0 * g[1],
        p2 * g[0] + 2.0 * p1 * g[1] + p0 * g[2],
    ]
}

fn jet_matrix(j: [Jet; 2]) -> CMat {
    CMat::from_fn(3, 2, |r, col| j[col][r])
}

impl SolutionBasis for LocalBasis {
    fn order(&self) -> usize {
        2
    }

    fn jet(&self, x: C64) -> Result<CMat> {
        Ok(jet_matrix(self.eval(x)?))
    }
}

/// The basis at 0 evaluated anywhere on `(0, 1)`.
///
/// Uses the series at 0 up to `Re x = ½`; beyond it, the basis at 1 times a connection
/// matrix obtained by matching both bases at `½`.
#[derive(Debug, Clone)]
pub struct UnitIntervalBasis {
    zero: LocalBasis,
    one: Option<(LocalBasis, CMat)>,
}

impl UnitIntervalBasis {
    pub fn new(a: C64, b: C64, c: C64) -> Result<Self> {
        let zero = LocalBasis::at_zero(a, b, c)?;
        let one = match LocalBasis::at_one(a, b, c) {
            Ok(one) => {
                let half = C64::new(0.5, 0.0);
                let t = inverse(&one.fundamental(half)?)? * zero.fundamental(half)?;
                Some((one, t))
            }
            Err(_) => None,
        };
        Ok(Self { zero, one })
    }

    pub fn params(&self) -> (C64, C64, C64) {
        (self.zero.a, self.zero.b, self.zero.c)
    }

    pub fn local_zero(&self) -> &LocalBasis {
        &self.zero
    }

    /// Jets of `(y₁, y₂)` of the basis at 0.
    pub fn eval(&self, x: C64) -> Result<[Jet; 2]> {
        match &self.one {
            Some((one, t)) if x.re > 0.5 => {
                let m = jet_matrix(one.eval(x)?) * t;
                Ok([
                    [m[(0, 0)], m[(1, 0)], m[(2, 0)]],
                    [m[(0, 1)], m[(1, 1)], m[(2, 1)]],
                ])
            }
            _ => self.zero.eval(x),
        }
    }

    pub fn fundamental(&self, x: C64) -> Result<CMat> {
        let [p, q] = self.eval(x)?;
        Ok(CMat::from_row_slice(2, 2, &[p[0], q[0], p[1], q[1]]))
    }
}

impl SolutionBasis for UnitIntervalBasis {
    fn order(&self) -> usize {
        2
    }

    fn jet(&self, x: C64) -> Result<CMat> {
        Ok(jet_matrix(self.eval(x)?))
    }
}

/// `ω(x) = x^{c−1}(1−x)^{a+b−c}` on the real interval `(0, 1)`.
pub fn weight_omega(a: C64, b: C64, c: C64, x: f64) -> C64 {
    let x = C64::new(x, 0.0);
    ((c - 1.0) * x.ln() + (a + b - c) * (1.0 - x).ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    fn residual(a: C64, b: C64, c: C64, x: C64, j: Jet) -> C64 {
        x * (1.0 - x) * j[2] + (c - (a + b + 1.0) * x) * j[1] - a * b * j[0]
    }

    #[test]
    fn basis_at_zero() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let basis = LocalBasis::at_zero(a, b, c).unwrap();
        assert_eq!(basis.eval(re(1e-300)).unwrap()[0][0], re(1.0));
        let [y1, y2] = basis.eval(re(0.3)).unwrap();
        assert!(residual(a, b, c, re(0.3), y1).norm() < 1e-10);
        assert!(residual(a, b, c, re(0.3), y2).norm() < 1e-10);
        assert_eq!(basis.exponents(), [re(0.0), re(0.6)]);
    }

    #[test]
    fn basis_at_one() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let basis = LocalBasis::at_one(a, b, c).unwrap();
        for x in [0.3, 0.6, 0.9] {
            for j in basis.eval(re(x)).unwrap() {
                assert!(residual(a, b, c, re(x), j).norm() < 1e-10);
            }
        }
        assert!((basis.exponents()[1] - re(-0.6)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_parameters() {
        assert!(matches!(
            LocalBasis::at_zero(re(0.3), re(0.7), re(1.0)),
            Err(Error::DegenerateParams(_))
        ));
        assert!(matches!(
            LocalBasis::at_one(re(0.3), re(0.7), re(2.0)),
            Err(Error::DegenerateParams(_))
        ));
    }

    #[test]
    fn unit_interval_basis_is_continuous_at_half() {
        let basis = UnitIntervalBasis::new(re(0.3), re(0.7), re(1.2)).unwrap();
        let lo = basis.fundamental(re(0.5)).unwrap();
        let hi = basis.fundamental(re(0.5 + 1e-12)).unwrap();
        assert!(crate::linalg::max_abs_diff(&lo, &hi) < 1e-10);
    }

    #[test]
    fn omega_values() {
        assert!((weight_omega(re(0.5), re(0.5), re(1.0), 0.3) - 1.0).norm() < 1e-15);
        assert!((weight_omega(re(0.3), re(0.7), re(0.4), 0.5) - 1.0).norm() < 1e-15);
        assert!(weight_omega(re(0.3), re(0.7), re(1.4), 1e-12).norm() < 1e-4);
    }
}
