use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cjson;
use crate::linalg::{eigenvalues, CMat, C64};

/// Polynomial with complex coefficients in ascending degree.
///
/// The highest stored coefficient is always nonzero; the zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|z| *z == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_real(&[0.0, 1.0])
    }

    /// `∏ (x − r)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            acc * Self::new(vec![-r, C64::new(1.0, 0.0)])
        })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Polynomial long division, `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dn = d.degree().expect("division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dn {
            return (Self::zero(), self.clone());
        }
        let lead = d.leading();
        let mut q = vec![C64::new(0.0, 0.0); rem.len() - dn];
        for k in (0..q.len()).rev() {
            let t = rem[k + dn] / lead;
            q[k] = t;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                rem[k + j] -= t * dc;
            }
        }
        rem.truncate(dn);
        (Self::new(q), Self::new(rem))
    }

    /// Divides out the linear factor `(x − r)` by synthetic division, dropping the remainder.
    pub fn deflate(&self, r: C64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return self.clone();
        }
        let mut q = vec![C64::new(0.0, 0.0); n - 1];
        let mut acc = C64::new(0.0, 0.0);
        for k in (1..n).rev() {
            acc = acc * r + self.coeffs[k];
            q[k - 1] = acc;
        }
        Self::new(q)
    }

    /// All complex roots with multiplicity.
    ///
    /// Eigenvalues of the companion matrix, each polished by a few Newton steps.
    pub fn roots(&self) -> Vec<C64> {
        let n = match self.degree() {
            None | Some(0) => return Vec::new(),
            Some(n) => n,
        };
        let lead = self.leading();
        let monic: Vec<C64> = self.coeffs.iter().map(|&c| c / lead).collect();
        let raw = match n {
            1 => vec![-monic[0]],
            2 => {
                let (b, c) = (monic[1], monic[0]);
                let disc = (b * b - 4.0 * c).sqrt();
                let q = if (-b + disc).norm() >= (-b - disc).norm() {
                    (-b + disc) / 2.0
                } else {
                    (-b - disc) / 2.0
                };
                if q.norm() == 0.0 {
                    vec![q, q]
                } else {
                    vec![q, c / q]
                }
            }
            _ => {
                let mut m = CMat::zeros(n, n);
                for i in 0..n - 1 {
                    m[(i, i + 1)] = C64::new(1.0, 0.0);
                }
                for j in 0..n {
                    m[(n - 1, j)] = -monic[j];
                }
                eigenvalues(&m)
            }
        };
        let dp = self.derivative();
        raw.into_iter().map(|r| self.polish(&dp, r)).collect()
    }

    fn polish(&self, dp: &Self, mut r: C64) -> C64 {
        for _ in 0..4 {
            let d = dp.eval(r);
            if d.norm() == 0.0 {
                break;
            }
            let step = self.eval(r) / d;
            if !step.is_finite() || step.norm() > 1e-3 * (1.0 + r.norm()) {
                break;
            }
            r -= step;
        }
        r
    }
}

impl fmt::Debug for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexPoly{:?}", self.coeffs)
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_default()
                        + rhs.coeffs.get(k).copied().unwrap_or_default()
                })
                .collect(),
        )
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        self + &(-rhs)
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ComplexPoly {
            type Output = ComplexPoly;
            fn $m(self, rhs: ComplexPoly) -> ComplexPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Serialize for ComplexPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        cjson::complex_vec::serialize(&self.coeffs, s)
    }
}

impl<'de> Deserialize<'de> for ComplexPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Self::new(cjson::complex_vec::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn trims_trailing_zeros() {
        let p = ComplexPoly::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert!(ComplexPoly::from_real(&[0.0]).is_zero());
    }

    #[test]
    fn arithmetic_and_eval() {
        let p = ComplexPoly::from_real(&[1.0, 1.0]);
        let q = &p * &p;
        assert_eq!(q, ComplexPoly::from_real(&[1.0, 2.0, 1.0]));
        assert_eq!(q.eval(c(2.0, 0.0)), c(9.0, 0.0));
        assert_eq!(q.derivative(), ComplexPoly::from_real(&[2.0, 2.0]));
        assert!((&q - &q).is_zero());
    }

    #[test]
    fn division_round_trip() {
        let a = ComplexPoly::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let d = ComplexPoly::new(vec![c(0.5, -1.0), c(1.0, 1.0)]);
        let (q, r) = a.div_rem(&d);
        let back = &(&q * &d) + &r;
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn quadratic_roots() {
        let p = ComplexPoly::from_real(&[-4.0, 0.0, 1.0]);
        let mut r: Vec<f64> = p.roots().iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 2.0).abs() < 1e-15 && (r[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_roots_from_companion() {
        let want = [c(0.5, 0.0), c(-1.0, 2.0), c(3.0, -0.25)];
        let p = ComplexPoly::from_roots(&want);
        let got = p.roots();
        assert!(crate::linalg::multiset_distance(&got, &want) < 1e-12);
    }

    #[test]
    fn deflation_removes_root() {
        let p = ComplexPoly::from_roots(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(p.deflate(c(1.0, 0.0)), ComplexPoly::from_real(&[-2.0, 1.0]));
    }

    #[test]
    fn json_round_trip() {
        let p = ComplexPoly::new(vec![c(1.0, -1.0), c(0.0, 2.0)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1.0,-1.0],[0.0,2.0]]");
        let q: ComplexPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
