use serde::{Deserialize, Deserializer, Serialize};

use super::poly::ComplexPoly;
use crate::linalg::C64;

/// Roots closer than this (relative to `1 + |r|`) are treated as common factors.
pub const ROOT_MATCH_TOL: f64 = 1e-9;

/// Reduced quotient of two complex polynomials with a monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalFn {
    num: ComplexPoly,
    den: ComplexPoly,
}

impl RationalFn {
    /// Builds `num / den` and cancels common roots.
    ///
    /// # Panics
    /// If `den` is the zero polynomial.
    pub fn new(num: ComplexPoly, den: ComplexPoly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        let (mut num, mut den) = (num, den);
        if num.is_zero() {
            return Self::zero();
        }
        let mut num_roots = num.roots();
        for r in den.roots() {
            let hit = num_roots
                .iter()
                .position(|&s| (s - r).norm() <= ROOT_MATCH_TOL * (1.0 + r.norm()));
            if let Some(i) = hit {
                let s = num_roots.swap_remove(i);
                let m = (s + r) / 2.0;
                num = num.deflate(m);
                den = den.deflate(m);
            }
        }
        let lead = den.leading();
        Self {
            num: num.scale(lead.inv()),
            den: den.scale(lead.inv()),
        }
    }

    pub fn poly(p: ComplexPoly) -> Self {
        Self {
            num: p,
            den: ComplexPoly::one(),
        }
    }

    pub fn constant(c: C64) -> Self {
        Self::poly(ComplexPoly::constant(c))
    }

    pub fn zero() -> Self {
        Self::poly(ComplexPoly::zero())
    }

    pub fn num(&self) -> &ComplexPoly {
        &self.num
    }

    pub fn den(&self) -> &ComplexPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, x: C64) -> C64 {
        if self.num.is_zero() {
            return C64::new(0.0, 0.0);
        }
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn poles(&self) -> Vec<C64> {
        self.den.roots()
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::new(&self.num + &o.num, self.den.clone());
        }
        Self::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.num * &o.num, &self.den * &o.den)
    }

    /// # Panics
    /// If `o` is identically zero.
    pub fn div(&self, o: &Self) -> Self {
        Self::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Poly(ComplexPoly),
    Ratio {
        num: ComplexPoly,
        #[serde(default = "ComplexPoly::one")]
        den: ComplexPoly,
    },
}

impl<'de> Deserialize<'de> for RationalFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (num, den) = match RationalRepr::deserialize(d)? {
            RationalRepr::Poly(p) => (p, ComplexPoly::one()),
            RationalRepr::Ratio { num, den } => (num, den),
        };
        if den.is_zero() {
            return Err(serde::de::Error::custom("denominator is the zero polynomial"));
        }
        Ok(Self::new(num, den))
    }
}
