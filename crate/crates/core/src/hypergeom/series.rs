use serde::{Deserialize, Serialize};

use crate::cjson;
use crate::error::{Error, Result};
use crate::linalg::{distance_to_integer, C64};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 1_000_000;

/// Internal relative tolerance used by the basis evaluators.
pub const SERIES_TOL: f64 = 1e-17;

/// Upper and lower parameters of `pFq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergeomParams {
    #[serde(with = "cjson::complex_vec")]
    pub upper: Vec<C64>,
    #[serde(with = "cjson::complex_vec")]
    pub lower: Vec<C64>,
}

impl HypergeomParams {
    pub fn new(upper: Vec<C64>, lower: Vec<C64>) -> Self {
        Self { upper, lower }
    }

    pub fn gauss(a: C64, b: C64, c: C64) -> Self {
        Self::new(vec![a, b], vec![c])
    }

    pub fn check_lower(&self) -> Result<()> {
        match self.lower.iter().find(|&&b| is_nonpositive_integer(b)) {
            Some(&b) => Err(Error::InvalidLower(b)),
            None => Ok(()),
        }
    }
}

fn is_nonpositive_integer(b: C64) -> bool {
    b.re < 0.5 && distance_to_integer(b) < 1e-14
}

/// Rising factorial `a(a+1)…(a+m−1)`.
pub fn pochhammer(a: C64, m: usize) -> C64 {
    (0..m).fold(C64::new(1.0, 0.0), |acc, i| acc * (a + i as f64))
}

/// Sums the generalized hypergeometric series at `x`.
///
/// Stops once three consecutive terms fall below `tol·|sum|`.
pub fn pfq(params: &HypergeomParams, x: C64, tol: f64) -> Result<C64> {
    params.check_lower()?;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut small = 0;
    for m in 0..MAX_TERMS {
        let mf = m as f64;
        let num = params
            .upper
            .iter()
            .fold(x, |acc, &a| acc * (a + mf));
        let den = params
            .lower
            .iter()
            .fold(C64::new(mf + 1.0, 0.0), |acc, &b| acc * (b + mf));
        term *= num / den;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NoConvergence { terms: m + 1 });
        }
        if term.norm() <= tol * sum.norm() {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence { terms: MAX_TERMS })
}

/// `₂F₁(a,b;c;x)` and its first two derivatives.
pub fn hyp2f1_jet(a: C64, b: C64, c: C64, x: C64) -> Result<[C64; 3]> {
    let f0 = pfq(&HypergeomParams::gauss(a, b, c), x, SERIES_TOL)?;
    let f1 = pfq(&HypergeomParams::gauss(a + 1.0, b + 1.0, c + 1.0), x, SERIES_TOL)?;
    let f2 = pfq(&HypergeomParams::gauss(a + 2.0, b + 2.0, c + 2.0), x, SERIES_TOL)?;
    let k1 = a * b / c;
    let k2 = k1 * (a + 1.0) * (b + 1.0) / (c + 1.0);
    Ok([f0, k1 * f1, k2 * f2])
}

pub fn hyp2f1(a: C64, b: C64, c: C64, x: C64) -> Result<C64> {
    pfq(&HypergeomParams::gauss(a, b, c), x, SERIES_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(re(3.7), 0), re(1.0));
        assert_eq!(pochhammer(re(1.0), 4), re(24.0));
        assert_eq!(pochhammer(re(0.5), 2), re(0.75));
    }

    #[test]
    fn pfq_at_zero_is_one() {
        let p = HypergeomParams::new(vec![re(0.2), re(-1.3), re(4.0)], vec![re(0.7), re(2.5)]);
        assert_eq!(pfq(&p, re(0.0), 1e-16).unwrap(), re(1.0));
    }

    #[test]
    fn log_series() {
        let x = 0.5;
        let want = -(1.0_f64 - x).ln() / x;
        let got = hyp2f1(re(1.0), re(1.0), re(2.0), re(x)).unwrap();
        assert!((got - want).norm() < 1e-15);
        assert!((want - 1.386_294_361_1).abs() < 1e-10);
    }

    #[test]
    fn binomial_series() {
        // 1F0(a;;x) = (1-x)^(-a)
        let p = HypergeomParams::new(vec![re(0.3)], vec![]);
        let x = re(0.4);
        let got = pfq(&p, x, 1e-17).unwrap();
        assert!((got - (1.0 - x).powc(re(-0.3))).norm() < 1e-15);
    }

    #[test]
    fn terminating_series() {
        // 2F1(-2, b; c; x) is a quadratic
        let (b, c, x) = (re(1.5), re(0.5), re(0.3));
        let want = 1.0 + (-2.0) * b / c * x + (-2.0 * -1.0) * b * (b + 1.0) / (c * (c + 1.0)) * x * x / 2.0;
        assert!((hyp2f1(re(-2.0), b, c, x).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_lower_and_divergence() {
        let p = HypergeomParams::gauss(re(0.5), re(0.5), re(-2.0));
        assert_eq!(pfq(&p, re(0.1), 1e-16), Err(Error::InvalidLower(re(-2.0))));
        let p = HypergeomParams::gauss(re(0.5), re(0.5), re(1.5));
        assert!(matches!(pfq(&p, re(3.0), 1e-16), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let (a, b, c) = (re(0.3), re(0.7), re(0.4));
        let x = 0.3;
        let h = 1e-5;
        let jet = hyp2f1_jet(a, b, c, re(x)).unwrap();
        let fd = (hyp2f1(a, b, c, re(x + h)).unwrap() - hyp2f1(a, b, c, re(x - h)).unwrap()) / (2.0 * h);
        assert!((jet[1] - fd).norm() < 1e-8);
    }
}
