use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::odecore::{ComplexPoly, ScalarODE};

/// Stirling number of the second kind `c(k, n)`.
pub fn stirling2(k: usize, n: usize) -> u64 {
    if n > k {
        return 0;
    }
    // row of c(i, ·) built with c(i+1, m) = m·c(i, m) + c(i, m−1)
    let mut row = vec![0u64; k + 1];
    row[0] = 1;
    for i in 0..k {
        for m in (1..=i + 1).rev() {
            row[m] = m as u64 * row[m] + row[m - 1];
        }
        row[0] = 0;
    }
    row[n]
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Elementary symmetric polynomial `e_k` read off `∏(1 + t·v)`.
pub fn elem_sym(vals: &[C64], k: usize) -> Result<C64> {
    if k > vals.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: vals.len(),
        });
    }
    Ok(elem_sym_all(vals)[k])
}

fn elem_sym_all(vals: &[C64]) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); vals.len() + 1];
    e[0] = C64::new(1.0, 0.0);
    for (i, &v) in vals.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] = e[k] + v * e[k - 1];
        }
    }
    e
}

/// Polynomial coefficients `P_0 … P_p` of `Σ P_n(z) dⁿy/dzⁿ = 0`, the expanded form of
/// `[∏(θ + a_j) − d/dz ∏(θ + b_k − 1)] y = 0` with `θ = z d/dz`.
pub fn ghe_polynomials(upper: &[C64], lower: &[C64]) -> Result<Vec<ComplexPoly>> {
    let p = upper.len();
    if p == 0 {
        return Err(Error::Invalid("at least one upper parameter is required".into()));
    }
    if lower.len() + 1 != p {
        return Err(Error::ShapeMismatch(format!(
            "{} upper parameters need {} lower ones",
            p,
            p - 1
        )));
    }
    let ea = elem_sym_all(upper);
    let shifted: Vec<C64> = lower.iter().map(|&b| b - 1.0).collect();
    let eb = elem_sym_all(&shifted);
    let mut polys = Vec::with_capacity(p + 1);
    for n in 0..=p {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        // z^n term from the upper product
        for k in n..=p {
            coeffs[n] += ea[p - k] * stirling2(k, n) as f64;
        }
        // z^{n-1} term from the lower product
        if n >= 1 {
            for k in n - 1..p {
                let inner: u64 = (n - 1..=k).map(|j| binomial(k, j) * stirling2(j, n - 1)).sum();
                coeffs[n - 1] -= eb[p - k - 1] * inner as f64;
            }
        }
        polys.push(ComplexPoly::new(coeffs));
    }
    Ok(polys)
}

/// The generalized hypergeometric operator in monic form.
pub fn ghe_operator(upper: &[C64], lower: &[C64]) -> Result<ScalarODE> {
    ScalarODE::from_polynomial_coeffs(&ghe_polynomials(upper, lower)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn stirling_table() {
        assert_eq!(stirling2(0, 0), 1);
        assert_eq!(stirling2(5, 0), 0);
        for k in 0..8 {
            assert_eq!(stirling2(k, k), 1);
        }
        assert_eq!(stirling2(3, 2), 3);
        assert_eq!(stirling2(4, 2), 7);
        assert_eq!(stirling2(5, 3), 25);
    }

    #[test]
    fn falling_factorial_inversion() {
        for k in 0..=6usize {
            for x in 1..=6i64 {
                let mut sum = 0i64;
                for n in 0..=k {
                    let falling: i64 = (0..n as i64).map(|i| x - i).product();
                    sum += stirling2(k, n) as i64 * falling;
                }
                assert_eq!(sum, x.pow(k as u32));
            }
        }
    }

    #[test]
    fn elementary_symmetric() {
        let v = [re(2.0), re(3.0), re(5.0)];
        assert_eq!(elem_sym(&v, 0).unwrap(), re(1.0));
        assert_eq!(elem_sym(&v[..2], 1).unwrap(), re(5.0));
        assert_eq!(elem_sym(&v, 2).unwrap(), re(31.0));
        assert_eq!(elem_sym(&v, 3).unwrap(), re(30.0));
        assert_eq!(
            elem_sym(&v, 4),
            Err(Error::IndexOutOfRange { index: 4, len: 3 })
        );
    }

    #[test]
    fn first_order_operator() {
        // (z − 1)y′ + a·y = 0
        let a = re(0.3);
        let polys = ghe_polynomials(&[a], &[]).unwrap();
        assert_eq!(polys[0], ComplexPoly::constant(a));
        assert_eq!(polys[1], ComplexPoly::from_real(&[-1.0, 1.0]));
        let ode = ghe_operator(&[a], &[]).unwrap();
        let x = re(0.4);
        let y = (1.0 - x).powc(-a);
        assert!(ode.residual(x, &[y, a * y / (1.0 - x)]).norm() < 1e-14);
    }

    fn theta_power(k: usize, f: &ComplexPoly) -> ComplexPoly {
        (0..k).fold(f.clone(), |g, _| &ComplexPoly::x() * &g.derivative())
    }

    #[test]
    fn theta_expansion() {
        let f = ComplexPoly::from_real(&[1.0, -2.0, 0.5, 3.0, 0.0, 1.0, -1.0]);
        for k in 0..=5 {
            let direct = theta_power(k, &f);
            let mut expanded = ComplexPoly::zero();
            let mut deriv = f.clone();
            let mut zn = ComplexPoly::one();
            for n in 0..=k {
                let term = (&zn * &deriv).scale(re(stirling2(k, n) as f64));
                expanded = &expanded + &term;
                deriv = deriv.derivative();
                zn = &zn * &ComplexPoly::x();
            }
            assert_eq!(direct, expanded, "k = {k}");
        }
    }

    #[test]
    fn derivative_theta_commutator() {
        // d/dz ∘ θⁿ = (θ + 1)ⁿ ∘ d/dz on monomials
        for m in 0..=6usize {
            let mut mono = vec![0.0; m + 1];
            mono[m] = 1.0;
            let zm = ComplexPoly::from_real(&mono);
            for n in 0..=4 {
                let lhs = theta_power(n, &zm).derivative();
                let d = zm.derivative();
                let mut rhs = ComplexPoly::zero();
                for j in 0..=n {
                    let term = theta_power(j, &d).scale(re(binomial(n, j) as f64));
                    rhs = &rhs + &term;
                }
                assert_eq!(lhs, rhs);
            }
        }
    }
}
