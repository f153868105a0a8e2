//! Rational transfer functions `H(z) = num(z) / den(z)` and their impulse
//! response.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{cluster_roots, Polynomial};

/// Strictly proper SISO transfer function with monic denominator.
///
/// The McMillan degree is `deg den`; construction rejects inputs whose
/// numerator and denominator share a root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

/// First `K` impulse-response values `t_1, ..., t_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulsePrefix {
    pub values: Vec<f64>,
}

impl ImpulsePrefix {
    /// `t_k`, 1-based.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl TransferFunction {
    /// Builds `H(z)` from ascending-power coefficient lists.
    pub fn from_coefficients(num: &[f64], den: &[f64]) -> Result<Self> {
        let tf = Self::from_coefficients_trusted(num, den)?;
        tf.check_coprime()?;
        Ok(tf)
    }

    /// Like [`from_coefficients`](Self::from_coefficients) without the
    /// common-factor test, for coefficients recombined from known poles.
    pub(crate) fn from_coefficients_trusted(num: &[f64], den: &[f64]) -> Result<Self> {
        let den = Polynomial::new(den)?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let num = Polynomial::new(if num.is_empty() { &[0.0] } else { num })?;
        if num.degree() >= den.degree() && !(num.is_zero() && den.degree() > 0) {
            return Err(Error::NotStrictlyProper {
                num: num.degree(),
                den: den.degree(),
            });
        }
        let lead = den.leading();
        let den = den.scale(1.0 / lead);
        let num = num.scale(1.0 / lead);
        Ok(Self { num, den })
    }

    /// Resultant test: `res(num, den) = prod num(pole)` for monic `den`, so a
    /// common factor shows up as a pole where the numerator vanishes.
    fn check_coprime(&self) -> Result<()> {
        let roots = self.den.roots();
        for (pole, _) in cluster_roots(&self.den, &roots) {
            let value = self.num.eval_complex(pole).norm();
            let scale = self.num.abs_scale(pole);
            if value <= 1e-8 * scale || self.num.is_zero() {
                return Err(Error::NotCoprime {
                    re: pole.re,
                    im: pole.im,
                });
            }
        }
        Ok(())
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// McMillan degree `n`.
    pub fn degree(&self) -> usize {
        self.den.degree()
    }

    /// Long-division recurrence `t_k = p_k - sum_{i=1}^{min(k-1,n)} q_i t_{k-i}`,
    /// with `num = p_1 z^{n-1} + ... + p_n` and `den = z^n + q_1 z^{n-1} + ... + q_n`.
    pub fn impulse_response(&self, count: usize) -> ImpulsePrefix {
        let n = self.degree();
        let q = |i: usize| self.den.coeff(n - i);
        let p = |k: usize| if k <= n { self.num.coeff(n - k) } else { 0.0 };
        let mut values: Vec<f64> = Vec::with_capacity(count);
        for k in 1..=count {
            let mut t = p(k);
            for i in 1..=(k - 1).min(n) {
                t -= q(i) * values[k - 1 - i];
            }
            values.push(t);
        }
        ImpulsePrefix { values }
    }

    pub fn eval(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        self.num.eval_complex(z) / self.den.eval_complex(z)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// `1/(z-1) + t(z)` with `t` the third-order Chebyshev low-pass filter,
    /// combined over the common denominator.
    pub(crate) fn chebyshev_fixture() -> TransferFunction {
        let p = [0.1253986950, 0.1984152016, 0.3331328522];
        let q = [-0.38920832, 0.80189061, -0.69055619, 1.0];
        // num = q + (z - 1) p ; den = (z - 1) q
        let mut num = vec![0.0; 4];
        let mut den = vec![0.0; 5];
        for i in 0..4 {
            num[i] += q[i];
            den[i] -= q[i];
            den[i + 1] += q[i];
        }
        for i in 0..3 {
            num[i] -= p[i];
            num[i + 1] += p[i];
        }
        TransferFunction::from_coefficients(&num, &den).unwrap()
    }

    #[test]
    fn identity_case() {
        let tf = TransferFunction::from_coefficients(&[1.0], &[-1.0, 1.0]).unwrap();
        assert_eq!(tf.degree(), 1);
        assert!(tf.impulse_response(10).values.iter().all(|&t| t == 1.0));
    }

    #[test]
    fn chebyshev_fixture_is_valid() {
        let tf = chebyshev_fixture();
        assert_eq!(tf.degree(), 4);
        let t = tf.impulse_response(1);
        assert!((t.get(1) - 1.3331328522).abs() < 1e-12);
    }

    #[test]
    fn common_factor_rejected() {
        let err = TransferFunction::from_coefficients(&[1.0, 1.0], &[1.0, 2.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotCoprime { .. }));
    }

    #[test]
    fn improper_and_zero_denominator_rejected() {
        assert!(matches!(
            TransferFunction::from_coefficients(&[1.0, 1.0], &[1.0, 1.0]),
            Err(Error::NotStrictlyProper { .. })
        ));
        assert!(matches!(
            TransferFunction::from_coefficients(&[1.0], &[0.0, 0.0]),
            Err(Error::ZeroDenominator)
        ));
        assert!(matches!(
            TransferFunction::from_coefficients(&[1.0], &[]),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn denominator_made_monic() {
        let tf = TransferFunction::from_coefficients(&[2.0], &[-2.0, 2.0]).unwrap();
        assert_eq!(tf.den().coeffs(), &[-1.0, 1.0]);
        assert_eq!(tf.num().coeffs(), &[1.0]);
    }
}
