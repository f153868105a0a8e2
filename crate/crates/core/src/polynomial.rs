//! Real polynomials in ascending-power storage, plus the complex helpers
//! used by partial-fraction expansion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real polynomial `coeffs[0] + coeffs[1] z + ... + coeffs[d] z^d`.
///
/// The leading coefficient is nonzero unless the polynomial is the zero
/// polynomial, which is stored as `[0.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, trimming trailing (leading-power) zeros.
    pub fn new(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::ZeroDenominator);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut coeffs = coeffs.to_vec();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Coefficient of `z^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self { coeffs: vec![0.0] };
        }
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Sum of `|coeff_k| |z|^k`, the natural scale for judging `|p(z)|` small.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * r + c.abs())
    }

    /// Roots from the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut companion = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }
}

/// Groups numerically coincident roots (single linkage, relative distance
/// `2e-5`) and returns each cluster's mean with its multiplicity.
///
/// Simple roots are polished with a few Newton steps on `poly`.
pub(crate) fn cluster_roots(poly: &Polynomial, roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let tol = 2e-5 * roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() < tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &z) in roots.iter().enumerate().take(n) {
        let root = find(&mut label, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(z),
            None => groups.push((root, vec![z])),
        }
    }
    let derivative: Vec<f64> = poly
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect();
    groups
        .into_iter()
        .map(|(_, members)| {
            let count = members.len();
            let mut center = members.iter().sum::<Complex64>() / count as f64;
            if count == 1 {
                for _ in 0..3 {
                    let f = poly.eval_complex(center);
                    let df = derivative
                        .iter()
                        .rev()
                        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * center + c);
                    if df.norm() == 0.0 {
                        break;
                    }
                    let next = center - f / df;
                    if poly.eval_complex(next).norm() < f.norm() {
                        center = next;
                    } else {
                        break;
                    }
                }
            }
            (center, count)
        })
        .collect()
}

/// Ascending coefficients of `prod_k (z - roots[k])`.
pub(crate) fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        out = poly_mul(&out, &[-r, Complex64::new(1.0, 0.0)]);
    }
    out
}

pub(crate) fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn poly_add_assign(acc: &mut Vec<Complex64>, p: &[Complex64]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Complex64::new(0.0, 0.0));
    }
    for (a, &x) in acc.iter_mut().zip(p) {
        *a += x;
    }
}

/// Taylor coefficients of `p` about `center`: `q` with `p(center + s) = sum q_k s^k`.
pub(crate) fn taylor_shift(p: &[Complex64], center: Complex64) -> Vec<Complex64> {
    let mut work = p.to_vec();
    let n = work.len();
    // repeated synthetic division by (z - center)
    for k in 0..n {
        for i in (k..n - 1).rev() {
            let carry = work[i + 1] * center;
            work[i] += carry;
        }
    }
    work
}

/// First `terms` coefficients of the power series `num / den` (both in `s`).
pub(crate) fn series_div(num: &[Complex64], den: &[Complex64], terms: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; terms];
    for k in 0..terms {
        let mut acc = num.get(k).copied().unwrap_or(zero);
        for i in 1..=k.min(den.len() - 1) {
            acc -= den[i] * out[k - i];
        }
        out[k] = acc / den[0];
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn trims_leading_zeros() {
        let p = Polynomial::new(&[1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(&[0.0, 0.0]).unwrap().is_zero());
        assert!(Polynomial::new(&[]).is_err());
        assert!(Polynomial::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn companion_roots_of_quadratic() {
        // (z - 2)(z + 0.5) = z^2 - 1.5 z - 1
        let p = Polynomial::new(&[-1.0, -1.5, 1.0]).unwrap();
        let mut roots: Vec<f64> = p.roots().iter().map(|r| r.re).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((roots[0] + 0.5).abs() < 1e-14);
        assert!((roots[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        // p(z) = z^3 ; about 2: 8 + 12 s + 6 s^2 + s^3
        let p = vec![c(0.0), c(0.0), c(0.0), c(1.0)];
        let q = taylor_shift(&p, c(2.0));
        let expected = [8.0, 12.0, 6.0, 1.0];
        for (a, b) in q.iter().zip(expected) {
            assert!((a.re - b).abs() < 1e-14 && a.im.abs() < 1e-14);
        }
    }

    #[test]
    fn series_division_geometric() {
        // 1 / (1 - s) = 1 + s + s^2 + ...
        let q = series_div(&[c(1.0)], &[c(1.0), c(-1.0)], 5);
        assert!(q.iter().all(|x| (x.re - 1.0).abs() < 1e-15));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
    }
}
