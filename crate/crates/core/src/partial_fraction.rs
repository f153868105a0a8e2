//! Partial-fraction form `R/(z - p) + sum_j sum_i c_j^(i) / (z - λ_j)^i`,
//! the working state of the realization loop.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{
    binomial, cluster_roots, poly_add_assign, poly_from_roots, poly_mul, series_div, taylor_shift,
};
use crate::transfer::{ImpulsePrefix, TransferFunction};

/// Relative tolerance for matching conjugate poles and coefficients.
pub const PAIRING_TOL: f64 = 1e-9;
/// Relative tolerance on pole moduli when testing dominance.
pub const DOMINANCE_TOL: f64 = 1e-9;

/// One non-dominant pole and its coefficients `c^(1), ..., c^(order)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl PoleTerm {
    pub fn simple(pole: Complex64, coeff: Complex64) -> Self {
        Self {
            pole,
            coeffs: vec![coeff],
        }
    }

    pub fn real(pole: f64, coeff: f64) -> Self {
        Self::simple(Complex64::new(pole, 0.0), Complex64::new(coeff, 0.0))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.pole.im == 0.0
    }

    /// `c^(1)`.
    pub fn residue(&self) -> Complex64 {
        self.coeffs[0]
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        let d = z - self.pole;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            power *= d;
            acc += c / power;
        }
        acc
    }

    /// Contribution of this term to `t_k`: `sum_i c^(i) binom(k-1, i-1) λ^(k-i)`.
    fn impulse(&self, k: usize) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| k > *i)
            .map(|(i, c)| c * binomial(k - 1, i) * self.pole.powu((k - 1 - i) as u32))
            .sum()
    }
}

/// Dominant term plus the stable pole terms.
///
/// `scale_gamma` and `pole_scale` record the dominant residue and pole that
/// [`PartialFraction::normalize`] divided out; both are 1 for a function that
/// has never been normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFraction {
    pub dominant_residue: f64,
    pub dominant_pole: f64,
    pub terms: Vec<PoleTerm>,
    pub scale_gamma: f64,
    pub pole_scale: f64,
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= PAIRING_TOL * scale.max(1e-300)
}

impl PartialFraction {
    /// Validates and canonicalizes the terms: conjugate pairs are matched and
    /// symmetrized, real poles get exactly real coefficients, and terms are
    /// sorted (real poles by decreasing value, then pairs upper member first).
    pub fn new(dominant_pole: f64, dominant_residue: f64, terms: Vec<PoleTerm>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidPartialFraction(msg));
        if !(dominant_pole.is_finite() && dominant_pole > 0.0) {
            return bad(format!("dominant pole {dominant_pole} must be positive"));
        }
        if !dominant_residue.is_finite() {
            return bad("dominant residue must be finite".into());
        }
        for t in &terms {
            if t.coeffs.is_empty() {
                return bad("pole term without coefficients".into());
            }
            if t.coeffs.last().unwrap().norm() == 0.0 {
                return bad(format!("top coefficient of pole {} is zero", t.pole));
            }
            if !(t.pole.re.is_finite() && t.pole.im.is_finite())
                || t.coeffs
                    .iter()
                    .any(|c| !(c.re.is_finite() && c.im.is_finite()))
            {
                return bad("non-finite pole term".into());
            }
            if t.pole.norm() >= dominant_pole * (1.0 - DOMINANCE_TOL) {
                return Err(Error::NotPrimitive(format!(
                    "pole {} is not dominated by {dominant_pole}",
                    t.pole
                )));
            }
        }

        let mut real = Vec::new();
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for mut t in terms {
            let scale = t.pole.norm().max(1.0);
            if t.pole.im.abs() <= PAIRING_TOL * scale {
                t.pole.im = 0.0;
                let cscale = t.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
                if t.coeffs
                    .iter()
                    .any(|c| c.im.abs() > PAIRING_TOL * cscale.max(1.0))
                {
                    return bad(format!("real pole {} has complex coefficients", t.pole.re));
                }
                t.coeffs.iter_mut().for_each(|c| c.im = 0.0);
                real.push(t);
            } else if t.pole.im > 0.0 {
                upper.push(t);
            } else {
                lower.push(t);
            }
        }
        if upper.len() != lower.len() {
            return bad("complex poles must come in conjugate pairs".into());
        }
        let mut pairs = Vec::new();
        for u in upper {
            let scale = u.pole.norm().max(1.0);
            let idx = lower
                .iter()
                .position(|l| close(l.pole, u.pole.conj(), scale) && l.order() == u.order());
            let Some(idx) = idx else {
                return bad(format!("pole {} has no conjugate partner", u.pole));
            };
            let l = lower.swap_remove(idx);
            let cscale = u.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if u.coeffs
                .iter()
                .zip(&l.coeffs)
                .any(|(a, b)| !close(*a, b.conj(), cscale.max(1.0)))
            {
                return bad(format!("coefficients of pole {} are not conjugate", u.pole));
            }
            let pole = Complex64::new(0.5 * (u.pole.re + l.pole.re), 0.5 * (u.pole.im - l.pole.im));
            let coeffs: Vec<Complex64> = u
                .coeffs
                .iter()
                .zip(&l.coeffs)
                .map(|(a, b)| 0.5 * (a + b.conj()))
                .collect();
            pairs.push(PoleTerm { pole, coeffs });
        }

        real.sort_by(|a, b| b.pole.re.total_cmp(&a.pole.re));
        pairs.sort_by(|a, b| {
            b.pole
                .re
                .total_cmp(&a.pole.re)
                .then(b.pole.im.total_cmp(&a.pole.im))
        });
        let all_poles: Vec<Complex64> = real
            .iter()
            .map(|t| t.pole)
            .chain(pairs.iter().map(|t| t.pole))
            .collect();
        for (i, a) in all_poles.iter().enumerate() {
            for b in &all_poles[i + 1..] {
                if close(*a, *b, a.norm().max(1.0)) {
                    return bad(format!("repeated pole {a}"));
                }
            }
        }

        let mut terms = real;
        for p in pairs {
            let conj = PoleTerm {
                pole: p.pole.conj(),
                coeffs: p.coeffs.iter().map(|c| c.conj()).collect(),
            };
            terms.push(p);
            terms.push(conj);
        }
        Ok(Self {
            dominant_residue,
            dominant_pole,
            terms,
            scale_gamma: 1.0,
            pole_scale: 1.0,
        })
    }

    /// `sum_j n_j`, i.e. `n - 1` for McMillan degree `n`.
    pub fn stable_degree(&self) -> usize {
        self.terms.iter().map(PoleTerm::order).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.dominant_pole == 1.0 && self.dominant_residue == 1.0
    }

    pub fn has_multiple_poles(&self) -> bool {
        self.terms.iter().any(|t| t.order() > 1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.dominant_residue / (z - self.dominant_pole)
            + self.terms.iter().map(|t| t.eval(z)).sum::<Complex64>()
    }

    /// `t_k` of the represented function, from the closed form.
    pub fn impulse_value(&self, k: usize) -> f64 {
        let dominant = self.dominant_residue * self.dominant_pole.powi(k as i32 - 1);
        dominant + self.terms.iter().map(|t| t.impulse(k).re).sum::<f64>()
    }

    pub fn impulse_response(&self, count: usize) -> ImpulsePrefix {
        ImpulsePrefix {
            values: (1..=count).map(|k| self.impulse_value(k)).collect(),
        }
    }

    /// Rescales `z -> λ0 z` and divides by `γ` so the dominant term becomes
    /// exactly `1/(z-1)`. Order-`i` coefficients are divided by `γ λ0^(i-1)`,
    /// so that `t_k = γ λ0^(k-1) t̃_k`.
    pub fn normalize(&self) -> Result<Self> {
        let gamma = self.dominant_residue;
        let lambda0 = self.dominant_pole;
        if gamma <= 0.0 {
            return Err(Error::NonpositiveDominantResidue(gamma));
        }
        if gamma == 1.0 && lambda0 == 1.0 {
            return Ok(self.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|t| PoleTerm {
                pole: t.pole / lambda0,
                coeffs: t
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c / (gamma * lambda0.powi(i as i32)))
                    .collect(),
            })
            .collect();
        Ok(Self {
            dominant_residue: 1.0,
            dominant_pole: 1.0,
            terms,
            scale_gamma: self.scale_gamma * gamma,
            pole_scale: self.pole_scale * lambda0,
        })
    }

    /// Inverse of [`normalize`](Self::normalize): restores the recorded scales.
    pub fn denormalize(&self) -> Self {
        let gamma = self.scale_gamma;
        let lambda0 = self.pole_scale;
        let terms = self
            .terms
            .iter()
            .map(|t| PoleTerm {
                pole: t.pole * lambda0,
                coeffs: t
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * (gamma * lambda0.powi(i as i32)))
                    .collect(),
            })
            .collect();
        Self {
            dominant_residue: self.dominant_residue * gamma,
            dominant_pole: self.dominant_pole * lambda0,
            terms,
            scale_gamma: 1.0,
            pole_scale: 1.0,
        }
    }

    /// One step of `H_m(z) = z H_{m-1}(z) - t_{m-1}`.
    ///
    /// Returns `t` (the constant removed) and the shifted expansion. Uses
    /// `z/(z-λ)^i = 1/(z-λ)^(i-1) + λ/(z-λ)^i`, so `c'^(i) = λ c^(i) + c^(i+1)`.
    /// A pole at the origin loses its top order each step and disappears.
    pub fn shift_once(&self) -> (f64, Self) {
        let mut t = Complex64::new(self.dominant_residue, 0.0);
        let mut terms = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            t += term.coeffs[0];
            let n = term.order();
            let mut coeffs: Vec<Complex64> = (0..n)
                .map(|i| {
                    let next = if i + 1 < n {
                        term.coeffs[i + 1]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    term.pole * term.coeffs[i] + next
                })
                .collect();
            while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
                coeffs.pop();
            }
            if !coeffs.is_empty() {
                terms.push(PoleTerm {
                    pole: term.pole,
                    coeffs,
                });
            }
        }
        let next = Self {
            dominant_residue: self.dominant_residue * self.dominant_pole,
            dominant_pole: self.dominant_pole,
            terms,
            scale_gamma: self.scale_gamma,
            pole_scale: self.pole_scale,
        };
        (t.re, next)
    }

    /// Recombines the terms over the common denominator. Distinct poles with
    /// nonzero top coefficients cannot cancel, so no common-factor test is run.
    pub fn to_transfer_function(&self) -> Result<TransferFunction> {
        let dominant = Complex64::new(self.dominant_pole, 0.0);
        let mut den_roots = vec![dominant];
        for t in &self.terms {
            den_roots.extend(std::iter::repeat_n(t.pole, t.order()));
        }
        let den = poly_from_roots(&den_roots);

        let others = |skip: usize| -> Vec<Complex64> {
            let mut roots = Vec::new();
            for (j, t) in self.terms.iter().enumerate() {
                if j != skip {
                    roots.extend(std::iter::repeat_n(t.pole, t.order()));
                }
            }
            roots
        };
        let mut num = vec![Complex64::new(0.0, 0.0)];
        // dominant: R * prod over all stable poles
        let base = poly_from_roots(&others(usize::MAX));
        poly_add_assign(
            &mut num,
            &poly_mul(&base, &[Complex64::new(self.dominant_residue, 0.0)]),
        );
        for (j, t) in self.terms.iter().enumerate() {
            let mut rest = others(j);
            rest.push(dominant);
            let rest = poly_from_roots(&rest);
            for (i, c) in t.coeffs.iter().enumerate() {
                // c^(i+1) (z - λ)^(n - i - 1) * rest
                let lift = poly_from_roots(&vec![t.pole; t.order() - i - 1]);
                let piece = poly_mul(&poly_mul(&lift, &rest), &[*c]);
                poly_add_assign(&mut num, &piece);
            }
        }
        let num: Vec<f64> = num.iter().map(|c| c.re).collect();
        let den: Vec<f64> = den.iter().map(|c| c.re).collect();
        TransferFunction::from_coefficients_trusted(&num, &den)
    }
}

/// Partial-fraction expansion of `tf`.
///
/// Poles come from the companion matrix; coefficients from the Taylor
/// expansion of `(z - λ_j)^(n_j) H(z)` about each pole. The result is not
/// normalized.
pub fn expand(tf: &TransferFunction) -> Result<PartialFraction> {
    let pf = expand_unchecked(tf)?;
    if pf.dominant_residue <= 0.0 {
        return Err(Error::NonpositiveDominantResidue(pf.dominant_residue));
    }
    Ok(pf)
}

fn expand_unchecked(tf: &TransferFunction) -> Result<PartialFraction> {
    let roots = tf.den().roots();
    let mut clusters = cluster_roots(tf.den(), &roots);
    for (pole, _) in clusters.iter_mut() {
        if pole.im.abs() <= PAIRING_TOL * pole.norm().max(1.0) {
            pole.im = 0.0;
        }
    }
    // exact conjugate pairing
    let n = clusters.len();
    for i in 0..n {
        if clusters[i].0.im > 0.0 {
            let target = clusters[i].0.conj();
            let partner = (0..n)
                .filter(|&j| clusters[j].0.im < 0.0 && clusters[j].1 == clusters[i].1)
                .min_by(|&a, &b| {
                    (clusters[a].0 - target)
                        .norm()
                        .total_cmp(&(clusters[b].0 - target).norm())
                });
            if let Some(j) = partner {
                let avg = Complex64::new(
                    0.5 * (clusters[i].0.re + clusters[j].0.re),
                    0.5 * (clusters[i].0.im - clusters[j].0.im),
                );
                clusters[i].0 = avg;
                clusters[j].0 = avg.conj();
            }
        }
    }

    let max_modulus = clusters.iter().map(|(p, _)| p.norm()).fold(0.0, f64::max);
    let top: Vec<usize> = (0..n)
        .filter(|&j| clusters[j].0.norm() >= max_modulus * (1.0 - DOMINANCE_TOL))
        .collect();
    if top.len() != 1 {
        return Err(Error::NotPrimitive(format!(
            "{} poles share the maximal modulus {max_modulus}",
            top.len()
        )));
    }
    let dominant_idx = top[0];
    let (dominant, order) = clusters[dominant_idx];
    if dominant.im != 0.0 || dominant.re <= 0.0 {
        return Err(Error::NotPrimitive(format!(
            "dominant pole {dominant} is not real positive"
        )));
    }
    if order != 1 {
        return Err(Error::NotPrimitive(format!(
            "dominant pole {} has order {order}",
            dominant.re
        )));
    }

    let num: Vec<Complex64> = tf
        .num()
        .coeffs()
        .iter()
        .map(|&c| Complex64::new(c, 0.0))
        .collect();
    let mut coeff_sets = Vec::with_capacity(n);
    for (j, &(pole, order)) in clusters.iter().enumerate() {
        let mut reduced = vec![Complex64::new(1.0, 0.0)];
        for (k, &(other, other_order)) in clusters.iter().enumerate() {
            if k != j {
                for _ in 0..other_order {
                    reduced = poly_mul(&reduced, &[pole - other, Complex64::new(1.0, 0.0)]);
                }
            }
        }
        let shifted = taylor_shift(&num, pole);
        let series = series_div(&shifted, &reduced, order);
        // c^(i) is the coefficient of s^(order - i)
        let coeffs: Vec<Complex64> = (1..=order).map(|i| series[order - i]).collect();
        coeff_sets.push(coeffs);
    }

    let gamma = coeff_sets[dominant_idx][0].re;
    let terms: Vec<PoleTerm> = clusters
        .iter()
        .zip(coeff_sets)
        .enumerate()
        .filter(|(j, _)| *j != dominant_idx)
        .map(|(_, (&(pole, _), coeffs))| {
            let coeffs = if pole.im == 0.0 {
                coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect()
            } else {
                coeffs
            };
            PoleTerm { pole, coeffs }
        })
        .collect();
    let pf = PartialFraction::new(dominant.re, gamma, terms)?;
    check_reconstruction(tf, &pf)?;
    Ok(pf)
}

/// Relative residual of the expansion against `tf` on 32 points of a circle
/// of radius `2 max(1, |poles|)`.
pub fn reconstruction_residual(tf: &TransferFunction, pf: &PartialFraction) -> f64 {
    let radius = 2.0 * pf.dominant_pole.max(1.0);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..32 {
        let z = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 32.0);
        let h = tf.eval(z);
        worst = worst.max((h - pf.eval(z)).norm());
        scale = scale.max(h.norm());
    }
    worst / scale.max(1e-300)
}

fn check_reconstruction(tf: &TransferFunction, pf: &PartialFraction) -> Result<()> {
    let residual = reconstruction_residual(tf, pf);
    if residual < 1e-8 {
        Ok(())
    } else {
        Err(Error::ExpansionInaccurate(residual))
    }
}

/// Number of shifts after which the simple-pole residues certainly satisfy
/// the summed budget: `ceil(|log(2^(5/2) n max|c|) / log max|λ||)`, taken
/// over the poles that are not nonnegative reals with nonnegative residue.
pub fn iteration_estimate(pf: &PartialFraction) -> usize {
    let relevant: Vec<&PoleTerm> = pf
        .terms
        .iter()
        .filter(|t| !(t.is_real() && t.pole.re >= 0.0 && t.coeffs.iter().all(|c| c.re >= 0.0)))
        .collect();
    if relevant.is_empty() {
        return 1;
    }
    let count = relevant.len() as f64;
    let max_c = relevant
        .iter()
        .flat_map(|t| t.coeffs.iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    let max_lambda = relevant.iter().map(|t| t.pole.norm()).fold(0.0, f64::max);
    let numerator = (2f64.powf(2.5) * count * max_c).ln();
    if numerator <= 0.0 || max_lambda == 0.0 {
        return 1;
    }
    let estimate = (numerator / max_lambda.ln()).abs().ceil();
    (estimate as usize).max(1)
}

/// Scans for the first strictly negative impulse value below `-tol (1 + |t_1|)`.
pub(crate) fn first_negative(values: &[f64], tol: f64) -> Option<usize> {
    let threshold = tol * (1.0 + values.first().map_or(0.0, |t| t.abs()));
    values.iter().position(|&t| t < -threshold).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::TransferFunction;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn chebyshev() -> TransferFunction {
        let p = [0.1253986950, 0.1984152016, 0.3331328522];
        let q = [-0.38920832, 0.80189061, -0.69055619, 1.0];
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

    fn hn(n: i32) -> PartialFraction {
        PartialFraction::new(
            1.0,
            1.0,
            vec![
                PoleTerm::real(0.4, -4.0 * 2.5f64.powi(n - 2)),
                PoleTerm::real(0.2, 3.0 * 5f64.powi(n - 2)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn expand_identity() {
        let tf = TransferFunction::from_coefficients(&[1.0], &[-1.0, 1.0]).unwrap();
        let pf = expand(&tf).unwrap();
        assert_eq!(pf.dominant_residue, 1.0);
        assert!(pf.terms.is_empty());
    }

    #[test]
    fn expand_chebyshev_matches_listing() {
        let pf = expand(&chebyshev()).unwrap();
        assert!((pf.dominant_pole - 1.0).abs() < 1e-9);
        assert!((pf.dominant_residue - 1.0).abs() < 1e-9);
        assert_eq!(pf.terms.len(), 3);
        let real = &pf.terms[0];
        assert!((real.pole.re - 0.5400962165).abs() < 1e-9);
        assert!((real.residue().re - 0.3541501460).abs() < 1e-9);
        // λ1 = 0.0752... - 0.8455...i pairs with c1 = -0.0105... + 0.1411...i
        let lower = pf.terms.iter().find(|t| t.pole.im < 0.0).unwrap();
        assert!((lower.pole - c(0.07522998673, -0.8455579204)).norm() < 1e-9);
        assert!((lower.residue() - c(-0.01050864690, 0.1411896961)).norm() < 1e-9);
        let upper = pf.terms.iter().find(|t| t.pole.im > 0.0).unwrap();
        assert_eq!(upper.pole, lower.pole.conj());
        assert_eq!(upper.residue(), lower.residue().conj());
    }

    #[test]
    fn expand_hn4() {
        let tf = hn(4).to_transfer_function().unwrap();
        let pf = expand(&tf).unwrap();
        assert!((pf.dominant_residue - 1.0).abs() < 1e-12);
        assert!((pf.terms[0].pole.re - 0.4).abs() < 1e-12);
        assert!((pf.terms[0].residue().re + 25.0).abs() < 1e-9);
        assert!((pf.terms[1].pole.re - 0.2).abs() < 1e-12);
        assert!((pf.terms[1].residue().re - 75.0).abs() < 1e-9);
    }

    #[test]
    fn expand_multiple_pole() {
        // 1/(z-1) + 0.3/(z-0.5) - 0.2/(z-0.5)^2
        let pf = PartialFraction::new(
            1.0,
            1.0,
            vec![PoleTerm {
                pole: c(0.5, 0.0),
                coeffs: vec![c(0.3, 0.0), c(-0.2, 0.0)],
            }],
        )
        .unwrap();
        let back = expand(&pf.to_transfer_function().unwrap()).unwrap();
        assert_eq!(back.terms.len(), 1);
        assert_eq!(back.terms[0].order(), 2);
        assert!((back.terms[0].coeffs[0].re - 0.3).abs() < 1e-7);
        assert!((back.terms[0].coeffs[1].re + 0.2).abs() < 1e-7);
    }

    #[test]
    fn non_primitive_inputs_rejected() {
        // poles at 1 and -1
        let tf = TransferFunction::from_coefficients(&[0.0, 1.0], &[-1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(expand(&tf), Err(Error::NotPrimitive(_))));
        // dominant pole negative
        let tf = TransferFunction::from_coefficients(&[1.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(expand(&tf), Err(Error::NotPrimitive(_))));
        // double dominant pole
        let tf = TransferFunction::from_coefficients(&[1.0], &[1.0, -2.0, 1.0]).unwrap();
        assert!(matches!(expand(&tf), Err(Error::NotPrimitive(_))));
        // complex dominant pair
        let tf = TransferFunction::from_coefficients(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(expand(&tf), Err(Error::NotPrimitive(_))));
    }

    #[test]
    fn negative_dominant_residue_rejected() {
        let tf = TransferFunction::from_coefficients(&[-1.0], &[-1.0, 1.0]).unwrap();
        assert!(matches!(
            expand(&tf),
            Err(Error::NonpositiveDominantResidue(_))
        ));
    }

    #[test]
    fn normalize_identity_is_unchanged() {
        let pf = hn(0);
        let n = pf.normalize().unwrap();
        assert_eq!(n, pf);
        assert_eq!(n.scale_gamma, 1.0);
    }

    #[test]
    fn normalize_scales_by_series_comparison() {
        // 3/(z-2) + 0.8/(z-1): t_k = 3·2^(k-1) + 0.8
        let pf = PartialFraction::new(2.0, 3.0, vec![PoleTerm::real(1.0, 0.8)]).unwrap();
        let n = pf.normalize().unwrap();
        assert_eq!((n.scale_gamma, n.pole_scale), (3.0, 2.0));
        assert_eq!(n.terms[0].pole.re, 0.5);
        // oracle: t̃_k = t_k / (3·2^(k-1)) = 1 + (0.8/3) 0.5^(k-1)
        for k in 1..=12 {
            let t = 3.0 * 2f64.powi(k - 1) + 0.8;
            let expected = t / (3.0 * 2f64.powi(k - 1));
            assert!((n.impulse_value(k as usize) - expected).abs() < 1e-14);
        }
        assert!((n.terms[0].residue().re - 0.8 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_chebyshev_is_unchanged_up_to_roundoff() {
        let pf = expand(&chebyshev()).unwrap();
        let n = pf.normalize().unwrap();
        assert!((n.scale_gamma - 1.0).abs() < 1e-9 && (n.pole_scale - 1.0).abs() < 1e-9);
        assert!((n.terms[0].residue().re - 0.3541501460).abs() < 1e-9);
    }

    #[test]
    fn impulse_hn4() {
        let tf = hn(4).to_transfer_function().unwrap();
        let t = tf.impulse_response(5).values;
        let expected = [51.0, 6.0, 0.0, 0.0, 0.48];
        for (a, b) in t.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn impulse_chebyshev_first_value() {
        let pf = expand(&chebyshev()).unwrap();
        let lower = pf.terms.iter().find(|t| t.pole.im < 0.0).unwrap();
        let t1 = 1.0 + 2.0 * lower.residue().re + pf.terms[0].residue().re;
        assert!((t1 - 1.3331328522).abs() < 1e-9);
        assert!((chebyshev().impulse_response(1).get(1) - 1.3331328522).abs() < 1e-12);
    }

    #[test]
    fn shift_single_term() {
        let pf = PartialFraction::new(1.0, 1.0, vec![PoleTerm::real(0.5, 0.5)]).unwrap();
        let (t, next) = pf.shift_once();
        assert_eq!(t, 1.5);
        assert_eq!(next.terms[0].residue().re, 0.25);
        assert_eq!(next.dominant_residue, 1.0);
    }

    #[test]
    fn shift_hn_gives_previous_member() {
        for n in 1..8 {
            let (_, shifted) = hn(n).shift_once();
            let target = hn(n - 1);
            for (a, b) in shifted.terms.iter().zip(&target.terms) {
                assert!((a.residue() - b.residue()).norm() <= 1e-12 * b.residue().norm());
            }
        }
    }

    #[test]
    fn shift_pure_dominant() {
        let pf = PartialFraction::new(1.0, 1.0, vec![]).unwrap();
        let (t, next) = pf.shift_once();
        assert_eq!(t, 1.0);
        assert_eq!(next, pf);
    }

    #[test]
    fn shift_multiple_pole_matches_impulse() {
        let pf = PartialFraction::new(
            1.0,
            1.0,
            vec![PoleTerm {
                pole: c(-0.6, 0.0),
                coeffs: vec![c(0.3, 0.0), c(-0.2, 0.0), c(0.05, 0.0)],
            }],
        )
        .unwrap();
        let tf = pf.to_transfer_function().unwrap();
        let expected = tf.impulse_response(10).values;
        let mut cur = pf;
        for t_expected in expected {
            let (t, next) = cur.shift_once();
            assert!((t - t_expected).abs() < 1e-12 * (1.0 + t_expected.abs()));
            cur = next;
        }
    }

    #[test]
    fn pole_at_origin_vanishes_after_shift() {
        let pf = PartialFraction::new(1.0, 1.0, vec![PoleTerm::real(0.0, -0.5)]).unwrap();
        let (t, next) = pf.shift_once();
        assert_eq!(t, 0.5);
        assert!(next.terms.is_empty());
    }

    #[test]
    fn iteration_estimates() {
        let positive = PartialFraction::new(1.0, 1.0, vec![PoleTerm::real(0.3, 0.2)]).unwrap();
        assert_eq!(iteration_estimate(&positive), 1);
        // c = -0.5 at 0.5: the positive-residue exemption does not apply
        let single = PartialFraction::new(1.0, 1.0, vec![PoleTerm::real(0.5, -0.5)]).unwrap();
        assert_eq!(iteration_estimate(&single), 2);
        let cheb = expand(&chebyshev()).unwrap();
        let e = iteration_estimate(&cheb);
        assert!((1..10).contains(&e), "{e}");
    }

    #[test]
    fn conjugate_pairing_enforced() {
        let lone = PartialFraction::new(1.0, 1.0, vec![PoleTerm::simple(c(0.1, 0.5), c(0.1, 0.1))]);
        assert!(lone.is_err());
        let mismatched = PartialFraction::new(
            1.0,
            1.0,
            vec![
                PoleTerm::simple(c(0.1, 0.5), c(0.1, 0.1)),
                PoleTerm::simple(c(0.1, -0.5), c(0.1, 0.1)),
            ],
        );
        assert!(mismatched.is_err());
    }

    #[test]
    fn first_negative_threshold() {
        assert_eq!(first_negative(&[1.0, -1e-12, 0.5], 1e-10), None);
        assert_eq!(first_negative(&[1.0, 0.2, -0.1], 1e-10), Some(3));
    }
}
