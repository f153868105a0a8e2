use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Entries in `[-CLAMP_WINDOW, 0)` are treated as arithmetic noise and set to zero.
pub const CLAMP_WINDOW: f64 = 1e-12;

/// Nonnegative triple `(A, b, c)` with `H(z) = c^T (zI - A)^{-1} b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
}

fn clamp(values: &mut [f64], what: &'static str) -> Result<()> {
    for (index, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if *v < 0.0 {
            if *v >= -CLAMP_WINDOW {
                *v = 0.0;
            } else {
                return Err(Error::NegativeEntry {
                    what,
                    index,
                    value: *v,
                });
            }
        }
    }
    Ok(())
}

impl Realization {
    pub fn new(mut a: DMatrix<f64>, mut b: DVector<f64>, mut c: DVector<f64>) -> Result<Self> {
        let m = b.len();
        if a.nrows() != m || a.ncols() != m || c.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, b has {}, c has {}",
                a.nrows(),
                a.ncols(),
                m,
                c.len()
            )));
        }
        clamp(a.as_mut_slice(), "A")?;
        clamp(b.as_mut_slice(), "b")?;
        clamp(c.as_mut_slice(), "c")?;
        Ok(Self { a, b, c })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("A is not square".into()));
        }
        let a = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        Self::new(
            a,
            DVector::from_column_slice(b),
            DVector::from_column_slice(c),
        )
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    /// `c^T A^{k-1} b` for `k = 1..=count`.
    pub fn markov_parameters(&self, count: usize) -> Vec<f64> {
        let mut x = self.b.clone();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.c.dot(&x));
            x = &self.a * x;
        }
        out
    }

    /// Block-diagonal sum; the result realizes the sum of the transfer functions.
    pub fn direct_sum(parts: &[&Realization]) -> Result<Self> {
        let m: usize = parts.iter().map(|p| p.dim()).sum();
        let mut a = DMatrix::zeros(m, m);
        let mut b = DVector::zeros(m);
        let mut c = DVector::zeros(m);
        let mut offset = 0;
        for p in parts {
            let d = p.dim();
            a.view_mut((offset, offset), (d, d)).copy_from(&p.a);
            b.rows_mut(offset, d).copy_from(&p.b);
            c.rows_mut(offset, d).copy_from(&p.c);
            offset += d;
        }
        Self::new(a, b, c)
    }

    /// `(λ0 A, b, γ c)`: multiplies the k-th Markov parameter by `γ λ0^(k-1)`.
    pub fn rescaled(&self, pole_scale: f64, gain: f64) -> Result<Self> {
        Self::new(&self.a * pole_scale, self.b.clone(), &self.c * gain)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a
            .iter()
            .chain(self.b.iter())
            .chain(self.c.iter())
            .all(|&v| v >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_noise_and_rejects_negatives() {
        let r = Realization::from_rows(&[vec![-1e-13]], &[1.0], &[1.0]).unwrap();
        assert_eq!(r.a()[(0, 0)], 0.0);
        let err = Realization::from_rows(&[vec![0.5]], &[-0.1], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::NegativeEntry { what: "b", .. }));
    }

    #[test]
    fn rejects_inconsistent_dimensions() {
        assert!(Realization::from_rows(&[vec![1.0, 0.0]], &[1.0], &[1.0]).is_err());
        assert!(Realization::from_rows(&[vec![1.0]], &[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn direct_sum_adds_markov_parameters() {
        let x = Realization::from_rows(&[vec![0.5]], &[1.0], &[2.0]).unwrap();
        let y = Realization::from_rows(&[vec![1.0]], &[1.0], &[1.0]).unwrap();
        let s = Realization::direct_sum(&[&x, &y]).unwrap();
        assert_eq!(s.markov_parameters(3), vec![3.0, 2.0, 1.5]);
    }
}
