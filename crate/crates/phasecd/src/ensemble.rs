//! The problem instance: M sampling vectors and M real intensities.

use crate::embedding::unembed;
use crate::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Phase-retrieval instance: rows `a_m` in C^N and intensities
/// `b_m ~ |a_m^H x|^2`. Immutable after construction, so it can be shared
/// across concurrent trials.
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    rows: Vec<Complex>, // M x N, row-major
    intensities: Vec<f64>,
    n: usize,
}

impl MeasurementEnsemble {
    pub fn new(rows: Vec<Complex>, intensities: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 || intensities.is_empty() {
            return Err(Error::InvalidConfig(
                "ensemble needs N >= 1 and M >= 1".into(),
            ));
        }
        if rows.len() != intensities.len() * n {
            return Err(Error::DimensionMismatch {
                expected: intensities.len() * n,
                got: rows.len(),
            });
        }
        if rows.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
            || intensities.iter().any(|b| !b.is_finite())
        {
            return Err(Error::InvalidConfig("non-finite ensemble entry".into()));
        }
        Ok(Self {
            rows,
            intensities,
            n,
        })
    }

    pub fn from_rows(vectors: &[Vec<Complex>], intensities: Vec<f64>) -> Result<Self> {
        let n = vectors.first().map(|r| r.len()).unwrap_or(0);
        let mut rows = Vec::with_capacity(vectors.len() * n);
        for v in vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            rows.extend_from_slice(v);
        }
        Self::new(rows, intensities, n)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.intensities.len()
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[Complex] {
        &self.rows[m * self.n..(m + 1) * self.n]
    }

    #[inline]
    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    /// z_m = a_m^H x for all m. O(MN).
    pub fn products(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.m())
            .map(|m| {
                self.row(m)
                    .iter()
                    .zip(x)
                    .map(|(a, xi)| a.conj() * xi)
                    .sum()
            })
            .collect())
    }

    /// Sum of |a_m|^2 over all rows; used by the spectral-init rescaling.
    pub fn rows_sq_norm(&self) -> f64 {
        self.rows.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// f(x) = sum_m (|a_m^H x|^2 - b_m)^2 evaluated at a real-embedded point.
pub fn objective(ensemble: &MeasurementEnsemble, xbar: &[f64]) -> Result<f64> {
    let x = unembed(xbar)?;
    if x.len() != ensemble.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * ensemble.n(),
            got: xbar.len(),
        });
    }
    let z = ensemble.products(&x)?;
    Ok(objective_from_products(&z, ensemble.intensities()))
}

pub(crate) fn objective_from_products(z: &[Complex], b: &[f64]) -> f64 {
    z.iter()
        .zip(b)
        .map(|(zm, bm)| {
            let e = zm.norm_sqr() - bm;
            e * e
        })
        .sum()
}

/// Euclidean gradient of f over R^{2N}: 2[Re(grad_W f); Im(grad_W f)] with
/// the Wirtinger gradient grad_W f = 2 sum_m (|z_m|^2 - b_m) z_m a_m.
pub fn gradient(ensemble: &MeasurementEnsemble, xbar: &[f64]) -> Result<Vec<f64>> {
    let x = unembed(xbar)?;
    if x.len() != ensemble.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * ensemble.n(),
            got: xbar.len(),
        });
    }
    let z = ensemble.products(&x)?;
    Ok(gradient_from_products(ensemble, &z))
}

pub(crate) fn gradient_from_products(ensemble: &MeasurementEnsemble, z: &[Complex]) -> Vec<f64> {
    let n = ensemble.n();
    let b = ensemble.intensities();
    let mut g = vec![0.0; 2 * n];
    for m in 0..ensemble.m() {
        let e = z[m].norm_sqr() - b[m];
        let w = 4.0 * e * z[m];
        for (j, a) in ensemble.row(m).iter().enumerate() {
            // d/dRe(x_j) and d/dIm(x_j) of f
            let p = w * a;
            g[j] += p.re;
            g[n + j] += p.im;
        }
    }
    g
}
