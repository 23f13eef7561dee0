//! Tensor algebra for `n x n x 2` tensors under the t-product.
//!
//! With a tube length of two the discrete Fourier transform along the third
//! mode is real: the transformed slices are the sum and the difference of the
//! two frontal slices. Every t-SVD quantity used by the solver reduces to
//! ordinary matrix SVDs of those two transformed slices.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};

/// Thresholded singular values below this are snapped to zero.
const RANK_FLOOR: f64 = 1e-12;
const SVD_MAX_SWEEPS: usize = 10_000;

/// An `n x n x 2` tensor stored as its two frontal slices.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    pub slice1: DMatrix<f64>,
    pub slice2: DMatrix<f64>,
}

/// The two slices of a [`Tensor2`] after the length-2 DFT along the tube mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPair {
    pub f1: DMatrix<f64>,
    pub f2: DMatrix<f64>,
}

impl Tensor2 {
    pub fn new(slice1: DMatrix<f64>, slice2: DMatrix<f64>) -> Result<Self> {
        check_same_shape("Tensor2", &slice1, &slice2)?;
        Ok(Tensor2 { slice1, slice2 })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor2 {
            slice1: DMatrix::zeros(rows, cols),
            slice2: DMatrix::zeros(rows, cols),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.slice1.shape()
    }

    /// Squared Frobenius norm summed over both slices.
    pub fn norm_squared(&self) -> f64 {
        self.slice1.norm_squared() + self.slice2.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.slice1
            .iter()
            .chain(self.slice2.iter())
            .all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &Tensor2) -> Result<Tensor2> {
        check_same_shape("Tensor2::sub", &self.slice1, &other.slice1)?;
        Ok(Tensor2 {
            slice1: &self.slice1 - &other.slice1,
            slice2: &self.slice2 - &other.slice2,
        })
    }
}

fn check_same_shape(context: &'static str, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape {
            context,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

pub fn dft2_forward(t: &Tensor2) -> Result<TransformedPair> {
    check_same_shape("dft2_forward", &t.slice1, &t.slice2)?;
    Ok(TransformedPair {
        f1: &t.slice1 + &t.slice2,
        f2: &t.slice1 - &t.slice2,
    })
}

pub fn dft2_inverse(p: &TransformedPair) -> Result<Tensor2> {
    check_same_shape("dft2_inverse", &p.f1, &p.f2)?;
    Ok(Tensor2 {
        slice1: (&p.f1 + &p.f2) * 0.5,
        slice2: (&p.f1 - &p.f2) * 0.5,
    })
}

fn svd_full(m: DMatrix<f64>) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let report = Error::numerical("svd", &m);
    SVD::try_new(m, true, true, f64::EPSILON, SVD_MAX_SWEEPS).ok_or(report)
}

pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_SWEEPS)
        .ok_or_else(|| Error::numerical("svd", m))?;
    Ok(svd.singular_values.iter().copied().collect())
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Singular value thresholding, the proximal operator of `tau * ||.||_*`.
pub fn svt(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    svt_with_norm(m, tau).map(|(x, _)| x)
}

/// [`svt`] that also returns the nuclear norm of its output, which falls out of
/// the thresholded singular values for free.
pub(crate) fn svt_with_norm(m: &DMatrix<f64>, tau: f64) -> Result<(DMatrix<f64>, f64)> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be >= 0, got {tau}"
        )));
    }
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok((m.clone(), 0.0));
    }
    let svd = svd_full(m.clone())?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::numerical("svd", m)),
    };

    let mut scaled_u = u;
    let mut norm = 0.0;
    for (idx, &sigma) in svd.singular_values.iter().enumerate() {
        let shrunk = sigma - tau;
        if shrunk <= RANK_FLOOR {
            scaled_u.column_mut(idx).fill(0.0);
        } else {
            norm += shrunk;
            scaled_u.column_mut(idx).scale_mut(shrunk);
        }
    }
    Ok((scaled_u * v_t, norm))
}

/// Tensor nuclear norm: the mean of the nuclear norms of the transformed slices.
pub fn tnn(t: &Tensor2) -> Result<f64> {
    let p = dft2_forward(t)?;
    Ok(0.5 * (nuclear_norm(&p.f1)? + nuclear_norm(&p.f2)?))
}

/// Tensor singular value thresholding, the proximal operator of `tau * tnn`.
pub fn tsvt(t: &Tensor2, tau: f64) -> Result<Tensor2> {
    tsvt_with_norm(t, tau).map(|(x, _)| x)
}

pub(crate) fn tsvt_with_norm(t: &Tensor2, tau: f64) -> Result<(Tensor2, f64)> {
    let p = dft2_forward(t)?;
    let (g1, n1) = svt_with_norm(&p.f1, tau)?;
    let (g2, n2) = svt_with_norm(&p.f2, tau)?;
    let out = dft2_inverse(&TransformedPair { f1: g1, f2: g2 })?;
    Ok((out, 0.5 * (n1 + n2)))
}
