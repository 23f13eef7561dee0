//! Affinity post-processing: column normalization, repair by the augmented
//! constraint matrix, and symmetrization.

use nalgebra::DMatrix;

/// Absolute values, then each column divided by its maximum. Zero columns stay zero.
pub fn normalize_affinity(z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = z.abs();
    for mut col in out.column_iter_mut() {
        let m = col.max();
        if m > 0.0 {
            col /= m;
        }
    }
    out
}

/// Pushes affinities toward 1 where `b >= 0` and toward 0 where `b < 0`:
///
/// ```text
/// z' = 1 - (1 - b)(1 - z)   if b >= 0
/// z' = (1 + b) z            otherwise
/// ```
///
/// `b` is clamped to `[-1, 1]` first since the solver only pins the
/// constrained entries.
pub fn repair(z: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(
        z.shape(),
        b.shape(),
        "repair: affinity and constraint shapes differ"
    );
    z.zip_map(b, |zv, bv| {
        let bv = bv.clamp(-1.0, 1.0);
        if bv >= 0.0 {
            // 1 - (1 - b)(1 - z) rearranged so that b = 0 returns z bit-for-bit
            (zv + bv * (1.0 - zv)).min(1.0)
        } else {
            (1.0 + bv) * zv
        }
    })
}

/// `(|z| + |z|^T) / 2`
pub fn symmetrize(z: &DMatrix<f64>) -> DMatrix<f64> {
    let a = z.abs();
    let n = a.nrows();
    DMatrix::from_fn(n, a.ncols(), |i, j| {
        // same operand order for (i, j) and (j, i) keeps the result exactly symmetric
        let (lo, hi) = if i <= j {
            (a[(i, j)], a[(j, i)])
        } else {
            (a[(j, i)], a[(i, j)])
        };
        (lo + hi) / 2.0
    })
}
