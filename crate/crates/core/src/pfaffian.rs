//! Pfaffians of real antisymmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest |M + Mᵀ| entry accepted as antisymmetric.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-12;

/// Pf(M) by Parlett–Reid tridiagonalization with partial pivoting.
///
/// Each step pivots the largest remaining entry of column k into position
/// (k+1, k) and eliminates the rest of that column with a congruence
/// transformation, which leaves the Pfaffian unchanged up to the tracked sign.
pub fn pfaffian(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidConfig(format!(
            "matrix is {}x{}",
            n,
            m.ncols()
        )));
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let asym = (m + m.transpose()).amax();
    if asym > ASYMMETRY_TOLERANCE {
        return Err(Error::NotAntisymmetric(asym));
    }
    Ok(pfaffian_unchecked(m.clone()))
}

/// Same as [`pfaffian`] without validation; consumes the matrix as workspace.
pub fn pfaffian_unchecked(mut a: DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut pf = 1.0;
    for k in (0..n - 1).step_by(2) {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].abs();
        for i in k + 2..n {
            let v = a[(i, k)].abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            let w = n - k - 2;
            for i in 0..w {
                for j in 0..w {
                    a[(k + 2 + i, k + 2 + j)] += tau[i] * col[j] - col[i] * tau[j];
                }
            }
        }
    }
    pf
}
