//! Frenet frame from derivative vectors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::linalg;
use crate::numerics::Frame;

/// Relative Gram-determinant floor below which derivatives count as
/// dependent.
pub const FRAME_GRAM_TOL: f64 = 1e-10;

/// Build the Frenet frame from the first `n` derivative vectors of a curve
/// in `R^(n+1)`.
///
/// Gram-Schmidt on the derivatives in order yields `e_1..e_n`; the last
/// vector is the unique unit vector completing a positively oriented
/// orthonormal basis.
pub fn frenet_frame_at(derivs: &[Vec<f64>]) -> Result<Frame> {
    frenet_frame_at_param(derivs, None)
}

pub(crate) fn frenet_frame_at_param(derivs: &[Vec<f64>], t: Option<f64>) -> Result<Frame> {
    let n = derivs.len();
    if n == 0 {
        return Err(Error::invalid("need at least one derivative vector"));
    }
    let dim = n + 1;
    if derivs.iter().any(|d| d.len() != dim) {
        return Err(Error::invalid(
            "expected n derivative vectors in R^(n+1)",
        ));
    }

    // Independence test: Gram determinant against the product of squared
    // norms.
    let g = linalg::gram(derivs);
    let mut norm_product = 1.0;
    for i in 0..n {
        norm_product *= g.at(i, i);
    }
    let det = g.det();
    if !(norm_product > 0.0) || det <= FRAME_GRAM_TOL * norm_product {
        return Err(Error::DegenerateFrame {
            t,
            detail: format!(
                "Gram determinant {det:.3e} below {FRAME_GRAM_TOL:.0e} x norm product {norm_product:.3e}"
            ),
        });
    }

    let mut rows: Vec<Vec<f64>> = derivs.to_vec();
    linalg::orthonormalize(&mut rows);

    // Complete the basis: best-conditioned standard direction, orthogonalized.
    let mut best_idx = 0;
    let mut best_res = -1.0;
    for cand in 0..dim {
        let mut r = 0.0;
        let mut proj = 0.0;
        for row in rows.iter() {
            proj += row[cand] * row[cand];
        }
        r += 1.0 - proj;
        if r > best_res {
            best_res = r;
            best_idx = cand;
        }
    }
    let mut last = vec![0.0; dim];
    last[best_idx] = 1.0;
    for _ in 0..2 {
        for row in rows.iter() {
            let c = linalg::dot(&last, row);
            linalg::axpy(&mut last, -c, row);
        }
    }
    let nrm = linalg::norm(&last);
    if nrm < 1e-12 {
        return Err(Error::DegenerateFrame {
            t,
            detail: format!("cannot complete frame (residual {nrm:.3e})"),
        });
    }
    for v in last.iter_mut() {
        *v /= nrm;
    }
    rows.push(last);

    let mut frame = Frame::from_rows(&rows)?;
    // Orientation: det = +1.
    if frame.det() < 0.0 {
        let d = frame.dim();
        for v in frame.mat.row_mut(d - 1).iter_mut() {
            *v = -*v;
        }
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_frame_is_rotation_of_tangent() {
        let frame = frenet_frame_at(&[vec![0.0, 1.0]]).unwrap();
        assert_eq!(frame.vector(0), &[0.0, 1.0]);
        assert!((frame.vector(1)[0] + 1.0).abs() < 1e-15);
        assert!(frame.vector(1)[1].abs() < 1e-15);
    }

    #[test]
    fn orthogonal_derivatives_give_identity_frame() {
        let frame =
            frenet_frame_at(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((frame.mat.at(i, j) - target).abs() < 1e-14);
            }
        }
        assert!((frame.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dependent_derivatives_are_rejected() {
        let err =
            frenet_frame_at(&[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame { .. }));
    }

    #[test]
    fn orientation_is_always_positive() {
        // A left-handed input pair still yields det +1 via the last vector.
        let frame =
            frenet_frame_at(&[vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!((frame.det() - 1.0).abs() < 1e-12);
        assert!(frame.orthonormality_residual() < 1e-14);
    }
}
