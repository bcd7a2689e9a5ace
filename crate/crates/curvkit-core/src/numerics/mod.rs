//! Dimension-generic numeric kernels: the skew Frenet coefficient matrix,
//! its invariant-plane spectrum, orthonormal frame transport, spectral
//! differentiation on periodic grids, and mollifier smoothing.

pub mod linalg;
mod mollify;
pub(crate) mod spectral;

pub use linalg::Mat;
pub use mollify::{mollify_blend, smooth_bump, smoothstep, Mollifier};
pub use spectral::periodic_derivative;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::F64Ext;

/// Relative tolerance below which a squared frequency counts as zero.
///
/// Separates the odd-dimension kernel from genuine frequencies at double
/// precision.
pub const SPECTRUM_ZERO_TOL: f64 = 1e-10;

/// Coefficient matrix of the Frenet system for curvatures `kappa_1..kappa_n`.
///
/// The matrix is `(n+1) x (n+1)`, tridiagonal and skew-symmetric with
/// `K[i][i+1] = kappa_{i+1}` and `K[i+1][i] = -kappa_{i+1}` (0-based bands).
/// The row-stacked frame `E` (row `i` holds `e_{i+1}`) evolves as
/// `E' = |alpha'| K E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewFrenetMatrix {
    /// Number of curvatures; the curve lives in `R^(n+1)`.
    pub n: usize,
    /// Curvature values, `kappas[i] > 0` for `i < n-1`.
    pub kappas: Vec<f64>,
    /// The assembled matrix.
    pub entries: Mat,
}

/// Build the Frenet coefficient matrix, validating curvature positivity.
///
/// The first `n-1` curvatures must be strictly positive; the last one is
/// unconstrained (its sign orients the curve, and it may vanish).
pub fn build_frenet_matrix(kappas: &[f64]) -> Result<SkewFrenetMatrix> {
    let n = kappas.len();
    if n == 0 {
        return Err(Error::invalid("need at least one curvature"));
    }
    for (i, &k) in kappas.iter().enumerate().take(n.saturating_sub(1)) {
        if !(k > 0.0) {
            return Err(Error::NonPositiveCurvature {
                index: i,
                value: k,
                t: None,
            });
        }
    }
    if kappas.iter().any(|k| !k.is_finite()) {
        return Err(Error::invalid("non-finite curvature"));
    }
    let dim = n + 1;
    let mut entries = Mat::zeros(dim);
    for (i, &k) in kappas.iter().enumerate() {
        entries.set(i, i + 1, k);
        entries.set(i + 1, i, -k);
    }
    Ok(SkewFrenetMatrix {
        n,
        kappas: kappas.to_vec(),
        entries,
    })
}

/// Invariant-plane decomposition of a skew Frenet matrix.
///
/// Each frequency `b_l > 0` comes with an orthonormal pair `(v_l, w_l)`
/// spanning the invariant 2-plane on which the matrix acts as the rotation
/// generator `v -> b w, w -> -b v`. In odd ambient dimension the kernel of
/// the matrix is spanned by `kernel_axis`.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    pub dim: usize,
    /// Frequencies in ascending order, one per plane (repeats allowed).
    pub frequencies: Vec<f64>,
    /// Orthonormal plane bases `(v_l, w_l)` matching `frequencies`.
    pub planes: Vec<(Vec<f64>, Vec<f64>)>,
    /// Unit kernel vector, present iff the matrix is singular.
    pub kernel_axis: Option<Vec<f64>>,
}

impl EigenStructure {
    /// Reassemble the skew matrix from its plane decomposition.
    pub fn reassemble(&self) -> Mat {
        let d = self.dim;
        let mut k = Mat::zeros(d);
        for (b, (v, w)) in self.frequencies.iter().zip(self.planes.iter()) {
            for i in 0..d {
                for j in 0..d {
                    k.data[i * d + j] += b * (w[i] * v[j] - v[i] * w[j]);
                }
            }
        }
        k
    }
}

/// Invariant-plane decomposition of an arbitrary skew-symmetric matrix:
/// rotation rates with orthonormal plane pairs `(v, w)` satisfying
/// `M v = b w`, `M w = -b v`, plus (at most one) unit kernel vector for the
/// zero eigenvalue group.
///
/// Used both for the Frenet coefficient matrix and for logarithms of
/// rotations close to the identity.
pub(crate) fn skew_planes(
    km: &Mat,
) -> (Vec<f64>, Vec<(Vec<f64>, Vec<f64>)>, Option<Vec<f64>>, usize) {
    // S = -M^2 = M^T M for skew M.
    let s = km.transpose().matmul(km);
    let (vals, vecs) = linalg::jacobi_eigen(&s);
    let max_val = vals.last().copied().unwrap_or(0.0).max(0.0);
    let zero_tol = SPECTRUM_ZERO_TOL * max_val.max(1e-300);

    let mut kernel_axis: Option<Vec<f64>> = None;
    let mut zero_count = 0usize;
    let mut planes: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut frequencies: Vec<f64> = Vec::new();

    for (idx, &val) in vals.iter().enumerate() {
        let u: Vec<f64> = vecs.row(idx).to_vec();
        if val < zero_tol || max_val <= 0.0 {
            zero_count += 1;
            let mut axis = u;
            // Deterministic sign: first significant component positive.
            if let Some(c) = axis.iter().find(|c| c.abs() > 1e-8) {
                if *c < 0.0 {
                    for a in axis.iter_mut() {
                        *a = -*a;
                    }
                }
            }
            kernel_axis = Some(axis);
            continue;
        }
        let b = val.sqrt();
        // Skip eigenvectors already absorbed as the partner of a built plane.
        let mut residual = u;
        for (v, w) in planes.iter() {
            let cv = linalg::dot(&residual, v);
            linalg::axpy(&mut residual, -cv, v);
            let cw = linalg::dot(&residual, w);
            linalg::axpy(&mut residual, -cw, w);
        }
        let rnorm = linalg::norm(&residual);
        if rnorm < 0.5 {
            continue;
        }
        let inv = 1.0 / rnorm;
        let v: Vec<f64> = residual.iter().map(|x| x * inv).collect();
        let mut w = km.matvec(&v);
        for x in w.iter_mut() {
            *x /= b;
        }
        // Clean up rounding against everything built so far.
        for (pv, pw) in planes.iter() {
            let c = linalg::dot(&w, pv);
            linalg::axpy(&mut w, -c, pv);
            let c = linalg::dot(&w, pw);
            linalg::axpy(&mut w, -c, pw);
        }
        let c = linalg::dot(&w, &v);
        linalg::axpy(&mut w, -c, &v);
        let wn = linalg::norm(&w);
        let inv = 1.0 / wn;
        for x in w.iter_mut() {
            *x *= inv;
        }
        frequencies.push(b);
        planes.push((v, w));
    }
    (frequencies, planes, kernel_axis, zero_count)
}

/// Compute the invariant-plane spectrum of a skew Frenet matrix.
///
/// Works on the symmetric positive-semidefinite matrix `-K^2` so that all
/// arithmetic stays real: its nonzero eigenvalues are the `b_l^2`.
pub fn eigen_structure(k: &SkewFrenetMatrix) -> Result<EigenStructure> {
    let dim = k.n + 1;
    if k.entries.max_abs() <= 0.0 {
        return Err(Error::DegenerateSpectrum {
            detail: String::from("coefficient matrix is zero"),
        });
    }
    let (frequencies, planes, kernel_axis, zero_count) = skew_planes(&k.entries);

    if dim % 2 == 0 {
        if zero_count > 0 {
            return Err(Error::DegenerateSpectrum {
                detail: format!(
                    "{zero_count} zero frequencies in even dimension {dim} (last curvature \
                     vanishes)"
                ),
            });
        }
    } else if zero_count != 1 {
        return Err(Error::DegenerateSpectrum {
            detail: format!("expected a 1-dimensional kernel in odd dimension {dim}, got {zero_count}"),
        });
    }
    if 2 * planes.len() + zero_count != dim {
        return Err(Error::DegenerateSpectrum {
            detail: format!(
                "plane decomposition incomplete: {} planes + {zero_count} kernel in dimension {dim}",
                planes.len()
            ),
        });
    }

    Ok(EigenStructure {
        dim,
        frequencies,
        planes,
        kernel_axis,
    })
}

/// Positively oriented orthonormal frame, stored as row-stacked vectors
/// (row `i` is `e_{i+1}`).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub mat: Mat,
}

impl Frame {
    pub fn identity(dim: usize) -> Self {
        Frame {
            mat: Mat::identity(dim),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("frame rows must form a square matrix"));
        }
        let mut mat = Mat::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            mat.row_mut(i).copy_from_slice(r);
        }
        Ok(Frame { mat })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    /// Frame vector `e_{i+1}`.
    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        self.mat.row(i)
    }

    /// Max-norm residual of `E E^T - I`.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.mat.matmul(&self.mat.transpose());
        let d = self.dim();
        let mut max: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                max = max.max((g.at(i, j) - target).abs());
            }
        }
        max
    }

    pub fn det(&self) -> f64 {
        self.mat.det()
    }

    /// Max-norm distance to another frame.
    pub fn distance(&self, other: &Frame) -> f64 {
        self.mat
            .data
            .iter()
            .zip(other.mat.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Advance a frame by arclength `speed * h` under the Frenet system with the
/// given (midpoint) curvature samples.
///
/// The step applies the exact exponential of the frozen generator, so the
/// output frame is orthonormal to machine precision regardless of step size.
pub fn frame_step(frame: &Frame, kappas: &[f64], speed: f64, h: f64) -> Result<Frame> {
    if kappas.len() + 1 != frame.dim() {
        return Err(Error::invalid("curvature count does not match frame dimension"));
    }
    if h == 0.0 || speed == 0.0 {
        return Ok(frame.clone());
    }
    let k = build_frenet_matrix(kappas)?;
    let mut gen = k.entries;
    gen.scale(speed * h);
    let transport = linalg::exp_skew(&gen);
    Ok(Frame {
        mat: transport.matmul(&frame.mat),
    })
}

/// One step of the unit-speed Frenet synthesis: advances position and frame
/// together using the exponential and its phi-function, exact for constant
/// curvature.
pub(crate) fn frenet_position_step(
    point: &mut [f64],
    frame: &mut Frame,
    kappas: &[f64],
    h: f64,
) -> Result<()> {
    let k = build_frenet_matrix(kappas)?;
    let mut gen = k.entries;
    gen.scale(h);
    let transport = linalg::exp_skew(&gen);
    let phi = linalg::phi_matrix(&gen);
    // delta x = h * row_0[phi(hK) E]
    let dim = frame.dim();
    for c in 0..dim {
        let mut s = 0.0;
        for j in 0..dim {
            s += phi.at(0, j) * frame.mat.at(j, c);
        }
        point[c] += h * s;
    }
    frame.mat = transport.matmul(&frame.mat);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn builds_n1_rotation_generator() {
        let k = build_frenet_matrix(&[1.0]).unwrap();
        assert_eq!(k.entries.row(0), &[0.0, 1.0]);
        assert_eq!(k.entries.row(1), &[-1.0, 0.0]);
    }

    #[test]
    fn builds_n2_band_pattern() {
        let k = build_frenet_matrix(&[1.0, 0.5]).unwrap();
        assert_eq!(k.entries.row(0), &[0.0, 1.0, 0.0]);
        assert_eq!(k.entries.row(1), &[-1.0, 0.0, 0.5]);
        assert_eq!(k.entries.row(2), &[0.0, -0.5, 0.0]);
    }

    #[test]
    fn rejects_nonpositive_leading_curvature() {
        let err = build_frenet_matrix(&[-1.0, 0.5]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveCurvature { index: 0, .. }));
        // Last curvature may be zero or negative.
        assert!(build_frenet_matrix(&[1.0, -0.5]).is_ok());
        assert!(build_frenet_matrix(&[1.0, 0.0]).is_ok());
    }

    #[test]
    fn matrix_is_exactly_skew() {
        let k = build_frenet_matrix(&[1.3, 0.4, 2.0]).unwrap();
        let kt = k.entries.transpose();
        for (a, b) in k.entries.data.iter().zip(kt.data.iter()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn planar_spectrum_is_the_curvature() {
        let k = build_frenet_matrix(&[2.0]).unwrap();
        let es = eigen_structure(&k).unwrap();
        assert_eq!(es.frequencies.len(), 1);
        assert!((es.frequencies[0] - 2.0).abs() < 1e-12);
        assert!(es.kernel_axis.is_none());
    }

    #[test]
    fn r3_spectrum_matches_pythagoras() {
        // For n = 2 the single frequency satisfies b^2 = k1^2 + k2^2.
        let k = build_frenet_matrix(&[1.0, 0.5]).unwrap();
        let es = eigen_structure(&k).unwrap();
        assert_eq!(es.frequencies.len(), 1);
        assert!((es.frequencies[0] * es.frequencies[0] - 1.25).abs() < 1e-10);
        let axis = es.kernel_axis.as_ref().unwrap();
        let kv = k.entries.matvec(axis);
        assert!(linalg::norm(&kv) < 1e-12);
    }

    #[test]
    fn r4_unit_spectrum_solves_characteristic_polynomial() {
        // b^2 are the roots of x^2 - 3x + 1.
        let k = build_frenet_matrix(&[1.0, 1.0, 1.0]).unwrap();
        let es = eigen_structure(&k).unwrap();
        assert_eq!(es.frequencies.len(), 2);
        let lo = (3.0 - 5.0f64.sqrt()) / 2.0;
        let hi = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert!((es.frequencies[0] * es.frequencies[0] - lo).abs() < 1e-10);
        assert!((es.frequencies[1] * es.frequencies[1] - hi).abs() < 1e-10);
    }

    #[test]
    fn degenerate_even_spectrum_is_rejected() {
        let k = build_frenet_matrix(&[1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            eigen_structure(&k),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn plane_vectors_are_eigenvectors_of_minus_k_squared() {
        let k = build_frenet_matrix(&[1.0, 0.7, 0.3, 1.4]).unwrap();
        let es = eigen_structure(&k).unwrap();
        let s = k.entries.transpose().matmul(&k.entries);
        for (b, (v, w)) in es.frequencies.iter().zip(es.planes.iter()) {
            for vec in [v, w] {
                let sv = s.matvec(vec);
                for (a, b2) in sv.iter().zip(vec.iter().map(|x| x * b * b)) {
                    assert!((a - b2).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn planes_and_kernel_form_orthonormal_basis() {
        let k = build_frenet_matrix(&[0.8, 0.4]).unwrap();
        let es = eigen_structure(&k).unwrap();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for (v, w) in &es.planes {
            basis.push(v.clone());
            basis.push(w.clone());
        }
        basis.push(es.kernel_axis.clone().unwrap());
        assert_eq!(basis.len(), 3);
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((linalg::dot(&basis[i], &basis[j]) - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reassembled_matrix_matches_original() {
        for kappas in [vec![2.0], vec![1.0, 0.5], vec![1.0, 1.0, 1.0], vec![0.9, 0.2, 0.7, 1.1]] {
            let k = build_frenet_matrix(&kappas).unwrap();
            let es = eigen_structure(&k).unwrap();
            let re = es.reassemble();
            let mut max: f64 = 0.0;
            for (a, b) in re.data.iter().zip(k.entries.data.iter()) {
                max = max.max((a - b).abs());
            }
            assert!(max < 1e-10, "reassembly residual {max} for {kappas:?}");
        }
    }

    #[test]
    fn repeated_frequencies_still_decompose() {
        // Two independent rotation blocks with the same frequency.
        let mut m = Mat::zeros(4);
        m.set(0, 1, 1.5);
        m.set(1, 0, -1.5);
        m.set(2, 3, 1.5);
        m.set(3, 2, -1.5);
        let k = SkewFrenetMatrix {
            n: 3,
            kappas: vec![0.0; 3],
            entries: m.clone(),
        };
        let es = eigen_structure(&k).unwrap();
        assert_eq!(es.planes.len(), 2);
        let re = es.reassemble();
        for (a, b) in re.data.iter().zip(m.data.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn frame_step_rotates_tangent_by_arc() {
        // Unit curvature, arc pi: e1 rotates by pi in the e1-e2 plane.
        let mut frame = Frame::identity(2);
        let steps = 1000;
        let h = PI / steps as f64;
        for _ in 0..steps {
            frame = frame_step(&frame, &[1.0], 1.0, h).unwrap();
        }
        assert!((frame.mat.at(0, 0) + 1.0).abs() < 1e-9);
        assert!(frame.mat.at(0, 1).abs() < 1e-9);
    }

    #[test]
    fn frame_step_zero_arc_is_identity() {
        let frame = Frame::identity(3);
        let out = frame_step(&frame, &[1.0, 0.2], 1.0, 0.0).unwrap();
        assert_eq!(out, frame);
    }

    #[test]
    fn frame_step_orthonormality_drift_stays_tiny() {
        let mut frame = Frame::identity(4);
        let kappas = [1.0, 0.6, 0.3];
        for _ in 0..100_000 {
            frame = frame_step(&frame, &kappas, 1.0, 1e-3).unwrap();
        }
        assert!(frame.orthonormality_residual() < 1e-9);
        assert!((frame.det() - 1.0).abs() < 1e-9);
    }
}
