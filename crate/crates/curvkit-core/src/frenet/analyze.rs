//! Curvature extraction: the map from a sampled curve to its per-sample
//! Frenet apparatus.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frenet::frame::frenet_frame_at_param;
use crate::frenet::{FrenetApparatus, SampledCurve};
use crate::numerics::{linalg, periodic_derivative};

/// Compute the Frenet apparatus at every sample of `curve`.
///
/// Closed curves are differentiated spectrally; open curves use
/// finite-difference stencils (one-sided near the endpoints). Curvatures
/// come from frame-field differentiation,
/// `kappa_i = <e_i', e_{i+1}> / |alpha'|`, which keeps one code path for all
/// `i` and lets the sign of the last curvature fall out naturally.
pub fn analyze_curve(curve: &SampledCurve) -> Result<Vec<FrenetApparatus>> {
    let dim = curve.dim;
    let n = dim - 1;
    let count = curve.len();
    let required = 4 * (n + 1);
    if count < required {
        return Err(Error::InsufficientResolution {
            required,
            actual: count,
        });
    }

    // Derivatives of every coordinate up to order n: derivs[m-1] is the
    // m-th derivative, row-major N x dim.
    let derivs = curve_derivatives(curve, n)?;

    // Per-sample frames.
    let mut frames = Vec::with_capacity(count);
    let mut speeds = Vec::with_capacity(count);
    for j in 0..count {
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|m| derivs[m][j * dim..(j + 1) * dim].to_vec())
            .collect();
        let speed = linalg::norm(&vectors[0]);
        let frame = frenet_frame_at_param(&vectors, Some(curve.params[j]))?;
        frames.push(frame);
        speeds.push(speed);
    }

    // Differentiate the frame field entrywise.
    let frame_field: Vec<f64> = {
        let mut data = Vec::with_capacity(count * dim * dim);
        for frame in &frames {
            data.extend_from_slice(&frame.mat.data);
        }
        data
    };
    let frame_rate = differentiate_samples(&frame_field, dim * dim, curve, 1)?;

    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let mut kappas = Vec::with_capacity(n);
        let rate = &frame_rate[j * dim * dim..(j + 1) * dim * dim];
        for i in 0..n {
            let e_next = frames[j].vector(i + 1);
            let mut d = 0.0;
            for c in 0..dim {
                d += rate[i * dim + c] * e_next[c];
            }
            kappas.push(d / speeds[j]);
        }
        for (i, &k) in kappas.iter().enumerate().take(n.saturating_sub(1)) {
            if !(k > 0.0) {
                return Err(Error::DegenerateFrame {
                    t: Some(curve.params[j]),
                    detail: format!("extracted curvature {} is {k:.3e}", i + 1),
                });
            }
        }
        out.push(FrenetApparatus {
            t: curve.params[j],
            frame: frames[j].clone(),
            speed: speeds[j],
            kappas,
        });
    }
    Ok(out)
}

/// Derivatives of the curve coordinates for orders `1..=max_order`,
/// each row-major `N x dim`.
pub(crate) fn curve_derivatives(
    curve: &SampledCurve,
    max_order: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut result = Vec::with_capacity(max_order);
    for order in 1..=max_order {
        result.push(differentiate_samples(
            &curve.points,
            curve.dim,
            curve,
            order,
        )?);
    }
    Ok(result)
}

/// Differentiate row-major `N x width` samples along the curve parameter.
fn differentiate_samples(
    values: &[f64],
    width: usize,
    curve: &SampledCurve,
    order: usize,
) -> Result<Vec<f64>> {
    let count = curve.len();
    let mut out = vec![0.0; values.len()];
    if curve.closed {
        let period = curve.param_span();
        for c in 0..width {
            let column: Vec<f64> = (0..count).map(|j| values[j * width + c]).collect();
            let d = periodic_derivative(&column, order, period)?;
            for j in 0..count {
                out[j * width + c] = d[j];
            }
        }
        Ok(out)
    } else {
        let n = curve.dim - 1;
        let stencil = open_stencil_size(n, order).min(count);
        let weights = OpenStencils::new(count, n, stencil, curve.spacing(), order);
        for c in 0..width {
            let column: Vec<f64> = (0..count).map(|j| values[j * width + c]).collect();
            for j in 0..count {
                out[j * width + c] = weights.apply(&column, j);
            }
        }
        Ok(out)
    }
}

/// Interior (centered) stencil size for open-curve differentiation.
fn open_stencil_size(n: usize, order: usize) -> usize {
    let needed = n + 2 + order;
    let mut s = needed.max(9);
    if s % 2 == 0 {
        s += 1;
    }
    s
}

/// Finite-difference weights for a uniform grid: wide centered stencils in
/// the interior, one-sided stencils of accuracy order `n + 2` near the ends.
///
/// The end stencils deliberately use the minimal point count: very
/// high-order one-sided weights amplify rounding noise faster than their
/// extra accuracy pays off.
struct OpenStencils {
    count: usize,
    end_stencil: usize,
    half: usize,
    head: Vec<Vec<f64>>,
    center: Vec<f64>,
    tail: Vec<Vec<f64>>,
}

impl OpenStencils {
    fn new(count: usize, n: usize, stencil: usize, spacing: f64, order: usize) -> Self {
        let half = stencil / 2;
        let end_stencil = (n + 2 + order).min(count);
        let center = {
            let nodes: Vec<f64> = (0..stencil).map(|i| i as f64 * spacing).collect();
            fd_weights(half as f64 * spacing, &nodes, order).pop().unwrap()
        };
        let end_nodes: Vec<f64> = (0..end_stencil).map(|i| i as f64 * spacing).collect();
        let mut head = Vec::with_capacity(half);
        let mut tail = Vec::with_capacity(half);
        for j in 0..half.min(count) {
            head.push(fd_weights(j as f64 * spacing, &end_nodes, order).pop().unwrap());
            let z = (end_stencil - half + j) as f64 * spacing;
            tail.push(fd_weights(z, &end_nodes, order).pop().unwrap());
        }
        let _ = stencil;
        OpenStencils {
            count,
            end_stencil,
            half,
            head,
            center,
            tail,
        }
    }

    fn apply(&self, column: &[f64], j: usize) -> f64 {
        let (start, weights): (usize, &[f64]) = if j < self.half {
            (0, &self.head[j])
        } else if j + self.half >= self.count {
            let offset = j - (self.count - self.half);
            (self.count - self.end_stencil, &self.tail[offset])
        } else {
            (j - self.half, &self.center)
        };
        let mut acc = 0.0;
        for (k, w) in weights.iter().enumerate() {
            acc += w * column[start + k];
        }
        acc
    }
}

/// Fornberg weights for derivative orders `0..=max_order` at evaluation
/// point `z` on arbitrary nodes `x`. Returns one weight row per order.
pub(crate) fn fd_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
