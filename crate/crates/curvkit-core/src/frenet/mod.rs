//! Frenet frames, curvature extraction from sampled curves, curve synthesis
//! from curvature profiles, and reparametrization.

pub(crate) mod analyze;
mod frame;
mod profile;
mod reparam;
mod synthesize;

pub use analyze::analyze_curve;
pub use frame::frenet_frame_at;
pub use profile::{CurvatureProfile, FourierSeries};
pub use reparam::{reparametrize, CircleMap};
pub use synthesize::{synthesize_curve, synthesize_on_grid};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::Frame;

/// Minimum number of samples a curve must carry.
pub const MIN_SAMPLES: usize = 16;

/// A parametrized curve in `R^dim` given by uniform parameter samples.
///
/// Closed curves cover exactly one period with the endpoint excluded
/// (`params[j] = t0 + j * period / N`); open curves include both endpoints
/// (`params[j] = a + j * (b - a) / (N - 1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub dim: usize,
    pub params: Vec<f64>,
    /// Row-major `N x dim` point coordinates.
    pub points: Vec<f64>,
    pub closed: bool,
}

impl SampledCurve {
    pub fn new(dim: usize, params: Vec<f64>, points: Vec<f64>, closed: bool) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("curves live in R^(n+1) with n >= 1"));
        }
        let n = params.len();
        if n < MIN_SAMPLES {
            return Err(Error::InsufficientResolution {
                required: MIN_SAMPLES,
                actual: n,
            });
        }
        if points.len() != n * dim {
            return Err(Error::invalid("points length must equal N * dim"));
        }
        if points.iter().any(|p| !p.is_finite()) || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("curve data must be finite"));
        }
        let step = params[1] - params[0];
        if !(step > 0.0) {
            return Err(Error::invalid("params must be strictly increasing"));
        }
        let span = params[n - 1] - params[0];
        let expected = step * (n - 1) as f64;
        if (span - expected).abs() > 1e-9 * span.abs().max(1.0) {
            return Err(Error::invalid("params must be uniformly spaced"));
        }
        for w in params.windows(2) {
            if (w[1] - w[0] - step).abs() > 1e-9 * step.max(1e-12) {
                return Err(Error::invalid("params must be uniformly spaced"));
            }
        }
        Ok(SampledCurve {
            dim,
            params,
            points,
            closed,
        })
    }

    /// Closed curve on `[0, 2pi)` from a point function.
    pub fn from_fn_closed(
        dim: usize,
        n: usize,
        mut f: impl FnMut(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let params: Vec<f64> = (0..n)
            .map(|j| core::f64::consts::TAU * j as f64 / n as f64)
            .collect();
        let mut points = Vec::with_capacity(n * dim);
        for &t in &params {
            let p = f(t);
            debug_assert_eq!(p.len(), dim);
            points.extend_from_slice(&p);
        }
        SampledCurve::new(dim, params, points, true)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.params.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    #[inline]
    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.params[1] - self.params[0]
    }

    /// Parameter period for closed curves (`N * spacing`), parameter span
    /// for open ones.
    pub fn param_span(&self) -> f64 {
        if self.closed {
            self.spacing() * self.len() as f64
        } else {
            self.params[self.len() - 1] - self.params[0]
        }
    }

    /// Component `c` as a contiguous sample vector.
    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.points[j * self.dim + c]).collect()
    }

    /// Apply an orthogonal (or any linear) map to every point.
    pub fn transformed(&self, map: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut points = Vec::with_capacity(self.points.len());
        for j in 0..self.len() {
            points.extend_from_slice(&map(self.point(j)));
        }
        SampledCurve::new(self.dim, self.params.clone(), points, self.closed)
    }
}

/// Frenet data at one parameter value: positively oriented orthonormal
/// frame, speed, and curvatures.
#[derive(Debug, Clone)]
pub struct FrenetApparatus {
    pub t: f64,
    pub frame: Frame,
    pub speed: f64,
    pub kappas: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_short_or_ragged_input() {
        let params: Vec<f64> = (0..8).map(|j| j as f64).collect();
        let points = vec![0.0; 16];
        assert!(matches!(
            SampledCurve::new(2, params, points, false),
            Err(Error::InsufficientResolution { .. })
        ));

        let params: Vec<f64> = (0..20).map(|j| j as f64).collect();
        let points = vec![0.0; 39];
        assert!(SampledCurve::new(2, params, points, false).is_err());
    }

    #[test]
    fn rejects_nonuniform_params() {
        let mut params: Vec<f64> = (0..20).map(|j| j as f64).collect();
        params[10] += 0.2;
        let points = vec![0.0; 40];
        assert!(SampledCurve::new(2, params, points, false).is_err());
    }

    #[test]
    fn closed_period_counts_the_missing_endpoint() {
        let c = SampledCurve::from_fn_closed(2, 32, |t| vec![t.cos(), t.sin()]).unwrap();
        assert!((c.param_span() - core::f64::consts::TAU).abs() < 1e-12);
    }
}
