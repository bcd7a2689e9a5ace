//! Reparametrization of closed curves by circle diffeomorphisms.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frenet::SampledCurve;
use crate::math::TAU;
use crate::numerics::{periodic_derivative, spectral};

/// Floor for the derivative of a valid orientation-preserving circle map.
pub const DIFFEO_DERIVATIVE_TOL: f64 = 1e-8;

/// An orientation-preserving diffeomorphism of the parameter circle, stored
/// as uniform samples of its periodic displacement `q(t) - t` and evaluated
/// by trigonometric interpolation.
#[derive(Debug, Clone)]
pub struct CircleMap {
    n: usize,
    displacement: Vec<f64>,
    coeff_re: Vec<f64>,
    coeff_im: Vec<f64>,
}

impl CircleMap {
    /// Build from samples of the lifted map on the uniform grid
    /// `t_j = 2 pi j / N`; `values[j] = q(t_j)` with
    /// `q(t + 2 pi) = q(t) + 2 pi`.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 16 {
            return Err(Error::InsufficientResolution {
                required: 16,
                actual: n,
            });
        }
        let displacement: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(j, &q)| q - TAU * j as f64 / n as f64)
            .collect();
        let map = CircleMap::from_displacement(displacement)?;
        map.validate()?;
        Ok(map)
    }

    /// Build from a displacement function `q(t) - t`.
    pub fn from_fn(n: usize, mut displacement: impl FnMut(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                t + displacement(t)
            })
            .collect();
        Self::from_samples(&values)
    }

    pub fn identity(n: usize) -> Self {
        let displacement = alloc::vec![0.0; n];
        CircleMap::from_displacement(displacement).expect("identity map is valid")
    }

    fn from_displacement(displacement: Vec<f64>) -> Result<Self> {
        let (coeff_re, coeff_im) = spectral::fourier_coefficients(&displacement);
        Ok(CircleMap {
            n: displacement.len(),
            displacement,
            coeff_re,
            coeff_im,
        })
    }

    fn validate(&self) -> Result<()> {
        // The interpolated derivative must stay positive; check on a grid
        // four times finer via spectral upsampling.
        let d = periodic_derivative(&self.displacement, 1, TAU)?;
        for (j, &dd) in d.iter().enumerate() {
            let q_prime = 1.0 + dd;
            if q_prime < DIFFEO_DERIVATIVE_TOL {
                return Err(Error::NotADiffeomorphism {
                    t: TAU * j as f64 / self.n as f64,
                    derivative: q_prime,
                });
            }
        }
        let fine = spectral::upsampled_derivative(&self.displacement, TAU, 4);
        let m = fine.len();
        for (j, &dd) in fine.iter().enumerate() {
            let q_prime = 1.0 + dd;
            if q_prime < DIFFEO_DERIVATIVE_TOL {
                return Err(Error::NotADiffeomorphism {
                    t: TAU * j as f64 / m as f64,
                    derivative: q_prime,
                });
            }
        }
        Ok(())
    }

    /// Lifted map value `q(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        t + spectral::trig_interp_eval(&self.coeff_re, &self.coeff_im, self.n, 0.0, TAU, t)
    }

    /// Derivative `q'(t)` via the interpolated displacement.
    pub fn derivative(&self, t: f64) -> f64 {
        // Differentiate the trigonometric interpolant analytically.
        let n = self.n;
        let x = t / TAU * TAU;
        let mut acc = 0.0;
        let half = n / 2;
        for k in 1..=(n - 1) / 2 {
            let kk = k as f64;
            let (c, s) = (libm::cos(kk * x), libm::sin(kk * x));
            acc += 2.0 * kk * (-self.coeff_re[k] * s - self.coeff_im[k] * c);
        }
        if n % 2 == 0 {
            acc -= self.coeff_re[half] * half as f64 * libm::sin(half as f64 * x);
        }
        1.0 + acc / n as f64
    }

    pub fn sample_count(&self) -> usize {
        self.n
    }
}

/// Reparametrize a closed curve: the output at parameter `t` is the input
/// evaluated at `q(t)`.
///
/// The image is unchanged, so the curvature profile transports as
/// `kappa_out(t) = kappa_in(q(t))`.
pub fn reparametrize(curve: &SampledCurve, map: &CircleMap) -> Result<SampledCurve> {
    if !curve.closed {
        return Err(Error::invalid("reparametrize expects a closed curve"));
    }
    let n = curve.len();
    let dim = curve.dim;
    let period = curve.param_span();
    let t0 = curve.params[0];
    // Trigonometric interpolation of every coordinate.
    let mut coeffs = Vec::with_capacity(dim);
    for c in 0..dim {
        let column = curve.component(c);
        coeffs.push(spectral::fourier_coefficients(&column));
    }
    let mut points = Vec::with_capacity(n * dim);
    for j in 0..n {
        let t = t0 + period * j as f64 / n as f64;
        // Map the normalized parameter through q.
        let phase = (t - t0) / period * TAU;
        let mapped = map.eval(phase) / TAU * period + t0;
        for (re, im) in coeffs.iter() {
            points.push(spectral::trig_interp_eval(re, im, n, t0, period, mapped));
        }
    }
    SampledCurve::new(dim, curve.params.clone(), points, true)
}
