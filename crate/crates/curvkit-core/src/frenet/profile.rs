//! Curvature profiles: periodic maps `S^1 -> (R_+)^{n-1} x R`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{F64Ext, TAU};
use crate::numerics::spectral;

/// Grid used to check positivity of the constrained components.
pub const POSITIVITY_GRID: usize = 2048;

/// One real Fourier series over period `2 pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub constant: f64,
    /// Coefficients of `cos(m t)`, `m = 1..`.
    pub cos: Vec<f64>,
    /// Coefficients of `sin(m t)`, `m = 1..`.
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn constant_value(value: f64) -> Self {
        FourierSeries {
            constant: value,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.constant;
        for (m, &c) in self.cos.iter().enumerate() {
            acc += c * ((m + 1) as f64 * t).cos();
        }
        for (m, &s) in self.sin.iter().enumerate() {
            acc += s * ((m + 1) as f64 * t).sin();
        }
        acc
    }
}

#[derive(Debug, Clone)]
enum Rep {
    Fourier(Vec<FourierSeries>),
    Table {
        n_samples: usize,
        /// Per component: unnormalized DFT coefficients of the samples.
        coeffs: Vec<(Vec<f64>, Vec<f64>)>,
    },
}

/// A curvature-like function: `n` periodic components over `[0, 2 pi)`,
/// the first `n - 1` strictly positive.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    n: usize,
    rep: Rep,
}

impl CurvatureProfile {
    /// Build from per-component Fourier series.
    pub fn from_fourier(components: Vec<FourierSeries>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("profile needs at least one component"));
        }
        let profile = CurvatureProfile {
            n: components.len(),
            rep: Rep::Fourier(components),
        };
        profile.check_positivity()?;
        Ok(profile)
    }

    /// Build from uniform samples over `[0, 2 pi)`, row-major `N x n`;
    /// evaluation uses trigonometric interpolation.
    pub fn from_table(n: usize, values: &[f64]) -> Result<Self> {
        if n == 0 || values.is_empty() || values.len() % n != 0 {
            return Err(Error::invalid("table must be row-major N x n"));
        }
        let n_samples = values.len() / n;
        if n_samples < 8 {
            return Err(Error::InsufficientResolution {
                required: 8,
                actual: n_samples,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table values must be finite"));
        }
        let mut coeffs = Vec::with_capacity(n);
        for c in 0..n {
            let column: Vec<f64> = (0..n_samples).map(|j| values[j * n + c]).collect();
            coeffs.push(spectral::fourier_coefficients(&column));
        }
        let profile = CurvatureProfile {
            n,
            rep: Rep::Table { n_samples, coeffs },
        };
        profile.check_positivity()?;
        Ok(profile)
    }

    /// Constant profile.
    pub fn constant(values: &[f64]) -> Result<Self> {
        Self::from_fourier(values.iter().map(|&v| FourierSeries::constant_value(v)).collect())
    }

    /// Number of curvature components `n` (the curve lives in `R^(n+1)`).
    #[inline]
    pub fn components(&self) -> usize {
        self.n
    }

    pub fn eval_component(&self, c: usize, t: f64) -> f64 {
        match &self.rep {
            Rep::Fourier(series) => series[c].eval(t),
            Rep::Table { n_samples, coeffs } => {
                let (re, im) = &coeffs[c];
                spectral::trig_interp_eval(re, im, *n_samples, 0.0, TAU, t)
            }
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (0..self.n).map(|c| self.eval_component(c, t)).collect()
    }

    /// Uniform samples over `[0, 2 pi)`, row-major `N x n`.
    pub fn sample(&self, n_samples: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_samples * self.n);
        for j in 0..n_samples {
            let t = TAU * j as f64 / n_samples as f64;
            for c in 0..self.n {
                out.push(self.eval_component(c, t));
            }
        }
        out
    }

    fn check_positivity(&self) -> Result<()> {
        if self.n == 1 {
            return Ok(());
        }
        for c in 0..self.n - 1 {
            for j in 0..POSITIVITY_GRID {
                let t = TAU * j as f64 / POSITIVITY_GRID as f64;
                let v = self.eval_component(c, t);
                if !(v > 0.0) {
                    return Err(Error::NonPositiveCurvature {
                        index: c,
                        value: v,
                        t: Some(t),
                    });
                }
            }
        }
        Ok(())
    }

    /// Componentwise sup-norm bound estimated on the positivity grid.
    pub fn sup_norm(&self) -> f64 {
        let mut max: f64 = 0.0;
        for j in 0..POSITIVITY_GRID {
            let t = TAU * j as f64 / POSITIVITY_GRID as f64;
            for c in 0..self.n {
                max = max.max(self.eval_component(c, t).abs());
            }
        }
        max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fourier_profile_evaluates_and_wraps() {
        let p = CurvatureProfile::from_fourier(vec![
            FourierSeries {
                constant: 1.0,
                cos: vec![],
                sin: vec![0.5],
            },
            FourierSeries {
                constant: 0.5,
                cos: vec![0.4],
                sin: vec![],
            },
        ])
        .unwrap();
        assert_eq!(p.components(), 2);
        let v = p.eval(0.3);
        assert!((v[0] - (1.0 + 0.5 * 0.3f64.sin())).abs() < 1e-15);
        assert!((v[1] - (0.5 + 0.4 * 0.3f64.cos())).abs() < 1e-15);
        for c in 0..2 {
            assert!((p.eval_component(c, 1.1) - p.eval_component(c, 1.1 + TAU)).abs() < 1e-12);
        }
    }

    #[test]
    fn positivity_is_enforced_on_leading_components() {
        let bad = CurvatureProfile::from_fourier(vec![
            FourierSeries {
                constant: 0.4,
                cos: vec![],
                sin: vec![0.5],
            },
            FourierSeries::constant_value(1.0),
        ]);
        assert!(matches!(
            bad,
            Err(Error::NonPositiveCurvature { index: 0, .. })
        ));
        // The last component may change sign freely.
        let ok = CurvatureProfile::from_fourier(vec![
            FourierSeries::constant_value(1.0),
            FourierSeries {
                constant: 0.0,
                cos: vec![],
                sin: vec![2.0],
            },
        ]);
        assert!(ok.is_ok());
        // And for n = 1 there is no constraint at all.
        let planar = CurvatureProfile::from_fourier(vec![FourierSeries {
            constant: 0.0,
            cos: vec![],
            sin: vec![3.0],
        }]);
        assert!(planar.is_ok());
    }

    #[test]
    fn table_profile_interpolates_trigonometrically() {
        let n_samples = 64;
        let mut values = Vec::new();
        for j in 0..n_samples {
            let t = TAU * j as f64 / n_samples as f64;
            values.push(2.0 + (2.0 * t).sin());
        }
        let p = CurvatureProfile::from_table(1, &values).unwrap();
        for j in 0..40 {
            let t = 0.03 + 0.15 * j as f64;
            assert!((p.eval_component(0, t) - (2.0 + (2.0 * t).sin())).abs() < 1e-11);
        }
    }
}
