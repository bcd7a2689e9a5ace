//! The standard compactly supported mollifier and window-local smoothing of
//! sampled curves.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::F64Ext;

/// Unnormalized standard bump `exp(-1/(1-x^2))` on `(-1, 1)`, zero outside.
///
/// Exactly zero outside the open interval, so blends built from it are the
/// identity outside their window bit-for-bit.
pub fn smooth_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Monotone `C^inf` step: 0 for `x <= 0`, 1 for `x >= 1`, flat to all orders
/// at both ends.
pub fn smoothstep(x: f64) -> f64 {
    fn sigma(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = sigma(x);
        let b = sigma(1.0 - x);
        a / (a + b)
    }
}

/// The standard mollifier of width `h`: `eta(x) = c/h * exp(-1/(1-(x/h)^2))`
/// on `|x| < h`, normalized to unit integral.
#[derive(Debug, Clone)]
pub struct Mollifier {
    width: f64,
    normalization: f64,
}

impl Mollifier {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::invalid("mollifier width must be positive and finite"));
        }
        Ok(Mollifier {
            width,
            normalization: 1.0 / bump_mass(),
        })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Kernel value at offset `x`; support is `[-width, width]`.
    pub fn eval(&self, x: f64) -> f64 {
        self.normalization / self.width * smooth_bump(x / self.width)
    }

    /// Numeric integral of the kernel over its support (Simpson), used by
    /// the unit-mass invariant test.
    pub fn integral(&self) -> f64 {
        let m = 1 << 14;
        let step = 2.0 * self.width / m as f64;
        let mut acc = self.eval(-self.width) + self.eval(self.width);
        for j in 1..m {
            let x = -self.width + j as f64 * step;
            acc += self.eval(x) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * step / 3.0
    }
}

/// Integral of the unnormalized bump over `(-1, 1)`, computed once.
fn bump_mass() -> f64 {
    // Simpson on a grid fine enough for ~1e-15; the integrand is C^inf with
    // all derivatives vanishing at the endpoints, so convergence is fast.
    let m = 1 << 14;
    let step = 2.0 / m as f64;
    let mut acc = 0.0;
    for j in 1..m {
        let x = -1.0 + j as f64 * step;
        acc += smooth_bump(x) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * step / 3.0
}

/// Mollify vector-valued periodic samples inside a window around `center`.
///
/// `values` is row-major `N x dim` over a uniform closed grid covering
/// `period` (endpoint excluded, first sample at parameter `t0`). The output
/// equals the input bit-for-bit outside `[center - 2h, center + 2h]`; on
/// `[center - h, center + h]` it is the discrete mollifier convolution of
/// the input, and the two regimes are joined by a `C^inf` blend.
pub fn mollify_blend(
    values: &[f64],
    dim: usize,
    t0: f64,
    period: f64,
    center: f64,
    moll: &Mollifier,
) -> Result<Vec<f64>> {
    if dim == 0 || values.len() % dim != 0 {
        return Err(Error::invalid("values length must be a multiple of dim"));
    }
    let n = values.len() / dim;
    let h = moll.width();
    if 4.0 * h >= period {
        return Err(Error::WidthTooLarge {
            width: h,
            limit: period / 4.0,
        });
    }
    let dt = period / n as f64;
    let radius = (h / dt).floor() as usize;
    if radius < 2 {
        return Err(Error::InsufficientResolution {
            required: (2.0 * h / period * n as f64).ceil() as usize + n,
            actual: n,
        });
    }

    // Discrete kernel, normalized to unit sum so constants are preserved
    // exactly.
    let mut kernel = Vec::with_capacity(2 * radius + 1);
    let mut mass = 0.0;
    for j in -(radius as isize)..=(radius as isize) {
        let w = moll.eval(j as f64 * dt);
        kernel.push(w);
        mass += w;
    }
    for w in kernel.iter_mut() {
        *w /= mass;
    }

    let mut out = values.to_vec();
    for i in 0..n {
        let t = t0 + i as f64 * dt;
        let mut d = (t - center).rem_euclid(period);
        if d > period / 2.0 {
            d = period - d;
        }
        if d >= 2.0 * h {
            continue;
        }
        // chi = 1 on |d| <= h, smooth descent to 0 at |d| = 2h.
        let chi = 1.0 - smoothstep((d - h) / h);
        if chi == 0.0 {
            continue;
        }
        for c in 0..dim {
            let mut conv = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let j = k as isize - radius as isize;
                let idx = (i as isize - j).rem_euclid(n as isize) as usize;
                conv += w * values[idx * dim + c];
            }
            let f = values[i * dim + c];
            out[i * dim + c] = f + chi * (conv - f);
        }
    }
    Ok(out)
}
