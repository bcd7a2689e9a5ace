//! Spectral differentiation of periodic samples via trigonometric
//! interpolation.
//!
//! Radix-2 FFT for power-of-two lengths, Bluestein's chirp transform for
//! everything else; exact (to rounding) for band-limited inputs resolved by
//! the grid.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{F64Ext, TAU};

/// In-place iterative radix-2 FFT. `re`/`im` length must be a power of two.
fn fft_pow2(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    debug_assert!(n.is_power_of_two());
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        let (wr, wi) = (ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut cr = 1.0;
            let mut ci = 0.0;
            for k in 0..len / 2 {
                let ur = re[i + k];
                let ui = im[i + k];
                let vr = re[i + k + len / 2] * cr - im[i + k + len / 2] * ci;
                let vi = re[i + k + len / 2] * ci + im[i + k + len / 2] * cr;
                re[i + k] = ur + vr;
                im[i + k] = ui + vi;
                re[i + k + len / 2] = ur - vr;
                im[i + k + len / 2] = ui - vi;
                let ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
            i += len;
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward DFT of arbitrary length (Bluestein when not a power of two).
fn dft(re: &mut Vec<f64>, im: &mut Vec<f64>, inverse: bool) {
    let n = re.len();
    if n.is_power_of_two() {
        fft_pow2(re, im, inverse);
        return;
    }
    // Bluestein: x_k * chirp_k convolved with conjugate chirp.
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut ar = vec![0.0; m];
    let mut ai = vec![0.0; m];
    let mut br = vec![0.0; m];
    let mut bi = vec![0.0; m];
    let mut chirp_r = vec![0.0; n];
    let mut chirp_i = vec![0.0; n];
    for k in 0..n {
        // angle = pi * k^2 / n, reduced mod 2n to keep the argument small.
        let q = ((k as u64 * k as u64) % (2 * n as u64)) as f64;
        let ang = sign * core::f64::consts::PI * q / n as f64;
        chirp_r[k] = ang.cos();
        chirp_i[k] = ang.sin();
        ar[k] = re[k] * chirp_r[k] - im[k] * chirp_i[k];
        ai[k] = re[k] * chirp_i[k] + im[k] * chirp_r[k];
        br[k] = chirp_r[k];
        bi[k] = -chirp_i[k];
        if k != 0 {
            br[m - k] = chirp_r[k];
            bi[m - k] = -chirp_i[k];
        }
    }
    fft_pow2(&mut ar, &mut ai, false);
    fft_pow2(&mut br, &mut bi, false);
    for k in 0..m {
        let r = ar[k] * br[k] - ai[k] * bi[k];
        let i = ar[k] * bi[k] + ai[k] * br[k];
        ar[k] = r;
        ai[k] = i;
    }
    fft_pow2(&mut ar, &mut ai, true);
    for k in 0..n {
        let r = ar[k] * chirp_r[k] - ai[k] * chirp_i[k];
        let i = ar[k] * chirp_i[k] + ai[k] * chirp_r[k];
        re[k] = r;
        im[k] = i;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
}

/// Spectral derivative of order `order` of `samples` covering one full
/// period of length `period` on a uniform closed grid (endpoint excluded).
///
/// Exact for band-limited inputs resolved by the grid; the Nyquist mode is
/// dropped for odd derivative orders.
pub fn periodic_derivative(samples: &[f64], order: usize, period: f64) -> Result<Vec<f64>> {
    let n = samples.len();
    let required = 4 * (order + 1);
    if n < required {
        return Err(Error::InsufficientResolution {
            required,
            actual: n,
        });
    }
    if !(period > 0.0) {
        return Err(Error::invalid("period must be positive"));
    }
    if order == 0 {
        return Ok(samples.to_vec());
    }
    let mut re: Vec<f64> = samples.to_vec();
    let mut im = vec![0.0; n];
    dft(&mut re, &mut im, false);
    let base = TAU / period;
    let half = n / 2;
    for k in 0..n {
        // Signed frequency index of bin k.
        let freq = if k <= n / 2 {
            k as isize
        } else {
            k as isize - n as isize
        };
        if n % 2 == 0 && k == half {
            // Nyquist bin: (i w)^order is real for even orders, dropped for odd.
            if order % 2 == 1 {
                re[k] = 0.0;
                im[k] = 0.0;
            } else {
                let w = base * half as f64;
                let factor = w.powi(order as i32) * if order % 4 == 0 { 1.0 } else { -1.0 };
                re[k] *= factor;
                im[k] *= factor;
            }
            continue;
        }
        let w = base * freq as f64;
        // Multiply by (i w)^order.
        let magnitude = w.powi(order as i32);
        let (fr, fi) = match order % 4 {
            0 => (magnitude, 0.0),
            1 => (0.0, magnitude),
            2 => (-magnitude, 0.0),
            _ => (0.0, -magnitude),
        };
        let r = re[k] * fr - im[k] * fi;
        let i = re[k] * fi + im[k] * fr;
        re[k] = r;
        im[k] = i;
    }
    dft(&mut re, &mut im, true);
    Ok(re)
}

/// First derivative of periodic samples, upsampled onto a grid `factor`
/// times finer by zero-padding the spectrum.
pub(crate) fn upsampled_derivative(samples: &[f64], period: f64, factor: usize) -> Vec<f64> {
    let n = samples.len();
    let m = (n * factor).next_power_of_two();
    let mut re: Vec<f64> = samples.to_vec();
    let mut im = vec![0.0; n];
    dft(&mut re, &mut im, false);
    let base = TAU / period;
    let mut re_up = vec![0.0; m];
    let mut im_up = vec![0.0; m];
    let half = n / 2;
    for k in 0..n {
        let freq = if k <= half { k as isize } else { k as isize - n as isize };
        if n % 2 == 0 && k == half {
            continue; // Nyquist dropped for odd derivative order
        }
        let w = base * freq as f64;
        let (r, i) = (-im[k] * w, re[k] * w);
        let dest = if freq >= 0 { k } else { m - (n - k) };
        re_up[dest] = r * (m as f64 / n as f64);
        im_up[dest] = i * (m as f64 / n as f64);
    }
    fft_pow2(&mut re_up, &mut im_up, true);
    re_up
}

/// Fourier coefficients `(re, im)` of real periodic samples (bin order as
/// produced by the DFT, unnormalized).
pub(crate) fn fourier_coefficients(samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut re: Vec<f64> = samples.to_vec();
    let mut im = vec![0.0; samples.len()];
    dft(&mut re, &mut im, false);
    (re, im)
}

/// Evaluate the trigonometric interpolant of `samples` (period `period`,
/// uniform closed grid starting at `t0`) at an arbitrary parameter.
pub(crate) fn trig_interp_eval(
    coeff_re: &[f64],
    coeff_im: &[f64],
    n: usize,
    t0: f64,
    period: f64,
    t: f64,
) -> f64 {
    let x = (t - t0) / period * TAU;
    let mut acc = coeff_re[0];
    let half = n / 2;
    for k in 1..=(n - 1) / 2 {
        let (c, s) = ((k as f64 * x).cos(), (k as f64 * x).sin());
        acc += 2.0 * (coeff_re[k] * c - coeff_im[k] * s);
    }
    if n % 2 == 0 {
        acc += coeff_re[half] * (half as f64 * x).cos();
    }
    acc / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|j| TAU * j as f64 / n as f64).collect()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let n = 256;
        let samples: Vec<f64> = grid(n).iter().map(|t| t.sin()).collect();
        let d = periodic_derivative(&samples, 1, TAU).unwrap();
        for (t, v) in grid(n).iter().zip(d.iter()) {
            assert!((v - t.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let samples = vec![3.25; 64];
        for order in 1..=4 {
            let d = periodic_derivative(&samples, order, TAU).unwrap();
            for v in &d {
                assert!(v.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn second_derivative_of_sin3t() {
        let n = 64;
        let samples: Vec<f64> = grid(n).iter().map(|t| (3.0 * t).sin()).collect();
        let d = periodic_derivative(&samples, 2, TAU).unwrap();
        for (t, v) in grid(n).iter().zip(d.iter()) {
            assert!((v + 9.0 * (3.0 * t).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn resolution_floor_is_enforced() {
        let samples = vec![0.0; 11];
        assert!(matches!(
            periodic_derivative(&samples, 2, TAU),
            Err(Error::InsufficientResolution { required: 12, .. })
        ));
    }

    #[test]
    fn arbitrary_length_grid_matches_analytic() {
        // Bluestein path: prime length.
        let n = 97;
        let ts: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let samples: Vec<f64> = ts.iter().map(|t| (2.0 * t).cos() + 0.5 * t.sin()).collect();
        let d = periodic_derivative(&samples, 1, TAU).unwrap();
        for (t, v) in ts.iter().zip(d.iter()) {
            let expect = -2.0 * (2.0 * t).sin() + 0.5 * t.cos();
            assert!((v - expect).abs() < 1e-9, "err {} at t={}", (v - expect).abs(), t);
        }
    }

    #[test]
    fn scaled_period_rescales_derivative() {
        let n = 128;
        let period = 4.0;
        let samples: Vec<f64> = (0..n)
            .map(|j| (TAU * j as f64 / n as f64).sin())
            .collect();
        let d = periodic_derivative(&samples, 1, period).unwrap();
        for (j, v) in d.iter().enumerate() {
            let t = TAU * j as f64 / n as f64;
            let expect = t.cos() * TAU / period;
            assert!((v - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn trig_interp_reproduces_band_limited_signal() {
        let n = 64;
        let samples: Vec<f64> = grid(n)
            .iter()
            .map(|t| 1.0 + (2.0 * t).sin() - 0.3 * (5.0 * t).cos())
            .collect();
        let (re, im) = fourier_coefficients(&samples);
        for j in 0..50 {
            let t = 0.017 + j as f64 * 0.11;
            let expect = 1.0 + (2.0 * t).sin() - 0.3 * (5.0 * t).cos();
            let got = trig_interp_eval(&re, &im, n, 0.0, TAU, t);
            assert!((got - expect).abs() < 1e-11);
        }
    }
}
