//! Float helpers routed through `libm` so the crate stays `no_std`.

pub(crate) const TAU: f64 = core::f64::consts::TAU;

pub(crate) trait F64Ext {
    fn sqrt(self) -> f64;
    fn sin(self) -> f64;
    fn cos(self) -> f64;
    fn exp(self) -> f64;
    fn ln(self) -> f64;
    fn floor(self) -> f64;
    fn ceil(self) -> f64;
    fn powi(self, n: i32) -> f64;
    /// Euclidean remainder in `[0, rhs)` for positive `rhs`.
    fn rem_euclid(self, rhs: f64) -> f64;
}

impl F64Ext for f64 {
    #[inline]
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    #[inline]
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    #[inline]
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    #[inline]
    fn ln(self) -> f64 {
        libm::log(self)
    }
    #[inline]
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    #[inline]
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    #[inline]
    fn powi(self, n: i32) -> f64 {
        let mut out = 1.0;
        let mut base = if n < 0 { 1.0 / self } else { self };
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                out *= base;
            }
            base *= base;
            e >>= 1;
        }
        out
    }
    #[inline]
    fn rem_euclid(self, rhs: f64) -> f64 {
        let r = self - libm::floor(self / rhs) * rhs;
        if r >= rhs {
            r - rhs
        } else {
            r
        }
    }
}

/// Deterministic 64-bit generator (splitmix64) with a Gaussian helper.
///
/// Small enough to keep the crate free of RNG dependencies; the embedding
/// post-pass only needs a reproducible stream of standard normals.
#[derive(Debug, Clone)]
pub(crate) struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `(0, 1]`.
    pub fn next_unit(&mut self) -> f64 {
        let x = self.next_u64() >> 11;
        (x as f64 + 1.0) / 9_007_199_254_740_992.0
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u = self.next_unit();
        let v = self.next_unit();
        (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rem_euclid_wraps_into_period() {
        assert!(((-0.5f64).rem_euclid(TAU) - (TAU - 0.5)).abs() < 1e-15);
        assert!((7.0f64).rem_euclid(TAU) - (7.0 - TAU) < 1e-15);
    }

    #[test]
    fn gaussian_stream_is_deterministic() {
        let mut a = Rng64::new(42);
        let mut b = Rng64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_gaussian().to_bits(), b.next_gaussian().to_bits());
        }
    }

    #[test]
    fn gaussian_moments_are_plausible() {
        let mut rng = Rng64::new(7);
        let n = 40_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let g = rng.next_gaussian();
            sum += g;
            sumsq += g * g;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
