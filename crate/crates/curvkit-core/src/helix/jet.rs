//! Truncated Taylor-series (jet) arithmetic.
//!
//! Bridges and bent helices are built from smoothstep blends whose exact
//! higher derivatives are needed both for evaluation and for endpoint-gap
//! verification. Propagating jets through the closed-form expressions gives
//! those derivatives to machine precision without symbolic differentiation.

use crate::math::F64Ext;

/// Maximum number of stored Taylor coefficients (orders `0..=JET_LEN-1`);
/// covers curves up to the design envelope `dim <= 16` with one extra order.
pub const JET_LEN: usize = 18;

/// Taylor coefficients of a scalar function at a point: `c[k]` is the `k`-th
/// derivative divided by `k!`. Operations truncate at `order`.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub order: usize,
    pub c: [f64; JET_LEN],
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        debug_assert!(order < JET_LEN);
        let mut c = [0.0; JET_LEN];
        c[0] = value;
        Jet { order, c }
    }

    /// The identity function `t` expanded at `t0`.
    ///
    /// The linear coefficient is stored even at order 0 so callers may bump
    /// the order for internal differentiation.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut j = Jet::constant(t0, order);
        j.c[1] = 1.0;
        j
    }

    /// Affine function `(t - t0) / w` expanded at `t`.
    pub fn affine(t: f64, t0: f64, w: f64, order: usize) -> Self {
        let mut j = Jet::constant((t - t0) / w, order);
        j.c[1] = 1.0 / w;
        j
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative (not coefficient).
    pub fn derivative(&self, k: usize) -> f64 {
        let mut factorial = 1.0;
        for i in 1..=k {
            factorial *= i as f64;
        }
        self.c[k] * factorial
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = *self;
        for k in 0..=self.order {
            out.c[k] += other.c[k];
        }
        out
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut out = *self;
        for k in 0..=self.order {
            out.c[k] -= other.c[k];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = *self;
        for k in 0..=self.order {
            out.c[k] *= s;
        }
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut out = Jet::constant(0.0, self.order);
        for k in 0..=self.order {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.c[j] * other.c[k - j];
            }
            out.c[k] = acc;
        }
        out
    }

    /// Reciprocal `1 / self`; requires a nonzero value part.
    pub fn recip(&self) -> Jet {
        let mut out = Jet::constant(0.0, self.order);
        let inv = 1.0 / self.c[0];
        out.c[0] = inv;
        for k in 1..=self.order {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.c[j] * out.c[k - j];
            }
            out.c[k] = -inv * acc;
        }
        out
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn sqrt(&self) -> Jet {
        let mut out = Jet::constant(0.0, self.order);
        out.c[0] = self.c[0].sqrt();
        let inv2 = 0.5 / out.c[0];
        for k in 1..=self.order {
            let mut acc = 0.0;
            for j in 1..k {
                acc += out.c[j] * out.c[k - j];
            }
            out.c[k] = (self.c[k] - acc) * inv2;
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let mut out = Jet::constant(0.0, self.order);
        out.c[0] = self.c[0].exp();
        for k in 1..=self.order {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * out.c[k - j];
            }
            out.c[k] = acc / k as f64;
        }
        out
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let mut s = Jet::constant(0.0, self.order);
        let mut c = Jet::constant(0.0, self.order);
        s.c[0] = self.c[0].sin();
        c.c[0] = self.c[0].cos();
        for k in 1..=self.order {
            let mut sa = 0.0;
            let mut ca = 0.0;
            for j in 1..=k {
                sa += j as f64 * self.c[j] * c.c[k - j];
                ca += j as f64 * self.c[j] * s.c[k - j];
            }
            s.c[k] = sa / k as f64;
            c.c[k] = -ca / k as f64;
        }
        (s, c)
    }
}

/// Jet of the `C^inf` smoothstep (0 for `x <= 0`, 1 for `x >= 1`), given the
/// jet of its argument.
pub fn smoothstep_jet(x: &Jet) -> Jet {
    if x.value() <= 0.0 {
        Jet::constant(0.0, x.order)
    } else if x.value() >= 1.0 {
        Jet::constant(1.0, x.order)
    } else {
        // sigma(x) = exp(-1/x); S = sigma(x) / (sigma(x) + sigma(1-x)).
        let sig = x.recip().scale(-1.0).exp();
        let one_minus = Jet::constant(1.0, x.order).sub(x);
        let sig_bar = one_minus.recip().scale(-1.0).exp();
        sig.div(&sig.add(&sig_bar))
    }
}

/// Jet-valued vector in `R^dim`: one scalar jet per coordinate.
#[derive(Debug, Clone)]
pub struct VecJet {
    pub coords: alloc::vec::Vec<Jet>,
}

impl VecJet {
    pub fn zeros(dim: usize, order: usize) -> Self {
        VecJet {
            coords: alloc::vec![Jet::constant(0.0, order); dim],
        }
    }

    pub fn from_constant(v: &[f64], order: usize) -> Self {
        VecJet {
            coords: v.iter().map(|&x| Jet::constant(x, order)).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &VecJet) {
        for (a, b) in self.coords.iter_mut().zip(other.coords.iter()) {
            *a = a.add(b);
        }
    }

    /// `self += jet * direction` for a constant direction vector.
    pub fn add_scaled_direction(&mut self, jet: &Jet, direction: &[f64]) {
        for (a, &d) in self.coords.iter_mut().zip(direction.iter()) {
            *a = a.add(&jet.scale(d));
        }
    }

    /// `self += jet * vecjet` componentwise product with a scalar jet.
    pub fn add_scaled_vecjet(&mut self, jet: &Jet, v: &VecJet) {
        for (a, b) in self.coords.iter_mut().zip(v.coords.iter()) {
            *a = a.add(&jet.mul(b));
        }
    }

    /// Extract derivative order `k` as a plain vector.
    pub fn derivative(&self, k: usize) -> alloc::vec::Vec<f64> {
        self.coords.iter().map(|j| j.derivative(k)).collect()
    }
}
