//! Bent drifting helices for odd ambient dimension.
//!
//! A helix with nonzero drift never returns to its initial data, so no
//! bridge can be grown from it directly. The fix: carry the helix axis
//! around a smooth planar detour (straight lead-in, two blended half-turns
//! of radius `r` joined by a backward leg, straight lead-out) that returns
//! to the starting line exactly, while the rotating part of the motion is
//! transported along the detour with the rotation-minimizing normal. The
//! resulting curve is an exact drifting helix near both ends, closes up
//! exactly when the fast phases align, and its curvatures deviate from the
//! constants by `O(1/r)` - measured, never assumed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::helix::jet::{smoothstep_jet, Jet, VecJet};
use crate::helix::{unit_drift, HelixSpec};
use crate::math::F64Ext;
use crate::numerics::linalg;

/// Planar hairpin detour, unit speed in its own parameter, starting at the
/// origin heading `+x` and ending back at the origin heading `+x`.
#[derive(Debug, Clone)]
pub struct Hairpin {
    /// Straight leg length.
    pub leg: f64,
    /// Blend zone width.
    pub blend: f64,
    /// Turn radius.
    pub radius: f64,
    /// Total parameter length `2 pi r + 4 leg + 2 blend`.
    pub total: f64,
}

impl Hairpin {
    pub fn new(leg: f64, blend: f64, radius: f64) -> Result<Self> {
        if !(leg > 0.0 && blend > 0.0 && radius > 0.0) {
            return Err(Error::invalid("hairpin parameters must be positive"));
        }
        if core::f64::consts::PI * radius < 2.0 * blend {
            return Err(Error::invalid("hairpin blend zones overlap the turns"));
        }
        if 2.0 * leg < blend {
            return Err(Error::invalid("hairpin backward leg shorter than a blend zone"));
        }
        let total = 2.0 * core::f64::consts::PI * radius + 4.0 * leg + 2.0 * blend;
        Ok(Hairpin {
            leg,
            blend,
            radius,
            total,
        })
    }

    fn mid1(&self) -> f64 {
        self.leg + 0.5 * self.blend
    }
    fn mid2(&self) -> f64 {
        self.mid1() + core::f64::consts::PI * self.radius
    }
    fn mid3(&self) -> f64 {
        self.mid2() + 2.0 * self.leg + self.blend
    }
    fn mid4(&self) -> f64 {
        self.mid3() + core::f64::consts::PI * self.radius
    }
    /// `x` coordinate of the backward tangency point.
    fn x3(&self) -> f64 {
        self.mid1() - 2.0 * self.leg - self.blend
    }

    /// Position jets `(x, y)` of the detour at the (jet-valued) parameter.
    ///
    /// The parameter jet must have a scalar value inside `[0, total]`.
    pub fn eval(&self, s: &Jet) -> (Jet, Jet) {
        let order = s.order;
        let sv = s.value();
        let w = self.blend;
        let line1 = |s: &Jet| (*s, Jet::constant(0.0, order));
        let arc1 = |s: &Jet| {
            let phi = s.sub(&Jet::constant(self.mid1(), order)).scale(1.0 / self.radius);
            let (sin, cos) = phi.sin_cos();
            (
                sin.scale(self.radius).add(&Jet::constant(self.mid1(), order)),
                Jet::constant(self.radius, order).sub(&cos.scale(self.radius)),
            )
        };
        let line2 = |s: &Jet| {
            (
                Jet::constant(self.mid1() + self.mid2(), order).sub(s),
                Jet::constant(2.0 * self.radius, order),
            )
        };
        let arc2 = |s: &Jet| {
            let phi = s.sub(&Jet::constant(self.mid3(), order)).scale(1.0 / self.radius);
            let (sin, cos) = phi.sin_cos();
            (
                Jet::constant(self.x3(), order).sub(&sin.scale(self.radius)),
                Jet::constant(self.radius, order).add(&cos.scale(self.radius)),
            )
        };
        let line3 = |s: &Jet| {
            (
                s.add(&Jet::constant(self.x3() - self.mid4(), order)),
                Jet::constant(0.0, order),
            )
        };
        let blend = |s: &Jet,
                     start: f64,
                     a: &dyn Fn(&Jet) -> (Jet, Jet),
                     b: &dyn Fn(&Jet) -> (Jet, Jet)| {
            let x = s.sub(&Jet::constant(start, order)).scale(1.0 / w);
            let psi = smoothstep_jet(&x);
            let (ax, ay) = a(s);
            let (bx, by) = b(s);
            let one = Jet::constant(1.0, order);
            let om = one.sub(&psi);
            (
                om.mul(&ax).add(&psi.mul(&bx)),
                om.mul(&ay).add(&psi.mul(&by)),
            )
        };

        let b1 = self.leg; // blend 1 start
        let b2 = self.mid2() - 0.5 * w;
        let b3 = self.mid3() - 0.5 * w;
        let b4 = self.mid4() - 0.5 * w;
        if sv < b1 {
            line1(s)
        } else if sv < b1 + w {
            blend(s, b1, &line1, &arc1)
        } else if sv < b2 {
            arc1(s)
        } else if sv < b2 + w {
            blend(s, b2, &arc1, &line2)
        } else if sv < b3 {
            line2(s)
        } else if sv < b3 + w {
            blend(s, b3, &line2, &arc2)
        } else if sv < b4 {
            arc2(s)
        } else if sv < b4 + w {
            blend(s, b4, &arc2, &line3)
        } else {
            line3(s)
        }
    }

    /// Unit tangent and left normal jets at the (jet-valued) parameter.
    ///
    /// Computed from one extra derivative order of the position jets.
    pub fn frame(&self, s: &Jet) -> ((Jet, Jet), (Jet, Jet)) {
        let mut s_up = *s;
        s_up.order = (s.order + 1).min(crate::helix::jet::JET_LEN - 1);
        let (x, y) = self.eval(&s_up);
        let dx = differentiate(&x, s.order);
        let dy = differentiate(&y, s.order);
        let norm = dx.mul(&dx).add(&dy.mul(&dy)).sqrt();
        let tx = dx.div(&norm);
        let ty = dy.div(&norm);
        // Left normal: rot90(t) = (-ty, tx).
        ((tx, ty), (ty.scale(-1.0), tx))
    }
}

/// d/dt of a jet (with respect to the jet's own expansion variable).
fn differentiate(j: &Jet, order: usize) -> Jet {
    let mut out = Jet::constant(0.0, order);
    for k in 0..=order {
        out.c[k] = (k + 1) as f64 * j.c[k + 1];
    }
    out
}

/// A drifting helix whose axis follows a hairpin detour.
#[derive(Debug, Clone)]
pub struct BentHelix {
    /// The unbent closed-form helix (drift present).
    pub spec: HelixSpec,
    /// Drift speed `|A0|`.
    pub sigma: f64,
    /// Unit drift axis (world coordinates).
    pub axis: Vec<f64>,
    /// Unit lateral bend direction: the `A` direction of the reused plane.
    pub lateral: Vec<f64>,
    /// Index of the plane whose cosine direction is transported.
    pub reused_plane: usize,
    /// Amplitude of the reused plane.
    pub amplitude: f64,
    pub path: Hairpin,
    /// Total parameter duration `path.total / sigma`.
    pub duration: f64,
}

impl BentHelix {
    /// Bend `spec` around a hairpin with the given geometry so that the
    /// total duration is an exact multiple of `fast_period`.
    pub fn new(
        spec: HelixSpec,
        radius: f64,
        blend: f64,
        fast_period: f64,
        min_leg: f64,
    ) -> Result<Self> {
        let (axis, sigma) = unit_drift(&spec)
            .ok_or_else(|| Error::invalid("bent helix needs a nonzero drift"))?;
        // Reuse the largest-amplitude plane for the lateral direction.
        let mut reused_plane = 0;
        let mut best = -1.0;
        for (l, a) in spec.plane_a.iter().enumerate() {
            let amp = linalg::norm(a);
            if amp > best {
                best = amp;
                reused_plane = l;
            }
        }
        let amplitude = best;
        let lateral: Vec<f64> = spec.plane_a[reused_plane]
            .iter()
            .map(|x| x / amplitude)
            .collect();

        // Choose the leg length so that sigma * duration is a whole number
        // of fast periods.
        let base_total = 2.0 * core::f64::consts::PI * radius + 2.0 * blend;
        let min_total = base_total + 4.0 * min_leg.max(blend);
        let cycles = (min_total / (sigma * fast_period)).ceil().max(1.0);
        let total = cycles * sigma * fast_period;
        let leg = (total - base_total) / 4.0;
        let path = Hairpin::new(leg, blend, radius)?;
        let duration = path.total / sigma;
        Ok(BentHelix {
            spec,
            sigma,
            axis,
            lateral,
            reused_plane,
            amplitude,
            path,
            duration,
        })
    }

    /// Jet of the bent curve at `t`.
    pub fn eval_jet(&self, t: f64, order: usize) -> VecJet {
        let mut out = VecJet::from_constant(&self.spec.anchor, order);
        // Axis detour: s = sigma t.
        let mut s = Jet::constant(self.sigma * t, order);
        s.c[1] = self.sigma;
        let (px, py) = self.path.eval(&s);
        out.add_scaled_direction(&px, &self.axis);
        out.add_scaled_direction(&py, &self.lateral);
        // Fast planes.
        let tj = Jet::variable(t, order);
        for (l, &b) in self.spec.frequencies.iter().enumerate() {
            let (sin, cos) = tj.scale(b).sin_cos();
            if l == self.reused_plane {
                // The cosine direction rides the transported normal.
                let (_tangent, (nx, ny)) = self.path.frame(&s);
                let cr = cos.scale(self.amplitude);
                out.add_scaled_direction(&cr.mul(&nx), &self.axis);
                out.add_scaled_direction(&cr.mul(&ny), &self.lateral);
                out.add_scaled_direction(&sin, &self.spec.plane_b[l]);
            } else {
                out.add_scaled_direction(&cos, &self.spec.plane_a[l]);
                out.add_scaled_direction(&sin, &self.spec.plane_b[l]);
            }
        }
        out
    }

    /// Point and derivatives `0..=orders` at `t`.
    pub fn eval(&self, t: f64, orders: usize) -> Vec<Vec<f64>> {
        let jet = self.eval_jet(t, orders);
        (0..=orders).map(|m| jet.derivative(m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frenet::{analyze_curve, SampledCurve};
    use crate::helix::helix_from_constants;
    use crate::math::TAU;
    use crate::numerics::Frame;
    use alloc::vec;

    fn sample_bent(bent: &BentHelix, count: usize) -> SampledCurve {
        let params: Vec<f64> = (0..count)
            .map(|j| bent.duration * j as f64 / (count - 1) as f64)
            .collect();
        let mut points = Vec::with_capacity(count * bent.spec.dim);
        for &t in &params {
            points.extend_from_slice(&bent.eval(t, 0)[0]);
        }
        SampledCurve::new(bent.spec.dim, params, points, false).unwrap()
    }

    #[test]
    fn hairpin_returns_to_origin_heading_forward() {
        let path = Hairpin::new(5.0, 3.0, 20.0).unwrap();
        let order = 3;
        let end = Jet::variable(path.total, order);
        let (x, y) = path.eval(&end);
        assert!(x.value().abs() < 1e-12, "x end {}", x.value());
        assert!(y.value().abs() < 1e-12, "y end {}", y.value());
        assert!((x.derivative(1) - 1.0).abs() < 1e-12);
        assert!(y.derivative(1).abs() < 1e-12);
        // Start is the identity line.
        let start = Jet::variable(0.3, order);
        let (x, y) = path.eval(&start);
        assert!((x.value() - 0.3).abs() < 1e-15);
        assert_eq!(y.value(), 0.0);
    }

    #[test]
    fn hairpin_speed_stays_near_unity() {
        let path = Hairpin::new(5.0, 4.0, 25.0).unwrap();
        let mut min_speed = f64::INFINITY;
        let mut max_speed: f64 = 0.0;
        for j in 0..4000 {
            let s = path.total * (j as f64 + 0.5) / 4000.0;
            let (x, y) = path.eval(&Jet::variable(s, 1));
            let speed = (x.derivative(1).powi(2) + y.derivative(1).powi(2)).sqrt();
            min_speed = min_speed.min(speed);
            max_speed = max_speed.max(speed);
        }
        assert!(min_speed > 0.9, "min speed {min_speed}");
        assert!(max_speed < 1.1, "max speed {max_speed}");
    }

    #[test]
    fn bent_helix_closes_and_keeps_curvatures_near_constants() {
        let kappas = [1.0, 0.9];
        let spec = helix_from_constants(&kappas, &[0.0; 3], &Frame::identity(3)).unwrap();
        let b1 = spec.frequencies[0];
        let fast_period = TAU / b1;
        let bent = BentHelix::new(spec, 60.0, 8.0, fast_period, 12.0).unwrap();
        // Exact phase closure: jets at the two ends agree.
        let jets0 = bent.eval(0.0, 3);
        let jets1 = bent.eval(bent.duration, 3);
        for m in 0..=3 {
            let gap = linalg::dist(&jets0[m], &jets1[m]);
            assert!(gap < 1e-9, "order {m} closure gap {gap}");
        }
        // Ends are the exact unbent helix.
        let unbent = helix_from_constants(&kappas, &[0.0; 3], &Frame::identity(3)).unwrap();
        for m in 0..=3 {
            let gap = linalg::dist(&bent.eval(0.5, m)[m], &unbent.eval(0.5, m)[m]);
            assert!(gap < 1e-11, "lead-in order {m} differs by {gap}");
        }
        // Curvatures stay near the constants along the detour.
        let curve = sample_bent(&bent, 20_000);
        let apparatus = analyze_curve(&curve).unwrap();
        let mut max_dev: f64 = 0.0;
        for a in &apparatus {
            for (k, t) in a.kappas.iter().zip(kappas.iter()) {
                max_dev = max_dev.max((k - t).abs());
            }
        }
        assert!(max_dev < 0.06, "curvature deviation {max_dev}");
    }

    #[test]
    fn doubling_the_radius_shrinks_the_bend_deviation() {
        let kappas = [1.0, 0.9];
        let measure = |radius: f64| -> f64 {
            let spec = helix_from_constants(&kappas, &[0.0; 3], &Frame::identity(3)).unwrap();
            let fast_period = TAU / spec.frequencies[0];
            let blend = (core::f64::consts::PI * radius / 16.0).clamp(4.0, 64.0);
            let bent = BentHelix::new(spec, radius, blend, fast_period, 12.0).unwrap();
            let curve = sample_bent(&bent, 30_000);
            let apparatus = analyze_curve(&curve).unwrap();
            let mut max_dev: f64 = 0.0;
            for a in &apparatus {
                for (k, t) in a.kappas.iter().zip(kappas.iter()) {
                    max_dev = max_dev.max((k - t).abs());
                }
            }
            max_dev
        };
        let coarse = measure(40.0);
        let fine = measure(80.0);
        assert!(fine < coarse, "bend deviation must shrink with radius");
        assert!(fine < 0.05, "deviation {fine} at radius 80");
    }
}
