//! The concentrating parametrization of the final closed curve.
//!
//! The loop consists of a short synthesized arc (carrying all the varying
//! curvature, compressed to tiny arclength) and a long bridge. The map from
//! the output circle parameter to loop arclength is `C^inf`, constant-speed
//! on the arc zone, and ramps up to the bridge speed through smoothstep
//! transitions that live inside the constant-curvature collars. Curvatures
//! are parametrization-free, so the ramps never show up in the measured
//! profile; they only decide where resolution is spent.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{F64Ext, TAU};
use crate::numerics::smoothstep;

/// Wrap an angle into `[0, 2 pi)`.
pub(crate) fn wrap(t: f64) -> f64 {
    t.rem_euclid(TAU)
}

/// Angular distance from `a` forward to `b` (in `[0, 2 pi)`).
pub(crate) fn forward_arc(a: f64, b: f64) -> f64 {
    wrap(b - a)
}

/// Unsigned circle distance.
pub(crate) fn circle_dist(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

/// `C^inf` monotone map from the output circle to loop arclength.
///
/// The bridge occupies the parameter arc `[mid_lo, mid_hi]` (the stitch
/// junction sits at `mid_hi`, the exact frame-matched junction at
/// `mid_lo`); the synthesized arc covers the complement at constant speed
/// `v_arc`. Speed ramps of width `ramp` start `margin` inside the bridge
/// zone at both ends.
#[derive(Debug, Clone)]
pub struct LoopMap {
    pub mid_lo: f64,
    pub mid_hi: f64,
    /// Arclength of the synthesized arc.
    pub arc_len: f64,
    /// Arclength (parameter duration) of the bridge.
    pub bridge_len: f64,
    /// Slow plateau speed.
    pub v_arc: f64,
    /// Fast plateau speed inside the bridge zone.
    pub v_bridge: f64,
    /// Slow margin inside the bridge zone at each end.
    pub margin: f64,
    /// Ramp width.
    pub ramp: f64,
    /// Quadrature grid over the bridge zone: cumulative `M` values.
    table_t: Vec<f64>,
    table_m: Vec<f64>,
}

impl LoopMap {
    pub fn new(
        mid_lo: f64,
        mid_hi: f64,
        arc_len: f64,
        bridge_len: f64,
        table_size: usize,
    ) -> Result<Self> {
        let mid_width = forward_arc(mid_lo, mid_hi);
        let arc_width = TAU - mid_width;
        if !(mid_width > 1e-4) || !(arc_width > 1e-2) {
            return Err(Error::invalid("degenerate parameter split"));
        }
        let v_arc = arc_len / arc_width;
        let margin = 0.08 * mid_width;
        let ramp = 0.10 * mid_width;

        // Solve the fast plateau speed so the bridge zone integrates to
        // exactly bridge_len under the same quadrature used for the table.
        let window = |t: f64| -> f64 {
            // 0 on the slow margins, 1 on the fast plateau.
            let x = forward_arc(mid_lo, t);
            let rise = smoothstep((x - margin) / ramp);
            let fall = smoothstep((mid_width - margin - x) / ramp);
            rise * fall
        };
        let quad_n = table_size.max(512);
        let h = mid_width / quad_n as f64;
        // Composite Simpson of the window over the bridge zone.
        let mut window_integral = 0.0;
        for j in 0..quad_n {
            let a = mid_lo + j as f64 * h;
            let w0 = window(a);
            let w1 = window(a + 0.5 * h);
            let w2 = window(a + h);
            window_integral += h / 6.0 * (w0 + 4.0 * w1 + w2);
        }
        let v_bridge = v_arc + (bridge_len - v_arc * mid_width) / window_integral;
        if !(v_bridge > 0.0) || !v_bridge.is_finite() {
            return Err(Error::invalid("bridge-zone speed solve failed"));
        }

        // Cumulative table of M over the bridge zone on a uniform grid,
        // Simpson per cell against the closed-form M'.
        let speed = |t: f64| v_arc + (v_bridge - v_arc) * window(t);
        let mut table_t = Vec::with_capacity(quad_n + 1);
        let mut table_m = Vec::with_capacity(quad_n + 1);
        let mut acc = arc_len;
        table_t.push(0.0);
        table_m.push(acc);
        for j in 0..quad_n {
            let a = mid_lo + j as f64 * h;
            let s0 = speed(a);
            let s1 = speed(a + 0.5 * h);
            let s2 = speed(a + h);
            acc += h / 6.0 * (s0 + 4.0 * s1 + s2);
            table_t.push((j + 1) as f64 * h);
            table_m.push(acc);
        }
        Ok(LoopMap {
            mid_lo,
            mid_hi,
            arc_len,
            bridge_len,
            v_arc,
            v_bridge,
            margin,
            ramp,
            table_t,
            table_m,
        })
    }

    /// Loop coordinate of circle parameter `t`: in `[0, arc_len)` on the
    /// synthesized arc (measured from `mid_hi`), in
    /// `[arc_len, arc_len + bridge_len)` on the bridge zone.
    pub fn eval(&self, t: f64) -> f64 {
        let mid_width = forward_arc(self.mid_lo, self.mid_hi);
        let from_lo = forward_arc(self.mid_lo, t);
        if from_lo < mid_width {
            // Bridge zone: table lookup with one Simpson correction step.
            let h = self.table_t[1] - self.table_t[0];
            let idx = ((from_lo / h) as usize).min(self.table_t.len() - 2);
            let a = self.table_t[idx];
            let dt = from_lo - a;
            let speed = |x: f64| {
                let rise = smoothstep((x - self.margin) / self.ramp);
                let fall = smoothstep((mid_width - self.margin - x) / self.ramp);
                self.v_arc + (self.v_bridge - self.v_arc) * rise * fall
            };
            let s0 = speed(a);
            let s1 = speed(a + 0.5 * dt);
            let s2 = speed(a + dt);
            self.table_m[idx] + dt / 6.0 * (s0 + 4.0 * s1 + s2)
        } else {
            // Synthesized arc: constant speed from mid_hi.
            let from_hi = forward_arc(self.mid_hi, t);
            self.v_arc * from_hi
        }
    }

    /// Local speed `dM/dt` at circle parameter `t`.
    pub fn speed(&self, t: f64) -> f64 {
        let mid_width = forward_arc(self.mid_lo, self.mid_hi);
        let from_lo = forward_arc(self.mid_lo, t);
        if from_lo < mid_width {
            let rise = smoothstep((from_lo - self.margin) / self.ramp);
            let fall = smoothstep((mid_width - self.margin - from_lo) / self.ramp);
            self.v_arc + (self.v_bridge - self.v_arc) * rise * fall
        } else {
            self.v_arc
        }
    }

    /// Total loop length.
    pub fn total(&self) -> f64 {
        self.arc_len + self.bridge_len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_is_monotone_and_hits_the_junctions() {
        let map = LoopMap::new(1.0, 1.3, 0.002, 150.0, 4096).unwrap();
        // The loop coordinate starts (wraps) at mid_hi; the arc ends where
        // the bridge zone begins.
        assert_eq!(map.eval(1.3), 0.0);
        let at_lo = map.eval(1.0 - 1e-13);
        assert!((at_lo - 0.002).abs() < 1e-6, "arc end lands at arc_len, got {at_lo}");
        let bridge_end = map.eval(1.3 - 1e-12);
        assert!((bridge_end - map.total()).abs() < 1e-6 * map.total());
        // Monotone along the circle starting at mid_hi.
        let mut prev = 0.0;
        let n = 20_000;
        for j in 1..n {
            let t = 1.3 + TAU * j as f64 / n as f64;
            let m = map.eval(wrap(t));
            if m + 1e-12 < prev {
                panic!("map not monotone at {t}: {m} < {prev}");
            }
            prev = m;
        }
        assert!((prev - map.total()).abs() < map.total() * 1e-6);
    }

    #[test]
    fn bridge_zone_integrates_to_the_bridge_length() {
        let map = LoopMap::new(5.2, 5.6, 0.001, 80.0, 4096).unwrap();
        let just_before_hi = map.eval(5.6 - 1e-12);
        assert!(
            (just_before_hi - map.total()).abs() < 1e-6 * map.total(),
            "bridge end {just_before_hi} vs total {}",
            map.total()
        );
        // Slow speed near both junctions.
        assert!((map.speed(5.2 + 1e-6) - map.v_arc).abs() < 1e-12);
        assert!((map.speed(5.6 - 1e-6) - map.v_arc).abs() < 1e-12);
        assert!(map.speed(5.4) > 100.0);
    }
}
