//! Quasi-periodic return search for helices.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::helix::HelixSpec;
use crate::math::{F64Ext, TAU};
use crate::numerics::linalg;

/// A near-return of a helix to its initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnHit {
    pub u: f64,
    /// Max over derivative orders `0..=m` of the euclidean gap to the data
    /// at zero.
    pub gap: f64,
}

/// Find the smallest parameter `u` in `(u_min, horizon]` at which the helix
/// together with its first `orders` derivatives is `delta`-close to its data
/// at zero.
///
/// Uniform coarse scan with step `(2 pi / b_max) / 64` starting at half the
/// shortest frequency period, followed by golden-section refinement of the
/// gap around candidate grid minima (return dips are narrower than the
/// grid, so minima within a few multiples of `delta` are polished before
/// acceptance). A drifting helix never returns and is rejected up front.
pub fn return_search(
    spec: &HelixSpec,
    delta: f64,
    orders: usize,
    horizon: f64,
) -> Result<ReturnHit> {
    if spec.drift_speed() > 1e-12 {
        return Err(Error::invalid(
            "return search needs a driftless helix; bend odd-dimensional ones first",
        ));
    }
    if spec.frequencies.is_empty() {
        return Err(Error::invalid("helix has no frequencies"));
    }
    let b_max = spec.frequencies.iter().cloned().fold(0.0, f64::max);
    let b_min = spec.frequencies.iter().cloned().fold(f64::INFINITY, f64::min);
    let _ = b_min;
    let u_min = core::f64::consts::PI / b_max;
    let step = (TAU / b_max) / 64.0;

    let reference = spec.eval(0.0, orders);
    let gap_at = |u: f64| -> f64 {
        let jets = spec.eval(u, orders);
        let mut gap: f64 = 0.0;
        for m in 0..=orders {
            gap = gap.max(linalg::dist(&jets[m], &reference[m]));
        }
        gap
    };

    // Scan for local minima of the grid gap; dips near a good return are
    // narrower than the grid step, so every candidate basin (grid minimum
    // below a few multiples of delta) is refined by golden section and the
    // first one whose refined gap beats delta wins.
    let mut best_gap = f64::INFINITY;
    let mut prev2 = f64::INFINITY;
    let mut prev = gap_at(u_min);
    let mut u = u_min + step;
    while u <= horizon {
        let gap = gap_at(u);
        best_gap = best_gap.min(gap);
        let candidate_basin = prev <= prev2 && prev <= gap && prev < 8.0 * delta;
        if candidate_basin || gap < delta {
            let center = if candidate_basin { u - step } else { u };
            let (u_ref, refined) = golden_refine(&gap_at, center - step, center + step);
            if refined < delta {
                return Ok(ReturnHit {
                    u: u_ref,
                    gap: refined,
                });
            }
            best_gap = best_gap.min(refined);
        }
        prev2 = prev;
        prev = gap;
        u += step;
    }
    Err(Error::NotFound {
        horizon,
        best_gap,
    })
}

fn golden_refine(gap_at: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = gap_at(x1);
    let mut f2 = gap_at(x2);
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = gap_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = gap_at(x2);
        }
    }
    let u_ref = 0.5 * (lo + hi);
    (u_ref, gap_at(u_ref))
}

/// Common period of the helix frequencies, when they are commensurate to
/// near machine precision: the smallest `T` with `b_l T` a multiple of
/// `2 pi` for every `l` (denominators up to 64).
pub(crate) fn commensurate_period(frequencies: &[f64]) -> Option<f64> {
    let b0 = frequencies[0];
    let mut lcm: u64 = 1;
    let mut nums: Vec<u64> = Vec::with_capacity(frequencies.len());
    for &b in frequencies {
        let ratio = b / b0;
        let (p, q) = best_rational(ratio, 64)?;
        if ((ratio - p as f64 / q as f64).abs()) > 1e-9 * ratio.max(1.0) {
            return None;
        }
        lcm = lcm / gcd(lcm, q) * q;
        nums.push(p);
    }
    let _ = nums;
    Some(TAU * lcm as f64 / b0)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Best rational approximation `p/q` with `q <= max_den` by continued
/// fractions.
pub(crate) fn best_rational(x: f64, max_den: u64) -> Option<(u64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut value = x;
    for _ in 0..64 {
        let a = value.floor();
        if a > u64::MAX as f64 / 2.0 {
            break;
        }
        let a_int = a as u64;
        let p2 = a_int.checked_mul(p1).and_then(|v| v.checked_add(p0));
        let q2 = a_int.checked_mul(q1).and_then(|v| v.checked_add(q0));
        let (Some(p2), Some(q2)) = (p2, q2) else { break };
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = value - a;
        if frac.abs() < 1e-15 {
            break;
        }
        value = 1.0 / frac;
    }
    if q1 == 0 {
        None
    } else {
        Some((p1, q1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::helix::helix_from_constants;
    use crate::numerics::Frame;
    use alloc::vec;

    /// Helix with prescribed frequencies, built directly (unit amplitudes).
    fn toy_spec(frequencies: &[f64]) -> HelixSpec {
        let k = frequencies.len();
        let dim = 2 * k;
        let mut plane_a = Vec::new();
        let mut plane_b = Vec::new();
        let amp = 1.0 / (k as f64).sqrt();
        for l in 0..k {
            let mut a = vec![0.0; dim];
            let mut b = vec![0.0; dim];
            a[2 * l] = amp;
            b[2 * l + 1] = amp;
            plane_a.push(a);
            plane_b.push(b);
        }
        HelixSpec {
            dim,
            kappas: vec![1.0; dim - 1],
            frequencies: frequencies.to_vec(),
            plane_a,
            plane_b,
            drift: None,
            anchor: vec![0.0; dim],
        }
    }

    #[test]
    fn commensurate_frequencies_return_at_the_period() {
        let spec = toy_spec(&[1.0, 2.0]);
        let hit = return_search(&spec, 1e-6, 3, 50.0).unwrap();
        assert!((hit.u - TAU).abs() < 1e-6, "u = {}", hit.u);
        assert!(hit.gap < 1e-12, "gap = {}", hit.gap);
    }

    #[test]
    fn golden_ratio_frequencies_return_within_tolerance() {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let spec = toy_spec(&[1.0, phi]);
        let delta = 1e-2;
        let hit = return_search(&spec, delta, 3, 12_000.0).unwrap();
        assert!(hit.gap < delta);
        // Brute-force oracle: no earlier grid point (step 1e-3) beats the
        // hit by the search's own criterion.
        let reference = spec.eval(0.0, 3);
        let mut u = core::f64::consts::PI / phi + 1e-3;
        let mut first_hit = None;
        while u <= hit.u + 1.0 {
            let jets = spec.eval(u, 3);
            let mut gap: f64 = 0.0;
            for m in 0..=3 {
                gap = gap.max(linalg::dist(&jets[m], &reference[m]));
            }
            if gap < delta {
                first_hit = Some(u);
                break;
            }
            u += 1e-3;
        }
        let brute = first_hit.expect("brute-force scan must find a return too");
        // The coarse grid step is ~0.1; the refined hit must be within one
        // grid cell of the true first crossing.
        assert!(
            (hit.u - brute).abs() < 0.2,
            "search hit {} vs brute {}",
            hit.u,
            brute
        );
    }

    #[test]
    fn zero_delta_is_never_found() {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let spec = toy_spec(&[1.0, phi]);
        assert!(matches!(
            return_search(&spec, 0.0, 3, 200.0),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn shrinking_delta_never_increases_the_gap() {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let spec = toy_spec(&[1.0, phi]);
        let mut prev = f64::INFINITY;
        for &delta in &[3e-1, 1e-1, 3e-2, 1e-2, 3e-3] {
            let hit = return_search(&spec, delta, 3, 5000.0).unwrap();
            assert!(
                hit.gap <= prev + 1e-15,
                "gap {} after {} at delta {}",
                hit.gap,
                prev,
                delta
            );
            prev = hit.gap;
        }
    }

    #[test]
    fn return_gap_is_reproducible_from_the_closed_form() {
        let spec = toy_spec(&[1.0, 2.0_f64.sqrt()]);
        let hit = return_search(&spec, 5e-2, 2, 300.0).unwrap();
        let reference = spec.eval(0.0, 2);
        let jets = spec.eval(hit.u, 2);
        let mut gap: f64 = 0.0;
        for m in 0..=2 {
            gap = gap.max(linalg::dist(&jets[m], &reference[m]));
        }
        assert_eq!(gap.to_bits(), hit.gap.to_bits());
    }

    #[test]
    fn drifting_helices_are_rejected() {
        let spec = helix_from_constants(&[1.0, 0.5], &[0.0; 3], &Frame::identity(3)).unwrap();
        assert!(return_search(&spec, 1e-2, 2, 100.0).is_err());
    }

    #[test]
    fn rational_approximation_finds_small_denominators() {
        assert_eq!(best_rational(2.0, 64), Some((2, 1)));
        assert_eq!(best_rational(1.5, 64), Some((3, 2)));
        let (p, q) = best_rational(0.333_333_333_333, 64).unwrap();
        assert_eq!((p, q), (1, 3));
        assert_eq!(commensurate_period(&[1.0, 2.0]), Some(TAU));
        let t = commensurate_period(&[2.0, 3.0]).unwrap();
        assert!((t - TAU).abs() < 1e-12);
        assert!(commensurate_period(&[1.0, (1.0 + 5.0f64.sqrt()) / 2.0]).is_none());
    }
}
