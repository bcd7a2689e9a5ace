//! Self-intersection detection and the perturbation-to-embedding pass.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frenet::{analyze_curve, SampledCurve};
use crate::math::{F64Ext, Rng64};

/// Spatial tolerance below which two non-neighbouring strands count as
/// intersecting.
pub const INTERSECTION_TOL: f64 = 1e-6;

/// A near-contact between two strands, reported by parameter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t_a: f64,
    pub t_b: f64,
    pub distance: f64,
}

/// Segment-pair sweep for self-intersections of a closed polyline.
///
/// Consecutive segments are grouped into chunks with bounding boxes; only
/// chunk pairs whose boxes come within tolerance are refined. Pairs whose
/// arclength separation (either way around) is below a locality floor are
/// skipped: nearby pieces of one strand are trivially close without being
/// intersections.
pub fn self_intersections(curve: &SampledCurve, tol: f64) -> Vec<Crossing> {
    let n = curve.len();
    let dim = curve.dim;
    // Cumulative arclength per sample (closed: wrap segment at the end).
    let mut cum = vec![0.0; n + 1];
    for j in 0..n {
        let next = (j + 1) % n;
        let mut d2 = 0.0;
        for c in 0..dim {
            let d = curve.points[next * dim + c] - curve.points[j * dim + c];
            d2 += d * d;
        }
        cum[j + 1] = cum[j] + d2.sqrt();
    }
    let total_len = cum[n];
    let base_locality = (64.0 * tol).max(1e-3 * total_len);

    const CHUNK: usize = 128;
    let chunk_count = n.div_ceil(CHUNK);
    // Bounding boxes per chunk (covering the chunk's segments, i.e. one
    // extra sample at the end).
    let mut boxes = vec![(vec![f64::INFINITY; dim], vec![f64::NEG_INFINITY; dim]); chunk_count];
    for (ci, b) in boxes.iter_mut().enumerate() {
        let start = ci * CHUNK;
        let end = ((ci + 1) * CHUNK).min(n);
        for j in start..=end {
            let p = curve.point(j % n);
            for c in 0..dim {
                b.0[c] = b.0[c].min(p[c]);
                b.1[c] = b.1[c].max(p[c]);
            }
        }
    }
    let box_gap = |a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)| -> f64 {
        let mut acc = 0.0;
        for c in 0..dim {
            let gap = (a.0[c] - b.1[c]).max(b.0[c] - a.1[c]).max(0.0);
            acc += gap * gap;
        }
        acc.sqrt()
    };

    let mut crossings = Vec::new();
    for ca in 0..chunk_count {
        for cb in ca..chunk_count {
            if box_gap(&boxes[ca], &boxes[cb]) > tol {
                continue;
            }
            let (a0, a1) = (ca * CHUNK, ((ca + 1) * CHUNK).min(n));
            let (b0, b1) = (cb * CHUNK, ((cb + 1) * CHUNK).min(n));
            for i in a0..a1 {
                let j_start = if ca == cb { i + 1 } else { b0 };
                for j in j_start..b1 {
                    // Arclength separation, shorter way around; the
                    // locality floor also excludes same-strand neighbours a
                    // few segments apart.
                    let m_i = 0.5 * (cum[i] + cum[i + 1]);
                    let m_j = 0.5 * (cum[j] + cum[j + 1]);
                    let len_i = cum[i + 1] - cum[i];
                    let len_j = cum[j + 1] - cum[j];
                    let sep = (m_j - m_i).abs().min(total_len - (m_j - m_i).abs());
                    if sep < base_locality.max(4.0 * (len_i + len_j)) {
                        continue;
                    }
                    let d = segment_distance(curve, i, j);
                    if d < tol {
                        crossings.push(Crossing {
                            t_a: curve.params[i],
                            t_b: curve.params[j],
                            distance: d,
                        });
                    }
                }
            }
        }
    }
    crossings
}

/// Distance between segments `(i, i+1)` and `(j, j+1)` of a closed polyline.
fn segment_distance(curve: &SampledCurve, i: usize, j: usize) -> f64 {
    let n = curve.len();
    let dim = curve.dim;
    let p1 = curve.point(i);
    let p2 = curve.point((i + 1) % n);
    let q1 = curve.point(j);
    let q2 = curve.point((j + 1) % n);
    // Closest points of two segments (clamped Gram solve).
    let mut d1 = vec![0.0; dim];
    let mut d2 = vec![0.0; dim];
    let mut r = vec![0.0; dim];
    for c in 0..dim {
        d1[c] = p2[c] - p1[c];
        d2[c] = q2[c] - q1[c];
        r[c] = p1[c] - q1[c];
    }
    let a: f64 = d1.iter().map(|x| x * x).sum();
    let b: f64 = d1.iter().zip(d2.iter()).map(|(x, y)| x * y).sum();
    let c2: f64 = d2.iter().map(|x| x * x).sum();
    let d: f64 = d1.iter().zip(r.iter()).map(|(x, y)| x * y).sum();
    let e: f64 = d2.iter().zip(r.iter()).map(|(x, y)| x * y).sum();
    let denom = a * c2 - b * b;
    let (mut s, mut t) = if denom.abs() > 1e-30 {
        (((b * e - c2 * d) / denom).clamp(0.0, 1.0), 0.0)
    } else {
        (0.0, 0.0)
    };
    // Refine t given s, then s given t (two passes of coordinate descent on
    // the convex quadratic; exact for interior optima, clamped otherwise).
    for _ in 0..2 {
        t = if c2 > 1e-30 {
            ((b * s + e) / c2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        s = if a > 1e-30 {
            ((b * t - d) / a).clamp(0.0, 1.0)
        } else {
            0.0
        };
    }
    let mut acc = 0.0;
    for c in 0..dim {
        let diff = p1[c] + s * d1[c] - (q1[c] + t * d2[c]);
        acc += diff * diff;
    }
    acc.sqrt()
}

/// Repair self-intersections by small smooth trigonometric perturbations.
///
/// Draws are deterministic under `seed`. The output is embedded (per the
/// segment sweep at the standard tolerance) and its curvature profile moved
/// by less than `eps_slack` componentwise, measured by re-analysis.
pub fn perturb_to_embedding(
    curve: &SampledCurve,
    eps_slack: f64,
    seed: u64,
) -> Result<(SampledCurve, usize)> {
    if curve.dim < 3 {
        return Err(Error::NotApplicable {
            detail: alloc::string::String::from(
                "planar curves are excluded from the embedding pass",
            ),
        });
    }
    if !curve.closed {
        return Err(Error::invalid("embedding pass expects a closed curve"));
    }
    let baseline = self_intersections(curve, INTERSECTION_TOL);
    if baseline.is_empty() {
        return Ok((curve.clone(), 0));
    }
    let base_apparatus = analyze_curve(curve)?;

    let n = curve.len();
    let dim = curve.dim;
    let order = dim; // decay exponent n+2 = dim+1 handled below
    let modes = 8usize;
    let mut rng = Rng64::new(seed ^ 0x9e3779b97f4a7c15);
    // Initial amplitude: a fraction of the slack against the curvature
    // scale; halved whenever a draw overshoots its curvature budget.
    let kappa_scale = base_apparatus
        .iter()
        .flat_map(|a| a.kappas.iter())
        .fold(0.0f64, |m, k| m.max(k.abs()))
        .max(1.0);
    let mut amplitude = eps_slack / (20.0 * kappa_scale);

    for draw in 1..=32 {
        // Smooth random displacement field.
        let mut coeffs = Vec::with_capacity(dim * modes * 2);
        for _ in 0..dim * modes * 2 {
            coeffs.push(rng.next_gaussian());
        }
        let mut points = curve.points.clone();
        for j in 0..n {
            let t = curve.params[j];
            for c in 0..dim {
                let mut delta = 0.0;
                for m in 1..=modes {
                    let w = amplitude / (1.0 + m as f64).powi(order as i32 + 2);
                    let a = coeffs[(c * modes + m - 1) * 2];
                    let b = coeffs[(c * modes + m - 1) * 2 + 1];
                    delta += w * (a * (m as f64 * t).cos() + b * (m as f64 * t).sin());
                }
                points[j * dim + c] += delta;
            }
        }
        let candidate = SampledCurve::new(dim, curve.params.clone(), points, true)?;
        if !self_intersections(&candidate, INTERSECTION_TOL).is_empty() {
            continue;
        }
        // Curvature drift must stay inside the slack.
        let apparatus = match analyze_curve(&candidate) {
            Ok(a) => a,
            Err(_) => continue,
        };
        let mut drift: f64 = 0.0;
        for (a, b) in apparatus.iter().zip(base_apparatus.iter()) {
            for (ka, kb) in a.kappas.iter().zip(b.kappas.iter()) {
                drift = drift.max((ka - kb).abs());
            }
        }
        if drift < eps_slack {
            return Ok((candidate, draw));
        }
        amplitude *= 0.5;
    }
    Err(Error::RetriesExhausted { draws: 32 })
}
