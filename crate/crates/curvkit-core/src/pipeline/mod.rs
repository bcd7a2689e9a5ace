//! End-to-end construction of a closed curve whose curvature profile stays
//! within a requested tolerance of a given curvature-like function, plus the
//! independent verifier and the embedding post-pass.
//!
//! The construction: pick a parameter `t0` where the profile's last
//! component is largest and replace the profile near `t0` by a constant
//! vector `k` (a sup-norm change below the modification budget). All the
//! remaining variation is synthesized into an arc of tiny arclength; a long
//! near-constant-curvature bridge closes the loop through one quasi-period
//! of the `k`-helix. Junctions sit inside constant-curvature collars: one is
//! frame-matched exactly, the other is rotated into exact contact and then
//! smoothed by a mollifier pass. Curvatures do not depend on parametrization,
//! so the output is sampled directly in the target parameter, fast across
//! the bridge and slow across the arc.

mod embed;
mod param;

pub use embed::{perturb_to_embedding, self_intersections, Crossing, INTERSECTION_TOL};
pub use param::LoopMap;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frenet::analyze::fd_weights;
use crate::frenet::{
    analyze_curve, synthesize_on_grid, CircleMap, CurvatureProfile, SampledCurve,
};
use crate::helix::ret::commensurate_period;
use crate::helix::{bridge_with, Bridge, BridgeOptions};
use crate::math::{F64Ext, TAU};
use crate::numerics::{
    build_frenet_matrix, eigen_structure, linalg, mollify_blend, smoothstep, Frame, Mollifier,
};
use param::{circle_dist, forward_arc, wrap};

/// Default split of the tolerance across the three construction stages.
pub const DEFAULT_BUDGET_FRACTIONS: (f64, f64, f64) = (0.25, 0.5, 0.25);

/// Absolute error budgets for the construction stages; they sum to less
/// than the total tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSplit {
    pub modify: f64,
    pub bridge: f64,
    pub stitch: f64,
}

/// The bookkeeping for one approximation run: the arc `U` where the profile
/// is replaced by the constant `k`, the nested collar and bridge arcs, the
/// arclength budget for the synthesized piece, and the stitch parameter.
#[derive(Debug, Clone)]
pub struct ApproximationPlan {
    pub eps: f64,
    pub budget: BudgetSplit,
    /// Parameter where the last profile component is largest.
    pub t0: f64,
    /// The constant curvature vector (last component adjusted away from
    /// zero, and nudged to make the helix frequencies commensurate when
    /// possible).
    pub kappas: Vec<f64>,
    /// Edges of `U` (the profile equals `k` within the modification budget
    /// on `U`).
    pub u_lo: f64,
    pub u_hi: f64,
    /// Edges of the inner collar arc on which the modified profile is
    /// exactly `k`.
    pub core_lo: f64,
    pub core_hi: f64,
    /// Edges of the bridge arc.
    pub mid_lo: f64,
    pub mid_hi: f64,
    /// Stitch parameter (= `mid_hi`).
    pub tau: f64,
    /// Arclength budget for the synthesized arc.
    pub delta: f64,
    /// Common period of the helix frequencies, when arranged.
    pub fast_period: Option<f64>,
}

impl ApproximationPlan {
    /// Blend factor of the modified profile: 0 where it equals `k`
    /// (inside the core), 1 where it equals the original (outside `U`).
    pub fn ramp(&self, t: f64) -> f64 {
        let d = signed_offset(t, self.t0);
        if d >= 0.0 {
            let core = forward_arc(self.t0, self.core_hi);
            let edge = forward_arc(self.t0, self.u_hi);
            smoothstep((d - core) / (edge - core).max(1e-12))
        } else {
            let core = forward_arc(self.core_lo, self.t0);
            let edge = forward_arc(self.u_lo, self.t0);
            smoothstep((-d - core) / (edge - core).max(1e-12))
        }
    }

    /// Modified profile value at `t`.
    pub fn modified(&self, s: &CurvatureProfile, t: f64) -> Vec<f64> {
        let ramp = self.ramp(t);
        let mut v = s.eval(t);
        for (vi, ki) in v.iter_mut().zip(self.kappas.iter()) {
            *vi = ki + ramp * (*vi - ki);
        }
        v
    }

    /// Width of the bridge arc.
    pub fn mid_width(&self) -> f64 {
        forward_arc(self.mid_lo, self.mid_hi)
    }
}

/// Signed circle offset of `t` from `center`, in `(-pi, pi]`.
fn signed_offset(t: f64, center: f64) -> f64 {
    let d = wrap(t - center);
    if d > core::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// Choose the constant arc, budgets and curvature constants for a run.
pub fn choose_plan(s: &CurvatureProfile, eps: f64) -> Result<ApproximationPlan> {
    choose_plan_with(s, eps, DEFAULT_BUDGET_FRACTIONS)
}

/// [`choose_plan`] with an explicit budget split (used by retries).
pub fn choose_plan_with(
    s: &CurvatureProfile,
    eps: f64,
    fractions: (f64, f64, f64),
) -> Result<ApproximationPlan> {
    if !(eps > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = s.components();
    let budget = BudgetSplit {
        modify: fractions.0 * eps,
        bridge: fractions.1 * eps,
        stitch: fractions.2 * eps,
    };

    // t0 maximizes the magnitude of the last component.
    let grid = 2048usize;
    let mut t0 = 0.0;
    let mut best = f64::NEG_INFINITY;
    for j in 0..grid {
        let t = TAU * j as f64 / grid as f64;
        let v = s.eval_component(n - 1, t).abs();
        if v > best {
            best = v;
            t0 = t;
        }
    }

    // The constant vector.
    let mut kappas = s.eval(t0);
    if kappas[n - 1].abs() < eps / 4.0 {
        // Force the last component away from zero, sign of the mean.
        let mut mean = 0.0;
        for j in 0..grid {
            mean += s.eval_component(n - 1, TAU * j as f64 / grid as f64);
        }
        let sign = if mean >= 0.0 { 1.0 } else { -1.0 };
        kappas[n - 1] = sign * eps / 4.0;
    }

    // Nudge the last component so the helix frequencies become commensurate
    // (exactly periodic helices make the bridge closure exact). The nudge
    // must stay well inside the modification budget.
    let margin = (0.2 * budget.modify).min(kappas[n - 1].abs() * 0.5);
    let fast_period = rationalize_frequencies(&mut kappas, margin)?;

    // Expand U from t0 while the profile stays within the modification
    // budget of k. The boundary is admitted non-strictly: the forced
    // eps/4 last-component convention sits exactly on it.
    let tol = budget.modify * (1.0 + 1e-9);
    let step = TAU / grid as f64;
    let within = |t: f64| -> bool {
        let v = s.eval(t);
        v.iter()
            .zip(kappas.iter())
            .all(|(a, k)| (a - k).abs() <= tol)
    };
    let max_half = (TAU - 0.35) / 2.0;
    let mut w_plus: f64 = 0.0;
    while w_plus + step < max_half && within(t0 + w_plus + step) {
        w_plus += step;
    }
    let mut w_minus: f64 = 0.0;
    while w_minus + step < max_half && within(t0 - w_minus - step) {
        w_minus += step;
    }
    let min_half = 0.012;
    if w_plus < min_half || w_minus < min_half {
        return Err(Error::BudgetExceeded {
            stage: "plan",
            detail: format!(
                "profile varies too fast near t0 = {t0:.4} for a modification budget of {:.3e}",
                budget.modify
            ),
        });
    }

    let u_lo = wrap(t0 - w_minus);
    let u_hi = wrap(t0 + w_plus);
    let core_lo = wrap(t0 - 0.8 * w_minus);
    let core_hi = wrap(t0 + 0.8 * w_plus);
    let mid_lo = wrap(t0 - 0.4 * w_minus);
    let mid_hi = wrap(t0 + 0.4 * w_plus);

    // Initial arclength budget for the synthesized arc: comfortably inside
    // the admissible endpoint gap of the bridge.
    let delta = (crate::helix::admissible_gap(budget.bridge) * 0.4).min(0.02);

    Ok(ApproximationPlan {
        eps,
        budget,
        t0,
        kappas,
        u_lo,
        u_hi,
        core_lo,
        core_hi,
        mid_lo,
        mid_hi,
        tau: mid_hi,
        delta,
        fast_period,
    })
}

/// Nudge the last curvature so the frequency ratios become rational with
/// small denominators; returns the resulting common period.
///
/// Works on the single frequency pair case (ambient dimension 4 or 5);
/// higher dimensions fall back to quasi-periodic return search.
fn rationalize_frequencies(kappas: &mut [f64], margin: f64) -> Result<Option<f64>> {
    let freqs = |k: &[f64]| -> Result<Vec<f64>> {
        let m = build_frenet_matrix(k)?;
        Ok(eigen_structure(&m)?.frequencies)
    };
    let base = freqs(kappas)?;
    if base.len() < 2 {
        return Ok(Some(TAU / base[0]));
    }
    if let Some(t) = commensurate_period(&base) {
        return Ok(Some(t));
    }
    if base.len() > 2 || margin <= 0.0 {
        return Ok(None);
    }
    // Secant solve on the last curvature for ratio = p/q.
    let ratio0 = base[1] / base[0];
    let Some((p, q)) = crate::helix::ret::best_rational(ratio0, 48) else {
        return Ok(None);
    };
    let target = p as f64 / q as f64;
    let n = kappas.len();
    let k0 = kappas[n - 1];
    let g = |kn: f64| -> Result<f64> {
        let mut k = kappas.to_vec();
        k[n - 1] = kn;
        let f = freqs(&k)?;
        Ok(f[1] / f[0] - target)
    };
    let mut a = k0;
    let mut fa = g(a)?;
    let mut b = k0 + 0.5 * margin * if fa > 0.0 { -1.0 } else { 1.0 };
    let mut fb = g(b)?;
    for _ in 0..60 {
        if (fb - fa).abs() < 1e-300 {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        if (c - k0).abs() > margin || c.signum() != k0.signum() {
            return Ok(None);
        }
        a = b;
        fa = fb;
        b = c;
        fb = g(b)?;
        if fb.abs() < 1e-13 {
            break;
        }
    }
    if fb.abs() > 1e-11 {
        return Ok(None);
    }
    kappas[n - 1] = b;
    let final_freqs = freqs(kappas)?;
    Ok(commensurate_period(&final_freqs))
}

/// Build the concentrated arc: a unit-speed curve of length `plan.delta`
/// whose curvatures run through the modified profile over the complement of
/// the bridge arc, together with the concentrating circle map.
///
/// The circle map normalizes the loop parameter against a provisional
/// bridge duration; the full pipeline recomputes it once the actual bridge
/// exists.
pub fn concentrate(
    plan: &ApproximationPlan,
    s: &CurvatureProfile,
) -> Result<(CircleMap, SampledCurve)> {
    let dim = s.components() + 1;
    let steps = 4096usize;
    let (points, _frames) = synthesize_arc(plan, s, steps)?;
    let params: Vec<f64> = (0..=steps)
        .map(|j| plan.delta * j as f64 / steps as f64)
        .collect();
    let gamma = SampledCurve::new(dim, params, points, false)?;

    // Provisional loop map for the returned reparametrization: the bridge
    // duration is a nominal multiple of the slowest helix period until the
    // actual bridge exists.
    let k = build_frenet_matrix(&plan.kappas)?;
    let es = eigen_structure(&k)?;
    let b_min = es.frequencies.iter().cloned().fold(f64::INFINITY, f64::min);
    let u_nominal = (4.0 * TAU / b_min).max(12.0);
    let map = LoopMap::new(plan.mid_lo, plan.mid_hi, plan.delta, u_nominal, 4096)?;
    let total = map.total();
    // Lift of the normalized loop position: monotone, q(t + 2 pi) = q + 2 pi.
    // The loop coordinate wraps at tau, so the branch above tau gains a turn.
    // Resolution tracks the speed-ramp width so the sampled map stays a
    // diffeomorphism under trigonometric interpolation.
    let ramp = 0.10 * plan.mid_width();
    let count = ((TAU * 40.0 / ramp).ceil() as usize)
        .next_power_of_two()
        .clamp(8192, 1 << 17);
    let mut q_samples = Vec::with_capacity(count);
    for j in 0..count {
        let t = TAU * j as f64 / count as f64;
        let raw = TAU * map.eval(t) / total;
        let value = if t >= plan.tau { raw + TAU } else { raw };
        q_samples.push(value);
    }
    let base = (q_samples[0] / TAU).floor() * TAU;
    for qv in q_samples.iter_mut() {
        *qv -= base;
    }
    let q = CircleMap::from_samples(&q_samples)?;
    Ok((q, gamma))
}

/// Integrate the concentrated arc on a uniform grid, returning positions
/// and frames.
fn synthesize_arc(
    plan: &ApproximationPlan,
    s: &CurvatureProfile,
    steps: usize,
) -> Result<(Vec<f64>, Vec<Frame>)> {
    let dim = s.components() + 1;
    let grid: Vec<f64> = (0..=steps)
        .map(|j| plan.delta * j as f64 / steps as f64)
        .collect();
    let arc_width = TAU - plan.mid_width();
    let v_arc = plan.delta / arc_width;
    let kappas_at = |sigma: f64| {
        let t = wrap(plan.tau + sigma / v_arc);
        plan.modified(s, t)
    };
    synthesize_on_grid(kappas_at, &vec![0.0; dim], &Frame::identity(dim), &grid)
}

/// How the embedding clause was handled.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingStatus {
    /// Detector not run (verification-only reports).
    NotChecked,
    /// No self-intersections found.
    Embedded,
    /// Crossings removed by the randomized perturbation pass.
    Repaired { draws: usize },
    /// Planar case: detection ran, but the perturbation pass does not apply
    /// in the plane; the curve is returned as-is with this flag.
    PlanarSkipped,
}

/// Internal measurements of one construction run.
#[derive(Debug, Clone)]
pub struct ConstructionLog {
    /// Sup-norm of the profile modification.
    pub stage_modify: f64,
    /// Bridge curvature deviation from the constants.
    pub stage_bridge: f64,
    /// Max deviation measured inside the stitch window.
    pub stage_stitch: f64,
    /// Raw jet gaps at the stitch point before the closing rotation,
    /// orders `0..=n+1`.
    pub pre_closure_gaps: Vec<f64>,
    pub gamma_length: f64,
    pub bridge_duration: f64,
    pub bend_radius: Option<f64>,
    pub samples: usize,
    pub mollifier_width: f64,
    pub retries: usize,
}

/// Verification result: every quantity is recomputed from the output curve
/// alone.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub eps: f64,
    /// Componentwise sup deviation `|kappa_i - s_i|`.
    pub max_curvature_deviation: Vec<f64>,
    pub max_deviation_overall: f64,
    /// Wrap-smoothness gaps for derivative orders `0..=n+1`, measured by
    /// one-sided extrapolation at the slowest sample of the curve.
    pub closure_gaps: Vec<f64>,
    /// Max frame orthonormality residual.
    pub frame_orthonormality: f64,
    pub self_intersections: Vec<Crossing>,
    pub passed: bool,
    pub embedding: EmbeddingStatus,
    /// Filled by `approximate`; absent for standalone verification.
    pub construction: Option<ConstructionLog>,
}

/// Verify a closed curve against a curvature-like function.
///
/// `passed` requires the componentwise deviation below `eps`, the position
/// closure gap below 1e-9 and the frame residual below 1e-8.
pub fn verify(
    curve: &SampledCurve,
    s: &CurvatureProfile,
    eps: f64,
) -> Result<VerificationReport> {
    if !curve.closed {
        return Err(Error::invalid("verification requires a closed curve"));
    }
    let n = s.components();
    if curve.dim != n + 1 {
        return Err(Error::invalid("curve dimension does not match the profile"));
    }
    let apparatus = analyze_curve(curve)?;
    let mut per_component = vec![0.0f64; n];
    let mut frame_resid: f64 = 0.0;
    for a in &apparatus {
        let target = s.eval(a.t);
        for (i, (k, want)) in a.kappas.iter().zip(target.iter()).enumerate() {
            per_component[i] = per_component[i].max((k - want).abs());
        }
        frame_resid = frame_resid.max(a.frame.orthonormality_residual());
        frame_resid = frame_resid.max((a.frame.det() - 1.0).abs());
    }
    let overall = per_component.iter().cloned().fold(0.0, f64::max);
    let closure_gaps = wrap_smoothness_gaps(curve, &apparatus, n + 2);
    let crossings = self_intersections(curve, INTERSECTION_TOL);
    let passed = overall < eps && closure_gaps[0] < 1e-9 && frame_resid < 1e-8;
    Ok(VerificationReport {
        eps,
        max_curvature_deviation: per_component,
        max_deviation_overall: overall,
        closure_gaps,
        frame_orthonormality: frame_resid,
        self_intersections: crossings,
        passed,
        embedding: EmbeddingStatus::NotChecked,
        construction: None,
    })
}

/// Wrap-smoothness gaps of a closed sampled curve: roll the samples so the
/// seam sits at the slowest sample, then compare one-sided extrapolations
/// of orders `0..max_order` from both sides of the seam.
fn wrap_smoothness_gaps(
    curve: &SampledCurve,
    apparatus: &[crate::frenet::FrenetApparatus],
    max_order: usize,
) -> Vec<f64> {
    let count = curve.len();
    let dim = curve.dim;
    let dt = curve.spacing();
    // Seam at the slowest point keeps the extrapolation stencils away from
    // high-derivative zones.
    let mut roll = 0;
    let mut slowest = f64::INFINITY;
    for (j, a) in apparatus.iter().enumerate() {
        if a.speed < slowest {
            slowest = a.speed;
            roll = j;
        }
    }
    let stencil = 10usize.min(count / 4);
    let nodes: Vec<f64> = (0..stencil).map(|i| i as f64 * dt).collect();
    // Backward side: last `stencil` samples before the seam, extrapolated
    // one step past their window; forward side: first `stencil` samples
    // from the seam, evaluated at their left edge.
    let w_end = fd_weights(stencil as f64 * dt, &nodes, max_order);
    let w_start = fd_weights(0.0, &nodes, max_order);
    let mut gaps = Vec::with_capacity(max_order + 1);
    for order in 0..=max_order {
        let mut gap2 = 0.0;
        for c in 0..dim {
            let mut from_end = 0.0;
            let mut from_start = 0.0;
            for i in 0..stencil {
                let j_end = (roll + count - stencil + i) % count;
                let j_start = (roll + i) % count;
                from_end += w_end[order][i] * curve.points[j_end * dim + c];
                from_start += w_start[order][i] * curve.points[j_start * dim + c];
            }
            gap2 += (from_end - from_start) * (from_end - from_start);
        }
        gaps.push(gap2.sqrt());
    }
    gaps
}

/// Options for [`approximate_with`].
#[derive(Debug, Clone)]
pub struct ApproximateOptions {
    /// Seed for the embedding repair draws.
    pub seed: u64,
    /// Hard cap on output samples.
    pub max_samples: usize,
    /// Run the self-intersection detector and repair pass.
    pub embed: bool,
    /// Override the initial arclength budget of the synthesized arc.
    pub delta: Option<f64>,
    /// Override the budget split fractions.
    pub budget_fractions: Option<(f64, f64, f64)>,
}

impl Default for ApproximateOptions {
    fn default() -> Self {
        ApproximateOptions {
            seed: 0,
            max_samples: 1 << 20,
            embed: true,
            delta: None,
            budget_fractions: None,
        }
    }
}

/// Construct a closed curve whose curvature profile is within `eps` of `s`
/// at every parameter, with the verification report of the final output.
pub fn approximate(
    s: &CurvatureProfile,
    eps: f64,
) -> Result<(SampledCurve, VerificationReport)> {
    approximate_with(s, eps, &ApproximateOptions::default())
}

/// [`approximate`] with explicit options.
pub fn approximate_with(
    s: &CurvatureProfile,
    eps: f64,
    opts: &ApproximateOptions,
) -> Result<(SampledCurve, VerificationReport)> {
    let fractions = opts.budget_fractions.unwrap_or(DEFAULT_BUDGET_FRACTIONS);
    let mut plan = choose_plan_with(s, eps, fractions)?;
    if let Some(d) = opts.delta {
        plan.delta = d;
    }

    let mut delta = plan.delta;
    let mut h_fraction = 1.0f64;
    let mut resolution_boost = 0u32;
    let mut rebalanced = false;
    let mut last_err: Option<Error> = None;

    for retry in 0..10 {
        plan.delta = delta;
        match build_once(&plan, s, eps, opts, h_fraction, resolution_boost, retry) {
            Ok((curve, report)) => return Ok((curve, report)),
            Err(BuildFailure::Stitch(e)) => {
                last_err = Some(e);
                h_fraction *= 0.5;
            }
            Err(BuildFailure::Bridge(e)) => {
                last_err = Some(e);
                delta *= 0.5;
                if !rebalanced {
                    // Rebalance toward the failing stage once.
                    let f = (0.2, 0.6, 0.2);
                    if let Ok(p) = choose_plan_with(s, eps, f) {
                        let keep_delta = delta;
                        plan = p;
                        delta = keep_delta.min(plan.delta);
                    }
                    rebalanced = true;
                }
            }
            Err(BuildFailure::Resolution(e)) => {
                last_err = Some(e);
                if (1usize << (13 + resolution_boost + 1)) <= opts.max_samples {
                    resolution_boost += 1;
                } else {
                    delta *= 0.5;
                }
            }
            Err(BuildFailure::Fatal(e)) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::BudgetExceeded {
        stage: "approximate",
        detail: String::from("retry ladder exhausted"),
    }))
}

enum BuildFailure {
    Stitch(Error),
    Bridge(Error),
    Resolution(Error),
    Fatal(Error),
}

#[allow(clippy::too_many_arguments)]
fn build_once(
    plan: &ApproximationPlan,
    s: &CurvatureProfile,
    eps: f64,
    opts: &ApproximateOptions,
    h_fraction: f64,
    resolution_boost: u32,
    retries: usize,
) -> core::result::Result<(SampledCurve, VerificationReport), BuildFailure> {
    let n = s.components();
    let dim = n + 1;
    let mid_width = plan.mid_width();
    let arc_width = TAU - mid_width;
    let v_arc = plan.delta / arc_width;

    // Preliminary integration of the arc for its endpoint data.
    let prelim_steps = 16_384usize;
    let (prelim_points, prelim_frames) =
        synthesize_arc(plan, s, prelim_steps).map_err(BuildFailure::Fatal)?;
    let arc_end: Vec<f64> = prelim_points[prelim_steps * dim..].to_vec();
    let arc_end_frame = prelim_frames[prelim_steps].clone();
    let origin = vec![0.0; dim];

    // The bridge from the arc's end back to its start, far collar aligned
    // onto the arc's initial apparatus.
    let bridge_opts = BridgeOptions {
        fast_period: plan.fast_period,
        target_end: Some((origin.clone(), Frame::identity(dim))),
        ..BridgeOptions::default()
    };
    let bridge = match bridge_with(
        &arc_end,
        &origin,
        &arc_end_frame,
        &plan.kappas,
        plan.budget.bridge,
        &bridge_opts,
    ) {
        Ok(b) => b,
        Err(e @ Error::GapTooLarge { .. })
        | Err(e @ Error::BudgetExceeded { .. })
        | Err(e @ Error::NotFound { .. }) => return Err(BuildFailure::Bridge(e)),
        Err(e) => return Err(BuildFailure::Fatal(e)),
    };
    let u = bridge.u;

    // Raw jet gaps at the stitch point before the closing rotation.
    let pre_closure_gaps: Vec<f64> = {
        let mut unaligned = bridge.clone();
        unaligned.alignment = None;
        let jets_end = unaligned.eval(u, n + 1);
        let arc_start_jets = arc_start_jets(plan, s, dim, n + 1).map_err(BuildFailure::Fatal)?;
        (0..=n + 1)
            .map(|m| linalg::dist(&jets_end[m], &arc_start_jets[m]))
            .collect()
    };

    // Output resolution.
    let b_max = bridge_b_max(&bridge);
    let margin = 0.08 * mid_width;
    let ramp = 0.10 * mid_width;
    let v_bridge_est = u / (mid_width - 2.0 * (margin + 0.5 * ramp));
    let fast_wavelength = TAU / (b_max * v_bridge_est);
    let mut dt_req = fast_wavelength / 14.0;
    dt_req = dt_req.min(ramp / 10.0);
    dt_req = dt_req.min(arc_width / 4096.0);
    let h_moll = (TAU / 64.0 * h_fraction)
        .min(0.45 * margin)
        .min(0.45 * forward_arc(plan.mid_hi, plan.core_hi));
    dt_req = dt_req.min(h_moll / 8.0);
    let mut samples = ((TAU / dt_req).ceil() as usize)
        .next_power_of_two()
        .max(1 << 13)
        << resolution_boost;
    if samples > opts.max_samples {
        if (TAU / (opts.max_samples as f64)) < h_moll / 4.0 {
            samples = opts.max_samples;
        } else {
            return Err(BuildFailure::Resolution(Error::BudgetExceeded {
                stage: "resolution",
                detail: format!(
                    "needs {samples} samples > cap {}; profile arc too narrow",
                    opts.max_samples
                ),
            }));
        }
    }

    let map = LoopMap::new(plan.mid_lo, plan.mid_hi, plan.delta, u, samples.min(1 << 16))
        .map_err(BuildFailure::Fatal)?;

    // Assemble the loop on the uniform output grid.
    let mut points = vec![0.0; samples * dim];
    let mut arc_order: Vec<(f64, usize)> = Vec::new();
    for j in 0..samples {
        let t = TAU * j as f64 / samples as f64;
        let from_lo = forward_arc(plan.mid_lo, t);
        if from_lo < mid_width {
            let sigma = (map.eval(t) - plan.delta).clamp(0.0, u);
            let p = bridge.eval(sigma, 0);
            points[j * dim..(j + 1) * dim].copy_from_slice(&p[0]);
        } else {
            arc_order.push((forward_arc(plan.mid_hi, t), j));
        }
    }
    arc_order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    {
        let mut grid = Vec::with_capacity(arc_order.len() + 1);
        grid.push(0.0);
        for (from_hi, _) in &arc_order {
            grid.push(v_arc * from_hi);
        }
        let kappas_at = |sigma: f64| {
            let t = wrap(plan.tau + sigma / v_arc);
            plan.modified(s, t)
        };
        let (arc_points, _) =
            synthesize_on_grid(kappas_at, &origin, &Frame::identity(dim), &grid)
                .map_err(BuildFailure::Fatal)?;
        for (row, (_, j)) in arc_order.iter().enumerate() {
            let src = (row + 1) * dim;
            points[j * dim..(j + 1) * dim].copy_from_slice(&arc_points[src..src + dim]);
        }
    }

    // Mollify across the stitch.
    let moll = Mollifier::new(h_moll).map_err(BuildFailure::Fatal)?;
    let blended = mollify_blend(&points, dim, 0.0, TAU, plan.tau, &moll)
        .map_err(BuildFailure::Fatal)?;
    let params: Vec<f64> = (0..samples).map(|j| TAU * j as f64 / samples as f64).collect();
    let curve = SampledCurve::new(dim, params, blended, true).map_err(BuildFailure::Fatal)?;

    // Independent verification of the assembled curve.
    let mut report = verify(&curve, s, eps).map_err(BuildFailure::Fatal)?;

    // Stage attribution for the retry ladder and the log.
    let apparatus = analyze_curve(&curve).map_err(BuildFailure::Fatal)?;
    let mut stage_stitch: f64 = 0.0;
    let mut worst_t = 0.0;
    let mut worst_dev: f64 = 0.0;
    for a in &apparatus {
        let target = s.eval(a.t);
        for (k, want) in a.kappas.iter().zip(target.iter()) {
            let dev = (k - want).abs();
            if dev > worst_dev {
                worst_dev = dev;
                worst_t = a.t;
            }
            if circle_dist(a.t, plan.tau) < 3.0 * h_moll {
                stage_stitch = stage_stitch.max(dev);
            }
        }
    }
    let stage_modify = {
        let mut m: f64 = 0.0;
        for j in 0..2048 {
            let t = TAU * j as f64 / 2048.0;
            let orig = s.eval(t);
            let modd = plan.modified(s, t);
            for (a, b) in orig.iter().zip(modd.iter()) {
                m = m.max((a - b).abs());
            }
        }
        m
    };
    report.construction = Some(ConstructionLog {
        stage_modify,
        stage_bridge: bridge.report.curvature_deviation,
        stage_stitch,
        pre_closure_gaps,
        gamma_length: plan.delta,
        bridge_duration: u,
        bend_radius: bridge.report.bend_radius,
        samples,
        mollifier_width: h_moll,
        retries,
    });

    if !report.passed {
        let near_stitch = circle_dist(worst_t, plan.tau) < 3.0 * h_moll;
        let err = Error::BudgetExceeded {
            stage: if near_stitch { "stitch" } else { "bridge" },
            detail: format!(
                "deviation {worst_dev:.3e} at t = {worst_t:.4} (eps {eps:.3e}), closure {:.3e}",
                report.closure_gaps[0]
            ),
        };
        return Err(if near_stitch {
            BuildFailure::Stitch(err)
        } else {
            BuildFailure::Bridge(err)
        });
    }

    // Embedding post-pass.
    if opts.embed {
        if dim == 2 {
            report.embedding = EmbeddingStatus::PlanarSkipped;
        } else if report.self_intersections.is_empty() {
            report.embedding = EmbeddingStatus::Embedded;
        } else {
            let headroom = (eps - report.max_deviation_overall).max(eps * 0.05);
            let (repaired, draws) =
                perturb_to_embedding(&curve, 0.5 * headroom, opts.seed)
                    .map_err(BuildFailure::Fatal)?;
            let construction = report.construction.clone();
            let mut new_report = verify(&repaired, s, eps).map_err(BuildFailure::Fatal)?;
            new_report.construction = construction;
            new_report.embedding = EmbeddingStatus::Repaired { draws };
            if !new_report.passed {
                return Err(BuildFailure::Fatal(Error::BudgetExceeded {
                    stage: "embedding",
                    detail: String::from("repair left the curve outside tolerance"),
                }));
            }
            return Ok((repaired, new_report));
        }
    }
    Ok((curve, report))
}

/// Jets of the synthesized arc at its start (the stitch side): the constant
/// collar makes these exact helix jets through the origin with the identity
/// frame.
fn arc_start_jets(
    plan: &ApproximationPlan,
    s: &CurvatureProfile,
    dim: usize,
    orders: usize,
) -> Result<Vec<Vec<f64>>> {
    let _ = s;
    let spec = crate::helix::helix_from_constants(
        &plan.kappas,
        &vec![0.0; dim],
        &Frame::identity(dim),
    )?;
    Ok(spec.eval(0.0, orders))
}

fn bridge_b_max(bridge: &Bridge) -> f64 {
    match &bridge.base {
        crate::helix::bridge::BridgeBase::Helix(s) => {
            s.frequencies.iter().cloned().fold(0.0, f64::max)
        }
        crate::helix::bridge::BridgeBase::Bent(b) => {
            b.spec.frequencies.iter().cloned().fold(0.0, f64::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frenet::FourierSeries;

    fn r3_profile() -> CurvatureProfile {
        CurvatureProfile::from_fourier(vec![
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
        .unwrap()
    }

    #[test]
    fn plan_places_the_arc_at_the_torsion_maximum() {
        let s = r3_profile();
        let plan = choose_plan(&s, 0.1).unwrap();
        // |s_2| = |0.5 + 0.4 cos t| peaks at t = 0.
        assert!(circle_dist(plan.t0, 0.0) < 0.01, "t0 = {}", plan.t0);
        assert!((plan.kappas[0] - 1.0).abs() < 1e-6);
        // k_2 near 0.9, possibly nudged for commensurability.
        assert!((plan.kappas[1] - 0.9).abs() < 0.2 * 0.25 * 0.1 + 1e-9);
        // U stays within the modification budget.
        for j in 0..512 {
            let t = wrap(plan.u_lo + forward_arc(plan.u_lo, plan.u_hi) * j as f64 / 512.0);
            let v = s.eval(t);
            for (a, k) in v.iter().zip(plan.kappas.iter()) {
                assert!((a - k).abs() < 0.025 + 1e-9, "at {t}: {} vs {k}", a);
            }
        }
        // Modified profile: exact at core, original outside U.
        let vc = plan.modified(&s, plan.t0);
        for (a, k) in vc.iter().zip(plan.kappas.iter()) {
            assert!((a - k).abs() < 1e-12);
        }
        let outside = wrap(plan.t0 + core::f64::consts::PI);
        let vo = plan.modified(&s, outside);
        for (a, b) in vo.iter().zip(s.eval(outside).iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_profile_keeps_its_constants() {
        let s = CurvatureProfile::constant(&[1.0, 0.5]).unwrap();
        let plan = choose_plan(&s, 0.1).unwrap();
        assert!((plan.kappas[0] - 1.0).abs() < 1e-9);
        assert!((plan.kappas[1] - 0.5).abs() < 1e-9);
        // U grows to the cap for a constant profile.
        let width = forward_arc(plan.u_lo, plan.u_hi);
        assert!(width > TAU - 0.4, "U width {width}");
    }

    #[test]
    fn zero_last_component_is_forced_away_from_zero() {
        let s = CurvatureProfile::from_fourier(vec![
            FourierSeries::constant_value(1.0),
            FourierSeries::constant_value(0.0),
        ])
        .unwrap();
        let plan = choose_plan(&s, 0.1).unwrap();
        assert!(plan.kappas[1].abs() >= 0.1 / 4.0 - 1e-12);
        // Still within the modification budget on U.
        assert!(plan.kappas[1].abs() <= 0.025 + 1e-12);
    }

    #[test]
    fn concentrate_bounds_endpoint_distance_by_delta() {
        let s = r3_profile();
        let mut plan = choose_plan(&s, 0.1).unwrap();
        plan.delta = 0.01;
        let (_q, gamma) = concentrate(&plan, &s).unwrap();
        let start = gamma.point(0);
        let end = gamma.point(gamma.len() - 1);
        let d = linalg::dist(start, end);
        assert!(d <= 0.01 + 1e-12, "endpoint distance {d}");
    }

    #[test]
    fn concentrate_frame_gap_scales_linearly_with_delta() {
        // Gap between end frames measured as the rotation angle (max-norm
        // of the relative rotation's logarithm).
        let s = r3_profile();
        let mut gaps = Vec::new();
        for &delta in &[0.04, 0.02, 0.01, 0.005] {
            let mut plan = choose_plan(&s, 0.1).unwrap();
            plan.delta = delta;
            let steps = 4096;
            let (_pts, frames) = synthesize_arc(&plan, &s, steps).unwrap();
            let rel = frames[steps].mat.matmul(&frames[0].mat.transpose());
            let gap = linalg::log_rotation_near_identity(&rel).max_abs();
            gaps.push(gap);
        }
        for w in gaps.windows(2) {
            assert!(
                w[1] <= 0.5 * w[0] + 1e-12,
                "halving delta must at least halve the gap: {:?}",
                gaps
            );
        }
    }

    #[test]
    fn concentrate_round_trips_the_compressed_profile() {
        // On the part of the arc mapping outside U the compressed input is
        // the original profile; there the analysis must reproduce it. The
        // blend collars inside U are accounted against the modification
        // budget instead (their parameter-compressed ramps are resolved in
        // the output parametrization, not on the uniform arclength grid).
        let s = r3_profile();
        let mut plan = choose_plan(&s, 0.1).unwrap();
        // Spacing is delta/4096; much finer grids trade truncation error for
        // rounding amplification in the finite differences.
        plan.delta = 0.04;
        let (_q, gamma) = concentrate(&plan, &s).unwrap();
        let apparatus = analyze_curve(&gamma).unwrap();
        let arc_width = TAU - plan.mid_width();
        let v_arc = plan.delta / arc_width;
        let mut max_err: f64 = 0.0;
        let mut outside_samples = 0usize;
        let guard = 12.0 * gamma.spacing(); // stencil width in arclength
        for a in apparatus.iter() {
            let t = wrap(plan.tau + a.t / v_arc);
            let t_lo = wrap(plan.tau + (a.t - guard) / v_arc);
            let t_hi = wrap(plan.tau + (a.t + guard) / v_arc);
            if plan.ramp(t) < 1.0 || plan.ramp(t_lo) < 1.0 || plan.ramp(t_hi) < 1.0 {
                continue; // inside U (or a stencil reaching into it)
            }
            outside_samples += 1;
            let want = s.eval(t);
            for (k, w) in a.kappas.iter().zip(want.iter()) {
                max_err = max_err.max((k - w).abs());
            }
        }
        assert!(outside_samples > gamma.len() / 2);
        assert!(max_err < 1e-5, "round-trip error {max_err}");
    }
}
