//! Near-constant-curvature bridges between nearby points.
//!
//! A bridge grows a helix (bent first in odd ambient dimension) from the
//! start point and frame, waits for a quasi-periodic return, then corrects
//! the endpoint with smoothstep perturbations along the plane directions.
//! All basis functions vanish near zero and are constant near the far end,
//! so both ends of the bridge remain exact helix arcs; an optional final
//! stage rotates the far collar onto a prescribed target apparatus for
//! seamless stitching.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frenet::{analyze_curve, frenet_frame_at, SampledCurve};
use crate::helix::bent::BentHelix;
use crate::helix::jet::{smoothstep_jet, Jet, VecJet};
use crate::helix::ret::{commensurate_period, return_search};
use crate::helix::{helix_from_constants, HelixSpec};
use crate::math::{F64Ext, TAU};
use crate::numerics::{linalg, skew_planes, Frame, Mat};

/// Admissible endpoint gap for a bridge at tolerance `eps`.
///
/// Calibration starts at `eps / 10`; callers seeing `BudgetExceeded` shrink
/// their gap and retry.
pub fn admissible_gap(eps: f64) -> f64 {
    eps / 10.0
}

/// Tuning knobs for bridge construction. `Default` matches the documented
/// behaviour; the approximation pipeline overrides a few fields.
#[derive(Debug, Clone, Default)]
pub struct BridgeOptions {
    /// Return-search tolerance (default `eps / 4`).
    pub delta_search: Option<f64>,
    /// Return-search horizon (default adaptive).
    pub horizon: Option<f64>,
    /// Initial bend radius for odd dimensions (default `100 / min k`).
    pub bend_radius: Option<f64>,
    /// Known common period of the frequencies, when the caller arranged one.
    pub fast_period: Option<f64>,
    /// Minimum bridge duration in multiples of the slowest period.
    pub min_duration: Option<f64>,
    /// Align the far end onto this apparatus (point, frame) exactly.
    pub target_end: Option<(Vec<f64>, Frame)>,
    /// Parameter width of the end-alignment blend.
    pub align_window: Option<f64>,
    /// Verification sampling density (samples per shortest period).
    pub samples_per_period: Option<usize>,
}

/// One smoothstep basis function: rises from 0 to 1 across
/// `[start, start + width]`, exactly 0 before and exactly 1 after.
#[derive(Debug, Clone, Copy)]
pub struct StepBasis {
    pub start: f64,
    pub width: f64,
}

impl StepBasis {
    fn jet(&self, t: f64, order: usize) -> Jet {
        smoothstep_jet(&Jet::affine(t, self.start, self.width, order))
    }
}

/// Endpoint-matching perturbation: two smoothstep bumps per plane direction
/// (plus the drift axis in odd dimension), all vanishing identically on an
/// initial interval and constant on the far collar.
#[derive(Debug, Clone)]
pub struct BridgePerturbation {
    /// World directions; each direction carries `basis.len()` coefficients.
    pub directions: Vec<Vec<f64>>,
    pub basis: Vec<StepBasis>,
    /// Row-major `directions x basis` coefficients.
    pub coefficients: Vec<f64>,
    /// All basis functions vanish identically on `[0, vanish_until]`.
    pub vanish_until: f64,
}

impl BridgePerturbation {
    fn add_into(&self, t: f64, out: &mut VecJet) {
        let order = out.coords[0].order;
        for (bi, basis) in self.basis.iter().enumerate() {
            if t <= basis.start {
                continue;
            }
            let step = basis.jet(t, order);
            for (di, dir) in self.directions.iter().enumerate() {
                let c = self.coefficients[di * self.basis.len() + bi];
                if c != 0.0 {
                    out.add_scaled_direction(&step.scale(c), dir);
                }
            }
        }
    }

    /// Largest `C^(n+1)`-norm contribution over all directions, measured on
    /// a fine grid.
    pub fn norm_bound(&self, orders: usize, samples: usize) -> f64 {
        let mut max: f64 = 0.0;
        for basis in &self.basis {
            for j in 0..=samples {
                let t = basis.start + basis.width * j as f64 / samples as f64;
                let jet = basis.jet(t, orders);
                for (di, dir) in self.directions.iter().enumerate() {
                    let mut c_total = 0.0;
                    for bi in 0..self.basis.len() {
                        c_total = f64::max(
                            c_total,
                            self.coefficients[di * self.basis.len() + bi].abs(),
                        );
                    }
                    let dir_norm = linalg::norm(dir);
                    for m in 0..=orders {
                        max = max.max(c_total * dir_norm * jet.derivative(m).abs());
                    }
                }
            }
        }
        max
    }
}

/// Rotation-path correction that carries the far collar of the bridge onto
/// a target apparatus: position, frame and all higher jets of the output at
/// `t_end` equal those of the target helix exactly.
#[derive(Debug, Clone)]
pub struct EndAlignment {
    /// Blend starts at `t_end - window`.
    pub t_start: f64,
    pub t_end: f64,
    pub window: f64,
    /// Invariant planes of the rotation logarithm with their angles.
    planes: Vec<(Vec<f64>, Vec<f64>, f64)>,
    /// Bridge far endpoint before correction.
    beta_end: Vec<f64>,
    /// Translation `target_point - beta_end`.
    shift: Vec<f64>,
}

impl EndAlignment {
    fn adjust(&self, t: f64, jet: VecJet) -> VecJet {
        if t <= self.t_start {
            return jet;
        }
        let order = jet.coords[0].order;
        let psi = smoothstep_jet(&Jet::affine(t, self.t_start, self.window, order));
        // x = beta(t) - beta(u); rotate by exp(psi * log Q), then translate.
        let mut x = jet;
        for (c, &b) in x.coords.iter_mut().zip(self.beta_end.iter()) {
            *c = c.sub(&Jet::constant(b, order));
        }
        let mut out = x.clone();
        for (v, w, angle) in &self.planes {
            let theta = psi.scale(*angle);
            let (sin, cos) = theta.sin_cos();
            let cos_m1 = cos.sub(&Jet::constant(1.0, order));
            let xv = dot_jet(&x, v, order);
            let xw = dot_jet(&x, w, order);
            out.add_scaled_direction(&cos_m1.mul(&xv).sub(&sin.mul(&xw)), v);
            out.add_scaled_direction(&sin.mul(&xv).add(&cos_m1.mul(&xw)), w);
        }
        for (c, &b) in out.coords.iter_mut().zip(self.beta_end.iter()) {
            *c = c.add(&Jet::constant(b, order));
        }
        for (c, &s) in out.coords.iter_mut().zip(self.shift.iter()) {
            *c = c.add(&psi.scale(s));
        }
        out
    }
}

fn dot_jet(x: &VecJet, v: &[f64], order: usize) -> Jet {
    let mut acc = Jet::constant(0.0, order);
    for (c, &vi) in x.coords.iter().zip(v.iter()) {
        acc = acc.add(&c.scale(vi));
    }
    acc
}

/// Base curve of a bridge.
#[derive(Debug, Clone)]
pub enum BridgeBase {
    Helix(HelixSpec),
    Bent(BentHelix),
}

impl BridgeBase {
    fn eval_jet(&self, t: f64, order: usize) -> VecJet {
        match self {
            BridgeBase::Helix(s) => s.eval_jet(t, order),
            BridgeBase::Bent(b) => b.eval_jet(t, order),
        }
    }

}

/// Diagnostics of a constructed bridge, all recomputed from the curve.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    /// `max_{i,t} |kappa_i(t) - k_i|` measured by curve analysis.
    pub curvature_deviation: f64,
    /// `|beta^(i)(0) - beta^(i)(u)|` for `i = 1..=n+1`.
    pub derivative_gaps: Vec<f64>,
    /// `|beta(u) - q|` after endpoint matching.
    pub endpoint_error: f64,
    /// Return gap of the uncorrected base at `u`.
    pub return_gap: f64,
    /// Bend radius used (odd dimension only).
    pub bend_radius: Option<f64>,
    /// Sup of the perturbation and its first `n+1` derivatives.
    pub perturbation_norm: f64,
}

/// A bridge curve from `p` to `q` with near-constant curvatures.
#[derive(Debug, Clone)]
pub struct Bridge {
    pub dim: usize,
    pub kappas: Vec<f64>,
    pub base: BridgeBase,
    /// Parameter duration.
    pub u: f64,
    pub perturbation: BridgePerturbation,
    pub alignment: Option<EndAlignment>,
    pub report: BridgeReport,
}

impl Bridge {
    /// Jet of the bridge at `t` in `[0, u]`.
    pub fn eval_jet(&self, t: f64, order: usize) -> VecJet {
        let mut jet = self.base.eval_jet(t, order);
        self.perturbation.add_into(t, &mut jet);
        if let Some(align) = &self.alignment {
            jet = align.adjust(t, jet);
        }
        jet
    }

    /// Point and derivatives `0..=orders` at `t`.
    pub fn eval(&self, t: f64, orders: usize) -> Vec<Vec<f64>> {
        let jet = self.eval_jet(t, orders);
        (0..=orders).map(|m| jet.derivative(m)).collect()
    }

    /// Uniformly sample the bridge as an open curve.
    pub fn sample(&self, count: usize) -> Result<SampledCurve> {
        let params: Vec<f64> = (0..count)
            .map(|j| self.u * j as f64 / (count - 1) as f64)
            .collect();
        let mut points = Vec::with_capacity(count * self.dim);
        for &t in &params {
            points.extend_from_slice(&self.eval(t, 0)[0]);
        }
        SampledCurve::new(self.dim, params, points, false)
    }
}

/// Construct a bridge from `p` to `q` with prescribed initial frame and
/// curvature constants, within curvature tolerance `eps`.
pub fn bridge(
    p: &[f64],
    q: &[f64],
    frame_at_p: &Frame,
    kappas: &[f64],
    eps: f64,
) -> Result<Bridge> {
    bridge_with(p, q, frame_at_p, kappas, eps, &BridgeOptions::default())
}

/// [`bridge`] with explicit tuning knobs.
pub fn bridge_with(
    p: &[f64],
    q: &[f64],
    frame_at_p: &Frame,
    kappas: &[f64],
    eps: f64,
    opts: &BridgeOptions,
) -> Result<Bridge> {
    let n = kappas.len();
    let dim = n + 1;
    if p.len() != dim || q.len() != dim || frame_at_p.dim() != dim {
        return Err(Error::invalid("bridge endpoint dimensions are inconsistent"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("bridge tolerance must be positive"));
    }
    let gap = linalg::dist(p, q);
    let admissible = admissible_gap(eps);
    if gap >= admissible {
        return Err(Error::GapTooLarge { gap, admissible });
    }

    let spec = helix_from_constants(kappas, p, frame_at_p)?;

    // Retry ladder: shrink the return tolerance / enlarge the bend radius.
    let delta0 = opts.delta_search.unwrap_or(eps / 4.0);
    let mut last_err = None;
    for attempt in 0..3 {
        let delta = delta0 / 4.0f64.powi(attempt);
        let radius_scale = 2.0f64.powi(attempt);
        match build_attempt(
            &spec, q, frame_at_p, kappas, eps, opts, delta, radius_scale,
        ) {
            Ok(b) => return Ok(b),
            Err(e @ Error::BudgetExceeded { .. }) | Err(e @ Error::NotFound { .. }) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::BudgetExceeded {
        stage: "bridge",
        detail: format!("no attempt succeeded at eps {eps}"),
    }))
}

#[allow(clippy::too_many_arguments)]
fn build_attempt(
    spec: &HelixSpec,
    q: &[f64],
    frame_at_p: &Frame,
    kappas: &[f64],
    eps: f64,
    opts: &BridgeOptions,
    delta: f64,
    radius_scale: f64,
) -> Result<Bridge> {
    let n = kappas.len();
    let dim = n + 1;
    let b_max = spec.frequencies.iter().cloned().fold(0.0, f64::max);
    let b_min = spec
        .frequencies
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let needs_bend = spec.drift_speed() > 1e-9;

    let (base, u, return_gap, bend_radius) = if needs_bend {
        let min_k = kappas
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| {
                if i + 1 < dim - 1 {
                    Some(k)
                } else if k.abs() > 0.0 {
                    Some(k.abs())
                } else {
                    None
                }
            })
            .fold(f64::INFINITY, f64::min);
        let mut radius = opts.bend_radius.unwrap_or(100.0 / min_k) * radius_scale;
        let bend_budget = eps / 2.0;
        let mut chosen = None;
        for _ in 0..8 {
            let blend = (core::f64::consts::PI * radius / 16.0).clamp(4.0, 64.0);
            let fast_period = match opts.fast_period.or_else(|| commensurate_period(&spec.frequencies)) {
                Some(t) => t,
                None => fast_phase_period(spec, delta, n + 1)?,
            };
            let min_leg = (12.0 * spec.drift_speed()).max(blend);
            let bent = BentHelix::new(spec.clone(), radius, blend, fast_period, min_leg)?;
            let deviation = measure_constant_deviation(
                &|t, m| bent.eval(t, m),
                bent.duration,
                dim,
                kappas,
                b_max,
                opts.samples_per_period.unwrap_or(32),
            )?;
            if deviation < bend_budget {
                chosen = Some(bent);
                break;
            }
            radius *= 2.0;
        }
        let bent = chosen.ok_or(Error::BudgetExceeded {
            stage: "bend",
            detail: format!("bend deviation above {bend_budget:.3e} after radius ladder"),
        })?;
        let u = bent.duration;
        let gap = end_gap(&|t, m| bent.eval(t, m), u, n + 1);
        (BridgeBase::Bent(bent), u, gap, Some(radius))
    } else {
        let min_duration = opts
            .min_duration
            .unwrap_or_else(|| (4.0 * TAU / b_min).max(12.0));
        match opts
            .fast_period
            .or_else(|| commensurate_period(&spec.frequencies))
        {
            Some(period) => {
                let cycles = (min_duration / period).ceil().max(1.0);
                let u = cycles * period;
                let gap = end_gap(&|t, m| spec.eval(t, m), u, n + 1);
                (BridgeBase::Helix(spec.clone()), u, gap, None)
            }
            None => {
                let horizon = opts.horizon.unwrap_or(2000.0f64.max(200.0 * TAU / b_min));
                let mut hit = None;
                let mut horizon_now = horizon;
                for _ in 0..4 {
                    match return_search(spec, delta, n + 1, horizon_now) {
                        Ok(h) if h.u >= min_duration => {
                            hit = Some(h);
                            break;
                        }
                        Ok(_) => {
                            // Returned too early for a usable collar; look
                            // beyond it.
                            horizon_now *= 4.0;
                            match return_search(spec, delta * 0.5, n + 1, horizon_now) {
                                Ok(h2) if h2.u >= min_duration => {
                                    hit = Some(h2);
                                    break;
                                }
                                _ => {}
                            }
                        }
                        Err(Error::NotFound { .. }) => horizon_now *= 4.0,
                        Err(e) => return Err(e),
                    }
                }
                let hit = hit.ok_or(Error::NotFound {
                    horizon: horizon_now,
                    best_gap: f64::NAN,
                })?;
                (BridgeBase::Helix(spec.clone()), hit.u, hit.gap, None)
            }
        }
    };

    // Perturbation basis: two saturating steps per direction, rises centered
    // in the last third, widths u/8; identically zero before 0.6375 u.
    let w = u / 8.0;
    let basis = vec![
        StepBasis {
            start: 0.70 * u - 0.5 * w,
            width: w,
        },
        StepBasis {
            start: 0.85 * u - 0.5 * w,
            width: w,
        },
    ];
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for (a, b) in spec.plane_a.iter().zip(spec.plane_b.iter()) {
        directions.push(a.clone());
        directions.push(b.clone());
    }
    if let Some(d) = &spec.drift {
        let norm = linalg::norm(d);
        if norm > 1e-12 {
            directions.push(d.iter().map(|x| x / norm).collect());
        } else if let BridgeBase::Helix(_) = base {
            // Driftless odd dimension: the kernel direction still spans the
            // missing coordinate for endpoint matching.
            let k = crate::numerics::build_frenet_matrix(kappas)?;
            let es = crate::numerics::eigen_structure(&k)?;
            if let Some(axis) = es.kernel_axis {
                // Transport to world coordinates through the initial frame.
                let mut world = vec![0.0; dim];
                for (j, &comp) in axis.iter().enumerate() {
                    for i in 0..dim {
                        world[i] += comp * frame_at_p.mat.at(j, i);
                    }
                }
                directions.push(world);
            }
        }
    }
    let mut perturbation = BridgePerturbation {
        directions,
        basis,
        coefficients: vec![0.0; 0],
        vanish_until: 0.70 * u - 0.5 * w,
    };
    perturbation.coefficients = vec![0.0; perturbation.directions.len() * 2];

    let tangent_target: Vec<f64> = match &opts.target_end {
        Some((_, f)) => f.vector(0).to_vec(),
        None => frame_at_p.vector(0).to_vec(),
    };
    let q_target: Vec<f64> = match &opts.target_end {
        Some((point, _)) => point.clone(),
        None => q.to_vec(),
    };

    newton_endpoint_match(
        &base,
        &mut perturbation,
        u,
        dim,
        &q_target,
        &tangent_target,
    )?;

    // Optional far-collar alignment onto the target apparatus.
    let alignment = if let Some((point, target_frame)) = &opts.target_end {
        let jets = eval_with(&base, &perturbation, u, n.max(1));
        let derivs: Vec<Vec<f64>> = (1..=n).map(|m| jets.derivative(m)).collect();
        let end_frame = frenet_frame_at(&derivs)?;
        // Q = E_target^T E_end maps end derivatives onto target derivatives.
        let q_rot = {
            let mut m = Mat::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for r in 0..dim {
                        acc += target_frame.mat.at(r, i) * end_frame.mat.at(r, j);
                    }
                    m.set(i, j, acc);
                }
            }
            m
        };
        let log = linalg::log_rotation_near_identity(&q_rot);
        let (angles, planes, _kernel, _zeros) = skew_planes(&log);
        let collar = collar_width(&base, u, spec.drift_speed());
        let window = opts.align_window.unwrap_or(collar).min(collar);
        let beta_end = jets.derivative(0);
        let shift: Vec<f64> = point
            .iter()
            .zip(beta_end.iter())
            .map(|(a, b)| a - b)
            .collect();
        Some(EndAlignment {
            t_start: u - window,
            t_end: u,
            window,
            planes: angles
                .iter()
                .zip(planes.into_iter())
                .map(|(&a, (v, w))| (v, w, a))
                .collect(),
            beta_end,
            shift,
        })
    } else {
        None
    };

    let mut bridge = Bridge {
        dim,
        kappas: kappas.to_vec(),
        base,
        u,
        perturbation,
        alignment,
        report: BridgeReport {
            curvature_deviation: f64::NAN,
            derivative_gaps: Vec::new(),
            endpoint_error: f64::NAN,
            return_gap,
            bend_radius,
            perturbation_norm: f64::NAN,
        },
    };

    // Post-hoc verification; the construction is accepted only if it passes.
    let deviation = measure_constant_deviation(
        &|t, m| bridge.eval(t, m),
        u,
        dim,
        kappas,
        b_max,
        opts.samples_per_period.unwrap_or(32),
    )?;
    let gaps: Vec<f64> = {
        let j0 = bridge.eval_jet(0.0, n + 1);
        let j1 = bridge.eval_jet(u, n + 1);
        (1..=n + 1)
            .map(|m| linalg::dist(&j0.derivative(m), &j1.derivative(m)))
            .collect()
    };
    let endpoint_error = linalg::dist(&bridge.eval(u, 0)[0], &q_target);
    bridge.report.curvature_deviation = deviation;
    bridge.report.derivative_gaps = gaps;
    bridge.report.endpoint_error = endpoint_error;
    bridge.report.perturbation_norm = bridge.perturbation.norm_bound(n + 1, 64);

    if endpoint_error > 1e-9 {
        return Err(Error::BudgetExceeded {
            stage: "bridge-endpoint",
            detail: format!("endpoint error {endpoint_error:.3e} above 1e-9"),
        });
    }
    if deviation >= eps {
        return Err(Error::BudgetExceeded {
            stage: "bridge-curvature",
            detail: format!("curvature deviation {deviation:.3e} >= eps {eps:.3e}"),
        });
    }
    Ok(bridge)
}

/// Width of the exact-helix collar at the far end of the base.
fn collar_width(base: &BridgeBase, u: f64, sigma: f64) -> f64 {
    let rise_end = 0.9125 * u;
    let collar = 0.8 * (u - rise_end);
    match base {
        BridgeBase::Helix(_) => collar,
        BridgeBase::Bent(b) => collar.min(0.8 * b.path.leg / sigma.max(1e-300)),
    }
}

fn eval_with(base: &BridgeBase, pert: &BridgePerturbation, t: f64, order: usize) -> VecJet {
    let mut jet = base.eval_jet(t, order);
    pert.add_into(t, &mut jet);
    jet
}

/// Damped Newton iteration with finite-difference Jacobian on the
/// position-and-tangent endpoint residual.
fn newton_endpoint_match(
    base: &BridgeBase,
    pert: &mut BridgePerturbation,
    u: f64,
    dim: usize,
    q_target: &[f64],
    tangent_target: &[f64],
) -> Result<()> {
    let unknowns = pert.coefficients.len();
    let residual = |pert: &BridgePerturbation| -> Vec<f64> {
        let jet = eval_with(base, pert, u, 1);
        let pos = jet.derivative(0);
        let tan = jet.derivative(1);
        let mut r = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            r.push(pos[i] - q_target[i]);
        }
        for i in 0..dim {
            r.push(tan[i] - tangent_target[i]);
        }
        r
    };
    let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    let mut r = residual(pert);
    for _iter in 0..25 {
        let r_norm = norm2(&r).sqrt();
        if r_norm < 1e-13 {
            break;
        }
        // Finite-difference Jacobian.
        let h = 1e-7;
        let mut jac = vec![0.0; 2 * dim * unknowns];
        for c in 0..unknowns {
            let saved = pert.coefficients[c];
            pert.coefficients[c] = saved + h;
            let rp = residual(pert);
            pert.coefficients[c] = saved;
            for row in 0..2 * dim {
                jac[row * unknowns + c] = (rp[row] - r[row]) / h;
            }
        }
        // Levenberg step: (J^T J + lambda I) delta = -J^T r.
        let mut jtj = Mat::zeros(unknowns);
        let mut jtr = vec![0.0; unknowns];
        for i in 0..unknowns {
            for j in 0..unknowns {
                let mut acc = 0.0;
                for row in 0..2 * dim {
                    acc += jac[row * unknowns + i] * jac[row * unknowns + j];
                }
                jtj.set(i, j, acc);
            }
            let mut acc = 0.0;
            for row in 0..2 * dim {
                acc += jac[row * unknowns + i] * r[row];
            }
            jtr[i] = acc;
        }
        let trace: f64 = (0..unknowns).map(|i| jtj.at(i, i)).sum();
        let lambda = 1e-10 * (trace / unknowns as f64).max(1e-12);
        for i in 0..unknowns {
            jtj.set(i, i, jtj.at(i, i) + lambda);
        }
        let neg_jtr: Vec<f64> = jtr.iter().map(|x| -x).collect();
        let delta = jtj
            .solve(&neg_jtr)
            .ok_or_else(|| Error::invalid("singular endpoint system"))?;
        // Damped line search.
        let mut lambda_ls = 1.0;
        let mut improved = false;
        for _ in 0..10 {
            let mut trial = pert.clone();
            for (c, d) in trial.coefficients.iter_mut().zip(delta.iter()) {
                *c += lambda_ls * d;
            }
            let rt = residual(&trial);
            if norm2(&rt) < norm2(&r) {
                *pert = trial;
                r = rt;
                improved = true;
                break;
            }
            lambda_ls *= 0.5;
        }
        if !improved {
            break;
        }
    }
    // The tangent rows are flat by design; only the position part must
    // converge.
    let pos_err = {
        let jet = eval_with(base, pert, u, 0);
        linalg::dist(&jet.derivative(0), q_target)
    };
    if pos_err > 1e-9 {
        return Err(Error::BudgetExceeded {
            stage: "bridge-endpoint",
            detail: format!("Newton stalled at position error {pos_err:.3e}"),
        });
    }
    Ok(())
}

/// Max curvature deviation from the constants, measured by analyzing a
/// sampled copy of the curve.
fn measure_constant_deviation(
    eval: &dyn Fn(f64, usize) -> Vec<Vec<f64>>,
    duration: f64,
    dim: usize,
    kappas: &[f64],
    b_max: f64,
    samples_per_period: usize,
) -> Result<f64> {
    let periods = duration * b_max / TAU;
    let count = ((periods * samples_per_period as f64).ceil() as usize).clamp(4096, 240_000);
    let params: Vec<f64> = (0..count)
        .map(|j| duration * j as f64 / (count - 1) as f64)
        .collect();
    let mut points = Vec::with_capacity(count * dim);
    for &t in &params {
        points.extend_from_slice(&eval(t, 0)[0]);
    }
    let curve = SampledCurve::new(dim, params, points, false)?;
    let apparatus = analyze_curve(&curve)?;
    let mut max_dev: f64 = 0.0;
    for a in &apparatus {
        for (got, want) in a.kappas.iter().zip(kappas.iter()) {
            max_dev = max_dev.max((got - want).abs());
        }
    }
    Ok(max_dev)
}

/// Max gap between the jets at `0` and `u`, orders `1..=m`.
fn end_gap(eval: &dyn Fn(f64, usize) -> Vec<Vec<f64>>, u: f64, m: usize) -> f64 {
    let j0 = eval(0.0, m);
    let j1 = eval(u, m);
    let mut gap: f64 = linalg::dist(&j0[0], &j1[0]);
    for order in 1..=m {
        gap = gap.max(linalg::dist(&j0[order], &j1[order]));
    }
    gap
}

/// Return time of the fast phases alone (drift stripped), for bending.
fn fast_phase_period(spec: &HelixSpec, delta: f64, orders: usize) -> Result<f64> {
    let driftless = HelixSpec {
        dim: spec.dim,
        kappas: spec.kappas.clone(),
        frequencies: spec.frequencies.clone(),
        plane_a: spec.plane_a.clone(),
        plane_b: spec.plane_b.clone(),
        drift: None,
        anchor: spec.anchor.clone(),
    };
    let b_min = spec
        .frequencies
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hit = return_search(&driftless, delta, orders, 4000.0f64.max(400.0 * TAU / b_min))?;
    Ok(hit.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Frame;

    #[test]
    fn admissible_gap_is_a_tenth_of_eps() {
        assert!((admissible_gap(0.05) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn periodic_helix_with_coincident_endpoints_needs_no_perturbation() {
        // R^2, k = 2: circle, exactly periodic.
        let p = [0.3, -0.1];
        let bridge = bridge(&p, &p, &Frame::identity(2), &[2.0], 0.05).unwrap();
        let max_coeff = bridge
            .perturbation
            .coefficients
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        assert!(max_coeff < 1e-10, "coefficients {max_coeff}");
        assert!(bridge.report.curvature_deviation < 1e-4);
        assert!(bridge.report.endpoint_error < 1e-10);
        assert!(bridge.report.return_gap < 1e-9);
    }

    #[test]
    fn r4_bridge_passes_post_hoc_verification() {
        // Constants (1, 1, 0.5), endpoint gap 1e-3, eps 0.05.
        let kappas = [1.0, 1.0, 0.5];
        let p = [0.0; 4];
        let spec = helix_from_constants(&kappas, &p, &Frame::identity(4)).unwrap();
        let q: Vec<f64> = (0..4).map(|i| p[i] + 1e-3 * 0.5).collect();
        let gap = linalg::dist(&p, &q);
        assert!((gap - 1e-3).abs() < 1e-12, "test gap {gap}");
        let bridge = bridge(&p, &q, &Frame::identity(4), &kappas, 0.05).unwrap();
        assert!(
            bridge.report.curvature_deviation < 0.05,
            "deviation {}",
            bridge.report.curvature_deviation
        );
        for g in &bridge.report.derivative_gaps {
            assert!(*g < 0.05, "derivative gap {g}");
        }
        assert!(bridge.report.endpoint_error < 1e-9);
        let _ = spec;
    }

    #[test]
    fn oversized_gaps_are_rejected() {
        let p = [0.0, 0.0];
        let q = [0.06, 0.0]; // 10x the admissible gap for eps = 0.05
        assert!(matches!(
            bridge(&p, &q, &Frame::identity(2), &[2.0], 0.05),
            Err(Error::GapTooLarge { .. })
        ));
    }

    #[test]
    fn bridge_starts_exactly_at_p_with_the_given_frame() {
        let kappas = [1.0, 0.9];
        let p = [1.0, 2.0, 3.0];
        let q = [1.0005, 2.0, 3.0];
        let bridge = bridge(&p, &q, &Frame::identity(3), &kappas, 0.1).unwrap();
        let jets = bridge.eval(0.0, 2);
        for (a, b) in jets[0].iter().zip(p.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        // Initial frame from the first n derivatives.
        let derivs: Vec<Vec<f64>> = vec![jets[1].clone(), jets[2].clone()];
        let frame = frenet_frame_at(&derivs).unwrap();
        assert!(frame.distance(&Frame::identity(3)) < 1e-10);
        // Perturbation vanishes identically on the lead-in.
        for j in 0..10 {
            let t = bridge.perturbation.vanish_until * j as f64 / 10.0;
            let base_jet = bridge.base.eval_jet(t, 0);
            let full_jet = bridge.eval_jet(t, 0);
            for (a, b) in base_jet.coords.iter().zip(full_jet.coords.iter()) {
                assert_eq!(a.value(), b.value());
            }
        }
    }
}
