//! Curvature toolkit for curves in `R^(n+1)`.
//!
//! The crate computes Frenet frames and curvatures of sampled curves,
//! synthesizes curves from prescribed curvature functions by integrating the
//! Frenet system, evaluates constant-curvature curves (helices) in closed
//! form, and constructs closed curves whose curvature profile stays within a
//! requested tolerance of any periodic curvature-like target function.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through [`libm`]. IO, file formats and the command-line front end live
//! in the companion `curvkit` crate.
//!
//! Module map:
//!
//! * [`numerics`] — small dense kernels, the skew Frenet coefficient matrix
//!   and its spectrum, orthogonal frame transport, spectral differentiation
//!   on periodic grids, and mollifier smoothing.
//! * [`frenet`] — sampled curves, frame/curvature extraction, synthesis from
//!   curvature profiles, reparametrization.
//! * [`helix`] — constant-curvature curves in closed form, quasi-periodic
//!   return search, and near-constant-curvature bridges between nearby
//!   points.
//! * [`pipeline`] — the end-to-end approximation of a curvature-like
//!   function by a closed curve, verification, and the embedding post-pass.

#![no_std]
#![deny(unsafe_code)]
// In test builds std is linked by the harness and its inherent f64 methods
// shadow the libm-backed shim, so those imports look unused there.
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
mod math;
pub mod numerics;

pub mod frenet;
pub mod helix;
pub mod pipeline;

pub use error::{Error, Result};
pub use frenet::{
    analyze_curve, frenet_frame_at, reparametrize, synthesize_curve, CircleMap, CurvatureProfile,
    FrenetApparatus, SampledCurve,
};
pub use helix::{bridge, eval_helix, helix_from_constants, return_search, Bridge, HelixSpec};
pub use pipeline::{
    approximate, choose_plan, concentrate, perturb_to_embedding, verify, ApproximationPlan,
    VerificationReport,
};

pub use numerics::{
    build_frenet_matrix, eigen_structure, frame_step, mollify_blend, periodic_derivative,
    EigenStructure, Frame, Mollifier, SkewFrenetMatrix,
};

