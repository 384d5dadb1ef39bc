//! Numerical laboratory for reversible planar maps with a symmetric couple of
//! quadratic homoclinic tangencies.
//!
//! The crate builds first-return maps from a local saddle map in main normal
//! form and an explicit quadratic global map, rescales them to their Hénon-type
//! limits, and locates the cascades of fold, flip and pitchfork bifurcations
//! that produce coexisting sinks, sources and elliptic orbits.
//!
//! Module map:
//! - [`geometry`]: points, 2×2 Jacobians, the [`PlanarMap`] trait, involutions.
//! - [`saddle`]: the local map near the symmetric saddle and its iterates.
//! - [`global`]: the global maps along the two homoclinic excursions.
//! - [`return_map`]: first-return compositions and their rescaling.
//! - [`limit`]: Hénon and reversible product-Hénon limit families.
//! - [`orbit`]: Newton solver, classification, bifurcation detection, cascades.
//! - [`sweep`]: parallel regime maps over a parameter window.
//! - [`config`], [`output`]: run configuration and CSV emission.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod geometry;
pub mod global;
pub mod limit;
pub mod orbit;
pub mod output;
pub mod return_map;
pub mod saddle;
pub mod sweep;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{Involution, Jacobian2, PlanarMap, Point2, Rect, Swap};
pub use global::{Configuration, GlobalMapParams, Orientation};
pub use limit::{CurveId, CurveSample, HenonParams, LimitFamily, ProductHenonParams};
pub use orbit::{BifurcationHit, CascadeReport, Classification, FixedPointRecord, Inventory, SolverOptions};
pub use return_map::{Model, RescaleTransform, ReturnKind, ReturnMap, ReturnMapSpec};
pub use saddle::SaddleNormalForm;
pub use sweep::{RegimeCell, RegimeCounts, RegimeOptions};
