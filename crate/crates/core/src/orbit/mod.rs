//! Periodic orbits: Newton solving, multiplier classification, symmetry
//! detection, bifurcation location and the cascade scans over return maps.

mod bifurcation;
mod cascade;

pub use bifurcation::{
    bifurcations_in, detect_bifurcation, locate_fold, monitor, BifurcationHit, BifurcationKind, Target,
};
pub use cascade::{
    cascade_row, cascade_scan, mixed_dynamics_probe, return_map_fixed_points, search_mixed_mu, t12_upper_window,
    t12_window, t1_window, CascadeReport, Interval, Inventory, InventoryEntry,
};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{Jacobian2, PlanarMap, Point2, Rect};
use crate::{Error, Result};

/// Residual treated as exact convergence, relative to `max(1, |p|)`.
const ROUNDING_RESIDUAL: f64 = 1e-14;

/// Tolerances shared by the orbit solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Newton stops once the step is below `step_tol · max(1, |p|)`.
    pub step_tol: f64,
    pub max_iter: usize,
    /// Accepted roots satisfy `|f^n(p) − p| < residual_tol`.
    pub residual_tol: f64,
    /// Points closer than this are the same orbit point.
    pub dedup_tol: f64,
    /// Orbit-to-swap-image distance below which an orbit is symmetric.
    pub symmetry_tol: f64,
    /// Multipliers within this distance of the unit circle count as neutral.
    pub unit_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { step_tol: 1e-12, max_iter: 50, residual_tol: 1e-10, dedup_tol: 1e-8, symmetry_tol: 1e-8, unit_tol: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classification {
    Sink,
    Source,
    Saddle,
    Elliptic,
    Marginal,
}

impl Classification {
    pub const ALL: [Classification; 5] = [
        Classification::Sink,
        Classification::Source,
        Classification::Saddle,
        Classification::Elliptic,
        Classification::Marginal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Classification::Sink => "sink",
            Classification::Source => "source",
            Classification::Saddle => "saddle",
            Classification::Elliptic => "elliptic",
            Classification::Marginal => "marginal",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Classification::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown classification '{s}'")))
    }
}

/// Classify a multiplier pair. Complex pairs within `unit_tol` of the unit
/// circle are elliptic; real multipliers that close to modulus 1 are marginal.
pub fn classify(mult: &[Complex64; 2], unit_tol: f64) -> Classification {
    let (r0, r1) = (mult[0].norm(), mult[1].norm());
    if !r0.is_finite() || !r1.is_finite() {
        return Classification::Marginal;
    }
    if mult[0].im != 0.0 {
        return if (r0 - 1.0).abs() <= unit_tol {
            Classification::Elliptic
        } else if r0 < 1.0 {
            Classification::Sink
        } else {
            Classification::Source
        };
    }
    if (r0 - 1.0).abs() <= unit_tol || (r1 - 1.0).abs() <= unit_tol {
        Classification::Marginal
    } else if r0 < 1.0 && r1 < 1.0 {
        Classification::Sink
    } else if r0 > 1.0 && r1 > 1.0 {
        Classification::Source
    } else {
        Classification::Saddle
    }
}

/// A located periodic point with its multipliers.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointRecord {
    pub point: Point2,
    /// The point in the map's symmetry chart.
    pub chart: Point2,
    pub period: usize,
    pub multipliers: [Complex64; 2],
    pub classification: Classification,
    pub is_symmetric: bool,
    pub residual: f64,
}

impl FixedPointRecord {
    pub fn trace(&self) -> f64 {
        (self.multipliers[0] + self.multipliers[1]).re
    }

    pub fn multiplier_product(&self) -> f64 {
        (self.multipliers[0] * self.multipliers[1]).re
    }

    /// Distance of the multiplier closest to `t`.
    pub fn distance_to_multiplier(&self, t: f64) -> f64 {
        let t = Complex64::new(t, 0.0);
        (self.multipliers[0] - t).norm().min((self.multipliers[1] - t).norm())
    }
}

/// `f^n(p)` and the chain-rule Jacobian of the composition.
pub fn iterate_with_jacobian<M: PlanarMap + ?Sized>(map: &M, p: Point2, n: usize) -> Result<(Point2, Jacobian2)> {
    let mut q = p;
    let mut jac = Jacobian2::IDENTITY;
    for _ in 0..n {
        let (r, j) = map.apply_with_jacobian(q)?;
        jac = j.compose(&jac);
        q = r;
    }
    Ok((q, jac))
}

fn iterate<M: PlanarMap + ?Sized>(map: &M, p: Point2, n: usize) -> Result<Point2> {
    let mut q = p;
    for _ in 0..n {
        q = map.apply(q)?;
    }
    Ok(q)
}

/// A converged Newton root of `f^n(p) = p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonRoot {
    pub point: Point2,
    pub jacobian: Jacobian2,
    pub residual: f64,
    /// `Df^n − I` was singular at the root.
    pub singular: bool,
}

/// Newton's method on `F(p) = f^n(p) − p` with the analytic Jacobian.
pub fn newton_periodic<M: PlanarMap + ?Sized>(
    map: &M,
    seed: Point2,
    period: usize,
    opts: &SolverOptions,
) -> Result<NewtonRoot> {
    if period == 0 {
        return Err(Error::InvalidParameter("period must be at least 1".into()));
    }
    let mut p = seed;
    for it in 0..opts.max_iter {
        let (q, jac) = iterate_with_jacobian(map, p, period)?;
        let f = q - p;
        let residual = f.norm_max();
        if !residual.is_finite() {
            return Err(Error::Escape { map: "newton", step: period });
        }
        // Near a bifurcation `Df^n − I` is almost singular and rounding noise
        // keeps the step above tolerance; a residual at rounding level is a root.
        if residual <= ROUNDING_RESIDUAL * p.norm_max().max(1.0)
            || (it + 1 == opts.max_iter && residual < opts.residual_tol)
        {
            let singular = jac.sub_identity(1.0).inverse().is_none();
            return Ok(NewtonRoot { point: p, jacobian: jac, residual, singular });
        }
        let Some(step) = jac.sub_identity(1.0).solve(Point2::new(-f.x, -f.y)) else {
            if residual < opts.residual_tol {
                return Ok(NewtonRoot { point: p, jacobian: jac, residual, singular: true });
            }
            return Err(Error::SingularJacobian);
        };
        p = p + step;
        if step.norm_max() <= opts.step_tol * p.norm_max().max(1.0) {
            let (q, jac) = iterate_with_jacobian(map, p, period)?;
            let residual = (q - p).norm_max();
            if residual < opts.residual_tol {
                let singular = jac.sub_identity(1.0).inverse().is_none();
                return Ok(NewtonRoot { point: p, jacobian: jac, residual, singular });
            }
            return Err(Error::NotConverged { iterations: opts.max_iter, residual });
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: f64::NAN })
}

/// Newton for a period-1 point on `Fix R`: one unknown `t` along the
/// diagonal of the symmetry chart, Gauss–Newton on `f(p(t)) − p(t)`. At a
/// pitchfork the degenerate direction is transverse to `Fix R`, so this
/// stays well conditioned where plain Newton drifts to the asymmetric pair.
pub fn newton_symmetric<M: PlanarMap + ?Sized>(map: &M, seed: Point2, opts: &SolverOptions) -> Result<NewtonRoot> {
    let c = map.symmetry_chart(seed)?;
    let mut t = 0.5 * (c.x + c.y);
    let on_fix = |t: f64| map.symmetry_chart_inverse(Point2::new(t, t));
    for it in 0..opts.max_iter {
        let p = on_fix(t)?;
        let (q, jac) = map.apply_with_jacobian(p)?;
        let f = q - p;
        let residual = f.norm_max();
        if !residual.is_finite() {
            return Err(Error::Escape { map: "newton", step: 1 });
        }
        if residual <= ROUNDING_RESIDUAL * p.norm_max().max(1.0)
            || (it + 1 == opts.max_iter && residual < opts.residual_tol)
        {
            let singular = jac.sub_identity(1.0).inverse().is_none();
            return Ok(NewtonRoot { point: p, jacobian: jac, residual, singular });
        }
        let h = 1e-6 * t.abs().max(1e-3);
        let dp = (1.0 / (2.0 * h)) * (on_fix(t + h)? - on_fix(t - h)?);
        let v = jac.sub_identity(1.0).apply(dp);
        let vv = v.x * v.x + v.y * v.y;
        if vv == 0.0 || !vv.is_finite() {
            return Err(Error::SingularJacobian);
        }
        let step = -(v.x * f.x + v.y * f.y) / vv;
        t += step;
        if step.abs() <= opts.step_tol * t.abs().max(1.0) {
            let p = on_fix(t)?;
            let (q, jac) = map.apply_with_jacobian(p)?;
            let residual = (q - p).norm_max();
            if residual < opts.residual_tol {
                let singular = jac.sub_identity(1.0).inverse().is_none();
                return Ok(NewtonRoot { point: p, jacobian: jac, residual, singular });
            }
            return Err(Error::NotConverged { iterations: it + 1, residual });
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: f64::NAN })
}

/// Build the record for a root, including the symmetry test against the
/// swap-image orbit in the map's symmetry chart.
pub fn record_from_root<M: PlanarMap + ?Sized>(
    map: &M,
    root: &NewtonRoot,
    period: usize,
    opts: &SolverOptions,
) -> Result<FixedPointRecord> {
    let multipliers = root.jacobian.eigenvalues();
    let classification = if root.singular { Classification::Marginal } else { classify(&multipliers, opts.unit_tol) };
    let chart = map.symmetry_chart(root.point)?;
    let is_symmetric = if map.is_reversible() {
        let mirror = chart.swap();
        let mut q = root.point;
        let mut best = mirror.dist(chart);
        for _ in 1..period {
            q = map.apply(q)?;
            best = best.min(mirror.dist(map.symmetry_chart(q)?));
        }
        best < opts.symmetry_tol
    } else {
        false
    };
    Ok(FixedPointRecord {
        point: root.point,
        chart,
        period,
        multipliers,
        classification,
        is_symmetric,
        residual: root.residual,
    })
}

/// Fixed points of `map^period` seeded from a `grid × grid` lattice on `seed_box`.
pub fn find_fixed_points<M: PlanarMap + ?Sized>(
    map: &M,
    seed_box: Rect,
    grid: usize,
    period: usize,
) -> Result<Vec<FixedPointRecord>> {
    if grid < 3 {
        return Err(Error::InvalidParameter(format!("seed grid {grid} below 3")));
    }
    find_fixed_points_with(map, &seed_box.grid(grid), period, &SolverOptions::default())
}

/// Fixed points of `map^period` from explicit seeds. Divergent seeds are
/// dropped; roots are deduplicated up to orbit rotation, points of smaller
/// least period are removed, and each orbit is represented by its
/// lexicographically smallest point. The result is sorted by `(x, y)`.
pub fn find_fixed_points_with<M: PlanarMap + ?Sized>(
    map: &M,
    seeds: &[Point2],
    period: usize,
    opts: &SolverOptions,
) -> Result<Vec<FixedPointRecord>> {
    if period == 0 {
        return Err(Error::InvalidParameter("period must be at least 1".into()));
    }
    let roots: Vec<Option<NewtonRoot>> =
        seeds.par_iter().with_min_len(8).map(|&s| newton_periodic(map, s, period, opts).ok()).collect();

    let mut orbits: Vec<Vec<Point2>> = Vec::new();
    for root in roots.into_iter().flatten() {
        let tol = opts.dedup_tol * root.point.norm_max().max(1.0);
        if orbits.iter().flatten().any(|q| q.dist(root.point) < tol) {
            continue;
        }
        let Ok(orbit) = orbit_points(map, root.point, period) else { continue };
        if orbit[1..].iter().any(|q| q.dist(root.point) < tol) {
            continue;
        }
        orbits.push(orbit);
    }

    let mut records = Vec::with_capacity(orbits.len());
    for orbit in orbits {
        let rep = orbit
            .iter()
            .copied()
            .min_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
            .expect("orbit is non-empty");
        let root = if rep == orbit[0] {
            let (q, jacobian) = iterate_with_jacobian(map, rep, period)?;
            let residual = (q - rep).norm_max();
            NewtonRoot { point: rep, jacobian, residual, singular: jacobian.sub_identity(1.0).inverse().is_none() }
        } else {
            match newton_periodic(map, rep, period, opts) {
                Ok(r) => r,
                Err(_) => continue,
            }
        };
        records.push(record_from_root(map, &root, period, opts)?);
    }
    records.sort_by(|a, b| a.point.x.total_cmp(&b.point.x).then(a.point.y.total_cmp(&b.point.y)));
    Ok(records)
}

fn orbit_points<M: PlanarMap + ?Sized>(map: &M, p: Point2, period: usize) -> Result<Vec<Point2>> {
    let mut pts = Vec::with_capacity(period);
    pts.push(p);
    let mut q = p;
    for _ in 1..period {
        q = map.apply(q)?;
        pts.push(q);
    }
    Ok(pts)
}

/// Check that `record` is a periodic point of `map` to `tol`, independently of the solver.
pub fn verify_record<M: PlanarMap + ?Sized>(map: &M, record: &FixedPointRecord, tol: f64) -> Result<bool> {
    let q = iterate(map, record.point, record.period)?;
    Ok((q - record.point).norm_max() < tol)
}
