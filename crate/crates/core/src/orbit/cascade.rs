use num_complex::Complex64;
use rayon::prelude::*;

use super::{
    bifurcations_in, find_fixed_points_with, newton_periodic, BifurcationKind, Classification, FixedPointRecord,
    SolverOptions, Target,
};
use crate::geometry::{Point2, Rect};
use crate::return_map::{
    mu_for_parameter, parameter_slope, refine_transform, rescale_params, Model, RescaledReturnMap, ReturnKind,
    ReturnMap, ReturnMapSpec,
};
use crate::{Error, Result};

/// Half-width of the rescaled seed window for return-map orbits.
const SEED_HALF: f64 = 4.0;
const SEED_GRID: usize = 9;
/// Bracket half-width as a fraction of the predicted distance between the
/// fold and the flip in limit-map units.
const BRACKET_FRACTION: f64 = 0.4;

/// An ordered parameter interval with a flag for which end is the fold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
    pub fold_at_low: bool,
}

impl Interval {
    pub fn new(fold: f64, other: f64) -> Self {
        Self { low: fold.min(other), high: fold.max(other), fold_at_low: fold <= other }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    pub fn contains(&self, mu: f64) -> bool {
        self.low < mu && mu < self.high
    }

    pub fn intersect(&self, other: &Interval) -> Option<(f64, f64)> {
        let lo = self.low.max(other.low);
        let hi = self.high.min(other.high);
        (lo < hi).then_some((lo, hi))
    }
}

/// Outcome of a cascade scan at one `k` (and `m` for the 12-orbits).
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeReport {
    pub k: usize,
    pub m: usize,
    pub mu_sn: Option<f64>,
    pub mu_pd: Option<f64>,
    pub mu_f: Option<f64>,
    pub mu_pdc: Option<f64>,
    /// `δ_k`, from the fold and flip of `T1k`.
    pub delta: Option<Interval>,
    /// `δ_k^c`, from the fold and the first flip of the elliptic point of `T12km`.
    pub delta_c: Option<Interval>,
    /// `|μ_sn(T1k) − μ_sn(T2k)|`.
    pub sn_gap: Option<f64>,
    /// Max-norm distance between the `T2k` source chart and the swapped `T1k` sink chart.
    pub pairing_error: Option<f64>,
    /// Relative mismatch between source multipliers and reciprocal sink multipliers.
    pub reciprocal_error: Option<f64>,
    /// `|λ1λ2 − 1|` of the symmetric elliptic point of `T12km` at the middle of `δ_k^c`.
    pub elliptic_det_error: Option<f64>,
    pub saddle_partner: bool,
    pub coexistence_verified: bool,
    pub diagnostics: Vec<String>,
}

impl CascadeReport {
    /// A row with nothing located yet.
    pub fn empty(k: usize, m: usize) -> Self {
        Self {
            k,
            m,
            mu_sn: None,
            mu_pd: None,
            mu_f: None,
            mu_pdc: None,
            delta: None,
            delta_c: None,
            sn_gap: None,
            pairing_error: None,
            reciprocal_error: None,
            elliptic_det_error: None,
            saddle_partner: false,
            coexistence_verified: false,
            diagnostics: Vec::new(),
        }
    }
}

/// Period-1 points of a return map. Seeds come from Newton on the rescaled
/// map over a fixed window, are carried back to physical coordinates and
/// polished there.
pub fn return_map_fixed_points(
    model: &Model,
    spec: ReturnMapSpec,
    opts: &SolverOptions,
) -> Result<Vec<FixedPointRecord>> {
    let map = ReturnMap::new(model, spec)?;
    let tf = refine_transform(model, spec).unwrap_or_else(|_| rescale_params(model, spec));
    let rescaled = RescaledReturnMap::new(model, tf)?;
    let seeds: Vec<Point2> = Rect::square(SEED_HALF)
        .grid(SEED_GRID)
        .into_par_iter()
        .filter_map(|s| newton_periodic(&rescaled, s, 1, opts).ok())
        .filter_map(|r| rescaled.to_physical(r.point).ok())
        .collect();
    find_fixed_points_with(&map, &seeds, 1, opts)
}

/// `μ` at which the refined moving parameter equals `target`.
fn mu_for_refined(model: &Model, kind: ReturnKind, k: usize, m: usize, target: f64) -> f64 {
    let slope = parameter_slope(model, kind, k, m);
    let mut mu = mu_for_parameter(model, kind, k, m, target);
    for _ in 0..3 {
        match refine_transform(model, ReturnMapSpec { kind, k, m, mu }) {
            Ok(tf) => mu += (target - tf.moving_parameter()) / slope,
            Err(_) => break,
        }
    }
    mu
}

/// Locate the `wanted` bifurcation of a return map inside a bracket centred
/// on the predicted value `m_pred` of the moving limit parameter.
#[allow(clippy::too_many_arguments)]
fn locate(
    model: &Model,
    kind: ReturnKind,
    k: usize,
    m: usize,
    target: Target,
    wanted: BifurcationKind,
    m_pred: f64,
    half: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let center = mu_for_refined(model, kind, k, m, m_pred);
    let dmu = (half / parameter_slope(model, kind, k, m)).abs();
    let bracket = (center - dmu, center + dmu);
    let spec = |mu: f64| ReturnMapSpec { kind, k, m, mu };
    let family = |mu: f64| ReturnMap::new(model, spec(mu));
    let starts = |mu: f64| return_map_fixed_points(model, spec(mu), opts);
    bifurcations_in(&family, bracket, target, 1, &starts, opts)
        .into_iter()
        .filter(|h| h.kind == wanted)
        .min_by(|a, b| (a.parameter_value - center).abs().total_cmp(&(b.parameter_value - center).abs()))
        .map(|h| h.parameter_value)
        .ok_or(Error::NoSignChange { lo: bracket.0, hi: bracket.1 })
}

/// Fold and flip `(μ_sn, μ_pd)` of `T1k` or `T2k`.
fn henon_window(model: &Model, kind: ReturnKind, k: usize, opts: &SolverOptions) -> Result<(f64, f64)> {
    let m2 = refine_transform(model, ReturnMapSpec { kind, k, m: 0, mu: mu_for_parameter(model, kind, k, 0, 0.0) })
        .ok()
        .and_then(|tf| tf.henon())
        .map(|h| h.m2)
        .unwrap_or(model.global.b * model.global.c);
    let fold = -(1.0 - m2).powi(2) / 4.0;
    let flip = 3.0 * (1.0 - m2).powi(2) / 4.0;
    let half = BRACKET_FRACTION * (flip - fold);
    let sn = locate(model, kind, k, 0, Target::PlusOne, BifurcationKind::Fold, fold, half, opts)?;
    let pd = if kind == ReturnKind::T1k {
        locate(model, kind, k, 0, Target::MinusOne, BifurcationKind::Flip, flip, half, opts)?
    } else {
        f64::NAN
    };
    Ok((sn, pd))
}

/// `δ_k` of `T1k`.
pub fn t1_window(model: &Model, k: usize, opts: &SolverOptions) -> Result<Interval> {
    let (sn, pd) = henon_window(model, ReturnKind::T1k, k, opts)?;
    Ok(Interval::new(sn, pd))
}

fn product_c_tilde(model: &Model, k: usize, m: usize) -> f64 {
    let kind = ReturnKind::T12km;
    refine_transform(model, ReturnMapSpec { kind, k, m, mu: mu_for_parameter(model, kind, k, m, 0.0) })
        .ok()
        .and_then(|tf| tf.product())
        .map(|h| h.c_tilde())
        .unwrap_or((model.global.c / model.global.b) * model.lambda().powi(k as i32 - m as i32))
}

/// `M̃` at the symmetric point `x`: root of `x² + (1 − c̃)x − M̃ = 0`.
fn symmetric_m(c: f64, x: f64) -> f64 {
    x * x + (1.0 - c) * x
}

/// Flip bracket half-width: the two flips of the symmetric point are
/// `(1 − c̃)|c̃ + 1|` apart and merge at `c̃ = −1`.
fn flip_half(c: f64) -> f64 {
    BRACKET_FRACTION * (1.0 - c) * (c + 1.0).abs()
}

/// `δ_k^c` of `T12km`: the fold creating the symmetric elliptic/saddle pair
/// and the first flip of the elliptic point.
pub fn t12_window(model: &Model, k: usize, m: usize, opts: &SolverOptions) -> Result<Interval> {
    let c = product_c_tilde(model, k, m);
    let fold = -(1.0 - c).powi(2) / 4.0;
    // The elliptic point starts at x = (c̃ − 1)/2 and moves right; it flips
    // at the first of x = ±(c̃ + 1)/2 it meets.
    let flip = symmetric_m(c, if c < 0.0 { -(c + 1.0).abs() / 2.0 } else { (c + 1.0) / 2.0 });
    let half = BRACKET_FRACTION * (flip - fold);
    let kind = ReturnKind::T12km;
    let f = locate(model, kind, k, m, Target::PlusOne, BifurcationKind::Fold, fold, half, opts)?;
    let pdc = locate(model, kind, k, m, Target::MinusOne, BifurcationKind::Flip, flip, half.min(flip_half(c)), opts)?;
    Ok(Interval::new(f, pdc))
}

/// For `c̃ < 0`, the second window in which the symmetric point of `T12km`
/// is elliptic: from its flip back at `x = |c̃ + 1|/2` to the pitchfork at
/// `x = (1 − c̃)/2`. The interval's `fold_at_low` flag marks the pitchfork end.
pub fn t12_upper_window(model: &Model, k: usize, m: usize, opts: &SolverOptions) -> Result<Interval> {
    let c = product_c_tilde(model, k, m);
    if c >= 0.0 {
        return Err(Error::Unsupported("upper elliptic window needs c̃ < 0"));
    }
    let flip = symmetric_m(c, (c + 1.0).abs() / 2.0);
    let pitchfork = 3.0 * (1.0 - c).powi(2) / 4.0;
    let half = BRACKET_FRACTION * (pitchfork - flip);
    let kind = ReturnKind::T12km;
    let pd = locate(model, kind, k, m, Target::MinusOne, BifurcationKind::Flip, flip, half.min(flip_half(c)), opts)?;
    let pf = locate(model, kind, k, m, Target::PlusOne, BifurcationKind::Pitchfork, pitchfork, half, opts)?;
    Ok(Interval::new(pf, pd))
}

fn reciprocal_mismatch(sink: &[Complex64; 2], source: &[Complex64; 2]) -> f64 {
    let inv = [1.0 / sink[0], 1.0 / sink[1]];
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
    let straight = rel(inv[0], source[0]).max(rel(inv[1], source[1]));
    let crossed = rel(inv[0], source[1]).max(rel(inv[1], source[0]));
    straight.min(crossed)
}

/// Cascade scan at one `k`: `δ_k` from `T1k`, the `T2k` fold for the
/// simultaneity check, `δ_k^c` from `T12km`, and the coexistence checks at
/// the interval midpoints.
pub fn cascade_row(model: &Model, k: usize, m: usize, opts: &SolverOptions) -> CascadeReport {
    let mut rep = CascadeReport::empty(k, m);
    match henon_window(model, ReturnKind::T1k, k, opts) {
        Ok((sn, pd)) => {
            rep.mu_sn = Some(sn);
            rep.mu_pd = Some(pd);
            rep.delta = Some(Interval::new(sn, pd));
        }
        Err(e) => rep.diagnostics.push(format!("T1k bracket: {e}")),
    }
    if let Some(sn) = rep.mu_sn {
        match henon_window(model, ReturnKind::T2k, k, opts) {
            Ok((sn2, _)) => rep.sn_gap = Some((sn2 - sn).abs()),
            Err(e) => rep.diagnostics.push(format!("T2k bracket: {e}")),
        }
    }
    match t12_window(model, k, m, opts) {
        Ok(w) => {
            rep.delta_c = Some(w);
            if w.fold_at_low {
                rep.mu_f = Some(w.low);
                rep.mu_pdc = Some(w.high);
            } else {
                rep.mu_f = Some(w.high);
                rep.mu_pdc = Some(w.low);
            }
        }
        Err(e) => rep.diagnostics.push(format!("T12km bracket: {e}")),
    }

    if let Some(d) = rep.delta {
        check_pairing(model, k, d.midpoint(), opts, &mut rep);
    }
    if let Some(dc) = rep.delta_c {
        check_elliptic(model, k, m, dc.midpoint(), opts, &mut rep);
    }
    let lam_k = model.lambda().powi(k as i32);
    rep.coexistence_verified = rep.pairing_error.is_some_and(|e| e < 1e-8)
        && rep.reciprocal_error.is_some_and(|e| e < 1e-6)
        && rep.elliptic_det_error.is_some_and(|e| e <= 10.0 * lam_k)
        && rep.saddle_partner;
    rep
}

fn check_pairing(model: &Model, k: usize, mu: f64, opts: &SolverOptions, rep: &mut CascadeReport) {
    let t1 = return_map_fixed_points(model, ReturnMapSpec::t1k(k, mu), opts);
    let t2 = return_map_fixed_points(model, ReturnMapSpec::t2k(k, mu), opts);
    let (Ok(t1), Ok(t2)) = (t1, t2) else {
        rep.diagnostics.push("pairing: return-map solve failed".into());
        return;
    };
    let sinks: Vec<_> = t1.iter().filter(|r| r.classification == Classification::Sink).collect();
    let sources: Vec<_> = t2.iter().filter(|r| r.classification == Classification::Source).collect();
    if sinks.is_empty() || sources.is_empty() {
        rep.diagnostics.push(format!("pairing: {} sinks, {} sources at midpoint", sinks.len(), sources.len()));
        return;
    }
    let mut loc: f64 = 0.0;
    let mut mult: f64 = 0.0;
    for s in &sinks {
        let mirror = s.chart.swap();
        let q = sources.iter().min_by(|a, b| a.chart.dist(mirror).total_cmp(&b.chart.dist(mirror))).expect("non-empty");
        loc = loc.max(q.chart.dist(mirror));
        mult = mult.max(reciprocal_mismatch(&s.multipliers, &q.multipliers));
    }
    rep.pairing_error = Some(loc);
    rep.reciprocal_error = Some(mult);
}

fn check_elliptic(model: &Model, k: usize, m: usize, mu: f64, opts: &SolverOptions, rep: &mut CascadeReport) {
    let Ok(recs) = return_map_fixed_points(model, ReturnMapSpec::t12km(k, m, mu), opts) else {
        rep.diagnostics.push("elliptic: return-map solve failed".into());
        return;
    };
    let elliptic = recs.iter().find(|r| r.is_symmetric && r.multipliers[0].im != 0.0);
    match elliptic {
        Some(e) => rep.elliptic_det_error = Some((e.multiplier_product() - 1.0).abs()),
        None => rep.diagnostics.push("elliptic: no symmetric point with complex multipliers".into()),
    }
    rep.saddle_partner = recs.iter().any(|r| r.is_symmetric && r.classification == Classification::Saddle);
}

/// Cascade rows for `k` in `k_range` (inclusive) with `m = k`, computed in
/// parallel and returned in order of `k`.
pub fn cascade_scan(model: &Model, k_range: (usize, usize), opts: &SolverOptions) -> Result<Vec<CascadeReport>> {
    let (k0, k1) = k_range;
    if k0 == 0 || k1 < k0 {
        return Err(Error::InvalidParameter(format!("k range {k0}..{k1}")));
    }
    for k in [k0, k1] {
        ReturnMapSpec::t12km(k, k, 0.0).validate(model)?;
    }
    Ok((k0..=k1).into_par_iter().map(|k| cascade_row(model, k, k, opts)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InventoryEntry {
    pub kind: ReturnKind,
    pub k: usize,
    pub m: usize,
    pub record: FixedPointRecord,
}

/// Classified period-1 points of all scanned return maps at one `μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inventory {
    pub mu: f64,
    pub entries: Vec<InventoryEntry>,
}

impl Inventory {
    pub fn count(&self, class: Classification) -> usize {
        self.entries.iter().filter(|e| e.record.classification == class).count()
    }

    /// At least one sink, one source and one elliptic point.
    pub fn is_mixed(&self) -> bool {
        self.count(Classification::Sink) > 0
            && self.count(Classification::Source) > 0
            && self.count(Classification::Elliptic) > 0
    }
}

/// Period-1 points of `T1k`, `T2k` and `T12km` (`|m − k| ≤ max_offset`,
/// `m ≥ 1`) for every `k` in `k_range` at the same `μ`.
pub fn mixed_dynamics_probe(
    model: &Model,
    mu: f64,
    k_range: (usize, usize),
    max_offset: usize,
    opts: &SolverOptions,
) -> Inventory {
    let mut specs = Vec::new();
    for k in k_range.0..=k_range.1 {
        specs.push(ReturnMapSpec::t1k(k, mu));
        specs.push(ReturnMapSpec::t2k(k, mu));
        for m in k.saturating_sub(max_offset).max(1)..=k + max_offset {
            specs.push(ReturnMapSpec::t12km(k, m, mu));
        }
    }
    let found: Vec<Vec<InventoryEntry>> = specs
        .par_iter()
        .map(|spec| {
            if spec.validate(model).is_err() {
                return Vec::new();
            }
            return_map_fixed_points(model, *spec, opts)
                .unwrap_or_default()
                .into_iter()
                .map(|record| InventoryEntry { kind: spec.kind, k: spec.k, m: spec.m_effective(), record })
                .collect()
        })
        .collect();
    Inventory { mu, entries: found.into_iter().flatten().collect() }
}

/// Search for a `μ` with mixed dynamics: intersect every `δ_k` with every
/// elliptic window of `T12km` in range (`δ_{km}^c` and the upper window),
/// probe the midpoints of the overlaps in order of `|μ|`, and return the
/// first inventory that is mixed.
pub fn search_mixed_mu(
    model: &Model,
    k_range: (usize, usize),
    max_offset: usize,
    opts: &SolverOptions,
) -> Option<Inventory> {
    let ks: Vec<usize> = (k_range.0..=k_range.1).collect();
    let deltas: Vec<Interval> = ks.par_iter().filter_map(|&k| t1_window(model, k, opts).ok()).collect();
    let pairs: Vec<(usize, usize)> =
        ks.iter().flat_map(|&k| (k.saturating_sub(max_offset).max(1)..=k + max_offset).map(move |m| (k, m))).collect();
    let deltas_c: Vec<Interval> = pairs
        .par_iter()
        .flat_map_iter(|&(k, m)| [t12_window(model, k, m, opts).ok(), t12_upper_window(model, k, m, opts).ok()])
        .flatten()
        .collect();
    let mut candidates: Vec<f64> = deltas
        .iter()
        .flat_map(|d| deltas_c.iter().filter_map(move |c| d.intersect(c)))
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect();
    candidates.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    candidates
        .into_iter()
        .map(|mu| mixed_dynamics_probe(model, mu, k_range, max_offset, opts))
        .find(Inventory::is_mixed)
}
