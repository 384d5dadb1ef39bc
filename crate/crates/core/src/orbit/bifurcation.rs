use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{
    iterate_with_jacobian, newton_periodic, newton_symmetric, record_from_root, FixedPointRecord, NewtonRoot,
    SolverOptions,
};
use crate::geometry::{Jacobian2, PlanarMap, Point2};
use crate::{Error, Result};

/// Initial number of continuation steps across a bracket.
const CONTINUATION_STEPS: usize = 64;
/// Smallest continuation step, relative to the bracket width.
const MIN_STEP: f64 = 1e-13;
/// Required distance of the critical multiplier from its target.
const MULTIPLIER_TOL: f64 = 1e-8;
/// Alternative acceptance on the normalized monitor `|χ(t)| / max(1, |J|)²`.
/// At a fold of symmetric orbits both multipliers reach `+1` together and
/// their rounding error is the square root of the monitor's.
/// A same-sign local minimum of the normalised `|χ|` below this is searched
/// for a tangential touch of the target.
const TOUCH_SCAN: f64 = 0.05;
const TOUCH_ITER: usize = 200;
/// Hard cap on continuation steps in one bracket.
const MAX_CONTINUATION_ITER: usize = 20_000;
const MONITOR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    PlusOne,
    MinusOne,
}

impl Target {
    pub fn value(&self) -> f64 {
        match self {
            Target::PlusOne => 1.0,
            Target::MinusOne => -1.0,
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus_one" | "+1" => Ok(Target::PlusOne),
            "minus_one" | "-1" => Ok(Target::MinusOne),
            _ => Err(Error::InvalidParameter(format!("unknown target '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BifurcationKind {
    Fold,
    Flip,
    Pitchfork,
}

impl BifurcationKind {
    pub fn name(&self) -> &'static str {
        match self {
            BifurcationKind::Fold => "fold",
            BifurcationKind::Flip => "flip",
            BifurcationKind::Pitchfork => "pitchfork",
        }
    }
}

impl fmt::Display for BifurcationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BifurcationHit {
    pub parameter_value: f64,
    pub kind: BifurcationKind,
    pub period: usize,
    pub located_orbit: FixedPointRecord,
    /// `|ν − target|` for the multiplier `ν` closest to the target.
    pub multiplier_error: f64,
    /// `|χ(target)| / max(1, |J|)²` at the located orbit.
    pub monitor_value: f64,
}

/// `χ(t) = det(J − tI) = t² − tr·t + det`, zero iff `t` is a multiplier.
pub fn monitor(jac: &Jacobian2, target: Target) -> f64 {
    jac.char_poly(target.value())
}

struct Tracked {
    s: f64,
    root: NewtonRoot,
    chi: f64,
}

/// Newton at parameter `s`; when `symmetric` is set the root must have that
/// symmetry status, which keeps the solver on a symmetric branch next to a
/// pitchfork.
fn solve_at<F, M>(
    family: &F,
    s: f64,
    seed: Point2,
    period: usize,
    symmetric: Option<bool>,
    opts: &SolverOptions,
) -> Result<NewtonRoot>
where
    F: Fn(f64) -> Result<M>,
    M: PlanarMap,
{
    let map = family(s)?;
    let root = if symmetric == Some(true) && period == 1 {
        newton_symmetric(&map, seed, opts)?
    } else {
        newton_periodic(&map, seed, period, opts)?
    };
    if let Some(want) = symmetric {
        if record_from_root(&map, &root, period, opts)?.is_symmetric != want {
            return Err(Error::OutsideDomain("branch switched symmetry"));
        }
    }
    Ok(root)
}

/// Track the orbit through `seed` from `bracket.0` towards `bracket.1` and
/// locate the first parameter where one of its multipliers equals `target`.
///
/// A sign change of the monitor is refined by bisection with secant steps.
/// A target reached without crossing (`|χ|` dips to zero and comes back) is
/// found by golden-section search on the dip.
/// If the orbit disappears (a fold collision) and the target is `+1`, the
/// fold is located by Newton on the extended system `F = 0, χ(1) = 0`.
/// A `+1` crossing of a symmetric orbit is reported as a pitchfork when
/// off-symmetry Newton seeds find a new asymmetric pair next to it.
pub fn detect_bifurcation<F, M>(
    family: &F,
    bracket: (f64, f64),
    target: Target,
    period: usize,
    seed: Point2,
    opts: &SolverOptions,
) -> Result<BifurcationHit>
where
    F: Fn(f64) -> Result<M> + Sync,
    M: PlanarMap,
{
    let (a, b) = bracket;
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(Error::InvalidParameter(format!("degenerate bracket ({a}, {b})")));
    }
    let width = (b - a).abs();
    let dir = (b - a).signum();
    let start_map = family(a)?;
    let root = newton_periodic(&start_map, seed, period, opts)?;
    let symmetric = start_map
        .is_reversible()
        .then(|| record_from_root(&start_map, &root, period, opts))
        .transpose()?
        .map(|r| r.is_symmetric);
    let mut cur = Tracked { s: a, chi: monitor(&root.jacobian, target), root };
    if cur.chi == 0.0 {
        return finish(family, cur.s, cur.root, target, period, width, opts);
    }
    let mut prev: Option<(f64, Point2, f64)> = None;
    let mut h = width / CONTINUATION_STEPS as f64;
    let min_step = (MIN_STEP * width).max(16.0 * f64::EPSILON * a.abs().max(b.abs()));
    let mut iterations = 0usize;
    while dir * (b - cur.s) > 0.0 {
        iterations += 1;
        if iterations > MAX_CONTINUATION_ITER {
            return Err(Error::OrbitLost { last_good: cur.s });
        }
        let s_new = if dir * (cur.s + dir * h - b) > 0.0 { b } else { cur.s + dir * h };
        let predicted = match prev {
            Some((ps, pp, _)) => cur.root.point + ((s_new - cur.s) / (cur.s - ps)) * (cur.root.point - pp),
            None => cur.root.point,
        };
        let attempt = solve_at(family, s_new, predicted, period, symmetric, opts)
            .or_else(|_| solve_at(family, s_new, cur.root.point, period, symmetric, opts));
        let accepted = match attempt {
            Ok(r) => {
                let disp = r.point.dist(cur.root.point);
                let floor = r.point.norm_max().max(1.0) * 1e-12;
                let prev_disp = prev.map(|(_, pp, _)| cur.root.point.dist(pp));
                match prev_disp {
                    Some(pd) if disp > 8.0 * pd.max(floor) => None,
                    _ => Some(r),
                }
            }
            Err(_) => None,
        };
        let Some(root) = accepted else {
            h *= 0.5;
            if h < min_step {
                if target == Target::PlusOne {
                    let (s, root) = locate_fold(family, cur.s, cur.root, period, width, opts)
                        .map_err(|_| Error::OrbitLost { last_good: cur.s })?;
                    return finish(family, s, root, target, period, width, opts);
                }
                return Err(Error::OrbitLost { last_good: cur.s });
            }
            continue;
        };
        let chi = monitor(&root.jacobian, target);
        let next = Tracked { s: s_new, root, chi };
        if chi == 0.0 {
            return finish(family, next.s, next.root, target, period, width, opts);
        }
        if chi.signum() != cur.chi.signum() {
            // A crossing can also be a jump to the partner orbit next to a
            // fold; the extended system then locates the fold itself.
            let (s, root) = match refine_crossing(family, &cur, &next, target, period, symmetric, opts) {
                Ok(found) => found,
                Err(_) if target == Target::PlusOne => locate_fold(family, cur.s, cur.root, period, width, opts)?,
                Err(e) => return Err(e),
            };
            return finish(family, s, root, target, period, width, opts);
        }
        if let Some((ps, pp, pchi)) = prev {
            let scale = cur.root.jacobian.max_abs().max(1.0).powi(2);
            let dip = cur.chi.abs() < pchi.abs() && cur.chi.abs() <= chi.abs() && cur.chi.abs() < TOUCH_SCAN * scale;
            if dip {
                if let Ok((s, root)) =
                    refine_touch(family, (ps, pp), &cur, (next.s, next.root.point), target, period, symmetric, opts)
                {
                    if monitor(&root.jacobian, target).abs() < MONITOR_TOL * root.jacobian.max_abs().max(1.0).powi(2) {
                        return finish(family, s, root, target, period, width, opts);
                    }
                }
            }
        }
        prev = Some((cur.s, cur.root.point, cur.chi));
        cur = next;
        h = (h * 1.5).min(width / CONTINUATION_STEPS as f64);
    }
    Err(Error::NoSignChange { lo: a, hi: b })
}

/// Bisection with secant (regula falsi, Illinois variant) on the monitor.
fn refine_crossing<F, M>(
    family: &F,
    lo: &Tracked,
    hi: &Tracked,
    target: Target,
    period: usize,
    symmetric: Option<bool>,
    opts: &SolverOptions,
) -> Result<(f64, NewtonRoot)>
where
    F: Fn(f64) -> Result<M>,
    M: PlanarMap,
{
    let (mut s0, mut c0, mut p0) = (lo.s, lo.chi, lo.root);
    let (mut s1, mut c1, mut p1) = (hi.s, hi.chi, hi.root);
    let mut side = 0i8;
    for it in 0..200 {
        let secant = s1 - c1 * (s1 - s0) / (c1 - c0);
        let mid = 0.5 * (s0 + s1);
        let s = if it % 3 == 2 || !secant.is_finite() || (secant - s0) * (secant - s1) >= 0.0 { mid } else { secant };
        let seed = p0.point + ((s - s0) / (s1 - s0)) * (p1.point - p0.point);
        let root = solve_at(family, s, seed, period, symmetric, opts)?;
        let chi = monitor(&root.jacobian, target);
        if chi == 0.0 || (s1 - s0).abs() <= 4.0 * f64::EPSILON * s.abs().max(f64::MIN_POSITIVE) {
            return Ok((s, root));
        }
        if chi.signum() == c0.signum() {
            s0 = s;
            c0 = chi;
            p0 = root;
            if side == -1 {
                c1 *= 0.5;
            }
            side = -1;
        } else {
            s1 = s;
            c1 = chi;
            p1 = root;
            if side == 1 {
                c0 *= 0.5;
            }
            side = 1;
        }
        if (s1 - s0).abs() <= 2.0 * f64::EPSILON * s0.abs().max(s1.abs()) {
            break;
        }
    }
    let best = if c0.abs() < c1.abs() { (s0, p0) } else { (s1, p1) };
    Ok(best)
}

/// Golden-section minimum of `|χ|` on `[lo, hi]` around `mid`, for a target
/// multiplier that is reached without crossing (the monitor touches zero).
#[allow(clippy::too_many_arguments)]
fn refine_touch<F, M>(
    family: &F,
    lo: (f64, Point2),
    mid: &Tracked,
    hi: (f64, Point2),
    target: Target,
    period: usize,
    symmetric: Option<bool>,
    opts: &SolverOptions,
) -> Result<(f64, NewtonRoot)>
where
    F: Fn(f64) -> Result<M>,
    M: PlanarMap,
{
    let sign = mid.chi.signum();
    let seed_at = |s: f64| {
        let (s0, p0, s1, p1) = if (s - mid.s) * (lo.0 - mid.s) > 0.0 {
            (mid.s, mid.root.point, lo.0, lo.1)
        } else {
            (mid.s, mid.root.point, hi.0, hi.1)
        };
        p0 + ((s - s0) / (s1 - s0)) * (p1 - p0)
    };
    let eval = |s: f64| -> Result<(f64, NewtonRoot)> {
        let root = solve_at(family, s, seed_at(s), period, symmetric, opts)?;
        Ok((sign * monitor(&root.jacobian, target), root))
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.0, hi.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut r1) = eval(x1)?;
    let (mut f2, mut r2) = eval(x2)?;
    for _ in 0..TOUCH_ITER {
        if f1 <= 0.0 {
            return Ok((x1, r1));
        }
        if f2 <= 0.0 {
            return Ok((x2, r2));
        }
        if f1 < f2 {
            (b, x2, f2, r2) = (x2, x1, f1, r1);
            x1 = b - g * (b - a);
            (f1, r1) = eval(x1)?;
        } else {
            (a, x1, f1, r1) = (x1, x2, f2, r2);
            x2 = a + g * (b - a);
            (f2, r2) = eval(x2)?;
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(if f1 < f2 { (x1, r1) } else { (x2, r2) })
}

/// Locate a fold of the orbit through `root` at parameter `s` by Newton on
/// `(f^n(p) − p, det(Df^n − I)) = 0` in the unknowns `(p, s)`. Parameter and
/// second derivatives come from central differences with steps relative to
/// `width` and to the orbit's local length scale.
pub fn locate_fold<F, M>(
    family: &F,
    s: f64,
    root: NewtonRoot,
    period: usize,
    width: f64,
    opts: &SolverOptions,
) -> Result<(f64, NewtonRoot)>
where
    F: Fn(f64) -> Result<M>,
    M: PlanarMap,
{
    let eval = |p: Point2, s: f64| -> Result<([f64; 3], Jacobian2)> {
        let (q, j) = iterate_with_jacobian(&family(s)?, p, period)?;
        Ok(([q.x - p.x, q.y - p.y, j.sub_identity(1.0).det()], j))
    };
    let hs = 1e-7 * width;
    let mut p = root.point;
    let mut s = s;
    for _ in 0..60 {
        let (g, j) = eval(p, s)?;
        let hp = 1e-6 * p.norm_max().max(1.0) / j.max_abs().max(1.0);
        let col = |dp: Point2, ds: f64, h: f64| -> Result<[f64; 3]> {
            let (gp, _) = eval(p + dp, s + ds)?;
            let (gm, _) = eval(p - dp, s - ds)?;
            Ok([(gp[0] - gm[0]) / (2.0 * h), (gp[1] - gm[1]) / (2.0 * h), (gp[2] - gm[2]) / (2.0 * h)])
        };
        let cx = col(Point2::new(hp, 0.0), 0.0, hp)?;
        let cy = col(Point2::new(0.0, hp), 0.0, hp)?;
        let cs = col(Point2::new(0.0, 0.0), hs, hs)?;
        // Exact first-derivative rows for the fixed-point equations.
        let a = [[j.a11 - 1.0, j.a12, cs[0]], [j.a21, j.a22 - 1.0, cs[1]], [cx[2], cy[2], cs[2]]];
        let d = solve3(a, [-g[0], -g[1], -g[2]]).ok_or(Error::SingularJacobian)?;
        p = Point2::new(p.x + d[0], p.y + d[1]);
        s += d[2];
        let small_p = d[0].abs().max(d[1].abs()) <= opts.step_tol * p.norm_max().max(1.0);
        let small_s = d[2].abs() <= 1e-15 * width.max(s.abs());
        if small_p && small_s {
            let r = newton_periodic(&family(s)?, p, period, opts)?;
            return Ok((s, r));
        }
    }
    Err(Error::NotConverged { iterations: 60, residual: f64::NAN })
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn finish<F, M>(
    family: &F,
    s: f64,
    mut root: NewtonRoot,
    target: Target,
    period: usize,
    width: f64,
    opts: &SolverOptions,
) -> Result<BifurcationHit>
where
    F: Fn(f64) -> Result<M> + Sync,
    M: PlanarMap,
{
    let mut s = s;
    let critical = |map: &M, root: &NewtonRoot| -> Result<(FixedPointRecord, f64, f64)> {
        let rec = record_from_root(map, root, period, opts)?;
        let miss = rec.distance_to_multiplier(target.value());
        let chi = monitor(&root.jacobian, target).abs() / root.jacobian.max_abs().max(1.0).powi(2);
        Ok((rec, miss, chi))
    };
    let accept = |miss: f64, chi: f64| miss < MULTIPLIER_TOL || chi < MONITOR_TOL;
    let (mut record, mut miss, mut chi) = critical(&family(s)?, &root)?;
    if !accept(miss, chi) && target == Target::PlusOne {
        let (s2, r2) = locate_fold(family, s, root, period, width, opts)?;
        s = s2;
        root = r2;
        (record, miss, chi) = critical(&family(s)?, &root)?;
    }
    if !accept(miss, chi) {
        return Err(Error::NotConverged { iterations: 0, residual: miss });
    }
    let kind = match target {
        Target::MinusOne => BifurcationKind::Flip,
        Target::PlusOne if record.is_symmetric && splits_off_symmetry(family, s, &record, width, opts) => {
            BifurcationKind::Pitchfork
        }
        Target::PlusOne => BifurcationKind::Fold,
    };
    Ok(BifurcationHit {
        parameter_value: s,
        kind,
        period,
        located_orbit: record,
        multiplier_error: miss,
        monitor_value: chi,
    })
}

/// Branch count next to a symmetric critical orbit: seed Newton off the
/// symmetry line on both sides of `s` and look for a new asymmetric pair.
fn splits_off_symmetry<F, M>(family: &F, s: f64, crit: &FixedPointRecord, width: f64, opts: &SolverOptions) -> bool
where
    F: Fn(f64) -> Result<M> + Sync,
    M: PlanarMap,
{
    let scale = crit.point.norm_max().max(1.0);
    let chart_scale = match crit.chart.norm_max() {
        n if n > 0.0 => n,
        _ => 1.0,
    };
    let offsets = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 5e-2];
    [-1.0, 1.0].par_iter().any(|&side| {
        let Ok(map) = family(s + side * 1e-3 * width) else { return false };
        let mut found: Vec<Point2> = Vec::new();
        for &e in &offsets {
            for dir in [Point2::new(1.0, -1.0), Point2::new(-1.0, 1.0)] {
                // Off the symmetry line in the chart where the reversor is the swap.
                let Ok(seed) = map.symmetry_chart_inverse(crit.chart + (e * chart_scale) * dir) else { continue };
                let Ok(r) = newton_periodic(&map, seed, crit.period, opts) else { continue };
                let Ok(rec) = record_from_root(&map, &r, crit.period, opts) else { continue };
                let near = r.point.dist(crit.point) < 0.5 * scale;
                if near && !rec.is_symmetric && !found.iter().any(|q| q.dist(r.point) < 1e-6 * scale) {
                    found.push(r.point);
                }
            }
        }
        found.len() >= 2
    })
}

/// All crossings of `target` found by tracking every orbit returned by
/// `starts` at either end of the bracket towards the other end. Hits closer
/// than `1e-9` relative in the parameter are merged; output is sorted.
pub fn bifurcations_in<F, M, S>(
    family: &F,
    bracket: (f64, f64),
    target: Target,
    period: usize,
    starts: &S,
    opts: &SolverOptions,
) -> Vec<BifurcationHit>
where
    F: Fn(f64) -> Result<M> + Sync,
    M: PlanarMap,
    S: Fn(f64) -> Result<Vec<FixedPointRecord>> + Sync,
{
    let (a, b) = bracket;
    let mut jobs: Vec<((f64, f64), Point2)> = Vec::new();
    for (from, to) in [(a, b), (b, a)] {
        if let Ok(records) = starts(from) {
            jobs.extend(records.into_iter().map(|r| ((from, to), r.point)));
        }
    }
    let hits: Vec<Option<BifurcationHit>> =
        jobs.par_iter().map(|&(br, seed)| detect_bifurcation(family, br, target, period, seed, opts).ok()).collect();
    let mut out: Vec<BifurcationHit> = Vec::new();
    for hit in hits.into_iter().flatten() {
        let tol = 1e-9 * hit.parameter_value.abs().max((b - a).abs());
        let dup = out.iter().any(|h| {
            (h.parameter_value - hit.parameter_value).abs() < tol
                && h.located_orbit.point.dist(hit.located_orbit.point)
                    < 1e-4 * h.located_orbit.point.norm_max().max(1.0)
        });
        if !dup {
            out.push(hit);
        }
    }
    out.sort_by(|x, y| x.parameter_value.total_cmp(&y.parameter_value));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::limit::{HenonParams, ProductHenonParams};
    use crate::orbit::find_fixed_points;

    fn henon_family(m2: f64) -> impl Fn(f64) -> Result<HenonParams> + Sync {
        move |m1| Ok(HenonParams::new(m1, m2))
    }

    fn h_family(c: f64) -> impl Fn(f64) -> Result<ProductHenonParams> + Sync {
        move |m| ProductHenonParams::new(c, m)
    }

    #[test]
    fn henon_fold_from_the_existing_side() {
        let fam = henon_family(-0.5);
        let opts = SolverOptions::default();
        let start = find_fixed_points(&fam(0.0).unwrap(), Rect::square(3.0), 9, 1).unwrap();
        let hit = detect_bifurcation(&fam, (0.0, -1.0), Target::PlusOne, 1, start[1].point, &opts).unwrap();
        assert_eq!(hit.kind, BifurcationKind::Fold);
        assert!((hit.parameter_value + 0.5625).abs() < 1e-8, "{}", hit.parameter_value);
        assert!(hit.located_orbit.distance_to_multiplier(1.0) < 1e-8);
    }

    #[test]
    fn henon_flip_of_the_sink() {
        let fam = henon_family(-0.5);
        let opts = SolverOptions::default();
        let hit = detect_bifurcation(&fam, (1.0, 2.5), Target::MinusOne, 1, Point2::new(0.5, 0.5), &opts).unwrap();
        assert_eq!(hit.kind, BifurcationKind::Flip);
        assert!((hit.parameter_value - 1.6875).abs() < 1e-8);
    }

    #[test]
    fn product_fold_and_flip_at_c_minus_one() {
        let fam = h_family(-1.0);
        let opts = SolverOptions::default();
        let starts = |m: f64| find_fixed_points(&fam(m)?, Rect::square(4.0), 13, 1);
        let folds = bifurcations_in(&fam, (-1.5, -0.5), Target::PlusOne, 1, &starts, &opts);
        assert!(folds.iter().any(|h| h.kind == BifurcationKind::Fold && (h.parameter_value + 1.0).abs() < 1e-8));
        let flips = bifurcations_in(&fam, (-0.5, 0.5), Target::MinusOne, 1, &starts, &opts);
        assert!(flips.iter().any(|h| h.parameter_value.abs() < 1e-8));
    }

    #[test]
    fn product_pitchfork() {
        let fam = h_family(-1.0);
        let opts = SolverOptions::default();
        let starts = |m: f64| find_fixed_points(&fam(m)?, Rect::square(4.0), 13, 1);
        let hits = bifurcations_in(&fam, (2.5, 3.5), Target::PlusOne, 1, &starts, &opts);
        let pf = hits.iter().find(|h| (h.parameter_value - 3.0).abs() < 1e-8).expect("pitchfork at 3");
        assert_eq!(pf.kind, BifurcationKind::Pitchfork);
        assert!(pf.located_orbit.is_symmetric);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let fam = henon_family(-0.5);
        let opts = SolverOptions::default();
        let r = detect_bifurcation(&fam, (0.5, 1.0), Target::MinusOne, 1, Point2::new(0.5, 0.5), &opts);
        assert!(matches!(r, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn product_double_flip_touch_at_c_minus_one() {
        // c̃ = −1: trace of the symmetric point is −2 + 4x², touching −2 at M̃ = 0.
        let family = h_family(-1.0);
        let seed = find_fixed_points(&family(-0.3).unwrap(), Rect::square(3.0), 16, 1)
            .unwrap()
            .into_iter()
            .find(|r| r.point.x.abs() < 0.5)
            .unwrap();
        let hit = detect_bifurcation(&family, (-0.3, 0.25), Target::MinusOne, 1, seed.point, &SolverOptions::default())
            .unwrap();
        assert_eq!(hit.kind, BifurcationKind::Flip);
        assert!(hit.parameter_value.abs() < 1e-7, "{}", hit.parameter_value);
    }

    #[test]
    fn solve3_matches_hand_solution() {
        let a = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let x = solve3(a, [3.0, 5.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
