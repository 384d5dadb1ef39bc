//! First-return maps `T1k = T1 T0^k`, `T2k = T2 T0^k`,
//! `T12km = T2 T0^m T1 T0^k` and their rescaling to the limit families.
//!
//! Rescaled coordinates live in the cross chart `(x0, yk)`: the first
//! coordinate of a point and the second coordinate of its `k`-th `T0` iterate.
//! In that chart the reversor of every return map acts as the plain swap.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Jacobian2, PlanarMap, Point2, Rect};
use crate::global::GlobalMapParams;
use crate::limit::{HenonParams, LimitMap, ProductHenonParams};
use crate::saddle::SaddleNormalForm;

/// Smallest admissible `λ^k · diam(Π)`; below this the `λ^{−2k}` rescaling
/// loses the strip entirely in double precision.
pub const MIN_STRIP_SCALE: f64 = 1e-150;

/// Default enlargement factor of the Π boxes accepted by the return maps.
pub const DEFAULT_SLACK: f64 = 1.5;

/// The local map and the global maps together.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub saddle: SaddleNormalForm,
    pub global: GlobalMapParams,
}

impl Model {
    pub fn new(saddle: SaddleNormalForm, global: GlobalMapParams) -> Result<Self> {
        global.validate()?;
        let m = Self { saddle, global };
        let v = m.saddle.domain().scaled(1.0 - 1e-12);
        for b in [global.pi1_minus(), global.pi1_plus(), global.pi2_minus(), global.pi2_plus()] {
            let inside = [Point2::new(b.x0, b.y0), Point2::new(b.x1, b.y1)].iter().all(|p| v.contains(*p));
            if !inside {
                return Err(Error::InvalidParameter("Π boxes must lie inside the saddle neighbourhood V".into()));
            }
        }
        Ok(m)
    }

    pub fn reference() -> Self {
        Self::new(SaddleNormalForm::reference(), GlobalMapParams::reference()).expect("reference model is valid")
    }

    pub fn lambda(&self) -> f64 {
        self.saddle.lambda()
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { saddle: self.saddle.clone(), global: self.global.with_mu(mu) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReturnKind {
    T1k,
    T2k,
    T12km,
}

impl ReturnKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReturnKind::T1k => "T1k",
            ReturnKind::T2k => "T2k",
            ReturnKind::T12km => "T12km",
        }
    }
}

impl fmt::Display for ReturnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReturnKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1k" => Ok(ReturnKind::T1k),
            "t2k" => Ok(ReturnKind::T2k),
            "t12km" | "t12kk" => Ok(ReturnKind::T12km),
            _ => Err(Error::InvalidParameter(format!("unknown return map kind '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnMapSpec {
    pub kind: ReturnKind,
    pub k: usize,
    /// second local pass; ignored unless `kind == T12km`
    pub m: usize,
    pub mu: f64,
}

impl ReturnMapSpec {
    pub fn t1k(k: usize, mu: f64) -> Self {
        Self { kind: ReturnKind::T1k, k, m: 0, mu }
    }

    pub fn t2k(k: usize, mu: f64) -> Self {
        Self { kind: ReturnKind::T2k, k, m: 0, mu }
    }

    pub fn t12km(k: usize, m: usize, mu: f64) -> Self {
        Self { kind: ReturnKind::T12km, k, m, mu }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    /// `m` if it matters for this kind, else 0.
    pub fn m_effective(&self) -> usize {
        match self.kind {
            ReturnKind::T12km => self.m,
            _ => 0,
        }
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::InvalidParameter("mu must be finite".into()));
        }
        let diam = 2.0 * model.global.pi_radius;
        let lam = model.lambda();
        for j in [self.k, self.m_effective()] {
            if lam.powi(j as i32) * diam < MIN_STRIP_SCALE {
                return Err(Error::InvalidParameter(format!(
                    "index {j} too large: λ^{j}·diam(Π) underflows the strip scale"
                )));
            }
        }
        Ok(())
    }
}

/// A first-return map with domain bookkeeping on the Π boxes.
#[derive(Clone, Debug)]
pub struct ReturnMap {
    model: Model,
    spec: ReturnMapSpec,
    slack: f64,
}

impl ReturnMap {
    pub fn new(model: &Model, spec: ReturnMapSpec) -> Result<Self> {
        spec.validate(model)?;
        Ok(Self { model: model.with_mu(spec.mu), spec, slack: DEFAULT_SLACK })
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    pub fn spec(&self) -> &ReturnMapSpec {
        &self.spec
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { model: self.model.with_mu(mu), spec: self.spec.with_mu(mu), slack: self.slack }
    }

    fn boxed(&self, r: Rect) -> Rect {
        r.scaled(self.slack)
    }

    /// Box in which the map's points live (and to which they return).
    pub fn home_box(&self) -> Rect {
        let g = &self.model.global;
        match self.spec.kind {
            ReturnKind::T1k => g.pi1_plus(),
            ReturnKind::T2k | ReturnKind::T12km => g.pi2_plus(),
        }
    }

    fn local_pass(&self, p: Point2, j: usize, from: Rect, to: Rect) -> Result<(Point2, Jacobian2)> {
        if j == 0 {
            return Ok((p, Jacobian2::IDENTITY));
        }
        if !self.boxed(from).contains(p) {
            return Err(Error::OutsideDomain("return map strip"));
        }
        let (q, jac) = self.model.saddle.iterate_with_jacobian(p, j)?;
        if !self.boxed(to).contains(q) {
            return Err(Error::OutsideDomain("Π box after local pass"));
        }
        Ok((q, jac))
    }

    fn global_t1(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        let g = &self.model.global;
        let q = g.t1_apply(p);
        if !self.boxed(g.pi1_plus()).contains(q) {
            return Err(Error::OutsideDomain("Π1+ after T1"));
        }
        Ok((q, g.t1_jacobian(p)))
    }

    fn global_t2(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        let g = &self.model.global;
        if !self.boxed(g.pi2_minus()).contains(p) {
            return Err(Error::OutsideDomain("Π2- before T2"));
        }
        let (q, j) = g.t2_apply_with_jacobian(p)?;
        if !self.boxed(g.pi2_plus()).contains(q) {
            return Err(Error::OutsideDomain("Π2+ after T2"));
        }
        Ok((q, j))
    }

    fn evaluate(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        let g = &self.model.global;
        let s = &self.spec;
        match s.kind {
            ReturnKind::T1k => {
                let (q, j0) = self.local_pass(p, s.k, g.pi1_plus(), g.pi1_minus())?;
                if s.k == 0 && !self.boxed(g.pi1_minus()).contains(q) {
                    return Err(Error::OutsideDomain("Π1- before T1"));
                }
                let (r, j1) = self.global_t1(q)?;
                Ok((r, j1.compose(&j0)))
            }
            ReturnKind::T2k => {
                let (q, j0) = self.local_pass(p, s.k, g.pi2_plus(), g.pi2_minus())?;
                let (r, j2) = self.global_t2(q)?;
                Ok((r, j2.compose(&j0)))
            }
            ReturnKind::T12km => {
                let (q, j0) = self.local_pass(p, s.k, g.pi2_plus(), g.pi1_minus())?;
                let (r, j1) = self.global_t1(q)?;
                let (u, jm) = self.local_pass(r, s.m, g.pi1_plus(), g.pi2_minus())?;
                let (w, j2) = self.global_t2(u)?;
                Ok((w, j2.compose(&jm).compose(&j1).compose(&j0)))
            }
        }
    }

    /// Cross-chart coordinates `(x0, yk)` of a point of the home strip.
    pub fn chart(&self, p: Point2) -> Result<Point2> {
        if self.spec.k == 0 {
            return Ok(p);
        }
        let q = self.model.saddle.t0_iterate_direct(p, self.spec.k)?;
        Ok(Point2::new(p.x, q.y))
    }

    /// Chart value and its derivative `∂(x0, yk)/∂(x0, y0)`.
    pub fn chart_with_jacobian(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        if self.spec.k == 0 {
            return Ok((p, Jacobian2::IDENTITY));
        }
        let (q, j) = self.model.saddle.iterate_with_jacobian(p, self.spec.k)?;
        Ok((Point2::new(p.x, q.y), Jacobian2::new(1.0, 0.0, j.a21, j.a22)))
    }

    /// Physical point with the given cross-chart coordinates.
    pub fn chart_inverse(&self, c: Point2) -> Result<Point2> {
        if self.spec.k == 0 {
            return Ok(c);
        }
        let (_, y0) = self.model.saddle.t0_cross_iterate(c.x, c.y, self.spec.k)?;
        Ok(Point2::new(c.x, y0))
    }
}

impl PlanarMap for ReturnMap {
    fn apply(&self, p: Point2) -> Result<Point2> {
        Ok(self.evaluate(p)?.0)
    }

    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        Ok(self.evaluate(p)?.1)
    }

    fn apply_with_jacobian(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        self.evaluate(p)
    }

    fn symmetry_chart(&self, p: Point2) -> Result<Point2> {
        self.chart(p)
    }

    fn symmetry_chart_inverse(&self, c: Point2) -> Result<Point2> {
        self.chart_inverse(c)
    }

    fn is_reversible(&self) -> bool {
        self.spec.kind == ReturnKind::T12km
    }
}

/// Evaluate the return map described by `spec` at `p`.
pub fn first_return_apply(model: &Model, spec: ReturnMapSpec, p: Point2) -> Result<Point2> {
    ReturnMap::new(model, spec)?.apply(p)
}

/// Strips `σ^0 ⊂ Πi+` whose `T0^k` images `σ^1` land in `Πj−`.
#[derive(Clone, Debug, PartialEq)]
pub struct Strip {
    pub from: usize,
    pub to: usize,
    pub sigma0: Rect,
    pub sigma1: Rect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripGeometry {
    pub k: usize,
    pub strips: Vec<Strip>,
}

impl StripGeometry {
    pub fn strip(&self, from: usize, to: usize) -> Option<&Strip> {
        self.strips.iter().find(|s| s.from == from && s.to == to)
    }
}

/// Strip boxes computed by mapping the Π-box edges through the cross form of `T0^k`.
pub fn strip_geometry(model: &Model, k: usize) -> Result<StripGeometry> {
    if k == 0 {
        return Err(Error::InvalidParameter("strips need k >= 1".into()));
    }
    let g = &model.global;
    let plus = [(1, g.pi1_plus()), (2, g.pi2_plus())];
    let minus = [(1, g.pi1_minus()), (2, g.pi2_minus())];
    let n = 9;
    let mut strips = Vec::new();
    for (i, src) in plus {
        for (j, dst) in minus {
            let mut starts = Vec::new();
            let mut ends = Vec::new();
            for a in 0..n {
                let x0 = src.x0 + src.width() * a as f64 / (n - 1) as f64;
                for yk in [dst.y0, dst.center().y, dst.y1] {
                    if let Ok((xk, y0)) = model.saddle.t0_cross_iterate(x0, yk, k) {
                        starts.push(Point2::new(x0, y0));
                        ends.push(Point2::new(xk, yk));
                    }
                }
            }
            if let (Some(s0), Some(s1)) = (Rect::bounding(&starts), Rect::bounding(&ends)) {
                if s1.intersects(&dst) && s0.intersects(&src) {
                    strips.push(Strip { from: i, to: j, sigma0: s0, sigma1: s1 });
                }
            }
        }
    }
    Ok(StripGeometry { k, strips })
}

/// Whether a transform carries the leading-order parameters or the
/// numerically normalized ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Normalization {
    Leading,
    Refined,
}

/// Affine change of the cross-chart coordinates `c = origin + diag(scale)·P`
/// together with the limit map it is expected to approach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescaleTransform {
    pub spec: ReturnMapSpec,
    pub origin: Point2,
    pub scale: Point2,
    pub limit: LimitMap,
    pub normalization: Normalization,
}

impl RescaleTransform {
    pub fn to_chart(&self, p: Point2) -> Point2 {
        Point2::new(self.origin.x + self.scale.x * p.x, self.origin.y + self.scale.y * p.y)
    }

    pub fn from_chart(&self, c: Point2) -> Point2 {
        Point2::new((c.x - self.origin.x) / self.scale.x, (c.y - self.origin.y) / self.scale.y)
    }

    pub fn henon(&self) -> Option<HenonParams> {
        match self.limit {
            LimitMap::Henon(h) | LimitMap::MirroredHenon(h) => Some(h),
            LimitMap::ProductH(_) => None,
        }
    }

    pub fn product(&self) -> Option<ProductHenonParams> {
        match self.limit {
            LimitMap::ProductH(h) => Some(h),
            _ => None,
        }
    }

    /// The limit-family parameter that moves with `μ`: `M1` or `M̃`.
    pub fn moving_parameter(&self) -> f64 {
        match self.limit {
            LimitMap::Henon(h) | LimitMap::MirroredHenon(h) => h.m1,
            LimitMap::ProductH(h) => h.m_tilde(),
        }
    }

    fn with_origin(&self, origin: Point2) -> Self {
        Self { origin, ..*self }
    }
}

/// `dM/dμ` of the leading parameter map: `−dλ^{−2k}` for `T1k`/`T2k`,
/// `−(d/b²)λ^{−2m}` for `T12km`.
pub fn parameter_slope(model: &Model, kind: ReturnKind, k: usize, m: usize) -> f64 {
    let g = &model.global;
    let lam = model.lambda();
    match kind {
        ReturnKind::T1k | ReturnKind::T2k => -g.d * lam.powi(-2 * k as i32),
        ReturnKind::T12km => -(g.d / (g.b * g.b)) * lam.powi(-2 * m as i32),
    }
}

/// Value of `μ` at which the leading parameter (`M1` or `M̃`) equals `target`.
pub fn mu_for_parameter(model: &Model, kind: ReturnKind, k: usize, m: usize, target: f64) -> f64 {
    let g = &model.global;
    let lam = model.lambda();
    let lk = lam.powi(k as i32);
    let offset = match kind {
        ReturnKind::T1k | ReturnKind::T2k => lk * (g.c * g.x1_plus() - g.y1_minus()),
        ReturnKind::T12km => g.c * lk * g.y1_minus() - lam.powi(m as i32) * g.x1_plus(),
    };
    target / parameter_slope(model, kind, k, m) - offset
}

/// Leading-order rescaling: `M1 = −dλ^{−2k}(μ + λ^k(c x1⁺ − y1⁻))`, `M2 = bc`
/// with scales `(−(b/d)λ^k, −(1/d)λ^k)` for `T1k`; `c̃ = (c/b)λ^{k−m}`,
/// `M̃ = −(d/b²)λ^{−2m}(μ + cλ^k y1⁻ − λ^m x1⁺)` with both scales
/// `−(b/d)λ^m` for `T12km`. `T2k` uses the mirror image of the `T1k` transform.
pub fn rescale_params(model: &Model, spec: ReturnMapSpec) -> RescaleTransform {
    let g = &model.global;
    let lam = model.lambda();
    let lk = lam.powi(spec.k as i32);
    match spec.kind {
        ReturnKind::T1k | ReturnKind::T2k => {
            let m1 = parameter_slope(model, spec.kind, spec.k, 0) * (spec.mu + lk * (g.c * g.x1_plus() - g.y1_minus()));
            let hp = HenonParams::new(m1, g.b * g.c);
            let origin = Point2::new(g.x1_plus(), g.y1_minus());
            let scale = Point2::new(-(g.b / g.d) * lk, -lk / g.d);
            if spec.kind == ReturnKind::T1k {
                RescaleTransform {
                    spec,
                    origin,
                    scale,
                    limit: LimitMap::Henon(hp),
                    normalization: Normalization::Leading,
                }
            } else {
                RescaleTransform {
                    spec,
                    origin: origin.swap(),
                    scale: scale.swap(),
                    limit: LimitMap::MirroredHenon(hp),
                    normalization: Normalization::Leading,
                }
            }
        }
        ReturnKind::T12km => {
            let lm = lam.powi(spec.m as i32);
            let c_tilde = (g.c / g.b) * lam.powi(spec.k as i32 - spec.m as i32);
            let m_tilde = parameter_slope(model, spec.kind, spec.k, spec.m)
                * (spec.mu + g.c * lk * g.y1_minus() - lm * g.x1_plus());
            let s = -(g.b / g.d) * lm;
            RescaleTransform {
                spec,
                origin: Point2::new(g.x2_plus(), g.y1_minus()),
                scale: Point2::new(s, s),
                limit: LimitMap::ProductH(ProductHenonParams::new(c_tilde, m_tilde).expect("c̃ != 0 since bc != 0")),
                normalization: Normalization::Leading,
            }
        }
    }
}

/// The return map seen in rescaled coordinates.
#[derive(Clone, Debug)]
pub struct RescaledReturnMap {
    pub map: ReturnMap,
    pub transform: RescaleTransform,
}

impl RescaledReturnMap {
    pub fn new(model: &Model, transform: RescaleTransform) -> Result<Self> {
        Ok(Self { map: ReturnMap::new(model, transform.spec)?, transform })
    }

    /// Physical point of the home strip at rescaled coordinates `p`.
    pub fn to_physical(&self, p: Point2) -> Result<Point2> {
        self.map.chart_inverse(self.transform.to_chart(p))
    }

    pub fn from_physical(&self, p: Point2) -> Result<Point2> {
        Ok(self.transform.from_chart(self.map.chart(p)?))
    }
}

impl PlanarMap for RescaledReturnMap {
    fn apply(&self, p: Point2) -> Result<Point2> {
        let q = self.to_physical(p)?;
        let r = self.map.apply(q)?;
        self.from_physical(r)
    }

    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        Ok(self.apply_with_jacobian(p)?.1)
    }

    fn apply_with_jacobian(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        let tf = &self.transform;
        let q = self.to_physical(p)?;
        let (_, dc_in) = self.map.chart_with_jacobian(q)?;
        let (r, dt) = self.map.apply_with_jacobian(q)?;
        let (c_out, dc_out) = self.map.chart_with_jacobian(r)?;
        let dc_in_inv = dc_in.inverse().ok_or(Error::SingularJacobian)?;
        let s = Jacobian2::diag(tf.scale.x, tf.scale.y);
        let s_inv = Jacobian2::diag(1.0 / tf.scale.x, 1.0 / tf.scale.y);
        let jac = s_inv.compose(&dc_out).compose(&dt).compose(&dc_in_inv).compose(&s);
        Ok((tf.from_chart(c_out), jac))
    }

    fn is_reversible(&self) -> bool {
        self.map.is_reversible()
    }
}

fn rescaled_at(model: &Model, tf: RescaleTransform, p: Point2) -> Result<(Point2, Jacobian2)> {
    RescaledReturnMap::new(model, tf)?.apply_with_jacobian(p)
}

/// Shift the rescaling origin so the conjugated map matches its limit family
/// at the origin exactly: for `T1k`, `X̄(0,0) = 0` and `∂Ȳ/∂Y(0,0) = 0`, giving
/// `M1 = Ȳ(0,0)`; for `T12km` a shift along the diagonal with
/// `∂X̄/∂Y(0,0) = 0`, giving `M̃ = X̄(0,0)`. This absorbs the O(1) corrections
/// from the `a` coefficient and the local nonlinearity that the leading-order
/// formulas drop.
pub fn refine_transform(model: &Model, spec: ReturnMapSpec) -> Result<RescaleTransform> {
    let lead = rescale_params(model, spec);
    match spec.kind {
        ReturnKind::T1k => refine_henon(model, lead),
        ReturnKind::T2k => {
            let base = refine_henon(model, rescale_params(model, ReturnMapSpec { kind: ReturnKind::T1k, ..spec }))?;
            let hp = base.henon().expect("henon transform");
            Ok(RescaleTransform {
                spec,
                origin: base.origin.swap(),
                scale: base.scale.swap(),
                limit: LimitMap::MirroredHenon(hp),
                normalization: Normalization::Refined,
            })
        }
        ReturnKind::T12km => refine_product(model, lead),
    }
}

/// Newton on a two-dimensional condition with forward-difference Jacobian.
fn solve_conditions(f: impl Fn(Point2) -> Result<Point2>, start: Point2) -> Result<Point2> {
    let mut z = start;
    let h = 1e-6;
    for _ in 0..30 {
        let v = f(z)?;
        if v.norm_max() < 1e-13 {
            break;
        }
        let fx = f(Point2::new(z.x + h, z.y))?;
        let fy = f(Point2::new(z.x, z.y + h))?;
        let jac = Jacobian2::new((fx.x - v.x) / h, (fy.x - v.x) / h, (fx.y - v.y) / h, (fy.y - v.y) / h);
        let step = jac.solve(v).ok_or(Error::SingularJacobian)?;
        z = z - step;
        if step.norm_max() < 1e-14 {
            break;
        }
    }
    Ok(z)
}

fn refine_henon(model: &Model, lead: RescaleTransform) -> Result<RescaleTransform> {
    let shifted = |pq: Point2| {
        lead.with_origin(Point2::new(lead.origin.x + lead.scale.x * pq.x, lead.origin.y + lead.scale.y * pq.y))
    };
    let conditions = |pq: Point2| -> Result<Point2> {
        let (v, j) = rescaled_at(model, shifted(pq), Point2::new(0.0, 0.0))?;
        Ok(Point2::new(v.x, j.a22))
    };
    let g = &model.global;
    let pq = solve_conditions(conditions, Point2::new(-g.a * g.d * g.x1_plus() / g.b, 0.0))?;
    let tf = shifted(pq);
    let (v, _) = rescaled_at(model, tf, Point2::new(0.0, 0.0))?;
    let hp = HenonParams::new(v.y, g.b * g.c);
    Ok(RescaleTransform { limit: LimitMap::Henon(hp), normalization: Normalization::Refined, ..tf })
}

fn refine_product(model: &Model, lead: RescaleTransform) -> Result<RescaleTransform> {
    // unknowns: diagonal shift p and common scale factor ρ
    let adjusted = |z: Point2| RescaleTransform {
        origin: Point2::new(lead.origin.x + lead.scale.x * z.x, lead.origin.y + lead.scale.y * z.x),
        scale: Point2::new(lead.scale.x * z.y, lead.scale.y * z.y),
        ..lead
    };
    let h = 1e-3;
    let conditions = |z: Point2| -> Result<Point2> {
        let tf = adjusted(z);
        let (_, j0) = rescaled_at(model, tf, Point2::new(0.0, 0.0))?;
        let (_, jp) = rescaled_at(model, tf, Point2::new(0.0, h))?;
        let (_, jm) = rescaled_at(model, tf, Point2::new(0.0, -h))?;
        Ok(Point2::new(j0.a12, (jp.a12 - jm.a12) / (2.0 * h) + 2.0))
    };
    let z = solve_conditions(conditions, Point2::new(0.0, 1.0))?;
    let tf = adjusted(z);
    let (v, j) = rescaled_at(model, tf, Point2::new(0.0, 0.0))?;
    let php = ProductHenonParams::new(j.a11, v.x)?;
    Ok(RescaleTransform { limit: LimitMap::ProductH(php), normalization: Normalization::Refined, ..tf })
}

/// Outcome of [`rescale_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    pub transform: RescaleTransform,
    /// sup-norm distance between the conjugated return map and its limit map
    pub residual: f64,
    pub excluded: usize,
    pub total: usize,
}

impl ResidualReport {
    pub fn excluded_fraction(&self) -> f64 {
        self.excluded as f64 / self.total as f64
    }
}

/// Sup-norm distance on a `grid × grid` sample of `window` (rescaled
/// coordinates) between the rescaled return map and the limit map of the
/// refined transform. Points whose preimage leaves the strips are excluded;
/// more than 20% exclusions is an error.
pub fn rescale_residual(model: &Model, spec: ReturnMapSpec, window: Rect, grid: usize) -> Result<ResidualReport> {
    let tf = refine_transform(model, spec)?;
    rescale_residual_with(model, tf, window, grid)
}

pub fn rescale_residual_with(
    model: &Model,
    transform: RescaleTransform,
    window: Rect,
    grid: usize,
) -> Result<ResidualReport> {
    if grid < 5 {
        return Err(Error::InvalidParameter("residual grid needs at least 5 points per axis".into()));
    }
    let rmap = RescaledReturnMap::new(model, transform)?;
    let pts = window.grid(grid);
    let per_point: Vec<Option<f64>> = pts
        .par_iter()
        .map(|&p| {
            let got = rmap.apply(p).ok()?;
            let want = transform.limit.apply(p).ok()?;
            Some(got.dist(want))
        })
        .collect();
    let total = per_point.len();
    let excluded = per_point.iter().filter(|v| v.is_none()).count();
    if excluded * 5 > total {
        return Err(Error::TooManyExclusions { excluded, total });
    }
    let residual = per_point.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    Ok(ResidualReport { transform, residual, excluded, total })
}
