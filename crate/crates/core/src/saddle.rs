//! Local map `T0` near the symmetric saddle `O` in main normal form.
//!
//! `T0(x, y) = (λ x (1 + h1(x, y) x y), λ⁻¹ y (1 + h2(x, y) x y))` on the box
//! `V = [−r, r]²`. The axes are the local stable (`y = 0`) and unstable
//! (`x = 0`) manifolds.

use crate::error::{Error, Result};
use crate::geometry::{reversibility_residual, Jacobian2, PlanarMap, Point2, Rect, Swap};

/// Bivariate polynomial `Σ c · xⁱ yʲ` stored as `(i, j, c)` terms.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BiPoly {
    pub terms: Vec<(u32, u32, f64)>,
}

impl BiPoly {
    pub fn constant(c: f64) -> Self {
        Self { terms: vec![(0, 0, c)] }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32)).sum()
    }

    /// `(∂/∂x, ∂/∂y)`
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for &(i, j, c) in &self.terms {
            if i > 0 {
                gx += c * i as f64 * x.powi(i as i32 - 1) * y.powi(j as i32);
            }
            if j > 0 {
                gy += c * j as f64 * x.powi(i as i32) * y.powi(j as i32 - 1);
            }
        }
        (gx, gy)
    }

    fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.2.is_finite())
    }
}

/// Choice of the coefficient functions `h1`, `h2`.
#[derive(Clone, Debug, PartialEq)]
pub enum Nonlinearity {
    /// `h1 = h2 = 0`: the linear saddle.
    Linear,
    /// `x̄ = λ x g(s)`, `ȳ = y / (λ g(s))` with `s = xy` and
    /// `g(s) = 1 + s·P(s)`; `coeffs` are the coefficients of `P` in
    /// increasing degree. Equivalent to `h1 = P(s)`, `h2 = −P(s)/g(s)`.
    /// The product `xy` is invariant and the map is exactly swap-reversible.
    ProductPreserving(Vec<f64>),
    /// General polynomial `h1`, `h2`; accepted only if the resulting map
    /// passes the reversibility check on `V`.
    Polynomial { h1: BiPoly, h2: BiPoly },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleNormalForm {
    lambda: f64,
    nonlinearity: Nonlinearity,
    radius: f64,
}

/// Per-`j` maxima returned by [`SaddleNormalForm::hk_bound_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct HkProbe {
    /// `(j, max |h_j|)` for `j = 1..=j_max`; `j` without usable grid points omitted.
    pub per_j: Vec<(usize, f64)>,
    pub max: f64,
}

const REVERSIBILITY_TOL: f64 = 1e-9;
const CROSS_TOL: f64 = 1e-12;
const CROSS_MAX_ITER: usize = 50;

impl SaddleNormalForm {
    pub fn new(lambda: f64, nonlinearity: Nonlinearity, radius: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must lie in (0, 1)")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius = {radius} must be positive")));
        }
        match &nonlinearity {
            Nonlinearity::Linear => {}
            Nonlinearity::ProductPreserving(coeffs) => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite coefficient".into()));
                }
                // g must stay positive for every s = xy reachable in V
                let smax = radius * radius;
                let n = 2001;
                for i in 0..n {
                    let s = -smax + 2.0 * smax * i as f64 / (n - 1) as f64;
                    if !(product_g(coeffs, s) > 0.0) {
                        return Err(Error::InvalidParameter(format!("g(s) = 1 + s·P(s) vanishes on V near s = {s}")));
                    }
                }
            }
            Nonlinearity::Polynomial { h1, h2 } => {
                if !h1.is_finite() || !h2.is_finite() {
                    return Err(Error::InvalidParameter("non-finite coefficient".into()));
                }
                let sum = h1.eval(0.0, 0.0) + h2.eval(0.0, 0.0);
                if sum.abs() > 1e-15 {
                    return Err(Error::InvalidParameter(format!("h1(0) + h2(0) = {sum:e}, must vanish")));
                }
            }
        }
        let nf = Self { lambda, nonlinearity, radius };
        if !matches!(nf.nonlinearity, Nonlinearity::Linear) {
            let rep = reversibility_residual(&nf, &Swap, &nf.domain().grid(21));
            if !(rep.residual < REVERSIBILITY_TOL) || rep.skipped > 0 {
                return Err(Error::InvalidParameter(format!(
                    "local map is not swap-reversible on V (residual {:e})",
                    rep.residual
                )));
            }
        }
        Ok(nf)
    }

    pub fn linear(lambda: f64, radius: f64) -> Result<Self> {
        Self::new(lambda, Nonlinearity::Linear, radius)
    }

    pub fn product(lambda: f64, coeffs: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(lambda, Nonlinearity::ProductPreserving(coeffs), radius)
    }

    /// λ = 0.5, `h1(0) = −h2(0) = 0.1`, `V = [−1.5, 1.5]²`.
    pub fn reference() -> Self {
        Self::product(0.5, vec![0.1], 1.5).expect("reference saddle is valid")
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn domain(&self) -> Rect {
        Rect::square(self.radius)
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.nonlinearity, Nonlinearity::Linear)
    }

    /// Values of `(h1, h2)` at `p`.
    pub fn h_values(&self, p: Point2) -> (f64, f64) {
        match &self.nonlinearity {
            Nonlinearity::Linear => (0.0, 0.0),
            Nonlinearity::ProductPreserving(c) => {
                let s = p.x * p.y;
                let ps = horner(c, s);
                (ps, -ps / (1.0 + s * ps))
            }
            Nonlinearity::Polynomial { h1, h2 } => (h1.eval(p.x, p.y), h2.eval(p.x, p.y)),
        }
    }

    /// One application of the formula, without domain checks.
    pub fn map_point(&self, p: Point2) -> Point2 {
        let l = self.lambda;
        match &self.nonlinearity {
            Nonlinearity::Linear => Point2::new(l * p.x, p.y / l),
            Nonlinearity::ProductPreserving(c) => {
                let g = product_g(c, p.x * p.y);
                Point2::new(l * p.x * g, p.y / (l * g))
            }
            Nonlinearity::Polynomial { h1, h2 } => {
                let s = p.x * p.y;
                Point2::new(l * p.x * (1.0 + h1.eval(p.x, p.y) * s), p.y / l * (1.0 + h2.eval(p.x, p.y) * s))
            }
        }
    }

    pub fn step_jacobian(&self, p: Point2) -> Jacobian2 {
        let l = self.lambda;
        let (x, y) = (p.x, p.y);
        match &self.nonlinearity {
            Nonlinearity::Linear => Jacobian2::diag(l, 1.0 / l),
            Nonlinearity::ProductPreserving(c) => {
                let s = x * y;
                let g = product_g(c, s);
                let dg = product_dg(c, s);
                Jacobian2::new(l * (g + s * dg), l * x * x * dg, -y * y * dg / (l * g * g), (g - s * dg) / (l * g * g))
            }
            Nonlinearity::Polynomial { h1, h2 } => {
                let s = x * y;
                let v1 = h1.eval(x, y);
                let v2 = h2.eval(x, y);
                let (g1x, g1y) = h1.gradient(x, y);
                let (g2x, g2y) = h2.gradient(x, y);
                Jacobian2::new(
                    l * (1.0 + v1 * s) + l * x * (g1x * s + v1 * y),
                    l * x * (g1y * s + v1 * x),
                    y / l * (g2x * s + v2 * y),
                    (1.0 + v2 * s) / l + y / l * (g2y * s + v2 * x),
                )
            }
        }
    }

    /// Single step with domain bookkeeping: `p` must lie in `V`; an image
    /// outside `V` is reported as an escape at step 1.
    pub fn t0_apply(&self, p: Point2) -> Result<Point2> {
        if !self.domain().contains(p) {
            return Err(Error::OutsideDomain("T0"));
        }
        let q = self.map_point(p);
        if !self.domain().contains(q) {
            return Err(Error::Escape { map: "T0", step: 1 });
        }
        Ok(q)
    }

    /// `j`-fold composition; an escape from `V` reports the first offending step.
    pub fn t0_iterate_direct(&self, p: Point2, j: usize) -> Result<Point2> {
        let v = self.domain();
        if !v.contains(p) {
            return Err(Error::Escape { map: "T0", step: 0 });
        }
        let mut q = p;
        for step in 1..=j {
            q = self.map_point(q);
            if !v.contains(q) {
                return Err(Error::Escape { map: "T0", step });
            }
        }
        Ok(q)
    }

    /// `T0^j` together with its Jacobian (chain rule), with escape checks.
    pub fn iterate_with_jacobian(&self, p: Point2, j: usize) -> Result<(Point2, Jacobian2)> {
        let v = self.domain();
        if !v.contains(p) {
            return Err(Error::Escape { map: "T0", step: 0 });
        }
        let mut q = p;
        let mut jac = Jacobian2::IDENTITY;
        for step in 1..=j {
            jac = self.step_jacobian(q).compose(&jac);
            q = self.map_point(q);
            if !v.contains(q) {
                return Err(Error::Escape { map: "T0", step });
            }
        }
        Ok((q, jac))
    }

    /// Given `x0` and the target `yj`, find `y0` with `T0^j(x0, y0) = (xj, yj)`.
    /// Returns `(xj, y0)`.
    pub fn t0_cross_iterate(&self, x0: f64, yj: f64, j: usize) -> Result<(f64, f64)> {
        if j == 0 {
            return Err(Error::InvalidParameter("cross iterate needs j >= 1".into()));
        }
        let v = self.domain();
        if x0.abs() > self.radius || yj.abs() > self.radius {
            return Err(Error::OutsideDomain("T0 cross form"));
        }
        let tol = CROSS_TOL * yj.abs().max(1.0);
        let shoot = |y0: f64| self.iterate_with_jacobian(Point2::new(x0, y0), j);

        let mut y0 = self.lambda.powi(j as i32) * yj;
        let (mut end, mut jac) = shoot(y0)?;
        let mut res = end.y - yj;
        for _ in 0..CROSS_MAX_ITER {
            if res.abs() < tol {
                return Ok((end.x, y0));
            }
            if jac.a22 == 0.0 || !jac.a22.is_finite() {
                return Err(Error::SingularJacobian);
            }
            let full = -res / jac.a22;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = y0 + t * full;
                if trial.abs() <= self.radius {
                    if let Ok((e, jn)) = shoot(trial) {
                        let r = e.y - yj;
                        if r.abs() < res.abs() {
                            y0 = trial;
                            end = e;
                            jac = jn;
                            res = r;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if res.abs() < tol && v.contains(end) {
            Ok((end.x, y0))
        } else {
            Err(Error::NotConverged { iterations: CROSS_MAX_ITER, residual: res.abs() })
        }
    }

    /// Empirical `h_j = (xj/(λ^j x0) − 1)/(j λ^j)` maxima over a `grid × grid`
    /// sample of `(x0, yj) ∈ cross_box`, for `j = 1..=j_max`.
    pub fn hk_bound_probe(&self, j_max: usize, cross_box: Rect, grid: usize) -> HkProbe {
        let pts = cross_box.grid(grid.max(1));
        let mut per_j = Vec::with_capacity(j_max);
        let mut max: f64 = 0.0;
        for j in 1..=j_max {
            let lj = self.lambda.powi(j as i32);
            let mut best: Option<f64> = None;
            for p in &pts {
                if p.x.abs() < 1e-8 {
                    continue;
                }
                if let Ok((xj, _)) = self.t0_cross_iterate(p.x, p.y, j) {
                    let h = (xj / (lj * p.x) - 1.0) / (j as f64 * lj);
                    best = Some(best.unwrap_or(0.0).max(h.abs()));
                }
            }
            if let Some(b) = best {
                max = max.max(b);
                per_j.push((j, b));
            }
        }
        HkProbe { per_j, max }
    }
}

impl PlanarMap for SaddleNormalForm {
    fn apply(&self, p: Point2) -> Result<Point2> {
        Ok(self.map_point(p))
    }

    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        Ok(self.step_jacobian(p))
    }

    /// Every accepted form is swap-reversible, so `T0⁻¹ = R T0 R`.
    fn inverse(&self, p: Point2) -> Result<Point2> {
        Ok(self.map_point(p.swap()).swap())
    }
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * s + ci)
}

fn product_g(c: &[f64], s: f64) -> f64 {
    1.0 + s * horner(c, s)
}

/// `g'(s) = P(s) + s P'(s)`
fn product_dg(c: &[f64], s: f64) -> f64 {
    let mut dp = 0.0;
    for (i, &ci) in c.iter().enumerate().skip(1).rev() {
        dp = dp * s + i as f64 * ci;
    }
    horner(c, s) + s * dp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::jacobian_check;
    use proptest::prelude::*;

    fn nonlinear() -> SaddleNormalForm {
        SaddleNormalForm::reference()
    }

    #[test]
    fn linear_examples() {
        let nf = SaddleNormalForm::linear(0.5, 1.5).unwrap();
        assert_eq!(nf.t0_apply(Point2::new(1.0, 0.2)).unwrap(), Point2::new(0.5, 0.4));
        assert_eq!(nf.t0_iterate_direct(Point2::new(1.0, 0.25), 2).unwrap(), Point2::new(0.25, 1.0));
        let (x3, y0) = nf.t0_cross_iterate(1.0, 1.0, 3).unwrap();
        assert_eq!((x3, y0), (0.125, 0.125));
    }

    #[test]
    fn axes_are_invariant() {
        let nf = nonlinear();
        let q = nf.t0_apply(Point2::new(0.0, 0.3)).unwrap();
        assert_eq!(q, Point2::new(0.0, 0.6));
        let q = nf.t0_apply(Point2::new(0.7, 0.0)).unwrap();
        assert_eq!(q, Point2::new(0.35, 0.0));
    }

    #[test]
    fn matches_hand_evaluation() {
        let nf = nonlinear();
        // s = 0.01, h1 = 0.1, h2 = −0.1/1.001
        let p = Point2::new(0.1, 0.1);
        let q = nf.t0_apply(p).unwrap();
        let h2 = -0.1 / 1.001;
        assert!((q.x - 0.5 * 0.1 * (1.0 + 0.1 * 0.01)).abs() < 1e-16);
        assert!((q.y - 2.0 * 0.1 * (1.0 + h2 * 0.01)).abs() < 1e-16);
        let (h1v, h2v) = nf.h_values(Point2::new(0.0, 0.0));
        assert_eq!(h1v, -h2v);
    }

    #[test]
    fn constant_h_form_is_rejected() {
        let poly = Nonlinearity::Polynomial { h1: BiPoly::constant(0.1), h2: BiPoly::constant(-0.1) };
        let err = SaddleNormalForm::new(0.5, poly, 1.5).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        let bad = Nonlinearity::Polynomial { h1: BiPoly::constant(0.1), h2: BiPoly::constant(0.1) };
        assert!(SaddleNormalForm::new(0.5, bad, 1.5).is_err());
        assert!(SaddleNormalForm::linear(1.0, 1.0).is_err());
        assert!(SaddleNormalForm::linear(0.5, 0.0).is_err());
        assert!(SaddleNormalForm::product(0.5, vec![1.0], 1.5).is_err());
    }

    #[test]
    fn zero_polynomial_form_is_accepted() {
        let poly = Nonlinearity::Polynomial { h1: BiPoly::default(), h2: BiPoly::default() };
        let nf = SaddleNormalForm::new(0.5, poly, 1.0).unwrap();
        assert_eq!(nf.map_point(Point2::new(0.4, 0.2)), Point2::new(0.2, 0.4));
    }

    #[test]
    fn reversibility_on_v() {
        let nf = nonlinear();
        let rep = reversibility_residual(&nf, &Swap, &nf.domain().grid(41));
        assert!(rep.residual < 1e-9, "{}", rep.residual);
    }

    #[test]
    fn iterate_zero_and_bitwise() {
        let nf = nonlinear();
        let p = Point2::new(0.1, 0.001);
        assert_eq!(nf.t0_iterate_direct(p, 0).unwrap(), p);
        let mut q = p;
        for _ in 0..5 {
            q = nf.t0_apply(q).unwrap();
        }
        assert_eq!(nf.t0_iterate_direct(p, 5).unwrap(), q);
    }

    #[test]
    fn closed_form_iterate_of_product_form() {
        let nf = nonlinear();
        let p = Point2::new(0.8, 0.002);
        let j = 7;
        let g: f64 = 1.0 + 0.1 * p.x * p.y;
        let expect = Point2::new(0.5f64.powi(j) * p.x * g.powi(j), p.y / (0.5f64.powi(j) * g.powi(j)));
        let got = nf.t0_iterate_direct(p, j as usize).unwrap();
        assert!(got.dist(expect) < 1e-14);
    }

    #[test]
    fn escape_reports_step() {
        let nf = nonlinear();
        let err = nf.t0_iterate_direct(Point2::new(0.5, 0.2), 10).unwrap_err();
        // y doubles roughly: 0.4, 0.8, 1.6 > 1.5
        assert_eq!(err, Error::Escape { map: "T0", step: 3 });
        assert!(nf.t0_apply(Point2::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn cross_round_trip() {
        let nf = nonlinear();
        let (x4, y0) = nf.t0_cross_iterate(0.2, 0.3, 4).unwrap();
        let end = nf.t0_iterate_direct(Point2::new(0.2, y0), 4).unwrap();
        assert!((end.y - 0.3).abs() < 1e-12);
        assert_eq!(end.x, x4);
    }

    #[test]
    fn cross_single_step_closed_form() {
        let nf = nonlinear();
        // ȳ = y / (λ (1 + 0.1 x y)) solved for y: y = λ ȳ / (1 − 0.1 λ x ȳ)
        let (x0, y1) = (0.6, 0.9);
        let y0 = 0.5 * y1 / (1.0 - 0.1 * 0.5 * x0 * y1);
        let (x1, y0n) = nf.t0_cross_iterate(x0, y1, 1).unwrap();
        assert!((y0n - y0).abs() < 1e-14);
        assert!((x1 - 0.5 * x0 * (1.0 + 0.1 * x0 * y0)).abs() < 1e-14);
        assert!(nf.t0_cross_iterate(0.1, 0.1, 0).is_err());
    }

    #[test]
    fn hk_probe_linear_is_zero() {
        let nf = SaddleNormalForm::linear(0.5, 1.5).unwrap();
        let probe = nf.hk_bound_probe(10, Rect::new(0.1, 1.0, -1.0, 1.0), 5);
        assert_eq!(probe.max, 0.0);
        assert_eq!(probe.per_j.len(), 10);
    }

    #[test]
    fn hk_probe_is_bounded() {
        let nf = nonlinear();
        let probe = nf.hk_bound_probe(15, Rect::new(0.2, 1.0, 0.2, 1.0), 7);
        let vals: Vec<f64> = probe.per_j.iter().filter(|(j, _)| *j >= 2).map(|p| p.1).collect();
        let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(hi / lo < 2.0, "{vals:?}");
    }

    #[test]
    fn hk_probe_degenerate_box() {
        let nf = nonlinear();
        let probe = nf.hk_bound_probe(3, Rect::new(0.5, 0.5, 0.5, 0.5), 4);
        assert_eq!(probe.per_j.len(), 3);
        let skipped = nf.hk_bound_probe(3, Rect::new(0.0, 0.0, 0.5, 0.5), 4);
        assert!(skipped.per_j.is_empty());
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let nf = nonlinear();
        let poly = SaddleNormalForm::new(
            0.5,
            Nonlinearity::Polynomial {
                h1: BiPoly { terms: vec![(1, 0, 0.3), (0, 1, -0.3)] },
                h2: BiPoly { terms: vec![(0, 1, 0.3), (1, 0, -0.3)] },
            },
            1.0,
        );
        // antisymmetric linear h terms are not reversible either
        assert!(poly.is_err());
        for p in [Point2::new(0.3, -0.7), Point2::new(1.1, 0.9)] {
            let d1 = jacobian_check(&nf, p, 1e-3).unwrap();
            let d2 = jacobian_check(&nf, p, 1e-4).unwrap();
            assert!(d1 < 1e-6 && d2 < d1);
        }
    }

    #[test]
    fn polynomial_jacobian_matches_finite_differences() {
        // bypass construction to exercise the general Jacobian formula
        let nf = SaddleNormalForm {
            lambda: 0.5,
            nonlinearity: Nonlinearity::Polynomial {
                h1: BiPoly { terms: vec![(0, 0, 0.1), (1, 1, 0.2), (2, 0, -0.1)] },
                h2: BiPoly { terms: vec![(0, 0, -0.1), (0, 2, 0.05)] },
            },
            radius: 1.0,
        };
        let p = Point2::new(0.4, -0.3);
        assert!(jacobian_check(&nf, p, 1e-4).unwrap() < 1e-7);
    }

    proptest! {
        #[test]
        fn cross_matches_direct(x0 in 0.05f64..1.2, y0s in -1.0f64..1.0, j in 1usize..12) {
            let nf = nonlinear();
            let y0 = y0s * 0.5f64.powi(j as i32) * 1.2;
            let p = Point2::new(x0, y0);
            if let Ok(end) = nf.t0_iterate_direct(p, j) {
                let (xj, y0n) = nf.t0_cross_iterate(x0, end.y, j).unwrap();
                prop_assert!((xj - end.x).abs() < 1e-10);
                prop_assert!((y0n - y0).abs() < 1e-10);
                // |xj − λ^j x0| ≤ C j λ^{2j} |x0| with C = 0.1 · r
                let lj = 0.5f64.powi(j as i32);
                prop_assert!((xj - lj * x0).abs() <= 0.2 * j as f64 * lj * lj * x0.abs() * 1.2 + 1e-15);
            }
        }

        #[test]
        fn inverse_round_trip(x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let nf = nonlinear();
            let p = Point2::new(x, y);
            let back = nf.inverse(nf.map_point(p)).unwrap();
            prop_assert!(back.dist(p) < 1e-12);
        }

        #[test]
        fn axes_invariant(y in -1.5f64..1.5) {
            let nf = nonlinear();
            prop_assert_eq!(nf.map_point(Point2::new(0.0, y)).x, 0.0);
            prop_assert_eq!(nf.map_point(Point2::new(y, 0.0)).y, 0.0);
        }
    }
}
