//! Planar points, 2×2 Jacobians and the uniform map interface.
//!
//! All distances use the max-norm on coordinates.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn swap(self) -> Self {
        Self::new(self.y, self.x)
    }

    pub fn norm_max(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm_max()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

/// Row-major 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Jacobian2 {
    pub const IDENTITY: Jacobian2 = Jacobian2::new(1.0, 0.0, 0.0, 1.0);
    /// Derivative of the swap involution.
    pub const SWAP: Jacobian2 = Jacobian2::new(0.0, 1.0, 1.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Jacobian2) -> Jacobian2 {
        Jacobian2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }

    pub fn apply(&self, v: Point2) -> Point2 {
        Point2::new(self.a11 * v.x + self.a12 * v.y, self.a21 * v.x + self.a22 * v.y)
    }

    pub fn inverse(&self) -> Option<Jacobian2> {
        let det = self.det();
        let scale = self.max_abs().powi(2);
        if det == 0.0 || !det.is_finite() || det.abs() <= 1e-300 * scale.max(1e-300) {
            return None;
        }
        Some(Jacobian2::new(self.a22 / det, -self.a12 / det, -self.a21 / det, self.a11 / det))
    }

    /// Solve `self · v = rhs`.
    pub fn solve(&self, rhs: Point2) -> Option<Point2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Point2::new((self.a22 * rhs.x - self.a12 * rhs.y) / det, (self.a11 * rhs.y - self.a21 * rhs.x) / det))
    }

    pub fn sub_identity(&self, s: f64) -> Jacobian2 {
        Jacobian2::new(self.a11 - s, self.a12, self.a21, self.a22 - s)
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn max_deviation(&self, other: &Jacobian2) -> f64 {
        (self.a11 - other.a11)
            .abs()
            .max((self.a12 - other.a12).abs())
            .max((self.a21 - other.a21).abs())
            .max((self.a22 - other.a22).abs())
    }

    /// Characteristic polynomial `t² − tr·t + det` evaluated at `t`.
    pub fn char_poly(&self, t: f64) -> f64 {
        t * t - self.trace() * t + self.det()
    }

    /// Eigenvalues, ordered by increasing modulus for real pairs and with the
    /// positive imaginary part first for complex pairs.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let tr = self.trace();
        let det = self.det();
        let half = 0.5 * tr;
        let disc = half * half - det;
        if disc >= 0.0 {
            let root = disc.sqrt();
            // avoid cancellation in the smaller root
            let big = if half >= 0.0 { half + root } else { half - root };
            let small = if big != 0.0 { det / big } else { 0.0 };
            let (a, b) = if small.abs() <= big.abs() { (small, big) } else { (big, small) };
            [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
        } else {
            let im = (-disc).sqrt();
            [Complex64::new(half, im), Complex64::new(half, -im)]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

/// Axis-aligned box `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn centered(c: Point2, rx: f64, ry: f64) -> Self {
        Self::new(c.x - rx, c.x + rx, c.y - ry, c.y + ry)
    }

    pub fn square(half: f64) -> Self {
        Self::new(-half, half, -half, half)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Box with the same center and both half-widths multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Rect {
        let c = self.center();
        Rect::centered(c, 0.5 * self.width() * factor, 0.5 * self.height() * factor)
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(self.x0.min(other.x0), self.x1.max(other.x1), self.y0.min(other.y0), self.y1.max(other.y1))
    }

    pub fn bounding(points: &[Point2]) -> Option<Rect> {
        let first = points.first()?;
        let mut r = Rect::new(first.x, first.x, first.y, first.y);
        for p in &points[1..] {
            r = r.union(&Rect::new(p.x, p.x, p.y, p.y));
        }
        Some(r)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    /// Uniform `n × n` grid including the corners; a degenerate box yields
    /// repeated copies of its single point, `n = 1` the center.
    pub fn grid(&self, n: usize) -> Vec<Point2> {
        self.grid_xy(n, n)
    }

    pub fn grid_xy(&self, nx: usize, ny: usize) -> Vec<Point2> {
        let coord = |lo: f64, hi: f64, i: usize, n: usize| {
            if n <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                out.push(Point2::new(coord(self.x0, self.x1, i, nx), coord(self.y0, self.y1, j, ny)));
            }
        }
        out
    }
}

/// A smooth planar map with an analytic Jacobian.
///
/// Implementations are immutable values; a parameter change produces a new map.
pub trait PlanarMap: Send + Sync {
    fn apply(&self, p: Point2) -> Result<Point2>;

    fn jacobian(&self, p: Point2) -> Result<Jacobian2>;

    fn apply_with_jacobian(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        Ok((self.apply(p)?, self.jacobian(p)?))
    }

    fn inverse(&self, _p: Point2) -> Result<Point2> {
        Err(Error::NoInverse)
    }

    /// Coordinates in which the map's reversor acts as the swap `(x, y) ↦ (y, x)`.
    fn symmetry_chart(&self, p: Point2) -> Result<Point2> {
        Ok(p)
    }

    /// Inverse of [`PlanarMap::symmetry_chart`].
    fn symmetry_chart_inverse(&self, c: Point2) -> Result<Point2> {
        Ok(c)
    }

    /// True when the swap in [`PlanarMap::symmetry_chart`] coordinates is a reversor.
    fn is_reversible(&self) -> bool {
        false
    }
}

impl<T: PlanarMap + ?Sized> PlanarMap for &T {
    fn apply(&self, p: Point2) -> Result<Point2> {
        (**self).apply(p)
    }
    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        (**self).jacobian(p)
    }
    fn apply_with_jacobian(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        (**self).apply_with_jacobian(p)
    }
    fn inverse(&self, p: Point2) -> Result<Point2> {
        (**self).inverse(p)
    }
    fn symmetry_chart(&self, p: Point2) -> Result<Point2> {
        (**self).symmetry_chart(p)
    }
    fn symmetry_chart_inverse(&self, c: Point2) -> Result<Point2> {
        (**self).symmetry_chart_inverse(c)
    }
    fn is_reversible(&self) -> bool {
        (**self).is_reversible()
    }
}

/// Map assembled from closures; used for ad-hoc and test maps.
pub struct FnMap<F, J> {
    pub eval: F,
    pub jac: J,
}

impl<F, J> FnMap<F, J>
where
    F: Fn(Point2) -> Point2 + Send + Sync,
    J: Fn(Point2) -> Jacobian2 + Send + Sync,
{
    pub fn new(eval: F, jac: J) -> Self {
        Self { eval, jac }
    }
}

impl<F, J> PlanarMap for FnMap<F, J>
where
    F: Fn(Point2) -> Point2 + Send + Sync,
    J: Fn(Point2) -> Jacobian2 + Send + Sync,
{
    fn apply(&self, p: Point2) -> Result<Point2> {
        Ok((self.eval)(p))
    }
    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        Ok((self.jac)(p))
    }
}

/// An involution `R` with `R∘R = Id` and a one-dimensional fixed line.
pub trait Involution: Send + Sync {
    fn apply(&self, p: Point2) -> Point2;
    fn fixed_line(&self) -> &'static str;
}

/// The standard linear involution `(x, y) ↦ (y, x)`, fixed line `y = x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Swap;

impl Involution for Swap {
    fn apply(&self, p: Point2) -> Point2 {
        p.swap()
    }
    fn fixed_line(&self) -> &'static str {
        "y = x"
    }
}

pub fn apply_involution(inv: &dyn Involution, p: Point2) -> Point2 {
    inv.apply(p)
}

/// Outcome of [`reversibility_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReversibilityReport {
    /// max over evaluable points of `‖f(R(f(p))) − R(p)‖`
    pub residual: f64,
    /// points skipped because `f` failed at `p` or at `R(f(p))`
    pub skipped: usize,
}

pub fn reversibility_residual(f: &dyn PlanarMap, inv: &dyn Involution, pts: &[Point2]) -> ReversibilityReport {
    let mut residual: f64 = 0.0;
    let mut skipped = 0;
    for &p in pts {
        let lhs = f.apply(p).and_then(|q| f.apply(inv.apply(q)));
        match lhs {
            Ok(q) if q.is_finite() => residual = residual.max(q.dist(inv.apply(p))),
            _ => skipped += 1,
        }
    }
    ReversibilityReport { residual, skipped }
}

/// Central-difference Jacobian with step `h`.
pub fn finite_difference_jacobian(f: &dyn PlanarMap, p: Point2, h: f64) -> Result<Jacobian2> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    let fx1 = f.apply(Point2::new(p.x + h, p.y))?;
    let fx0 = f.apply(Point2::new(p.x - h, p.y))?;
    let fy1 = f.apply(Point2::new(p.x, p.y + h))?;
    let fy0 = f.apply(Point2::new(p.x, p.y - h))?;
    let s = 0.5 / h;
    Ok(Jacobian2::new((fx1.x - fx0.x) * s, (fy1.x - fy0.x) * s, (fx1.y - fx0.y) * s, (fy1.y - fy0.y) * s))
}

/// Max entrywise deviation between the analytic and the central-difference
/// Jacobian; decays like `h²` for smooth maps.
pub fn jacobian_check(f: &dyn PlanarMap, p: Point2, h: f64) -> Result<f64> {
    let fd = finite_difference_jacobian(f, p, h)?;
    Ok(f.jacobian(p)?.max_deviation(&fd))
}
