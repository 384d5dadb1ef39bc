//! Global maps along the two homoclinic excursions.
//!
//! `T1: Π1− → Π1+` is the quadratic model
//! `(x, y) ↦ (x1⁺ + a x + b η, μ + c x + d η²)` with `η = y − y1⁻`, optionally
//! extended by cubic terms. `T2 = R T1⁻¹ R` follows from reversibility.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Jacobian2, PlanarMap, Point2, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Configuration {
    Figure8,
    Fish,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Orientable,
    Nonorientable,
}

impl Configuration {
    pub fn name(&self) -> &'static str {
        match self {
            Configuration::Figure8 => "figure8",
            Configuration::Fish => "figureFish",
        }
    }
}

impl FromStr for Configuration {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "figure8" | "figure-8" => Ok(Configuration::Figure8),
            "figurefish" | "figure-fish" | "fish" => Ok(Configuration::Fish),
            _ => Err(Error::InvalidParameter(format!("unknown configuration '{s}'"))),
        }
    }
}

impl Orientation {
    pub fn name(&self) -> &'static str {
        match self {
            Orientation::Orientable => "orientable",
            Orientation::Nonorientable => "nonorientable",
        }
    }
}

impl FromStr for Orientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "orientable" => Ok(Orientation::Orientable),
            "nonorientable" | "non-orientable" => Ok(Orientation::Nonorientable),
            _ => Err(Error::InvalidParameter(format!("unknown orientation '{s}'"))),
        }
    }
}

/// Cubic corrections added to `T1`. Each array holds the coefficients of
/// `x³, x²η, xη², η³` for the first and second component.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CubicTerms {
    pub phi1: [f64; 4],
    pub phi2: [f64; 4],
}

impl CubicTerms {
    fn eval(c: &[f64; 4], x: f64, e: f64) -> f64 {
        c[0] * x * x * x + c[1] * x * x * e + c[2] * x * e * e + c[3] * e * e * e
    }

    fn grad(c: &[f64; 4], x: f64, e: f64) -> (f64, f64) {
        (3.0 * c[0] * x * x + 2.0 * c[1] * x * e + c[2] * e * e, c[1] * x * x + 2.0 * c[2] * x * e + 3.0 * c[3] * e * e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalMapParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub mu: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub configuration: Configuration,
    pub orientation: Orientation,
    /// half-width of the Π boxes around the homoclinic points
    pub pi_radius: f64,
    pub cubic: Option<CubicTerms>,
}

impl GlobalMapParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        mu: f64,
        alpha1: f64,
        alpha2: f64,
        configuration: Configuration,
        orientation: Orientation,
    ) -> Result<Self> {
        let gp = Self { a, b, c, d, mu, alpha1, alpha2, configuration, orientation, pi_radius: 0.1, cubic: None };
        gp.validate()?;
        Ok(gp)
    }

    /// a = 0.2, b = 1, c = −0.5, d = 1, α1 = α2 = 1, figure-8, orientable, μ = 0.
    pub fn reference() -> Self {
        Self::new(0.2, 1.0, -0.5, 1.0, 0.0, 1.0, 1.0, Configuration::Figure8, Orientation::Orientable)
            .expect("reference global map is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.a, self.b, self.c, self.d, self.mu, self.alpha1, self.alpha2];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite global map coefficient".into()));
        }
        if self.d == 0.0 {
            return Err(Error::InvalidParameter("d = 0: tangency is not quadratic".into()));
        }
        if self.b * self.c == 0.0 {
            return Err(Error::InvalidParameter("bc = 0: T1 is degenerate".into()));
        }
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0) {
            return Err(Error::InvalidParameter("alpha1, alpha2 must be positive".into()));
        }
        if !(self.pi_radius > 0.0 && self.pi_radius.is_finite()) {
            return Err(Error::InvalidParameter("Π radius must be positive".into()));
        }
        let j1 = self.j1();
        match self.orientation {
            Orientation::Orientable if !(j1 > 0.0 && j1 < 1.0) => {
                Err(Error::InvalidParameter(format!("orientable case needs J1 = -bc in (0, 1), got {j1}")))
            }
            Orientation::Nonorientable if !(j1 < 0.0 && j1 != -1.0) => {
                Err(Error::InvalidParameter(format!("nonorientable case needs J1 = -bc < 0 and != -1, got {j1}")))
            }
            _ => match self.cubic {
                Some(c) if c.phi1.iter().chain(c.phi2.iter()).any(|v| !v.is_finite()) => {
                    Err(Error::InvalidParameter("non-finite cubic coefficient".into()))
                }
                _ => Ok(()),
            },
        }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    pub fn with_cubic(&self, cubic: CubicTerms) -> Result<Self> {
        let gp = Self { cubic: Some(cubic), ..*self };
        gp.validate()?;
        Ok(gp)
    }

    pub fn with_pi_radius(&self, r: f64) -> Result<Self> {
        let gp = Self { pi_radius: r, ..*self };
        gp.validate()?;
        Ok(gp)
    }

    /// Jacobian of `T1` at the tangency point, `J1 = −bc`.
    pub fn j1(&self) -> f64 {
        -self.b * self.c
    }

    pub fn x1_plus(&self) -> f64 {
        match self.configuration {
            Configuration::Figure8 => -self.alpha1,
            Configuration::Fish => self.alpha1,
        }
    }

    pub fn y2_minus(&self) -> f64 {
        self.x1_plus()
    }

    pub fn y1_minus(&self) -> f64 {
        self.alpha2
    }

    /// `R(M1⁻) = M2⁺` forces `x2⁺ = y1⁻` in both configurations.
    pub fn x2_plus(&self) -> f64 {
        self.alpha2
    }

    /// `M1⁻ = (0, y1⁻)` on the unstable manifold.
    pub fn m1_minus(&self) -> Point2 {
        Point2::new(0.0, self.y1_minus())
    }

    /// `M1⁺ = (x1⁺, 0)` on the stable manifold.
    pub fn m1_plus(&self) -> Point2 {
        Point2::new(self.x1_plus(), 0.0)
    }

    pub fn m2_minus(&self) -> Point2 {
        Point2::new(0.0, self.y2_minus())
    }

    pub fn m2_plus(&self) -> Point2 {
        Point2::new(self.x2_plus(), 0.0)
    }

    pub fn pi1_minus(&self) -> Rect {
        Rect::centered(self.m1_minus(), self.pi_radius, self.pi_radius)
    }

    pub fn pi1_plus(&self) -> Rect {
        Rect::centered(self.m1_plus(), self.pi_radius, self.pi_radius)
    }

    pub fn pi2_minus(&self) -> Rect {
        Rect::centered(self.m2_minus(), self.pi_radius, self.pi_radius)
    }

    pub fn pi2_plus(&self) -> Rect {
        Rect::centered(self.m2_plus(), self.pi_radius, self.pi_radius)
    }

    pub fn t1_apply(&self, p: Point2) -> Point2 {
        let x = p.x;
        let e = p.y - self.y1_minus();
        let mut out = Point2::new(self.x1_plus() + self.a * x + self.b * e, self.mu + self.c * x + self.d * e * e);
        if let Some(cub) = &self.cubic {
            out.x += CubicTerms::eval(&cub.phi1, x, e);
            out.y += CubicTerms::eval(&cub.phi2, x, e);
        }
        out
    }

    pub fn t1_jacobian(&self, p: Point2) -> Jacobian2 {
        let x = p.x;
        let e = p.y - self.y1_minus();
        let mut j = Jacobian2::new(self.a, self.b, self.c, 2.0 * self.d * e);
        if let Some(cub) = &self.cubic {
            let (f1x, f1e) = CubicTerms::grad(&cub.phi1, x, e);
            let (f2x, f2e) = CubicTerms::grad(&cub.phi2, x, e);
            j.a11 += f1x;
            j.a12 += f1e;
            j.a21 += f2x;
            j.a22 += f2e;
        }
        j
    }

    /// Closed-form preimage under the quadratic part: the small root `η` of
    /// `(ad/c) η² − b η + K = 0`, `K = (x̄ − x1⁺) − (a/c)(ȳ − μ)`, then
    /// `x = (ȳ − μ − dη²)/c`. Cubic terms are handled by a Newton polish.
    pub fn t1_inverse(&self, q: Point2) -> Result<Point2> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let dx = q.x - self.x1_plus();
        let dy = q.y - self.mu;
        let eta = if a.abs() < 1e-14 {
            dx / b
        } else {
            let aq = a * d / c;
            let k = dx - (a / c) * dy;
            let disc = b * b - 4.0 * aq * k;
            if disc < 0.0 {
                return Err(Error::NoRealPreimage);
            }
            // 2K / (b + sign(b)√disc) avoids cancellation for the small root
            let denom = b + b.signum() * disc.sqrt();
            2.0 * k / denom
        };
        let x = (dy - d * eta * eta) / c;
        let guess = Point2::new(x, self.y1_minus() + eta);
        if self.cubic.is_none() {
            return Ok(guess);
        }
        let mut p = guess;
        for _ in 0..50 {
            let r = self.t1_apply(p) - q;
            if r.norm_max() < 1e-15 * q.norm_max().max(1.0) {
                return Ok(p);
            }
            let step = self.t1_jacobian(p).solve(r).ok_or(Error::SingularJacobian)?;
            p = p - step;
            if !p.is_finite() {
                break;
            }
        }
        let r = (self.t1_apply(p) - q).norm_max();
        if r < 1e-12 {
            Ok(p)
        } else {
            Err(Error::NotConverged { iterations: 50, residual: r })
        }
    }

    /// `T2 = R ∘ T1⁻¹ ∘ R`.
    pub fn t2_apply(&self, p: Point2) -> Result<Point2> {
        Ok(self.t1_inverse(p.swap())?.swap())
    }

    /// `DT2(p) = R · DT1(T1⁻¹(Rp))⁻¹ · R`.
    pub fn t2_jacobian(&self, p: Point2) -> Result<Jacobian2> {
        let pre = self.t1_inverse(p.swap())?;
        let inv = self.t1_jacobian(pre).inverse().ok_or(Error::SingularJacobian)?;
        Ok(Jacobian2::SWAP.compose(&inv).compose(&Jacobian2::SWAP))
    }

    pub fn t2_apply_with_jacobian(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        let pre = self.t1_inverse(p.swap())?;
        let inv = self.t1_jacobian(pre).inverse().ok_or(Error::SingularJacobian)?;
        Ok((pre.swap(), Jacobian2::SWAP.compose(&inv).compose(&Jacobian2::SWAP)))
    }

    /// Number of points of an `n × n` grid over Π1− where `sign(det DT1)`
    /// differs from `sign(−bc)`.
    pub fn orientation_violations(&self, n: usize) -> usize {
        let s = self.j1().signum();
        self.pi1_minus().grid(n).into_iter().filter(|&p| self.t1_jacobian(p).det().signum() != s).count()
    }
}

/// Finite-difference tangency check of the second component of `f` along the
/// vertical line through `base`: returns `(|∂G/∂y|, |∂²G/∂y² − 2d|)`.
pub fn tangency_residual_of(f: &dyn Fn(Point2) -> Point2, base: Point2, d: f64) -> (f64, f64) {
    let h = 1e-3;
    let g = |dy: f64| f(Point2::new(base.x, base.y + dy)).y;
    let (gm, g0, gp) = (g(-h), g(0.0), g(h));
    let first = (gp - gm) / (2.0 * h);
    let second = (gp - 2.0 * g0 + gm) / (h * h);
    (first.abs(), (second - 2.0 * d).abs())
}

/// Tangency residuals of `T1` at `M1⁻` with `μ = 0`.
pub fn tangency_residual(gp: &GlobalMapParams) -> (f64, f64) {
    let g0 = gp.with_mu(0.0);
    tangency_residual_of(&|p| g0.t1_apply(p), g0.m1_minus(), gp.d)
}

/// `T1` as a [`PlanarMap`].
#[derive(Clone, Copy, Debug)]
pub struct T1Map(pub GlobalMapParams);

/// `T2` as a [`PlanarMap`].
#[derive(Clone, Copy, Debug)]
pub struct T2Map(pub GlobalMapParams);

impl PlanarMap for T1Map {
    fn apply(&self, p: Point2) -> Result<Point2> {
        Ok(self.0.t1_apply(p))
    }
    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        Ok(self.0.t1_jacobian(p))
    }
    fn inverse(&self, p: Point2) -> Result<Point2> {
        self.0.t1_inverse(p)
    }
}

impl PlanarMap for T2Map {
    fn apply(&self, p: Point2) -> Result<Point2> {
        self.0.t2_apply(p)
    }
    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        self.0.t2_jacobian(p)
    }
    fn apply_with_jacobian(&self, p: Point2) -> Result<(Point2, Jacobian2)> {
        self.0.t2_apply_with_jacobian(p)
    }
    fn inverse(&self, p: Point2) -> Result<Point2> {
        Ok(self.0.t1_apply(p.swap()).swap())
    }
}
