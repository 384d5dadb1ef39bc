//! Limit families of the rescaled first-return maps.
//!
//! Hénon map `(x, y) ↦ (y, M1 + M2 x − y²)` and the reversible area-preserving
//! product map `H`: `x̄ = M̃ + c̃ x − y²`, `c̃ ȳ = −M̃ + y + x̄²`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Jacobian2, PlanarMap, Point2};
use crate::global::Orientation;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HenonParams {
    pub m1: f64,
    pub m2: f64,
}

impl HenonParams {
    pub fn new(m1: f64, m2: f64) -> Self {
        Self { m1, m2 }
    }

    pub fn henon_apply(&self, p: Point2) -> Point2 {
        Point2::new(p.y, self.m1 + self.m2 * p.x - p.y * p.y)
    }

    pub fn henon_jacobian(&self, p: Point2) -> Jacobian2 {
        Jacobian2::new(0.0, 1.0, self.m2, -2.0 * p.y)
    }

    /// Period-1 points `x = y`, roots of `x² + (1 − M2) x − M1 = 0`.
    pub fn henon_fixed_points(&self) -> Vec<Point2> {
        quadratic_roots(1.0 - self.m2, -self.m1).into_iter().map(|x| Point2::new(x, x)).collect()
    }
}

impl PlanarMap for HenonParams {
    fn apply(&self, p: Point2) -> Result<Point2> {
        Ok(self.henon_apply(p))
    }
    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        Ok(self.henon_jacobian(p))
    }
    fn inverse(&self, p: Point2) -> Result<Point2> {
        if self.m2 == 0.0 {
            return Err(Error::NoInverse);
        }
        Ok(Point2::new((p.y - self.m1 + p.x * p.x) / self.m2, p.x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductHenonParams {
    c_tilde: f64,
    m_tilde: f64,
}

impl ProductHenonParams {
    pub fn new(c_tilde: f64, m_tilde: f64) -> Result<Self> {
        if c_tilde == 0.0 || !c_tilde.is_finite() || !m_tilde.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "product map needs finite c̃ != 0 and M̃ (got {c_tilde}, {m_tilde})"
            )));
        }
        Ok(Self { c_tilde, m_tilde })
    }

    pub fn c_tilde(&self) -> f64 {
        self.c_tilde
    }

    pub fn m_tilde(&self) -> f64 {
        self.m_tilde
    }

    /// `x̄` first, then `ȳ = (−M̃ + y + x̄²)/c̃`.
    pub fn h_apply(&self, p: Point2) -> Point2 {
        let xb = self.m_tilde + self.c_tilde * p.x - p.y * p.y;
        Point2::new(xb, (-self.m_tilde + p.y + xb * xb) / self.c_tilde)
    }

    pub fn h_jacobian(&self, p: Point2) -> Jacobian2 {
        let xb = self.m_tilde + self.c_tilde * p.x - p.y * p.y;
        Jacobian2::new(self.c_tilde, -2.0 * p.y, 2.0 * xb, (1.0 - 4.0 * xb * p.y) / self.c_tilde)
    }

    /// `y = c̃ȳ + M̃ − x̄²`, then `x = (x̄ − M̃ + y²)/c̃`.
    pub fn h_inverse(&self, p: Point2) -> Point2 {
        let y = self.c_tilde * p.y + self.m_tilde - p.x * p.x;
        Point2::new((p.x - self.m_tilde + y * y) / self.c_tilde, y)
    }

    /// Fixed points on `Fix R`: roots of `x² + (1 − c̃) x − M̃ = 0`; a double
    /// root (exactly on F0) is returned once.
    pub fn h_symmetric_fixed_points(&self) -> Vec<Point2> {
        quadratic_roots(1.0 - self.c_tilde, -self.m_tilde).into_iter().map(|x| Point2::new(x, x)).collect()
    }

    /// Trace `c̃ + (1 − 4x²)/c̃` of the Jacobian at the symmetric point `(x, x)`.
    pub fn symmetric_trace(&self, x: f64) -> f64 {
        self.c_tilde + (1.0 - 4.0 * x * x) / self.c_tilde
    }

    /// The swap-paired couple of period-1 points off `Fix R`, on
    /// `x + y = 1 − c̃` with `xy = (1 − c̃)² − M̃`; empty below PF.
    pub fn h_asymmetric_fixed_points(&self) -> Vec<Point2> {
        let sigma = 1.0 - self.c_tilde;
        let prod = sigma * sigma - self.m_tilde;
        let disc = sigma * sigma - 4.0 * prod;
        if disc <= 0.0 {
            return Vec::new();
        }
        let r = disc.sqrt();
        let x1 = 0.5 * (sigma + r);
        let x2 = 0.5 * (sigma - r);
        vec![Point2::new(x1, x2), Point2::new(x2, x1)]
    }
}

impl PlanarMap for ProductHenonParams {
    fn apply(&self, p: Point2) -> Result<Point2> {
        Ok(self.h_apply(p))
    }
    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        Ok(self.h_jacobian(p))
    }
    fn inverse(&self, p: Point2) -> Result<Point2> {
        Ok(self.h_inverse(p))
    }
    fn is_reversible(&self) -> bool {
        true
    }
}

/// Any of the limit maps a rescaled return map is compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitMap {
    Henon(HenonParams),
    /// `R ∘ Hénon⁻¹ ∘ R`: the limit of the mirror-image return map.
    MirroredHenon(HenonParams),
    ProductH(ProductHenonParams),
}

impl PlanarMap for LimitMap {
    fn apply(&self, p: Point2) -> Result<Point2> {
        match self {
            LimitMap::Henon(h) => Ok(h.henon_apply(p)),
            LimitMap::MirroredHenon(h) => Ok(h.inverse(p.swap())?.swap()),
            LimitMap::ProductH(h) => Ok(h.h_apply(p)),
        }
    }
    fn jacobian(&self, p: Point2) -> Result<Jacobian2> {
        match self {
            LimitMap::Henon(h) => Ok(h.henon_jacobian(p)),
            LimitMap::MirroredHenon(h) => {
                if h.m2 == 0.0 {
                    return Err(Error::NoInverse);
                }
                Ok(Jacobian2::new(0.0, 1.0, 1.0 / h.m2, 2.0 * p.y / h.m2))
            }
            LimitMap::ProductH(h) => Ok(h.h_jacobian(p)),
        }
    }
    fn is_reversible(&self) -> bool {
        matches!(self, LimitMap::ProductH(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveId {
    LPlus1,
    LMinus1,
    F0,
    PD1,
    PD2,
    PF,
    PDAsym,
}

impl CurveId {
    pub const PRODUCT: [CurveId; 5] = [CurveId::F0, CurveId::PD1, CurveId::PD2, CurveId::PF, CurveId::PDAsym];
    pub const HENON: [CurveId; 2] = [CurveId::LPlus1, CurveId::LMinus1];

    pub fn name(&self) -> &'static str {
        match self {
            CurveId::LPlus1 => "L_plus1",
            CurveId::LMinus1 => "L_minus1",
            CurveId::F0 => "F0",
            CurveId::PD1 => "PD1",
            CurveId::PD2 => "PD2",
            CurveId::PF => "PF",
            CurveId::PDAsym => "PD_asym",
        }
    }

    /// Curves of `family` that exist for the given orientation.
    pub fn for_family(family: LimitFamily, orientation: Orientation) -> Vec<CurveId> {
        match (family, orientation) {
            (LimitFamily::Henon, _) => Self::HENON.to_vec(),
            (LimitFamily::ProductH, Orientation::Orientable) => Self::PRODUCT.to_vec(),
            (LimitFamily::ProductH, Orientation::Nonorientable) => Self::PRODUCT[..4].to_vec(),
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [CurveId::LPlus1, CurveId::LMinus1, CurveId::F0, CurveId::PD1, CurveId::PD2, CurveId::PF, CurveId::PDAsym]
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown curve '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LimitFamily {
    Henon,
    ProductH,
}

impl LimitFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LimitFamily::Henon => "henon",
            LimitFamily::ProductH => "productH",
        }
    }
}

impl FromStr for LimitFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "henon" => Ok(LimitFamily::Henon),
            "producth" | "product-h" | "h" => Ok(LimitFamily::ProductH),
            _ => Err(Error::InvalidParameter(format!("unknown family '{s}'"))),
        }
    }
}

fn check_curve(id: CurveId, family: LimitFamily, abscissa: f64, orientation: Orientation) -> Result<()> {
    if !abscissa.is_finite() {
        return Err(Error::InvalidParameter("non-finite abscissa".into()));
    }
    match family {
        LimitFamily::Henon => {
            if !CurveId::HENON.contains(&id) {
                return Err(Error::InvalidParameter(format!("{id} is not a Hénon curve")));
            }
        }
        LimitFamily::ProductH => {
            if CurveId::HENON.contains(&id) {
                return Err(Error::InvalidParameter(format!("{id} is not a product-map curve")));
            }
            let ok = match orientation {
                Orientation::Orientable => abscissa < 0.0,
                Orientation::Nonorientable => abscissa > 0.0,
            };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "c̃ = {abscissa} outside the half-line of the {orientation:?} case"
                )));
            }
            if id == CurveId::PDAsym && abscissa > 0.0 {
                return Err(Error::InvalidParameter("PD_asym does not exist for c̃ > 0".into()));
            }
        }
    }
    Ok(())
}

/// Ordinate of a bifurcation curve as printed: `L^{+1}: 4M1 = −(1 + M2)²`,
/// `L^{−1}: 4M1 = 3(1 + M2)²` for the Hénon family, and for `H`
/// `F0 = −(c̃−1)²/4`, `PD1 = 1 − (c̃−1)²/4`, `PD2 = (c̃+1)(3c̃−1)/4`,
/// `PF = 3(c̃−1)²/4`, `PD_asym = (1−3c̃)(3−c̃)/4`.
pub fn curve_value(id: CurveId, family: LimitFamily, abscissa: f64, orientation: Orientation) -> Result<f64> {
    check_curve(id, family, abscissa, orientation)?;
    let c = abscissa;
    Ok(match id {
        CurveId::LPlus1 => -(1.0 + c).powi(2) / 4.0,
        CurveId::LMinus1 => 3.0 * (1.0 + c).powi(2) / 4.0,
        CurveId::F0 => -(c - 1.0).powi(2) / 4.0,
        CurveId::PD1 => 1.0 - (c - 1.0).powi(2) / 4.0,
        CurveId::PD2 => (c + 1.0) * (3.0 * c - 1.0) / 4.0,
        CurveId::PF => 3.0 * (c - 1.0).powi(2) / 4.0,
        CurveId::PDAsym => (1.0 - 3.0 * c) * (3.0 - c) / 4.0,
    })
}

/// Ordinate recomputed from the fixed-point algebra of the implemented maps:
/// the parameter where a period-1 branch has a double root (`+1`) or a
/// multiplier `−1`.
///
/// For Hénon the fold lies at `4M1 = −(1 − M2)²` and the flip at
/// `4M1 = 3(1 − M2)²`, the printed curves with `M2 ↦ −M2`.
pub fn derived_curve_value(id: CurveId, family: LimitFamily, abscissa: f64, orientation: Orientation) -> Result<f64> {
    check_curve(id, family, abscissa, orientation)?;
    let c = abscissa;
    // symmetric branch: M̃ = x² + (1 − c̃) x at the critical abscissa x
    let on_branch = |x: f64| x * x + (1.0 - c) * x;
    Ok(match id {
        CurveId::LPlus1 => {
            // double root of x² + (1 − M2) x − M1
            let x = -(1.0 - c) / 2.0;
            x * x + (1.0 - c) * x
        }
        CurveId::LMinus1 => {
            // trace −2x = −(1 + det) with det = −M2
            let x = (1.0 - c) / 2.0;
            x * x + (1.0 - c) * x
        }
        // trace +2 ⇔ 4x² = (c̃ − 1)²; the root left of the vertex is the fold
        CurveId::F0 => on_branch(-(1.0 - c) / 2.0),
        CurveId::PF => on_branch((1.0 - c) / 2.0),
        // trace −2 ⇔ 4x² = (c̃ + 1)²
        CurveId::PD1 => on_branch((c + 1.0) / 2.0),
        CurveId::PD2 => on_branch(-(c + 1.0) / 2.0),
        CurveId::PDAsym => {
            // asymmetric pair: trace −2 ⇔ xy = (1 + c̃)²/4, and xy = (1 − c̃)² − M̃
            let sigma = 1.0 - c;
            sigma * sigma - (1.0 + c).powi(2) / 4.0
        }
    })
}

/// Real roots of `x² + p x + q`, ascending; a double root is returned once.
fn quadratic_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = p * p - 4.0 * q;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-0.5 * p];
    }
    let r = disc.sqrt();
    // stable pair: one root from the formula, the other from the product q
    let big = -0.5 * (p + p.signum() * r);
    let (x1, x2) = if big != 0.0 { (big, q / big) } else { (0.5 * r, -0.5 * r) };
    if x1 < x2 {
        vec![x1, x2]
    } else {
        vec![x2, x1]
    }
}

/// One tabulated point of a bifurcation curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub curve: CurveId,
    pub abscissa: f64,
    pub ordinate: f64,
}

/// Printed curves of `family` at `n ≥ 2` equally spaced abscissae in
/// `[lo, hi]`, grouped by curve.
pub fn sample_curves(
    family: LimitFamily,
    orientation: Orientation,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<CurveSample>> {
    if n < 2 || !(lo < hi) {
        return Err(Error::InvalidParameter(format!("curve range {lo}:{hi}:{n} needs lo < hi and n >= 2")));
    }
    let mut out = Vec::new();
    for curve in CurveId::for_family(family, orientation) {
        for i in 0..n {
            let abscissa = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let ordinate = curve_value(curve, family, abscissa, orientation)?;
            out.push(CurveSample { curve, abscissa, ordinate });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{finite_difference_jacobian, jacobian_check, reversibility_residual, Rect, Swap};
    use proptest::prelude::*;

    #[test]
    fn henon_examples() {
        let h = HenonParams::new(0.0, 0.0);
        assert_eq!(h.henon_apply(Point2::new(0.0, 0.0)), Point2::new(0.0, 0.0));
        let h = HenonParams::new(1.0, -0.5);
        let fps = h.henon_fixed_points();
        assert_eq!(fps, vec![Point2::new(-2.0, -2.0), Point2::new(0.5, 0.5)]);
        for p in Rect::square(3.0).grid(7) {
            assert_eq!(h.henon_jacobian(p).det(), 0.5);
        }
    }

    #[test]
    fn henon_jacobian_decay() {
        // central differences are exact on a quadratic map up to rounding;
        // compare two step sizes on the Hénon map at the origin
        let h = HenonParams::new(1.0, -0.5);
        let d1 = jacobian_check(&h, Point2::new(0.0, 0.0), 1e-3).unwrap();
        let d2 = jacobian_check(&h, Point2::new(0.0, 0.0), 1e-4).unwrap();
        assert!(d1 < 1e-12 && d2 < 1e-11, "{d1} {d2}");
        let fd = finite_difference_jacobian(&h, Point2::new(0.3, 0.7), 1e-4).unwrap();
        assert!((fd.a22 + 1.4).abs() < 1e-10);
    }

    #[test]
    fn h_examples() {
        let h = ProductHenonParams::new(-1.7, 0.0).unwrap();
        assert_eq!(h.h_apply(Point2::new(0.0, 0.0)), Point2::new(0.0, 0.0));
        let h = ProductHenonParams::new(-1.0, 0.0).unwrap();
        let fps = h.h_symmetric_fixed_points();
        assert_eq!(fps, vec![Point2::new(-2.0, -2.0), Point2::new(0.0, 0.0)]);
        for p in &fps {
            assert!(h.h_apply(*p).dist(*p) < 1e-15);
        }
        assert!(ProductHenonParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn h_inverse_examples() {
        let h = ProductHenonParams::new(-1.0, 0.2).unwrap();
        let p = Point2::new(0.3, -0.7);
        assert!(h.h_inverse(h.h_apply(p)).dist(p) < 1e-12);
        for fp in h.h_symmetric_fixed_points() {
            assert!(h.h_inverse(fp).dist(fp) < 1e-14);
        }
        // H⁻¹ = R H R
        for q in Rect::square(2.0).grid(9) {
            assert!(h.h_inverse(q).dist(h.h_apply(q.swap()).swap()) < 1e-12);
        }
    }

    #[test]
    fn symmetric_fixed_points_and_traces() {
        let on_f0 = ProductHenonParams::new(-1.0, -1.0).unwrap();
        let fps = on_f0.h_symmetric_fixed_points();
        assert_eq!(fps, vec![Point2::new(-1.0, -1.0)]);
        let f0 = curve_value(CurveId::F0, LimitFamily::ProductH, -1.0, Orientation::Orientable).unwrap();
        assert_eq!(f0, -1.0);
        let h = ProductHenonParams::new(-1.0, -0.5).unwrap();
        let fps = h.h_symmetric_fixed_points();
        let s = 0.5f64.sqrt();
        assert!((fps[0].x - (-1.0 - s)).abs() < 1e-15);
        assert!((fps[1].x - (-1.0 + s)).abs() < 1e-15);
        let t_ell = h.symmetric_trace(fps[1].x);
        let t_sad = h.symmetric_trace(fps[0].x);
        assert!((t_ell - (-1.0 - (1.0 - 4.0 * (s - 1.0).powi(2)))).abs() < 1e-14);
        assert!((t_ell + 1.656854249492381).abs() < 1e-12);
        // closed form 4 + 4√2 ≈ 9.657
        assert!((t_sad - (4.0 + 4.0 * 2f64.sqrt())).abs() < 1e-12);
        for (fp, t) in [(fps[1], t_ell), (fps[0], t_sad)] {
            let j = h.h_jacobian(fp);
            let ev = j.eigenvalues();
            assert!(((ev[0] + ev[1]).re - t).abs() < 1e-12);
        }
        let below = ProductHenonParams::new(-1.0, -1.01).unwrap();
        assert!(below.h_symmetric_fixed_points().is_empty());
    }

    #[test]
    fn asymmetric_pair() {
        let h = ProductHenonParams::new(-1.0, 3.5).unwrap();
        let pair = h.h_asymmetric_fixed_points();
        assert_eq!(pair.len(), 2);
        for p in &pair {
            assert!(h.h_apply(*p).dist(*p) < 1e-12);
        }
        assert_eq!(pair[0].swap(), pair[1]);
        let below = ProductHenonParams::new(-1.0, 2.9).unwrap();
        assert!(below.h_asymmetric_fixed_points().is_empty());
    }

    #[test]
    fn printed_curve_examples() {
        let o = Orientation::Orientable;
        assert_eq!(curve_value(CurveId::F0, LimitFamily::ProductH, -1.0, o).unwrap(), -1.0);
        assert_eq!(curve_value(CurveId::PD2, LimitFamily::ProductH, -1.0, o).unwrap(), 0.0);
        assert_eq!(curve_value(CurveId::LPlus1, LimitFamily::Henon, 0.0, o).unwrap(), -0.25);
        let n = Orientation::Nonorientable;
        assert!(curve_value(CurveId::PDAsym, LimitFamily::ProductH, 0.5, n).is_err());
        assert!(curve_value(CurveId::F0, LimitFamily::ProductH, 0.5, o).is_err());
        assert!(curve_value(CurveId::F0, LimitFamily::Henon, -0.5, o).is_err());
        assert!(curve_value(CurveId::LPlus1, LimitFamily::ProductH, -0.5, o).is_err());
    }

    #[test]
    fn derived_curves_agree_for_h_and_differ_for_henon() {
        for c in [-2.0, -1.0, -0.5, -0.1] {
            for id in CurveId::PRODUCT {
                let p = curve_value(id, LimitFamily::ProductH, c, Orientation::Orientable).unwrap();
                let d = derived_curve_value(id, LimitFamily::ProductH, c, Orientation::Orientable).unwrap();
                assert!((p - d).abs() < 1e-14, "{id} {c}");
            }
        }
        let m2 = -0.5;
        let o = Orientation::Orientable;
        let fold = derived_curve_value(CurveId::LPlus1, LimitFamily::Henon, m2, o).unwrap();
        assert_eq!(fold, -0.5625);
        let printed = curve_value(CurveId::LPlus1, LimitFamily::Henon, m2, o).unwrap();
        assert_eq!(printed, -0.0625);
        let flip = derived_curve_value(CurveId::LMinus1, LimitFamily::Henon, m2, o).unwrap();
        assert_eq!(flip, 3.0 * 2.25 / 4.0);
        // printed form at −M2 equals the derived one
        assert_eq!(curve_value(CurveId::LPlus1, LimitFamily::Henon, -m2, o).unwrap(), fold);
    }

    #[test]
    fn curve_names_round_trip() {
        for id in
            [CurveId::LPlus1, CurveId::LMinus1, CurveId::F0, CurveId::PD1, CurveId::PD2, CurveId::PF, CurveId::PDAsym]
        {
            assert_eq!(id.name().parse::<CurveId>().unwrap(), id);
        }
        assert!("bogus".parse::<CurveId>().is_err());
        assert_eq!("productH".parse::<LimitFamily>().unwrap(), LimitFamily::ProductH);
    }

    #[test]
    fn mirrored_henon_is_conjugate_inverse() {
        let hp = HenonParams::new(0.3, -0.5);
        let m = LimitMap::MirroredHenon(hp);
        for p in Rect::square(2.0).grid(6) {
            let q = m.apply(p).unwrap();
            // R H R ∘ mirrored = id
            assert!(hp.henon_apply(q.swap()).swap().dist(p) < 1e-12);
            let d = jacobian_check(&m, p, 1e-4).unwrap();
            assert!(d < 1e-8);
        }
    }

    fn params() -> impl Strategy<Value = ProductHenonParams> {
        (prop_oneof![-3.0f64..-0.1, 0.1f64..3.0], -3.0f64..3.0)
            .prop_map(|(c, m)| ProductHenonParams::new(c, m).unwrap())
    }

    proptest! {
        #[test]
        fn h_is_symplectic(h in params(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
            prop_assert!((h.h_jacobian(Point2::new(x, y)).det() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn h_is_reversible(h in params(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let rep = reversibility_residual(&h, &Swap, &[Point2::new(x, y)]);
            prop_assert!(rep.residual < 1e-9);
        }

        #[test]
        fn h_inverse_round_trip(h in params(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let p = Point2::new(x, y);
            let q = h.h_apply(p);
            prop_assert!(h.h_inverse(q).dist(p) < 1e-9 * q.norm_max().max(1.0).powi(2));
        }

        #[test]
        fn henon_det_constant(m1 in -3.0f64..3.0, m2 in -1.0f64..0.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let h = HenonParams::new(m1, m2);
            prop_assert_eq!(h.henon_jacobian(Point2::new(x, y)).det(), -m2);
        }

        #[test]
        fn fold_is_where_roots_appear(c in -3.0f64..-0.1) {
            let f0 = curve_value(CurveId::F0, LimitFamily::ProductH, c, Orientation::Orientable).unwrap();
            let above = ProductHenonParams::new(c, f0 + 1e-9).unwrap();
            let below = ProductHenonParams::new(c, f0 - 1e-9).unwrap();
            prop_assert_eq!(above.h_symmetric_fixed_points().len(), 2);
            prop_assert!(below.h_symmetric_fixed_points().is_empty());
        }

        #[test]
        fn flip_of_upper_root_is_pd2(c in -3.0f64..-0.1) {
            // the larger symmetric root has trace −2 exactly at PD2 when −(c̃+1)/2 is that root
            let pd2 = curve_value(CurveId::PD2, LimitFamily::ProductH, c, Orientation::Orientable).unwrap();
            let h = ProductHenonParams::new(c, pd2).unwrap();
            let fps = h.h_symmetric_fixed_points();
            let t = fps.iter().map(|p| (h.symmetric_trace(p.x) + 2.0).abs()).fold(f64::MAX, f64::min);
            prop_assert!(t < 1e-10);
        }
    }
}
