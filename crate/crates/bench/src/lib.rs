//! Workloads shared by the criterion benches.

use revmix::return_map::mu_for_parameter;
use revmix::{Model, PlanarMap, Point2, Rect, ReturnKind, ReturnMapSpec};

/// `n × n` points on `[−3, 3]²`, the sampling box of the limit-map checks.
pub fn limit_samples(n: usize) -> Vec<Point2> {
    Rect::square(3.0).grid(n)
}

/// Sum of the images of `pts` that stay in the domain, as a checksum.
pub fn apply_all(map: &dyn PlanarMap, pts: &[Point2]) -> f64 {
    pts.iter().filter_map(|&p| map.apply(p).ok()).map(|q| q.x + q.y).sum()
}

/// First-return map of `kind` with `m = k`, at the μ that puts its rescaled
/// parameter at zero.
pub fn centred_spec(model: &Model, kind: ReturnKind, k: usize) -> ReturnMapSpec {
    let m = if kind == ReturnKind::T12km { k } else { 0 };
    ReturnMapSpec { kind, k, m, mu: mu_for_parameter(model, kind, k, m, 0.0) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use revmix::ProductHenonParams;

    #[test]
    fn product_map_checksum_is_finite() {
        let h = ProductHenonParams::new(-1.0, -0.5).unwrap();
        assert!(apply_all(&h, &limit_samples(8)).is_finite());
    }

    #[test]
    fn centred_spec_is_valid() {
        let model = Model::reference();
        for kind in [ReturnKind::T1k, ReturnKind::T2k, ReturnKind::T12km] {
            centred_spec(&model, kind, 10).validate(&model).unwrap();
        }
    }
}
