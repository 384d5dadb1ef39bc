//! Property tests for orbit analysis, return maps and regime sweeps.

use proptest::prelude::*;
use revmix::geometry::{Involution, Swap};
use revmix::limit::{curve_value, CurveId};
use revmix::orbit::{
    bifurcations_in, find_fixed_points, return_map_fixed_points, t1_window, BifurcationKind, Classification,
    FixedPointRecord, SolverOptions, Target,
};
use revmix::return_map::{mu_for_parameter, ReturnMap};
use revmix::sweep::{regime_map, RegimeCounts, RegimeOptions};
use revmix::{LimitFamily, Model, Orientation, PlanarMap, Point2, ProductHenonParams, Rect, ReturnKind, ReturnMapSpec};

fn ctilde() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0f64..-0.1, 0.1f64..3.0]
}

/// `‖f^n(p) − p‖` recomputed by plain iteration.
fn orbit_gap(map: &dyn PlanarMap, r: &FixedPointRecord) -> f64 {
    let mut q = r.point;
    for _ in 0..r.period {
        q = map.apply(q).unwrap();
    }
    q.dist(r.point)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swap_is_an_involution(x in -1e300f64..1e300, y in -1e300f64..1e300) {
        let p = Point2::new(x, y);
        prop_assert_eq!(Swap.apply(Swap.apply(p)), p);
    }

    #[test]
    fn product_records_are_fixed_and_symmetric_or_paired(c in ctilde(), m in -3.0f64..3.0, period in 1usize..=2) {
        let h = ProductHenonParams::new(c, m).unwrap();
        let recs = find_fixed_points(&h, Rect::square(4.0), 16, period).unwrap();
        for r in &recs {
            let gap = orbit_gap(&h, r);
            prop_assert!(gap < 1e-10 * r.point.norm_max().max(1.0), "gap {gap}");
            if r.is_symmetric && period == 1 {
                prop_assert!((r.chart.x - r.chart.y).abs() < 1e-8);
            }
            if !r.is_symmetric && period == 1 {
                // A non-symmetric fixed point has its swap image as partner.
                let twin = r.point.swap();
                prop_assert!(recs.iter().any(|o| o.point.dist(twin) < 1e-8 * twin.norm_max().max(1.0)));
            }
        }
    }

    #[test]
    fn product_multipliers_multiply_to_one(c in ctilde(), m in -3.0f64..3.0) {
        let h = ProductHenonParams::new(c, m).unwrap();
        for r in find_fixed_points(&h, Rect::square(4.0), 16, 1).unwrap() {
            prop_assert!((r.multiplier_product() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn regime_code_round_trips(s in 0usize..5, so in 0usize..5, sa in 0usize..5, e in 0usize..5, mg in 0usize..5, p2 in 0usize..2) {
        let c = RegimeCounts { sinks: s, sources: so, saddles: sa, elliptic: e, marginal: mg, period_two: p2 };
        prop_assert_eq!(RegimeCounts::decode(c.code()), Some(c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn detected_bifurcations_match_orientable_curves(c in -3.0f64..-0.1) {
        let opts = SolverOptions::default();
        let family = |m: f64| ProductHenonParams::new(c, m);
        let starts = |m: f64| find_fixed_points(&ProductHenonParams::new(c, m)?, Rect::square(4.0), 16, 1);
        // Brackets around F0 and around PD2, clear of the other curves.
        let f0 = curve_value(CurveId::F0, LimitFamily::ProductH, c, Orientation::Orientable).unwrap();
        let pd2 = curve_value(CurveId::PD2, LimitFamily::ProductH, c, Orientation::Orientable).unwrap();
        let fold = bifurcations_in(&family, (f0 - 0.2, f0 + 0.25), Target::PlusOne, 1, &starts, &opts);
        prop_assert!(fold.iter().any(|h| h.kind == BifurcationKind::Fold && (h.parameter_value - f0).abs() < 1e-8));
        let gap = (pd2 - f0).abs().min(0.5);
        let flip = bifurcations_in(&family, (pd2 - 0.4 * gap, pd2 + 0.45 * gap), Target::MinusOne, 1, &starts, &opts);
        prop_assert!(flip.iter().any(|h| (h.parameter_value - pd2).abs() < 1e-8), "{flip:?}");
    }

    #[test]
    fn return_map_records_are_fixed(k in 8usize..=12, target in -0.2f64..0.2, kind_ix in 0usize..3) {
        let model = Model::reference();
        let kind = [ReturnKind::T1k, ReturnKind::T2k, ReturnKind::T12km][kind_ix];
        let m = if kind == ReturnKind::T12km { k } else { 0 };
        let spec = ReturnMapSpec { kind, k, m, mu: mu_for_parameter(&model, kind, k, m, target) };
        let map = ReturnMap::new(&model, spec).unwrap();
        for r in return_map_fixed_points(&model, spec, &SolverOptions::default()).unwrap() {
            prop_assert!(orbit_gap(&map, &r) < 1e-10, "{kind} k={k}: gap {}", orbit_gap(&map, &r));
        }
    }

    #[test]
    fn t1k_sinks_pair_with_t2k_sources(k in 8usize..=12, frac in 0.05f64..0.95) {
        let model = Model::reference();
        let opts = SolverOptions::default();
        let w = t1_window(&model, k, &opts).unwrap();
        let mu = w.low + frac * (w.high - w.low);
        let t1 = return_map_fixed_points(&model, ReturnMapSpec::t1k(k, mu), &opts).unwrap();
        let t2 = return_map_fixed_points(&model, ReturnMapSpec::t2k(k, mu), &opts).unwrap();
        let sinks: Vec<_> = t1.iter().filter(|r| r.classification == Classification::Sink).collect();
        prop_assert!(!sinks.is_empty(), "no sink inside delta_k at mu = {mu}");
        for s in sinks {
            let partner = t2.iter().find(|r| r.classification == Classification::Source && r.chart.dist(s.chart.swap()) < 1e-8);
            prop_assert!(partner.is_some(), "no swap partner for sink at chart {:?}", s.chart);
            let partner = partner.unwrap();
            for l in s.multipliers {
                let inv = 1.0 / l;
                let rel = partner.multipliers.iter().map(|q| (q - inv).norm() / inv.norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(rel < 1e-6, "reciprocal error {rel}");
            }
        }
    }

    #[test]
    fn t12kk_is_reversible_near_its_fixed_points(k in 8usize..=12, target in -0.1f64..0.4, dx in -1.0f64..1.0, dy in -1.0f64..1.0) {
        // f∘R∘f = R with R the chart conjugate of the swap.
        let model = Model::reference();
        let mu = mu_for_parameter(&model, ReturnKind::T12km, k, k, target);
        let spec = ReturnMapSpec::t12km(k, k, mu);
        let map = ReturnMap::new(&model, spec).unwrap();
        let reversor = |p: Point2| map.symmetry_chart_inverse(map.symmetry_chart(p)?.swap());
        let mut checked = 0;
        for r in return_map_fixed_points(&model, spec, &SolverOptions::default()).unwrap() {
            let scale = model.lambda().powi(2 * k as i32);
            let p = r.point + scale * Point2::new(dx, dy);
            let Ok(fp) = map.apply(p) else { continue };
            let Ok(rfp) = reversor(fp) else { continue };
            let Ok(lhs) = map.apply(rfp) else { continue };
            let rhs = reversor(p).unwrap();
            prop_assert!(lhs.dist(rhs) < 1e-10, "k={k}: {}", lhs.dist(rhs));
            checked += 1;
        }
        prop_assert!(checked > 0, "no point near a fixed point stayed in the domain");
    }

    #[test]
    fn regime_map_ignores_thread_count(x0 in -2.0f64..-0.5, y0 in -2.0f64..1.0) {
        let window = Rect::new(x0, x0 + 0.4, y0, y0 + 0.8);
        let run = |threads| regime_map(
            LimitFamily::ProductH,
            window,
            (16, 16),
            &RegimeOptions { threads, ..RegimeOptions::default() },
        ).unwrap();
        prop_assert_eq!(run(1), run(2));
    }
}
