use orthospec_core::apollonian::{generate_strip_packing, partial_orthospectrum, DedupStrategy, PackingConfig};
use orthospec_core::bk::{f3_closed, f3_inverse};
use orthospec_core::cusp::{cusp_integral_closed, vol_vc_closed, CuspIntegralKind};
use orthospec_core::geometry::{
    ortholength, rescale_cusp, slab_segment_length, CuspData, GeneralizedSphere, GeodesicSegmentSpec, Isometry,
};
use orthospec_core::measure::{sphere_volume, utb_density_halfspace};
use orthospec_core::special::{cusp_coefficient, gamma_fn, harmonic, harmonic_real, Dimension};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dim(n: u32) -> Dimension {
    Dimension::new(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_recurrence(x in 0.05f64..60.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-13);
    }

    #[test]
    fn duplication_formula(n in 3u32..20) {
        let nf = f64::from(n);
        let lhs = 2f64.powf(2.0 - nf) * std::f64::consts::PI.sqrt() * gamma_fn(nf - 1.0).unwrap();
        let rhs = gamma_fn(0.5 * (nf - 1.0)).unwrap() * gamma_fn(0.5 * nf).unwrap();
        prop_assert!((lhs - rhs).abs() / gamma_fn(0.5 * nf).unwrap().powi(2) <= 1e-10);
    }

    #[test]
    fn harmonic_real_extends_harmonic(m in 0u64..50) {
        prop_assert!((harmonic_real(m as f64).unwrap() - harmonic(m)).abs() <= 1e-12);
    }

    #[test]
    fn harmonic_real_recurrence(x in -0.9f64..40.0) {
        let step = harmonic_real(x + 1.0).unwrap() - harmonic_real(x).unwrap();
        prop_assert!((step - 1.0 / (x + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn cusp_coefficient_positive(n in 3u32..2000) {
        prop_assert!(cusp_coefficient(dim(n)).unwrap() > 0.0);
    }

    #[test]
    fn ortholength_symmetric_and_invariant(
        c1 in prop::collection::vec(-3.0f64..3.0, 2),
        c2 in prop::collection::vec(-3.0f64..3.0, 2),
        r1 in 0.1f64..1.5,
        r2 in 0.1f64..1.5,
        seed in any::<u64>(),
    ) {
        let a = GeneralizedSphere::sphere(c1, r1).unwrap();
        let b = GeneralizedSphere::sphere(c2, r2).unwrap();
        let l = ortholength(&a, &b);
        prop_assume!(l.is_ok());
        let l = l.unwrap();
        prop_assume!(l > 1e-3);
        prop_assert_eq!(l, ortholength(&b, &a).unwrap());
        let g = Isometry::random(2, &mut ChaCha8Rng::seed_from_u64(seed));
        let moved = ortholength(&g.apply_sphere(&a), &g.apply_sphere(&b)).unwrap();
        prop_assert!((moved - l).abs() <= 1e-9 * l.max(1.0), "{} vs {}", moved, l);
    }

    #[test]
    fn slab_length_positive_and_translation_invariant(x1 in -50.0f64..-1e-6, gap in 1e-6f64..50.0, d in 0.01f64..10.0, shift in -5.0f64..5.0) {
        let y1 = d + gap;
        let l = slab_segment_length(&GeodesicSegmentSpec { x: vec![x1, 0.0], y: vec![y1, 0.0], d }).unwrap();
        prop_assert!(l > 0.0);
        // Transverse offsets do not enter the formula.
        let l2 = slab_segment_length(&GeodesicSegmentSpec { x: vec![x1, shift], y: vec![y1, -shift], d }).unwrap();
        prop_assert_eq!(l, l2);
    }

    #[test]
    fn cusp_ratio_fixed_by_rescaling(n in 3u32..8, d in 0.01f64..10.0, vol in 0.01f64..10.0, a in 0.05f64..20.0) {
        let c = CuspData::new("c", d, vol, dim(n)).unwrap();
        let r = rescale_cusp(&c, a).unwrap();
        prop_assert!((r.invariant_ratio() / c.invariant_ratio() - 1.0).abs() < 1e-12);
        prop_assert!((vol_vc_closed(&r).unwrap() / vol_vc_closed(&c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_scales_under_dilation(x in prop::collection::vec(-2.0f64..2.0, 2), y in prop::collection::vec(-2.0f64..2.0, 2), s in 0.1f64..10.0) {
        let r2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assume!(r2 > 1e-6);
        // dx dy scales by s^4 and the density by s^-4 in H^3.
        let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * s).collect();
        let ratio = utb_density_halfspace(&xs, &ys, dim(3)).unwrap() * s.powi(4) / utb_density_halfspace(&x, &y, dim(3)).unwrap();
        prop_assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f3_round_trip(l in 0.1f64..10.0) {
        let back = f3_inverse(f3_closed(l).unwrap()).unwrap();
        prop_assert!((back - l).abs() <= 1e-9);
    }

    #[test]
    fn f3_decreasing(a in 0.01f64..20.0, b in 0.01f64..20.0) {
        prop_assume!(a < b);
        prop_assert!(f3_closed(a).unwrap() > f3_closed(b).unwrap());
    }

    #[test]
    fn decomposition_identity(n in 3u32..12, d in 0.05f64..20.0) {
        let f = |k| cusp_integral_closed(k, dim(n), d).unwrap();
        let lhs = f(CuspIntegralKind::I1) - f(CuspIntegralKind::I2) - f(CuspIntegralKind::I3);
        let main = f(CuspIntegralKind::Main);
        prop_assert!(((lhs - main) / main).abs() <= 1e-12);
    }

    #[test]
    fn volume_chain(n in 3u32..=10, d in 0.05f64..20.0, vol in 0.05f64..20.0) {
        let c = CuspData::new("c", d, vol, dim(n)).unwrap();
        let lhs = vol_vc_closed(&c).unwrap() / sphere_volume(n - 1);
        let rhs = cusp_coefficient(dim(n)).unwrap() * c.invariant_ratio();
        prop_assert!(((lhs - rhs) / rhs).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn packing_descartes_and_periodicity(k in 1u64..400, half_period in 1i64..4, shift in -20i64..20) {
        let cfg = PackingConfig { dedup_period: 2 * half_period, ..PackingConfig::with_bound(k) };
        let p = generate_strip_packing(&cfg).unwrap();
        p.verify_descartes().unwrap();
        prop_assert_eq!(p.translated_canonical(0), p.translated_canonical(2 * half_period * shift));
        // Shifting by a single unit period also maps the packing to itself.
        prop_assert_eq!(p.translated_canonical(0), p.translated_canonical(2 * shift));
    }

    #[test]
    fn circle_count_nondecreasing(k in 1u64..300, extra in 0u64..300) {
        let a = generate_strip_packing(&PackingConfig::with_bound(k)).unwrap();
        let b = generate_strip_packing(&PackingConfig::with_bound(k + extra)).unwrap();
        prop_assert!(a.circles.len() <= b.circles.len());
    }

    #[test]
    fn aggregation_ignores_circle_order(k in 1u64..120, seed in any::<u64>(), strategy_index in 0usize..3) {
        use rand::seq::SliceRandom;
        let strategy = [DedupStrategy::BoundaryStabilizer, DedupStrategy::TranslationOnly, DedupStrategy::TranslationPlusHalfTurn][strategy_index];
        let cfg = PackingConfig { strategy, ..PackingConfig::with_bound(k) };
        let p = generate_strip_packing(&cfg).unwrap();
        let mut shuffled = p.clone();
        shuffled.circles.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = partial_orthospectrum(&p, &cfg).unwrap();
        let b = partial_orthospectrum(&shuffled, &cfg).unwrap();
        let strip = |v: &[orthospec_core::OrthospectrumEntry]| v.iter().map(|e| (e.inversive_distance.clone(), e.multiplicity, e.length)).collect::<Vec<_>>();
        prop_assert_eq!(strip(&a), strip(&b));
    }
}
