//! Property-based invariants across the public modules.

use proptest::prelude::*;

use shaperecon::admm::{parse_config, project_k, update_multiplier, update_v, AdmmConfig};
use shaperecon::geometry::{BoundaryPolyline, Point2};
use shaperecon::mesh::{transfer_field, triangulate_annulus};
use shaperecon::metrics::hausdorff;
use shaperecon::problems::generate_synthetic_data;
use shaperecon::ScalarField;

fn circle(cx: f64, cy: f64, r: f64, n: usize) -> BoundaryPolyline {
    BoundaryPolyline::circle(Point2::new(cx, cy), r, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_is_idempotent_and_bounded(
        values in prop::collection::vec(-10.0f64..10.0, 1..40),
        a in -3.0f64..0.0,
        span in 0.1f64..4.0,
    ) {
        let b = a + span.max(-a + 0.1);
        let w = ScalarField::new(values).unwrap();
        let p = project_k(&w, a, b);
        for &x in p.values() {
            prop_assert!((a..=b).contains(&x));
        }
        let twice = project_k(&p, a, b);
        prop_assert_eq!(twice.values(), p.values());
    }

    #[test]
    fn multiplier_identity_holds_without_clamping(
        u_vals in prop::collection::vec(0.1f64..1.9, 1..30),
        lambda0 in -1e-3f64..1e-3,
        beta in 0.001f64..1.0,
    ) {
        // With u + lambda/beta inside [a, b] the closed-form v-update makes
        // the next multiplier vanish identically.
        let n = u_vals.len();
        let u = ScalarField::new(u_vals).unwrap();
        let lambda = ScalarField::constant(lambda0, n);
        let inside = u
            .values()
            .iter()
            .all(|&ui| (0.0..=2.0).contains(&(ui + lambda0 / beta)));
        prop_assume!(inside);
        let v = update_v(&u, &lambda, beta, 0.0, 2.0).unwrap();
        let next = update_multiplier(&lambda, beta, &u, &v).unwrap();
        prop_assert!(next.max_abs() <= 1e-12);
    }

    #[test]
    fn hausdorff_is_symmetric_and_shift_invariant(
        r1 in 0.2f64..0.6,
        r2 in 0.2f64..0.6,
        cx in -0.2f64..0.2,
        dx in -1.0f64..1.0,
        dy in -1.0f64..1.0,
    ) {
        let a = circle(cx, 0.0, r1, 64);
        let b = circle(0.0, cx, r2, 80);
        let d = hausdorff(&a, &b);
        prop_assert_eq!(d, hausdorff(&b, &a));
        prop_assert_eq!(hausdorff(&a, &a), 0.0);
        let shift = |c: &BoundaryPolyline| {
            BoundaryPolyline::new(
                c.points().iter().map(|p| Point2::new(p.x + dx, p.y + dy)).collect(),
            )
            .unwrap()
        };
        prop_assert!((hausdorff(&shift(&a), &shift(&b)) - d).abs() <= 1e-12);
    }

    #[test]
    fn config_text_round_trips(
        beta in 1e-6f64..10.0,
        max_outer in 0usize..500,
        seed in any::<u64>(),
        h in 0.02f64..0.2,
    ) {
        let config = AdmmConfig { beta, max_outer, seed, h, ..AdmmConfig::default() };
        let (back, _) = parse_config(&config.render()).unwrap();
        prop_assert_eq!(back.beta, beta);
        prop_assert_eq!(back.max_outer, max_outer);
        prop_assert_eq!(back.seed, seed);
        prop_assert_eq!(back.h, h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn affine_fields_transfer_exactly_between_meshes(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        c in -2.0f64..2.0,
    ) {
        let outer = circle(0.0, 0.0, 1.0, 60);
        let inner = circle(0.0, 0.0, 0.5, 30);
        let coarse = triangulate_annulus(&outer, &inner, 0.12).unwrap();
        let fine = triangulate_annulus(&outer, &inner, 0.09).unwrap();
        let affine = |m: &shaperecon::Mesh| {
            ScalarField::new(m.vertices().iter().map(|p| a + b * p.x + c * p.y).collect()).unwrap()
        };
        let moved = transfer_field(&affine(&coarse), &coarse, &fine).unwrap();
        let exact = affine(&fine);
        let err = moved.sub(&exact).unwrap().max_abs();
        // Exact on interior points; boundary vertices of the finer mesh may
        // fall marginally outside the coarse polygon and use the fallback.
        prop_assert!(err <= 1e-2, "max transfer error {}", err);
    }

    #[test]
    fn noise_norm_is_exact_for_any_seed_and_level(
        seed in any::<u64>(),
        level in 0.001f64..0.2,
    ) {
        let outer = circle(0.0, 0.0, 1.0, 120);
        let truth = circle(0.0, 0.0, 0.5, 60);
        let clean = generate_synthetic_data(&truth, &outer, 1.0, 0.05, 0.0, seed).unwrap();
        let noisy = generate_synthetic_data(&truth, &outer, 1.0, 0.05, level, seed).unwrap();
        let s: Vec<f64> = clean.f_samples.iter().map(|&(s, _)| s).collect();
        let norm = |vals: &[f64]| -> f64 {
            let n = vals.len();
            let mut acc = 0.0;
            for i in 0..n {
                let j = (i + 1) % n;
                let ds = if j == 0 { 1.0 + s[j] - s[i] } else { s[j] - s[i] };
                acc += ds / 6.0
                    * (2.0 * vals[i] * vals[i]
                        + 2.0 * vals[j] * vals[j]
                        + 2.0 * vals[i] * vals[j]);
            }
            acc.sqrt()
        };
        let clean_vals: Vec<f64> = clean.f_samples.iter().map(|&(_, f)| f).collect();
        let diff: Vec<f64> = clean
            .f_samples
            .iter()
            .zip(&noisy.f_samples)
            .map(|(&(_, x), &(_, y))| y - x)
            .collect();
        let rel = norm(&diff) / norm(&clean_vals);
        prop_assert!((rel - level).abs() <= 1e-12, "relative norm {}", rel);
    }
}
