//! Property tests of the structural invariants.

use proptest::prelude::*;
use pseudotor_core::dynamics::{make_default_integrals, poisson, SymbolFunction};
use pseudotor_core::fibration::{convex_hull, hexagon_vertices, hull_depth, torus_orbit_distance};
use pseudotor_core::geometry::{aligned_distance, canonical_unit};
use pseudotor_core::linalg::{cis, CVec3, Pair};
use pseudotor_core::pseudotoric::psi_raw;
use pseudotor_core::sampling::{random_ambient, random_cvec3, random_flag, random_hermitian};
use pseudotor_core::special::circular_stats;
use pseudotor_core::{FlagPoint, Surface, Tolerances};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn torus(p: &Pair, a: [f64; 3]) -> Pair {
    let d = CVec3::new(cis(a[0]), cis(a[1]), cis(a[2]));
    Pair::new(p.x.hadamard(&d), p.y.hadamard(&d.conj()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_unit_is_idempotent(seed in any::<u64>(), phase in -3.0..3.0f64) {
        let v = random_cvec3(&mut rng(seed)).normalized();
        let c = canonical_unit(v);
        prop_assert!((canonical_unit(c) - c).norm() < 1e-15);
        prop_assert!((canonical_unit(v.scale(cis(phase))) - c).norm() < 1e-14);
        prop_assert!(aligned_distance(&v, &c) < 1e-14);
    }

    #[test]
    fn projection_lands_on_the_surface(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_ambient(&mut r).reps();
        let s = Surface::flag();
        let p = s.project(&a.x, &a.y, &Tolerances::default());
        if let Ok(p) = p {
            let q = p.reps();
            prop_assert!(s.residual(&q.x, &q.y) < 1e-12);
        }
    }

    #[test]
    fn torus_action_preserves_flag_psi_and_integrals(seed in any::<u64>(), a in prop::array::uniform3(-3.2..3.2f64)) {
        let p = random_flag(&mut rng(seed)).reps();
        let q = torus(&p, a);
        prop_assert!(Surface::flag().residual(&q.x, &q.y) < 1e-13);
        prop_assert!((psi_raw(&q) - psi_raw(&p)).norm() < 1e-14);
        let ip = make_default_integrals();
        let (u, v) = (ip.values(&p), ip.values(&q));
        prop_assert!((u.0 - v.0).abs() < 1e-13 && (u.1 - v.1).abs() < 1e-13);
        prop_assert!(torus_orbit_distance(&p, &q) < 1e-12);
    }

    #[test]
    fn psi_image_lies_on_the_base_line(seed in any::<u64>()) {
        let p = random_flag(&mut rng(seed)).reps();
        let w = psi_raw(&p);
        prop_assert!((w.0[0] + w.0[1] + w.0[2]).norm() < 1e-13);
    }

    #[test]
    fn poisson_bracket_is_antisymmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = SymbolFunction::of_action(random_hermitian(&mut r)).unwrap();
        let g = SymbolFunction::of_action(random_hermitian(&mut r)).unwrap();
        let p: FlagPoint = random_flag(&mut r);
        let scale = 1.0 + poisson(&f, &g, &p).abs();
        prop_assert!((poisson(&f, &g, &p) + poisson(&g, &f, &p)).abs() < 1e-13 * scale);
        prop_assert!(poisson(&f, &f, &p).abs() < 1e-13 * scale);
    }

    #[test]
    fn convex_combinations_of_the_hexagon_are_inside(w in prop::array::uniform6(0.0..1.0f64)) {
        let ip = make_default_integrals();
        let verts: Vec<(f64, f64)> = hexagon_vertices(&ip).iter().map(|v| v.value).collect();
        let hull = convex_hull(&verts);
        prop_assert_eq!(hull.len(), 6);
        let total: f64 = w.iter().sum::<f64>() + 1e-9;
        let c = verts.iter().zip(&w).fold((0.0, 0.0), |acc, (v, t)| (acc.0 + v.0 * t / total, acc.1 + v.1 * t / total));
        prop_assert!(hull_depth(&hull, c) > -1e-9);
        let g = verts.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0 / 6.0, acc.1 + v.1 / 6.0));
        prop_assert!(hull_depth(&hull, g) > 0.0);
        for v in &verts {
            let beyond = (v.0 + 0.1 * (v.0 - g.0), v.1 + 0.1 * (v.1 - g.1));
            prop_assert!(hull_depth(&hull, beyond) < 0.0);
        }
    }

    #[test]
    fn hull_contains_its_points(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pts: Vec<(f64, f64)> = (0..30).map(|_| {
            let v = random_cvec3(&mut r);
            (v.0[0].re, v.0[1].im)
        }).collect();
        let hull = convex_hull(&pts);
        for p in &pts {
            prop_assert!(hull_depth(&hull, *p) > -1e-12);
        }
    }

    #[test]
    fn circular_spread_is_rotation_invariant(a in prop::collection::vec(-0.5..0.5f64, 3..20), shift in -3.0..3.0f64) {
        let (m0, s0) = circular_stats(&a);
        let b: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let (m1, s1) = circular_stats(&b);
        prop_assert!((s0 - s1).abs() < 1e-7);
        let d = (m1 - m0 - shift).rem_euclid(std::f64::consts::TAU);
        prop_assert!(d.min(std::f64::consts::TAU - d) < 1e-10);
    }
}
