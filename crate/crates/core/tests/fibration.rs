//! Oracles for the differential of `psi`, the horizontal lift and sampled tori.

use pseudotor_core::dynamics::{make_default_integrals, SymbolFunction};
use pseudotor_core::fibration::{
    default_height, divisor_branches, lagrangian_residual, sample_torus, trace_loop, FiberType, TorusResolution,
};
use pseudotor_core::geometry::{exp_map, omega};
use pseudotor_core::linalg::c;
use pseudotor_core::pseudotoric::{d_psi, line_tangent, psi, psi_raw, BaseFunction, Structure};
use pseudotor_core::sampling::{random_flag, random_hermitian, random_tangent};
use pseudotor_core::{FlagPoint, Surface, Tolerances};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

#[test]
fn differential_of_psi_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (s, tol) = (Surface::flag(), Tolerances::default());
    for _ in 0..60 {
        let h = SymbolFunction::of_action(random_hermitian(&mut rng)).unwrap();
        let p = random_flag(&mut rng);
        let v = random_tangent(&p, &s, &mut rng);
        let e = 1e-5;
        let at = |t: f64| h.value(&psi_raw(&exp_map(&p, &v.scale_re(t), &s, &tol).unwrap().reps()));
        let fd = (at(e) - at(-e)) / (2.0 * e);
        let w = psi(&p).unwrap().coords();
        let dw = d_psi(&p, &v).unwrap();
        let analytic = 2.0 * h.grad(&w).hdot(&dw).re;
        assert!((fd - analytic).abs() < 1e-7 * (1.0 + v.norm()), "{fd} vs {analytic}");
    }
}

#[test]
fn horizontal_lift_projects_and_is_orthogonal_to_the_fibre() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let st = Structure::flag_default();
    let n = st.base_normal();
    for _ in 0..40 {
        let p = random_flag(&mut rng);
        let w = psi(&p).unwrap().coords();
        let u = line_tangent(&n, &w).scale(c(0.7, -0.4));
        let lift = st.horizontal_lift(&p, &u).unwrap().lifted;
        let closed = st.lift_closed_form(&p, &u).unwrap();
        assert!((lift - closed).norm() < 1e-9 * lift.norm(), "solved and closed-form lifts differ");
        assert!((d_psi(&p, &lift).unwrap() - u).norm() < 1e-10 * u.norm());
        for k in st.fibre_basis(&p) {
            assert!(omega(&lift, &k).abs() < 1e-10 * lift.norm() * k.norm());
        }
    }
}

#[test]
fn sampled_torus_satisfies_independent_invariants() {
    let st = Structure::flag_default();
    let h = default_height();
    let lp = trace_loop(&h, 0.3, 16, &st.tol).unwrap();
    let res = TorusResolution { loop_points: 16, angle1: 6, angle2: 6 };
    let t = sample_torus(&st, &h, &lp, 2.0, 3.2, res).unwrap();
    assert_eq!(t.fiber_type, FiberType::Smooth);
    assert!(t.samples.len() >= 16 * 36 - 36 * t.skipped_loop_indices.len());
    let ip = make_default_integrals();
    for smp in &t.samples {
        let r = smp.point.reps();
        assert!(Surface::flag().residual(&r.x, &r.y) < 1e-10);
        let (a, b) = ip.values(&r);
        assert!((a - 2.0).abs() < 1e-7 && (b - 3.2).abs() < 1e-7, "integrals {a} {b}");
        assert!((h.value(&psi_raw(&r)) - 0.3).abs() < 1e-7);
        for i in 0..3 {
            for j in (i + 1)..3 {
                let scale = smp.frame[i].norm() * smp.frame[j].norm();
                assert!(omega(&smp.frame[i], &smp.frame[j]).abs() < 1e-9 * scale);
            }
        }
    }
    assert!(lagrangian_residual(&t) < 1e-9);
    assert!(t.min_frame_singular_value > 1e-3);
}

/// Flag with `x_i` (or `y_i`) of size `eps`, pushed back onto the surface.
fn near_branch(i: usize, on_x: bool, eps: f64, rng: &mut ChaCha8Rng) -> FlagPoint {
    let p = random_flag(rng).reps();
    let (mut x, mut y) = (p.x, p.y);
    if on_x {
        x.0[i] = x.0[i].scale(eps);
    } else {
        y.0[i] = y.0[i].scale(eps);
    }
    Surface::flag().project(&x, &y, &Tolerances::default()).unwrap()
}

#[test]
fn boundary_divisor_has_four_branches() {
    let st = Structure::flag_default();
    let h = default_height();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut samples = Vec::new();
    for _ in 0..200 {
        for i in [0, 1] {
            for on_x in [true, false] {
                let q = near_branch(i, on_x, 1e-3, &mut rng);
                let crit = if i == 0 { h.max_point } else { h.min_point };
                if psi(&q).map(|w| w.distance(&crit) < 0.05).unwrap_or(false) {
                    samples.push(q);
                }
            }
        }
    }
    assert!(!samples.is_empty());
    assert_eq!(divisor_branches(&st, &h, &samples, 0.05), 4);
    let far: Vec<FlagPoint> = (0..50).map(|_| random_flag(&mut rng)).filter(|p| {
        let w = psi(p).unwrap();
        w.distance(&h.max_point) > 0.2 && w.distance(&h.min_point) > 0.2
    }).collect();
    assert_eq!(divisor_branches(&st, &h, &far, 0.05), 0);
}
