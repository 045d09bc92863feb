//! Independent oracles for the Kahler structure and the Hamiltonian fields:
//! Fubini-Study in affine coordinates, finite differences of the symbols and
//! closed-form flows.

use pseudotor_core::dynamics::{
    exact_symbol_flow, flow, ham_field, make_default_integrals, poisson, SymbolFunction,
};
use pseudotor_core::geometry::{exp_map, metric, omega, reference_flag, ChartFrame, TangentVector};
use pseudotor_core::linalg::{CVec3, Pair, C64};
use pseudotor_core::sampling::{random_flag, random_hermitian, random_tangent};
use pseudotor_core::{FlagPoint, Surface, Tolerances};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fubini-Study hermitian form of `CP^2` in the affine chart of the largest
/// coordinate of `x`, applied to the chart images of `u` and `v`.
fn fs_affine(x: &CVec3, u: &CVec3, v: &CVec3) -> C64 {
    let i = (0..3).fold(0, |b, m| if x.0[m].norm() > x.0[b].norm() { m } else { b });
    let idx: Vec<usize> = (0..3).filter(|m| *m != i).collect();
    let z: Vec<C64> = idx.iter().map(|a| x.0[*a] / x.0[i]).collect();
    let d = |w: &CVec3| -> Vec<C64> { idx.iter().map(|a| (w.0[*a] * x.0[i] - x.0[*a] * w.0[i]) / (x.0[i] * x.0[i])).collect() };
    let (du, dv) = (d(u), d(v));
    let r = 1.0 + z.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let uv: C64 = du.iter().zip(&dv).map(|(a, b)| a.conj() * b).sum();
    let uz: C64 = du.iter().zip(&z).map(|(a, b)| a.conj() * b).sum();
    let zv: C64 = z.iter().zip(&dv).map(|(a, b)| a.conj() * b).sum();
    (uv * r - uz * zv) / (r * r)
}

#[test]
fn forms_match_fubini_study_in_charts() {
    let mut r = rng(1);
    let s = Surface::flag();
    for _ in 0..200 {
        let p = random_flag(&mut r);
        let u = random_tangent(&p, &s, &mut r);
        let v = random_tangent(&p, &s, &mut r);
        let q = p.reps();
        let h = fs_affine(&q.x, &u.x, &v.x) + fs_affine(&q.y, &u.y, &v.y);
        let scale = u.norm() * v.norm();
        assert!((omega(&u, &v) - h.im).abs() < 1e-12 * scale, "omega {} vs {}", omega(&u, &v), h.im);
        assert!((metric(&u, &v) - h.re).abs() < 1e-12 * scale);
        // J is an isometry and omega(u, J u) = g(u, u).
        assert!((omega(&u, &u.times_i()) - metric(&u, &u)).abs() < 1e-12 * u.norm_sqr());
    }
}

#[test]
fn chart_coordinates_round_trip() {
    let mut r = rng(2);
    let s = Surface::flag();
    for _ in 0..100 {
        let p = random_flag(&mut r);
        let f = ChartFrame::at(&p, &s);
        let v = random_tangent(&p, &s, &mut r);
        let back = f.to_tangent(&f.from_tangent(&v));
        assert!((back - v).norm() < 1e-11 * v.norm());
        let c = f.real_components(&v);
        let w = random_tangent(&p, &s, &mut r);
        let cw = f.real_components(&w);
        assert!((f.omega_on(&c, &cw) - omega(&v, &w)).abs() < 1e-10 * v.norm() * w.norm());
    }
}

fn fd_derivative(f: &SymbolFunction, p: &FlagPoint, v: &TangentVector) -> f64 {
    let (s, tol) = (Surface::flag(), Tolerances::default());
    let e = 1e-5;
    let plus = exp_map(p, &v.scale_re(e), &s, &tol).unwrap();
    let minus = exp_map(p, &v.scale_re(-e), &s, &tol).unwrap();
    (f.eval_pair(&plus.reps()) - f.eval_pair(&minus.reps())) / (2.0 * e)
}

#[test]
fn hamiltonian_field_contracts_to_the_differential() {
    let mut r = rng(3);
    let s = Surface::flag();
    let ip = make_default_integrals();
    let general = SymbolFunction::of_action(random_hermitian(&mut r)).unwrap();
    for f in [ip.f1, ip.f2, general] {
        for _ in 0..50 {
            let p = random_flag(&mut r);
            let v = random_tangent(&p, &s, &mut r);
            let x = ham_field(&f, &p);
            let d = fd_derivative(&f, &p, &v);
            assert!((omega(&x, &v) - d).abs() < 1e-7 * (1.0 + v.norm()), "{} vs {d}", omega(&x, &v));
        }
    }
}

#[test]
fn bracket_is_the_derivative_along_the_flow() {
    let mut r = rng(4);
    let tol = Tolerances::default();
    let f = SymbolFunction::of_action(random_hermitian(&mut r)).unwrap();
    let g = SymbolFunction::of_action(random_hermitian(&mut r)).unwrap();
    for _ in 0..10 {
        let p = random_flag(&mut r);
        let h = 1e-4;
        let fwd = flow(&g, &p, h, &tol).unwrap().end;
        let bwd = flow(&g, &p, -h, &tol).unwrap().end;
        let d = (f.eval_pair(&fwd.reps()) - f.eval_pair(&bwd.reps())) / (2.0 * h);
        assert!((poisson(&f, &g, &p) - d).abs() < 1e-6 * (1.0 + d.abs()), "{} vs {d}", poisson(&f, &g, &p));
        assert!((poisson(&f, &g, &p) + poisson(&g, &f, &p)).abs() < 1e-13);
    }
}

#[test]
fn integrated_flow_matches_the_matrix_exponential() {
    let tol = Tolerances::default();
    let ip = make_default_integrals();
    let mut r = rng(5);
    for f in [ip.f1, ip.f2] {
        for _ in 0..5 {
            let p = random_flag(&mut r);
            let t = 1.3;
            let end = flow(&f, &p, t, &tol).unwrap();
            let exact = exact_symbol_flow(&f, &p.reps(), t);
            let q = FlagPoint::from_vecs(exact.x, exact.y, 1e-9).unwrap();
            assert!(end.end.distance(&q) < 1e-9, "distance {}", end.end.distance(&q));
            assert!(end.energy_drift < 1e-10);
        }
    }
}

#[test]
fn reference_flag_is_on_the_surface() {
    let p = reference_flag();
    let r: Pair = p.reps();
    assert!(Surface::flag().residual(&r.x, &r.y) < 1e-15);
}
