//! The flag variety as incidence pairs: projection, Schubert cells, the
//! pencil through a point and the orbits of the complex torus.

use pseudotor_core::dynamics::{base_field, exact_symbol_flow, make_default_integrals, Domain, IntegralPair, SymbolFunction};
use pseudotor_core::flagconn::{
    classify_flag, dpi_relation_check, fit_symplectic_constant, orbit_coverage, orbit_psi_defect, pencil_vertex_lines,
    schubert_flow_defect, schubert_membership, torus_orbit_sample, FlagAsPair, FlagClass, Schubert,
};
use pseudotor_core::linalg::{c, CVec3};
use pseudotor_core::pseudotoric::BaseFunction;
use pseudotor_core::sampling::{random_cvec3, random_flag, random_hermitian};
use pseudotor_core::{ProjectivePoint, C64};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn projection_intertwines_the_flows() {
    let mut r = rng(41);
    for _ in 0..30 {
        let a = random_hermitian(&mut r);
        let b = SymbolFunction::on_base(random_hermitian(&mut r), Domain::BaseCP2w).unwrap();
        let fa = SymbolFunction::of_action(a).unwrap();
        let small = SymbolFunction::on_base(a, Domain::BaseCP2w).unwrap();
        let q = random_flag(&mut r);
        let e = 1e-5;
        let at = |t: f64| b.value(&exact_symbol_flow(&fa, &q.reps(), t).x);
        let fd = (at(e) - at(-e)) / (2.0 * e);
        let x = q.reps().x;
        let analytic = 2.0 * b.grad(&x).hdot(&base_field(&small, &x)).re;
        assert!((fd - analytic).abs() < 1e-7 * (1.0 + fd.abs()), "{fd} vs {analytic}");
        let f = FlagAsPair::from_flag(&q);
        assert!(dpi_relation_check(&a, &f).unwrap().residual < 1e-10);
    }
}

/// Measured relative spread of this ratio is about 0.5, so no single
/// constant relates the two forms along `(X_{F_A}, I X_{F_A})`.
#[test]
#[ignore = "the symplectic ratio is not constant; recorded as a known failure"]
fn symplectic_ratio_is_constant() {
    let mut r = rng(42);
    let a = random_hermitian(&mut r);
    let flags: Vec<FlagAsPair> = (0..100).map(|_| FlagAsPair::from_flag(&random_flag(&mut r))).collect();
    let (_, rel_std) = fit_symplectic_constant(&a, &flags).unwrap();
    assert!(rel_std < 1e-6, "relative spread {rel_std}");
}

/// A flag with `l_{p0} = 0` (or `p_{p0} = 0`); the other member is a cross
/// product, so the bilinear incidence holds exactly.
fn flag_in(p0: usize, on_point: bool, r: &mut ChaCha8Rng) -> FlagAsPair {
    let mut a = random_cvec3(r);
    a.0[p0] = C64::new(0.0, 0.0);
    let b = a.cross(&random_cvec3(r));
    let (p, l) = if on_point { (a, b) } else { (b, a) };
    FlagAsPair::new(ProjectivePoint::from_vec(p).unwrap(), ProjectivePoint::from_vec(l).unwrap(), 1e-9).unwrap()
}

#[test]
fn integral_flows_preserve_schubert_cells() {
    let ip = make_default_integrals();
    let mut r = rng(43);
    for p0 in 0..3 {
        for on_point in [false, true] {
            let f = flag_in(p0, on_point, &mut r);
            let m = schubert_membership(&f, p0, 1e-9);
            assert!(matches!(m, Schubert::InDp0 | Schubert::InDl0 | Schubert::Both), "{m:?}");
            assert!(schubert_flow_defect(&ip, &f, p0, 0.8).unwrap() < 1e-7);
        }
    }
    // A non-diagonal integral moves the cells.
    let mixing = SymbolFunction::of_action(random_hermitian(&mut r)).unwrap();
    let ctl = IntegralPair::unchecked(mixing, mixing);
    let f = flag_in(0, false, &mut r);
    assert!(schubert_flow_defect(&ctl, &f, 0, 0.8).unwrap() > 1e-3);
}

#[test]
fn pencil_meets_each_vertex_once() {
    let generic = ProjectivePoint::from_vec(CVec3::new(c(1.0, 0.2), c(-0.4, 0.9), c(0.3, -0.6))).unwrap();
    let lines = pencil_vertex_lines(&generic).unwrap();
    assert_eq!(lines.len(), 3);
    for (i, f) in lines.iter().enumerate() {
        assert!(f.incidence() < 1e-14);
        assert_eq!(classify_flag(f, 1e-12), FlagClass::ThroughVertex(i));
    }
    // On a side of the triangle two vertices share a line.
    let side = ProjectivePoint::from_vec(CVec3::new(c(1.0, 0.0), c(0.5, 0.5), c(0.0, 0.0))).unwrap();
    assert_eq!(pencil_vertex_lines(&side).unwrap().len(), 2);
}

#[test]
fn torus_orbits_sit_in_a_fibre_and_fill_the_simplex() {
    let mut r = rng(44);
    let seed = FlagAsPair::from_flag(&random_flag(&mut r));
    let params: Vec<(C64, C64)> = (0..20).map(|k| (c(1.0 + 0.1 * k as f64, 0.3), c(0.5, -0.2 * k as f64 - 0.1))).collect();
    assert!(orbit_psi_defect(&seed, &params).unwrap() < 1e-12);
    for (s, t) in &params {
        assert!(torus_orbit_sample(&seed, *s, *t).unwrap().incidence() < 1e-13);
    }
    let cov: Vec<f64> = [0.5, 2.0, 6.0].iter().map(|rad| orbit_coverage(&seed, *rad, 200, 20).unwrap()).collect();
    assert!(cov.windows(2).all(|w| w[1] >= w[0]), "{cov:?}");
    assert!(cov[2] > 0.95 && cov[0] < 0.5, "{cov:?}");
}
