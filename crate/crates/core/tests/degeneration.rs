//! The isotopy into `F_0` and the toric structure of `F_0`, checked with
//! quantities recomputed from the transported representatives.

use pseudotor_core::degeneration::{
    cutoff_g, default_g, distance_to_delta, family_seed, ft_residual, isotopy_transport, restriction_drift, IsotopyKind,
};
use pseudotor_core::dynamics::make_default_integrals;
use pseudotor_core::fibration::{default_height, sample_torus, trace_loop, TorusResolution};
use pseudotor_core::pseudotoric::{psi_raw, Structure};
use pseudotor_core::{Error, FlagPoint, Tolerances, C64};

fn cloud(n: usize) -> Vec<FlagPoint> {
    let st = Structure::flag_default();
    let h = default_height();
    let lp = trace_loop(&h, 0.3, 8, &st.tol).unwrap();
    let t = sample_torus(&st, &h, &lp, 2.0, 3.2, TorusResolution { loop_points: 8, angle1: 4, angle2: 4 }).unwrap();
    let step = t.samples.len() / n;
    t.samples.iter().step_by(step).take(n).map(|s| s.point).collect()
}

#[test]
fn tracking_isotopy_lands_on_f0_over_its_line() {
    let tol = Tolerances::default();
    let ip = make_default_integrals();
    let pts = cloud(3);
    let clearance = pts.iter().map(|p| distance_to_delta(&p.reps())).fold(f64::INFINITY, f64::min);
    assert!(clearance > 0.2);
    let g = cutoff_g(default_g(), IsotopyKind::SurfaceTracking, 0.2, 0.1).unwrap();
    let rep = isotopy_transport(&g, &ip, g.rotation.time, &pts, &tol).unwrap();
    assert!(rep.passes(), "{rep:?}");
    for (start, end) in pts.iter().zip(&rep.points) {
        let e = end.reps();
        let x1y1 = e.x.0[1] * e.y.0[1];
        let x2y2 = e.x.0[2] * e.y.0[2];
        assert!((x1y1 + x2y2).norm() < 1e-6);
        let w = psi_raw(&e);
        assert!((w.0[1] + w.0[2]).norm() < 1e-6 * w.norm());
        let (a0, b0) = ip.values(&start.reps());
        let (a1, b1) = ip.values(&e);
        assert!((a1 - a0).abs() < 1e-7 && (b1 - b0).abs() < 1e-7);
    }
}

#[test]
fn wide_collar_is_entered() {
    let tol = Tolerances::default();
    let pts = cloud(2);
    let clearance = pts.iter().map(|p| distance_to_delta(&p.reps())).fold(f64::INFINITY, f64::min);
    let g = cutoff_g(default_g(), IsotopyKind::SurfaceTracking, 2.0 * clearance, 0.5 * clearance).unwrap();
    let r = isotopy_transport(&g, &make_default_integrals(), g.rotation.time, &pts, &tol);
    match r {
        Err(Error::EnteredCollar { .. }) => {}
        Ok(rep) => assert!(!rep.passes()),
        Err(e) => panic!("unexpected {e}"),
    }
}

#[test]
fn integrals_preserve_the_degenerate_surface() {
    let tol = Tolerances::default();
    let ip = make_default_integrals();
    let p = family_seed(0.0, 2.0, 3.2, &ip, &tol).unwrap();
    let r = p.reps();
    assert!(ft_residual(&r.x, &r.y, C64::new(0.0, 0.0)) < 1e-10);
    assert!(restriction_drift(&ip.f1, &p, 1.0, &tol).unwrap() < 1e-9);
    assert!(restriction_drift(&ip.f2, &p, 1.0, &tol).unwrap() < 1e-9);
    for t in [0.25, 0.5, 1.0] {
        let q = family_seed(t, 2.0, 3.2, &ip, &tol).unwrap().reps();
        assert!(ft_residual(&q.x, &q.y, C64::new(t, 0.0)) < 1e-10);
        let (a, b) = ip.values(&q);
        assert!((a - 2.0).abs() < 1e-8 && (b - 3.2).abs() < 1e-8);
    }
}
