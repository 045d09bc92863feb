//! Homogeneous oracle for the residue form: on `C^3 x C^3`,
//! `det[E_x, E_y, nu, u, v, w] / s(x, y)` with `E` the Euler fields and
//! `dQ(nu) = 1` is scale invariant, so its ratio to `theta_D` must be a
//! single constant over the whole complement of `D`.

use pseudotor_core::linalg::{Pair, C64};
use pseudotor_core::sampling::{random_flag, random_tangent};
use pseudotor_core::special::{BoundaryDivisor, ResidueForm};
use pseudotor_core::geometry::TangentVector;
use pseudotor_core::{CVec3, Surface};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn det6(mut m: [[C64; 6]; 6]) -> C64 {
    let mut d = C64::new(1.0, 0.0);
    for c in 0..6 {
        let piv = (c..6).max_by(|a, b| m[*a][c].norm().total_cmp(&m[*b][c].norm())).unwrap();
        if m[piv][c].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != c {
            m.swap(piv, c);
            d = -d;
        }
        d *= m[c][c];
        for r in (c + 1)..6 {
            let f = m[r][c] / m[c][c];
            for k in c..6 {
                let t = m[c][k];
                m[r][k] -= f * t;
            }
        }
    }
    d
}

fn column(v: &Pair) -> [C64; 6] {
    [v.x.0[0], v.x.0[1], v.x.0[2], v.y.0[0], v.y.0[1], v.y.0[2]]
}

/// Oracle on arbitrary representatives `r` and tangent lifts at `r`.
fn oracle(d: &BoundaryDivisor, r: &Pair, u: &TangentVector, v: &TangentVector, w: &TangentVector) -> C64 {
    let z = CVec3::ZERO;
    let ex = Pair::new(r.x, z);
    let ey = Pair::new(z, r.y);
    let nu = Pair::new(r.y.conj(), r.x.conj()).scale_re(1.0 / (r.x.norm_sqr() + r.y.norm_sqr()));
    let cols = [column(&ex), column(&ey), column(&nu), column(u), column(v), column(w)];
    let mut m = [[C64::new(0.0, 0.0); 6]; 6];
    for (c, col) in cols.iter().enumerate() {
        for (row, val) in col.iter().enumerate() {
            m[row][c] = *val;
        }
    }
    det6(m) / d.section_raw(&r.x, &r.y)
}

#[test]
fn residue_form_matches_the_homogeneous_determinant() {
    let d = BoundaryDivisor::default_divisor();
    let form = ResidueForm::new(d, Surface::flag()).unwrap();
    let s = Surface::flag();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut ratio: Option<C64> = None;
    for _ in 0..60 {
        let p = random_flag(&mut rng);
        let [u, v, w] = [0; 3].map(|_| random_tangent(&p, &s, &mut rng));
        let t = form.theta(&p, &u, &v, &w).unwrap();
        let this = oracle(&d, &p.reps(), &u, &v, &w) / t;
        match ratio {
            None => ratio = Some(this),
            Some(r0) => assert!((this - r0).norm() < 1e-8 * r0.norm(), "ratio {this} vs {r0}"),
        }
    }
    assert!(ratio.unwrap().norm() > 1e-6);
}

#[test]
fn oracle_is_scale_invariant() {
    let d = BoundaryDivisor::default_divisor();
    let s = Surface::flag();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let p = random_flag(&mut rng);
        let [u, v, w] = [0; 3].map(|_| random_tangent(&p, &s, &mut rng));
        let r = p.reps();
        let base = oracle(&d, &r, &u, &v, &w);
        let (l, m) = (C64::new(0.6, -2.1), C64::new(-0.3, 0.4));
        let sc = |t: &Pair| Pair::new(t.x.scale(l), t.y.scale(m));
        // A vertical shift of a tangent is absorbed by the Euler columns.
        let shifted = u + Pair::new(r.x.scale(C64::new(0.2, 0.7)), r.y.scale(C64::new(-1.1, 0.0)));
        let moved = oracle(&d, &sc(&r), &sc(&shifted), &sc(&v), &sc(&w));
        assert!((moved - base).norm() < 1e-11 * base.norm(), "{moved} vs {base}");
    }
}
