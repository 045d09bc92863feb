//! Random test data: points, tangent vectors and Hermitian matrices drawn from
//! unitarily invariant distributions.

use rand_core::RngCore;

use crate::error::Result;
use crate::geometry::{horizontal, AmbientPoint, FlagPoint, ProjectivePoint, Surface, TangentVector};
use crate::linalg::{CMat3, CVec3, Pair, C64};
use crate::math::{cos, ln, sin, sqrt, TAU};

/// Uniform sample in `(0, 1]`.
pub fn uniform(rng: &mut dyn RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}

/// Standard normal sample (Box-Muller).
pub fn gaussian(rng: &mut dyn RngCore) -> f64 {
    let u = uniform(rng);
    let v = uniform(rng);
    sqrt(-2.0 * ln(u)) * cos(TAU * v)
}

/// Standard complex normal sample.
pub fn complex_gaussian(rng: &mut dyn RngCore) -> C64 {
    let u = uniform(rng);
    let v = uniform(rng);
    let r = sqrt(-ln(u));
    C64::new(r * cos(TAU * v), r * sin(TAU * v))
}

pub fn random_cvec3(rng: &mut dyn RngCore) -> CVec3 {
    CVec3([complex_gaussian(rng), complex_gaussian(rng), complex_gaussian(rng)])
}

/// Haar-random point of `CP^2`.
pub fn random_projective(rng: &mut dyn RngCore) -> ProjectivePoint {
    loop {
        if let Ok(p) = ProjectivePoint::from_vec(random_cvec3(rng)) {
            return p;
        }
    }
}

pub fn random_ambient(rng: &mut dyn RngCore) -> AmbientPoint {
    AmbientPoint::new(random_projective(rng), random_projective(rng))
}

/// Random point of the surface: `x` Haar random, `y` Gaussian in the plane
/// `sum q_k x_k y_k = 0`. For `F^3` this is the invariant measure.
pub fn random_surface_point(s: &Surface, rng: &mut dyn RngCore) -> FlagPoint {
    loop {
        let x = random_projective(rng).coords();
        let qx = s.qvec().hadamard(&x);
        let nn = qx.norm_sqr();
        if nn < 1e-12 {
            continue;
        }
        let g = random_cvec3(rng);
        let y = g - qx.conj().scale(qx.dot(&g) / nn);
        if let Ok(p) = FlagPoint::from_unchecked(x, y) {
            if s.residual(&p.x().coords(), &p.y().coords()) < 1e-13 {
                return p;
            }
        }
    }
}

pub fn random_flag(rng: &mut dyn RngCore) -> FlagPoint {
    random_surface_point(&Surface::flag(), rng)
}

/// Random unit tangent vector of the surface at `p`.
pub fn random_tangent(p: &FlagPoint, s: &Surface, rng: &mut dyn RngCore) -> TangentVector {
    let r = p.reps();
    loop {
        let v = Pair::new(random_cvec3(rng), random_cvec3(rng));
        let t = s.project_tangent(&r.x, &r.y, &v);
        let n = t.norm();
        if n > 1e-6 {
            return t.scale_re(1.0 / n);
        }
    }
}

/// Random unit horizontal vector of `CP^2 x CP^2` at `p`.
pub fn random_ambient_tangent(p: &AmbientPoint, rng: &mut dyn RngCore) -> TangentVector {
    let r = p.reps();
    loop {
        let v = horizontal(&r.x, &r.y, &Pair::new(random_cvec3(rng), random_cvec3(rng)));
        let n = v.norm();
        if n > 1e-6 {
            return v.scale_re(1.0 / n);
        }
    }
}

/// Random point of the line `{ sum n_k w_k = 0 }` in `CP^2_w`.
pub fn random_point_on_line(n: &CVec3, rng: &mut dyn RngCore) -> Result<ProjectivePoint> {
    let nn = n.norm_sqr();
    let g = random_cvec3(rng);
    ProjectivePoint::from_vec(g - n.conj().scale(n.dot(&g) / nn))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(rng: &mut dyn RngCore) -> CMat3 {
    let mut m = CMat3::ZERO;
    for r in 0..3 {
        m.0[r][r] = C64::new(gaussian(rng), 0.0);
        for s in (r + 1)..3 {
            let z = complex_gaussian(rng);
            m.0[r][s] = z;
            m.0[s][r] = z.conj();
        }
    }
    m
}
