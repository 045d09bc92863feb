//! Flags as incident pairs `(p, l)`: the projection `pi : F^3 -> CP^2`, the
//! singular connection spanned by `X_{F_i}` and `I X_{F_i}`, orbits of the
//! diagonal complex torus and the special flags of a pencil.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{base_field, surface_field, Domain, IntegralPair, SymbolFunction};
use crate::error::{Error, Result};
use crate::geometry::{metric, omega, tangent_between, FlagPoint, ProjectivePoint, Surface, TangentVector};
use crate::linalg::{singular_values, solve_real, CMat3, CVec3, Pair, C64};
use crate::math::sqrt;
use crate::pseudotoric::psi_raw;

/// A point `p` of `CP^2` and a line through it, stored as the dual covector
/// `l` with `sum l_i p_i = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlagAsPair {
    pub p: ProjectivePoint,
    pub l: ProjectivePoint,
}

impl FlagAsPair {
    pub fn new(p: ProjectivePoint, l: ProjectivePoint, tol: f64) -> Result<Self> {
        let r = l.coords().dot(&p.coords()).norm();
        if r > tol {
            return Err(Error::DomainMismatch { expected: "incident point and line", found: "non-incident pair" });
        }
        Ok(FlagAsPair { p, l })
    }

    pub fn from_flag(f: &FlagPoint) -> Self {
        FlagAsPair { p: *f.x(), l: *f.y() }
    }

    pub fn to_flag(&self) -> Result<FlagPoint> {
        FlagPoint::from_vecs(self.p.coords(), self.l.coords(), 1e-9)
    }

    pub fn incidence(&self) -> f64 {
        self.l.coords().dot(&self.p.coords()).norm()
    }
}

/// `pi(p, l) = p`.
pub fn pi_project(f: &FlagAsPair) -> ProjectivePoint {
    f.p
}

/// `d pi` of a tangent vector of `F^3` at unit representatives.
pub fn d_pi(v: &TangentVector) -> CVec3 {
    v.x
}

/// Affine chart components of a horizontal vector of `CP^2` at `p`, in the
/// chart of the largest coordinate.
fn cp2_chart(p: &CVec3, v: &CVec3) -> [C64; 2] {
    let i = (0..3).fold(0, |b, m| if p.0[m].norm() > p.0[b].norm() { m } else { b });
    let (a, b) = match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let pi = p.0[i];
    [(v.0[a] * pi - p.0[a] * v.0[i]) / (pi * pi), (v.0[b] * pi - p.0[b] * v.0[i]) / (pi * pi)]
}

/// Outcome of [`dpi_relation_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DpiCheck {
    /// `|d pi(X_{F_A}) - X_{f_A}| / |X_{f_A}|` in the chart of `CP^2` at `p`.
    pub residual: f64,
    /// `omega_F(v1, v2) / omega_CP2(d pi v1, d pi v2)` for `v1 = X_{F_A}`,
    /// `v2 = I X_{F_A}`, if defined.
    pub symplectic_ratio: Option<f64>,
}

/// Compares `d pi(X_{F_A})` with `X_{f_A}` at a flag.
pub fn dpi_relation_check(a: &CMat3, f: &FlagAsPair) -> Result<DpiCheck> {
    let fa = SymbolFunction::of_action(*a)?;
    let small = SymbolFunction::on_base(*a, Domain::BaseCP2w)?;
    let q = f.to_flag()?;
    let r = q.reps();
    let big = surface_field(&fa, &Surface::flag(), 0.0, &r);
    let lhs = d_pi(&big);
    let rhs = base_field(&small, &r.x);
    let cl = cp2_chart(&r.x, &lhs);
    let cr = cp2_chart(&r.x, &rhs);
    let num = sqrt((cl[0] - cr[0]).norm_sqr() + (cl[1] - cr[1]).norm_sqr());
    let den = sqrt(cr[0].norm_sqr() + cr[1].norm_sqr());
    let residual = if den < 1e-14 && num < 1e-14 { 0.0 } else { num / den };
    let v2 = big.times_i();
    let om_small = omega(&Pair::new(d_pi(&big), CVec3::ZERO), &Pair::new(d_pi(&v2), CVec3::ZERO));
    let symplectic_ratio = if om_small.abs() > 1e-12 { Some(omega(&big, &v2) / om_small) } else { None };
    Ok(DpiCheck { residual, symplectic_ratio })
}

/// `(X_{F1}, X_{F2}, I X_{F1}, I X_{F2})`, failing where the span drops rank.
pub fn horizontal_distribution(ip: &IntegralPair, f: &FlagAsPair, rank_tol: f64) -> Result<[TangentVector; 4]> {
    let q = f.to_flag()?;
    let r = q.reps();
    let s = Surface::flag();
    let a = surface_field(&ip.f1, &s, 0.0, &r);
    let b = surface_field(&ip.f2, &s, 0.0, &r);
    let d = [a, b, a.times_i(), b.times_i()];
    let cols: Vec<Vec<f64>> = d.iter().map(|v| v.to_real().to_vec()).collect();
    let sv = singular_values(&cols);
    if sv[0] < rank_tol {
        return Err(Error::DegenerateDistribution(sv[0]));
    }
    Ok(d)
}

/// A generator of a one-parameter group acting on flags by matrices: `x ->
/// exp(t M) x`, `y -> exp(-t M^T) y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearGenerator {
    pub m: CMat3,
}

impl LinearGenerator {
    /// The flow of `X_F` for the symbol `F` of the action of a Hermitian `A`.
    pub fn hamiltonian(a: &CMat3) -> Self {
        LinearGenerator { m: a.scale(C64::new(0.0, -2.0)) }
    }

    /// The flow of `I X_F`.
    pub fn rotated(a: &CMat3) -> Self {
        LinearGenerator { m: a.scale(C64::new(2.0, 0.0)) }
    }

    pub fn apply(&self, p: &Pair, t: f64) -> Pair {
        let k = self.m.scale(C64::new(t, 0.0)).expm();
        let kd = self.m.transpose().scale(C64::new(-t, 0.0)).expm();
        Pair::new(k.apply(&p.x).normalized(), kd.apply(&p.y).normalized())
    }

    /// Tangent vector of the flow at `p`.
    pub fn field(&self, p: &Pair) -> TangentVector {
        let v = Pair::new(self.m.apply(&p.x), self.m.transpose().apply(&p.y).scale(C64::new(-1.0, 0.0)));
        crate::geometry::horizontal(&p.x, &p.y, &v)
    }
}

/// The four generators of the distribution for diagonal integrals.
pub fn distribution_generators(ip: &IntegralPair) -> [LinearGenerator; 4] {
    let a1 = ip.f1.matrix_x;
    let a2 = ip.f2.matrix_x;
    [
        LinearGenerator::hamiltonian(&a1),
        LinearGenerator::hamiltonian(&a2),
        LinearGenerator::rotated(&a1),
        LinearGenerator::rotated(&a2),
    ]
}

/// Component of `v` orthogonal (for the metric) to the real span of `basis`.
fn vertical_part(v: &TangentVector, basis: &[TangentVector]) -> TangentVector {
    let n = basis.len();
    let gram: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| metric(&basis[i], &basis[j])).collect()).collect();
    let rhs: Vec<f64> = basis.iter().map(|b| metric(b, v)).collect();
    match solve_real(gram, rhs) {
        Some(c) => {
            let mut out = *v;
            for (b, ci) in basis.iter().zip(c) {
                out = out - b.scale_re(ci);
            }
            out
        }
        None => *v,
    }
}

/// Largest normalised component of the flow commutators
/// `phi^B_{-h} phi^A_{-h} phi^B_h phi^A_h (p)` outside the span of the
/// generators, divided by `h^2`.
pub fn frobenius_residual(gens: &[LinearGenerator], f: &FlagAsPair, step: f64) -> Result<f64> {
    let q = f.to_flag()?;
    let p = q.reps();
    let fields: Vec<TangentVector> = gens.iter().map(|g| g.field(&p)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..gens.len() {
        for b in (a + 1)..gens.len() {
            worst = worst.max(pair_residual(&gens[a], &gens[b], &p, &fields, step));
        }
    }
    Ok(worst)
}

fn pair_residual(ga: &LinearGenerator, gb: &LinearGenerator, p: &Pair, fields: &[TangentVector], step: f64) -> f64 {
    let q1 = ga.apply(p, step);
    let q2 = gb.apply(&q1, step);
    let q3 = ga.apply(&q2, -step);
    let q4 = gb.apply(&q3, -step);
    let v = crate::geometry::horizontal(&p.x, &p.y, &tangent_between(p, &q4));
    let na = ga.field(p).norm();
    let nb = gb.field(p).norm();
    vertical_part(&v, fields).norm() / (step * step * na * nb)
}

/// Bracket residual of a single pair of generators.
pub fn pair_frobenius_residual(ga: &LinearGenerator, gb: &LinearGenerator, gens: &[LinearGenerator], f: &FlagAsPair, step: f64) -> Result<f64> {
    let q = f.to_flag()?;
    let p = q.reps();
    let fields: Vec<TangentVector> = gens.iter().map(|g| g.field(&p)).collect();
    Ok(pair_residual(ga, gb, &p, &fields, step))
}

/// Residuals at a descending sequence of steps.
pub fn frobenius_study(gens: &[LinearGenerator], f: &FlagAsPair, steps: &[f64]) -> Result<Vec<f64>> {
    steps.iter().map(|h| frobenius_residual(gens, f, *h)).collect()
}

/// `r(h) <= 0.75 r(2h) + slack` along the halving sequence and `r < 1e-4` at the end.
pub fn decreases_linearly(residuals: &[f64], slack: f64) -> bool {
    let monotone = residuals.windows(2).all(|w| w[1] <= 0.75 * w[0] + slack);
    monotone && residuals.last().is_some_and(|r| *r < 1e-4)
}

/// `K = diag(s, t, 1)` acting on `p` and by `K^{-T}` on `l`.
pub fn torus_orbit_sample(seed: &FlagAsPair, s: C64, t: C64) -> Result<FlagAsPair> {
    if s.norm() == 0.0 || t.norm() == 0.0 {
        return Err(Error::InvalidParameter("torus parameters must be nonzero"));
    }
    let p = seed.p.coords();
    let l = seed.l.coords();
    let kp = CVec3([p.0[0] * s, p.0[1] * t, p.0[2]]);
    let kl = CVec3([l.0[0] / s, l.0[1] / t, l.0[2]]);
    Ok(FlagAsPair { p: ProjectivePoint::from_vec(kp)?, l: ProjectivePoint::from_vec(kl)? })
}

/// Largest distance of `psi` along the orbit samples from `psi(seed)`.
pub fn orbit_psi_defect(seed: &FlagAsPair, params: &[(C64, C64)]) -> Result<f64> {
    let w0 = ProjectivePoint::from_vec(psi_raw(&seed.to_flag()?.reps()))?;
    let mut worst: f64 = 0.0;
    for (s, t) in params {
        let f = torus_orbit_sample(seed, *s, *t)?;
        let w = ProjectivePoint::from_vec(psi_raw(&f.to_flag()?.reps()))?;
        worst = worst.max(w.distance(&w0));
    }
    Ok(worst)
}

/// Fraction of the cells of an `m x m` triangular grid of the moment simplex
/// of `CP^2` hit by `pi` of the orbit over a log grid `|s|, |t| <= e^radius`.
pub fn orbit_coverage(seed: &FlagAsPair, radius: f64, n: usize, m: usize) -> Result<f64> {
    let mut hit = vec![false; m * m];
    for a in 0..n {
        for b in 0..n {
            let u = -radius + 2.0 * radius * a as f64 / (n - 1).max(1) as f64;
            let v = -radius + 2.0 * radius * b as f64 / (n - 1).max(1) as f64;
            let f = torus_orbit_sample(seed, C64::new(crate::math::exp(u), 0.0), C64::new(crate::math::exp(v), 0.0))?;
            let p = f.p.coords();
            let (m0, m1) = (p.0[0].norm_sqr(), p.0[1].norm_sqr());
            let i = ((m0 * m as f64) as usize).min(m - 1);
            let j = ((m1 * m as f64) as usize).min(m - 1);
            if i + j < m {
                hit[i * m + j] = true;
            }
        }
    }
    let total = m * (m + 1) / 2;
    Ok(hit.iter().filter(|h| **h).count() as f64 / total as f64)
}

/// Flag type with respect to the coordinate triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlagClass {
    Generic,
    ThroughVertex(usize),
}

/// `ThroughVertex(i)` iff the line passes through `e_i`, i.e. `l_i = 0`.
pub fn classify_flag(f: &FlagAsPair, tol: f64) -> FlagClass {
    let l = f.l.coords();
    (0..3).find(|&i| l.0[i].norm() < tol).map_or(FlagClass::Generic, FlagClass::ThroughVertex)
}

/// The lines of the pencil through `p` that pass through a vertex.
pub fn pencil_vertex_lines(p: &ProjectivePoint) -> Result<Vec<FlagAsPair>> {
    let pc = p.coords();
    let pivot = (0..3).fold(0, |b, m| if pc.0[m].norm() > pc.0[b].norm() { m } else { b });
    let (j, k) = match pivot {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    // Basis of { l : l . p = 0 }.
    let mut u = CVec3::ZERO;
    u.0[j] = pc.0[pivot];
    u.0[pivot] = -pc.0[j];
    let mut v = CVec3::ZERO;
    v.0[k] = pc.0[pivot];
    v.0[pivot] = -pc.0[k];
    let mut out: Vec<FlagAsPair> = Vec::new();
    for i in 0..3 {
        let (ui, vi) = (u.0[i], v.0[i]);
        if ui.norm() < 1e-14 && vi.norm() < 1e-14 {
            continue;
        }
        let l = ProjectivePoint::from_vec(u.scale(vi) - v.scale(ui))?;
        let f = FlagAsPair { p: *p, l };
        if !out.iter().any(|g| g.l.distance(&l) < 1e-9) {
            out.push(f);
        }
    }
    Ok(out)
}

/// Membership in `D_{p0} = { l through e_{p0} }` and `D_{l0} = { p on z_{p0} = 0 }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schubert {
    InDp0,
    InDl0,
    Both,
    Neither,
}

pub fn schubert_membership(f: &FlagAsPair, p0: usize, tol: f64) -> Schubert {
    let in_p = f.l.coords().0[p0].norm() < tol;
    let in_l = f.p.coords().0[p0].norm() < tol;
    match (in_p, in_l) {
        (true, true) => Schubert::Both,
        (true, false) => Schubert::InDp0,
        (false, true) => Schubert::InDl0,
        (false, false) => Schubert::Neither,
    }
}

/// The SU(3)-type control generator replacing `I X_{F2}`.
pub fn control_generator() -> LinearGenerator {
    let mut a = CMat3::ZERO;
    a.0[0][1] = C64::new(1.0, 0.0);
    a.0[1][0] = C64::new(1.0, 0.0);
    a.0[1][2] = C64::new(0.0, 1.0);
    a.0[2][1] = C64::new(0.0, -1.0);
    LinearGenerator::hamiltonian(&a)
}

/// Largest incidence deviation of flows of the integrals started from members
/// of `D_{p0} u D_{l0}`.
pub fn schubert_flow_defect(ip: &IntegralPair, f: &FlagAsPair, p0: usize, time: f64) -> Result<f64> {
    let q = f.to_flag()?;
    let mut worst: f64 = 0.0;
    let before = schubert_membership(f, p0, 1e-9);
    for g in [&ip.f1, &ip.f2] {
        let end = crate::dynamics::flow(g, &q, time, &crate::Tolerances::default())?.end;
        let r = end.reps();
        let d = match before {
            Schubert::InDp0 => r.y.0[p0].norm(),
            Schubert::InDl0 => r.x.0[p0].norm(),
            Schubert::Both => r.x.0[p0].norm().max(r.y.0[p0].norm()),
            Schubert::Neither => 0.0,
        };
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Mean and relative standard deviation of the symplectic ratios over `flags`.
pub fn fit_symplectic_constant(a: &CMat3, flags: &[FlagAsPair]) -> Result<(f64, f64)> {
    let mut rs = Vec::with_capacity(flags.len());
    for f in flags {
        if let Some(r) = dpi_relation_check(a, f)?.symplectic_ratio {
            rs.push(r);
        }
    }
    if rs.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: rs.len() });
    }
    let n = rs.len() as f64;
    let mean = rs.iter().sum::<f64>() / n;
    let var = rs.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    Ok((mean, sqrt(var) / mean.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::make_default_integrals;
    use crate::geometry::reference_flag;

    fn pt(a: f64, b: f64, c: f64) -> ProjectivePoint {
        ProjectivePoint::from_real(a, b, c).unwrap()
    }

    #[test]
    fn projection_and_round_trip() {
        let f = FlagAsPair::new(pt(1.0, 0.0, 0.0), pt(0.0, 0.0, 1.0), 1e-12).unwrap();
        assert!(pi_project(&f).approx_eq(&pt(1.0, 0.0, 0.0), 1e-15));
        let g = reference_flag();
        let back = FlagAsPair::from_flag(&g).to_flag().unwrap();
        assert!(back.distance(&g) < 1e-12);
        assert!(FlagAsPair::new(pt(1.0, 0.0, 0.0), pt(1.0, 0.0, 0.0), 1e-9).is_err());
    }

    #[test]
    fn identity_action_has_no_field() {
        let c = dpi_relation_check(&CMat3::identity(), &FlagAsPair::from_flag(&reference_flag())).unwrap();
        assert_eq!(c.residual, 0.0);
        assert!(c.symplectic_ratio.is_none());
    }

    #[test]
    fn distribution_degenerates_over_a_vertex() {
        let ip = make_default_integrals();
        let f = FlagAsPair::new(pt(1.0, 0.0, 0.0), pt(0.0, 1.0, 1.0), 1e-12).unwrap();
        assert!(matches!(horizontal_distribution(&ip, &f, 1e-7), Err(Error::DegenerateDistribution(_))));
        let d = horizontal_distribution(&ip, &FlagAsPair::from_flag(&reference_flag()), 1e-7).unwrap();
        // I maps the span to itself: I(I X) = -X.
        assert!((d[2].times_i() + d[0]).norm() < 1e-12);
    }

    #[test]
    fn torus_action_keeps_incidence() {
        let f = FlagAsPair::from_flag(&reference_flag());
        let same = torus_orbit_sample(&f, C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap();
        assert!(same.p.approx_eq(&f.p, 1e-15) && same.l.approx_eq(&f.l, 1e-15));
        let g = torus_orbit_sample(&f, C64::new(3.0, -2.0), C64::new(0.1, 0.4)).unwrap();
        assert!(g.incidence() < 1e-14);
        assert!(torus_orbit_sample(&f, ZERO_C, C64::new(1.0, 0.0)).is_err());
    }

    const ZERO_C: C64 = C64 { re: 0.0, im: 0.0 };

    #[test]
    fn vertex_lines_and_schubert_cells() {
        let f = FlagAsPair::new(pt(0.0, 1.0, 1.0), pt(0.0, 1.0, -1.0), 1e-12).unwrap();
        assert_eq!(classify_flag(&f, 1e-12), FlagClass::ThroughVertex(0));
        assert_eq!(schubert_membership(&f, 0, 1e-12), Schubert::Both);
        let g = FlagAsPair::new(pt(1.0, 1.0, 1.0), pt(1.0, -2.0, 1.0), 1e-12).unwrap();
        assert_eq!(classify_flag(&g, 1e-12), FlagClass::Generic);
        assert_eq!(schubert_membership(&g, 1, 1e-12), Schubert::Neither);
        let lines = pencil_vertex_lines(&pt(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(lines.len(), 3);
        for (i, l) in lines.iter().enumerate() {
            assert_eq!(classify_flag(l, 1e-12), FlagClass::ThroughVertex(i));
        }
    }

    #[test]
    fn commuting_pair_has_no_vertical_bracket() {
        let g = distribution_generators(&make_default_integrals());
        let f = FlagAsPair::from_flag(&reference_flag());
        for h in [1e-1, 1e-2, 1e-3] {
            assert!(pair_frobenius_residual(&g[0], &g[1], &g, &f, h).unwrap() < 1e-8);
        }
    }
}
