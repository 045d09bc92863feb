//! The fibration map `psi(x, y) = [x0 y0 : x1 y1 : x2 y2]`, the base set, the
//! classification of fibres, the symplectic connection and the degeneration
//! simplex of the two integrals.

use crate::config::Tolerances;
use crate::dynamics::{surface_field, Hamiltonian, IntegralPair};
use crate::error::{Error, Result};
use crate::geometry::{metric, omega, ChartFrame, FlagPoint, ProjectivePoint, Surface, TangentVector};
use crate::linalg::{singular_values, solve_real, CVec3, Pair, C64, ONE};
use crate::math::sqrt;
use alloc::vec;
use alloc::vec::Vec;

/// `x * y` componentwise at the representatives of `p`.
pub fn psi_raw(p: &Pair) -> CVec3 {
    p.x.hadamard(&p.y)
}

/// `psi(p)` as a point of `CP^2_w`.
pub fn psi(p: &FlagPoint) -> Result<ProjectivePoint> {
    let w = psi_raw(&p.reps());
    let m = w.max_abs();
    if m < 1e-13 {
        return Err(Error::OnBaseSet(m));
    }
    ProjectivePoint::from_vec(w)
}

/// The two families of lines forming the base set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LineKind {
    /// `x_i = x_j = y_k = 0`: `x = e_k`, `y` on the opposite edge.
    Xxy,
    /// `x_i = y_j = y_k = 0`: `y = e_i`, `x` on the opposite edge.
    Xyy,
}

/// One of the six lines of the base set, with the indices of its defining
/// equations `(i, j, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BaseSetLine {
    pub kind: LineKind,
    pub indices: (usize, usize, usize),
}

impl BaseSetLine {
    /// The six lines, ordered by kind and then by the distinguished index.
    pub fn all() -> [BaseSetLine; 6] {
        let mut out = [BaseSetLine { kind: LineKind::Xxy, indices: (1, 2, 0) }; 6];
        for k in 0..3 {
            let (i, j) = others(k);
            out[k] = BaseSetLine { kind: LineKind::Xxy, indices: (i, j, k) };
            out[3 + k] = BaseSetLine { kind: LineKind::Xyy, indices: (k, i, j) };
        }
        out
    }

    /// Root-sum-square of the three defining coordinates (canonical scaling).
    pub fn defining_norm(&self, p: &Pair) -> f64 {
        let (i, j, k) = self.indices;
        match self.kind {
            LineKind::Xxy => sqrt(p.x.0[i].norm_sqr() + p.x.0[j].norm_sqr() + p.y.0[k].norm_sqr()),
            LineKind::Xyy => sqrt(p.x.0[i].norm_sqr() + p.y.0[j].norm_sqr() + p.y.0[k].norm_sqr()),
        }
    }
}

fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// First base-set line containing `p` within `tol`.
pub fn in_base_set(p: &FlagPoint, tol: f64) -> Option<BaseSetLine> {
    let r = p.reps();
    BaseSetLine::all().into_iter().find(|l| l.defining_norm(&r) < tol)
}

/// Distance to the base set: minimum over the six lines of the defining norm.
pub fn distance_to_base_set(p: &Pair) -> f64 {
    BaseSetLine::all().iter().map(|l| l.defining_norm(p)).fold(f64::INFINITY, f64::min)
}

/// Distance to the diagonal line `x_i = y_i = 0`.
pub fn diagonal_line_norm(p: &Pair, i: usize) -> f64 {
    sqrt(p.x.0[i].norm_sqr() + p.y.0[i].norm_sqr())
}

/// Distance to the union of the three diagonal lines.
pub fn distance_to_sing(p: &Pair) -> f64 {
    (0..3).map(|i| diagonal_line_norm(p, i)).fold(f64::INFINITY, f64::min)
}

/// Index of a diagonal line containing `p`, if any.
pub fn on_diagonal_line(p: &FlagPoint, tol: f64) -> Option<usize> {
    let r = p.reps();
    (0..3).find(|&i| diagonal_line_norm(&r, i) < tol)
}

/// Type of the fibre of `psi` over a point of `CP^2_w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiberClass {
    /// All `w_i != 0`: a del Pezzo surface of degree 6.
    Generic,
    /// Only `w_i = 0`: the union of two del Pezzo surfaces.
    OneZero(usize),
    /// Only `w_i != 0`: two projective planes and two quadrics.
    TwoZero(usize),
}

impl FiberClass {
    pub fn description(&self) -> &'static str {
        match self {
            FiberClass::Generic => "del Pezzo surface (CP^2 blown up at three points)",
            FiberClass::OneZero(_) => "union of two del Pezzo surfaces",
            FiberClass::TwoZero(_) => "two projective planes and two quadrics",
        }
    }

    pub fn is_singular(&self) -> bool {
        !matches!(self, FiberClass::Generic)
    }
}

/// Classifies by the zero pattern of the canonical coordinates.
pub fn classify_fiber_point(w: &ProjectivePoint) -> FiberClass {
    classify_fiber_point_with(w, 1e-10)
}

pub fn classify_fiber_point_with(w: &ProjectivePoint, tol: f64) -> FiberClass {
    let z: [bool; 3] = core::array::from_fn(|k| w.get(k).norm() < tol);
    match z.iter().filter(|b| **b).count() {
        0 => FiberClass::Generic,
        1 => FiberClass::OneZero(z.iter().position(|b| *b).unwrap_or(0)),
        _ => FiberClass::TwoZero(z.iter().position(|b| !*b).unwrap_or(0)),
    }
}

/// A real function on `CP^2_w` (typically restricted to a line): value and
/// conjugate gradient of its degree-zero extension at an arbitrary nonzero
/// representative.
pub trait BaseFunction {
    fn value(&self, w: &CVec3) -> f64;
    fn grad(&self, w: &CVec3) -> CVec3;
}

impl BaseFunction for crate::dynamics::SymbolFunction {
    fn value(&self, w: &CVec3) -> f64 {
        self.eval_single(w)
    }

    fn grad(&self, w: &CVec3) -> CVec3 {
        let n2 = w.norm_sqr();
        (self.matrix_x.apply(w) - w.scale_re(self.eval_single(w))).scale_re(1.0 / n2)
    }
}

/// `h o psi` as a Hamiltonian on `CP^2 x CP^2`.
#[derive(Clone, Copy, Debug)]
pub struct Pullback<'a, B: BaseFunction + ?Sized>(pub &'a B);

impl<B: BaseFunction + ?Sized> Hamiltonian for Pullback<'_, B> {
    fn value(&self, _t: f64, p: &Pair) -> f64 {
        self.0.value(&psi_raw(p))
    }

    fn grad(&self, _t: f64, p: &Pair) -> Pair {
        let g = self.0.grad(&psi_raw(p));
        Pair::new(g.hadamard(&p.y.conj()), g.hadamard(&p.x.conj()))
    }
}

/// Unit tangent direction of the line `{ n . w = 0 }` at the unit vector `w`.
pub fn line_tangent(n: &CVec3, w: &CVec3) -> CVec3 {
    w.conj().cross(n).normalized()
}

/// Hamiltonian field of `h` restricted to the line `{ n . w = 0 }`, at the
/// canonical representative of `w`.
pub fn base_line_field<B: BaseFunction + ?Sized>(h: &B, n: &CVec3, w: &ProjectivePoint) -> CVec3 {
    let wc = w.coords();
    let t = line_tangent(n, &wc);
    let g = h.grad(&wc);
    t.scale(t.hdot(&g) * C64::new(0.0, -2.0))
}

/// Differential of `psi` at unit reps, expressed at the canonical
/// representative of `psi(p)`.
pub fn d_psi_raw(p: &Pair, v: &TangentVector) -> Result<CVec3> {
    let w = psi_raw(p);
    let n = w.norm();
    if n < 1e-13 {
        return Err(Error::OnBaseSet(n));
    }
    let wh = w.scale_re(1.0 / n);
    let wc = ProjectivePoint::from_vec(w)?.coords();
    let ph = wh.hdot(&wc);
    let d = (v.x.hadamard(&p.y) + p.x.hadamard(&v.y)).horizontal(&wh).scale_re(1.0 / n);
    Ok(d.scale(ph))
}

/// `d psi(v)` at the flag `p`.
pub fn d_psi(p: &FlagPoint, v: &TangentVector) -> Result<CVec3> {
    d_psi_raw(&p.reps(), v)
}

/// A lift of a base tangent vector to the symplectic orthogonal complement
/// of the fibre.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalLift {
    pub base_vector: CVec3,
    pub lifted: TangentVector,
    /// Ratio between the lift of `X_h` and `X_{h o psi}`; independent of `h`.
    pub tau: f64,
}

/// The pseudotoric structure: the surface, its two integrals and the
/// tolerances used for rank decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Structure {
    pub surface: Surface,
    pub integrals: IntegralPair,
    pub tol: Tolerances,
}

impl Structure {
    pub fn new(surface: Surface, integrals: IntegralPair, tol: Tolerances) -> Self {
        Structure { surface, integrals, tol }
    }

    /// Default integrals on `F^3`.
    pub fn flag_default() -> Self {
        Structure::new(Surface::flag(), crate::dynamics::make_default_integrals(), Tolerances::default())
    }

    /// Normal vector of the base line `{ sum q_k w_k = 0 }`.
    pub fn base_normal(&self) -> CVec3 {
        self.surface.qvec()
    }

    pub fn x1(&self, p: &FlagPoint) -> TangentVector {
        surface_field(&self.integrals.f1, &self.surface, 0.0, &p.reps())
    }

    pub fn x2(&self, p: &FlagPoint) -> TangentVector {
        surface_field(&self.integrals.f2, &self.surface, 0.0, &p.reps())
    }

    /// `(X_1, X_2, I X_1, I X_2)`, which spans `ker d psi` off `B` and `Sing`.
    pub fn fibre_basis(&self, p: &FlagPoint) -> [TangentVector; 4] {
        let a = self.x1(p);
        let b = self.x2(p);
        [a, b, a.times_i(), b.times_i()]
    }

    /// Numerical rank of `(X_1, X_2)`.
    pub fn simplex_rank(&self, p: &FlagPoint) -> usize {
        let cols = vec![self.x1(p).to_real().to_vec(), self.x2(p).to_real().to_vec()];
        singular_values(&cols).iter().filter(|s| **s > self.tol.rank_tol).count()
    }

    /// `a_T`: the surface-tangent vector with `<t, d psi(v)> = <a_T, v>`, `t`
    /// the unit tangent of the base line at `psi(p)`.
    pub fn connection_covector(&self, p: &FlagPoint) -> Result<(TangentVector, CVec3)> {
        let r = p.reps();
        let w = psi_raw(&r);
        let n = w.norm();
        if n < 1e-13 {
            return Err(Error::OnBaseSet(n));
        }
        let wc = ProjectivePoint::from_vec(w)?.coords();
        let t = line_tangent(&self.base_normal(), &wc);
        let wh = w.scale_re(1.0 / n);
        let th = t.scale(wc.hdot(&wh));
        let a = Pair::new(th.hadamard(&r.y.conj()), th.hadamard(&r.x.conj())).scale_re(1.0 / n);
        Ok((self.surface.project_tangent(&r.x, &r.y, &a), t))
    }

    /// Closed-form horizontal lift `u_t a_T / |a_T|^2`.
    pub fn lift_closed_form(&self, p: &FlagPoint, u: &CVec3) -> Result<TangentVector> {
        let (a, t) = self.connection_covector(p)?;
        let aa = a.norm_sqr();
        if aa < self.tol.rank_tol * self.tol.rank_tol {
            return Err(Error::SingularFiberPoint(sqrt(aa)));
        }
        Ok(a.scale(t.hdot(u) / aa))
    }

    /// Horizontal lift solved as a real linear system in the product chart:
    /// `d psi(v) = u` and `omega(v, k) = 0` for the fibre basis.
    pub fn horizontal_lift(&self, p: &FlagPoint, u: &CVec3) -> Result<HorizontalLift> {
        let kernel = self.fibre_basis(p);
        self.horizontal_lift_with(p, u, &kernel)
    }

    /// As [`Structure::horizontal_lift`] with a caller-supplied spanning set
    /// of the fibre tangent space.
    pub fn horizontal_lift_with(&self, p: &FlagPoint, u: &CVec3, kernel: &[TangentVector]) -> Result<HorizontalLift> {
        let cols: Vec<Vec<f64>> = kernel.iter().map(|k| k.to_real().to_vec()).collect();
        let sv = singular_values(&cols);
        let smin = sv.first().copied().unwrap_or(0.0);
        let scale = sv.last().copied().unwrap_or(0.0).max(1e-300);
        if kernel.len() != 4 || smin < self.tol.rank_tol * scale.max(1.0) {
            return Err(Error::SingularFiberPoint(smin));
        }
        let (a, t) = self.connection_covector(p)?;
        let an = a.norm();
        if an < self.tol.rank_tol {
            return Err(Error::SingularFiberPoint(an));
        }
        let frame = ChartFrame::at(p, &self.surface);
        let basis: [TangentVector; 6] = core::array::from_fn(|r| frame.basis_vector(r));
        let r = p.reps();
        let mut rows = Vec::with_capacity(6);
        let mut rhs = Vec::with_capacity(6);
        let dpsi: Vec<C64> = basis
            .iter()
            .map(|b| d_psi_raw(&r, b).map(|d| t.hdot(&d)))
            .collect::<Result<Vec<_>>>()?;
        let ut = t.hdot(u);
        rows.push(dpsi.iter().map(|z| z.re).collect::<Vec<_>>());
        rhs.push(ut.re);
        rows.push(dpsi.iter().map(|z| z.im).collect::<Vec<_>>());
        rhs.push(ut.im);
        for k in kernel {
            rows.push(basis.iter().map(|b| omega(b, k)).collect());
            rhs.push(0.0);
        }
        let c = solve_real(rows, rhs).ok_or(Error::SingularFiberPoint(smin))?;
        let mut v = Pair::ZERO;
        for (cr, b) in c.iter().zip(basis.iter()) {
            v += b.scale_re(*cr);
        }
        Ok(HorizontalLift { base_vector: *u, lifted: v, tau: 1.0 / (an * an) })
    }

    /// Compares the lift of `X_h` with `X_{h o psi}`: returns the least-squares
    /// factor `tau` and the relative collinearity residual.
    pub fn compatibility_check<B: BaseFunction + ?Sized>(&self, p: &FlagPoint, h: &B) -> Result<(f64, f64)> {
        let w = psi(p)?;
        let xh = base_line_field(h, &self.base_normal(), &w);
        let lift = self.horizontal_lift(p, &xh)?;
        let x = surface_field(&Pullback(h), &self.surface, 0.0, &p.reps());
        let xx = x.norm_sqr();
        if xx < 1e-300 {
            return Err(Error::SingularFiberPoint(0.0));
        }
        let tau = metric(&lift.lifted, &x) / xx;
        let res = (lift.lifted - x.scale_re(tau)).norm() / lift.lifted.norm().max(1e-300);
        Ok((tau, res))
    }
}

/// The points of the base line `{ n . w = 0 }` over which `psi` has singular
/// fibres: the intersections with the coordinate lines, without repetition.
pub fn singular_base_points(n: &CVec3) -> Vec<ProjectivePoint> {
    let mut out: Vec<ProjectivePoint> = Vec::new();
    for i in 0..3 {
        if let Ok(p) = ProjectivePoint::from_vec(CVec3::basis(i).cross(n)) {
            if !out.iter().any(|q| q.distance(&p) < 1e-9) {
                out.push(p);
            }
        }
    }
    out
}

/// `true` when `c` lies on the line spanned by the two points up to `tol`.
pub fn on_line(n: &CVec3, w: &CVec3, tol: f64) -> bool {
    n.dot(w).norm() / (n.norm() * w.norm()) < tol
}

/// Identity check used by tests: the line `{sum w = 0}` normal.
pub fn flag_base_normal() -> CVec3 {
    CVec3([ONE; 3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{omega3, reference_flag};

    #[test]
    fn psi_examples() {
        let w = psi(&reference_flag()).unwrap();
        let o = omega3();
        let expect = ProjectivePoint::from_vec(CVec3([ONE, o, o * o])).unwrap();
        assert!(w.distance(&expect) < 1e-12);
        let v = FlagPoint::new(ProjectivePoint::basis(0), ProjectivePoint::basis(2), 1e-12).unwrap();
        assert!(matches!(psi(&v), Err(Error::OnBaseSet(_))));
        let p = FlagPoint::from_vecs(CVec3::real(1.0, 1.0, 0.0), CVec3::real(1.0, -1.0, 1.0), 1e-12).unwrap();
        let w = psi(&p).unwrap();
        assert!(w.distance(&ProjectivePoint::from_real(1.0, -1.0, 0.0).unwrap()) < 1e-12);
        assert_eq!(classify_fiber_point(&w), FiberClass::OneZero(2));
    }

    #[test]
    fn base_set_examples() {
        let p = FlagPoint::new(ProjectivePoint::basis(0), ProjectivePoint::basis(1), 1e-12).unwrap();
        let l = in_base_set(&p, 1e-9).unwrap();
        assert_eq!(l, BaseSetLine { kind: LineKind::Xxy, indices: (1, 2, 0) });
        assert!(in_base_set(&reference_flag(), 1e-3).is_none());
        let q = FlagPoint::new(ProjectivePoint::basis(1), ProjectivePoint::basis(2), 1e-12).unwrap();
        assert!(in_base_set(&q, 1e-9).is_some());
    }

    #[test]
    fn fiber_classes() {
        let o = omega3();
        let g = ProjectivePoint::from_vec(CVec3([ONE, o, o * o])).unwrap();
        assert_eq!(classify_fiber_point(&g), FiberClass::Generic);
        assert_eq!(classify_fiber_point(&ProjectivePoint::from_real(0.0, 1.0, -1.0).unwrap()), FiberClass::OneZero(0));
        assert_eq!(classify_fiber_point(&ProjectivePoint::basis(0)), FiberClass::TwoZero(0));
    }

    #[test]
    fn three_singular_points_on_the_flag_line() {
        let pts = singular_base_points(&flag_base_normal());
        assert_eq!(pts.len(), 3);
        let l0 = singular_base_points(&CVec3::real(0.0, 1.0, 1.0));
        assert_eq!(l0.len(), 2);
    }
}
