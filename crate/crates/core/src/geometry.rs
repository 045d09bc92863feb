//! Projective points, the flag hypersurface and its deformations, product
//! charts, and the Fubini-Study structure on `CP^2 x CP^2`.
//!
//! Tangent vectors are stored as horizontal representatives: at a point with
//! unit canonical representatives `(x, y)`, a tangent vector is a pair
//! `(xi, eta)` with `x^dagger xi = 0` and `y^dagger eta = 0`. In this picture
//! the Fubini-Study metric (normalised so that a line has area `pi`) is
//! `Re <u, v>` and the symplectic form is `Im <u, v>`, where `<,>` is the
//! Hermitian product summed over both factors.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{Pair, CVec3, C64, ONE, ZERO};
use crate::math::sqrt;

/// Horizontal representative of a tangent vector of `CP^2 x CP^2`.
pub type TangentVector = Pair;

/// Entries below this modulus (for unit vectors) are skipped when fixing the
/// phase of a canonical representative.
const PHASE_EPS: f64 = 1e-13;

/// A point of `CP^1` or `CP^2` in canonical form: unit norm and first
/// non-negligible entry real positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint {
    coords: CVec3,
    dim: u8,
}

impl ProjectivePoint {
    /// Canonical representative of the class of `raw` (length 2 or 3).
    pub fn normalize(raw: &[C64]) -> Result<Self> {
        if raw.len() != 2 && raw.len() != 3 {
            return Err(Error::InvalidParameter("homogeneous vector must have length 2 or 3"));
        }
        let mut v = CVec3::ZERO;
        for (k, z) in raw.iter().enumerate() {
            v.0[k] = *z;
        }
        let mut p = Self::from_vec(v)?;
        p.dim = raw.len() as u8;
        Ok(p)
    }

    /// Canonical representative of a point of `CP^2`.
    pub fn from_vec(v: CVec3) -> Result<Self> {
        let n = v.norm();
        if n.is_nan() || n < 1e-14 || !v.is_finite() {
            return Err(Error::ZeroVector(n));
        }
        Ok(ProjectivePoint { coords: canonical_unit(v.scale_re(1.0 / n)), dim: 3 })
    }

    pub fn from_real(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_vec(CVec3::real(a, b, c))
    }

    pub fn basis(i: usize) -> Self {
        ProjectivePoint { coords: CVec3::basis(i), dim: 3 }
    }

    /// The unit canonical representative.
    #[inline]
    pub fn coords(&self) -> CVec3 {
        self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn get(&self, i: usize) -> C64 {
        self.coords.0[i]
    }

    /// `min_phi |a - e^{i phi} b|` over unit representatives. Computed from
    /// the aligned difference, so it stays accurate for nearby points.
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        aligned_distance(&self.coords, &other.coords)
    }

    pub fn approx_eq(&self, other: &ProjectivePoint, tol: f64) -> bool {
        self.distance(other) < tol
    }
}

/// `min_phi |a - e^{i phi} b|` for unit vectors `a`, `b`.
pub fn aligned_distance(a: &CVec3, b: &CVec3) -> f64 {
    let h = b.hdot(a);
    let n = h.norm();
    if n < 1e-300 {
        return (*a - *b).norm();
    }
    (*a - b.scale(h / n)).norm()
}

/// Rephases a unit vector so that its first non-negligible entry is real positive.
pub fn canonical_unit(v: CVec3) -> CVec3 {
    for k in 0..3 {
        let a = v.0[k].norm();
        if a > PHASE_EPS {
            let ph = v.0[k].conj() / a;
            return v.scale(ph);
        }
    }
    v
}

/// A point of `CP^2 x CP^2` without the hypersurface constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint {
    pub x: ProjectivePoint,
    pub y: ProjectivePoint,
}

impl AmbientPoint {
    pub fn new(x: ProjectivePoint, y: ProjectivePoint) -> Self {
        AmbientPoint { x, y }
    }

    pub fn from_vecs(x: CVec3, y: CVec3) -> Result<Self> {
        Ok(AmbientPoint { x: ProjectivePoint::from_vec(x)?, y: ProjectivePoint::from_vec(y)? })
    }

    pub fn reps(&self) -> Pair {
        Pair::new(self.x.coords(), self.y.coords())
    }

    /// Product chordal distance.
    pub fn distance(&self, other: &AmbientPoint) -> f64 {
        let a = self.x.distance(&other.x);
        let b = self.y.distance(&other.y);
        sqrt(a * a + b * b)
    }
}

/// The hypersurface `sum q_k x_k y_k = 0`. `q = (1, 1, 1)` is the flag
/// variety; `q = (t, 1, 1)` is the member `F_t` of the toric degeneration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surface {
    pub q: [C64; 3],
}

impl Surface {
    pub fn flag() -> Self {
        Surface { q: [ONE; 3] }
    }

    pub fn deformed(t: C64) -> Self {
        Surface { q: [t, ONE, ONE] }
    }

    pub fn qvec(&self) -> CVec3 {
        CVec3(self.q)
    }

    /// `sum q_k x_k y_k` on the given representatives.
    pub fn pairing(&self, x: &CVec3, y: &CVec3) -> C64 {
        (0..3).map(|k| self.q[k] * x.0[k] * y.0[k]).sum()
    }

    /// Normalised residual `|sum q_k x_k y_k| / (|x| |y|)`.
    pub fn residual(&self, x: &CVec3, y: &CVec3) -> f64 {
        self.pairing(x, y).norm() / (x.norm() * y.norm())
    }

    /// Conjugate gradient `(conj(q y), conj(q x))` of the defining equation.
    pub fn conj_gradient(&self, x: &CVec3, y: &CVec3) -> Pair {
        let q = self.qvec();
        Pair::new(q.hadamard(y).conj(), q.hadamard(x).conj())
    }

    /// Orthogonal projection of a horizontal vector at unit reps `(x, y)` of a
    /// surface point onto the tangent space of the surface.
    pub fn project_tangent(&self, x: &CVec3, y: &CVec3, v: &Pair) -> Pair {
        let h = horizontal(x, y, v);
        let n = horizontal(x, y, &self.conj_gradient(x, y));
        let nn = n.norm_sqr();
        if nn < 1e-300 {
            return h;
        }
        h - n.scale(n.hdot(&h) / nn)
    }

    /// Newton projection of `(x, y)` onto the surface along the normal direction.
    pub fn project(&self, x: &CVec3, y: &CVec3, tol: &Tolerances) -> Result<FlagPoint> {
        let mut x = x.normalized();
        let mut y = y.normalized();
        let target = tol.flag_tol.min(1e-14);
        let mut res = self.residual(&x, &y);
        for _ in 0..50 {
            if res <= target {
                return FlagPoint::from_unchecked(x, y);
            }
            let d = horizontal(&x, &y, &self.conj_gradient(&x, &y));
            let dd = d.norm_sqr();
            if dd < 1e-300 {
                break;
            }
            let s = -self.pairing(&x, &y) / dd;
            x = (x + d.x.scale(s)).normalized();
            y = (y + d.y.scale(s)).normalized();
            let prev = res;
            res = self.residual(&x, &y);
            if res < tol.flag_tol && res >= prev * 0.5 {
                return FlagPoint::from_unchecked(x, y);
            }
        }
        if res < tol.flag_tol {
            return FlagPoint::from_unchecked(x, y);
        }
        Err(Error::NoConvergence { what: "projection to the hypersurface", iterations: 50, residual: res })
    }
}

/// Horizontal part of `v` at the unit representatives `(x, y)`.
#[inline]
pub fn horizontal(x: &CVec3, y: &CVec3, v: &Pair) -> Pair {
    Pair::new(v.x.horizontal(x), v.y.horizontal(y))
}

/// A point of the flag variety (or of another surface of the family), stored
/// as canonical unit representatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlagPoint {
    x: ProjectivePoint,
    y: ProjectivePoint,
}

impl FlagPoint {
    /// Checked constructor for a point of `F^3`.
    pub fn new(x: ProjectivePoint, y: ProjectivePoint, tol: f64) -> Result<Self> {
        Self::on_surface(x, y, &Surface::flag(), tol)
    }

    /// Checked constructor for a point of an arbitrary member of the family.
    pub fn on_surface(x: ProjectivePoint, y: ProjectivePoint, s: &Surface, tol: f64) -> Result<Self> {
        let r = s.residual(&x.coords(), &y.coords());
        if r < tol {
            Ok(FlagPoint { x, y })
        } else {
            Err(Error::NoConvergence { what: "hypersurface membership", iterations: 0, residual: r })
        }
    }

    /// Builds a flag from raw vectors, checking membership in `F^3`.
    pub fn from_vecs(x: CVec3, y: CVec3, tol: f64) -> Result<Self> {
        Self::new(ProjectivePoint::from_vec(x)?, ProjectivePoint::from_vec(y)?, tol)
    }

    pub(crate) fn from_unchecked(x: CVec3, y: CVec3) -> Result<Self> {
        Ok(FlagPoint { x: ProjectivePoint::from_vec(x)?, y: ProjectivePoint::from_vec(y)? })
    }

    #[inline]
    pub fn x(&self) -> &ProjectivePoint {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &ProjectivePoint {
        &self.y
    }

    /// Unit canonical representatives as a pair.
    #[inline]
    pub fn reps(&self) -> Pair {
        Pair::new(self.x.coords(), self.y.coords())
    }

    pub fn ambient(&self) -> AmbientPoint {
        AmbientPoint::new(self.x, self.y)
    }

    pub fn distance(&self, other: &FlagPoint) -> f64 {
        self.ambient().distance(&other.ambient())
    }
}

/// `|sum x_i y_i| / (|x| |y|)`.
pub fn flag_residual(x: &ProjectivePoint, y: &ProjectivePoint) -> f64 {
    Surface::flag().residual(&x.coords(), &y.coords())
}

/// Projects a nearby pair onto `F^3`.
pub fn project_to_flag(x: &ProjectivePoint, y: &ProjectivePoint, tol: &Tolerances) -> Result<FlagPoint> {
    Surface::flag().project(&x.coords(), &y.coords(), tol)
}

/// Symplectic form `Im <u, v>` on horizontal representatives.
#[inline]
pub fn omega(u: &TangentVector, v: &TangentVector) -> f64 {
    u.hdot(v).im
}

/// Riemannian metric `Re <u, v>` on horizontal representatives.
#[inline]
pub fn metric(u: &TangentVector, v: &TangentVector) -> f64 {
    u.hdot(v).re
}

/// Moves from `p` along `v` (first order) and re-projects onto the surface.
pub fn exp_map(p: &FlagPoint, v: &TangentVector, s: &Surface, tol: &Tolerances) -> Result<FlagPoint> {
    let r = p.reps();
    s.project(&(r.x + v.x), &(r.y + v.y), tol)
}

/// Tangent vector at `base` pointing to the nearby point `q`: the horizontal
/// representative of `q` rescaled so that `base^dagger q = 1`. Agrees with
/// the inverse of [`exp_map`] to first order.
pub fn tangent_between(base: &Pair, q: &Pair) -> TangentVector {
    let dx = q.x.scale(ONE / base.x.hdot(&q.x)) - base.x;
    let dy = q.y.scale(ONE / base.y.hdot(&q.y)) - base.y;
    Pair::new(dx, dy)
}

/// Index of a product chart: `x_i = 1`, `y_j = 1`, with `y_k` eliminated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChartId {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl ChartId {
    pub fn new(i: usize, j: usize, k: usize) -> Result<Self> {
        if i > 2 || j > 2 || k > 2 || j == k {
            return Err(Error::InvalidParameter("chart indices must be < 3 with j != k"));
        }
        Ok(ChartId { i, j, k })
    }

    /// Free x indices `(a, b)` (ascending, both different from `i`).
    pub fn x_free(&self) -> (usize, usize) {
        others(self.i)
    }

    /// The free y index `c` (neither `j` nor `k`).
    pub fn y_free(&self) -> usize {
        3 - self.j - self.k
    }

    /// All 18 admissible charts.
    pub fn all() -> impl Iterator<Item = ChartId> {
        (0..3).flat_map(|i| (0..3).flat_map(move |j| (0..3).filter(move |&k| k != j).map(move |k| ChartId { i, j, k })))
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// A product chart at a surface point together with the pulled-back
/// symplectic form in the real coordinates `(Re z0, Im z0, ..., Re z2, Im z2)`,
/// where `z = (x_a, x_b, y_c)` in affine normalisation.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartFrame {
    pub chart_id: ChartId,
    pub coords: [C64; 3],
    pub omega: [[f64; 6]; 6],
    surface: Surface,
    point: FlagPoint,
}

impl ChartFrame {
    /// Chart with the dominant coordinates: largest `|x_i|`, largest `|y_j|`,
    /// then the eliminated `y_k` maximising `|q_k x_k|`.
    pub fn at(p: &FlagPoint, s: &Surface) -> Self {
        let x = p.x().coords();
        let y = p.y().coords();
        let i = argmax(|m| x.0[m].norm());
        let j = argmax(|m| y.0[m].norm());
        let k = argmax(|m| if m == j { -1.0 } else { (s.q[m] * x.0[m]).norm() });
        Self::with_chart(p, s, ChartId { i, j, k }).expect("dominant chart is always admissible")
    }

    /// Frame in a prescribed chart.
    pub fn with_chart(p: &FlagPoint, s: &Surface, id: ChartId) -> Result<Self> {
        let x = p.x().coords();
        let y = p.y().coords();
        if x.0[id.i].norm() < 1e-12 || y.0[id.j].norm() < 1e-12 {
            return Err(Error::DegenerateChart(x.0[id.i].norm().min(y.0[id.j].norm())));
        }
        let dq = (s.q[id.k] * x.0[id.k] / x.0[id.i]).norm();
        if dq < 1e-10 {
            return Err(Error::DegenerateChart(dq));
        }
        let (a, b) = id.x_free();
        let c = id.y_free();
        let coords = [x.0[a] / x.0[id.i], x.0[b] / x.0[id.i], y.0[c] / y.0[id.j]];
        let mut f = ChartFrame { chart_id: id, coords, omega: [[0.0; 6]; 6], surface: *s, point: *p };
        let basis: [TangentVector; 6] = core::array::from_fn(|r| f.basis_vector(r));
        for r in 0..6 {
            for t in 0..6 {
                f.omega[r][t] = if r == t { 0.0 } else { omega(&basis[r], &basis[t]) };
            }
        }
        for r in 0..6 {
            for t in (r + 1)..6 {
                let v = 0.5 * (f.omega[r][t] - f.omega[t][r]);
                f.omega[r][t] = v;
                f.omega[t][r] = -v;
            }
        }
        Ok(f)
    }

    pub fn point(&self) -> &FlagPoint {
        &self.point
    }

    /// Affine tangent `(dX, dY)` of a chart tangent with complex components `dz`.
    pub fn affine_tangent(&self, dz: &[C64; 3]) -> (CVec3, CVec3) {
        let id = self.chart_id;
        let (a, b) = id.x_free();
        let c = id.y_free();
        let x = self.point.x().coords();
        let y = self.point.y().coords();
        let xa = x.scale(ONE / x.0[id.i]);
        let ya = y.scale(ONE / y.0[id.j]);
        let mut dx = CVec3::ZERO;
        dx.0[a] = dz[0];
        dx.0[b] = dz[1];
        let mut dy = CVec3::ZERO;
        dy.0[c] = dz[2];
        let q = &self.surface.q;
        let mut num = ZERO;
        for m in 0..3 {
            num += q[m] * ya.0[m] * dx.0[m];
            if m != id.k {
                num += q[m] * xa.0[m] * dy.0[m];
            }
        }
        dy.0[id.k] = -num / (q[id.k] * xa.0[id.k]);
        (dx, dy)
    }

    /// Horizontal representative of the chart tangent with components `dz`.
    pub fn to_tangent(&self, dz: &[C64; 3]) -> TangentVector {
        let (dx, dy) = self.affine_tangent(dz);
        let x = self.point.x().coords();
        let y = self.point.y().coords();
        let v = Pair::new(dx.scale(x.0[self.chart_id.i]), dy.scale(y.0[self.chart_id.j]));
        horizontal(&x, &y, &v)
    }

    /// Complex chart components of a tangent vector.
    pub fn from_tangent(&self, v: &TangentVector) -> [C64; 3] {
        let id = self.chart_id;
        let (a, b) = id.x_free();
        let c = id.y_free();
        let x = self.point.x().coords();
        let y = self.point.y().coords();
        let xi = x.0[id.i];
        let yj = y.0[id.j];
        [
            (v.x.0[a] * xi - x.0[a] * v.x.0[id.i]) / (xi * xi),
            (v.x.0[b] * xi - x.0[b] * v.x.0[id.i]) / (xi * xi),
            (v.y.0[c] * yj - y.0[c] * v.y.0[id.j]) / (yj * yj),
        ]
    }

    /// Real chart components.
    pub fn real_components(&self, v: &TangentVector) -> [f64; 6] {
        let z = self.from_tangent(v);
        [z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im]
    }

    /// Tangent vector of the `r`-th real coordinate direction.
    pub fn basis_vector(&self, r: usize) -> TangentVector {
        let mut dz = [ZERO; 3];
        dz[r / 2] = if r.is_multiple_of(2) { ONE } else { crate::linalg::I };
        self.to_tangent(&dz)
    }

    /// `omega` evaluated through the chart matrix.
    pub fn omega_on(&self, u: &[f64; 6], v: &[f64; 6]) -> f64 {
        let mut acc = 0.0;
        for r in 0..6 {
            for t in 0..6 {
                acc += u[r] * self.omega[r][t] * v[t];
            }
        }
        acc
    }
}

/// Ambient point with the given affine chart coordinates.
pub fn chart_point(id: ChartId, s: &Surface, z: &[C64; 3]) -> Result<AmbientPoint> {
    let (a, b) = id.x_free();
    let c = id.y_free();
    let mut x = CVec3::ZERO;
    x.0[id.i] = ONE;
    x.0[a] = z[0];
    x.0[b] = z[1];
    let mut y = CVec3::ZERO;
    y.0[id.j] = ONE;
    y.0[c] = z[2];
    let denom = s.q[id.k] * x.0[id.k];
    if denom.norm() < 1e-14 {
        return Err(Error::DegenerateChart(denom.norm()));
    }
    let mut num = ZERO;
    for m in 0..3 {
        if m != id.k {
            num += s.q[m] * x.0[m] * y.0[m];
        }
    }
    y.0[id.k] = -num / denom;
    AmbientPoint::from_vecs(x, y)
}

fn argmax(f: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    for m in 1..3 {
        if f(m) > f(best) {
            best = m;
        }
    }
    best
}

/// Primitive cube root of unity `e^{2 pi i / 3}`.
pub fn omega3() -> C64 {
    crate::linalg::cis(crate::math::TAU / 3.0)
}

/// The flag `x = [1:1:1]`, `y = [1:w:w^2]` used as a reference point.
pub fn reference_flag() -> FlagPoint {
    let w = omega3();
    FlagPoint::from_vecs(CVec3([ONE; 3]), CVec3([ONE, w, w * w]), 1e-12).expect("reference flag lies on F^3")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn normalize_examples() {
        let p = ProjectivePoint::normalize(&[ZERO, c(0.0, 2.0), c(0.0, -2.0)]).unwrap();
        let q = ProjectivePoint::normalize(&[ZERO, ONE, -ONE]).unwrap();
        assert!((p.coords() - q.coords()).norm() < 1e-12);
        let e = ProjectivePoint::normalize(&[ONE, ZERO, ZERO]).unwrap();
        assert_eq!(e.coords(), CVec3::basis(0));
        let r = ProjectivePoint::normalize(&[c(3.0, 0.0), c(4.0, 0.0), ZERO]).unwrap();
        assert!((r.coords() - CVec3::real(0.6, 0.8, 0.0)).norm() < 1e-15);
        assert!(matches!(ProjectivePoint::normalize(&[ZERO, ZERO, ZERO]), Err(Error::ZeroVector(_))));
        assert_eq!(ProjectivePoint::normalize(&[ONE, ONE]).unwrap().dim(), 2);
    }

    #[test]
    fn residual_examples() {
        let e0 = ProjectivePoint::basis(0);
        let e1 = ProjectivePoint::basis(1);
        assert_eq!(flag_residual(&e0, &e1), 0.0);
        let u = ProjectivePoint::from_real(1.0, 1.0, 1.0).unwrap();
        assert!((flag_residual(&u, &u) - 1.0).abs() < 1e-15);
        let r = reference_flag();
        assert!(flag_residual(r.x(), r.y()) < 1e-15);
    }

    #[test]
    fn projection_repairs_perturbation() {
        let r = reference_flag();
        let y = r.y().coords() + CVec3::real(1e-4, 0.0, 0.0);
        let p = Surface::flag().project(&r.x().coords(), &y, &Tolerances::default()).unwrap();
        assert!(flag_residual(p.x(), p.y()) < 1e-10);
        let again = project_to_flag(p.x(), p.y(), &Tolerances::default()).unwrap();
        assert!(again.distance(&p) < 1e-12);
    }

    #[test]
    fn chart_dominance_and_antisymmetry() {
        let p = FlagPoint::from_vecs(CVec3::real(1.0, 0.1, 0.05), CVec3::real(0.05, 1.0, -2.0), 1e-9);
        let p = match p {
            Ok(p) => p,
            Err(_) => Surface::flag()
                .project(&CVec3::real(1.0, 0.1, 0.05), &CVec3::real(0.05, 1.0, -2.0), &Tolerances::default())
                .unwrap(),
        };
        let f = ChartFrame::at(&p, &Surface::flag());
        assert_eq!(f.chart_id.i, 0);
        for r in 0..6 {
            for t in 0..6 {
                assert_eq!(f.omega[r][t], -f.omega[t][r]);
            }
        }
    }

    #[test]
    fn chart_round_trip_of_tangents() {
        let p = reference_flag();
        let f = ChartFrame::at(&p, &Surface::flag());
        let dz = [c(0.3, -0.1), c(-0.2, 0.5), c(0.7, 0.2)];
        let v = f.to_tangent(&dz);
        let back = f.from_tangent(&v);
        for k in 0..3 {
            assert!((back[k] - dz[k]).norm() < 1e-13);
        }
        let s = Surface::flag();
        let proj = s.project_tangent(&p.x().coords(), &p.y().coords(), &v);
        assert!((proj - v).norm() < 1e-13);
    }
}
