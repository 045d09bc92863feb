//! The boundary divisor `D` of the fibration, the residue form `theta_D` on
//! `F^3 - D` and the phase statistics of `theta_D` on the fibration frames.

use alloc::vec::Vec;

use crate::dynamics::{flow_field, flow_on, Hamiltonian};
use crate::error::{Error, Result};
use crate::fibration::{natural_frame, BaseMorseFunction, HeightMode, TorusFiber};
use crate::geometry::{exp_map, reference_flag, tangent_between, ChartFrame, ChartId, FlagPoint, ProjectivePoint, Surface, TangentVector};
use crate::linalg::{det3, CVec3, Pair, C64, ONE};
use crate::math::{atan2, ln, sqrt};
use crate::pseudotoric::{distance_to_sing, psi, psi_raw, Structure};

/// Linear functional on the base line vanishing exactly at `p`: a coordinate
/// functional when `p` has a zero entry, `n x p` otherwise.
pub fn point_functional(n: &CVec3, p: &ProjectivePoint) -> CVec3 {
    let pc = p.coords();
    for k in 0..3 {
        if pc.0[k].norm() < 1e-13 {
            return CVec3::basis(k);
        }
    }
    n.cross(&pc)
}

/// `D`: the two compactified fibres of `psi` over the critical points of `h`,
/// cut out by the product of two pulled-back linear functionals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryDivisor {
    pub critical_w_points: [ProjectivePoint; 2],
    pub factors: [CVec3; 2],
}

impl BoundaryDivisor {
    pub fn of_height(h: &BaseMorseFunction) -> Self {
        let pts = [h.max_point, h.min_point];
        BoundaryDivisor { critical_w_points: pts, factors: pts.map(|p| point_functional(&h.normal, &p)) }
    }

    /// Divisor with prescribed factors (used for controls).
    pub fn from_factors(critical_w_points: [ProjectivePoint; 2], factors: [CVec3; 2]) -> Self {
        BoundaryDivisor { critical_w_points, factors }
    }

    /// `x0 y0 * x1 y1`, the divisor of the default height.
    pub fn default_divisor() -> Self {
        Self::of_height(&crate::fibration::default_height())
    }

    /// Section value on arbitrary (not necessarily unit) representatives.
    pub fn section_raw(&self, x: &CVec3, y: &CVec3) -> C64 {
        let w = x.hadamard(y);
        self.factors[0].dot(&w) * self.factors[1].dot(&w)
    }

    /// Factor magnitudes on unit representatives.
    pub fn factor_norms(&self, p: &Pair) -> [f64; 2] {
        let w = psi_raw(p);
        [self.factors[0].dot(&w).norm() / self.factors[0].norm(), self.factors[1].dot(&w).norm() / self.factors[1].norm()]
    }
}

/// The defining section of `D` on the canonical unit representatives.
pub fn section_d(d: &BoundaryDivisor, p: &FlagPoint) -> C64 {
    let r = p.reps();
    d.section_raw(&r.x, &r.y)
}

/// `+1` or `-1`: sign of the permutation `(a, b, c)` of `(0, 1, 2)`.
fn perm_sign(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        _ => -1.0,
    }
}

/// `theta_D` as a Poincare residue in a product chart, with a gauge factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueForm {
    pub divisor: BoundaryDivisor,
    pub surface: Surface,
    /// Unit complex factor making the form real positive on the reference frame.
    pub gauge: C64,
    pub exclusion: f64,
}

impl ResidueForm {
    /// Form gauged at the reference flag.
    pub fn new(divisor: BoundaryDivisor, surface: Surface) -> Result<Self> {
        let mut f = ResidueForm { divisor, surface, gauge: ONE, exclusion: 1e-10 };
        let r = reference_flag();
        let frame = ChartFrame::at(&r, &surface);
        let basis: [TangentVector; 3] = core::array::from_fn(|m| frame.basis_vector(2 * m));
        let v = f.evaluate_in(&r, frame.chart_id, &basis[0], &basis[1], &basis[2])?;
        f.gauge = v.conj() / v.norm();
        Ok(f)
    }

    /// Ungauged value in the chart `id`.
    pub fn raw_in(&self, p: &FlagPoint, id: ChartId, u: &TangentVector, v: &TangentVector, w: &TangentVector) -> Result<C64> {
        let s = section_d(&self.divisor, p);
        if s.norm() < self.exclusion {
            return Err(Error::OnDivisor(s.norm()));
        }
        let frame = ChartFrame::with_chart(p, &self.surface, id)?;
        let x = p.x().coords();
        let y = p.y().coords();
        let xa = x.scale(ONE / x.0[id.i]);
        let ya = y.scale(ONE / y.0[id.j]);
        let dq = self.surface.q[id.k] * xa.0[id.k];
        if dq.norm() < 1e-10 {
            return Err(Error::DegenerateChart(dq.norm()));
        }
        let (a, b) = id.x_free();
        let c = id.y_free();
        let cols = [frame.from_tangent(u), frame.from_tangent(v), frame.from_tangent(w)];
        let m = [
            [cols[0][0], cols[1][0], cols[2][0]],
            [cols[0][1], cols[1][1], cols[2][1]],
            [cols[0][2], cols[1][2], cols[2][2]],
        ];
        let vol = det3(&m);
        // Residue of eps_x eps_y dx_a dx_b dy_c dy_k / (Q s) along dQ/dy_k.
        let sign = -perm_sign(id.i, a, b) * perm_sign(id.j, c, id.k);
        Ok(vol * sign / (dq * self.divisor.section_raw(&xa, &ya)))
    }

    fn evaluate_in(&self, p: &FlagPoint, id: ChartId, u: &TangentVector, v: &TangentVector, w: &TangentVector) -> Result<C64> {
        Ok(self.raw_in(p, id, u, v, w)? * self.gauge)
    }

    /// `theta_D(u, v, w)` in the dominant chart.
    pub fn theta(&self, p: &FlagPoint, u: &TangentVector, v: &TangentVector, w: &TangentVector) -> Result<C64> {
        let id = ChartFrame::at(p, &self.surface).chart_id;
        self.evaluate_in(p, id, u, v, w)
    }

    /// `theta_D` in the chart `id`.
    pub fn theta_in(&self, p: &FlagPoint, id: ChartId, u: &TangentVector, v: &TangentVector, w: &TangentVector) -> Result<C64> {
        self.evaluate_in(p, id, u, v, w)
    }

    /// Largest relative disagreement between admissible charts at `p`.
    pub fn chart_consistency(&self, p: &FlagPoint, u: &TangentVector, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        let reference = self.theta(p, u, v, w)?;
        let mut worst: f64 = 0.0;
        for id in ChartId::all() {
            match self.theta_in(p, id, u, v, w) {
                Ok(t) => worst = worst.max((t - reference).norm() / reference.norm()),
                Err(Error::DegenerateChart(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(worst)
    }
}

/// Circular mean direction and circular standard deviation of angles.
pub fn circular_stats(angles: &[f64]) -> (f64, f64) {
    let n = angles.len() as f64;
    let (mut cs, mut sn) = (0.0, 0.0);
    for a in angles {
        cs += crate::math::cos(*a);
        sn += crate::math::sin(*a);
    }
    let r = (sqrt(cs * cs + sn * sn) / n).min(1.0);
    let std = if r > 0.0 { sqrt(-2.0 * ln(r)).max(0.0) } else { f64::INFINITY };
    (atan2(sn, cs), std)
}

/// Phase statistics of one fibre.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberPhase {
    pub h_level: f64,
    pub c1: f64,
    pub c2: f64,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    pub min_abs: f64,
}

/// Result of [`specialty_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialtyReport {
    pub mode: HeightMode,
    pub gauge_reference: FlagPoint,
    /// Circular mean of all phases (`-s`).
    pub s: f64,
    pub per_fiber: Vec<FiberPhase>,
    pub cross_fiber_dev: f64,
    pub max_fiber_std: f64,
    /// Largest `|arg theta - s|` over all retained samples.
    pub max_deviation: f64,
}

impl SpecialtyReport {
    pub fn holds(&self, phase_tol: f64) -> bool {
        self.max_fiber_std < phase_tol && self.cross_fiber_dev < phase_tol
    }
}

/// Evaluates `arg theta_D(X_{f1}, X_{f2}, lift of X_h)` over the samples of each
/// fibre, skipping samples within `exclusion` of `D` or of the diagonal lines.
pub fn specialty_report(form: &ResidueForm, h: &BaseMorseFunction, fibers: &[TorusFiber], exclusion: f64) -> Result<SpecialtyReport> {
    let mut per_fiber = Vec::with_capacity(fibers.len());
    let mut all = Vec::new();
    for f in fibers {
        let mut phases = Vec::with_capacity(f.samples.len());
        let mut min_abs = f64::INFINITY;
        for smp in &f.samples {
            let r = smp.point.reps();
            let fn_ = form.divisor.factor_norms(&r);
            if fn_[0] < exclusion || fn_[1] < exclusion || distance_to_sing(&r) < exclusion {
                continue;
            }
            let t = form.theta(&smp.point, &smp.frame[0], &smp.frame[1], &smp.frame[2])?;
            min_abs = min_abs.min(t.norm());
            phases.push(atan2(t.im, t.re));
        }
        if phases.is_empty() {
            continue;
        }
        let (mean, std) = circular_stats(&phases);
        all.extend_from_slice(&phases);
        per_fiber.push(FiberPhase { h_level: f.level_loop.h_level, c1: f.c1, c2: f.c2, mean, std, n: phases.len(), min_abs });
    }
    if per_fiber.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: per_fiber.len() });
    }
    let (s, _) = circular_stats(&all);
    let cross = per_fiber.iter().map(|f| crate::math::wrap_angle(f.mean - s).abs()).fold(0.0, f64::max);
    let max_std = per_fiber.iter().map(|f| f.std).fold(0.0, f64::max);
    let max_deviation = all.iter().map(|a| crate::math::wrap_angle(a - s).abs()).fold(0.0, f64::max);
    Ok(SpecialtyReport {
        mode: h.mode,
        gauge_reference: reference_flag(),
        s,
        per_fiber,
        cross_fiber_dev: cross,
        max_fiber_std: max_std,
        max_deviation,
    })
}

/// Vector field whose Lie derivative is tested.
pub enum LieField<'a> {
    Hamiltonian(&'a dyn Hamiltonian),
    /// Horizontal lift of the Hamiltonian field of `h` on the base line.
    Lifted(&'a Structure, &'a BaseMorseFunction),
}

fn flow_by(field: &LieField<'_>, s: &Surface, p: &FlagPoint, t: f64, tol: &crate::Tolerances) -> Result<FlagPoint> {
    match field {
        LieField::Hamiltonian(h) => Ok(flow_on(*h, p, 0.0, t, s, tol, false)?.end),
        LieField::Lifted(st, h) => flow_field(p, 0.0, t, s, tol, |_, q| {
            let w = psi(q)?;
            Ok(st.horizontal_lift(q, &h.field(&w))?.lifted)
        }),
    }
}

/// Finite-difference Lie derivative of `theta_D` along the flow of `field`:
/// `|d/dt phi_t^* theta (u, v, w)| / |theta(u, v, w)|` at `t = 0`, with the
/// frame pushed forward by differencing flowed neighbours.
pub fn lie_invariance_check(
    form: &ResidueForm,
    field: &LieField<'_>,
    p: &FlagPoint,
    frame: &[TangentVector; 3],
    step: f64,
    tol: &crate::Tolerances,
) -> Result<f64> {
    let s = form.surface;
    let delta = 1e-4;
    let value_at = |t: f64| -> Result<C64> {
        let q = flow_by(field, &s, p, t, tol)?;
        let mut pushed = [Pair::new(CVec3::ZERO, CVec3::ZERO); 3];
        for (m, v) in frame.iter().enumerate() {
            let vs = v.scale_re(delta / v.norm());
            let plus = flow_by(field, &s, &exp_map(p, &vs, &s, tol)?, t, tol)?;
            let minus = flow_by(field, &s, &exp_map(p, &vs.scale_re(-1.0), &s, tol)?, t, tol)?;
            let qr = q.reps();
            let d = tangent_between(&qr, &plus.reps()) - tangent_between(&qr, &minus.reps());
            pushed[m] = crate::geometry::horizontal(&qr.x, &qr.y, &d).scale_re(v.norm() / (2.0 * delta));
        }
        form.theta(&q, &pushed[0], &pushed[1], &pushed[2])
    };
    // The projection error of the neighbours is even in delta and cancels
    // in the central difference.
    let base = value_at(0.0)?;
    let fwd = value_at(step)?;
    let bwd = value_at(-step)?;
    Ok(((fwd - bwd) / (2.0 * step)).norm() / base.norm())
}

/// An SU(3)-type symbol whose flow preserves `F^3` but moves `D`.
pub fn moving_control() -> crate::dynamics::SymbolFunction {
    let mut a = crate::linalg::CMat3::ZERO;
    a.0[0][1] = ONE;
    a.0[1][0] = ONE;
    a.0[1][2] = C64::new(0.0, 0.5);
    a.0[2][1] = C64::new(0.0, -0.5);
    a.0[0][0] = C64::new(0.3, 0.0);
    a.0[2][2] = C64::new(-0.3, 0.0);
    crate::dynamics::SymbolFunction::of_action(a).expect("Hermitian")
}

/// `theta_D` on the natural fibration frame at a point.
pub fn frame_theta(form: &ResidueForm, s: &Structure, h: &BaseMorseFunction, p: &FlagPoint) -> Result<C64> {
    let f = natural_frame(s, h, p)?;
    form.theta(p, &f[0], &f[1], &f[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, I};
    use crate::sampling::{random_flag, random_tangent};
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn point_functional_vanishes_at_its_point() {
        let n = CVec3([ONE; 3]);
        let p = ProjectivePoint::from_real(1.0, 0.0, -1.0).unwrap();
        assert_eq!(point_functional(&n, &p), CVec3::basis(1));
        let q = ProjectivePoint::from_vec(CVec3::new(c(1.0, 0.5), c(-0.2, 1.0), c(-0.8, -1.5))).unwrap();
        let f = point_functional(&n, &q);
        assert!(f.dot(&q.coords()).norm() < 1e-14);
        assert!(f.norm() > 0.1);
    }

    #[test]
    fn section_has_bidegree_two_two() {
        let d = BoundaryDivisor::default_divisor();
        let x = CVec3::new(c(0.3, 0.1), c(-0.7, 0.4), c(0.2, -0.9));
        let y = CVec3::new(c(1.1, -0.3), c(0.5, 0.2), c(-0.4, 0.6));
        let (l, m) = (c(0.7, -1.2), c(-0.4, 0.3));
        let lhs = d.section_raw(&x.scale(l), &y.scale(m));
        let rhs = d.section_raw(&x, &y) * l * l * m * m;
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn circular_statistics_wrap() {
        let (m, s) = circular_stats(&[0.4; 5]);
        assert!((m - 0.4).abs() < 1e-15 && s < 1e-7);
        let pi = core::f64::consts::PI;
        let (m, _) = circular_stats(&[pi - 0.1, -pi + 0.1]);
        assert!((m.abs() - pi).abs() < 1e-12);
    }

    #[test]
    fn gauge_is_positive_at_the_reference_frame() {
        let f = ResidueForm::new(BoundaryDivisor::default_divisor(), Surface::flag()).unwrap();
        let r = reference_flag();
        let fr = ChartFrame::at(&r, &f.surface);
        let b: [TangentVector; 3] = core::array::from_fn(|m| fr.basis_vector(2 * m));
        let t = f.theta(&r, &b[0], &b[1], &b[2]).unwrap();
        assert!(t.re > 0.0 && t.im.abs() < 1e-12 * t.re);
    }

    #[test]
    fn theta_is_alternating_and_complex_trilinear() {
        let f = ResidueForm::new(BoundaryDivisor::default_divisor(), Surface::flag()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = Surface::flag();
        for _ in 0..20 {
            let p = random_flag(&mut rng);
            let [u, v, w] = [0; 3].map(|_| random_tangent(&p, &s, &mut rng));
            let t = f.theta(&p, &u, &v, &w).unwrap();
            let sw = f.theta(&p, &v, &u, &w).unwrap();
            assert!((t + sw).norm() < 1e-10 * t.norm());
            let ti = f.theta(&p, &u.times_i(), &v, &w).unwrap();
            assert!((ti - t * I).norm() < 1e-10 * t.norm());
        }
    }

    #[test]
    fn evaluation_on_the_divisor_is_refused() {
        let f = ResidueForm::new(BoundaryDivisor::default_divisor(), Surface::flag()).unwrap();
        let p = FlagPoint::from_vecs(CVec3::basis(0), CVec3::basis(1), 1e-12).unwrap();
        let e = CVec3::ZERO;
        let v = TangentVector::new(e, e);
        assert!(matches!(f.theta(&p, &v, &v, &v), Err(Error::OnDivisor(_))));
    }
}
