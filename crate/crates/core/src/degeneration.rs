//! The toric degeneration `F_t = { t x0 y0 + x1 y1 + x2 y2 = 0 }`, the
//! pseudotoric structure of `F_0`, diagonal moment maps on `CP^2_w` and a
//! Hamiltonian isotopy carrying tori of `F^3` into `F_0`.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::config::Tolerances;
use crate::dynamics::{ambient_field, base_field, unit, Domain, Hamiltonian, IntegralPair, SymbolFunction};
use crate::error::{Error, Result};
use crate::fibration::{make_height, BaseMorseFunction, HeightMode};
use crate::geometry::{omega, tangent_between, AmbientPoint, FlagPoint, ProjectivePoint, Surface};
use crate::linalg::{singular_values, CMat3, CVec3, Pair, C64, I, ONE, ZERO};
use crate::math::{acos, cos, sin, sqrt};
use crate::ode::{integrate, OdeOptions};
use crate::pseudotoric::{classify_fiber_point, diagonal_line_norm, on_line, psi_raw, BaseSetLine, FiberClass, Pullback};
use crate::sampling::{random_ambient, random_projective};

/// `|t x0 y0 + x1 y1 + x2 y2| / (|x| |y|)`.
pub fn ft_residual(x: &CVec3, y: &CVec3, t: C64) -> f64 {
    Surface::deformed(t).residual(x, y)
}

/// Normal of the base line `l_0 = { w1 + w2 = 0 }` of `F_0`.
pub fn line0() -> CVec3 {
    CVec3::real(0.0, 1.0, 1.0)
}

/// Fibre type of `psi_0` over a point of `l_0`.
pub fn psi0_classify(w: &ProjectivePoint, tol: f64) -> Result<FiberClass> {
    if !on_line(&line0(), &w.coords(), tol) {
        return Err(Error::InvalidParameter("point is not on the line w1 + w2 = 0"));
    }
    Ok(classify_fiber_point(w))
}

/// Height on `l_0` with critical points `[1:0:0]` and `[0:1:-1]`.
pub fn toric_h0() -> BaseMorseFunction {
    let a = ProjectivePoint::basis(0);
    let b = ProjectivePoint::from_real(0.0, 1.0, -1.0).expect("nonzero");
    make_height(&a, &b, HeightMode::Symbol, &line0()).expect("orthogonal pair on l_0")
}

/// The generator rotating the line `{ sum w = 0 }` onto `{ w1 + w2 = 0 }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineRotation {
    pub g: SymbolFunction,
    pub time: f64,
    pub n_from: CVec3,
    pub n_to: CVec3,
    /// Unit vector completing `n_from` to an orthonormal basis of the rotation plane.
    pub e2: CVec3,
}

impl LineRotation {
    /// Unit normal at time `s` along the rotation.
    pub fn normal(&self, s: f64) -> CVec3 {
        self.n_from.scale_re(cos(s)) + self.e2.scale_re(sin(s))
    }

    pub fn normal_rate(&self, s: f64) -> CVec3 {
        self.n_from.scale_re(-sin(s)) + self.e2.scale_re(cos(s))
    }
}

/// `g`: the symbol `(i/2) (e2 n^T - n e2^T)` whose base flow `exp(Z t)` turns
/// the unit normal of `line_from` into that of `line_to` at `t = T`.
pub fn make_g(line_from: &CVec3, line_to: &CVec3) -> Result<LineRotation> {
    let n1 = real_unit(line_from)?;
    let n0 = real_unit(line_to)?;
    let cosang = n1.dot(&n0).re.clamp(-1.0, 1.0);
    let time = acos(cosang);
    let e2 = (n0 - n1.scale_re(cosang)).normalized();
    let z = CMat3::outer(&e2, &n1).add(&CMat3::outer(&n1, &e2).scale(C64::new(-1.0, 0.0)));
    let m = z.scale(I * 0.5);
    let g = SymbolFunction::on_base(m, Domain::BaseCP2w)?;
    Ok(LineRotation { g, time, n_from: n1, n_to: n0, e2 })
}

fn real_unit(v: &CVec3) -> Result<CVec3> {
    if v.0.iter().any(|z| z.im != 0.0) || v.norm() == 0.0 {
        return Err(Error::InvalidParameter("line normals must be real and nonzero"));
    }
    Ok(v.normalized())
}

/// Default rotation from the line of `F^3` to the line of `F_0`.
pub fn default_g() -> LineRotation {
    make_g(&CVec3([ONE; 3]), &line0()).expect("real normals")
}

fn smoothstep5(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// Norms of the nine linear loci making up `Delta(F1, F2)`: the six lines of
/// `B` and the three diagonal lines.
pub fn delta_norms(p: &Pair) -> [f64; 9] {
    let lines = BaseSetLine::all();
    core::array::from_fn(|m| if m < 6 { lines[m].defining_norm(p) } else { diagonal_line_norm(p, m - 6) })
}

/// Distance to `Delta(F1, F2)`.
pub fn distance_to_delta(p: &Pair) -> f64 {
    delta_norms(p).iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Which function is cut off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IsotopyKind {
    /// `g o psi`.
    Pullback,
    /// The time-dependent function whose flow carries `F_{n(s)}` to
    /// `F_{n(s + ds)}`, with `n(s)` the rotating normal of `g`.
    SurfaceTracking,
}

/// `G = chi * K` with `chi` a product of quintic smoothsteps in the norms of
/// the loci of `Delta(F1, F2)`: `chi = 1` beyond `r1` and `chi = 0` within `r2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffHamiltonian {
    pub rotation: LineRotation,
    pub kind: IsotopyKind,
    pub r1: f64,
    pub r2: f64,
}

/// Builds the cut-off Hamiltonian.
pub fn cutoff_g(rotation: LineRotation, kind: IsotopyKind, r1: f64, r2: f64) -> Result<CutoffHamiltonian> {
    if !(r1 > r2 && r2 > 0.0) {
        return Err(Error::InvalidParameter("radii must satisfy r1 > r2 > 0"));
    }
    Ok(CutoffHamiltonian { rotation, kind, r1, r2 })
}

impl CutoffHamiltonian {
    pub fn chi(&self, p: &Pair) -> f64 {
        let u = unit(p);
        delta_norms(&u).iter().map(|d| smoothstep5((d - self.r2) / (self.r1 - self.r2))).product()
    }

    /// Conjugate gradient of `chi` by central differences of the twelve real
    /// coordinates; exactly zero where every norm is beyond `r1`.
    fn chi_grad(&self, p: &Pair) -> Pair {
        let u = unit(p);
        if delta_norms(&u).iter().all(|d| *d >= self.r1 + 1e-5) {
            return Pair::ZERO;
        }
        let h = 1e-6;
        let mut g = Pair::ZERO;
        for side in 0..2 {
            for k in 0..3 {
                for (re, dir) in [(true, ONE), (false, I)] {
                    let mut plus = u;
                    let mut minus = u;
                    let (pv, mv) = if side == 0 { (&mut plus.x, &mut minus.x) } else { (&mut plus.y, &mut minus.y) };
                    pv.0[k] += dir * h;
                    mv.0[k] -= dir * h;
                    let d = (self.chi(&plus) - self.chi(&minus)) / (2.0 * h);
                    let c = if re { C64::new(0.5 * d, 0.0) } else { C64::new(0.0, 0.5 * d) };
                    if side == 0 {
                        g.x.0[k] += c;
                    } else {
                        g.y.0[k] += c;
                    }
                }
            }
        }
        g
    }

    /// The uncut function and its conjugate gradient at unit representatives.
    pub fn core(&self, t: f64, p: &Pair) -> (f64, Pair) {
        match self.kind {
            IsotopyKind::Pullback => {
                let pb = Pullback(&self.rotation.g);
                (pb.value(t, p), pb.grad(t, p))
            }
            IsotopyKind::SurfaceTracking => tracking(&self.rotation, t, p),
        }
    }
}

/// `K = U / S` with `U = Re(i conj(A) Q)`, `Q = Q_n`, `A = Q_{n'}` and `S` the
/// squared horizontal norm of the conjugate gradient of `Q`.
fn tracking(r: &LineRotation, s: f64, p: &Pair) -> (f64, Pair) {
    let n = r.normal(s);
    let np = r.normal_rate(s);
    let (x, y) = (p.x, p.y);
    let nx = n.hadamard(&x);
    let ny = n.hadamard(&y);
    let q = nx.dot(&y);
    let a = np.hadamard(&x).dot(&y);
    let (xx, yy) = (x.norm_sqr(), y.norm_sqr());
    let sv = xx * ny.norm_sqr() + yy * nx.norm_sqr() - 2.0 * q.norm_sqr();
    let u = (I * a.conj() * q).re;
    let npy = np.hadamard(&y);
    let npx = np.hadamard(&x);
    let du_x = (npy.conj().scale(I * q) - ny.conj().scale(I * a)).scale_re(0.5);
    let du_y = (npx.conj().scale(I * q) - nx.conj().scale(I * a)).scale_re(0.5);
    let n2 = n.hadamard(&n);
    let ds_x = x.scale_re(ny.norm_sqr()) + n2.hadamard(&x).scale_re(yy) - ny.conj().scale(q * 2.0);
    let ds_y = y.scale_re(nx.norm_sqr()) + n2.hadamard(&y).scale_re(xx) - nx.conj().scale(q * 2.0);
    let k = u / sv;
    let gx = (du_x - ds_x.scale_re(k)).scale_re(1.0 / sv);
    let gy = (du_y - ds_y.scale_re(k)).scale_re(1.0 / sv);
    (k, Pair::new(gx, gy))
}

impl Hamiltonian for CutoffHamiltonian {
    fn value(&self, t: f64, p: &Pair) -> f64 {
        let c = self.chi(p);
        if c == 0.0 {
            return 0.0;
        }
        c * self.core(t, &unit(p)).0
    }

    fn grad(&self, t: f64, p: &Pair) -> Pair {
        let u = unit(p);
        let c = self.chi(&u);
        if c == 0.0 {
            return Pair::ZERO;
        }
        let (k, g) = self.core(t, &u);
        g.scale_re(c) + self.chi_grad(&u).scale_re(k)
    }
}

/// Per-point checks of the isotopy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotopyResidual {
    /// `F_0` residual at the end point.
    pub f0_residual: f64,
    pub integral_change: f64,
    /// `|w1 + w2| / |w|` at the end point.
    pub line_residual: f64,
    /// Largest change of `omega` on transported tangent pairs.
    pub omega_change: f64,
    pub min_clearance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsotopyReport {
    pub points: Vec<AmbientPoint>,
    pub residuals: Vec<IsotopyResidual>,
    pub max_f0_residual: f64,
    pub max_integral_change: f64,
    pub max_line_residual: f64,
    pub max_omega_change: f64,
    pub min_clearance: f64,
}

impl IsotopyReport {
    pub fn passes(&self) -> bool {
        self.max_f0_residual < 1e-5 && self.max_integral_change < 1e-6 && self.max_line_residual < 1e-6 && self.max_omega_change < 1e-6
    }
}

fn ode_opts(tol: &Tolerances) -> OdeOptions {
    OdeOptions { tol: tol.ode_tol, min_step: tol.min_step, ..OdeOptions::default() }
}

/// Ambient flow of `G` from `0` to `time`; fails with `EnteredCollar` when
/// the trajectory comes within `r2` of `Delta`.
pub fn flow_g(g: &CutoffHamiltonian, p: &Pair, time: f64, tol: &Tolerances) -> Result<(Pair, f64)> {
    let mut clearance = distance_to_delta(&unit(p));
    if clearance < g.r2 {
        return Err(Error::EnteredCollar { distance: clearance, r2: g.r2 });
    }
    let (end, _) = integrate(
        unit(p),
        0.0,
        time,
        &ode_opts(tol),
        |t, v| Ok(ambient_field(g, t, &unit(v))),
        |v| {
            let u = unit(v);
            let d = distance_to_delta(&u);
            if d < g.r2 {
                return Err(Error::EnteredCollar { distance: d, r2: g.r2 });
            }
            Ok(u)
        },
        |_, v| clearance = clearance.min(distance_to_delta(v)),
    )?;
    Ok((end, clearance))
}

/// Flows every point of `cloud` by `G` for `time` and checks that the image
/// lies on `F_0`, over `l_0`, with unchanged integrals and `omega`.
pub fn isotopy_transport(
    g: &CutoffHamiltonian,
    integrals: &IntegralPair,
    time: f64,
    cloud: &[FlagPoint],
    tol: &Tolerances,
) -> Result<IsotopyReport> {
    let mut points = Vec::with_capacity(cloud.len());
    let mut residuals = Vec::with_capacity(cloud.len());
    for p in cloud {
        let r = transport_point(g, integrals, time, p, tol)?;
        points.push(r.0);
        residuals.push(r.1);
    }
    let fold = |f: fn(&IsotopyResidual) -> f64| residuals.iter().map(f).fold(0.0, f64::max);
    Ok(IsotopyReport {
        max_f0_residual: fold(|r| r.f0_residual),
        max_integral_change: fold(|r| r.integral_change),
        max_line_residual: fold(|r| r.line_residual),
        max_omega_change: fold(|r| r.omega_change),
        min_clearance: residuals.iter().map(|r| r.min_clearance).fold(f64::INFINITY, f64::min),
        points,
        residuals,
    })
}

/// Transport of one point with its residual quadruple.
pub fn transport_point(
    g: &CutoffHamiltonian,
    integrals: &IntegralPair,
    time: f64,
    p: &FlagPoint,
    tol: &Tolerances,
) -> Result<(AmbientPoint, IsotopyResidual)> {
    let start = p.reps();
    let (end, clearance) = flow_g(g, &start, time, tol)?;
    let (a0, b0) = integrals.values(&start);
    let (a1, b1) = integrals.values(&end);
    let w = psi_raw(&end);
    let line_residual = line0().dot(&w).norm() / (sqrt(2.0) * w.norm());
    // Tangent test vectors with nonzero pairings: X_{f_i} and I X_{f_i}.
    let s = Surface::flag();
    let x1 = crate::dynamics::surface_field(&integrals.f1, &s, 0.0, &start);
    let x2 = crate::dynamics::surface_field(&integrals.f2, &s, 0.0, &start);
    let vecs = [x1, x2, x1.times_i(), x2.times_i()];
    let delta = 1e-4;
    let mut pushed = [Pair::ZERO; 4];
    for (m, v) in vecs.iter().enumerate() {
        let sc = delta / v.norm();
        let plus = flow_g(g, &(start + v.scale_re(sc)), time, tol)?.0;
        let minus = flow_g(g, &(start - v.scale_re(sc)), time, tol)?.0;
        let d = tangent_between(&end, &plus) - tangent_between(&end, &minus);
        pushed[m] = crate::geometry::horizontal(&end.x, &end.y, &d).scale_re(1.0 / (2.0 * sc));
    }
    let mut omega_change: f64 = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let scale = vecs[a].norm() * vecs[b].norm();
            omega_change = omega_change.max((omega(&pushed[a], &pushed[b]) - omega(&vecs[a], &vecs[b])).abs() / scale);
        }
    }
    let res = IsotopyResidual {
        f0_residual: ft_residual(&end.x, &end.y, ZERO),
        integral_change: (a1 - a0).abs().max((b1 - b0).abs()),
        line_residual,
        omega_change,
        min_clearance: clearance,
    };
    Ok((AmbientPoint::from_vecs(end.x, end.y)?, res))
}

/// Flows sample points of the line `{ sum w = 0 }` by the base flow of `g`
/// and returns the largest distance of the images to `l_0`.
pub fn line_transport_defect(r: &LineRotation, samples: usize, tol: &Tolerances) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in 0..samples {
        let th = crate::math::TAU * m as f64 / samples as f64;
        let a = ProjectivePoint::from_real(0.0, 1.0, -1.0)?.coords();
        let b = ProjectivePoint::from_real(2.0, -1.0, -1.0)?.coords();
        let w = ProjectivePoint::from_vec(a.scale_re(cos(th)) + b.scale(crate::linalg::cis(0.3 * th) * sin(th)))?;
        let end = crate::dynamics::flow_base(&r.g, &w, r.time, tol)?;
        worst = worst.max(r.n_to.dot(&end.coords()).norm());
    }
    Ok(worst)
}

/// Numerical rank of `(X_{H1}, X_{H2})` on `CP^2_w` at `w`.
pub fn base_rank(h1: &SymbolFunction, h2: &SymbolFunction, w: &ProjectivePoint, tol: f64) -> usize {
    let wc = w.coords();
    let cols = vec![real6(&base_field(h1, &wc)), real6(&base_field(h2, &wc))];
    singular_values(&cols).iter().filter(|s| **s > tol).count()
}

fn real6(v: &CVec3) -> Vec<f64> {
    v.0.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Outcome of [`diagonal_moment_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalMomentReport {
    pub samples: usize,
    /// Rank drops farther than `1e-2` from `l_0 u l_1 u l_2`.
    pub false_positives: usize,
    /// Points on the lines with full rank.
    pub false_negatives: usize,
    /// Vanishing patterns `(i, on x side)` reached by descending `|x_i y_i|`.
    pub boundary_components: Vec<(usize, bool)>,
    /// Whether the four-torus frame drops rank at every reached point.
    pub components_degenerate: bool,
}

/// Checks that the rank of `(X_{H1}, X_{H2})` drops exactly on the coordinate
/// lines and that the preimage of the lines in `CP^2 x CP^2` splits into the
/// six coordinate divisors.
pub fn diagonal_moment_check(
    h1: &SymbolFunction,
    h2: &SymbolFunction,
    integrals: &IntegralPair,
    samples: usize,
    rng: &mut dyn RngCore,
) -> Result<DiagonalMomentReport> {
    if !h1.matrix_x.is_diagonal() || !h2.matrix_x.is_diagonal() {
        return Err(Error::InvalidParameter("moment maps must be diagonal"));
    }
    let tol = 1e-7;
    let mut fp = 0;
    let mut fneg = 0;
    for m in 0..samples {
        let w = if m % 4 == 3 {
            let i = m % 3;
            let mut v = crate::sampling::random_cvec3(rng);
            v.0[i] = ZERO;
            ProjectivePoint::from_vec(v)?
        } else {
            random_projective(rng)
        };
        let wc = w.coords();
        let dist = wc.0.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let rank = base_rank(h1, h2, &w, tol);
        if rank < 2 && dist > 1e-2 {
            fp += 1;
        }
        if dist < 1e-14 && rank == 2 {
            fneg += 1;
        }
    }
    let hs = [*h1, *h2];
    let mut comps: Vec<(usize, bool)> = Vec::new();
    let mut degenerate = true;
    for i in 0..3 {
        for _ in 0..12 {
            let start = random_ambient(rng).reps();
            let end = descend_product(&start, i)?;
            let tag = (i, end.x.0[i].norm() < end.y.0[i].norm());
            if !comps.contains(&tag) {
                comps.push(tag);
            }
            if toric_rank(integrals, &hs, &end) >= 4 || toric_rank(integrals, &hs, &start) < 4 {
                degenerate = false;
            }
        }
    }
    comps.sort_unstable();
    Ok(DiagonalMomentReport {
        samples,
        false_positives: fp,
        false_negatives: fneg,
        boundary_components: comps,
        components_degenerate: degenerate,
    })
}

/// Rank of `(X_{F1}, X_{F2}, X_{H1 o psi}, X_{H2 o psi})` on `CP^2 x CP^2`.
pub fn toric_rank(integrals: &IntegralPair, hs: &[SymbolFunction; 2], p: &Pair) -> usize {
    let cols: Vec<Vec<f64>> = [
        ambient_field(&integrals.f1, 0.0, p),
        ambient_field(&integrals.f2, 0.0, p),
        ambient_field(&Pullback(&hs[0]), 0.0, p),
        ambient_field(&Pullback(&hs[1]), 0.0, p),
    ]
    .iter()
    .map(|v| v.to_real().to_vec())
    .collect();
    singular_values(&cols).iter().filter(|s| **s > 1e-7).count()
}

/// Gradient descent of `|x_i y_i|^2` on `CP^2 x CP^2` until it vanishes.
fn descend_product(p: &Pair, i: usize) -> Result<Pair> {
    let mut u = unit(p);
    let mut f = f64::INFINITY;
    for _ in 0..20_000 {
        let (a, b) = (u.x.0[i], u.y.0[i]);
        f = (a * b).norm();
        if f < 1e-13 {
            return Ok(u);
        }
        let mut gx = CVec3::ZERO;
        let mut gy = CVec3::ZERO;
        gx.0[i] = a * b.norm_sqr();
        gy.0[i] = b * a.norm_sqr();
        let step = 0.5 / (a.norm_sqr() + b.norm_sqr()).max(1e-3);
        let g = Pair::new(gx.horizontal(&u.x), gy.horizontal(&u.y));
        u = unit(&(u - g.scale_re(step)));
    }
    Err(Error::NoConvergence { what: "boundary descent", iterations: 20_000, residual: f })
}

/// Seeds of a fixed label on `F_t` over `w = [1 : 1 : -(t + 1)]`.
pub fn family_seed(t: f64, c1: f64, c2: f64, integrals: &IntegralPair, tol: &Tolerances) -> Result<FlagPoint> {
    let s = crate::pseudotoric::Structure::new(Surface::deformed(C64::new(t, 0.0)), *integrals, *tol);
    let w = ProjectivePoint::from_real(1.0, 1.0, -(t + 1.0))?;
    crate::fibration::seed_point(&s, &w, c1, c2)
}

/// Ambient flow of `f` from a point of `F_0` and the largest `F_0` residual
/// seen along the way (no projection).
pub fn restriction_drift<H: Hamiltonian + ?Sized>(f: &H, p: &FlagPoint, time: f64, tol: &Tolerances) -> Result<f64> {
    let mut worst: f64 = ft_residual(&p.reps().x, &p.reps().y, ZERO);
    integrate(
        p.reps(),
        0.0,
        time,
        &ode_opts(tol),
        |t, v| Ok(ambient_field(f, t, &unit(v))),
        |v| Ok(unit(v)),
        |_, v| worst = worst.max(ft_residual(&v.x, &v.y, ZERO)),
    )?;
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_ambient;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    /// `dH(v) = 2 Re <grad, v>` on horizontal `v`, by central differences.
    fn gradient_defect<H: Hamiltonian>(h: &H, t: f64, p: &Pair, v: &Pair) -> f64 {
        let e = 1e-6;
        let fd = (h.value(t, &(*p + v.scale_re(e))) - h.value(t, &(*p - v.scale_re(e)))) / (2.0 * e);
        (fd - 2.0 * h.grad(t, p).hdot(v).re).abs()
    }

    #[test]
    fn rotation_ends_on_the_target_line() {
        let r = default_g();
        assert!((r.normal(r.time) - r.n_to).norm() < 1e-14);
        assert!((r.normal(0.0) - r.n_from).norm() < 1e-15);
        assert!(line_transport_defect(&r, 8, &Tolerances::default()).unwrap() < 1e-8);
    }

    #[test]
    fn radii_are_ordered() {
        assert!(cutoff_g(default_g(), IsotopyKind::Pullback, 0.1, 0.2).is_err());
        assert!(cutoff_g(default_g(), IsotopyKind::Pullback, 0.1, 0.0).is_err());
    }

    #[test]
    fn cutoff_is_zero_in_the_collar_and_one_outside() {
        let g = cutoff_g(default_g(), IsotopyKind::SurfaceTracking, 0.2, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut inner, mut outer) = (0, 0);
        for _ in 0..400 {
            let mut p = random_ambient(&mut rng).reps();
            if rng.next_u32() % 2 == 0 {
                let i = (rng.next_u32() % 3) as usize;
                p.x.0[i] = p.x.0[i].scale(1e-2);
                p.y.0[i] = p.y.0[i].scale(1e-2);
                p = unit(&p);
            }
            let d = distance_to_delta(&p);
            if d < g.r2 {
                assert_eq!(g.chi(&p), 0.0);
                inner += 1;
            } else if d > g.r1 {
                assert_eq!(g.chi(&p), 1.0);
                outer += 1;
            } else {
                assert!((0.0..=1.0).contains(&g.chi(&p)));
            }
        }
        assert!(inner > 0 && outer > 0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for kind in [IsotopyKind::Pullback, IsotopyKind::SurfaceTracking] {
            let g = cutoff_g(default_g(), kind, 0.35, 0.05).unwrap();
            for _ in 0..40 {
                let p = random_ambient(&mut rng).reps();
                let raw = random_ambient(&mut rng).reps();
                let v = Pair::new(raw.x.horizontal(&p.x), raw.y.horizontal(&p.y));
                let t = 0.4;
                let scale = 1.0 + g.grad(t, &p).norm();
                assert!(gradient_defect(&g, t, &p, &v) < 1e-5 * scale, "{kind:?}");
            }
        }
    }

    #[test]
    fn degenerate_surface_and_its_line() {
        let x = CVec3::real(1.0, 1.0, 1.0);
        let y = CVec3::real(0.0, 1.0, -1.0);
        assert!(ft_residual(&x, &y, ZERO) < 1e-15);
        assert!(ft_residual(&x, &y, ONE) < 1e-15);
        let off = ProjectivePoint::from_real(1.0, 1.0, 1.0).unwrap();
        assert!(psi0_classify(&off, 1e-9).is_err());
        let h = toric_h0();
        for p in [h.max_point, h.min_point] {
            assert!(on_line(&line0(), &p.coords(), 1e-12));
        }
    }
}
