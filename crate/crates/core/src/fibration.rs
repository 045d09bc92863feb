//! The minimal Lagrangian fibration: a Morse function `h` with two critical
//! points on the base line, its level loops, and the 3-tori obtained by
//! sweeping the 2-tori `{f1 = c1, f2 = c2}` of the fibres of `psi` along a
//! level loop.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::dynamics::{flow_field, flow_on, IntegralPair};
use crate::error::{Error, Result};
use crate::geometry::{omega, FlagPoint, ProjectivePoint, TangentVector};
use crate::linalg::{singular_values, solve_real, CVec3, Pair, C64, ONE};
use crate::math::{atan2, exp, ln, sqrt, PI, TAU};
use crate::pseudotoric::{
    base_line_field, classify_fiber_point, line_tangent, on_line, psi, psi_raw, singular_base_points, BaseFunction,
    FiberClass, Structure,
};
use crate::sampling::gaussian;

/// How the height function on the base line is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightMode {
    /// Pull back of the standard height under the Mobius map sending the
    /// maximum to `0` and the minimum to `infinity` in `z = alpha / beta`.
    Mobius,
    /// Restriction of a Hermitian form: the minimum is the orthogonal
    /// complement of the maximum inside the line.
    Symbol,
}

/// `h = (|alpha|^2 - |beta|^2) / (|alpha|^2 + |beta|^2)` for `w = alpha a + beta b`
/// on the line `{ n . w = 0 }`; `h(a) = 1`, `h(b) = -1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseMorseFunction {
    pub mode: HeightMode,
    pub normal: CVec3,
    pub max_point: ProjectivePoint,
    pub min_point: ProjectivePoint,
    /// Dual vectors: `alpha = <da, w>`, `beta = <db, w>` on the line.
    da: CVec3,
    db: CVec3,
    /// Set when Symbol mode replaced a non-orthogonal minimum.
    pub warning: Option<&'static str>,
}

/// Builds the height function with maximum at `a` and minimum at `b`.
pub fn make_height(a: &ProjectivePoint, b: &ProjectivePoint, mode: HeightMode, normal: &CVec3) -> Result<BaseMorseFunction> {
    if a.distance(b) < 1e-9 {
        return Err(Error::DegeneratePair);
    }
    let av = a.coords();
    if !on_line(normal, &av, 1e-10) || !on_line(normal, &b.coords(), 1e-10) {
        return Err(Error::InvalidParameter("critical points must lie on the base line"));
    }
    let mut warning = None;
    let (bp, bv) = match mode {
        HeightMode::Mobius => (*b, b.coords()),
        HeightMode::Symbol => {
            let c = av.conj().cross(normal);
            let p = ProjectivePoint::from_vec(c.conj())?;
            if p.distance(b) > 1e-9 {
                warning = Some("minimum replaced by the orthogonal complement of the maximum");
            }
            (p, p.coords())
        }
    };
    let g = [[av.hdot(&av), av.hdot(&bv)], [bv.hdot(&av), bv.hdot(&bv)]];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let inv = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
    // alpha = inv00 <a,w> + inv01 <b,w>, so da = conj(inv00) a + conj(inv01) b.
    let da = av.scale(inv[0][0].conj()) + bv.scale(inv[0][1].conj());
    let db = av.scale(inv[1][0].conj()) + bv.scale(inv[1][1].conj());
    Ok(BaseMorseFunction { mode, normal: *normal, max_point: *a, min_point: bp, da, db, warning })
}

/// The line `{ w0 + w1 + w2 = 0 }` carrying the image of `F^3`.
pub fn flag_line() -> CVec3 {
    CVec3([ONE; 3])
}

/// Default height: Mobius mode, maximum `[0:1:-1]`, minimum `[1:0:-1]`.
pub fn default_height() -> BaseMorseFunction {
    let a = ProjectivePoint::from_real(0.0, 1.0, -1.0).expect("nonzero");
    let b = ProjectivePoint::from_real(1.0, 0.0, -1.0).expect("nonzero");
    make_height(&a, &b, HeightMode::Mobius, &flag_line()).expect("valid pair")
}

/// Symbol-mode height with maximum `[0:1:-1]` (minimum `[2:-1:-1]`).
pub fn symbol_height() -> BaseMorseFunction {
    let a = ProjectivePoint::from_real(0.0, 1.0, -1.0).expect("nonzero");
    let b = ProjectivePoint::from_real(2.0, -1.0, -1.0).expect("nonzero");
    make_height(&a, &b, HeightMode::Symbol, &flag_line()).expect("valid pair")
}

impl BaseMorseFunction {
    /// `(alpha, beta)` of a representative.
    pub fn coordinates(&self, w: &CVec3) -> (C64, C64) {
        (self.da.hdot(w), self.db.hdot(w))
    }

    /// Mobius coordinate `z = alpha / beta`.
    pub fn z(&self, w: &CVec3) -> C64 {
        let (a, b) = self.coordinates(w);
        a / b
    }

    /// Point of the line with Mobius coordinate `z` (`None` for infinity).
    pub fn point_at(&self, z: Option<C64>) -> Result<ProjectivePoint> {
        let a = self.max_point.coords();
        let b = self.min_point.coords();
        match z {
            None => Ok(self.max_point),
            Some(z) => ProjectivePoint::from_vec(a.scale(z) + b),
        }
    }

    /// Angle coordinate `arg z` around the level circles.
    pub fn angle(&self, w: &CVec3) -> f64 {
        let z = self.z(w);
        atan2(z.im, z.re)
    }

    /// Generator of the rotation `z -> e^{i s} z` at the canonical rep of `w`.
    pub fn rotation_field(&self, w: &ProjectivePoint) -> CVec3 {
        let wc = w.coords();
        let (alpha, _) = self.coordinates(&wc);
        let v = self.max_point.coords().scale(alpha * crate::linalg::I);
        let t = line_tangent(&self.normal, &wc);
        t.scale(t.hdot(&v))
    }

    /// Hamiltonian field of `h` on the base line.
    pub fn field(&self, w: &ProjectivePoint) -> CVec3 {
        base_line_field(self, &self.normal, w)
    }

    /// The singular base points that are not critical points of `h`, with
    /// their levels.
    pub fn collapsed_levels(&self) -> Vec<(ProjectivePoint, f64)> {
        singular_base_points(&self.normal)
            .into_iter()
            .filter(|p| p.distance(&self.max_point) > 1e-9 && p.distance(&self.min_point) > 1e-9)
            .map(|p| {
                let v = self.value(&p.coords());
                (p, v)
            })
            .collect()
    }
}

impl BaseFunction for BaseMorseFunction {
    fn value(&self, w: &CVec3) -> f64 {
        let (a, b) = self.coordinates(w);
        let (aa, bb) = (a.norm_sqr(), b.norm_sqr());
        (aa - bb) / (aa + bb)
    }

    fn grad(&self, w: &CVec3) -> CVec3 {
        let (a, b) = self.coordinates(w);
        let (aa, bb) = (a.norm_sqr(), b.norm_sqr());
        let den = (aa + bb) * (aa + bb);
        (self.da.scale(a * (2.0 * bb)) - self.db.scale(b * (2.0 * aa))).scale_re(1.0 / den)
    }
}

/// A sampled level circle of `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelLoop {
    pub h_level: f64,
    pub samples: Vec<ProjectivePoint>,
    /// `arg z` of each sample.
    pub angles: Vec<f64>,
    pub closed: bool,
}

/// Traces the level set `{h = level}` with `n` points: an explicit circle in
/// the Mobius coordinate, or the Hamiltonian flow of `h` in Symbol mode.
pub fn trace_loop(h: &BaseMorseFunction, level: f64, n: usize, tol: &crate::Tolerances) -> Result<LevelLoop> {
    if !(level > -1.0 && level < 1.0) {
        return Err(Error::LevelOutOfRange { level, min: -1.0, max: 1.0 });
    }
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let r = sqrt((1.0 + level) / (1.0 - level));
    let start = h.point_at(Some(C64::new(r, 0.0)))?;
    let mut samples = Vec::with_capacity(n);
    let closed;
    match h.mode {
        HeightMode::Mobius => {
            for m in 0..n {
                let phi = TAU * m as f64 / n as f64;
                samples.push(h.point_at(Some(C64::from_polar(r, phi)))?);
            }
            closed = true;
        }
        HeightMode::Symbol => {
            let sym = h.as_symbol();
            let period = PI / 2.0;
            let dt = period / n as f64;
            let mut w = start;
            samples.push(w);
            for _ in 1..n {
                w = crate::dynamics::flow_base(&sym, &w, dt, tol)?;
                samples.push(w);
            }
            let back = crate::dynamics::flow_base(&sym, &w, dt, tol)?;
            closed = back.distance(&start) < 1e-8;
        }
    }
    let angles = samples.iter().map(|p| h.angle(&p.coords())).collect();
    Ok(LevelLoop { h_level: level, samples, angles, closed })
}

impl BaseMorseFunction {
    /// The Hermitian form `a a^dag - b b^dag` (orthonormal `a`, `b`) realising a
    /// Symbol-mode height on `CP^2_w`.
    pub fn as_symbol(&self) -> crate::dynamics::SymbolFunction {
        let a = self.max_point.coords();
        let b = self.min_point.coords();
        let m = crate::linalg::CMat3::outer(&a, &a).add(&crate::linalg::CMat3::outer(&b, &b).scale(C64::new(-1.0, 0.0)));
        crate::dynamics::SymbolFunction {
            matrix_x: m,
            matrix_y: crate::linalg::CMat3::ZERO,
            defined_on: crate::dynamics::Domain::BaseCP1w,
        }
    }
}

/// Target moment values `mu = |x|^2 - |y|^2` (componentwise, unit reps) for
/// given integral values; `F = c + lx . mu` on the surface.
pub fn target_mu(ip: &IntegralPair, c1: f64, c2: f64) -> Result<[f64; 3]> {
    let (k1, k2) = ip.balance_constants().ok_or(Error::InvalidParameter("integrals must be balanced"))?;
    let l1 = ip.f1.matrix_x.diagonal_re();
    let l2 = ip.f2.matrix_x.diagonal_re();
    let a = vec![l1.to_vec(), l2.to_vec(), vec![1.0, 1.0, 1.0]];
    let m = solve_real(a, vec![c1 - k1, c2 - k2, 0.0]).ok_or(Error::InvalidParameter("integrals are not independent"))?;
    Ok([m[0], m[1], m[2]])
}

/// Fibre point over `w` with `x = e^u` real positive (`u0 = 0`) and `y = w / x`.
pub fn fibre_point(w: &CVec3, u: &[f64; 2]) -> Pair {
    let x = CVec3::real(1.0, exp(u[0]), exp(u[1]));
    let y = CVec3([w.0[0], w.0[1] * exp(-u[0]), w.0[2] * exp(-u[1])]);
    Pair::new(x.normalized(), y.normalized())
}

fn mu_of(w: &CVec3, u: &[f64; 2]) -> ([f64; 3], [f64; 3]) {
    let e = [1.0, exp(2.0 * u[0]), exp(2.0 * u[1])];
    let f = [w.0[0].norm_sqr(), w.0[1].norm_sqr() * exp(-2.0 * u[0]), w.0[2].norm_sqr() * exp(-2.0 * u[1])];
    let se: f64 = e.iter().sum();
    let sf: f64 = f.iter().sum();
    (core::array::from_fn(|k| e[k] / se), core::array::from_fn(|k| f[k] / sf))
}

/// Finds the point over the generic base point `p` with `f1 = c1`, `f2 = c2`
/// by damped Newton descent on a strictly convex potential, starting at `u`.
pub fn seed_point_from(s: &Structure, p: &ProjectivePoint, c1: f64, c2: f64, start: [f64; 2]) -> Result<FlagPoint> {
    let class = classify_fiber_point(p);
    if class != FiberClass::Generic {
        return Err(Error::SingularFiberPoint(p.coords().0.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)));
    }
    let mstar = target_mu(&s.integrals, c1, c2)?;
    let w = p.coords();
    let potential = |u: &[f64; 2]| -> f64 {
        let e = 1.0 + exp(2.0 * u[0]) + exp(2.0 * u[1]);
        let f = w.0[0].norm_sqr() + w.0[1].norm_sqr() * exp(-2.0 * u[0]) + w.0[2].norm_sqr() * exp(-2.0 * u[1]);
        0.5 * ln(e) + 0.5 * ln(f) - mstar[1] * u[0] - mstar[2] * u[1]
    };
    let mut u = start;
    let mut converged = false;
    for _ in 0..200 {
        let (pe, pf) = mu_of(&w, &u);
        let g = [pe[1] - pf[1] - mstar[1], pe[2] - pf[2] - mstar[2]];
        let gn = sqrt(g[0] * g[0] + g[1] * g[1]);
        if gn < 1e-14 {
            converged = true;
            break;
        }
        // Hessian of the potential: 2 (diag(pe) - pe pe^T) + 2 (diag(pf) - pf pf^T) on indices 1, 2.
        let hm = |a: usize, b: usize| {
            let d = if a == b { pe[a] + pf[a] } else { 0.0 };
            2.0 * (d - pe[a] * pe[b] - pf[a] * pf[b])
        };
        let hmat = [[hm(1, 1), hm(1, 2)], [hm(2, 1), hm(2, 2)]];
        let det = hmat[0][0] * hmat[1][1] - hmat[0][1] * hmat[1][0];
        let step = if det > 1e-300 {
            [
                -(hmat[1][1] * g[0] - hmat[0][1] * g[1]) / det,
                -(-hmat[1][0] * g[0] + hmat[0][0] * g[1]) / det,
            ]
        } else {
            [-g[0], -g[1]]
        };
        let phi0 = potential(&u);
        let mut lam = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = [u[0] + lam * step[0], u[1] + lam * step[1]];
            let (ce, cf) = mu_of(&w, &cand);
            let cg = [ce[1] - cf[1] - mstar[1], ce[2] - cf[2] - mstar[2]];
            // Near the minimum the potential is flat to rounding, so a drop of
            // the gradient norm also accepts the step.
            let sufficient = potential(&cand) <= phi0 - 1e-4 * lam * (g[0] * -step[0] + g[1] * -step[1]).max(0.0);
            if sufficient || sqrt(cg[0] * cg[0] + cg[1] * cg[1]) < 0.5 * gn || lam < 1e-12 {
                u = cand;
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if !moved || u[0].abs() > 60.0 || u[1].abs() > 60.0 {
            break;
        }
    }
    if !converged {
        return Err(no_solution(s));
    }
    let q = fibre_point(&w, &u);
    let fp = s.surface.project(&q.x, &q.y, &s.tol)?;
    let (v1, v2) = s.integrals.values(&fp.reps());
    let psi_err = psi(&fp)?.distance(p);
    if (v1 - c1).abs() > 1e-9 || (v2 - c2).abs() > 1e-9 || psi_err > 1e-9 {
        return Err(no_solution(s));
    }
    Ok(fp)
}

fn no_solution(s: &Structure) -> Error {
    let verts = hexagon_vertices(&s.integrals);
    let (mut a, mut b, mut c, mut d) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in verts.iter() {
        a = a.min(v.value.0);
        b = b.max(v.value.0);
        c = c.min(v.value.1);
        d = d.max(v.value.1);
    }
    Error::NoSolution { c1_min: a, c1_max: b, c2_min: c, c2_max: d }
}

/// [`seed_point_from`] started at `u = 0`.
pub fn seed_point(s: &Structure, p: &ProjectivePoint, c1: f64, c2: f64) -> Result<FlagPoint> {
    seed_point_from(s, p, c1, c2, [0.0, 0.0])
}

/// Seeds from `n` random starting points.
pub fn seed_point_multistart(
    s: &Structure,
    p: &ProjectivePoint,
    c1: f64,
    c2: f64,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<FlagPoint>> {
    (0..n)
        .map(|_| {
            let u = [2.0 * gaussian(rng), 2.0 * gaussian(rng)];
            seed_point_from(s, p, c1, c2, u)
        })
        .collect()
}

/// Normal form of a point modulo the diagonal torus: `x` made real positive.
/// Points of one `(f1, f2)` torus in a generic fibre share the normal form.
pub fn torus_normal_form(p: &Pair) -> Pair {
    let mut x = p.x;
    let mut y = p.y;
    for k in 0..3 {
        let a = x.0[k].norm();
        if a > 1e-300 {
            let ph = x.0[k] / a;
            x.0[k] = C64::new(a, 0.0);
            y.0[k] *= ph;
        }
    }
    let yc = crate::geometry::canonical_unit(y.normalized());
    Pair::new(x.normalized(), yc)
}

/// Distance between the torus orbits through `p` and `q`.
pub fn torus_orbit_distance(p: &Pair, q: &Pair) -> f64 {
    let a = torus_normal_form(p);
    let b = torus_normal_form(q);
    (a - b).norm()
}

/// Smooth or collapsed 3-torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberType {
    Smooth,
    Collapsed,
}

/// One grid sample of a torus.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSample {
    pub loop_index: usize,
    pub angle_indices: (usize, usize),
    pub point: FlagPoint,
    /// `(X_{f1}, X_{f2}, lift of X_h)`.
    pub frame: [TangentVector; 3],
}

/// Sampled Lagrangian 3-torus `union_{p in loop} T^{c1,c2}_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusFiber {
    pub level_loop: LevelLoop,
    pub c1: f64,
    pub c2: f64,
    pub samples: Vec<TorusSample>,
    pub fiber_type: FiberType,
    pub periods: (f64, f64),
    /// Largest `|f_i - c_i|` and distance of `psi` to the loop sample.
    pub max_integral_residual: f64,
    pub max_base_residual: f64,
    /// Smallest third singular value of the frames.
    pub min_frame_singular_value: f64,
    /// Distance between the torus reached after transport around the loop
    /// and the starting torus.
    pub holonomy_defect: f64,
    /// Loop positions skipped because they fall inside the collapse exclusion.
    pub skipped_loop_indices: Vec<usize>,
}

/// Resolution of a torus grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusResolution {
    pub loop_points: usize,
    pub angle1: usize,
    pub angle2: usize,
}

impl Default for TorusResolution {
    fn default() -> Self {
        TorusResolution { loop_points: 64, angle1: 32, angle2: 32 }
    }
}

/// Transport of a point along the loop: flow of the horizontal lift of the
/// rotation `z -> e^{is} z` of the base for angle `dphi`.
pub fn transport(s: &Structure, h: &BaseMorseFunction, p: &FlagPoint, dphi: f64) -> Result<FlagPoint> {
    flow_field(p, 0.0, dphi, &s.surface, &s.tol, |_, q| {
        let w = psi(q)?;
        let v = h.rotation_field(&w);
        s.lift_closed_form(q, &v)
    })
}

/// `(X_{f1}, X_{f2}, lift of X_h)` at a point.
pub fn natural_frame(s: &Structure, h: &BaseMorseFunction, p: &FlagPoint) -> Result<[TangentVector; 3]> {
    let w = psi(p)?;
    let xh = h.field(&w);
    let lift = s.horizontal_lift(p, &xh)?;
    Ok([s.x1(p), s.x2(p), lift.lifted])
}

/// Builds the torus grid: seed at the first loop point, sweep the two angles
/// with the flows of `f1` and `f2`, and move between loop points with the
/// lifted rotation field.
pub fn sample_torus(
    s: &Structure,
    h: &BaseMorseFunction,
    lp: &LevelLoop,
    c1: f64,
    c2: f64,
    res: TorusResolution,
) -> Result<TorusFiber> {
    let fiber_type = classify_torus(s, h, lp, c1, c2);
    let n = lp.samples.len();
    let excluded = collapse_points(h, lp);
    let mut periods = None;
    let mut out = Vec::with_capacity(n * res.angle1 * res.angle2);
    let mut skipped = Vec::new();
    let mut seed: Option<FlagPoint> = None;
    let mut first_seed: Option<FlagPoint> = None;
    let (mut max_int, mut max_base, mut min_sv) = (0.0f64, 0.0f64, f64::INFINITY);
    for m in 0..n {
        let base = lp.samples[m];
        if excluded.iter().any(|e| e.distance(&base) < s.tol.collapse_exclusion) {
            skipped.push(m);
            seed = None;
            continue;
        }
        let current = match seed {
            Some(prev) => {
                let dphi = crate::math::wrap_angle(lp.angles[m] - lp.angles[m - 1]);
                transport(s, h, &prev, dphi)?
            }
            None => seed_point(s, &base, c1, c2)?,
        };
        if first_seed.is_none() && m == 0 {
            first_seed = Some(current);
        }
        let (t1, t2) = match periods {
            Some(p) => p,
            None => {
                let a = crate::dynamics::estimate_period(&s.integrals.f1, &current, 8.0, &s.surface, &s.tol)?;
                let b = crate::dynamics::estimate_period(&s.integrals.f2, &current, 8.0, &s.surface, &s.tol)?;
                periods = Some((a, b));
                (a, b)
            }
        };
        let mut row = current;
        for a1 in 0..res.angle1 {
            if a1 > 0 {
                row = flow_on(&s.integrals.f1, &row, 0.0, t1 / res.angle1 as f64, &s.surface, &s.tol, false)?.end;
            }
            let mut q = row;
            for a2 in 0..res.angle2 {
                if a2 > 0 {
                    q = flow_on(&s.integrals.f2, &q, 0.0, t2 / res.angle2 as f64, &s.surface, &s.tol, false)?.end;
                }
                let frame = natural_frame(s, h, &q)?;
                let (v1, v2) = s.integrals.values(&q.reps());
                max_int = max_int.max((v1 - c1).abs()).max((v2 - c2).abs());
                max_base = max_base.max(psi(&q)?.distance(&base));
                let cols: Vec<Vec<f64>> = frame.iter().map(|f| f.to_real().to_vec()).collect();
                let sv = singular_values(&cols);
                min_sv = min_sv.min(sv[0] / sv[2].max(1e-300));
                out.push(TorusSample { loop_index: m, angle_indices: (a1, a2), point: q, frame });
            }
        }
        seed = Some(current);
    }
    let holonomy_defect = match (seed, first_seed) {
        (Some(last), Some(first)) if skipped.is_empty() => {
            let dphi = crate::math::wrap_angle(lp.angles[0] - lp.angles[n - 1]);
            let back = transport(s, h, &last, dphi)?;
            torus_orbit_distance(&back.reps(), &first.reps())
        }
        _ => 0.0,
    };
    if out.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    Ok(TorusFiber {
        level_loop: lp.clone(),
        c1,
        c2,
        samples: out,
        fiber_type,
        periods: periods.unwrap_or((PI, PI)),
        max_integral_residual: max_int,
        max_base_residual: max_base,
        min_frame_singular_value: min_sv,
        holonomy_defect,
        skipped_loop_indices: skipped,
    })
}

/// Singular, non-critical base points on the loop. Their fibres carry the
/// collapse circle (for collapsed labels) or are of `OneZero` type, where no
/// seed is attempted.
fn collapse_points(h: &BaseMorseFunction, lp: &LevelLoop) -> Vec<ProjectivePoint> {
    h.collapsed_levels()
        .into_iter()
        .filter(|(_, v)| (v - lp.h_level).abs() < 1e-9)
        .map(|(p, _)| p)
        .collect()
}

/// `max |omega(e_i, e_j)|` over samples and frame pairs, frames normalised.
pub fn lagrangian_residual(t: &TorusFiber) -> f64 {
    t.samples.iter().map(|smp| frame_residual(&smp.frame)).fold(0.0, f64::max)
}

/// `max |omega(e_i, e_j)|` for unit-normalised vectors.
pub fn frame_residual(frame: &[TangentVector]) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..frame.len() {
        for j in (i + 1)..frame.len() {
            let ni = frame[i].norm();
            let nj = frame[j].norm();
            if ni > 1e-300 && nj > 1e-300 {
                r = r.max(omega(&frame[i], &frame[j]).abs() / (ni * nj));
            }
        }
    }
    r
}

/// Image segment of the diagonal line `x_i = y_i = 0`, from sampling the line.
pub fn sing_segment(ip: &IntegralPair, i: usize) -> ((f64, f64), (f64, f64)) {
    let (j, k) = match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut pts = Vec::with_capacity(201);
    for m in 0..=200 {
        let th = 0.5 * PI * m as f64 / 200.0;
        let mut x = CVec3::ZERO;
        let mut y = CVec3::ZERO;
        x.0[j] = C64::new(crate::math::cos(th), 0.0);
        x.0[k] = C64::new(crate::math::sin(th), 0.0);
        y.0[j] = -x.0[k];
        y.0[k] = x.0[j];
        pts.push(ip.values(&Pair::new(x, y)));
    }
    let mut best = (pts[0], pts[0], -1.0);
    for a in &pts {
        for b in &pts {
            let d = (a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1);
            if d > best.2 {
                best = (*a, *b, d);
            }
        }
    }
    let (a, b) = if best.0 <= best.1 { (best.0, best.1) } else { (best.1, best.0) };
    (a, b)
}

/// Euclidean distance from `c` to the segment `[a, b]`.
pub fn distance_to_segment(c: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((c.0 - a.0) * dx + (c.1 - a.1) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let (px, py) = (a.0 + t * dx, a.1 + t * dy);
    sqrt((c.0 - px) * (c.0 - px) + (c.1 - py) * (c.1 - py))
}

/// Collapsed iff the loop passes through a singular base point that is not
/// critical and `(c1, c2)` lies on the image of that fibre's diagonal line.
pub fn classify_torus(s: &Structure, h: &BaseMorseFunction, lp: &LevelLoop, c1: f64, c2: f64) -> FiberType {
    for (p, v) in h.collapsed_levels() {
        if (v - lp.h_level).abs() > 1e-9 {
            continue;
        }
        if let FiberClass::OneZero(i) = classify_fiber_point(&p) {
            let (a, b) = sing_segment(&s.integrals, i);
            if distance_to_segment((c1, c2), a, b) < 1e-6 {
                return FiberType::Collapsed;
            }
        }
    }
    FiberType::Smooth
}

/// A torus-fixed flag and its image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HexagonVertex {
    /// `x = e_i` on the line spanned by `e_i`, `e_j`.
    pub point_index: usize,
    pub line_through: usize,
    pub value: (f64, f64),
}

/// Images of the six torus-fixed flags `x = e_i`, `y = e_k` (`k` not `i`).
pub fn hexagon_vertices(ip: &IntegralPair) -> Vec<HexagonVertex> {
    let mut v = Vec::with_capacity(6);
    for i in 0..3 {
        for k in 0..3 {
            if k == i {
                continue;
            }
            let j = 3 - i - k;
            let p = Pair::new(CVec3::basis(i), CVec3::basis(k));
            v.push(HexagonVertex { point_index: i, line_through: j, value: ip.values(&p) });
        }
    }
    v.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(core::cmp::Ordering::Equal));
    v
}

/// Convex hull (counter-clockwise, no collinear points) by the monotone chain.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], *p) <= 1e-12 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], *p) <= 1e-12 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Signed distance to the boundary of a counter-clockwise convex polygon
/// (positive inside).
pub fn hull_depth(hull: &[(f64, f64)], c: (f64, f64)) -> f64 {
    let n = hull.len();
    let mut depth = f64::INFINITY;
    for e in 0..n {
        let a = hull[e];
        let b = hull[(e + 1) % n];
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let l = sqrt(dx * dx + dy * dy);
        depth = depth.min(((c.1 - a.1) * dx - (c.0 - a.0) * dy) / l);
    }
    depth
}

/// Values, hull and labelled vertices of a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentImage {
    pub values: Vec<(f64, f64)>,
    pub hull: Vec<(f64, f64)>,
    pub vertices: Vec<HexagonVertex>,
}

/// `(F1, F2)` of each sample, their hull and the torus-fixed images.
pub fn moment_image(ip: &IntegralPair, samples: &[FlagPoint]) -> Result<MomentImage> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let values: Vec<(f64, f64)> = samples.iter().map(|p| ip.values(&p.reps())).collect();
    let hull = convex_hull(&values);
    Ok(MomentImage { values, hull, vertices: hexagon_vertices(ip) })
}

/// Fibre points near the boundary divisor of `h` grouped by which coordinate
/// vanishes; returns the number of distinct branches `{x_i = 0}`, `{y_i = 0}`.
pub fn divisor_branches(s: &Structure, h: &BaseMorseFunction, samples: &[FlagPoint], radius: f64) -> usize {
    let crit = [h.max_point, h.min_point];
    let mut seen: Vec<(bool, usize)> = Vec::new();
    for p in samples {
        let w = psi_raw(&p.reps());
        let Ok(wp) = ProjectivePoint::from_vec(w) else { continue };
        for c in crit.iter() {
            if wp.distance(c) > radius {
                continue;
            }
            if let FiberClass::OneZero(i) = classify_fiber_point(c) {
                let r = p.reps();
                let (xa, ya) = (r.x.0[i].norm(), r.y.0[i].norm());
                let tag = if xa < ya { (true, i) } else { (false, i) };
                if xa.min(ya) < sqrt(radius) && !seen.contains(&tag) {
                    seen.push(tag);
                }
            }
        }
    }
    let _ = s;
    seen.len()
}

/// Whether the sampled points of the loop lie on the prescribed level.
pub fn loop_level_residual(h: &BaseMorseFunction, lp: &LevelLoop) -> f64 {
    lp.samples.iter().map(|p| (h.value(&p.coords()) - lp.h_level).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Tolerances;

    #[test]
    fn mobius_height_extremes() {
        let h = default_height();
        assert!((h.value(&h.max_point.coords()) - 1.0).abs() < 1e-14);
        assert!((h.value(&h.min_point.coords()) + 1.0).abs() < 1e-14);
        let third = ProjectivePoint::from_real(1.0, -1.0, 0.0).unwrap();
        assert!(h.value(&third.coords()).abs() < 1e-14);
    }

    #[test]
    fn symbol_height_complement() {
        let h = symbol_height();
        let b = ProjectivePoint::from_real(2.0, -1.0, -1.0).unwrap();
        assert!(h.min_point.distance(&b) < 1e-12);
        assert!(h.warning.is_none());
        let a = ProjectivePoint::from_real(0.0, 1.0, -1.0).unwrap();
        let other = ProjectivePoint::from_real(1.0, 0.0, -1.0).unwrap();
        let h2 = make_height(&a, &other, HeightMode::Symbol, &flag_line()).unwrap();
        assert!(h2.warning.is_some());
        assert!(matches!(make_height(&a, &a, HeightMode::Mobius, &flag_line()), Err(Error::DegeneratePair)));
    }

    #[test]
    fn loops_stay_on_level() {
        let tol = Tolerances::default();
        for h in [default_height(), symbol_height()] {
            let lp = trace_loop(&h, 0.3, 64, &tol).unwrap();
            assert!(lp.closed);
            assert!(loop_level_residual(&h, &lp) < 1e-9);
        }
        assert!(matches!(trace_loop(&default_height(), 1.0, 8, &tol), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn target_mu_reproduces_values() {
        let ip = crate::dynamics::make_default_integrals();
        let m = target_mu(&ip, 2.0, 3.0).unwrap();
        assert!(m.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn hexagon_matches_known_vertices() {
        let ip = crate::dynamics::make_default_integrals();
        let v: Vec<(f64, f64)> = hexagon_vertices(&ip).iter().map(|v| v.value).collect();
        assert_eq!(v, vec![(0.0, 0.0), (1.0, 1.0), (1.0, 2.0), (3.0, 4.0), (3.0, 5.0), (4.0, 6.0)]);
    }
}
