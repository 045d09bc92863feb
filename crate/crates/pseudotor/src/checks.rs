//! The verification suite: one function per acceptance criterion, each
//! returning a [`Check`] with the statistics it is judged on.

use pseudotor_core::degeneration::{
    cutoff_g, default_g, diagonal_moment_check, distance_to_delta, toric_h0, transport_point, IsotopyKind,
};
use pseudotor_core::dynamics::{poisson, surface_field, Domain, IntegralPair, SymbolFunction};
use pseudotor_core::error::Error as CoreError;
use pseudotor_core::fibration::{
    classify_torus, convex_hull, frame_residual, hexagon_vertices, hull_depth, lagrangian_residual, sample_torus,
    sing_segment, trace_loop, BaseMorseFunction, FiberType, TorusFiber, TorusResolution,
};
use pseudotor_core::flagconn::{
    control_generator, decreases_linearly, distribution_generators, dpi_relation_check, frobenius_study,
    horizontal_distribution, orbit_psi_defect, FlagAsPair,
};
use pseudotor_core::geometry::TangentVector;
use pseudotor_core::linalg::{CMat3, CVec3, C64};
use pseudotor_core::pseudotoric::{d_psi, BaseFunction, flag_base_normal, psi_raw, singular_base_points, BaseSetLine, LineKind, Structure};
use pseudotor_core::sampling::{complex_gaussian, random_cvec3, random_flag, random_hermitian, random_tangent};
use pseudotor_core::special::{specialty_report, BoundaryDivisor, ResidueForm};
use pseudotor_core::{FlagPoint, ProjectivePoint, Surface, Tolerances};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;

use crate::config::{IsotopyKindName, ModeName, RunConfig};
use crate::error::CliError;
use crate::report::{Check, VerificationReport};

/// Configuration resolved into core objects.
pub struct Context {
    pub cfg: RunConfig,
    pub integrals: IntegralPair,
    pub tol: Tolerances,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        let integrals = cfg.integrals()?;
        let tol = cfg.core_tolerances();
        Ok(Context { cfg, integrals, tol })
    }

    /// Independent stream per check, so results do not depend on which
    /// checks ran before.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream(stream);
        r
    }

    pub fn flags(&self, n: usize, stream: u64) -> Vec<FlagPoint> {
        let mut rng = self.rng(stream);
        (0..n).map(|_| random_flag(&mut rng)).collect()
    }

    pub fn structure(&self) -> Structure {
        Structure::new(Surface::flag(), self.integrals, self.tol)
    }
}

pub const CRITERIA: [&str; 12] = [
    "involution",
    "fiber_preservation",
    "image_on_line",
    "compatibility",
    "lagrangian_fibers",
    "singular_census",
    "specialty",
    "anticanonical_degree",
    "isotopy",
    "toric_degeneration",
    "connection",
    "moment_geometry",
];

/// Runs criterion `index` (0-based).
type Runner = fn(&Context, &mut Check) -> Result<(), CoreError>;

pub fn run_criterion(ctx: &Context, index: usize) -> Check {
    let (id, desc, anchor, f): (&str, &str, &str, Runner) = match index {
        0 => (CRITERIA[0], "Poisson bracket of the two integrals at random flags", "integrals in involution", involution),
        1 => (CRITERIA[1], "d psi kills the Hamiltonian fields; unbalanced control does not", "balance condition", fiber_preservation),
        2 => (CRITERIA[2], "psi lands on the line w0 + w1 + w2 = 0", "image of psi is a line", image_on_line),
        3 => (CRITERIA[3], "horizontal lift of X_h is a positive multiple of X_{h o psi}", "lift compatibility", compatibility),
        4 => (CRITERIA[4], "sampled 3-tori are Lagrangian; X_f, I X_f is not", "Lagrangian fibres", lagrangian),
        5 => (CRITERIA[5], "three singular base points and the smooth/smooth/collapsed table", "singular fibres", singular_census),
        6 => (CRITERIA[6], "phase of the residue form is constant on the fibration", "special Lagrangian fibration", specialty),
        7 => (CRITERIA[7], "section of D scales as lambda^2 mu^2", "anticanonical divisor", anticanonical_degree),
        8 => (CRITERIA[8], "Hamiltonian transport of a torus into F_0", "isotopy to the degenerate quadric", isotopy),
        9 => (CRITERIA[9], "toric structure of F_0 and diagonal moment degeneracy", "toric degeneration", toric_degeneration),
        10 => (CRITERIA[10], "projection relation, integrability and torus orbits", "singular connection", connection),
        _ => (CRITERIA[11], "hexagon vertices, B on the boundary, Sing inside", "moment polygon", moment_geometry),
    };
    let mut c = Check::new(id, desc, anchor);
    if let Err(e) = f(ctx, &mut c) {
        c.fail_with(e);
    }
    c
}

pub fn run_all(ctx: &Context) -> VerificationReport {
    VerificationReport::new((0..CRITERIA.len()).map(|i| run_criterion(ctx, i)).collect())
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn collect<T: Send>(v: Vec<Result<T, CoreError>>) -> Result<Vec<T>, CoreError> {
    v.into_iter().collect()
}

fn involution(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let ip = ctx.integrals;
    let flags = ctx.flags(ctx.cfg.sampling.flags, 1);
    let worst = max_of(flags.par_iter().map(|p| poisson(&ip.f1, &ip.f2, p).abs()).collect::<Vec<_>>());
    c.below("max_bracket", worst, 1e-8);
    Ok(())
}

fn dpsi_norm(f: &SymbolFunction, p: &FlagPoint) -> Result<f64, CoreError> {
    let v = surface_field(f, &Surface::flag(), 0.0, &p.reps());
    Ok(d_psi(p, &v)?.norm())
}

fn fiber_preservation(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let ip = ctx.integrals;
    let flags = ctx.flags(ctx.cfg.sampling.flags, 2);
    let mut ly = ip.f1.matrix_y.diagonal_re();
    ly[2] += 0.5;
    let unbalanced = SymbolFunction::diagonal(ip.f1.matrix_x.diagonal_re(), ly);
    let rows = collect(
        flags
            .par_iter()
            .map(|p| Ok((dpsi_norm(&ip.f1, p)?.max(dpsi_norm(&ip.f2, p)?), dpsi_norm(&unbalanced, p)?)))
            .collect(),
    )?;
    let worst = max_of(rows.iter().map(|r| r.0));
    let frac = rows.iter().filter(|r| r.1 > 1e-3).count() as f64 / rows.len() as f64;
    c.below("max_dpsi", worst, 1e-8).at_least("control_fraction", frac, 0.9);
    Ok(())
}

fn image_on_line(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let flags = ctx.flags(ctx.cfg.sampling.flags, 3);
    let n = flag_base_normal();
    let worst = max_of(flags.iter().map(|p| {
        let w = psi_raw(&p.reps());
        n.dot(&w).norm() / w.norm()
    }));
    c.below("max_line_residual", worst, 1e-10);
    Ok(())
}

fn compatibility(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let s = ctx.structure();
    let mut rng = ctx.rng(4);
    let hs: Vec<SymbolFunction> = (0..3)
        .map(|_| SymbolFunction::on_base(random_hermitian(&mut rng), Domain::BaseCP1w))
        .collect::<Result<_, _>>()?;
    let flags = ctx.flags(ctx.cfg.sampling.compat_flags, 5);
    let rows = collect(
        flags
            .par_iter()
            .flat_map_iter(|p| hs.iter().map(move |h| s.compatibility_check(p, h)))
            .collect(),
    )?;
    let res = max_of(rows.iter().map(|r| r.1));
    let tau = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    c.below("max_collinearity", res, 1e-6).above("min_tau", tau, 0.0);
    Ok(())
}

/// Tori over the configured grid, sampled in parallel.
pub fn sample_grid(
    s: &Structure,
    h: &BaseMorseFunction,
    grid: &[(f64, f64, f64)],
    res: TorusResolution,
    tol: &Tolerances,
) -> Result<Vec<TorusFiber>, CoreError> {
    collect(
        grid.par_iter()
            .map(|(level, c1, c2)| {
                let lp = trace_loop(h, *level, res.loop_points, tol)?;
                sample_torus(s, h, &lp, *c1, *c2, res)
            })
            .collect(),
    )
}

fn lagrangian(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let h = ctx.cfg.height().map_err(|_| CoreError::InvalidParameter("height"))?;
    let tori = sample_grid(&ctx.structure(), &h, &ctx.cfg.fibers.grid(), ctx.cfg.fibers.resolution(), &ctx.tol)?;
    let smooth: Vec<&TorusFiber> = tori.iter().filter(|t| t.fiber_type == FiberType::Smooth).collect();
    let worst = max_of(smooth.iter().map(|t| lagrangian_residual(t)));
    let control = smooth
        .iter()
        .flat_map(|t| t.samples.iter().map(|s| frame_residual(&[s.frame[0], s.frame[0].times_i()])))
        .fold(f64::INFINITY, f64::min);
    c.at_least("smooth_tori", smooth.len() as f64, 10.0).below("max_lagrangian", worst, 1e-6).above("min_control", control, 1e-2);
    Ok(())
}

fn singular_census(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let pts = singular_base_points(&flag_base_normal());
    c.equal("singular_points", pts.len() as f64, 3.0);
    let h = ctx.cfg.height().map_err(|_| CoreError::InvalidParameter("height"))?;
    let s = ctx.structure();
    let marked = ProjectivePoint::from_real(1.0, -1.0, 0.0)?;
    let level = h.value(&marked.coords());
    let ((a1, a2), (b1, b2)) = sing_segment(&ctx.integrals, 2);
    let on = (0.5 * (a1 + b1), 0.5 * (a2 + b2));
    let off = (on.0, on.1 + 0.2);
    let away = if level < 0.5 { level + 0.3 } else { level - 0.3 };
    let n = ctx.cfg.fibers.loop_points;
    let through = trace_loop(&h, level, n, &ctx.tol)?;
    let avoiding = trace_loop(&h, away, n, &ctx.tol)?;
    let table = [
        (classify_torus(&s, &h, &avoiding, on.0, on.1), FiberType::Smooth),
        (classify_torus(&s, &h, &through, off.0, off.1), FiberType::Smooth),
        (classify_torus(&s, &h, &through, on.0, on.1), FiberType::Collapsed),
    ];
    let matches = table.iter().filter(|(got, want)| got == want).count();
    c.equal("table_matches", matches as f64, 3.0);
    Ok(())
}

fn normalized_tangent(p: &FlagPoint, rng: &mut ChaCha8Rng) -> TangentVector {
    let v = random_tangent(p, &Surface::flag(), rng);
    v.scale_re(1.0 / v.norm())
}

fn specialty(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let h = ctx.cfg.height_in(ctx.cfg.height.specialty_mode).map_err(|_| CoreError::InvalidParameter("height"))?;
    let form = ResidueForm::new(BoundaryDivisor::of_height(&h), Surface::flag())?;
    let mut rng = ctx.rng(7);
    let mut consistency: f64 = 0.0;
    for p in ctx.flags(100, 8) {
        let [u, v, w] = [0, 1, 2].map(|_| normalized_tangent(&p, &mut rng));
        match form.chart_consistency(&p, &u, &v, &w) {
            Ok(r) => consistency = consistency.max(r),
            Err(CoreError::OnDivisor(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    c.below("chart_consistency", consistency, 1e-7);
    let tori = sample_grid(&ctx.structure(), &h, &ctx.cfg.fibers.grid(), ctx.cfg.fibers.resolution(), &ctx.tol)?;
    let rep = specialty_report(&form, &h, &tori, ctx.tol.divisor_exclusion)?;
    c.at_least("fibers", rep.per_fiber.len() as f64, 10.0)
        .below("max_fiber_std", rep.max_fiber_std, ctx.tol.phase_tol)
        .below("cross_fiber_dev", rep.cross_fiber_dev, ctx.tol.phase_tol);
    let wrong = BoundaryDivisor::from_factors(
        [ProjectivePoint::from_real(0.0, 1.0, -1.0)?, ProjectivePoint::from_real(1.0, -1.0, 0.0)?],
        [CVec3::basis(0), CVec3::basis(2)],
    );
    let ctl = specialty_report(&ResidueForm::new(wrong, Surface::flag())?, &h, &tori, ctx.tol.divisor_exclusion)?;
    c.above("control_fiber_std", ctl.max_fiber_std, 0.1);
    Ok(())
}

fn anticanonical_degree(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let h = ctx.cfg.height().map_err(|_| CoreError::InvalidParameter("height"))?;
    let d = BoundaryDivisor::of_height(&h);
    let mut rng = ctx.rng(9);
    let mut worst: f64 = 0.0;
    for p in ctx.flags(100, 10) {
        let r = p.reps();
        let (l, m) = (complex_gaussian(&mut rng), complex_gaussian(&mut rng));
        let base = d.section_raw(&r.x, &r.y);
        let scaled = d.section_raw(&r.x.scale(l), &r.y.scale(m));
        let expect = base * l * l * m * m;
        worst = worst.max((scaled - expect).norm() / expect.norm());
    }
    c.below("max_scaling_defect", worst, 1e-13);
    Ok(())
}

/// Evenly spaced points of a sampled torus.
pub fn torus_cloud(t: &TorusFiber, n: usize) -> Vec<FlagPoint> {
    let step = (t.samples.len() / n.max(1)).max(1);
    t.samples.iter().step_by(step).take(n).map(|s| s.point).collect()
}

fn isotopy_torus(ctx: &Context) -> Result<TorusFiber, CoreError> {
    let h = ctx.cfg.height().map_err(|_| CoreError::InvalidParameter("height"))?;
    let iso = &ctx.cfg.isotopy;
    let res = TorusResolution { loop_points: 16, angle1: 8, angle2: 8 };
    let lp = trace_loop(&h, iso.level, res.loop_points, &ctx.tol)?;
    sample_torus(&ctx.structure(), &h, &lp, iso.label[0], iso.label[1], res)
}

pub fn isotopy_kind(k: IsotopyKindName) -> IsotopyKind {
    match k {
        IsotopyKindName::SurfaceTracking => IsotopyKind::SurfaceTracking,
        IsotopyKindName::Pullback => IsotopyKind::Pullback,
    }
}

/// Maximal residuals `(f0, integrals, line, omega)` of the transported cloud.
pub fn transport_cloud(ctx: &Context, cloud: &[FlagPoint], r1: f64, r2: f64) -> Result<[f64; 4], CoreError> {
    let g = cutoff_g(default_g(), isotopy_kind(ctx.cfg.isotopy.kind), r1, r2)?;
    let time = g.rotation.time;
    let rows = collect(cloud.par_iter().map(|p| transport_point(&g, &ctx.integrals, time, p, &ctx.tol)).collect())?;
    Ok([
        max_of(rows.iter().map(|r| r.1.f0_residual)),
        max_of(rows.iter().map(|r| r.1.integral_change)),
        max_of(rows.iter().map(|r| r.1.line_residual)),
        max_of(rows.iter().map(|r| r.1.omega_change)),
    ])
}

fn isotopy(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let iso = &ctx.cfg.isotopy;
    let cloud = torus_cloud(&isotopy_torus(ctx)?, iso.points);
    let clearance = cloud.iter().map(|p| distance_to_delta(&p.reps())).fold(f64::INFINITY, f64::min);
    c.above("clearance_minus_r1", clearance - iso.r1, 0.0);
    let r = transport_cloud(ctx, &cloud, iso.r1, iso.r2)?;
    c.below("f0_residual", r[0], 1e-5).below("integral_change", r[1], 1e-6).below("line_residual", r[2], 1e-6).below(
        "omega_change",
        r[3],
        1e-6,
    );
    let control_fails = match transport_cloud(ctx, &cloud, 2.0 * clearance, 0.5 * clearance) {
        Ok(r) => !(r[0] < 1e-5 && r[1] < 1e-6 && r[2] < 1e-6 && r[3] < 1e-6),
        Err(CoreError::EnteredCollar { .. }) => true,
        Err(e) => return Err(e),
    };
    c.truth("collar_control_fails", control_fails);
    Ok(())
}

fn toric_degeneration(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let h0 = toric_h0();
    c.equal("critical_pairing", h0.max_point.coords().hdot(&h0.min_point.coords()).norm(), 0.0);
    let s0 = Structure::new(Surface::deformed(C64::new(0.0, 0.0)), ctx.integrals, ctx.tol);
    let grid: Vec<(f64, f64, f64)> =
        [-0.5, 0.0, 0.5].iter().flat_map(|l| ctx.cfg.fibers.labels.iter().map(move |c| (*l, c[0], c[1]))).collect();
    let res = TorusResolution { loop_points: 16, angle1: 8, angle2: 8 };
    let tori = sample_grid(&s0, &h0, &grid, res, &ctx.tol)?;
    let smooth: Vec<&TorusFiber> = tori.iter().filter(|t| t.fiber_type == FiberType::Smooth).collect();
    c.at_least("smooth_tori", smooth.len() as f64, 3.0)
        .below("max_lagrangian", max_of(smooth.iter().map(|t| lagrangian_residual(t))), 1e-6);
    let h1 = SymbolFunction::on_base(CMat3::diag_re([1.0, 0.0, 0.0]), Domain::BaseCP2w)?;
    let h2 = SymbolFunction::on_base(CMat3::diag_re([0.0, 1.0, 0.0]), Domain::BaseCP2w)?;
    let mut rng = ctx.rng(11);
    let rep = diagonal_moment_check(&h1, &h2, &ctx.integrals, ctx.cfg.sampling.diagonal_samples, &mut rng)?;
    c.equal("false_positives", rep.false_positives as f64, 0.0)
        .equal("false_negatives", rep.false_negatives as f64, 0.0)
        .equal("boundary_components", rep.boundary_components.len() as f64, 6.0)
        .truth("components_degenerate", rep.components_degenerate);
    Ok(())
}

fn connection(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let ip = ctx.integrals;
    let flags: Vec<FlagAsPair> = ctx.flags(ctx.cfg.sampling.connection_flags, 12).iter().map(FlagAsPair::from_flag).collect();
    let mats = [ip.f1.matrix_x, ip.f2.matrix_x];
    let dpi = collect(
        flags
            .par_iter()
            .flat_map_iter(|f| mats.iter().map(move |a| dpi_relation_check(a, f).map(|r| r.residual)))
            .collect(),
    )?;
    c.below("max_dpi_residual", max_of(dpi), 1e-6);

    let gens = distribution_generators(&ip);
    let mut control = gens;
    control[3] = control_generator();
    let steps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let fl: Vec<FlagAsPair> = ctx.flags(ctx.cfg.sampling.frobenius_flags, 13).iter().map(FlagAsPair::from_flag).collect();
    let rows = collect(
        fl.par_iter()
            .map(|f| {
                horizontal_distribution(&ip, f, ctx.tol.rank_tol)?;
                Ok((frobenius_study(&gens, f, &steps)?, frobenius_study(&control, f, &steps)?))
            })
            .collect(),
    )?;
    let linear = rows.iter().filter(|r| decreases_linearly(&r.0, 1e-9)).count();
    c.equal("linear_decrease_flags", linear as f64, fl.len() as f64)
        .below("max_final_residual", max_of(rows.iter().map(|r| *r.0.last().unwrap())), 1e-4)
        .above("min_control_residual", rows.iter().map(|r| *r.1.last().unwrap()).fold(f64::INFINITY, f64::min), 1e-2);

    let mut rng = ctx.rng(14);
    let mut orbit: f64 = 0.0;
    for f in fl.iter() {
        let params: Vec<(C64, C64)> = (0..8).map(|_| (complex_gaussian(&mut rng), complex_gaussian(&mut rng))).collect();
        orbit = orbit.max(orbit_psi_defect(f, &params)?);
    }
    c.below("max_orbit_psi_defect", orbit, 1e-8);
    Ok(())
}

/// A random flag on one of the six lines of `B`.
pub fn random_on_base_line(l: &BaseSetLine, rng: &mut ChaCha8Rng) -> Result<FlagPoint, CoreError> {
    let (a, _, k) = l.indices;
    let mut v = random_cvec3(rng);
    match l.kind {
        LineKind::Xxy => {
            v.0[k] = C64::new(0.0, 0.0);
            FlagPoint::from_vecs(CVec3::basis(k), v, 1e-12)
        }
        LineKind::Xyy => {
            v.0[a] = C64::new(0.0, 0.0);
            FlagPoint::from_vecs(v, CVec3::basis(a), 1e-12)
        }
    }
}

/// A random flag on the diagonal line `x_i = y_i = 0`.
pub fn random_on_sing_line(i: usize, rng: &mut ChaCha8Rng) -> Result<FlagPoint, CoreError> {
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let mut x = random_cvec3(rng);
    x.0[i] = C64::new(0.0, 0.0);
    let mut y = CVec3::ZERO;
    y.0[j] = x.0[k];
    y.0[k] = -x.0[j];
    FlagPoint::from_vecs(x, y, 1e-12)
}

fn moment_geometry(ctx: &Context, c: &mut Check) -> Result<(), CoreError> {
    let ip = ctx.integrals;
    let expected = [(0.0, 0.0), (1.0, 1.0), (1.0, 2.0), (3.0, 4.0), (3.0, 5.0), (4.0, 6.0)];
    let got: Vec<(f64, f64)> = hexagon_vertices(&ip).iter().map(|v| v.value).collect();
    let vdev = if got.len() == expected.len() {
        max_of(got.iter().zip(expected.iter()).map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs())))
    } else {
        f64::INFINITY
    };
    c.below("vertex_deviation", vdev, 1e-9);
    let hull = convex_hull(&got);
    let mut rng = ctx.rng(15);
    let mut b_depth: f64 = 0.0;
    for l in BaseSetLine::all() {
        for _ in 0..50 {
            let p = random_on_base_line(&l, &mut rng)?;
            b_depth = b_depth.max(hull_depth(&hull, ip.values(&p.reps())).abs());
        }
    }
    let mut sing_depth = f64::INFINITY;
    for i in 0..3 {
        for _ in 0..50 {
            let p = random_on_sing_line(i, &mut rng)?;
            sing_depth = sing_depth.min(hull_depth(&hull, ip.values(&p.reps())));
        }
    }
    let flags = ctx.flags(ctx.cfg.sampling.moment_samples, 16);
    let inside = flags.iter().map(|p| hull_depth(&hull, ip.values(&p.reps()))).fold(f64::INFINITY, f64::min);
    c.below("max_b_boundary_distance", b_depth, 1e-9).above("min_sing_depth", sing_depth, 0.0).above("min_random_depth", inside, -1e-9);
    Ok(())
}

/// Mode name in reports.
pub fn mode_name(m: ModeName) -> &'static str {
    match m {
        ModeName::Mobius => "mobius",
        ModeName::Symbol => "symbol",
    }
}
