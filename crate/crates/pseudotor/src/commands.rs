//! The subcommands. Each returns `Ok(true)` when its checks pass.

use std::path::Path;

use pseudotor_core::degeneration::distance_to_delta;
use pseudotor_core::fibration::{
    hexagon_vertices, lagrangian_residual, moment_image, sample_torus, sing_segment, trace_loop, FiberType,
};
use pseudotor_core::special::{specialty_report, BoundaryDivisor, ResidueForm};
use pseudotor_core::Surface;
use serde::Serialize;

use crate::checks::{self, mode_name, Context};
use crate::error::CliError;
use crate::output::{write_csv, write_json};
use crate::report::VerificationReport;

fn pt3(v: &pseudotor_core::CVec3) -> [[f64; 2]; 3] {
    v.0.map(|z| [z.re, z.im])
}

pub fn verify(ctx: &Context, out: &Path, only: Option<&[usize]>) -> Result<VerificationReport, CliError> {
    let checks = match only {
        Some(ids) => ids.iter().map(|i| checks::run_criterion(ctx, *i)).collect(),
        None => (0..checks::CRITERIA.len()).map(|i| checks::run_criterion(ctx, i)).collect(),
    };
    let report = VerificationReport::new(checks);
    write_json(out, "report.json", "verification_report", ctx.cfg.seed, &report)?;
    Ok(report)
}

#[derive(Serialize)]
struct TorusDoc {
    mode: &'static str,
    h_level: f64,
    c1: f64,
    c2: f64,
    fiber_type: &'static str,
    periods: (f64, f64),
    lagrangian_residual: f64,
    max_integral_residual: f64,
    max_base_residual: f64,
    holonomy_defect: f64,
    min_frame_singular_value: f64,
    exclusion_radius: Option<f64>,
    skipped_loop_indices: Vec<usize>,
    samples: Vec<TorusSampleDoc>,
}

#[derive(Serialize)]
struct TorusSampleDoc {
    loop_index: usize,
    angle_indices: (usize, usize),
    x: [[f64; 2]; 3],
    y: [[f64; 2]; 3],
}

pub fn fiber(ctx: &Context, out: &Path, level: f64, c1: f64, c2: f64) -> Result<bool, CliError> {
    let h = ctx.cfg.height()?;
    let lp = trace_loop(&h, level, ctx.cfg.fibers.loop_points, &ctx.tol)?;
    let t = sample_torus(&ctx.structure(), &h, &lp, c1, c2, ctx.cfg.fibers.resolution())?;
    let lag = lagrangian_residual(&t);
    let collapsed = t.fiber_type == FiberType::Collapsed;
    let doc = TorusDoc {
        mode: mode_name(ctx.cfg.height.mode),
        h_level: level,
        c1,
        c2,
        fiber_type: if collapsed { "Collapsed" } else { "Smooth" },
        periods: t.periods,
        lagrangian_residual: lag,
        max_integral_residual: t.max_integral_residual,
        max_base_residual: t.max_base_residual,
        holonomy_defect: t.holonomy_defect,
        min_frame_singular_value: t.min_frame_singular_value,
        exclusion_radius: collapsed.then_some(ctx.tol.collapse_exclusion),
        skipped_loop_indices: t.skipped_loop_indices.clone(),
        samples: t
            .samples
            .iter()
            .map(|s| {
                let r = s.point.reps();
                TorusSampleDoc { loop_index: s.loop_index, angle_indices: s.angle_indices, x: pt3(&r.x), y: pt3(&r.y) }
            })
            .collect(),
    };
    write_json(out, "torus.json", "torus", ctx.cfg.seed, &doc)?;
    let rows: Vec<Vec<f64>> = t
        .samples
        .iter()
        .map(|s| {
            let r = s.point.reps();
            let mut row = vec![s.loop_index as f64, s.angle_indices.0 as f64, s.angle_indices.1 as f64];
            row.extend(r.x.0.iter().chain(r.y.0.iter()).flat_map(|z| [z.re, z.im]));
            row
        })
        .collect();
    let header = ["loop", "a1", "a2", "x0re", "x0im", "x1re", "x1im", "x2re", "x2im", "y0re", "y0im", "y1re", "y1im", "y2re", "y2im"];
    write_csv(out, "torus.csv", &header, &rows)?;
    Ok(lag < 1e-6)
}

#[derive(Serialize)]
struct VertexDoc {
    value: (f64, f64),
    point_index: usize,
    line_through: usize,
}

#[derive(Serialize)]
struct PolygonDoc {
    samples: usize,
    hull: Vec<(f64, f64)>,
    vertices: Vec<VertexDoc>,
    sing_segments: Vec<((f64, f64), (f64, f64))>,
}

pub fn moment(ctx: &Context, out: &Path, n: usize) -> Result<bool, CliError> {
    let flags = ctx.flags(n, 16);
    let img = moment_image(&ctx.integrals, &flags)?;
    let vertices = hexagon_vertices(&ctx.integrals);
    let mut pts: Vec<(f64, f64)> = img.values.clone();
    pts.extend(vertices.iter().map(|v| v.value));
    let hull = pseudotor_core::fibration::convex_hull(&pts);
    let doc = PolygonDoc {
        samples: n,
        hull: hull.clone(),
        vertices: vertices.iter().map(|v| VertexDoc { value: v.value, point_index: v.point_index, line_through: v.line_through }).collect(),
        sing_segments: (0..3).map(|i| sing_segment(&ctx.integrals, i)).collect(),
    };
    write_json(out, "polygon.json", "moment_polygon", ctx.cfg.seed, &doc)?;
    Ok(hull.len() == 6)
}

#[derive(Serialize)]
struct FiberPhaseDoc {
    h_level: f64,
    c1: f64,
    c2: f64,
    mean: f64,
    std: f64,
    n: usize,
}

#[derive(Serialize)]
struct SpecialtyDoc {
    mode: &'static str,
    s: f64,
    max_fiber_std: f64,
    cross_fiber_dev: f64,
    max_deviation: f64,
    holds: bool,
    per_fiber: Vec<FiberPhaseDoc>,
}

pub fn specialty(ctx: &Context, out: &Path) -> Result<bool, CliError> {
    let mode = ctx.cfg.height.specialty_mode;
    let h = ctx.cfg.height_in(mode)?;
    let form = ResidueForm::new(BoundaryDivisor::of_height(&h), Surface::flag())?;
    let tori = checks::sample_grid(&ctx.structure(), &h, &ctx.cfg.fibers.grid(), ctx.cfg.fibers.resolution(), &ctx.tol)?;
    let rep = specialty_report(&form, &h, &tori, ctx.tol.divisor_exclusion)?;
    let holds = rep.holds(ctx.tol.phase_tol);
    let doc = SpecialtyDoc {
        mode: mode_name(mode),
        s: rep.s,
        max_fiber_std: rep.max_fiber_std,
        cross_fiber_dev: rep.cross_fiber_dev,
        max_deviation: rep.max_deviation,
        holds,
        per_fiber: rep
            .per_fiber
            .iter()
            .map(|f| FiberPhaseDoc { h_level: f.h_level, c1: f.c1, c2: f.c2, mean: f.mean, std: f.std, n: f.n })
            .collect(),
    };
    write_json(out, "specialty.json", "specialty", ctx.cfg.seed, &doc)?;
    Ok(holds)
}

#[derive(Serialize)]
struct IsotopyDoc {
    r1: f64,
    r2: f64,
    time: f64,
    collar_error: Option<String>,
    f0_residual: Option<f64>,
    integral_change: Option<f64>,
    line_residual: Option<f64>,
    omega_change: Option<f64>,
    min_clearance: f64,
    /// Largest distance between a point and its image.
    max_displacement: Option<f64>,
    before: Vec<[[f64; 2]; 6]>,
    after: Vec<[[f64; 2]; 6]>,
}

fn pair6(p: &pseudotor_core::linalg::Pair) -> [[f64; 2]; 6] {
    let a = pt3(&p.x);
    let b = pt3(&p.y);
    [a[0], a[1], a[2], b[0], b[1], b[2]]
}

pub fn isotopy(ctx: &Context, out: &Path, time: Option<f64>) -> Result<bool, CliError> {
    use pseudotor_core::degeneration::{cutoff_g, default_g, transport_point};
    let iso = &ctx.cfg.isotopy;
    let h = ctx.cfg.height()?;
    let res = pseudotor_core::fibration::TorusResolution { loop_points: 16, angle1: 8, angle2: 8 };
    let lp = trace_loop(&h, iso.level, res.loop_points, &ctx.tol)?;
    let t = sample_torus(&ctx.structure(), &h, &lp, iso.label[0], iso.label[1], res)?;
    let cloud = checks::torus_cloud(&t, iso.points);
    let g = cutoff_g(default_g(), checks::isotopy_kind(iso.kind), iso.r1, iso.r2)?;
    let time = time.unwrap_or(g.rotation.time);
    let clearance = cloud.iter().map(|p| distance_to_delta(&p.reps())).fold(f64::INFINITY, f64::min);
    let mut doc = IsotopyDoc {
        r1: iso.r1,
        r2: iso.r2,
        time,
        collar_error: None,
        f0_residual: None,
        integral_change: None,
        line_residual: None,
        omega_change: None,
        min_clearance: clearance,
        max_displacement: None,
        before: cloud.iter().map(|p| pair6(&p.reps())).collect(),
        after: Vec::new(),
    };
    let mut rows = Vec::with_capacity(cloud.len());
    for p in &cloud {
        match transport_point(&g, &ctx.integrals, time, p, &ctx.tol) {
            Ok(r) => rows.push(r),
            Err(e @ pseudotor_core::Error::EnteredCollar { .. }) => {
                doc.collar_error = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let ok = if doc.collar_error.is_none() {
        let m = |f: fn(&pseudotor_core::degeneration::IsotopyResidual) -> f64| rows.iter().map(|r| f(&r.1)).fold(0.0, f64::max);
        doc.f0_residual = Some(m(|r| r.f0_residual));
        doc.integral_change = Some(m(|r| r.integral_change));
        doc.line_residual = Some(m(|r| r.line_residual));
        doc.omega_change = Some(m(|r| r.omega_change));
        doc.min_clearance = rows.iter().map(|r| r.1.min_clearance).fold(clearance, f64::min);
        doc.max_displacement = Some(cloud.iter().zip(rows.iter()).map(|(p, r)| p.ambient().distance(&r.0)).fold(0.0, f64::max));
        doc.after = rows.iter().map(|r| pair6(&r.0.reps())).collect();
        doc.f0_residual < Some(1e-5) && doc.integral_change < Some(1e-6) && doc.line_residual < Some(1e-6) && doc.omega_change < Some(1e-6)
    } else {
        false
    };
    write_json(out, "isotopy.json", "isotopy", ctx.cfg.seed, &doc)?;
    Ok(ok)
}

#[derive(Serialize)]
struct SectionDoc {
    seed_p: [[f64; 2]; 3],
    seed_l: [[f64; 2]; 3],
    radius: f64,
    coverage: f64,
    psi_defect: f64,
    vertex_lines: Vec<[[f64; 2]; 3]>,
    samples: Vec<OrbitSample>,
}

#[derive(Serialize)]
struct OrbitSample {
    log_s: f64,
    log_t: f64,
    p: [[f64; 2]; 3],
    l: [[f64; 2]; 3],
    /// `|p_i|^2 / |p|^2`.
    simplex: [f64; 3],
}

/// Orbit of the diagonal complex torus through a random flag: the section
/// `psi^{-1}(psi(seed))` projected to `CP^2`, with its coverage of the simplex.
pub fn section(ctx: &Context, out: &Path, radius: f64, n: usize) -> Result<bool, CliError> {
    use pseudotor_core::flagconn::{orbit_coverage, orbit_psi_defect, pencil_vertex_lines, torus_orbit_sample, FlagAsPair};
    use pseudotor_core::C64;
    if n < 2 {
        return Err(CliError::Usage("orbit grid needs at least 2 points per axis".into()));
    }
    let seed = FlagAsPair::from_flag(&ctx.flags(1, 17)[0]);
    let mut samples = Vec::with_capacity(n * n);
    let mut params = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let u = -radius + 2.0 * radius * a as f64 / (n - 1) as f64;
            let v = -radius + 2.0 * radius * b as f64 / (n - 1) as f64;
            let (s, t) = (C64::new(u.exp(), 0.0), C64::new(v.exp(), 0.0));
            params.push((s, t));
            let f = torus_orbit_sample(&seed, s, t)?;
            let p = f.p.coords();
            samples.push(OrbitSample { log_s: u, log_t: v, p: pt3(&p), l: pt3(&f.l.coords()), simplex: p.0.map(|z| z.norm_sqr()) });
        }
    }
    let psi_defect = orbit_psi_defect(&seed, &params)?;
    let doc = SectionDoc {
        seed_p: pt3(&seed.p.coords()),
        seed_l: pt3(&seed.l.coords()),
        radius,
        coverage: orbit_coverage(&seed, radius, 200, 20)?,
        psi_defect,
        vertex_lines: pencil_vertex_lines(&seed.p)?.iter().map(|f| pt3(&f.l.coords())).collect(),
        samples,
    };
    write_json(out, "orbit.json", "torus_orbit", ctx.cfg.seed, &doc)?;
    Ok(psi_defect < 1e-8)
}
