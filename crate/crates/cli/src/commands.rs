//! The three subcommands. Each returns the process exit status on success
//! and a [`CliError`] when the run could not produce its artifact.

use std::io::Write;
use std::path::{Path, PathBuf};

use adsgauss_core::curve_frames::{
    frame_defect, gamma_defect, solve_flat_frame, solve_space_frame, CurveSpace, FrameSample,
};
use adsgauss_core::gauss_type::{classify_type, TypeReport};
use adsgauss_core::geometry_engine::{curvature_summary, CurvatureSummary};
use adsgauss_core::surface_catalog::{
    focal_parameters, parallel_bscroll_data, parallel_complex_circle_radius, parallel_immersion,
    ComplexRadius, Immersion, DELTA_LOCUS,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Format, GridSpec, RunConfig, SurfaceSpec, SCHEMA};
use crate::error::CliError;

/// Where the artifact goes: the `-o` flag wins over the config's `output`;
/// with neither it goes to stdout.
fn destination(cfg: &RunConfig, flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf).or_else(|| cfg.output.clone())
}

fn emit(dest: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match dest {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

fn reject_expect(cfg: &RunConfig, cmd: &str) -> Result<(), CliError> {
    match cfg.expect {
        Some(_) => Err(CliError::Config(format!(
            "\"expect\" is only used by verify, not {cmd}"
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBlock {
    pub kind: &'static str,
    pub message: String,
}

impl From<&CliError> for ErrorBlock {
    fn from(e: &CliError) -> Self {
        ErrorBlock {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport<'a> {
    pub schema: u32,
    pub command: &'static str,
    pub surface: &'a SurfaceSpec,
    pub report: Option<TypeReport>,
    /// Curvature scalars at the chart center.
    pub curvature: Option<CurvatureSummary>,
    pub expect: Option<&'a str>,
    pub expectation_met: Option<bool>,
    pub error: Option<ErrorBlock>,
}

fn verify_surface(
    cfg: &RunConfig,
    spec: &SurfaceSpec,
) -> Result<(TypeReport, Option<CurvatureSummary>), CliError> {
    let m = spec.build()?;
    let grid = cfg.grid.clone().unwrap_or_default().grid(m.as_ref())?;
    let report = classify_type(m.as_ref(), grid, &cfg.thresholds).map_err(CliError::Geometry)?;
    let curvature = curvature_summary(m.as_ref(), &m.domain().center()).ok();
    Ok((report, curvature))
}

/// Classifies one surface and writes the JSON report. Geometry failures such
/// as focal degeneration are recorded in the report and give status 1.
pub fn run_verify(cfg: &RunConfig, out: Option<&Path>) -> Result<i32, CliError> {
    cfg.check_command(Command::Verify)?;
    cfg.format_or(Format::Json, &[Format::Json])?;
    let spec = cfg.surface()?;
    let (report, curvature, error) = match verify_surface(cfg, spec) {
        Ok((r, c)) => (Some(r), c, None),
        Err(e @ CliError::Geometry(_)) => (None, None, Some(ErrorBlock::from(&e))),
        Err(e) => return Err(e),
    };
    let expectation_met = match (&cfg.expect, &report) {
        (Some(want), Some(r)) => Some(r.verdict.kind() == want),
        (Some(_), None) => Some(false),
        (None, _) => None,
    };
    let status = if error.is_some() || expectation_met == Some(false) {
        1
    } else {
        0
    };
    let doc = VerifyReport {
        schema: SCHEMA,
        command: "verify",
        surface: spec,
        report,
        curvature,
        expect: cfg.expect.as_deref(),
        expectation_met,
        error,
    };
    emit(destination(cfg, out).as_deref(), &json_bytes(&doc)?)?;
    Ok(status)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepRow {
    pub u: f64,
    pub kappa_re: Option<f64>,
    pub kappa_im: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
    pub flat: Option<bool>,
    pub verdict: String,
    pub lambda1: f64,
    pub lambda1_residual: f64,
    pub p: f64,
    pub q: f64,
    pub annihilator_residual: f64,
    pub d2: f64,
    pub d1: f64,
}

#[derive(Debug, Serialize)]
struct SweepDoc<'a> {
    schema: u32,
    command: &'static str,
    base: &'a SurfaceSpec,
    u_range: [f64; 2],
    rows: &'a [SweepRow],
}

/// `[min, max]` intersected with the admissible interval shrunk by
/// [`DELTA_LOCUS`]; `None` when nothing is left.
pub fn clip_range(min: f64, max: f64, admissible: (f64, f64)) -> Option<(f64, f64)> {
    let lo = min.max(admissible.0 + DELTA_LOCUS);
    let hi = max.min(admissible.1 - DELTA_LOCUS);
    (lo <= hi).then_some((lo, hi))
}

fn sweep_row(
    base: &std::sync::Arc<dyn Immersion>,
    spec: &SurfaceSpec,
    grid: &GridSpec,
    cfg: &RunConfig,
    u: f64,
) -> Result<SweepRow, CliError> {
    let mut row = SweepRow {
        u,
        ..Default::default()
    };
    match spec {
        SurfaceSpec::ComplexCircle { kappa, branch, .. } => {
            let k = ComplexRadius::new(kappa.value()?, *branch).map_err(CliError::Geometry)?;
            let ku = parallel_complex_circle_radius(&k, u).kappa;
            row.kappa_re = Some(ku.re);
            row.kappa_im = Some(ku.im);
        }
        SurfaceSpec::BScroll { k2, .. } => {
            let d = parallel_bscroll_data(*k2, u).map_err(CliError::Geometry)?;
            row.r = Some(d.r);
            row.alpha = Some(d.alpha);
            row.flat = Some(d.flat);
        }
        _ => unreachable!("checked by run_sweep_parallel"),
    }
    let m = parallel_immersion(base.clone(), u).map_err(CliError::Geometry)?;
    let g = grid.grid(&m)?;
    let rep = classify_type(&m, g, &cfg.thresholds).map_err(CliError::Geometry)?;
    row.verdict = rep.verdict.kind().to_string();
    row.lambda1 = rep.lambda1.lambda;
    row.lambda1_residual = rep.lambda1.residual;
    row.p = rep.annihilator.p;
    row.q = rep.annihilator.q;
    row.annihilator_residual = rep.annihilator.residual;
    row.d2 = rep.biharmonic.d2;
    row.d1 = rep.biharmonic.d1;
    Ok(row)
}

/// Samples the parallel family of a complex circle or B-scroll. Rows are
/// computed in parallel and written in order of increasing `u`.
pub fn run_sweep_parallel(cfg: &RunConfig, out: Option<&Path>) -> Result<i32, CliError> {
    cfg.check_command(Command::SweepParallel)?;
    reject_expect(cfg, "sweep-parallel")?;
    let format = cfg.format_or(Format::Csv, &[Format::Csv, Format::Json])?;
    let spec = cfg.surface()?;
    let admissible = match spec {
        SurfaceSpec::ComplexCircle { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        SurfaceSpec::BScroll { k2, .. } => focal_parameters(*k2, -1.0),
        _ => {
            return Err(CliError::Config(
                "sweep-parallel needs a complex_circle or b_scroll surface".into(),
            ))
        }
    };
    let range = cfg
        .u
        .as_ref()
        .ok_or_else(|| CliError::Config("missing \"u\" range".into()))?;
    if range.samples == 0 || !(range.min <= range.max) {
        return Err(CliError::Config(
            "u range needs min <= max and at least one sample".into(),
        ));
    }
    let (lo, hi) = clip_range(range.min, range.max, admissible).ok_or_else(|| {
        CliError::Config(format!(
            "u range [{}, {}] has no admissible part inside ({}, {})",
            range.min, range.max, admissible.0, admissible.1
        ))
    })?;
    if (lo, hi) != (range.min, range.max) {
        eprintln!(
            "adsgauss: warning: u range [{}, {}] clipped to [{lo}, {hi}] (focal interval ({}, {}))",
            range.min, range.max, admissible.0, admissible.1
        );
    }
    let n = range.samples;
    let us: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect();

    let base = spec.build()?;
    let grid = cfg.grid.clone().unwrap_or_default();
    let rows: Vec<SweepRow> = us
        .par_iter()
        .map(|&u| sweep_row(&base, spec, &grid, cfg, u))
        .collect::<Result<_, _>>()?;

    let bytes = match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            for r in &rows {
                w.serialize(r)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
            w.into_inner()
                .map_err(|e| CliError::Config(e.to_string()))?
        }
        Format::Json => json_bytes(&SweepDoc {
            schema: SCHEMA,
            command: "sweep-parallel",
            base: spec,
            u_range: [lo, hi],
            rows: &rows,
        })?,
    };
    emit(destination(cfg, out).as_deref(), &bytes)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
pub struct DefectReport {
    pub schema: u32,
    pub constraint_defect: f64,
    pub gamma_defect: f64,
    pub order: usize,
    pub nodes: usize,
}

/// Integrates a Cartan frame from the standard initial frame and writes it as
/// CSV. The defect block goes to stdout, or to stderr when the CSV does.
pub fn run_solve_frame(cfg: &RunConfig, out: Option<&Path>) -> Result<i32, CliError> {
    cfg.check_command(Command::SolveFrame)?;
    reject_expect(cfg, "solve-frame")?;
    cfg.format_or(Format::Csv, &[Format::Csv])?;
    let prof = cfg
        .profile
        .as_ref()
        .ok_or_else(|| CliError::Config("missing \"profile\"".into()))?
        .profile()?;
    let space = cfg.space.unwrap_or(CurveSpace::AntiDeSitter);
    let span = cfg.span.unwrap_or([0.0, 1.0]);
    let f0 = FrameSample::standard(space, prof.order);
    let bad = |e: adsgauss_core::GeomError| CliError::Config(e.to_string());
    let field = match space.eps() {
        None => solve_flat_frame(&prof, &f0, (span[0], span[1]), cfg.step),
        Some(eps) => solve_space_frame(&prof, eps, &f0, (span[0], span[1]), cfg.step),
    }
    .map_err(bad)?;

    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| CliError::Config(e.to_string());
    w.write_record(field.csv_header()).map_err(io)?;
    for row in field.csv_rows() {
        w.serialize(row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let dest = destination(cfg, out);
    emit(dest.as_deref(), &bytes)?;

    let report = DefectReport {
        schema: SCHEMA,
        constraint_defect: frame_defect(&field),
        gamma_defect: gamma_defect(&field),
        order: prof.order,
        nodes: field.len(),
    };
    let text = json_bytes(&report)?;
    if dest.is_some() {
        emit(None, &text)?;
    } else {
        eprint!("{}", String::from_utf8_lossy(&text));
    }
    Ok(0)
}
