//! JSON run configurations and the surfaces they describe.

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use adsgauss_core::curve_frames::{
    solve_space_frame, CurvatureFn, CurvatureProfile, CurveSpace, FrameSample,
};
use adsgauss_core::gauss_type::{default_grid, Thresholds};
use adsgauss_core::geometry_engine::ChartGrid;
use adsgauss_core::surface_catalog::{
    b_scroll_on, complex_circle, generalized_b_scroll_on, parallel_immersion, ChartBox,
    ComplexRadius, Immersion, RootBranch,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// Smallest node count per axis that leaves room for nested Laplacian stencils.
pub const MIN_NODES: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    SweepParallel,
    SolveFrame,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Top-level configuration shared by all subcommands; each command checks
/// which optional sections it needs.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub surface: Option<SurfaceSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Expected verdict kind for `verify`.
    #[serde(default)]
    pub expect: Option<String>,
    /// Parallel distances for `sweep-parallel`.
    #[serde(default)]
    pub u: Option<URange>,
    /// Curvature profile for `solve-frame`.
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub space: Option<CurveSpace>,
    #[serde(default)]
    pub span: Option<[f64; 2]>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

pub const VERDICT_KINDS: [&str; 5] = [
    "one_type",
    "null_two_type",
    "two_type",
    "infinite_type_consistent",
    "inconclusive",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema {} (expected {SCHEMA})",
                cfg.schema
            )));
        }
        cfg.thresholds
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(e) = &cfg.expect {
            if !VERDICT_KINDS.contains(&e.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown expected verdict {e:?}; use one of {VERDICT_KINDS:?}"
                )));
            }
        }
        Ok(cfg)
    }

    /// Rejects a config written for a different subcommand.
    pub fn check_command(&self, cmd: Command) -> Result<(), CliError> {
        match self.command {
            Some(c) if c != cmd => Err(CliError::Config(format!(
                "config is for {c:?}, not {cmd:?}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn surface(&self) -> Result<&SurfaceSpec, CliError> {
        self.surface
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"surface\"".into()))
    }

    pub fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Config(format!(
                "format {f:?} is not supported here"
            )))
        }
    }
}

/// A complex number written as `"-1+2.83i"`, a plain number, or `{re, im}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Number(f64),
    Text(String),
    Parts { re: f64, im: f64 },
}

impl ComplexValue {
    pub fn value(&self) -> Result<Complex64, CliError> {
        match self {
            ComplexValue::Number(x) => Ok(Complex64::new(*x, 0.0)),
            ComplexValue::Parts { re, im } => Ok(Complex64::new(*re, *im)),
            ComplexValue::Text(s) => {
                let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
                Complex64::from_str(&compact)
                    .map_err(|_| CliError::Config(format!("cannot parse complex number {s:?}")))
            }
        }
    }
}

fn default_k1() -> CurvatureFn {
    CurvatureFn::constant(1.0)
}

fn default_scroll_span() -> [f64; 2] {
    [-0.5, 0.5]
}

fn default_unit_span() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_t() -> [f64; 2] {
    [0.5, 1.5]
}

fn default_z() -> [f64; 2] {
    [-0.5, 0.5]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    ComplexCircle {
        kappa: ComplexValue,
        #[serde(default)]
        branch: RootBranch,
        #[serde(default)]
        domain: Option<ChartBox>,
    },
    BScroll {
        k2: f64,
        #[serde(default = "default_k1")]
        k1: CurvatureFn,
        #[serde(default = "default_scroll_span")]
        span: [f64; 2],
        #[serde(default = "default_t")]
        t: [f64; 2],
    },
    /// Hypersurface over a frame of order `k.len() + 1`.
    GeneralizedBScroll {
        k: Vec<CurvatureFn>,
        #[serde(default = "default_unit_span")]
        span: [f64; 2],
        #[serde(default = "default_t")]
        t: [f64; 2],
        #[serde(default = "default_z")]
        z: [f64; 2],
    },
    Parallel {
        base: Box<SurfaceSpec>,
        u: f64,
    },
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Anti-de Sitter frame from the standard initial frame at `span[0]`.
fn ads_frame(
    k: Vec<CurvatureFn>,
    span: [f64; 2],
) -> Result<Arc<adsgauss_core::curve_frames::FrameField>, CliError> {
    let prof = CurvatureProfile::new(k.len() + 1, k).map_err(config_err)?;
    let f0 = FrameSample::standard(CurveSpace::AntiDeSitter, prof.order);
    let field =
        solve_space_frame(&prof, -1.0, &f0, (span[0], span[1]), None).map_err(config_err)?;
    Ok(Arc::new(field))
}

impl SurfaceSpec {
    /// Builds the immersion; focal degeneration of a parallel surface is a
    /// geometry error, everything else a config error.
    pub fn build(&self) -> Result<Arc<dyn Immersion>, CliError> {
        Ok(match self {
            SurfaceSpec::ComplexCircle {
                kappa,
                branch,
                domain,
            } => {
                let r = ComplexRadius::new(kappa.value()?, *branch).map_err(config_err)?;
                let mut c = complex_circle(r);
                if let Some(d) = domain {
                    c = c.with_domain(d.clone());
                }
                Arc::new(c)
            }
            SurfaceSpec::BScroll { k2, k1, span, t } => {
                let frame = ads_frame(vec![k1.clone(), CurvatureFn::constant(*k2)], *span)?;
                let dom =
                    ChartBox::new(vec![span[0], t[0]], vec![span[1], t[1]]).map_err(config_err)?;
                Arc::new(b_scroll_on(frame, dom).map_err(config_err)?)
            }
            SurfaceSpec::GeneralizedBScroll { k, span, t, z } => {
                let frame = ads_frame(k.clone(), *span)?;
                let nz = k.len().saturating_sub(2);
                let mut lower = vec![span[0], t[0]];
                let mut upper = vec![span[1], t[1]];
                lower.extend(std::iter::repeat(z[0]).take(nz));
                upper.extend(std::iter::repeat(z[1]).take(nz));
                let dom = ChartBox::new(lower, upper).map_err(config_err)?;
                Arc::new(generalized_b_scroll_on(frame, dom).map_err(config_err)?)
            }
            SurfaceSpec::Parallel { base, u } => {
                let b = base.build()?;
                Arc::new(parallel_immersion(b, *u).map_err(CliError::Geometry)?)
            }
        })
    }
}

/// Grid nodes per axis and a margin trimmed from every side of the chart.
/// Without counts the library default grid is used.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub n_s: Option<usize>,
    #[serde(default)]
    pub n_t: Option<usize>,
    /// Counts for every chart axis (charts of any dimension).
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
    #[serde(default)]
    pub margins: f64,
}

impl GridSpec {
    pub fn grid(&self, m: &dyn Immersion) -> Result<ChartGrid, CliError> {
        let n = m.chart_dim();
        let counts = match (&self.counts, self.n_s, self.n_t) {
            (Some(c), None, None) => c.clone(),
            (None, Some(a), Some(b)) if n == 2 => vec![a, b],
            (None, None, None) => default_grid(m).map_err(config_err)?.counts,
            _ => {
                return Err(CliError::Config(format!(
                    "grid needs either \"counts\" or both \"n_s\" and \"n_t\" (2-D charts); chart has dimension {n}"
                )))
            }
        };
        if counts.len() != n || counts.iter().any(|&c| c < MIN_NODES) {
            return Err(CliError::Config(format!(
                "grid counts {counts:?} must give {n} axes with at least {MIN_NODES} nodes"
            )));
        }
        if !(self.margins >= 0.0) {
            return Err(CliError::Config("grid margins must be non-negative".into()));
        }
        ChartGrid::over(&m.domain(), counts, self.margins).map_err(config_err)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct URange {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

/// Profile as in the library, with `order` defaulting to `k.len() + 1`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default)]
    pub order: Option<usize>,
    pub k: Vec<CurvatureFn>,
}

impl ProfileSpec {
    pub fn profile(&self) -> Result<CurvatureProfile, CliError> {
        let order = self.order.unwrap_or(self.k.len() + 1);
        CurvatureProfile::new(order, self.k.clone()).map_err(config_err)
    }
}
