//! Run configuration: a TOML file with named blocks, lengths in millimeters.
//!
//! ```toml
//! [geometry]
//! chamber_length = 28.0
//! chamber_depth = 0.5
//! waveguide_radius = 13.0
//! waveguide_length = 33.0
//! plug_length = 17.0
//! design_height = 28.0
//! slit_start = 0.0
//! slit_end = 10.0
//! baseline_wall = [[0.5, 10.0], [17.5, 13.2718]]
//!
//! [mesh]
//! h_mm = 0.45
//!
//! [physics]
//! c0 = 343.20
//! rho0 = 1.2044
//! nu = 1.5061e-5
//! prandtl = 0.7078
//! gamma = 1.4
//! cp = 1004.9
//!
//! [frequencies]
//! f_min_hz = 3750.0
//! f_max_hz = 15000.0
//! count = 35
//! ```
//!
//! Optional blocks and keys: `physics.a_d` (1), `physics.losses` (true),
//! `frequencies.evaluation_count` (`2 count - 1`), `[optimization]` with `objective`
//! (`"track"` or `"power"`), `tikhonov_eps` (0), `max_iters` (100), `grad_tol` (1e-12),
//! `initial_step_mm` (one mesh size), `target_ratio` (none), and `[stabilization]` with
//! `eps_s` (1e-2).

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::helmholtz::PhysicsParams;
use crate::levelset::Wall;
use crate::mesh::BenchmarkGeometry;
use crate::optimizer::{FrequencyGrid, ObjectiveKind};
use serde::Deserialize;
use std::ops::Range;
use std::path::Path;
use toml::Spanned;

const MM: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationConfig {
    pub objective: ObjectiveKind,
    pub tikhonov_eps: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Largest level-set change of the first trial step, meters.
    pub initial_step: Option<f64>,
    /// Stop once the objective falls to this fraction of its initial value.
    pub target_ratio: Option<f64>,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            objective: ObjectiveKind::Track,
            tikhonov_eps: 0.0,
            max_iters: 100,
            grad_tol: 1e-12,
            initial_step: None,
            target_ratio: None,
        }
    }
}

/// Validated configuration in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub geometry: BenchmarkGeometry,
    /// Straight walls whose solid sides form the baseline plug.
    pub baseline_walls: Vec<Wall>,
    pub h: f64,
    pub physics: PhysicsParams,
    pub frequencies: FrequencyGrid,
    pub evaluation: FrequencyGrid,
    pub optimization: OptimizationConfig,
    pub eps_s: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: RawGeometry,
    mesh: RawMesh,
    physics: RawPhysics,
    frequencies: RawFrequencies,
    optimization: Option<RawOptimization>,
    stabilization: Option<RawStabilization>,
}

type Num = Spanned<f64>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    chamber_length: Num,
    chamber_depth: Num,
    waveguide_radius: Num,
    waveguide_length: Num,
    plug_length: Num,
    design_height: Num,
    slit_start: Num,
    slit_end: Num,
    baseline_wall: Option<Spanned<Vec<[f64; 2]>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    h_mm: Num,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    c0: Num,
    rho0: Num,
    nu: Num,
    prandtl: Num,
    gamma: Num,
    cp: Num,
    a_d: Option<Num>,
    losses: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrequencies {
    f_min_hz: Num,
    f_max_hz: Num,
    count: Spanned<i64>,
    evaluation_count: Option<Spanned<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimization {
    objective: Option<Spanned<String>>,
    tikhonov_eps: Option<Num>,
    max_iters: Option<Spanned<i64>>,
    grad_tol: Option<Num>,
    initial_step_mm: Option<Num>,
    target_ratio: Option<Num>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStabilization {
    eps_s: Option<Num>,
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())].iter().filter(|&&b| b == b'\n').count() + 1
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn error(&self, span: Range<usize>, message: String) -> Error {
        Error::Config { line: line_of(self.text, span.start), message }
    }

    fn positive(&self, key: &str, v: &Num) -> Result<f64> {
        let x = *v.get_ref();
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(self.error(v.span(), format!("{key} must be positive, got {x}")))
        }
    }

    fn non_negative(&self, key: &str, v: &Num) -> Result<f64> {
        let x = *v.get_ref();
        if x >= 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(self.error(v.span(), format!("{key} must be non-negative, got {x}")))
        }
    }

    fn count(&self, key: &str, v: &Spanned<i64>) -> Result<usize> {
        let x = *v.get_ref();
        if x >= 1 {
            Ok(x as usize)
        } else {
            Err(self.error(v.span(), format!("{key} must be at least 1, got {x}")))
        }
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let c = Checker { text };

    let g = &raw.geometry;
    let geometry = BenchmarkGeometry {
        chamber_length: c.positive("geometry.chamber_length", &g.chamber_length)? * MM,
        chamber_depth: c.positive("geometry.chamber_depth", &g.chamber_depth)? * MM,
        waveguide_radius: c.positive("geometry.waveguide_radius", &g.waveguide_radius)? * MM,
        waveguide_length: c.positive("geometry.waveguide_length", &g.waveguide_length)? * MM,
        plug_length: c.positive("geometry.plug_length", &g.plug_length)? * MM,
        design_height: c.positive("geometry.design_height", &g.design_height)? * MM,
        slit_start: c.non_negative("geometry.slit_start", &g.slit_start)? * MM,
        slit_end: c.positive("geometry.slit_end", &g.slit_end)? * MM,
    };
    geometry.validate().map_err(|e| c.error(g.slit_end.span(), format!("geometry: {e}")))?;
    let baseline_walls = match &g.baseline_wall {
        None => vec![default_baseline_wall(&geometry)],
        Some(w) => {
            let pts = w.get_ref();
            if pts.len() != 2 || pts.iter().flatten().any(|v| !v.is_finite()) || pts[0] == pts[1] {
                return Err(c.error(
                    w.span(),
                    "geometry.baseline_wall must be two distinct points [[x0, y0], [x1, y1]]".into(),
                ));
            }
            vec![Wall {
                start: Point2::new(pts[0][0] * MM, pts[0][1] * MM),
                end: Point2::new(pts[1][0] * MM, pts[1][1] * MM),
            }]
        }
    };

    let h_mm = c.positive("mesh.h_mm", &raw.mesh.h_mm)?;
    if h_mm * MM >= geometry.chamber_depth {
        return Err(c.error(raw.mesh.h_mm.span(), format!("mesh.h_mm must be below the chamber depth, got {h_mm}")));
    }

    let p = &raw.physics;
    let physics = PhysicsParams {
        c0: c.positive("physics.c0", &p.c0)?,
        rho0: c.positive("physics.rho0", &p.rho0)?,
        nu: c.positive("physics.nu", &p.nu)?,
        prandtl: c.positive("physics.prandtl", &p.prandtl)?,
        gamma: c.positive("physics.gamma", &p.gamma)?,
        cp: c.positive("physics.cp", &p.cp)?,
        a_d: match &p.a_d {
            Some(v) => c.positive("physics.a_d", v)?,
            None => 1.0,
        },
        losses: p.losses.unwrap_or(true),
    };
    if physics.gamma <= 1.0 {
        return Err(c.error(p.gamma.span(), format!("physics.gamma must exceed 1, got {}", physics.gamma)));
    }

    let f = &raw.frequencies;
    let count = c.count("frequencies.count", &f.count)?;
    let frequencies = FrequencyGrid {
        f_min: c.positive("frequencies.f_min_hz", &f.f_min_hz)?,
        f_max: c.positive("frequencies.f_max_hz", &f.f_max_hz)?,
        count,
    };
    frequencies.validate().map_err(|e| c.error(f.f_max_hz.span(), format!("frequencies: {e}")))?;
    let evaluation = FrequencyGrid {
        count: match &f.evaluation_count {
            Some(v) => c.count("frequencies.evaluation_count", v)?,
            None => 2 * count - 1,
        },
        ..frequencies
    };

    let mut optimization = OptimizationConfig::default();
    if let Some(o) = &raw.optimization {
        if let Some(kind) = &o.objective {
            optimization.objective = match kind.get_ref().to_ascii_lowercase().as_str() {
                "track" => ObjectiveKind::Track,
                "power" => ObjectiveKind::Power,
                other => {
                    return Err(c.error(
                        kind.span(),
                        format!("optimization.objective must be \"track\" or \"power\", got \"{other}\""),
                    ))
                }
            };
        }
        if let Some(v) = &o.tikhonov_eps {
            optimization.tikhonov_eps = c.non_negative("optimization.tikhonov_eps", v)?;
        }
        if let Some(v) = &o.max_iters {
            optimization.max_iters = c.count("optimization.max_iters", v)?;
        }
        if let Some(v) = &o.grad_tol {
            optimization.grad_tol = c.non_negative("optimization.grad_tol", v)?;
        }
        if let Some(v) = &o.initial_step_mm {
            optimization.initial_step = Some(c.positive("optimization.initial_step_mm", v)? * MM);
        }
        if let Some(v) = &o.target_ratio {
            let r = c.positive("optimization.target_ratio", v)?;
            if r >= 1.0 {
                return Err(c.error(v.span(), format!("optimization.target_ratio must be below 1, got {r}")));
            }
            optimization.target_ratio = Some(r);
        }
    }

    let eps_s = match raw.stabilization.as_ref().and_then(|s| s.eps_s.as_ref()) {
        Some(v) => c.non_negative("stabilization.eps_s", v)?,
        None => 1e-2,
    };

    Ok(Config { geometry, baseline_walls, h: h_mm * MM, physics, frequencies, evaluation, optimization, eps_s })
}

/// Straight baseline channel wall for a benchmark geometry.
///
/// The wall runs from just above the slit end on the chamber side to just above the
/// waveguide wall on the outlet side, with the plug on its upper side.
pub fn default_baseline_wall(g: &BenchmarkGeometry) -> Wall {
    let offset = 0.01 * g.design_height;
    Wall {
        start: Point2::new(g.plug_start(), g.slit_end + offset),
        end: Point2::new(g.plug_end(), g.waveguide_radius + offset),
    }
}
