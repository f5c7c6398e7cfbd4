//! Run configuration: flat `key = value` text with dotted sections.
//!
//! Lines starting with `#` are comments. Every key has a default (see
//! [`SCHEMA`]); keys not in the schema are rejected. Real numbers accept
//! fractions such as `1/3`, and lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use homogenlab::analysis::{AuditConfig, MeasureMode};
use homogenlab::grid::{BoxDomain, GridSpec, RRule, SourceSpec};
use homogenlab::io::Manifest;
use homogenlab::linalg::{Preconditioner, SolverConfig};
use homogenlab::micro::PhysicalParams;

/// `(key, default, description)` for every accepted key.
pub const SCHEMA: &[(&str, &str, &str)] = &[
    ("box.lo", "0,0,0", "lower corner of the box"),
    ("box.hi", "1,1,1", "upper corner of the box"),
    ("grid.n", "32", "cells per axis, or nx,ny,nz"),
    ("micro.epsilon", "1/2,1/3,1/4", "period list, decreasing; `micro` uses the first entry"),
    ("micro.r_rule", "geometric", "intermediate radius: geometric, log:<t> or fixed:<R>"),
    ("physics.gamma", "2", "inclusion radius coefficient, r_eps = gamma eps^3"),
    ("physics.a", "0", "buoyancy coefficient"),
    ("physics.b", "1", "suspension conductivity/source coefficient"),
    ("source.f.kind", "gaussian", "fluid source: zero, constant, gaussian or product_sine"),
    ("source.f.value", "0", "value of a constant source"),
    ("source.f.amplitude", "1", "amplitude of a gaussian or product_sine source"),
    ("source.f.center", "center", "gaussian centre; `center` means the box centre"),
    ("source.f.width", "0.25", "gaussian width"),
    ("source.f.support", "none", "truncation ball cx,cy,cz,radius or none"),
    ("source.g.kind", "gaussian", "suspension source, same keys as source.f"),
    ("source.g.value", "0", "value of a constant source"),
    ("source.g.amplitude", "1", "amplitude of a gaussian or product_sine source"),
    ("source.g.center", "center", "gaussian centre; `center` means the box centre"),
    ("source.g.width", "0.25", "gaussian width"),
    ("source.g.support", "none", "truncation ball cx,cy,cz,radius or none"),
    ("solver.rel_tol", "1e-6", "relative residual tolerance"),
    ("solver.abs_tol", "1e-14", "absolute residual tolerance"),
    ("solver.max_iter", "20000", "Krylov iteration cap"),
    ("solver.preconditioner", "jacobi", "jacobi or none"),
    ("picard.relax", "0.7", "temperature relaxation in (0, 1]"),
    ("picard.max_outer", "100", "Picard iteration cap"),
    ("output.dir", "out", "output directory, overridden by --out"),
    ("report.measure", "analytic", "sphere weights for the measure gaps: analytic or voxel"),
    ("report.timing", "false", "record wall-clock seconds in reports"),
    ("audit.seed", "2024", "seed of the randomized audit"),
    ("audit.n", "64", "grid cells per axis for the audit fields"),
    ("audit.tamper_corrector", "false", "square the corrector profile (must make the audit fail)"),
    ("cell.r", "1", "ball radius of the cell problem"),
    ("cell.big_r", "4,8,16", "cell half-widths R"),
    ("cell.cells_per_r", "3", "grid cells across r; n = 2 R cells_per_r / r"),
    ("cell.quad_points", "2000", "radial quadrature points for corrector energies"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config key `{}`: {}", self.key, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    pub r: f64,
    pub big_r: Vec<f64>,
    pub cells_per_r: f64,
    pub quad_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bx: BoxDomain,
    pub n: [usize; 3],
    pub epsilon: Vec<f64>,
    pub r_rule: RRule,
    pub params: PhysicalParams,
    pub solver: SolverConfig,
    pub relax: f64,
    pub max_outer: usize,
    pub out_dir: PathBuf,
    pub measure: MeasureMode,
    pub timing: bool,
    pub audit: AuditConfig,
    pub cell: CellConfig,
    /// Resolved values of every key, as parsed.
    raw: BTreeMap<String, String>,
}

fn parse_real(key: &str, s: &str) -> Result<f64, ConfigError> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| err(key, format!("`{s}` is not a number")))?;
            let q: f64 = q.trim().parse().map_err(|_| err(key, format!("`{s}` is not a number")))?;
            p / q
        }
        None => s.parse().map_err(|_| err(key, format!("`{s}` is not a number")))?,
    };
    if !v.is_finite() {
        return Err(err(key, format!("`{s}` is not finite")));
    }
    Ok(v)
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',').map(|t| parse_real(key, t)).collect()
}

fn parse_triple(key: &str, s: &str) -> Result<[f64; 3], ConfigError> {
    parse_list(key, s)?
        .try_into()
        .map_err(|_| err(key, "needs exactly three values"))
}

fn parse_count(key: &str, s: &str) -> Result<usize, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| err(key, format!("`{}` is not a non-negative integer", s.trim())))
}

fn parse_bool(key: &str, s: &str) -> Result<bool, ConfigError> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(err(key, format!("`{other}` is not true or false"))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(err(key, "must be positive"))
    }
}

impl RunConfig {
    pub fn defaults() -> Self {
        Self::from_pairs(std::iter::empty::<(String, String)>()).expect("schema defaults are valid")
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(&format!("line {}", no + 1), "expected `key = value`"))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut raw: BTreeMap<String, String> = SCHEMA.iter().map(|(k, d, _)| (k.to_string(), d.to_string())).collect();
        let mut seen = std::collections::BTreeSet::new();
        for (k, v) in pairs {
            let (k, v) = (k.into(), v.into());
            if !raw.contains_key(&k) {
                return Err(err(&k, "unknown key"));
            }
            if !seen.insert(k.clone()) {
                return Err(err(&k, "given twice"));
            }
            raw.insert(k, v);
        }
        Self::build(raw)
    }

    fn build(raw: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| raw[k].as_str();

        let lo = parse_triple("box.lo", get("box.lo"))?;
        let hi = parse_triple("box.hi", get("box.hi"))?;
        let bx = BoxDomain::new(lo, hi).map_err(|_| err("box.hi", "must exceed box.lo on every axis"))?;

        let n_raw: Vec<&str> = get("grid.n").split(',').collect();
        let n: [usize; 3] = match n_raw.as_slice() {
            [one] => [parse_count("grid.n", one)?; 3],
            [x, y, z] => [parse_count("grid.n", x)?, parse_count("grid.n", y)?, parse_count("grid.n", z)?],
            _ => return Err(err("grid.n", "needs one or three values")),
        };
        GridSpec::new(bx, n).map_err(|e| err("grid.n", e.to_string()))?;

        let epsilon = parse_list("micro.epsilon", get("micro.epsilon"))?;
        for &e in &epsilon {
            positive("micro.epsilon", e)?;
        }
        let r_rule = match get("micro.r_rule").trim() {
            "geometric" => RRule::GeometricMean,
            s => match s.split_once(':') {
                Some(("log", t)) => {
                    let t = parse_real("micro.r_rule", t)?;
                    if !(t > 0.0 && t < 1.0) {
                        return Err(err("micro.r_rule", "log exponent must lie in (0, 1)"));
                    }
                    RRule::LogInterpolated(t)
                }
                Some(("fixed", r)) => RRule::Fixed(positive("micro.r_rule", parse_real("micro.r_rule", r)?)?),
                _ => return Err(err("micro.r_rule", format!("`{s}` is not geometric, log:<t> or fixed:<R>"))),
            },
        };

        let gamma = positive("physics.gamma", parse_real("physics.gamma", get("physics.gamma"))?)?;
        let a = parse_real("physics.a", get("physics.a"))?;
        if a < 0.0 {
            return Err(err("physics.a", "must be non-negative"));
        }
        let b = positive("physics.b", parse_real("physics.b", get("physics.b"))?)?;
        let params = PhysicalParams {
            a,
            b,
            gamma,
            f: source(&raw, "source.f", &bx)?,
            g: source(&raw, "source.g", &bx)?,
        };

        let solver = SolverConfig {
            rel_tol: positive("solver.rel_tol", parse_real("solver.rel_tol", get("solver.rel_tol"))?)?,
            abs_tol: positive("solver.abs_tol", parse_real("solver.abs_tol", get("solver.abs_tol"))?)?,
            max_iter: parse_count("solver.max_iter", get("solver.max_iter"))?,
            preconditioner: match get("solver.preconditioner").trim() {
                "jacobi" => Preconditioner::Jacobi,
                "none" => Preconditioner::None,
                s => return Err(err("solver.preconditioner", format!("`{s}` is not jacobi or none"))),
            },
        };
        if solver.max_iter == 0 {
            return Err(err("solver.max_iter", "must be at least 1"));
        }

        let relax = parse_real("picard.relax", get("picard.relax"))?;
        if !(relax > 0.0 && relax <= 1.0) {
            return Err(err("picard.relax", "must lie in (0, 1]"));
        }
        let max_outer = parse_count("picard.max_outer", get("picard.max_outer"))?;
        if max_outer == 0 {
            return Err(err("picard.max_outer", "must be at least 1"));
        }

        let out_dir = PathBuf::from(get("output.dir").trim());
        let measure = match get("report.measure").trim() {
            "analytic" => MeasureMode::Analytic,
            "voxel" => MeasureMode::Voxel,
            s => return Err(err("report.measure", format!("`{s}` is not analytic or voxel"))),
        };
        let timing = parse_bool("report.timing", get("report.timing"))?;

        let audit_n = parse_count("audit.n", get("audit.n"))?;
        if audit_n < 16 {
            return Err(err("audit.n", "must be at least 16"));
        }
        let audit = AuditConfig {
            seed: get("audit.seed")
                .trim()
                .parse()
                .map_err(|_| err("audit.seed", "must be an unsigned integer"))?,
            tamper_corrector: parse_bool("audit.tamper_corrector", get("audit.tamper_corrector"))?,
            n: audit_n,
            gamma,
        };

        let r = positive("cell.r", parse_real("cell.r", get("cell.r"))?)?;
        let big_r = parse_list("cell.big_r", get("cell.big_r"))?;
        let cell = CellConfig {
            r,
            big_r,
            cells_per_r: positive("cell.cells_per_r", parse_real("cell.cells_per_r", get("cell.cells_per_r"))?)?,
            quad_points: parse_count("cell.quad_points", get("cell.quad_points"))?,
        };
        if cell.quad_points < 2 {
            return Err(err("cell.quad_points", "must be at least 2"));
        }

        Ok(Self {
            bx,
            n,
            epsilon,
            r_rule,
            params,
            solver,
            relax,
            max_outer,
            out_dir,
            measure,
            timing,
            audit,
            cell,
            raw,
        })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.bx, self.n).expect("validated at parse time")
    }

    /// Every key except `output.dir`, which does not affect numerics.
    pub fn manifest(&self) -> Manifest {
        let mut m: Manifest = self
            .raw
            .iter()
            .filter(|(k, _)| k.as_str() != "output.dir")
            .map(|(k, v)| (format!("config.{k}"), v.clone()))
            .collect();
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        m
    }

    /// Text of the schema with defaults, in config-file syntax.
    pub fn documented_defaults() -> String {
        SCHEMA
            .iter()
            .map(|(k, d, doc)| format!("# {doc}\n{k} = {d}\n"))
            .collect()
    }
}

fn source(raw: &BTreeMap<String, String>, prefix: &str, bx: &BoxDomain) -> Result<SourceSpec, ConfigError> {
    let key = |s: &str| format!("{prefix}.{s}");
    let get = |s: &str| raw[&key(s)].as_str();
    let kind = get("kind").trim();
    let mut spec = match kind {
        "zero" => SourceSpec::zero(),
        "constant" => SourceSpec::constant(parse_real(&key("value"), get("value"))?),
        "gaussian" => {
            let center = match get("center").trim() {
                "center" => bx.center(),
                s => parse_triple(&key("center"), s)?,
            };
            let width = positive(&key("width"), parse_real(&key("width"), get("width"))?)?;
            SourceSpec::gaussian(parse_real(&key("amplitude"), get("amplitude"))?, center, width)
        }
        "product_sine" => SourceSpec::product_sine(parse_real(&key("amplitude"), get("amplitude"))?, bx),
        other => {
            return Err(err(
                &key("kind"),
                format!("`{other}` is not zero, constant, gaussian or product_sine"),
            ))
        }
    };
    match get("support").trim() {
        "none" => {}
        s => {
            let v = parse_list(&key("support"), s)?;
            let [cx, cy, cz, r]: [f64; 4] = v
                .try_into()
                .map_err(|_| err(&key("support"), "needs cx,cy,cz,radius"))?;
            spec = spec.with_support([cx, cy, cz], positive(&key("support"), r)?);
        }
    }
    Ok(spec)
}
