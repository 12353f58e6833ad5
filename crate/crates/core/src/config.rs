//! Run configuration and the flat `key = value` configuration file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::solver::choose_domain;

/// Dirichlet data imposed at `x = ±L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// `u(±L, t) = u_h(t)`.
    HomogeneousState,
    /// `u(±L, t) = u_sub(±L, t)`.
    SubsolutionTrace,
}

impl FromStr for BoundaryMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "homogeneous_state" => Ok(Self::HomogeneousState),
            "subsolution_trace" => Ok(Self::SubsolutionTrace),
            other => Err(format!(
                "unknown boundary mode `{other}` (expected homogeneous_state or subsolution_trace)"
            )),
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HomogeneousState => "homogeneous_state",
            Self::SubsolutionTrace => "subsolution_trace",
        })
    }
}

/// Discretisation of one run on the truncated domain `[-L, L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub half_width: f64,
    /// Number of grid nodes, odd so that `x = 0` is a node.
    pub nx: usize,
    pub t_end: f64,
    pub dt: f64,
    pub output_times: Vec<f64>,
    pub boundary_mode: BoundaryMode,
    /// Tolerance for the tail-bound domain criterion.
    pub domain_tol: f64,
}

pub(crate) fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl SimConfig {
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    /// Number of time steps to reach `t`, if `t` is a multiple of `dt`.
    pub fn steps_to(&self, t: f64) -> Option<u64> {
        let n = (t / self.dt).round();
        if n >= 0.0 && (n * self.dt - t).abs() <= 1e-9 * t.max(self.dt) {
            Some(n as u64)
        } else {
            None
        }
    }

    /// Node count giving spacing at most `dx` on `[-half_width, half_width]`.
    pub fn nodes_for_spacing(half_width: f64, dx: f64) -> usize {
        2 * (half_width / dx).ceil() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 1.0) || !self.half_width.is_finite() {
            return Err(config_err(
                "L",
                format!("half-width must exceed 1, got {}", self.half_width),
            ));
        }
        if self.nx < 3 || self.nx.is_multiple_of(2) {
            return Err(config_err(
                "nx",
                format!("need an odd node count >= 3, got {}", self.nx),
            ));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(config_err(
                "t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        if !(self.dt > 0.0) || self.dt > self.t_end {
            return Err(config_err(
                "dt",
                format!("must lie in (0, t_end], got {}", self.dt),
            ));
        }
        if !(self.domain_tol > 0.0 && self.domain_tol < 1.0) {
            return Err(config_err("domain_tol", "must lie in (0, 1)"));
        }
        if self.output_times.is_empty() {
            return Err(config_err(
                "output_times",
                "at least one output time is required",
            ));
        }
        for w in self.output_times.windows(2) {
            if w[1] <= w[0] {
                return Err(config_err("output_times", "must be strictly increasing"));
            }
        }
        for &t in &self.output_times {
            if !(t > 0.0) || t > self.t_end * (1.0 + 1e-12) {
                return Err(config_err(
                    "output_times",
                    format!("{t} is outside (0, t_end]"),
                ));
            }
            if self.steps_to(t).is_none() {
                return Err(config_err(
                    "output_times",
                    format!("{t} is not an integer multiple of dt = {}", self.dt),
                ));
            }
        }
        if self.steps_to(self.t_end).is_none() {
            return Err(config_err("t_end", "must be an integer multiple of dt"));
        }
        Ok(())
    }
}

/// Contents of a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Vec<ProblemParams>,
    pub datum: InitialDatum,
    pub sim: SimConfig,
    /// Allowed sandwich slack, relative to `u_h(t)`.
    pub slack_rel: f64,
    /// Rate-fit window; defaults to `[t_end/10, t_end]`.
    pub fit_window: (f64, f64),
}

impl RunConfig {
    /// The single exponent of a `solve`/`verify` config.
    pub fn single_params(&self) -> Result<ProblemParams> {
        match self.params.as_slice() {
            [one] => Ok(*one),
            _ => Err(config_err("p", "expected exactly one exponent")),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("file", format!("{}: {e}", path.display())))?;
        text.parse()
    }
}

const KNOWN_KEYS: &[&str] = &[
    "p",
    "p_values",
    "L",
    "nx",
    "dx",
    "dt",
    "t_end",
    "output_times",
    "datum",
    "datum_knots",
    "datum_values",
    "boundary_mode",
    "domain_tol",
    "slack_rel",
    "fit_window",
];

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(&format!("line {}", lineno + 1), "expected `key = value`"))?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(config_err(&key, "duplicate key"));
        }
    }
    Ok(map)
}

fn number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| config_err(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(config_err(key, "must be finite"));
    }
    Ok(x)
}

fn exponent(key: &str, v: &str) -> Result<f64> {
    // accept "1/3" alongside decimals
    if let Some((n, d)) = v.split_once('/') {
        return Ok(number(key, n.trim())? / number(key, d.trim())?);
    }
    number(key, v)
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

/// `geom(a, b, n)`: `n` geometrically spaced times from `a` to `b`, each
/// rounded to the nearest multiple of `dt` and deduplicated.
fn output_times(v: &str, dt: f64) -> Result<Vec<f64>> {
    let key = "output_times";
    if let Some(inner) = v.strip_prefix("geom(").and_then(|r| r.strip_suffix(')')) {
        let args = list(key, inner)?;
        let [a, b, n] = args[..] else {
            return Err(config_err(key, "geom takes (start, end, count)"));
        };
        if !(a > 0.0 && b > a && n >= 2.0) {
            return Err(config_err(key, "geom needs 0 < start < end and count >= 2"));
        }
        let n = n as usize;
        let mut times: Vec<f64> = (0..n)
            .map(|i| {
                let t = a * (b / a).powf(i as f64 / (n - 1) as f64);
                (t / dt).round() * dt
            })
            .collect();
        times.dedup_by(|x, y| (*x - *y).abs() < 0.5 * dt);
        return Ok(times);
    }
    list(key, v)
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let map = parse_key_values(text)?;
        if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(config_err(k, "unknown key"));
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let require = |k: &str| get(k).ok_or_else(|| config_err(k, "missing required key"));

        let params = match (get("p"), get("p_values")) {
            (Some(p), None) => {
                vec![ProblemParams::new(exponent("p", p)?)
                    .map_err(|e| config_err("p", e.to_string()))?]
            }
            (None, Some(ps)) => {
                let mut out = Vec::new();
                for s in ps.split(',') {
                    let p = exponent("p_values", s.trim())?;
                    if out.iter().any(|q: &ProblemParams| q.p() == p) {
                        return Err(config_err("p_values", format!("duplicate exponent {p}")));
                    }
                    out.push(
                        ProblemParams::new(p).map_err(|e| config_err("p_values", e.to_string()))?,
                    );
                }
                out
            }
            (Some(_), Some(_)) => {
                return Err(config_err("p", "give either p or p_values, not both"))
            }
            (None, None) => return Err(config_err("p", "missing required key")),
        };

        let datum = match (get("datum"), get("datum_knots"), get("datum_values")) {
            (Some("tent") | None, None, None) => InitialDatum::tent(),
            (Some(other), None, None) => {
                return Err(config_err("datum", format!("unknown preset `{other}`")))
            }
            (None | Some("custom"), Some(k), Some(v)) => {
                InitialDatum::new(list("datum_knots", k)?, list("datum_values", v)?)
                    .map_err(|e| config_err("datum", e.to_string()))?
            }
            _ => {
                return Err(config_err(
                    "datum",
                    "use `datum = tent` or both datum_knots and datum_values",
                ))
            }
        };

        let t_end = number("t_end", require("t_end")?)?;
        if !(t_end > 0.0) {
            return Err(config_err(
                "t_end",
                format!("must be positive, got {t_end}"),
            ));
        }
        let dt = number("dt", require("dt")?)?;
        if !(dt > 0.0) {
            return Err(config_err("dt", format!("must be positive, got {dt}")));
        }
        let domain_tol = get("domain_tol")
            .map(|v| number("domain_tol", v))
            .transpose()?
            .unwrap_or(1e-12);
        if !(domain_tol > 0.0 && domain_tol < 1.0) {
            return Err(config_err("domain_tol", "must lie in (0, 1)"));
        }
        let half_width = match get("L") {
            None | Some("auto") => choose_domain(datum.mass(), t_end, domain_tol)
                .map_err(|e| config_err("L", e.to_string()))?,
            Some(v) => number("L", v)?,
        };
        let nx = match (get("nx"), get("dx")) {
            (Some(n), None) => n
                .parse::<usize>()
                .map_err(|_| config_err("nx", format!("`{n}` is not a node count")))?,
            (None, Some(d)) => {
                let dx = number("dx", d)?;
                if !(dx > 0.0) {
                    return Err(config_err("dx", "must be positive"));
                }
                SimConfig::nodes_for_spacing(half_width, dx)
            }
            _ => return Err(config_err("nx", "give exactly one of nx or dx")),
        };
        let output_times = output_times(require("output_times")?, dt)?;
        let boundary_mode = get("boundary_mode")
            .map(|v| {
                v.parse()
                    .map_err(|e: String| config_err("boundary_mode", e))
            })
            .transpose()?
            .unwrap_or(BoundaryMode::HomogeneousState);
        let sim = SimConfig {
            half_width,
            nx,
            t_end,
            dt,
            output_times,
            boundary_mode,
            domain_tol,
        };
        sim.validate()?;

        let slack_rel = get("slack_rel")
            .map(|v| number("slack_rel", v))
            .transpose()?
            .unwrap_or(1e-3);
        if !(slack_rel >= 0.0) {
            return Err(config_err("slack_rel", "must be nonnegative"));
        }
        let fit_window = match get("fit_window") {
            Some(v) => match list("fit_window", v)?[..] {
                [lo, hi] if lo >= 1.0 && hi > lo => (lo, hi),
                _ => {
                    return Err(config_err(
                        "fit_window",
                        "expected `lo, hi` with 1 <= lo < hi",
                    ))
                }
            },
            None => (t_end / 10.0, t_end),
        };
        Ok(Self {
            params,
            datum,
            sim,
            slack_rel,
            fit_window,
        })
    }
}
