//! Pointwise inequality checks of a computed solution against the explicit
//! bounds: the global two-sided bound, the upper envelope, the comparison
//! sandwich (t >= 1) and the algebraic-rate bounds (t >= 2).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::KernelEvaluator;
use crate::solver::RunResult;

/// Allowed violation `absolute + relative * u_h(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slack {
    pub absolute: f64,
    pub relative: f64,
}

impl Slack {
    pub const ZERO: Slack = Slack {
        absolute: 0.0,
        relative: 0.0,
    };

    pub fn relative(relative: f64) -> Self {
        Self {
            absolute: 0.0,
            relative,
        }
    }

    pub fn at(&self, u_h: f64) -> f64 {
        self.absolute + self.relative * u_h
    }
}

/// Worst case of one inequality over all grid nodes and admissible times.
///
/// `violation` is the signed amount by which the inequality fails (negative
/// when it holds); the check passes iff every violation is within slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub samples: usize,
    pub worst_violation: f64,
    /// Largest `violation - slack(t)`; `<= 0` means pass.
    pub worst_excess: f64,
    pub worst_x: f64,
    pub worst_t: f64,
    pub times: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub checks: Vec<BoundCheck>,
    pub slack: Slack,
    pub worst_violation: f64,
    pub passed: bool,
}

impl SandwichReport {
    fn from_checks(checks: Vec<BoundCheck>, slack: Slack) -> Self {
        let worst_violation = checks
            .iter()
            .map(|c| c.worst_violation)
            .fold(f64::NEG_INFINITY, f64::max);
        let passed = checks.iter().all(|c| c.passed);
        Self {
            checks,
            slack,
            worst_violation,
            passed,
        }
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub type RateBoundsReport = SandwichReport;

struct Accumulator {
    name: &'static str,
    samples: usize,
    worst_violation: f64,
    worst_excess: f64,
    at: (f64, f64),
    times: Vec<f64>,
}

impl Accumulator {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            samples: 0,
            worst_violation: f64::NEG_INFINITY,
            worst_excess: f64::NEG_INFINITY,
            at: (f64::NAN, f64::NAN),
            times: Vec::new(),
        }
    }

    // violations: (x, violation) at time t
    fn absorb(&mut self, t: f64, slack: f64, violations: &[(f64, f64)]) {
        self.times.push(t);
        for &(x, v) in violations {
            self.samples += 1;
            self.worst_violation = self.worst_violation.max(v);
            let excess = v - slack;
            if excess > self.worst_excess || self.worst_excess.is_nan() {
                self.worst_excess = excess;
                self.at = (x, t);
            }
            if v.is_nan() {
                self.worst_excess = f64::NAN;
            }
        }
    }

    fn finish(self) -> BoundCheck {
        BoundCheck {
            name: self.name.to_string(),
            samples: self.samples,
            worst_violation: self.worst_violation,
            worst_excess: self.worst_excess,
            worst_x: self.at.0,
            worst_t: self.at.1,
            passed: self.samples > 0 && self.worst_excess <= 0.0,
            times: self.times,
        }
    }
}

// one grid node: the value, the envelope cap and, from t = 1, the
// (subsolution, supersolution) pair
struct NodeBounds {
    x: f64,
    u: f64,
    env: f64,
    pair: Option<(f64, f64)>,
}

fn ensure_compatible(result: &RunResult, ev: &KernelEvaluator) -> Result<()> {
    if result.p != ev.p() {
        return Err(Error::Mismatch(format!(
            "run has p = {}, evaluator has p = {}",
            result.p,
            ev.p()
        )));
    }
    if &result.datum != ev.datum() {
        return Err(Error::Mismatch(
            "run and evaluator use different initial data".into(),
        ));
    }
    for frame in &result.frames {
        if frame.values.len() != result.grid.len() {
            return Err(Error::Mismatch(format!(
                "frame at t = {} has wrong length",
                frame.t
            )));
        }
    }
    Ok(())
}

/// Check `u_h < u < (||u0||^{1-p} + (1-p)t)^{1/(1-p)}` and `u <= ū⁺` at every
/// output time, plus `u_sub <= u <= u_sup` at output times `t >= 1`.
pub fn check_sandwich(
    result: &RunResult,
    ev: &KernelEvaluator,
    slack: Slack,
) -> Result<SandwichReport> {
    ensure_compatible(result, ev)?;
    let mut lower = Accumulator::new("global_lower");
    let mut upper = Accumulator::new("global_upper");
    let mut envelope = Accumulator::new("upper_envelope");
    let mut sub = Accumulator::new("subsolution");
    let mut sup = Accumulator::new("supersolution");
    for frame in &result.frames {
        let t = frame.t;
        let u_h = ev.homogeneous(t);
        let s = slack.at(u_h);
        let cap = ev.solution_upper(t);
        // comparisons are made on u itself: rounding is monotone, so
        // fl(u_h + b) <= fl(u_h + e) whenever b <= e, and an exact envelope
        // passes with zero slack
        let rows: Vec<NodeBounds> = result
            .grid
            .par_iter()
            .zip(frame.values.par_iter())
            .map(|(&x, &u)| {
                let env = u_h + ev.envelope_upper_excess(x, t).expect("t >= 0");
                let pair = (t >= 1.0).then(|| {
                    (
                        u_h + ev.subsolution_excess(x, t).expect("t >= 0"),
                        u_h + ev.linearized(x, t).expect("t >= 1"),
                    )
                });
                NodeBounds { x, u, env, pair }
            })
            .collect();
        let v: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, u_h - r.u)).collect();
        lower.absorb(t, s, &v);
        let v: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.u - cap)).collect();
        upper.absorb(t, s, &v);
        let v: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.u - r.env)).collect();
        envelope.absorb(t, s, &v);
        if t >= 1.0 {
            let v: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.x, r.pair.unwrap().0 - r.u))
                .collect();
            sub.absorb(t, s, &v);
            let v: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.x, r.u - r.pair.unwrap().1))
                .collect();
            sup.absorb(t, s, &v);
        }
    }
    let mut checks = vec![lower.finish(), upper.finish(), envelope.finish()];
    if !sub.times.is_empty() {
        checks.push(sub.finish());
        checks.push(sup.finish());
    }
    Ok(SandwichReport::from_checks(checks, slack))
}

/// Check `c_-(x,t) r(t) - slack <= u - u_h <= c_+(x,t) r(t) + slack` with
/// `r(t) = ((1-p)t)^{(3p-1)/(2(1-p))}` at every output time `t >= 2`.
pub fn check_rate_bounds(
    result: &RunResult,
    ev: &KernelEvaluator,
    slack: Slack,
) -> Result<RateBoundsReport> {
    ensure_compatible(result, ev)?;
    if !result.frames.iter().any(|f| f.t >= 2.0) {
        return Err(Error::Mismatch(
            "rate bounds need an output time >= 2".into(),
        ));
    }
    let mut lower = Accumulator::new("rate_lower");
    let mut upper = Accumulator::new("rate_upper");
    for frame in result.frames.iter().filter(|f| f.t >= 2.0) {
        let t = frame.t;
        let u_h = ev.homogeneous(t);
        let s = slack.at(u_h);
        let scale = ev.rate_scale(t);
        let rows: Vec<(f64, f64, f64, f64)> = result
            .grid
            .par_iter()
            .zip(frame.values.par_iter())
            .map(|(&x, &u)| {
                let lo = u_h + ev.c_minus(x, t).expect("t > 0") * scale;
                let hi = u_h + ev.rate_upper(x, t).expect("t > 1");
                (x, u, lo, hi)
            })
            .collect();
        let v: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.2 - r.1)).collect();
        lower.absorb(t, s, &v);
        let v: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1 - r.3)).collect();
        upper.absorb(t, s, &v);
    }
    Ok(SandwichReport::from_checks(
        vec![lower.finish(), upper.finish()],
        slack,
    ))
}
