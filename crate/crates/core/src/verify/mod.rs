//! Executable checks of the comparison bounds, residual signs, algebraic
//! rates and the stability regime.

mod bounds;
mod calibrate;
mod rate;
mod regime;
mod report;
mod residual;
mod suite;

use rayon::prelude::*;
use serde::Serialize;

pub use bounds::{
    check_rate_bounds, check_sandwich, BoundCheck, RateBoundsReport, SandwichReport, Slack,
};
pub use calibrate::{calibrate_slack, SlackCalibration};
pub use rate::{fit_power_law, fit_rate, RateFit, MIN_FIT_POINTS};
pub use regime::{
    classify_regime, Regime, RegimeClassification, DEFAULT_BAND, TRANSITIONAL_EXPONENT,
};
pub use report::{CheckRecord, VerificationReport};
pub use residual::{
    linearized_pde_residual, residual_operator, residual_operator_split,
    subsolution_residual_analytic, subsolution_residual_fd, supersolution_residual_analytic,
    supersolution_residual_fd, Stencil,
};
pub use suite::{
    inject_spike, prepare_for_verification, verify_suite, SuiteOptions, CALIBRATION_SAFETY,
    MAX_VERIFY_DT, MAX_VERIFY_DX,
};

use crate::error::Result;
use crate::kernels::KernelEvaluator;
use crate::solver::RunResult;

/// Uniform tensor lattice of `(x, t)` points, endpoints included.
pub fn lattice(x_range: (f64, f64), t_range: (f64, f64), nx: usize, nt: usize) -> Vec<(f64, f64)> {
    let step = |(lo, hi): (f64, f64), n: usize, i: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    (0..nt)
        .flat_map(|j| (0..nx).map(move |i| (step(x_range, nx, i), step(t_range, nt, j))))
        .collect()
}

fn describe(points: &[(f64, f64)]) -> String {
    let (mut xl, mut xh, mut tl, mut th) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, t) in points {
        xl = xl.min(x);
        xh = xh.max(x);
        tl = tl.min(t);
        th = th.max(t);
    }
    format!(
        "{} points, x in [{xl}, {xh}], t in [{tl}, {th}]",
        points.len()
    )
}

/// `N(u_sub) <= 0` from the closed-form residual at every lattice point.
pub fn check_subsolution_residual_sign(
    ev: &KernelEvaluator,
    points: &[(f64, f64)],
) -> Result<CheckRecord> {
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(x, t)| subsolution_residual_analytic(ev, x, t))
        .collect::<Result<_>>()?;
    let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CheckRecord::new(
        "subsolution_residual_sign",
        describe(points),
        worst,
        0.0,
    ))
}

/// Stencil-error study of the finite-difference residual of `u_sup`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StencilStudy {
    pub stencil: Stencil,
    /// `max |N_h(u_sup) - N(u_sup)|` for `h`, `h/2`, `h/4`.
    pub errors: [f64; 3],
    /// Successive error ratios; both near 4 for a second-order stencil.
    pub ratios: [f64; 2],
    /// `min (N_h(u_sup) + eps_fd(h))`, nonnegative when the sign holds.
    pub min_margin: f64,
    /// `min N(u_sup)` from the closed-form residual.
    pub min_analytic: f64,
}

/// Finite-difference residual of `u_sup` against the closed-form residual at
/// three stencil levels.
///
/// The stencil error `eps_fd(h)` at each level is the largest deviation of
/// the difference quotient from the closed form over the lattice; the sign
/// check is `N_h(u_sup) >= -eps_fd(h)`.
pub fn supersolution_stencil_study(
    ev: &KernelEvaluator,
    points: &[(f64, f64)],
    stencil: Stencil,
) -> Result<StencilStudy> {
    let exact: Vec<f64> = points
        .par_iter()
        .map(|&(x, t)| supersolution_residual_analytic(ev, x, t))
        .collect::<Result<_>>()?;
    let levels = [stencil, stencil.halved(), stencil.halved().halved()];
    let mut errors = [0.0; 3];
    let mut min_margin = f64::INFINITY;
    for (k, s) in levels.iter().enumerate() {
        let fd: Vec<f64> = points
            .par_chunks(16)
            .map(|chunk| supersolution_residual_fd(ev, chunk, *s))
            .collect::<Result<Vec<_>>>()?
            .concat();
        errors[k] = fd
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if k == 0 {
            min_margin = fd
                .iter()
                .map(|r| r + errors[0])
                .fold(f64::INFINITY, f64::min);
        }
    }
    Ok(StencilStudy {
        stencil,
        errors,
        ratios: [errors[0] / errors[1], errors[1] / errors[2]],
        min_margin,
        min_analytic: exact.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Largest finite-difference residual of the linear PDE solved by `W`, for
/// `h` and `h/2`.
pub fn linearized_residual_study(
    ev: &KernelEvaluator,
    points: &[(f64, f64)],
    stencil: Stencil,
) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (k, s) in [stencil, stencil.halved()].iter().enumerate() {
        let r: Vec<f64> = points
            .par_chunks(16)
            .map(|chunk| linearized_pde_residual(ev, chunk, *s))
            .collect::<Result<Vec<_>>>()?
            .concat();
        out[k] = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    Ok(out)
}

/// Sup-deviation of a transitional-exponent run against
/// `[c_-(0, t), sup_x W(x, t)]` at each output time in `window`, with a
/// multiplicative slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketSample {
    pub t: f64,
    pub deviation: f64,
    pub lower: f64,
    pub upper: f64,
    pub c_plus_at_origin: f64,
}

pub fn transitional_bracket(
    result: &RunResult,
    ev: &KernelEvaluator,
    window: (f64, f64),
) -> Result<Vec<BracketSample>> {
    let mut out = Vec::new();
    for (frame, dev) in result.frames.iter().zip(&result.deviation) {
        let t = frame.t;
        if t < window.0 || t > window.1 || t <= 1.0 {
            continue;
        }
        let upper = result
            .grid
            .par_iter()
            .map(|&x| ev.linearized(x, t))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(BracketSample {
            t,
            deviation: dev.sup_deviation,
            lower: ev.c_minus(0.0, t)?,
            upper,
            c_plus_at_origin: ev.c_plus(0.0, t)?,
        });
    }
    Ok(out)
}

/// Worst amount by which the deviation leaves `[lower/(1+s), upper*(1+s)]`.
pub fn bracket_margin(samples: &[BracketSample], rel_slack: f64) -> f64 {
    samples
        .iter()
        .map(|s| {
            let below = s.lower / (1.0 + rel_slack) - s.deviation;
            let above = s.deviation - s.upper * (1.0 + rel_slack);
            below.max(above)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
