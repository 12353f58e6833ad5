//! Discretisation-error estimate from a three-level refinement study.

use serde::Serialize;

use crate::config::SimConfig;
use crate::datum::InitialDatum;
use crate::error::{invalid, Result};
use crate::params::ProblemParams;
use crate::solver::{run, RunResult};

/// Error model `C (dx^2 + dt^2)` fitted from runs at `(4dx, 4dt)`,
/// `(2dx, 2dt)` and `(dx, dt)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackCalibration {
    /// Observed convergence order per output time.
    pub orders: Vec<f64>,
    /// Richardson estimate of the finest-level error per output time.
    pub errors: Vec<f64>,
    pub times: Vec<f64>,
    pub constant: f64,
    pub slack: f64,
}

fn coarsened(config: &SimConfig, factor: usize) -> Result<SimConfig> {
    if !(config.nx - 1).is_multiple_of(2 * factor) {
        return Err(invalid(
            "nx",
            format!(
                "refinement study needs (nx - 1) divisible by {}",
                2 * factor
            ),
        ));
    }
    let dt = config.dt * factor as f64;
    let coarse = SimConfig {
        nx: (config.nx - 1) / factor + 1,
        dt,
        ..config.clone()
    };
    coarse.validate()?;
    Ok(coarse)
}

fn max_diff_on_coarse(coarse: &RunResult, fine: &RunResult, stride: usize, frame: usize) -> f64 {
    coarse.frames[frame]
        .values
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - fine.frames[frame].values[i * stride]).abs())
        .fold(0.0, f64::max)
}

/// Run the three levels and fit the error constant.
pub fn calibrate_slack(
    datum: &InitialDatum,
    params: ProblemParams,
    config: &SimConfig,
) -> Result<SlackCalibration> {
    let coarse_cfg = coarsened(config, 4)?;
    let mid_cfg = coarsened(config, 2)?;
    let (coarse, (mid, fine)) = rayon::join(
        || run(datum, params, &coarse_cfg),
        || {
            rayon::join(
                || run(datum, params, &mid_cfg),
                || run(datum, params, config),
            )
        },
    );
    let (coarse, mid, fine) = (coarse?, mid?, fine?);
    let mut orders = Vec::new();
    let mut errors = Vec::new();
    for k in 0..fine.frames.len() {
        let e_cm = max_diff_on_coarse(&coarse, &mid, 2, k);
        let e_mf = max_diff_on_coarse(&mid, &fine, 2, k);
        let q = if e_mf > 0.0 && e_cm > 0.0 {
            (e_cm / e_mf).log2()
        } else {
            2.0
        };
        // guard against pre-asymptotic ratios: never assume better than 2nd order
        let q_eff = q.clamp(0.5, 2.0);
        orders.push(q);
        errors.push(e_mf / (2f64.powf(q_eff) - 1.0));
    }
    let h2 = config.dx().powi(2) + config.dt.powi(2);
    let slack = errors.iter().copied().fold(0.0, f64::max);
    Ok(SlackCalibration {
        orders,
        errors,
        times: config.output_times.clone(),
        constant: slack / h2,
        slack,
    })
}
