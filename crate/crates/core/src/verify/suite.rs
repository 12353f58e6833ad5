//! The full verification suite for one exponent, as driven by `verify`.

use serde::Serialize;

use super::{
    calibrate_slack, check_rate_bounds, check_sandwich, check_subsolution_residual_sign, lattice,
    linearized_residual_study, supersolution_stencil_study, CheckRecord, SandwichReport, Slack,
    Stencil, VerificationReport,
};
use crate::config::{RunConfig, SimConfig};
use crate::error::{invalid, Result};
use crate::kernels::KernelEvaluator;
use crate::params::ProblemParams;
use crate::solver::{run, RunResult};

/// Coarsest spacing the suite accepts; the calibration runs go four times
/// coarser than this.
pub const MAX_VERIFY_DX: f64 = 0.1;
pub const MAX_VERIFY_DT: f64 = 0.05;

/// Safety factor on the refinement-study error estimate.
pub const CALIBRATION_SAFETY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// Per-axis size of the subsolution residual lattice.
    pub sub_lattice: usize,
    /// Per-axis size of the supersolution stencil-study lattice.
    pub sup_lattice: usize,
    pub stencil: Stencil,
    /// Corrupt the last frame before checking (exercises the failure path).
    pub inject_spike: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            sub_lattice: 20,
            sup_lattice: 6,
            stencil: Stencil::default(),
            inject_spike: false,
        }
    }
}

/// Reject grids too coarse for a meaningful refinement study, and round the
/// node count up so that the grid coarsens cleanly by four.
pub fn prepare_for_verification(sim: &SimConfig) -> Result<SimConfig> {
    if sim.dx() > MAX_VERIFY_DX {
        return Err(invalid(
            "dx",
            format!(
                "{} is above the verification floor {MAX_VERIFY_DX}; refine the grid",
                sim.dx()
            ),
        ));
    }
    if sim.dt > MAX_VERIFY_DT {
        return Err(invalid(
            "dt",
            format!(
                "{} is above the verification floor {MAX_VERIFY_DT}; refine the time step",
                sim.dt
            ),
        ));
    }
    let coarse_steps = sim.steps_to(sim.t_end).unwrap_or(0);
    let aligned = sim.output_times.iter().all(|&t| {
        SimConfig {
            dt: 4.0 * sim.dt,
            ..sim.clone()
        }
        .steps_to(t)
        .is_some()
    });
    if !coarse_steps.is_multiple_of(4) || !aligned {
        return Err(invalid(
            "dt",
            "output times must be multiples of 4*dt for the refinement study",
        ));
    }
    let mut out = sim.clone();
    // the coarsest level must keep an odd node count
    out.nx += (8 - (sim.nx - 1) % 8) % 8;
    out.validate()?;
    Ok(out)
}

/// Add `fraction * u_h(t)` at the centre node of the last frame.
pub fn inject_spike(result: &mut RunResult, ev: &KernelEvaluator, fraction: f64) {
    if let Some(frame) = result.frames.last_mut() {
        let mid = frame.values.len() / 2;
        frame.values[mid] += fraction * ev.homogeneous(frame.t);
    }
}

fn sandwich_records(report: &SandwichReport, lattice: &str, slack: f64) -> Vec<CheckRecord> {
    report
        .checks
        .iter()
        .map(|c| {
            CheckRecord::new(c.name.clone(), lattice, c.worst_excess, slack)
                .require(c.passed)
                .tolerance("worst_violation", c.worst_violation)
                .detail(c)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct BudgetDetail {
    times: Vec<f64>,
    estimated_errors: Vec<f64>,
    observed_orders: Vec<f64>,
    constant: f64,
}

/// Solve, calibrate the discretisation slack and run every check.
pub fn verify_suite(
    config: &RunConfig,
    params: ProblemParams,
    options: &SuiteOptions,
) -> Result<(RunResult, VerificationReport)> {
    let sim = prepare_for_verification(&config.sim)?;
    let ev = KernelEvaluator::with_defaults(config.datum.clone(), params)?;
    let calibration = calibrate_slack(&config.datum, params, &sim)?;
    let mut result = run(&config.datum, params, &sim)?;
    if options.inject_spike {
        inject_spike(&mut result, &ev, 0.1);
    }
    let mut report = VerificationReport::new(params.p());
    let grid = format!(
        "{} nodes on [-{}, {}], dx = {}, dt = {}, times {:?}",
        sim.nx,
        sim.half_width,
        sim.half_width,
        sim.dx(),
        sim.dt,
        sim.output_times
    );

    // scheme error must fit inside the relative budget once t >= 1; earlier
    // frames are dominated by the kinks of the datum while u_h is still tiny
    let budget_margin = calibration
        .times
        .iter()
        .zip(&calibration.errors)
        .filter(|(&t, _)| t >= 1.0)
        .map(|(&t, &e)| CALIBRATION_SAFETY * e - config.slack_rel * ev.homogeneous(t))
        .fold(f64::NEG_INFINITY, f64::max);
    report.push(
        CheckRecord::new(
            "discretisation_budget",
            grid.clone(),
            budget_margin,
            calibration.slack,
        )
        .tolerance("slack_rel", config.slack_rel)
        .tolerance("safety", CALIBRATION_SAFETY)
        .detail(&BudgetDetail {
            times: calibration.times.clone(),
            estimated_errors: calibration.errors.clone(),
            observed_orders: calibration.orders.clone(),
            constant: calibration.constant,
        }),
    );

    let slack = Slack {
        absolute: CALIBRATION_SAFETY * calibration.slack,
        relative: 0.0,
    };
    let sandwich = check_sandwich(&result, &ev, slack)?;
    for r in sandwich_records(&sandwich, &grid, slack.absolute) {
        report.push(r);
    }
    if sim.output_times.iter().any(|&t| t >= 2.0) {
        let rate = check_rate_bounds(&result, &ev, slack)?;
        for r in sandwich_records(&rate, &grid, slack.absolute) {
            report.push(r);
        }
    }

    let t_hi = sim.t_end.min(50.0);
    let n = options.sub_lattice;
    let sub_pts = lattice((-5.0, 5.0), (0.1_f64.min(t_hi), t_hi), n, n);
    report.push(check_subsolution_residual_sign(&ev, &sub_pts)?);

    let h = options.stencil.ht;
    if t_hi > 1.0 + 2.0 * h {
        let n = options.sup_lattice;
        let sup_pts = lattice((-5.0, 5.0), (1.0 + h, t_hi), n, n);
        let study = supersolution_stencil_study(&ev, &sup_pts, options.stencil)?;
        let ratio = study.ratios[0];
        let ratio_ok = (3.5..=4.5).contains(&ratio);
        report.push(
            CheckRecord::new(
                "supersolution_residual_sign",
                super::describe(&sup_pts),
                -study.min_margin,
                0.0,
            )
            .tolerance("eps_fd", study.errors[0])
            .tolerance("stencil_h", h)
            .detail(&study),
        );
        report.push(
            CheckRecord::new(
                "supersolution_stencil_ratio",
                super::describe(&sup_pts),
                if ratio_ok {
                    -(ratio - 4.0).abs()
                } else {
                    (ratio - 4.0).abs()
                },
                0.0,
            )
            .tolerance("ratio_lo", 3.5)
            .tolerance("ratio_hi", 4.5)
            .tolerance("ratio", ratio),
        );
        let w = linearized_residual_study(&ev, &sup_pts, options.stencil)?;
        let ratio = w[0] / w[1];
        let ok = (3.5..=4.5).contains(&ratio);
        report.push(
            CheckRecord::new(
                "linearized_residual_ratio",
                super::describe(&sup_pts),
                if ok {
                    -(ratio - 4.0).abs()
                } else {
                    (ratio - 4.0).abs()
                },
                0.0,
            )
            .tolerance("residual_h", w[0])
            .tolerance("residual_h_half", w[1])
            .tolerance("ratio", ratio),
        );
    }
    Ok((result, report))
}
