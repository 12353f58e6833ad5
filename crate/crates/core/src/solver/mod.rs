//! Strang-split integration of `u_t = u_xx + [u^p]^+` on `[-L, L]`.
//!
//! Each step is a half reaction step, one Crank-Nicolson diffusion step and
//! another half reaction step. The reaction sub-flow `du/dτ = u^p` is
//! integrated exactly, so the non-Lipschitz point `u = 0` needs no special
//! treatment. Dirichlet data at `±L` follow the homogeneous state (or the
//! subsolution trace).

mod tridiag;

use std::f64::consts::PI;

use serde::Serialize;

pub use tridiag::ConstTridiagonal;

use crate::config::{BoundaryMode, SimConfig};
use crate::datum::InitialDatum;
use crate::error::{invalid, Error, Result};
use crate::kernels::{tail_bound_value, KernelEvaluator};
use crate::params::{homogeneous_unchecked, ProblemParams};

/// The field `u(x_i, t)` on the uniform grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionFrame {
    pub t: f64,
    pub values: Vec<f64>,
}

/// Smallest half-width `L` such that the tail bound
/// `mass / (2 sqrt(π t)) exp(-(L-1)^2 / (4t))` stays below `tol` for every
/// `t` in `(0, t_end]`.
pub fn choose_domain(mass: f64, t_end: f64, tol: f64) -> Result<f64> {
    if !(t_end > 0.0) {
        return Err(invalid("t_end", format!("must be positive, got {t_end}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", format!("must lie in (0, 1), got {tol}")));
    }
    if !(mass > 0.0) {
        return Err(invalid("mass", "datum mass must be positive"));
    }
    let c = mass / (2.0 * PI.sqrt() * tol);
    let arg = c / t_end.sqrt();
    let mut l = if arg > 1.0 {
        1.0 + 2.0 * (t_end * arg.ln()).sqrt()
    } else {
        1.0
    };
    // The bound peaks in t at t* = (L-1)^2/2; when t* < t_end the peak value
    // c tol sqrt(2) e^{-1/2} / (L-1) must itself stay below tol.
    if (l - 1.0).powi(2) / 2.0 < t_end {
        l = l.max(1.0 + 2f64.sqrt() * c * (-0.5f64).exp());
    }
    while max_tail_bound(mass, l, t_end) >= tol {
        l = l * (1.0 + f64::EPSILON) + f64::MIN_POSITIVE;
    }
    Ok(l)
}

/// `max_{0 < t <= t_end}` of the tail bound at `x = l`.
pub fn max_tail_bound(mass: f64, l: f64, t_end: f64) -> f64 {
    let t_star = ((l - 1.0).powi(2) / 2.0).min(t_end);
    if t_star <= 0.0 {
        return f64::INFINITY;
    }
    tail_bound_value(mass, l, t_star)
}

/// Exact flow of `du/dτ = [u^p]^+` over duration `tau`:
/// `(u^{1-p} + (1-p) tau)^{1/(1-p)}`, with negative `u` clamped to 0.
#[inline]
pub fn reaction_exact(u: f64, tau: f64, p: f64) -> f64 {
    let a = 1.0 - p;
    (u.max(0.0).powf(a) + a * tau).powf(1.0 / a)
}

// Backward reaction flow, clamped at 0.
#[inline]
fn reaction_backward(u: f64, tau: f64, p: f64) -> f64 {
    let a = 1.0 - p;
    (u.max(0.0).powf(a) - a * tau).max(0.0).powf(1.0 / a)
}

fn react_in_place(values: &mut [f64], tau: f64, p: f64) {
    let a = 1.0 - p;
    let q = 1.0 / a;
    let shift = a * tau;
    for v in values.iter_mut() {
        *v = (v.max(0.0).powf(a) + shift).powf(q);
    }
}

/// Workspace for repeated Crank-Nicolson steps with fixed `dt`, `dx`.
#[derive(Debug, Clone)]
pub struct DiffusionWorkspace {
    ratio: f64,
    matrix: ConstTridiagonal,
    rhs: Vec<f64>,
}

impl DiffusionWorkspace {
    pub fn new(nx: usize, dx: f64, dt: f64) -> Result<Self> {
        if nx < 3 {
            return Err(invalid("nx", "need at least three nodes"));
        }
        if !(dx > 0.0 && dt > 0.0) {
            return Err(invalid("dt", "dx and dt must be positive"));
        }
        let ratio = dt / (dx * dx);
        let matrix = ConstTridiagonal::new(nx - 2, 1.0 + ratio, -0.5 * ratio)?;
        Ok(Self {
            ratio,
            matrix,
            rhs: vec![0.0; nx - 2],
        })
    }

    /// One trapezoidal step of `u_t = u_xx` with Dirichlet values `bounds`
    /// held fixed over the step.
    pub fn step(&mut self, values: &mut [f64], bounds: (f64, f64)) {
        let n = values.len();
        debug_assert_eq!(n, self.matrix.len() + 2);
        let half = 0.5 * self.ratio;
        values[0] = bounds.0;
        values[n - 1] = bounds.1;
        for i in 1..n - 1 {
            self.rhs[i - 1] =
                (1.0 - self.ratio) * values[i] + half * (values[i - 1] + values[i + 1]);
        }
        self.rhs[0] += half * bounds.0;
        self.rhs[n - 3] += half * bounds.1;
        self.matrix.solve_in_place(&mut self.rhs);
        values[1..n - 1].copy_from_slice(&self.rhs);
    }
}

/// One Crank-Nicolson diffusion step of `frame` on a grid of spacing `dx`.
pub fn diffusion_step(
    frame: &SolutionFrame,
    dx: f64,
    dt: f64,
    bounds: (f64, f64),
) -> Result<SolutionFrame> {
    let mut ws = DiffusionWorkspace::new(frame.values.len(), dx, dt)?;
    let mut values = frame.values.clone();
    ws.step(&mut values, bounds);
    Ok(SolutionFrame {
        t: frame.t + dt,
        values,
    })
}

/// Source of the Dirichlet data at `x = ±L`.
#[derive(Debug, Clone)]
pub enum BoundaryTrace {
    Homogeneous,
    Subsolution(Box<KernelEvaluator>),
    /// Spatially constant solution started from `u = start` at `t = 0`.
    ReactionFlow {
        start: f64,
    },
}

impl BoundaryTrace {
    fn value(&self, x: f64, t: f64, p: f64) -> f64 {
        match self {
            Self::Homogeneous => homogeneous_unchecked(t, p),
            Self::Subsolution(ev) => ev
                .subsolution(x, t)
                .unwrap_or_else(|_| homogeneous_unchecked(t, p)),
            Self::ReactionFlow { start } => reaction_exact(*start, t, p),
        }
    }

    // Dirichlet value for the diffusion sub-step that ends at `t_next`:
    // the target trace pulled back through the last half reaction step.
    fn diffusion_value(&self, x: f64, t_next: f64, dt: f64, p: f64) -> f64 {
        match self {
            Self::Homogeneous => homogeneous_unchecked(t_next - 0.5 * dt, p),
            Self::Subsolution(_) => reaction_backward(self.value(x, t_next, p), 0.5 * dt, p),
            Self::ReactionFlow { start } => reaction_exact(*start, t_next - 0.5 * dt, p),
        }
    }
}

/// Time-stepping state for one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    config: SimConfig,
    params: ProblemParams,
    boundary: BoundaryTrace,
    steps: u64,
    values: Vec<f64>,
    workspace: DiffusionWorkspace,
}

impl SolverState {
    /// Start from arbitrary nonnegative grid values at `t = 0`.
    pub fn new(
        config: SimConfig,
        params: ProblemParams,
        initial: Vec<f64>,
        boundary: BoundaryTrace,
    ) -> Result<Self> {
        config.validate()?;
        if initial.len() != config.nx {
            return Err(invalid(
                "initial",
                format!("{} values for {} nodes", initial.len(), config.nx),
            ));
        }
        let workspace = DiffusionWorkspace::new(config.nx, config.dx(), config.dt)?;
        Ok(Self {
            config,
            params,
            boundary,
            steps: 0,
            values: initial,
            workspace,
        })
    }

    pub fn from_datum(
        datum: &InitialDatum,
        params: ProblemParams,
        config: SimConfig,
    ) -> Result<Self> {
        let initial = config.grid().iter().map(|&x| datum.value(x)).collect();
        let boundary = match config.boundary_mode {
            BoundaryMode::HomogeneousState => BoundaryTrace::Homogeneous,
            BoundaryMode::SubsolutionTrace => BoundaryTrace::Subsolution(Box::new(
                KernelEvaluator::with_defaults(datum.clone(), params)?,
            )),
        };
        Self::new(config, params, initial, boundary)
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn frame(&self) -> SolutionFrame {
        SolutionFrame {
            t: self.time(),
            values: self.values.clone(),
        }
    }

    fn bounds_for_step(&self, t_next: f64) -> (f64, f64) {
        let (dt, p, l) = (self.config.dt, self.params.p(), self.config.half_width);
        (
            self.boundary.diffusion_value(-l, t_next, dt, p),
            self.boundary.diffusion_value(l, t_next, dt, p),
        )
    }

    fn pin_boundary(&mut self) {
        let (t, p, l) = (self.time(), self.params.p(), self.config.half_width);
        let n = self.values.len();
        self.values[0] = self.boundary.value(-l, t, p);
        self.values[n - 1] = self.boundary.value(l, t, p);
    }

    /// One Strang step: reaction `dt/2`, diffusion `dt`, reaction `dt/2`.
    pub fn step(&mut self) {
        self.advance(1);
    }

    /// `n` Strang steps. Adjacent half reaction steps are fused into one
    /// full step, which is exact because the reaction flow is autonomous.
    pub fn advance(&mut self, n: u64) {
        if n == 0 {
            return;
        }
        let (dt, p) = (self.config.dt, self.params.p());
        react_in_place(&mut self.values, 0.5 * dt, p);
        for k in 0..n {
            let t_next = (self.steps + k + 1) as f64 * dt;
            let bounds = self.bounds_for_step(t_next);
            self.workspace.step(&mut self.values, bounds);
            let tau = if k + 1 == n { 0.5 * dt } else { dt };
            react_in_place(&mut self.values, tau, p);
        }
        self.steps += n;
        self.pin_boundary();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationSample {
    pub t: f64,
    pub sup_deviation: f64,
    pub u_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub half_width: f64,
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps: u64,
    pub boundary_mode: BoundaryMode,
    /// `max_t tail_bound(L - 1, t)` over the output times.
    pub boundary_influence: f64,
    pub required_half_width: f64,
}

/// Frames at the requested output times plus the deviation series
/// `sup_x (u - u_h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub p: f64,
    pub datum: InitialDatum,
    pub grid: Vec<f64>,
    pub frames: Vec<SolutionFrame>,
    pub deviation: Vec<DeviationSample>,
    pub diagnostics: Diagnostics,
}

/// Integrate from `datum` and record every output time of `config`.
pub fn run(datum: &InitialDatum, params: ProblemParams, config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let required = choose_domain(datum.mass(), config.t_end, config.domain_tol)?;
    if config.half_width < required * (1.0 - 1e-12) {
        return Err(Error::DomainTooSmall {
            half_width: config.half_width,
            required,
        });
    }
    let mut state = SolverState::from_datum(datum, params, config.clone())?;
    let mut frames = Vec::with_capacity(config.output_times.len());
    let mut deviation = Vec::with_capacity(config.output_times.len());
    for &t_out in &config.output_times {
        let target = config.steps_to(t_out).expect("validated output time");
        state.advance(target - state.steps());
        let frame = state.frame();
        let u_h = homogeneous_unchecked(frame.t, params.p());
        let sup = frame
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        deviation.push(DeviationSample {
            t: frame.t,
            sup_deviation: sup - u_h,
            u_h,
        });
        frames.push(frame);
    }
    let probe = (config.half_width - 1.0).max(1.0);
    let boundary_influence = config
        .output_times
        .iter()
        .map(|&t| tail_bound_value(datum.mass(), probe, t))
        .fold(0.0, f64::max);
    Ok(RunResult {
        p: params.p(),
        datum: datum.clone(),
        grid: config.grid(),
        frames,
        deviation,
        diagnostics: Diagnostics {
            half_width: config.half_width,
            nx: config.nx,
            dx: config.dx(),
            dt: config.dt,
            steps: state.steps(),
            boundary_mode: config.boundary_mode,
            boundary_influence,
            required_half_width: required,
        },
    })
}
