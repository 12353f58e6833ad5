//! Parabolic residual `N(ψ) = ψ_t - ψ_xx - [ψ^p]^+` by central differences,
//! and the closed-form residuals of the two comparison functions.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::kernels::KernelEvaluator;
use crate::params::power_excess;

/// Central-difference steps in space and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stencil {
    pub hx: f64,
    pub ht: f64,
}

impl Default for Stencil {
    fn default() -> Self {
        Self { hx: 2e-2, ht: 2e-2 }
    }
}

impl Stencil {
    pub fn halved(&self) -> Self {
        Self {
            hx: 0.5 * self.hx,
            ht: 0.5 * self.ht,
        }
    }
}

#[inline]
fn positive_power(v: f64, p: f64) -> f64 {
    if v > 0.0 {
        v.powf(p)
    } else {
        0.0
    }
}

fn check_points(points: &[(f64, f64)], stencil: Stencil, t_min: f64) -> Result<()> {
    for &(x, t) in points {
        if t - stencil.ht < t_min {
            return Err(domain(
                "residual stencil",
                format!("({x}, {t}): t - ht = {} < {t_min}", t - stencil.ht),
            ));
        }
    }
    Ok(())
}

/// Central-difference `N(ψ)` at each `(x, t)`. The stencil must stay in
/// `t >= t_min`.
pub fn residual_operator<F>(
    field: F,
    points: &[(f64, f64)],
    stencil: Stencil,
    p: f64,
    t_min: f64,
) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> f64,
{
    check_points(points, stencil, t_min)?;
    let Stencil { hx, ht } = stencil;
    Ok(points
        .iter()
        .map(|&(x, t)| {
            let c = field(x, t);
            let dt = (field(x, t + ht) - field(x, t - ht)) / (2.0 * ht);
            let dxx = (field(x + hx, t) - 2.0 * c + field(x - hx, t)) / (hx * hx);
            dt - dxx - positive_power(c, p)
        })
        .collect())
}

/// `N(ψ)` for fields of the form `ψ = base(t) + pert(x, t)`.
///
/// The second difference in `x` only sees `pert`, and the time difference of
/// the two parts is taken separately, so a large spatially constant `base`
/// does not swamp the stencil in rounding error.
pub fn residual_operator_split<B, P>(
    base: B,
    pert: P,
    points: &[(f64, f64)],
    stencil: Stencil,
    p: f64,
    t_min: f64,
) -> Result<Vec<f64>>
where
    B: Fn(f64) -> f64,
    P: Fn(f64, f64) -> f64,
{
    check_points(points, stencil, t_min)?;
    let Stencil { hx, ht } = stencil;
    Ok(points
        .iter()
        .map(|&(x, t)| {
            let b = base(t);
            let w = pert(x, t);
            let db = (base(t + ht) - base(t - ht)) / (2.0 * ht);
            let dw = (pert(x, t + ht) - pert(x, t - ht)) / (2.0 * ht);
            let dxx = (pert(x + hx, t) - 2.0 * w + pert(x - hx, t)) / (hx * hx);
            // [ψ^p]^+ = b^p + ((b + w)^p - b^p)
            let reaction = positive_power(b, p) + power_excess(b, w, p);
            (db - reaction) + (dw - dxx)
        })
        .collect())
}

/// Closed-form `N(u_sub)`:
/// `-p/(1-p)^2 (1+||u0||)^{-2} D_x^2 ((1-p)t + D/(1+||u0||))^{(2p-1)/(1-p)}`.
pub fn subsolution_residual_analytic(ev: &KernelEvaluator, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("subsolution residual", format!("t = {t}")));
    }
    let p = ev.p();
    let a = 1.0 - p;
    let damp = 1.0 / (1.0 + ev.datum().supnorm());
    let d = ev.heat(x, t)?;
    let dx = ev.heat_dx(x, t)?;
    let bracket = a * t + damp * d;
    Ok(-p / (a * a) * damp * damp * dx * dx * bracket.powf((2.0 * p - 1.0) / a))
}

/// Closed-form `N(u_sup)` for `t > 1`, using that `W` solves its linear PDE:
/// `p u_h^{p-1} W - ((u_h + W)^p - u_h^p)`, which is `>= 0` by concavity.
pub fn supersolution_residual_analytic(ev: &KernelEvaluator, x: f64, t: f64) -> Result<f64> {
    let p = ev.p();
    let a = 1.0 - p;
    let w = ev.linearized(x, t)?;
    let uh = ev.homogeneous(t);
    Ok(p * w / (a * t) - power_excess(uh, w, p))
}

/// `N(u_sup)` by central differences.
pub fn supersolution_residual_fd(
    ev: &KernelEvaluator,
    points: &[(f64, f64)],
    stencil: Stencil,
) -> Result<Vec<f64>> {
    residual_operator_split(
        |t| ev.homogeneous(t),
        |x, t| ev.linearized(x, t).expect("stencil checked against t >= 1"),
        points,
        stencil,
        ev.p(),
        1.0,
    )
}

/// `N(u_sub)` by central differences.
pub fn subsolution_residual_fd(
    ev: &KernelEvaluator,
    points: &[(f64, f64)],
    stencil: Stencil,
) -> Result<Vec<f64>> {
    residual_operator_split(
        |t| ev.homogeneous(t),
        |x, t| ev.subsolution_excess(x, t).expect("t >= 0"),
        points,
        stencil,
        ev.p(),
        0.0,
    )
}

/// Residual of the linear PDE `W_t - W_xx - p/((1-p)t) W` by central
/// differences.
pub fn linearized_pde_residual(
    ev: &KernelEvaluator,
    points: &[(f64, f64)],
    stencil: Stencil,
) -> Result<Vec<f64>> {
    check_points(points, stencil, 1.0)?;
    let Stencil { hx, ht } = stencil;
    let growth = ev.p() / (1.0 - ev.p());
    let w = |x: f64, t: f64| ev.linearized(x, t).expect("stencil checked against t >= 1");
    Ok(points
        .iter()
        .map(|&(x, t)| {
            let c = w(x, t);
            let dt = (w(x, t + ht) - w(x, t - ht)) / (2.0 * ht);
            let dxx = (w(x + hx, t) - 2.0 * c + w(x - hx, t)) / (hx * hx);
            dt - dxx - growth / t * c
        })
        .collect())
}
