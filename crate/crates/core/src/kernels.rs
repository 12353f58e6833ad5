//! Evaluators for the heat convolution `D`, the smoothed datum `Δ`, the
//! excess `E`, the linearised solution `W`, the comparison envelopes and the
//! rate coefficients `c_±`.
//!
//! Heat convolutions of the piecewise-linear datum are evaluated panel by
//! panel in closed form with `erfc`. Integrals of `E` have no closed form and
//! go through adaptive Gauss-Kronrod quadrature on a truncated window.

use std::f64::consts::PI;

use serde::Serialize;

use crate::datum::InitialDatum;
use crate::error::{domain, invalid, Result};
use crate::params::{homogeneous_unchecked, power_excess, ProblemParams};
use crate::quadrature::{integrate_with_breaks, QuadratureConfig};

/// Below this time the heat convolution is replaced by the datum itself.
pub const HEAT_TIME_FLOOR: f64 = 1e-12;

const ONE_THIRD: f64 = 1.0 / 3.0;

/// `((1-p) + Δ^{1-p})^{1/(1-p)} - (1-p)^{1/(1-p)}`, evaluated without
/// cancellation for small `Δ`.
pub fn excess_from_delta(delta: f64, p: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    let a = 1.0 - p;
    let q = 1.0 / a;
    a.powf(q) * (q * (delta.powf(a) / a).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, Copy)]
struct KnotTerms {
    z: f64,
    // erfc(|z|)
    erfc_abs: f64,
    // exp(-z^2)
    gauss: f64,
}

// erf(zb) - erf(za) for za <= zb, accurate in both tails.
#[inline]
fn erf_diff(a: &KnotTerms, b: &KnotTerms) -> f64 {
    if a.z >= 0.0 {
        a.erfc_abs - b.erfc_abs
    } else if b.z <= 0.0 {
        b.erfc_abs - a.erfc_abs
    } else {
        2.0 - a.erfc_abs - b.erfc_abs
    }
}

/// Quadrature-backed evaluator for every closed-form object built on one
/// initial datum and one exponent.
///
/// Immutable after construction; all methods take `&self` and may be called
/// concurrently.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    datum: InitialDatum,
    params: ProblemParams,
    quad: QuadratureConfig,
    // E(s) is negligible outside [excess_lo, excess_hi]
    excess_lo: f64,
    excess_hi: f64,
}

impl KernelEvaluator {
    pub fn new(datum: InitialDatum, params: ProblemParams, quad: QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        let mut ev = Self {
            datum,
            params,
            quad,
            excess_lo: -1.0,
            excess_hi: 1.0,
        };
        let (lo, hi) = ev.datum.support();
        ev.excess_hi = ev.excess_cutoff(hi, 1.0);
        ev.excess_lo = ev.excess_cutoff(lo, -1.0);
        Ok(ev)
    }

    pub fn with_defaults(datum: InitialDatum, params: ProblemParams) -> Result<Self> {
        Self::new(datum, params, QuadratureConfig::default())
    }

    pub fn datum(&self) -> &InitialDatum {
        &self.datum
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn p(&self) -> f64 {
        self.params.p()
    }

    /// Window `[lo, hi]` outside which `E` is treated as zero.
    pub fn excess_window(&self) -> (f64, f64) {
        (self.excess_lo, self.excess_hi)
    }

    // Walk outward from the support edge until the remaining tail of E is
    // below abs_tol. E decays like exp(-(1-p)(|s|-1)^2/4), so the tail beyond
    // s is at most E(s) * 2 / ((1-p)(|s|-1)).
    fn excess_cutoff(&self, edge: f64, dir: f64) -> f64 {
        let a = self.params.one_minus_p();
        let target = 1e-2 * self.quad.abs_tol;
        let mut s = edge;
        loop {
            s += dir * 0.25;
            let dist = (s - edge).abs();
            let e = self.excess(s);
            let tail = if dist > 1.0 {
                e * 2.0 / (a * dist)
            } else {
                f64::INFINITY
            };
            if e == 0.0 || tail < target {
                return s;
            }
        }
    }

    fn knot_terms(&self, x: f64, t: f64) -> Vec<KnotTerms> {
        let scale = 1.0 / (2.0 * t.sqrt());
        self.datum
            .knots()
            .iter()
            .map(|&k| {
                let z = (k - x) * scale;
                KnotTerms {
                    z,
                    erfc_abs: libm::erfc(z.abs()),
                    gauss: (-z * z).exp(),
                }
            })
            .collect()
    }

    fn heat_closed(&self, x: f64, t: f64) -> f64 {
        let terms = self.knot_terms(x, t);
        let root = (t / PI).sqrt();
        self.datum
            .panels()
            .zip(terms.windows(2))
            .map(|(panel, ends)| {
                let level = panel.intercept + panel.slope * x;
                0.5 * level * erf_diff(&ends[0], &ends[1])
                    + panel.slope * root * (ends[0].gauss - ends[1].gauss)
            })
            .sum()
    }

    // D_x is the heat convolution of u0', which is piecewise constant.
    fn heat_dx_closed(&self, x: f64, t: f64) -> f64 {
        let terms = self.knot_terms(x, t);
        self.datum
            .panels()
            .zip(terms.windows(2))
            .map(|(panel, ends)| 0.5 * panel.slope * erf_diff(&ends[0], &ends[1]))
            .sum()
    }

    #[inline]
    fn heat_or_datum(&self, x: f64, t: f64) -> f64 {
        if t < HEAT_TIME_FLOOR {
            self.datum.value(x)
        } else {
            self.heat_closed(x, t)
        }
    }

    /// `D(x,t) = (4πt)^{-1/2} ∫ u0(s) exp(-(s-x)^2/(4t)) ds`.
    pub fn heat(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain(
                "D",
                format!("t = {t}; use the datum value at t = 0"),
            ));
        }
        Ok(self.heat_or_datum(x, t))
    }

    /// `D` evaluated by adaptive quadrature of the defining integral, as an
    /// independent route to [`Self::heat`].
    pub fn heat_quadrature(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain("D", format!("t = {t}")));
        }
        let norm = 1.0 / (2.0 * (PI * t).sqrt());
        let f = |s: f64| norm * self.datum.value(s) * (-(s - x) * (s - x) / (4.0 * t)).exp();
        Ok(self.datum_integral(f, x, t))
    }

    /// `∂D/∂x`.
    pub fn heat_dx(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain("D_x", format!("t = {t}")));
        }
        Ok(self.heat_dx_closed(x, t))
    }

    /// `∂D/∂x` by quadrature of the differentiated kernel.
    pub fn heat_dx_quadrature(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain("D_x", format!("t = {t}")));
        }
        let norm = 1.0 / (2.0 * (PI * t).sqrt());
        let f = |s: f64| {
            norm * self.datum.value(s) * (s - x) / (2.0 * t)
                * (-(s - x) * (s - x) / (4.0 * t)).exp()
        };
        Ok(self.datum_integral(f, x, t))
    }

    fn datum_integral<F: Fn(f64) -> f64>(&self, f: F, x: f64, t: f64) -> f64 {
        let half = self.quad.infinite_cutoff_sigma * (2.0 * t).sqrt();
        let (lo, hi) = (x - half, x + half);
        let mut breaks: Vec<f64> = self
            .datum
            .knots()
            .iter()
            .copied()
            .filter(|&k| k > lo && k < hi)
            .collect();
        let (a, b) = self.datum.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            return 0.0;
        }
        breaks.push(a);
        breaks.push(b);
        if x > a && x < b {
            breaks.push(x);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        integrate_with_breaks(f, &breaks, &self.quad).value
    }

    /// `Δ(s) = D(s, 1)`.
    pub fn delta(&self, s: f64) -> f64 {
        self.heat_closed(s, 1.0)
    }

    /// `E(s) = ((1-p) + Δ(s)^{1-p})^{1/(1-p)} - (1-p)^{1/(1-p)}`.
    pub fn excess(&self, s: f64) -> f64 {
        excess_from_delta(self.delta(s), self.p())
    }

    /// Upper bound on `E` in terms of the datum's sup-norm.
    pub fn excess_bound(&self) -> f64 {
        excess_from_delta(self.datum.supnorm(), self.p())
    }

    /// `||E||_∞`, located on a grid over the support and refined by
    /// golden-section search.
    pub fn excess_supnorm(&self) -> f64 {
        let (lo, hi) = self.datum.support();
        let n = 400;
        let h = (hi - lo) / n as f64;
        let (mut best_s, mut best) = (lo, self.excess(lo));
        for i in 1..=n {
            let s = lo + i as f64 * h;
            let e = self.excess(s);
            if e > best {
                best = e;
                best_s = s;
            }
        }
        let (mut a, mut b) = (best_s - h, best_s + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.excess(c) > self.excess(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.max(self.excess(0.5 * (a + b)))
    }

    /// `I(p, u0) = ∫ E(s) ds`.
    pub fn excess_mass(&self) -> f64 {
        self.excess_mass_over(self.excess_lo, self.excess_hi)
    }

    pub fn excess_mass_over(&self, lo: f64, hi: f64) -> f64 {
        let mut breaks: Vec<f64> = self
            .datum
            .knots()
            .iter()
            .copied()
            .filter(|&k| k > lo && k < hi)
            .collect();
        breaks.push(lo);
        breaks.push(hi);
        breaks.sort_by(f64::total_cmp);
        integrate_with_breaks(|s| self.excess(s), &breaks, &self.quad).value
    }

    /// Heat evolution of `E` for time `tau > 0`:
    /// `(4π tau)^{-1/2} ∫ E(s) exp(-(s-x)^2/(4 tau)) ds`.
    pub fn excess_heat(&self, x: f64, tau: f64) -> f64 {
        let sigma = (2.0 * tau).sqrt();
        let half = self.quad.infinite_cutoff_sigma * sigma;
        let lo = self.excess_lo.max(x - half);
        let hi = self.excess_hi.min(x + half);
        if lo >= hi {
            return 0.0;
        }
        let mut breaks = vec![lo, hi];
        for c in [x - 2.0 * sigma, x, x + 2.0 * sigma] {
            if c > lo && c < hi {
                breaks.push(c);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let norm = 1.0 / (2.0 * (PI * tau).sqrt());
        let inv4tau = 1.0 / (4.0 * tau);
        integrate_with_breaks(
            |s| norm * self.excess(s) * (-(s - x) * (s - x) * inv4tau).exp(),
            &breaks,
            &self.quad,
        )
        .value
    }

    /// Solution `W` of the linearisation about `u_h`, defined for `t >= 1`
    /// with `W(x, 1) = E(x)`.
    pub fn linearized(&self, x: f64, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(domain("W", format!("t = {t} < 1")));
        }
        if t == 1.0 {
            return Ok(self.excess(x));
        }
        Ok(t.powf(self.growth_power()) * self.excess_heat(x, t - 1.0))
    }

    // p / (1 - p)
    #[inline]
    fn growth_power(&self) -> f64 {
        self.p() / self.params.one_minus_p()
    }

    pub fn homogeneous(&self, t: f64) -> f64 {
        homogeneous_unchecked(t, self.p())
    }

    /// Upper bound `(||u0||^{1-p} + (1-p)t)^{1/(1-p)}` on the solution.
    pub fn solution_upper(&self, t: f64) -> f64 {
        let a = self.params.one_minus_p();
        (self.datum.supnorm().powf(a) + a * t).powf(1.0 / a)
    }

    /// `((1-p)t)^{(3p-1)/(2(1-p))}`.
    pub fn rate_scale(&self, t: f64) -> f64 {
        (self.params.one_minus_p() * t).powf(self.params.rate_exponent())
    }

    /// Subsolution `((1-p)t + D/(1+||u0||))^{1/(1-p)}`.
    pub fn subsolution(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.homogeneous(t) + self.subsolution_excess(x, t)?)
    }

    /// `u_sub(x,t) - u_h(t)`, computed without cancellation.
    pub fn subsolution_excess(&self, x: f64, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain("u_sub", format!("t = {t}")));
        }
        let a = self.params.one_minus_p();
        let damped = self.heat_or_datum(x, t) / (1.0 + self.datum.supnorm());
        Ok(power_excess(a * t, damped, 1.0 / a))
    }

    /// Supersolution `u_h(t) + W(x,t)`, `t >= 1`.
    pub fn supersolution(&self, x: f64, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(domain("u_sup", format!("t = {t} < 1")));
        }
        Ok(self.homogeneous(t) + self.linearized(x, t)?)
    }

    /// Upper envelope `((1-p)t + D^{1-p})^{1/(1-p)}`.
    pub fn envelope_upper(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.homogeneous(t) + self.envelope_upper_excess(x, t)?)
    }

    pub fn envelope_upper_excess(&self, x: f64, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain("upper envelope", format!("t = {t}")));
        }
        let a = self.params.one_minus_p();
        let d = self.heat_or_datum(x, t).max(0.0);
        Ok(power_excess(a * t, d.powf(a), 1.0 / a))
    }

    /// Lower rate coefficient
    /// `c_-(x,t) = (1+||u0||)^{-1} / (2 sqrt(π(1-p))) ∫ u0(s) exp(-(s-x)^2/(4t)) ds`.
    pub fn c_minus(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain("c_minus", format!("t = {t}")));
        }
        let a = self.params.one_minus_p();
        // ∫ u0 kernel = 2 sqrt(π t) D
        let integral = 2.0 * (PI * t).sqrt() * self.heat_or_datum(x, t);
        Ok(integral / ((1.0 + self.datum.supnorm()) * 2.0 * (PI * a).sqrt()))
    }

    /// Upper rate coefficient
    /// `c_+(x,t) = (1-p)^{(1-2p)/(1-p)} / sqrt(2π(1-p)) ∫ E(s) exp(-(s-x)^2/(4(t-1))) ds`.
    pub fn c_plus(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 1.0) {
            return Err(domain("c_plus", format!("t = {t} <= 1")));
        }
        let tau = t - 1.0;
        let integral = 2.0 * (PI * tau).sqrt() * self.excess_heat(x, tau);
        Ok(self.c_plus_prefactor() * integral)
    }

    /// Upper rate envelope `c_+(x,t) ((1-p)t)^{(3p-1)/(2(1-p))}` in the
    /// simplified form `t^{p/(1-p)} sqrt(2(t-1)/t) H(x, t-1)`, which shares
    /// every factor with `W` except the ratio; the ratio is `>= 1` in floating
    /// point for `t >= 2`, so `W <= rate_upper` holds exactly there.
    pub fn rate_upper(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 1.0) {
            return Err(domain("c_plus", format!("t = {t} <= 1")));
        }
        let tau = t - 1.0;
        Ok(t.powf(self.growth_power()) * (2.0 * tau / t).sqrt() * self.excess_heat(x, tau))
    }

    fn c_plus_prefactor(&self) -> f64 {
        let p = self.p();
        let a = 1.0 - p;
        a.powf((1.0 - 2.0 * p) / a) / (2.0 * PI * a).sqrt()
    }

    /// `t -> ∞` limit of `c_-(x, t)`.
    pub fn c_minus_limit(&self) -> f64 {
        let a = self.params.one_minus_p();
        self.datum.mass() / ((1.0 + self.datum.supnorm()) * 2.0 * (PI * a).sqrt())
    }

    /// `t -> ∞` limit of `c_+(x, t)`.
    pub fn c_plus_limit(&self) -> f64 {
        self.c_plus_prefactor() * self.excess_mass()
    }

    /// Limiting bounds `(c̄_-, c̄_+)` on the deviation at the transitional
    /// exponent. Only defined when `|p - 1/3| <= band`.
    pub fn cbar_constants(&self, band: f64) -> Result<CbarConstants> {
        if (self.p() - ONE_THIRD).abs() > band {
            return Err(invalid(
                "p",
                format!(
                    "c̄ constants need p within {band:e} of 1/3, got {}",
                    self.p()
                ),
            ));
        }
        let minus =
            self.datum.mass() / ((1.0 + self.datum.supnorm()) * 2.0 * (2.0 * PI / 3.0).sqrt());
        let plus = self.excess_mass() / (2.0 * PI).sqrt();
        Ok(CbarConstants { minus, plus })
    }

    /// Gaussian bound on `D(x,t)` for `|x| >= 1`.
    pub fn tail_bound(&self, x: f64, t: f64) -> Result<f64> {
        if !(x.abs() >= 1.0) {
            return Err(domain("tail_bound", format!("|x| = {} < 1", x.abs())));
        }
        if !(t > 0.0) {
            return Err(domain("tail_bound", format!("t = {t}")));
        }
        Ok(tail_bound_value(self.datum.mass(), x, t))
    }
}

pub(crate) fn tail_bound_value(mass: f64, x: f64, t: f64) -> f64 {
    let r = x.abs() - 1.0;
    mass / (2.0 * (PI * t).sqrt()) * (-r * r / (4.0 * t)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CbarConstants {
    pub minus: f64,
    pub plus: f64,
}
