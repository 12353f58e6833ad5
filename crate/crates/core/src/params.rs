//! Reaction exponent, the homogeneous state and the exponent tables.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sublinear reaction exponent `p` in `u_t = u_xx + [u^p]^+`.
///
/// `p` is validated strictly inside `(0, 1)`. The spatial dimension is only
/// used for the exponent tables; all simulation is one-dimensional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    p: f64,
    dim: u32,
}

impl ProblemParams {
    pub fn new(p: f64) -> Result<Self> {
        Self::with_dim(p, 1)
    }

    pub fn with_dim(p: f64, dim: u32) -> Result<Self> {
        validate_exponent(p)?;
        if dim == 0 {
            return Err(invalid("dim", "spatial dimension must be >= 1"));
        }
        Ok(Self { p, dim })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// `1 - p`, the exponent of the reaction flow's conserved quantity.
    #[inline]
    pub fn one_minus_p(&self) -> f64 {
        1.0 - self.p
    }

    /// `((1-p) t)^{1/(1-p)}`.
    pub fn homogeneous(&self, t: f64) -> Result<f64> {
        homogeneous_state(t, self.p)
    }

    /// `(3p - 1) / (2(1-p))`.
    pub fn rate_exponent(&self) -> f64 {
        rate_exponent_unchecked(self.p)
    }
}

pub(crate) fn validate_exponent(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(
            "p",
            format!("exponent must satisfy 0 < p < 1, got {p}"),
        ));
    }
    Ok(())
}

/// The spatially homogeneous solution `u_h(t) = ((1-p) t)^{1/(1-p)}`.
pub fn homogeneous_state(t: f64, p: f64) -> Result<f64> {
    validate_exponent(p)?;
    if !(t >= 0.0) {
        return Err(invalid("t", format!("time must be >= 0, got {t}")));
    }
    Ok(homogeneous_unchecked(t, p))
}

#[inline]
pub(crate) fn homogeneous_unchecked(t: f64, p: f64) -> f64 {
    let a = 1.0 - p;
    (a * t).powf(1.0 / a)
}

/// Algebraic rate `(3p - 1) / (2(1-p))` of the deviation from `u_h`.
pub fn rate_exponent(p: f64) -> Result<f64> {
    validate_exponent(p)?;
    Ok(rate_exponent_unchecked(p))
}

#[inline]
fn rate_exponent_unchecked(p: f64) -> f64 {
    (3.0 * p - 1.0) / (2.0 * (1.0 - p))
}

/// Pair of critical exponents in `N` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponents {
    pub dim: u32,
    /// Transitional stability exponent `N / (N + 2)` of the sublinear problem.
    pub p_minus: f64,
    /// Fujita blow-up exponent `1 + 2 / N` of the superlinear problem.
    pub p_plus: f64,
}

impl CriticalExponents {
    pub fn product(&self) -> f64 {
        self.p_minus * self.p_plus
    }
}

pub fn critical_exponents(dim: i64) -> Result<CriticalExponents> {
    if dim <= 0 {
        return Err(invalid("N", format!("dimension must be >= 1, got {dim}")));
    }
    let n = dim as f64;
    Ok(CriticalExponents {
        dim: dim as u32,
        p_minus: n / (n + 2.0),
        p_plus: (n + 2.0) / n,
    })
}

/// `(base + incr)^q - base^q` without cancellation when `incr << base`.
///
/// Requires `base >= 0`, `base + incr >= 0`.
pub fn power_excess(base: f64, incr: f64, q: f64) -> f64 {
    if base > 0.0 {
        let r = incr / base;
        if r.abs() < 0.5 {
            return base.powf(q) * (q * r.ln_1p()).exp_m1();
        }
    }
    (base + incr).powf(q) - base.powf(q)
}
