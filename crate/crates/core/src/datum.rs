//! Compactly supported, continuous piecewise-linear initial data.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A linear piece `u0(s) = intercept + slope * s` on `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub left: f64,
    pub right: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl Panel {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        self.intercept + self.slope * s
    }
}

/// Nonnegative, nontrivial, continuous piecewise-linear initial datum with
/// support in `[-1, 1]`.
///
/// Values are linearly interpolated between knots and are identically zero
/// outside the first and last knot. Both endpoint values must be zero so the
/// zero extension is continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDatum", into = "RawDatum")]
pub struct InitialDatum {
    knots: Vec<f64>,
    values: Vec<f64>,
    supnorm: f64,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDatum {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawDatum> for InitialDatum {
    type Error = crate::Error;
    fn try_from(raw: RawDatum) -> Result<Self> {
        InitialDatum::new(raw.knots, raw.values)
    }
}

impl From<InitialDatum> for RawDatum {
    fn from(d: InitialDatum) -> Self {
        RawDatum {
            knots: d.knots,
            values: d.values,
        }
    }
}

impl InitialDatum {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(invalid(
                "datum",
                format!("{} knots but {} values", knots.len(), values.len()),
            ));
        }
        if knots.len() < 3 {
            return Err(invalid("datum", "need at least three knots"));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("datum", "knots and values must be finite"));
        }
        if knots.iter().any(|k| k.abs() > 1.0) {
            return Err(invalid("datum", "knots must lie in [-1, 1]"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("datum", "knots must be strictly increasing"));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(invalid("datum", "values must be nonnegative"));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(invalid("datum", "endpoint values must be zero"));
        }
        let supnorm = values.iter().copied().fold(0.0, f64::max);
        if supnorm <= 0.0 {
            return Err(invalid("datum", "datum is identically zero"));
        }
        let mass = knots
            .windows(2)
            .zip(values.windows(2))
            .map(|(k, v)| 0.5 * (k[1] - k[0]) * (v[0] + v[1]))
            .sum();
        Ok(Self {
            knots,
            values,
            supnorm,
            mass,
        })
    }

    /// `u0(x) = 1 - |x|` on `[-1, 1]`.
    pub fn tent() -> Self {
        Self::new(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]).expect("tent datum is valid")
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn supnorm(&self) -> f64 {
        self.supnorm
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn value(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        // first knot strictly greater than x
        let j = self.knots.partition_point(|&k| k <= x);
        if j == self.knots.len() {
            return self.values[j - 1];
        }
        let (k0, k1) = (self.knots[j - 1], self.knots[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        v0 + (v1 - v0) * (x - k0) / (k1 - k0)
    }

    pub fn panels(&self) -> impl Iterator<Item = Panel> + '_ {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| {
                let slope = (v[1] - v[0]) / (k[1] - k[0]);
                Panel {
                    left: k[0],
                    right: k[1],
                    intercept: v[0] - slope * k[0],
                    slope,
                }
            })
    }

    /// True when `u0(-x) = u0(x)` at every knot.
    pub fn is_even(&self) -> bool {
        let n = self.knots.len();
        (0..n).all(|i| {
            self.knots[i] == -self.knots[n - 1 - i] && self.values[i] == self.values[n - 1 - i]
        })
    }
}
