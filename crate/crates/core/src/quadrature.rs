//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for the kernel integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Kernel half-window in standard deviations for the infinite W-integral.
    pub infinite_cutoff_sigma: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            infinite_cutoff_sigma: 12.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(invalid("quadrature", "tolerances must be positive"));
        }
        if !(self.infinite_cutoff_sigma >= 8.0) {
            return Err(invalid("infinite_cutoff_sigma", "cutoff must be >= 8"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> QuadResult {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, with the initial partition
/// placed at `breaks` (typically the kinks of the integrand).
///
/// Subdivision bisects the segment with the largest error estimate until the
/// summed estimate falls below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> QuadResult {
    let mut heap = BinaryHeap::with_capacity(2 * breaks.len() + 16);
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gauss_kronrod(&f, w[0], w[1]);
            evaluations += 15;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    let mut splits = 0;
    loop {
        let (total, err): (f64, f64) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= target || heap.is_empty() {
            return QuadResult {
                value: total,
                error: err,
                evaluations,
                converged: true,
            };
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if splits >= cfg.max_subdivisions || !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            let (total, err) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            return QuadResult {
                value: total,
                error: err,
                evaluations,
                converged: false,
            };
        }
        splits += 1;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gauss_kronrod(&f, a, b);
            evaluations += 15;
            heap.push(Segment { a, b, value, error });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| x.powi(20) - 3.0 * x.powi(7), -1.0, 2.0, &cfg);
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!(
            (r.value - exact).abs() < 1e-10 * exact.abs(),
            "{} {}",
            r.value,
            exact
        );
        assert!(r.converged);
    }

    #[test]
    fn gaussian_integral() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| (-x * x).exp(), -12.0, 12.0, &cfg);
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64| (1.0 - x.abs()).max(0.0) * (-x * x).exp();
        let plain = integrate(f, -1.0, 1.0, &cfg);
        let split = integrate_with_breaks(f, &[-1.0, 0.0, 1.0], &cfg);
        // sqrt(pi) erf(1) - (1 - e^-1)
        let exact = std::f64::consts::PI.sqrt() * libm::erf(1.0) - (1.0 - (-1.0f64).exp());
        assert!((split.value - exact).abs() < 1e-14);
        assert!((plain.value - exact).abs() < 1e-12);
        assert!(split.evaluations < plain.evaluations);
    }

    #[test]
    fn subdivision_cap_reports_nonconvergence() {
        let cfg = QuadratureConfig {
            max_subdivisions: 3,
            ..Default::default()
        };
        let r = integrate(|x| x.abs().sqrt().recip(), 1e-300, 1.0, &cfg);
        assert!(!r.converged);
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig {
            infinite_cutoff_sigma: 4.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
