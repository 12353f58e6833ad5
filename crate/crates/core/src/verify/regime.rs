use serde::Serialize;

use crate::error::{invalid, Result};
use crate::params::validate_exponent;

pub const TRANSITIONAL_EXPONENT: f64 = 1.0 / 3.0;
pub const DEFAULT_BAND: f64 = 1e-9;

/// Large-time behaviour of the homogeneous state under compactly supported
/// perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Deviation decays to zero.
    AsymptoticallyStable,
    /// Deviation stays between two positive constants.
    LiapunovStable,
    /// Deviation grows without bound.
    Unstable,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AsymptoticallyStable => "asymptotically_stable",
            Self::LiapunovStable => "liapunov_stable",
            Self::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub regime: Regime,
    pub p: f64,
    pub band: f64,
}

pub fn classify_regime(p: f64, band: f64) -> Result<RegimeClassification> {
    validate_exponent(p)?;
    if !(band > 0.0 && band < 1.0 / 6.0) {
        return Err(invalid("band", format!("must lie in (0, 1/6), got {band}")));
    }
    let regime = if p < TRANSITIONAL_EXPONENT - band {
        Regime::AsymptoticallyStable
    } else if p > TRANSITIONAL_EXPONENT + band {
        Regime::Unstable
    } else {
        Regime::LiapunovStable
    };
    Ok(RegimeClassification { regime, p, band })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            classify_regime(0.2, 1e-9).unwrap().regime,
            Regime::AsymptoticallyStable
        );
        assert_eq!(classify_regime(0.5, 1e-9).unwrap().regime, Regime::Unstable);
        assert_eq!(
            classify_regime(1.0 / 3.0, 1e-9).unwrap().regime,
            Regime::LiapunovStable
        );
        assert_eq!(
            classify_regime(0.3333, 1e-3).unwrap().regime,
            Regime::LiapunovStable
        );
        assert!(classify_regime(0.3, 0.2).is_err());
        assert!(classify_regime(1.2, 1e-9).is_err());
    }

    proptest! {
        #[test]
        fn three_interval_partition(p in 1e-6f64..0.999_999, band in 1e-12f64..0.16) {
            let r = classify_regime(p, band).unwrap().regime;
            let expected = if (p - TRANSITIONAL_EXPONENT).abs() <= band {
                Regime::LiapunovStable
            } else if p < TRANSITIONAL_EXPONENT {
                Regime::AsymptoticallyStable
            } else {
                Regime::Unstable
            };
            prop_assert_eq!(r, expected);
        }
    }
}
