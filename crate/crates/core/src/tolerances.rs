use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Numerical thresholds shared by the classifiers and identity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Null band: `|g(v,v)| ≤ null_band · |v|²_ref`; also the zero-vector threshold.
    pub null_band: f64,
    /// Relative determinant threshold for `g` and `γ`.
    pub degeneracy: f64,
    /// `|g(n, e_a)| ≤ normality · (1 + |n|_ref |e_a|_ref)` for a vector to count as normal.
    pub normality: f64,
    /// `‖£_ξ g − 2Ψ g‖ ≤ conformal · max(1, ‖g‖)` for ξ to be accepted as conformal Killing.
    pub conformal: f64,
    /// Per-point residual of the fit `H ≈ λ ξ` for null Killing fields.
    pub alignment: f64,
    /// Pointwise sampling stays this far from coordinate poles.
    pub pole_epsilon: f64,
    /// Residual threshold for integral identities.
    pub identity: f64,
    /// Absolute threshold (relative to `1 + ∫|integrand|`) below which an integral counts as zero.
    pub integral_zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            null_band: 1e-9,
            degeneracy: 1e-12,
            normality: 1e-8,
            conformal: 1e-8,
            alignment: 1e-6,
            pole_epsilon: 1e-6,
            identity: 1e-6,
            integral_zero: 1e-8,
        }
    }
}

pub const MIN_TOLERANCE: f64 = 1e-15;
pub const MAX_TOLERANCE: f64 = 1e-2;

impl Tolerances {
    pub const NAMES: [&'static str; 8] =
        ["null_band", "degeneracy", "normality", "conformal", "alignment", "pole_epsilon", "identity", "integral_zero"];

    /// Overrides one tolerance by name; values must lie in `[1e-15, 1e-2]`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(MIN_TOLERANCE..=MAX_TOLERANCE).contains(&value) {
            return Err(GeomError::InvalidTolerance {
                name: name.to_string(),
                value,
                reason: format!("must lie in [{MIN_TOLERANCE:e}, {MAX_TOLERANCE:e}]"),
            });
        }
        let slot = match name {
            "null_band" => &mut self.null_band,
            "degeneracy" => &mut self.degeneracy,
            "normality" => &mut self.normality,
            "conformal" => &mut self.conformal,
            "alignment" => &mut self.alignment,
            "pole_epsilon" => &mut self.pole_epsilon,
            "identity" => &mut self.identity,
            "integral_zero" => &mut self.integral_zero,
            _ => {
                return Err(GeomError::InvalidTolerance {
                    name: name.to_string(),
                    value,
                    reason: format!("unknown tolerance; expected one of {:?}", Self::NAMES),
                })
            }
        };
        *slot = value;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_are_bounded() {
        let mut t = Tolerances::default();
        t.set("null_band", 1e-7).unwrap();
        assert_eq!(t.null_band, 1e-7);
        assert!(t.set("null_band", 0.5).is_err());
        assert!(t.set("null_band", 1e-20).is_err());
        assert!(t.set("bogus", 1e-5).is_err());
    }
}
